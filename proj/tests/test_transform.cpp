#include <doctest.h>

#include <cmath>
#include <random>

#include "ctreg/phantom.hpp"
#include "ctreg/transform.hpp"

using namespace ctreg;

namespace {

double max_abs_offdiag(const AffineMap& m) {
  // || W^T W - I ||_inf
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double dot = 0.0;
      for (int k = 0; k < 3; ++k) dot += m.w[k][i] * m.w[k][j];
      worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
    }
  return worst;
}

}  // namespace

TEST_SUITE_BEGIN("transform");

TEST_CASE("zero params build the identity") {
  const AffineMap m = build_transform({}, {7.5, 7.5, 7.5});
  for (int i = 0; i < 3; ++i) {
    CHECK(m.t[i] == doctest::Approx(0.0).epsilon(1e-12));
    for (int j = 0; j < 3; ++j)
      CHECK(m.w[i][j] == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
  }
}

TEST_CASE("quarter turn about z moves +x to +y") {
  RigidParams p;
  p.rz = M_PI / 2.0;
  const Vec3 center{10, 10, 10};
  const AffineMap m = build_transform(p, center);
  const Vec3 out = m.apply({11, 10, 10});
  CHECK(out.x == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(out.y == doctest::Approx(11.0).epsilon(1e-9));
  CHECK(out.z == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("pure translation decomposes cleanly") {
  RigidParams p;
  p.tx = 3.0;
  const AffineMap m = build_transform(p, {5, 5, 5});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(m.w[i][j] == (i == j ? 1.0 : 0.0));
  CHECK(m.t[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(m.t[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(m.t[2] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("rigid linear block is orthogonal and inverse composes to identity") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    RigidParams p;
    p.rx = (static_cast<double>(rng() % 2000) - 1000) / 1000.0;
    p.ry = (static_cast<double>(rng() % 2000) - 1000) / 1000.0;
    p.rz = (static_cast<double>(rng() % 2000) - 1000) / 1000.0;
    p.tx = (static_cast<double>(rng() % 200) - 100) / 10.0;
    p.ty = (static_cast<double>(rng() % 200) - 100) / 10.0;
    p.tz = (static_cast<double>(rng() % 200) - 100) / 10.0;
    const AffineMap m = build_transform(p, {16, 16, 16});

    CHECK(max_abs_offdiag(m) < 1e-9);
    const double det = determinant(m);
    CHECK(det == doctest::Approx(1.0).epsilon(1e-9));

    const AffineMap round = compose(m, invert(m));
    for (int i = 0; i < 3; ++i) {
      CHECK(round.t[i] == doctest::Approx(0.0).epsilon(1e-9));
      for (int j = 0; j < 3; ++j)
        CHECK(round.w[i][j] == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("invalid params and degenerate maps are rejected") {
  RigidParams p;
  p.scale = 0.0;
  CHECK_THROWS_AS(build_transform(p, {0, 0, 0}), std::invalid_argument);
  p.scale = -2.0;
  CHECK_THROWS_AS(build_transform(p, {0, 0, 0}), std::invalid_argument);

  AffineMap degenerate;
  degenerate.w[0][0] = 0.0;
  degenerate.w[1][1] = 0.0;  // rank 1
  degenerate.w[2][2] = 0.0;
  CHECK_THROWS_AS(invert(degenerate), std::invalid_argument);

  Volume3D v({4, 4, 4}, {1, 1, 1}, 1);
  CHECK_THROWS_AS(resample(v, degenerate, Interpolation::nearest),
                  std::invalid_argument);
}

TEST_CASE("resample under the identity is the identity") {
  PhantomSpec spec;
  spec.dims = {12, 11, 10};
  spec.background = 30;
  spec.lesions = {{{6, 5, 5}, 3.0, 120}};
  spec.noise_amplitude = 3;
  spec.seed = 9;
  const Volume3D v = generate_phantom(spec);
  const AffineMap identity;
  CHECK(resample(v, identity, Interpolation::nearest) == v);
  CHECK(resample(v, identity, Interpolation::trilinear) == v);
}

TEST_CASE("integer translation shifts voxels and fills the background") {
  Volume3D v({6, 5, 4}, {1, 1, 1});
  for (std::size_t i = 0; i < v.size(); ++i) v.voxels[i] = static_cast<voxel_t>(i);
  RigidParams p;
  p.tx = 2.0;
  const AffineMap m = build_transform(p, volume_center(v));
  const Volume3D out = resample(v, m, Interpolation::nearest);
  for (int z = 0; z < 4; ++z)
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 6; ++x) {
        if (x >= 2)
          CHECK(out.at(x, y, z) == v.at(x - 2, y, z));
        else
          CHECK(out.at(x, y, z) == kDefaultResampleBackground);
      }
}

TEST_CASE("rotate there and back leaves the interior mostly intact") {
  PhantomSpec spec;
  spec.dims = {24, 24, 24};
  spec.background = 20;
  spec.lesions = {{{12, 12, 12}, 6.0, 180}, {{6, 15, 10}, 3.0, 90}};
  const Volume3D v = generate_phantom(spec);

  RigidParams p;
  p.rz = 0.3;
  const AffineMap m = build_transform(p, volume_center(v));
  const Volume3D there = resample(v, m, Interpolation::nearest);
  const Volume3D back = resample(there, invert(m), Interpolation::nearest);

  long long mismatched = 0, interior = 0;
  const int margin = 6;
  for (int z = margin; z < 24 - margin; ++z)
    for (int y = margin; y < 24 - margin; ++y)
      for (int x = margin; x < 24 - margin; ++x) {
        ++interior;
        if (back.at(x, y, z) != v.at(x, y, z)) ++mismatched;
      }
  CHECK(static_cast<double>(mismatched) / interior < 0.05);
}

TEST_CASE("composition consistency for same-sign integer translations") {
  Volume3D v({8, 7, 6}, {1, 1, 1});
  std::mt19937 rng(17);
  for (auto& x : v.voxels) x = static_cast<voxel_t>(rng() % 100);

  RigidParams p1, p2;
  p1.tx = 2.0;
  p1.ty = 1.0;
  p2.tx = 1.0;
  p2.tz = 2.0;
  const AffineMap t1 = build_transform(p1, volume_center(v));
  const AffineMap t2 = build_transform(p2, volume_center(v));

  const Volume3D sequential =
      resample(resample(v, t1, Interpolation::nearest), t2, Interpolation::nearest);
  const Volume3D composed = resample(v, compose(t2, t1), Interpolation::nearest);
  CHECK(sequential == composed);
}

TEST_CASE("trilinear averages fractional positions") {
  Volume3D v({3, 1, 1}, {1, 1, 1}, 0);
  v.voxels = {0, 10, 20};
  RigidParams p;
  p.tx = 0.5;  // sample positions shift by -0.5
  const AffineMap m = build_transform(p, volume_center(v));
  const Volume3D out = resample(v, m, Interpolation::trilinear, 0);
  CHECK(out.voxels[1] == 5);   // between 0 and 10
  CHECK(out.voxels[2] == 15);  // between 10 and 20
}

TEST_SUITE_END();
