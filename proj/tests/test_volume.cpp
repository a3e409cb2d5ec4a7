#include <doctest.h>

#include <random>
#include <stdexcept>

#include "ctreg/volume.hpp"

using namespace ctreg;

TEST_SUITE_BEGIN("volume");

TEST_CASE("Volume3D enforces its invariants") {
  CHECK_THROWS_AS(Volume3D({0, 2, 2}, {1, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(Volume3D({2, 2, 2}, {0.0, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(Volume3D({2, 2, 2}, {1, -1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(Volume3D({2, 2, 2}, {1, 1, 1}, std::vector<voxel_t>(7)),
                  std::invalid_argument);

  Volume3D v({3, 4, 5}, {0.5, 0.5, 2.0}, 7);
  CHECK(v.size() == 60);
  CHECK(v.at(2, 3, 4) == 7);
}

TEST_CASE("voxel order is x-fastest") {
  Volume3D v({2, 3, 2}, {1, 1, 1});
  for (std::size_t i = 0; i < v.size(); ++i) v.voxels[i] = static_cast<voxel_t>(i);
  CHECK(v.at(0, 0, 0) == 0);
  CHECK(v.at(1, 0, 0) == 1);
  CHECK(v.at(0, 1, 0) == 2);
  CHECK(v.at(1, 2, 0) == 5);
  CHECK(v.at(0, 0, 1) == 6);
  CHECK(v.at(1, 2, 1) == 11);
}

TEST_CASE("Image2D enforces pixel count") {
  CHECK_THROWS_AS(Image2D(3, 3, std::vector<voxel_t>(8)), std::invalid_argument);
  Image2D img(3, 2, std::vector<voxel_t>{1, 2, 3, 4, 5, 6});
  CHECK(img.at(0, 0) == 1);
  CHECK(img.at(2, 0) == 3);
  CHECK(img.at(0, 1) == 4);
  CHECK_FALSE(img.empty());
  CHECK(Image2D(0, 4).empty());
}

TEST_CASE("quantize bins by the floor rule") {
  QuantizationSpec q{4, 0, 100};
  Volume3D v({4, 1, 1}, {1, 1, 1});

  SUBCASE("bounds") {
    v.voxels = {0, 100, -50, 2000};
    const Volume3D out = quantize(v, q);
    CHECK(out.voxels[0] == 0);   // lower bound
    CHECK(out.voxels[1] == 3);   // upper bound maps to L-1
    CHECK(out.voxels[2] == 0);   // clamped below
    CHECK(out.voxels[3] == 3);   // clamped above
  }

  SUBCASE("interior values") {
    v.voxels = {10, 30, 55, 80};
    const Volume3D out = quantize(v, q);
    CHECK(out.voxels[0] == 0);
    CHECK(out.voxels[1] == 1);
    CHECK(out.voxels[2] == 2);
    CHECK(out.voxels[3] == 3);
  }

  SUBCASE("dims and spacing preserved") {
    Volume3D w({2, 3, 4}, {0.7, 0.8, 0.9}, 5);
    const Volume3D out = quantize(w, q);
    CHECK(out.dims == w.dims);
    CHECK(out.spacing == w.spacing);
  }

  SUBCASE("invalid spec rejected") {
    CHECK_THROWS_AS(quantize(v, QuantizationSpec{1, 0, 100}), std::invalid_argument);
    CHECK_THROWS_AS(quantize(v, QuantizationSpec{4, 100, 100}), std::invalid_argument);
    CHECK_THROWS_AS(quantize(v, QuantizationSpec{4, 200, 100}), std::invalid_argument);
  }
}

TEST_CASE("quantization is monotone") {
  std::mt19937 rng(11);
  QuantizationSpec q{16, -1024, 3071};
  for (int trial = 0; trial < 2000; ++trial) {
    const int a = static_cast<int>(rng() % 9000) - 4500;
    const int b = static_cast<int>(rng() % 9000) - 4500;
    const int lo = std::min(a, b), hi = std::max(a, b);
    CHECK(q.level_of(lo) <= q.level_of(hi));
  }
}

TEST_CASE("quantization is idempotent on its own output levels") {
  std::mt19937 rng(12);
  for (int levels : {2, 4, 16}) {
    QuantizationSpec base{levels, -1024, 3071};
    QuantizationSpec relevel{levels, 0, levels - 1};
    Volume3D v({6, 5, 4}, {1, 1, 1});
    for (auto& x : v.voxels) x = static_cast<voxel_t>(rng() % 5000) - 1200;
    const Volume3D once = quantize(v, base);
    const Volume3D twice = quantize(once, relevel);
    CHECK(once.voxels == twice.voxels);
  }
}

TEST_SUITE_END();
