#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "ctreg/phantom.hpp"

using namespace ctreg;

TEST_SUITE_BEGIN("phantom");

TEST_CASE("no lesions and no noise gives a constant volume") {
  PhantomSpec spec;
  spec.dims = {8, 8, 8};
  spec.background = 40;
  const Volume3D v = generate_phantom(spec);
  for (voxel_t x : v.voxels) CHECK(x == 40);
}

TEST_CASE("same spec and seed give identical volumes") {
  PhantomSpec spec;
  spec.dims = {12, 10, 9};
  spec.background = -10;
  spec.lesions = {{{6, 5, 4}, 3.0, 150}};
  spec.noise_amplitude = 5;
  spec.seed = 424242;
  const Volume3D first = generate_phantom(spec);
  CHECK(first == generate_phantom(spec));

  spec.seed = 424243;
  CHECK(first != generate_phantom(spec));
}

TEST_CASE("lesion voxel count matches the lattice-point count") {
  PhantomSpec spec;
  spec.dims = {16, 16, 16};
  spec.background = 0;
  const Index3 c{8, 8, 8};
  spec.lesions = {{c, 3.0, 100}};
  const Volume3D v = generate_phantom(spec);

  long long in_volume = 0;
  for (voxel_t x : v.voxels)
    if (x == 100) ++in_volume;

  // Independent count of integer points strictly inside the sphere.
  long long expected = 0;
  for (int dz = -3; dz <= 3; ++dz)
    for (int dy = -3; dy <= 3; ++dy)
      for (int dx = -3; dx <= 3; ++dx)
        if (dx * dx + dy * dy + dz * dz < 9) ++expected;

  CHECK(in_volume == expected);
}

TEST_CASE("later lesions overwrite earlier ones") {
  PhantomSpec spec;
  spec.dims = {10, 10, 10};
  spec.lesions = {{{5, 5, 5}, 4.0, 100}, {{5, 5, 5}, 2.0, 200}};
  const Volume3D v = generate_phantom(spec);
  CHECK(v.at(5, 5, 5) == 200);
  CHECK(v.at(5, 5, 8) == 100);  // distance 3: inside r=4, outside r=2
  CHECK(v.at(5, 5, 9) == 0);    // distance 4: on the r=4 boundary, excluded
}

TEST_CASE("noise stays within the amplitude") {
  PhantomSpec spec;
  spec.dims = {10, 10, 10};
  spec.background = 50;
  spec.noise_amplitude = 2;
  spec.seed = 7;
  const Volume3D v = generate_phantom(spec);
  bool saw_nonzero = false;
  for (voxel_t x : v.voxels) {
    CHECK(x >= 48);
    CHECK(x <= 52);
    if (x != 50) saw_nonzero = true;
  }
  CHECK(saw_nonzero);
}

TEST_CASE("invalid specs are rejected") {
  PhantomSpec spec;
  spec.dims = {8, 8, 8};
  spec.lesions = {{{8, 0, 0}, 1.0, 10}};
  CHECK_THROWS_AS(generate_phantom(spec), std::invalid_argument);

  spec.lesions = {{{0, 0, 0}, -1.0, 10}};
  CHECK_THROWS_AS(generate_phantom(spec), std::invalid_argument);

  spec.lesions.clear();
  spec.noise_amplitude = -1;
  CHECK_THROWS_AS(generate_phantom(spec), std::invalid_argument);
}

TEST_SUITE_END();
