#pragma once

#include "ctreg/catalog.hpp"
#include "ctreg/fusion.hpp"
#include "ctreg/parallel.hpp"
#include "ctreg/phantom.hpp"
#include "ctreg/pipeline.hpp"
#include "ctreg/registration.hpp"
#include "ctreg/similarity.hpp"
#include "ctreg/similarity_oracle.hpp"
#include "ctreg/transform.hpp"
#include "ctreg/volume.hpp"
#include "ctreg/volume_io.hpp"
