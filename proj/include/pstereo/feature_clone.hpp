#pragma once

#include "pstereo/core_types.hpp"

namespace pstereo {

// The virtual right view as an exact, independently-owned copy of the left
// features. Needs no depth or disparity input by construction.
FeatureMap clone_features(const FeatureMap& left);

}  // namespace pstereo
