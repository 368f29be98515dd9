#include "pstereo/feature_clone.hpp"

namespace pstereo {

FeatureMap clone_features(const FeatureMap& left) {
    return left;  // value semantics: deep copy of the data vector
}

}  // namespace pstereo
