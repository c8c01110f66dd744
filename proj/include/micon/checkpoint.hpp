#pragma once

#include <string>

#include "micon/model.hpp"

namespace micon::model {

// Binary checkpoint: "MICN" magic, u32 format version, hyperparameter block
// as UTF-8 key=value entries (plus feature_dim), then named tensors stored as
// little-endian f32 including batch-norm running statistics.  Writes go to a
// temp file in the same directory and are renamed into place.
void save_checkpoint(const ModelParams& mp, const std::string& path);

// Throws ArtifactError on missing file, bad magic, unsupported version, or
// tensor shape mismatch against the declared hyperparameters.
ModelParams load_checkpoint(const std::string& path);

}  // namespace micon::model
