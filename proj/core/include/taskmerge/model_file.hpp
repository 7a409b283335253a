#pragma once

#include <string>
#include <string_view>

// Versioned model-file envelope shared by the boosted and naive predictors.
// Line one is the magic+version, line two the model kind; the rest is
// kind-specific.

namespace taskmerge {

inline constexpr std::string_view kModelFileMagic = "taskmerge-model v1";

/// Reads the kind tag ("gbdt", "naive") without loading the body.
/// Throws on a missing file or an unrecognized envelope.
std::string model_file_kind(const std::string& path);

}  // namespace taskmerge
