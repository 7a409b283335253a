#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "taskmerge/workload.hpp"

// Feature encoding for merge cases and the on-disk dataset contract shared
// by the gen/train/eval commands. VIC operations are encoded as counts per
// kind (parameter values are deliberately discarded); codec parameters are
// one-hot flags.

namespace taskmerge {

struct FeatureVector {
  double duration_s = 0.0;
  double size_kb = 0.0;
  double framerate = 0.0;
  int width = 0;
  int height = 0;
  int b_count = 0;  // bit-rate changing sub-tasks
  int s_count = 0;  // frame-rate changing sub-tasks
  int r_count = 0;  // resolution changing sub-tasks
  int mpeg4 = 0;
  int vp9 = 0;
  int hevc = 0;

  static constexpr int kFeatureCount = 11;

  std::array<double, kFeatureCount> as_array() const {
    return {duration_s,
            size_kb,
            framerate,
            static_cast<double>(width),
            static_cast<double>(height),
            static_cast<double>(b_count),
            static_cast<double>(s_count),
            static_cast<double>(r_count),
            static_cast<double>(mpeg4),
            static_cast<double>(vp9),
            static_cast<double>(hevc)};
  }

  /// Degree of merging represented by this row.
  int degree() const { return b_count + s_count + r_count + mpeg4 + vp9 + hevc; }

  /// Throws std::invalid_argument when counts/flags are out of range or the
  /// degree is outside [1, 5].
  void validate() const;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct Sample {
  FeatureVector features;
  double saving = 0.0;  // fraction in [0, 1)

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Dataset {
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Encodes a merge case (1-5 operations on one segment) as a feature row.
/// Permutation-invariant in `ops` and pure.
FeatureVector encode(const VideoMeta& video, std::span<const Operation> ops);

// Dataset CSV. Fixed column order, header mandatory, saving stored as a
// fraction. Unknown or reordered columns are rejected on read; silent
// schema drift would corrupt training.
inline constexpr std::string_view kDatasetCsvHeader =
    "duration_s,size_kb,framerate,width,height,b_count,s_count,r_count,"
    "mpeg4,vp9,hevc,saving";

void write_csv(const Dataset& dataset, std::ostream& out);
void write_csv_file(const Dataset& dataset, const std::string& path);
Dataset read_csv(std::istream& in);
Dataset read_csv_file(const std::string& path);

/// Seeded random partition; |train| = round(train_fraction * N). The two
/// parts are disjoint, cover the input, and keep the input's sample order.
/// Throws on train_fraction outside (0, 1) or fewer than 2 samples.
std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  std::uint64_t seed);

}  // namespace taskmerge
