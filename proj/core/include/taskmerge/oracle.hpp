#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "taskmerge/features.hpp"
#include "taskmerge/workload.hpp"

// Synthetic ground-truth execution-time model. Task execution decomposes
// into five phases; merging shares the leading phases once per group, which
// is what produces the saving. Calibrated so that noise-free same-kind VIC
// merges of degree k save exactly (k-1)/k of the shared fraction: 26% for
// pairs, ~34.7% / 39% / 41.6% for degrees 3-5.
//
// Everything is a pure function of (inputs, config): noise comes from a
// substream derived from (rng_seed, segment, operation), so callers may
// evaluate tasks in any order, or concurrently, and draw identical times.

namespace taskmerge::oracle {

/// Per-phase execution-time decomposition of one task, in seconds.
struct PhaseProfile {
  double fetch = 0.0;
  double decode = 0.0;
  double load = 0.0;
  double transform = 0.0;
  double encode = 0.0;

  double total() const { return fetch + decode + load + transform + encode; }

  /// Portion shared when merging tasks of different kinds (Data-Only).
  double shared_data_only() const { return fetch + decode; }
  /// Portion shared when merging tasks of the same kind (Data-Operation).
  double shared_data_operation() const { return fetch + decode + load; }
};

struct OracleConfig {
  /// Fraction of a VIC task spent in the shareable fetch+decode+load
  /// phases. 0.52 makes a noise-free pair merge save 26%.
  double vic_shared_fraction = 0.52;

  // How much longer the transform+encode portion of a codec change runs
  // compared to a VIC operation on the same segment (up to 8x overall).
  double mpeg4_multiplier = 2.0;
  double hevc_multiplier = 4.0;
  double vp9_multiplier = 8.0;

  // Per-phase multiplicative log-normal noise. VIC times vary little;
  // codec times vary a lot even on one machine.
  double vic_noise_sigma = 0.05;
  double codec_noise_sigma = 0.25;

  std::uint64_t rng_seed = 42;

  double codec_multiplier(CodecName codec) const;
  void validate() const;
};

// Flat key-value config file ("key = value", '#' comments). Unknown keys
// are rejected.
OracleConfig load_oracle_config(const std::string& path);
void save_oracle_config(const OracleConfig& cfg, const std::string& path);

/// Deterministic per-task phase decomposition. Base time is proportional
/// to duration * size; codec operations scale transform+encode by the
/// configured multiplier; each phase carries log-normal noise drawn from
/// the per-(segment, operation) substream.
PhaseProfile phase_profile(const VideoMeta& video, const Operation& op,
                           const OracleConfig& cfg);

/// Total of the five phases.
double exec_time_individual(const VideoMeta& video, const Operation& op,
                            const OracleConfig& cfg);

/// Execution time of 1-5 operations run as one merged task on one segment.
/// Same-kind groups share fetch+decode+load; mixed-kind groups share
/// fetch+decode only; exact duplicate operations piggyback at zero marginal
/// cost. The first operation in canonical order provides the shared-phase
/// durations, so the result does not depend on the order of `ops`.
double exec_time_merged(const VideoMeta& video, std::span<const Operation> ops,
                        const OracleConfig& cfg);

/// (sum of individual times - merged time) / sum of individual times.
double merge_saving(const VideoMeta& video, std::span<const Operation> ops,
                    const OracleConfig& cfg);

/// Synthesizes corpus_size video segments and cases_per_video merge cases
/// per segment (degrees 2-5, cycling through same-kind VIC, mixed VIC, and
/// VIC+codec strata), labeled with the oracle's merge saving. Byte-identical
/// output for identical arguments and cfg.rng_seed.
Dataset generate_dataset(int corpus_size, int cases_per_video,
                         const OracleConfig& cfg);

}  // namespace taskmerge::oracle
