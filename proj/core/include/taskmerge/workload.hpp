#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

// Tasks, operations, and merge groups for the transcoding workload, plus
// the hash-signature tables that detect mergeable tasks in expected
// constant time per arrival.

namespace taskmerge {

/// Static metadata of one standardized video segment (two-second chunks).
struct VideoMeta {
  std::string segment_id;
  double duration_s = 0.0;  // (0, 2]
  double size_kb = 0.0;
  double framerate = 0.0;
  int width = 0;
  int height = 0;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

enum class OpKind { Bitrate, Framerate, Resolution, Codec };
enum class CodecName { Mpeg4, Hevc, Vp9 };

std::string_view to_string(OpKind kind);
std::string_view to_string(CodecName codec);

/// One transcoding operation: a kind plus one parameter from the fixed
/// parameter catalog (5 bit-rates, 5 frame-rates, 5 resolutions, 3 codecs;
/// 18 operations in total). Construction outside the catalog throws.
class Operation {
 public:
  static Operation bitrate(int kbps);
  static Operation framerate(int fps);
  static Operation resolution(int width, int height);
  static Operation codec(CodecName codec);

  /// Parses the workload-file form, e.g. ("bitrate", "512K"),
  /// ("framerate", "30"), ("resolution", "1280x800"), ("codec", "hevc").
  static Operation parse(std::string_view kind, std::string_view parameter);

  /// The full catalog of 18 operations, in canonical order.
  static std::span<const Operation> all();

  static std::span<const int> bitrate_values();     // kbps
  static std::span<const int> framerate_values();   // fps
  static std::span<const std::pair<int, int>> resolution_values();
  static std::span<const CodecName> codec_values();

  OpKind kind() const { return kind_; }
  bool is_vic() const { return kind_ != OpKind::Codec; }

  int bitrate_kbps() const;                 // pre: kind() == Bitrate
  int framerate_fps() const;                // pre: kind() == Framerate
  std::pair<int, int> resolution_wh() const;  // pre: kind() == Resolution
  CodecName codec_name() const;             // pre: kind() == Codec

  /// Catalog literal: "512K", "30", "1280x800", "hevc".
  std::string parameter_string() const;
  std::string kind_string() const { return std::string(to_string(kind_)); }

  /// "(kind, parameter)" canonical form used for signatures.
  std::string canonical_string() const;

  friend bool operator==(const Operation&, const Operation&) = default;
  friend std::strong_ordering operator<=>(const Operation&,
                                          const Operation&) = default;

 private:
  Operation(OpKind kind, int p0, int p1) : kind_(kind), p0_(p0), p1_(p1) {}

  OpKind kind_;
  int p0_;  // kbps | fps | width | codec enum value
  int p1_;  // height, otherwise 0
};

struct TranscodeTask {
  std::string task_id;
  VideoMeta video;
  Operation operation;
};

/// Pairwise similarity, strongest first. TaskLevel implies DataOperation
/// implies DataOnly, so the enum is ordered for direct comparison.
enum class SimilarityLevel { None = 0, DataOnly = 1, DataOperation = 2, TaskLevel = 3 };

std::string_view to_string(SimilarityLevel level);

/// Opaque signature key: a stable 64-bit hash for bucketing plus the
/// canonical tuple serialization for equality, so correctness never
/// depends on hash injectivity.
class SignatureKey {
 public:
  static SignatureKey from_canonical(std::string tuple);

  std::uint64_t hash() const { return hash_; }
  const std::string& canonical() const { return canonical_; }

  friend bool operator==(const SignatureKey& a, const SignatureKey& b) {
    return a.hash_ == b.hash_ && a.canonical_ == b.canonical_;
  }

  struct Hash {
    std::size_t operator()(const SignatureKey& k) const noexcept {
      return static_cast<std::size_t>(k.hash_);
    }
  };

 private:
  SignatureKey(std::uint64_t hash, std::string canonical)
      : hash_(hash), canonical_(std::move(canonical)) {}

  std::uint64_t hash_;
  std::string canonical_;
};

struct TaskSignatures {
  SignatureKey task_key;      // (segment, kind, parameter)
  SignatureKey dataop_key;    // (segment, kind)
  SignatureKey dataonly_key;  // (segment)
};

/// Pure and deterministic: identical (segment, kind, parameter) triples
/// always produce identical keys.
TaskSignatures canonical_signatures(const TranscodeTask& task);

/// Strongest level whose keys match; symmetric in its arguments.
SimilarityLevel classify_pair(const TranscodeTask& a, const TranscodeTask& b);

/// An ordered set of 1-5 tasks sharing a video segment.
struct MergeGroup {
  std::vector<TranscodeTask> tasks;  // join order

  int degree() const { return static_cast<int>(tasks.size()); }
  const VideoMeta& video() const { return tasks.front().video; }
  std::vector<Operation> operations() const;

  /// Weakest pairwise similarity present in the group; None for a
  /// singleton (nothing is shared until a second task joins).
  SimilarityLevel level() const;
};

/// Hash-signature tables over open merge groups, one table per similarity
/// level. Admission probes strongest-to-weakest and joins the oldest open
/// group at the first level that matches; expected O(1) per arrival.
/// Single writer; the pure classification helpers above are safe for any
/// number of concurrent readers.
class SignatureTables {
 public:
  static constexpr int kMaxDegree = 5;

  struct Admission {
    std::size_t group_index;
    SimilarityLevel matched_level;  // None when a new group was opened
  };

  /// Throws std::invalid_argument on a duplicate task_id.
  Admission admit(const TranscodeTask& task);

  std::span<const MergeGroup> groups() const { return groups_; }
  const MergeGroup& group(std::size_t index) const { return groups_.at(index); }
  std::size_t group_count() const { return groups_.size(); }

 private:
  using Table =
      std::unordered_map<SignatureKey, std::vector<std::size_t>, SignatureKey::Hash>;

  // Oldest group under `key` that still has room, or npos.
  std::size_t probe(const Table& table, const SignatureKey& key) const;

  std::vector<MergeGroup> groups_;
  Table by_task_;
  Table by_dataop_;
  Table by_dataonly_;
  std::unordered_set<std::string> task_ids_;
};

/// Number of merge cases of 2..max_degree tasks out of num_tasks:
/// sum over k of C(num_tasks, k). Throws std::overflow_error when the
/// count exceeds 64 bits and std::invalid_argument on a bad degree range.
std::uint64_t count_merge_cases(int num_tasks, int max_degree);

// Workload file: one task per line,
//   task_id,segment_id,duration_s,size_kb,framerate,width,height,kind,parameter
// An optional header line is tolerated on read and always written.
std::vector<TranscodeTask> read_workload(std::istream& in);
std::vector<TranscodeTask> read_workload_file(const std::string& path);
void write_workload(std::span<const TranscodeTask> tasks, std::ostream& out);
void write_workload_file(std::span<const TranscodeTask> tasks,
                         const std::string& path);

}  // namespace taskmerge
