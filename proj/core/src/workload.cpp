#include "taskmerge/workload.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "taskmerge/rng.hpp"
#include "text_util.hpp"

namespace taskmerge {

namespace {

constexpr std::array<int, 5> kBitrates = {384, 512, 768, 1024, 1536};
constexpr std::array<int, 5> kFramerates = {10, 15, 20, 30, 40};
constexpr std::array<std::pair<int, int>, 5> kResolutions = {
    std::pair{352, 288}, {680, 320}, {720, 480}, {1280, 800}, {1920, 1080}};
constexpr std::array<CodecName, 3> kCodecs = {CodecName::Mpeg4, CodecName::Hevc,
                                              CodecName::Vp9};

}  // namespace

void VideoMeta::validate() const {
  if (segment_id.empty())
    throw std::invalid_argument("video: empty segment_id");
  if (!(duration_s > 0.0) || duration_s > 2.0)
    throw std::invalid_argument("video " + segment_id +
                                ": duration must be in (0, 2] seconds");
  if (!(size_kb > 0.0))
    throw std::invalid_argument("video " + segment_id + ": size must be > 0");
  if (!(framerate > 0.0))
    throw std::invalid_argument("video " + segment_id + ": framerate must be > 0");
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("video " + segment_id + ": dimensions must be > 0");
}

std::string_view to_string(OpKind kind) {
  switch (kind) {
    case OpKind::Bitrate: return "bitrate";
    case OpKind::Framerate: return "framerate";
    case OpKind::Resolution: return "resolution";
    case OpKind::Codec: return "codec";
  }
  return "?";
}

std::string_view to_string(CodecName codec) {
  switch (codec) {
    case CodecName::Mpeg4: return "mpeg4";
    case CodecName::Hevc: return "hevc";
    case CodecName::Vp9: return "vp9";
  }
  return "?";
}

std::string_view to_string(SimilarityLevel level) {
  switch (level) {
    case SimilarityLevel::None: return "none";
    case SimilarityLevel::DataOnly: return "data-only";
    case SimilarityLevel::DataOperation: return "data-operation";
    case SimilarityLevel::TaskLevel: return "task";
  }
  return "?";
}

Operation Operation::bitrate(int kbps) {
  if (std::find(kBitrates.begin(), kBitrates.end(), kbps) == kBitrates.end())
    throw std::invalid_argument("bitrate " + std::to_string(kbps) +
                                "K is not in the parameter catalog");
  return Operation(OpKind::Bitrate, kbps, 0);
}

Operation Operation::framerate(int fps) {
  if (std::find(kFramerates.begin(), kFramerates.end(), fps) == kFramerates.end())
    throw std::invalid_argument("framerate " + std::to_string(fps) +
                                " fps is not in the parameter catalog");
  return Operation(OpKind::Framerate, fps, 0);
}

Operation Operation::resolution(int width, int height) {
  if (std::find(kResolutions.begin(), kResolutions.end(),
                std::pair{width, height}) == kResolutions.end())
    throw std::invalid_argument("resolution " + std::to_string(width) + "x" +
                                std::to_string(height) +
                                " is not in the parameter catalog");
  return Operation(OpKind::Resolution, width, height);
}

Operation Operation::codec(CodecName codec) {
  return Operation(OpKind::Codec, static_cast<int>(codec), 0);
}

std::span<const int> Operation::bitrate_values() { return kBitrates; }
std::span<const int> Operation::framerate_values() { return kFramerates; }
std::span<const std::pair<int, int>> Operation::resolution_values() {
  return kResolutions;
}
std::span<const CodecName> Operation::codec_values() { return kCodecs; }

std::span<const Operation> Operation::all() {
  static const std::vector<Operation> catalog = [] {
    std::vector<Operation> ops;
    for (int kbps : kBitrates) ops.push_back(bitrate(kbps));
    for (int fps : kFramerates) ops.push_back(framerate(fps));
    for (auto [w, h] : kResolutions) ops.push_back(resolution(w, h));
    for (CodecName c : kCodecs) ops.push_back(codec(c));
    return ops;
  }();
  return catalog;
}

int Operation::bitrate_kbps() const {
  if (kind_ != OpKind::Bitrate) throw std::logic_error("not a bitrate operation");
  return p0_;
}

int Operation::framerate_fps() const {
  if (kind_ != OpKind::Framerate) throw std::logic_error("not a framerate operation");
  return p0_;
}

std::pair<int, int> Operation::resolution_wh() const {
  if (kind_ != OpKind::Resolution)
    throw std::logic_error("not a resolution operation");
  return {p0_, p1_};
}

CodecName Operation::codec_name() const {
  if (kind_ != OpKind::Codec) throw std::logic_error("not a codec operation");
  return static_cast<CodecName>(p0_);
}

std::string Operation::parameter_string() const {
  switch (kind_) {
    case OpKind::Bitrate: return std::to_string(p0_) + "K";
    case OpKind::Framerate: return std::to_string(p0_);
    case OpKind::Resolution:
      return std::to_string(p0_) + "x" + std::to_string(p1_);
    case OpKind::Codec: return std::string(to_string(static_cast<CodecName>(p0_)));
  }
  return "?";
}

std::string Operation::canonical_string() const {
  std::string s(to_string(kind_));
  s += '=';
  s += parameter_string();
  return s;
}

namespace {

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

int parse_plain_int(std::string_view s, std::string_view what) {
  try {
    return static_cast<int>(detail::parse_int(s, what, 0));
  } catch (const ParseError&) {
    throw std::invalid_argument("bad " + std::string(what) + " '" +
                                std::string(s) + "'");
  }
}

}  // namespace

Operation Operation::parse(std::string_view kind, std::string_view parameter) {
  const std::string k = ascii_lower(detail::trim(kind));
  const std::string p = ascii_lower(detail::trim(parameter));
  if (k == "bitrate") {
    std::string_view digits = p;
    if (!digits.empty() && (digits.back() == 'k')) digits.remove_suffix(1);
    return bitrate(parse_plain_int(digits, "bitrate"));
  }
  if (k == "framerate") {
    return framerate(parse_plain_int(p, "framerate"));
  }
  if (k == "resolution") {
    const std::size_t pos = p.find('x');
    if (pos == std::string::npos)
      throw std::invalid_argument("bad resolution '" + p + "' (expected WxH)");
    return resolution(parse_plain_int(std::string_view(p).substr(0, pos), "width"),
                      parse_plain_int(std::string_view(p).substr(pos + 1), "height"));
  }
  if (k == "codec") {
    if (p == "mpeg4") return codec(CodecName::Mpeg4);
    if (p == "hevc") return codec(CodecName::Hevc);
    if (p == "vp9") return codec(CodecName::Vp9);
    throw std::invalid_argument("unknown codec '" + p + "'");
  }
  throw std::invalid_argument("unknown operation kind '" + k + "'");
}

SignatureKey SignatureKey::from_canonical(std::string tuple) {
  const std::uint64_t h = rng::fnv1a(tuple);
  return SignatureKey(h, std::move(tuple));
}

TaskSignatures canonical_signatures(const TranscodeTask& task) {
  const std::string segment = "segment=" + task.video.segment_id;
  const std::string dataop =
      segment + "|kind=" + std::string(to_string(task.operation.kind()));
  const std::string full = dataop + "|param=" + task.operation.parameter_string();
  return TaskSignatures{SignatureKey::from_canonical(full),
                        SignatureKey::from_canonical(dataop),
                        SignatureKey::from_canonical(segment)};
}

SimilarityLevel classify_pair(const TranscodeTask& a, const TranscodeTask& b) {
  if (a.video.segment_id != b.video.segment_id) return SimilarityLevel::None;
  if (a.operation.kind() != b.operation.kind()) return SimilarityLevel::DataOnly;
  if (a.operation != b.operation) return SimilarityLevel::DataOperation;
  return SimilarityLevel::TaskLevel;
}

std::vector<Operation> MergeGroup::operations() const {
  std::vector<Operation> ops;
  ops.reserve(tasks.size());
  for (const TranscodeTask& t : tasks) ops.push_back(t.operation);
  return ops;
}

SimilarityLevel MergeGroup::level() const {
  if (tasks.size() < 2) return SimilarityLevel::None;
  SimilarityLevel weakest = SimilarityLevel::TaskLevel;
  for (std::size_t i = 0; i + 1 < tasks.size(); ++i)
    for (std::size_t j = i + 1; j < tasks.size(); ++j)
      weakest = std::min(weakest, classify_pair(tasks[i], tasks[j]));
  return weakest;
}

std::size_t SignatureTables::probe(const Table& table,
                                   const SignatureKey& key) const {
  auto it = table.find(key);
  if (it == table.end()) return std::numeric_limits<std::size_t>::max();
  // Bucket entries are in creation order; take the oldest group with room.
  for (std::size_t index : it->second) {
    if (groups_[index].degree() < kMaxDegree) return index;
  }
  return std::numeric_limits<std::size_t>::max();
}

SignatureTables::Admission SignatureTables::admit(const TranscodeTask& task) {
  constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  if (!task_ids_.insert(task.task_id).second)
    throw std::invalid_argument("duplicate task_id '" + task.task_id + "'");

  const TaskSignatures sig = canonical_signatures(task);

  std::size_t index = npos;
  SimilarityLevel matched = SimilarityLevel::None;
  if ((index = probe(by_task_, sig.task_key)) != npos) {
    matched = SimilarityLevel::TaskLevel;
  } else if ((index = probe(by_dataop_, sig.dataop_key)) != npos) {
    matched = SimilarityLevel::DataOperation;
  } else if ((index = probe(by_dataonly_, sig.dataonly_key)) != npos) {
    matched = SimilarityLevel::DataOnly;
  } else {
    index = groups_.size();
    groups_.emplace_back();
  }

  groups_[index].tasks.push_back(task);

  // Register the group under this task's keys so it stays reachable from
  // all three tables for every constituent task.
  auto link = [&](Table& table, const SignatureKey& key) {
    std::vector<std::size_t>& bucket = table[key];
    if (std::find(bucket.begin(), bucket.end(), index) == bucket.end())
      bucket.push_back(index);
  };
  link(by_task_, sig.task_key);
  link(by_dataop_, sig.dataop_key);
  link(by_dataonly_, sig.dataonly_key);

  return Admission{index, matched};
}

std::uint64_t count_merge_cases(int num_tasks, int max_degree) {
  if (max_degree < 2 || max_degree > num_tasks)
    throw std::invalid_argument("require 2 <= max_degree <= num_tasks");

  const std::uint64_t n = static_cast<std::uint64_t>(num_tasks);
  std::uint64_t total = 0;
  std::uint64_t binom = 1;  // C(n, 0)
  for (std::uint64_t k = 1; k <= static_cast<std::uint64_t>(max_degree); ++k) {
    // C(n, k) = C(n, k-1) * (n - k + 1) / k, exact at every step.
    if (binom > std::numeric_limits<std::uint64_t>::max() / (n - k + 1))
      throw std::overflow_error("merge-case count exceeds 64 bits");
    binom = binom * (n - k + 1) / k;
    if (k >= 2) {
      if (total > std::numeric_limits<std::uint64_t>::max() - binom)
        throw std::overflow_error("merge-case count exceeds 64 bits");
      total += binom;
    }
  }
  return total;
}

namespace {
constexpr std::string_view kWorkloadHeader =
    "task_id,segment_id,duration_s,size_kb,framerate,width,height,kind,parameter";
}

std::vector<TranscodeTask> read_workload(std::istream& in) {
  std::vector<TranscodeTask> tasks;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = detail::trim(line);
    if (sv.empty()) continue;
    if (line_no == 1 && sv.starts_with("task_id,")) continue;  // header

    const auto fields = detail::split_fields(sv);
    if (fields.size() != 9)
      throw ParseError("expected 9 fields, got " + std::to_string(fields.size()),
                       line_no);

    VideoMeta video;
    video.segment_id = std::string(detail::trim(fields[1]));
    video.duration_s = detail::parse_double(fields[2], "duration_s", line_no);
    video.size_kb = detail::parse_double(fields[3], "size_kb", line_no);
    video.framerate = detail::parse_double(fields[4], "framerate", line_no);
    video.width = static_cast<int>(detail::parse_int(fields[5], "width", line_no));
    video.height = static_cast<int>(detail::parse_int(fields[6], "height", line_no));
    try {
      std::string task_id(detail::trim(fields[0]));
      if (task_id.empty()) throw std::invalid_argument("empty task_id");
      video.validate();
      tasks.push_back(TranscodeTask{std::move(task_id), std::move(video),
                                    Operation::parse(fields[7], fields[8])});
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return tasks;
}

std::vector<TranscodeTask> read_workload_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open workload file '" + path + "'");
  return read_workload(in);
}

void write_workload(std::span<const TranscodeTask> tasks, std::ostream& out) {
  out << kWorkloadHeader << '\n';
  for (const TranscodeTask& t : tasks) {
    out << t.task_id << ',' << t.video.segment_id << ','
        << detail::format_double(t.video.duration_s) << ','
        << detail::format_double(t.video.size_kb) << ','
        << detail::format_double(t.video.framerate) << ',' << t.video.width << ','
        << t.video.height << ',' << t.operation.kind_string() << ','
        << t.operation.parameter_string() << '\n';
  }
}

void write_workload_file(std::span<const TranscodeTask> tasks,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_workload(tasks, out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing workload file '" + path + "'");
}

}  // namespace taskmerge
