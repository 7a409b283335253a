#include "taskmerge/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "taskmerge/errors.hpp"
#include "taskmerge/rng.hpp"
#include "text_util.hpp"

namespace taskmerge::oracle {

namespace {

// Base-time scale: a 2 s / 1000 KB VIC task takes ~1.0 s. Absolute scale
// cancels out of saving fractions; only phase ratios matter.
constexpr double kBaseRate = 0.5;

// Function-loading weight within the shared block, relative to the
// normalized fetch/decode weights below.
constexpr double kLoadWeight = 0.55;

// How the shared block divides across fetch/decode/load for one segment.
// The block total stays pinned at vic_shared_fraction of a VIC task, but
// its composition follows the content: fetch moves the bytes, decode
// scales with the frame volume, and loading the transcoding function is a
// near-constant overhead that dominates only on small segments. Mixed-kind
// merges share just fetch+decode, so their savings vary across segments
// while same-kind savings (which share the whole block) do not.
struct SharedSplit {
  double fetch_share;
  double decode_share;
  double load_share;
};

SharedSplit shared_split(const VideoMeta& video) {
  const double w_fetch = video.size_kb / 1000.0;
  const double w_decode = 1.4 * (video.duration_s / 2.0) *
                          (video.framerate / 30.0) *
                          (static_cast<double>(video.width) * video.height) /
                          (1280.0 * 720.0);
  const double w_sum = w_fetch + w_decode + kLoadWeight;
  return SharedSplit{w_fetch / w_sum, w_decode / w_sum, kLoadWeight / w_sum};
}

}  // namespace

double OracleConfig::codec_multiplier(CodecName codec) const {
  switch (codec) {
    case CodecName::Mpeg4: return mpeg4_multiplier;
    case CodecName::Hevc: return hevc_multiplier;
    case CodecName::Vp9: return vp9_multiplier;
  }
  throw std::logic_error("unknown codec");
}

void OracleConfig::validate() const {
  if (!(vic_shared_fraction > 0.0) || !(vic_shared_fraction < 1.0))
    throw std::invalid_argument("vic_shared_fraction must be in (0, 1)");
  for (double m : {mpeg4_multiplier, hevc_multiplier, vp9_multiplier})
    if (!(m >= 1.0))
      throw std::invalid_argument("codec multipliers must be >= 1");
  if (vic_noise_sigma < 0.0 || codec_noise_sigma < 0.0)
    throw std::invalid_argument("noise sigmas must be >= 0");
}

PhaseProfile phase_profile(const VideoMeta& video, const Operation& op,
                           const OracleConfig& cfg) {
  video.validate();
  cfg.validate();

  const double base = kBaseRate * video.duration_s * (video.size_kb / 1000.0);
  const double shared = cfg.vic_shared_fraction * base;
  double unshared = (1.0 - cfg.vic_shared_fraction) * base;
  if (op.kind() == OpKind::Codec) unshared *= cfg.codec_multiplier(op.codec_name());

  const double sigma =
      op.is_vic() ? cfg.vic_noise_sigma : cfg.codec_noise_sigma;
  rng::SplitMix64 noise =
      rng::substream(cfg.rng_seed, "phase-noise", rng::fnv1a(video.segment_id),
                     rng::fnv1a(op.canonical_string()));
  auto factor = [&] { return std::exp(sigma * noise.next_gaussian()); };

  const SharedSplit split = shared_split(video);
  PhaseProfile p;
  p.fetch = split.fetch_share * shared * factor();
  p.decode = split.decode_share * shared * factor();
  p.load = split.load_share * shared * factor();
  p.transform = 0.5 * unshared * factor();
  p.encode = 0.5 * unshared * factor();
  return p;
}

double exec_time_individual(const VideoMeta& video, const Operation& op,
                            const OracleConfig& cfg) {
  return phase_profile(video, op, cfg).total();
}

namespace {

// Distinct operations in canonical order; duplicates piggyback for free.
std::vector<Operation> distinct_sorted(std::span<const Operation> ops) {
  std::vector<Operation> unique(ops.begin(), ops.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  return unique;
}

}  // namespace

double exec_time_merged(const VideoMeta& video, std::span<const Operation> ops,
                        const OracleConfig& cfg) {
  if (ops.empty() || ops.size() > 5)
    throw std::invalid_argument("a merged task holds 1-5 operations");
  if (ops.size() == 1) return exec_time_individual(video, ops[0], cfg);

  const std::vector<Operation> unique = distinct_sorted(ops);
  if (unique.size() == 1) return exec_time_individual(video, unique[0], cfg);

  const bool same_kind = std::all_of(
      unique.begin(), unique.end(),
      [&](const Operation& op) { return op.kind() == unique.front().kind(); });

  double total = 0.0;
  for (std::size_t i = 0; i < unique.size(); ++i) {
    const PhaseProfile p = phase_profile(video, unique[i], cfg);
    if (i == 0) total += same_kind ? p.shared_data_operation() : p.shared_data_only();
    total += same_kind ? p.transform + p.encode : p.load + p.transform + p.encode;
  }
  return total;
}

double merge_saving(const VideoMeta& video, std::span<const Operation> ops,
                    const OracleConfig& cfg) {
  double individual_sum = 0.0;
  for (const Operation& op : ops)
    individual_sum += exec_time_individual(video, op, cfg);
  const double merged = exec_time_merged(video, ops, cfg);
  return (individual_sum - merged) / individual_sum;
}

// ---------------------------------------------------------------------------
// Dataset synthesis

namespace {

VideoMeta synth_video(int index, const OracleConfig& cfg) {
  rng::SplitMix64 gen = rng::substream(cfg.rng_seed, "video-meta",
                                       static_cast<std::uint64_t>(index));
  VideoMeta v;
  char id[16];
  std::snprintf(id, sizeof(id), "seg-%05d", index);
  v.segment_id = id;
  // Most segments are full two-second chunks; the rest are stream tails,
  // including a sliver of very short remainders.
  const double mode = gen.next_unit();
  if (mode < 0.75)
    v.duration_s = 2.0;
  else if (mode < 0.90)
    v.duration_s = 0.8 + 1.2 * gen.next_unit();
  else
    v.duration_s = 0.12 + 0.38 * gen.next_unit();
  // Bytes scale with length, so tail segments are small as well as short.
  v.size_kb = (v.duration_s / 2.0) * (500.0 + 1500.0 * gen.next_unit());
  constexpr std::array<double, 5> framerates = {24, 25, 30, 50, 60};
  v.framerate = framerates[gen.next_below(framerates.size())];
  const double dims = gen.next_unit();
  if (dims < 0.5) {
    v.width = 1280; v.height = 720;
  } else if (dims < 0.75) {
    v.width = 1920; v.height = 1080;
  } else {
    v.width = 854; v.height = 480;
  }
  return v;
}

// m distinct indices out of [0, n) via partial Fisher-Yates.
std::vector<int> pick_distinct(rng::SplitMix64& gen, int n, int m) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = 0; i < m; ++i) {
    const int j = i + static_cast<int>(gen.next_below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(m);
  return idx;
}

Operation vic_op(OpKind kind, int param_index) {
  switch (kind) {
    case OpKind::Bitrate:
      return Operation::bitrate(Operation::bitrate_values()[param_index]);
    case OpKind::Framerate:
      return Operation::framerate(Operation::framerate_values()[param_index]);
    case OpKind::Resolution: {
      auto [w, h] = Operation::resolution_values()[param_index];
      return Operation::resolution(w, h);
    }
    case OpKind::Codec: break;
  }
  throw std::logic_error("vic_op: not a VIC kind");
}

constexpr std::array<OpKind, 3> kVicKinds = {OpKind::Bitrate, OpKind::Framerate,
                                             OpKind::Resolution};

// Turns per-kind slot counts into operations with distinct parameters.
void emit_vic_ops(rng::SplitMix64& gen, const std::map<OpKind, int>& counts,
                  std::vector<Operation>& out) {
  for (const auto& [kind, count] : counts) {
    for (int param : pick_distinct(gen, 5, count)) out.push_back(vic_op(kind, param));
  }
}

std::vector<Operation> synth_case(rng::SplitMix64& gen, int stratum, int degree) {
  std::vector<Operation> ops;
  switch (stratum) {
    case 0: {  // same-kind VIC, 2-5 parameters of one operation
      const OpKind kind = kVicKinds[gen.next_below(3)];
      for (int param : pick_distinct(gen, 5, degree)) ops.push_back(vic_op(kind, param));
      break;
    }
    case 1: {  // mixed VIC: at least two distinct kinds
      const int first = static_cast<int>(gen.next_below(3));
      const int second = (first + 1 + static_cast<int>(gen.next_below(2))) % 3;
      std::map<OpKind, int> counts;
      ++counts[kVicKinds[first]];
      ++counts[kVicKinds[second]];
      for (int slot = 2; slot < degree; ++slot) ++counts[kVicKinds[gen.next_below(3)]];
      emit_vic_ops(gen, counts, ops);
      break;
    }
    default: {  // one codec change plus 1-4 VIC operations
      const CodecName codec =
          Operation::codec_values()[gen.next_below(3)];
      ops.push_back(Operation::codec(codec));
      std::map<OpKind, int> counts;
      for (int slot = 1; slot < degree; ++slot) ++counts[kVicKinds[gen.next_below(3)]];
      emit_vic_ops(gen, counts, ops);
      break;
    }
  }
  return ops;
}

}  // namespace

Dataset generate_dataset(int corpus_size, int cases_per_video,
                         const OracleConfig& cfg) {
  if (corpus_size < 1 || cases_per_video < 1)
    throw std::invalid_argument("corpus_size and cases_per_video must be >= 1");
  cfg.validate();

  Dataset out;
  out.samples.reserve(static_cast<std::size_t>(corpus_size) *
                      static_cast<std::size_t>(cases_per_video));
  for (int v = 0; v < corpus_size; ++v) {
    const VideoMeta video = synth_video(v, cfg);
    for (int c = 0; c < cases_per_video; ++c) {
      rng::SplitMix64 gen =
          rng::substream(cfg.rng_seed, "merge-case", static_cast<std::uint64_t>(v),
                         static_cast<std::uint64_t>(c));
      const int stratum = c % 3;
      const int degree = 2 + (c / 3) % 4;
      const std::vector<Operation> ops = synth_case(gen, stratum, degree);
      Sample s;
      s.features = encode(video, ops);
      s.saving = merge_saving(video, ops, cfg);
      out.samples.push_back(std::move(s));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config file

OracleConfig load_oracle_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open oracle config '" + path + "'");

  OracleConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = detail::trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    const std::size_t eq = sv.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("expected 'key = value'", line_no);
    const std::string key{detail::trim(sv.substr(0, eq))};
    const std::string_view value = detail::trim(sv.substr(eq + 1));

    if (key == "vic_shared_fraction")
      cfg.vic_shared_fraction = detail::parse_double(value, key, line_no);
    else if (key == "mpeg4_multiplier")
      cfg.mpeg4_multiplier = detail::parse_double(value, key, line_no);
    else if (key == "hevc_multiplier")
      cfg.hevc_multiplier = detail::parse_double(value, key, line_no);
    else if (key == "vp9_multiplier")
      cfg.vp9_multiplier = detail::parse_double(value, key, line_no);
    else if (key == "vic_noise_sigma")
      cfg.vic_noise_sigma = detail::parse_double(value, key, line_no);
    else if (key == "codec_noise_sigma")
      cfg.codec_noise_sigma = detail::parse_double(value, key, line_no);
    else if (key == "rng_seed")
      cfg.rng_seed = static_cast<std::uint64_t>(detail::parse_int(value, key, line_no));
    else
      throw ParseError("unknown key '" + key + "'", line_no);
  }
  cfg.validate();
  return cfg;
}

void save_oracle_config(const OracleConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "vic_shared_fraction = " << detail::format_double(cfg.vic_shared_fraction)
      << '\n'
      << "mpeg4_multiplier = " << detail::format_double(cfg.mpeg4_multiplier) << '\n'
      << "hevc_multiplier = " << detail::format_double(cfg.hevc_multiplier) << '\n'
      << "vp9_multiplier = " << detail::format_double(cfg.vp9_multiplier) << '\n'
      << "vic_noise_sigma = " << detail::format_double(cfg.vic_noise_sigma) << '\n'
      << "codec_noise_sigma = " << detail::format_double(cfg.codec_noise_sigma)
      << '\n'
      << "rng_seed = " << cfg.rng_seed << '\n';
  out.flush();
  if (!out) throw std::runtime_error("failed writing oracle config '" + path + "'");
}

}  // namespace taskmerge::oracle
