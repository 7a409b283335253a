#include "taskmerge/features.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "taskmerge/errors.hpp"
#include "taskmerge/rng.hpp"
#include "text_util.hpp"

namespace taskmerge {

void FeatureVector::validate() const {
  if (!(duration_s > 0.0)) throw std::invalid_argument("duration_s must be > 0");
  if (!(size_kb > 0.0)) throw std::invalid_argument("size_kb must be > 0");
  if (!(framerate > 0.0)) throw std::invalid_argument("framerate must be > 0");
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("dimensions must be > 0");
  if (b_count < 0 || s_count < 0 || r_count < 0)
    throw std::invalid_argument("operation counts must be >= 0");
  for (int flag : {mpeg4, vp9, hevc})
    if (flag != 0 && flag != 1)
      throw std::invalid_argument("codec flags must be 0 or 1");
  const int d = degree();
  if (d < 1 || d > 5)
    throw std::invalid_argument("degree of merging must be in [1, 5], got " +
                                std::to_string(d));
}

FeatureVector encode(const VideoMeta& video, std::span<const Operation> ops) {
  if (ops.empty() || ops.size() > 5)
    throw std::invalid_argument("a merge case holds 1-5 operations");
  FeatureVector fv;
  fv.duration_s = video.duration_s;
  fv.size_kb = video.size_kb;
  fv.framerate = video.framerate;
  fv.width = video.width;
  fv.height = video.height;
  for (const Operation& op : ops) {
    switch (op.kind()) {
      case OpKind::Bitrate: ++fv.b_count; break;
      case OpKind::Framerate: ++fv.s_count; break;
      case OpKind::Resolution: ++fv.r_count; break;
      case OpKind::Codec:
        switch (op.codec_name()) {
          case CodecName::Mpeg4: fv.mpeg4 = 1; break;
          case CodecName::Hevc: fv.hevc = 1; break;
          case CodecName::Vp9: fv.vp9 = 1; break;
        }
        break;
    }
  }
  return fv;
}

void write_csv(const Dataset& dataset, std::ostream& out) {
  out << kDatasetCsvHeader << '\n';
  for (const Sample& s : dataset.samples) {
    const FeatureVector& f = s.features;
    out << detail::format_double(f.duration_s) << ','
        << detail::format_double(f.size_kb) << ','
        << detail::format_double(f.framerate) << ',' << f.width << ',' << f.height
        << ',' << f.b_count << ',' << f.s_count << ',' << f.r_count << ','
        << f.mpeg4 << ',' << f.vp9 << ',' << f.hevc << ','
        << detail::format_double(s.saving) << '\n';
  }
}

void write_csv_file(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(dataset, out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing dataset '" + path + "'");
}

namespace {

int parse_count(std::string_view field, std::string_view what, std::size_t line,
                int max_value) {
  const long long v = detail::parse_int(field, what, line);
  if (v < 0 || v > max_value)
    throw ParseError(std::string(what) + " out of range: " + std::to_string(v),
                     line);
  return static_cast<int>(v);
}

}  // namespace

Dataset read_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw ParseError("empty dataset file", 1);
  ++line_no;
  if (detail::trim(line) != kDatasetCsvHeader)
    throw ParseError("header mismatch; expected '" +
                         std::string(kDatasetCsvHeader) + "'",
                     line_no);

  Dataset dataset;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = detail::trim(line);
    if (sv.empty()) continue;
    const auto fields = detail::split_fields(sv);
    if (fields.size() != 12)
      throw ParseError("expected 12 fields, got " + std::to_string(fields.size()),
                       line_no);

    Sample s;
    FeatureVector& f = s.features;
    f.duration_s = detail::parse_double(fields[0], "duration_s", line_no);
    f.size_kb = detail::parse_double(fields[1], "size_kb", line_no);
    f.framerate = detail::parse_double(fields[2], "framerate", line_no);
    f.width = parse_count(fields[3], "width", line_no, 1 << 16);
    f.height = parse_count(fields[4], "height", line_no, 1 << 16);
    f.b_count = parse_count(fields[5], "b_count", line_no, 5);
    f.s_count = parse_count(fields[6], "s_count", line_no, 5);
    f.r_count = parse_count(fields[7], "r_count", line_no, 5);
    f.mpeg4 = parse_count(fields[8], "mpeg4", line_no, 1);
    f.vp9 = parse_count(fields[9], "vp9", line_no, 1);
    f.hevc = parse_count(fields[10], "hevc", line_no, 1);
    s.saving = detail::parse_double(fields[11], "saving", line_no);
    if (!(s.saving >= 0.0) || s.saving > 1.0 || !std::isfinite(s.saving))
      throw ParseError("saving outside [0, 1]: " + std::string(fields[11]),
                       line_no);
    try {
      f.validate();
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line_no);
    }
    dataset.samples.push_back(std::move(s));
  }
  return dataset;
}

Dataset read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file '" + path + "'");
  return read_csv(in);
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  std::uint64_t seed) {
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
    throw std::invalid_argument("train_fraction must be in (0, 1)");
  const std::size_t n = dataset.size();
  if (n < 2) throw std::invalid_argument("need at least 2 samples to split");

  const std::size_t n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(n)));

  // Fisher-Yates over the index vector, then membership by position.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng::SplitMix64 gen = rng::substream(seed, "train-test-split");
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(gen.next_below(i + 1));
    std::swap(order[i], order[j]);
  }
  std::vector<char> in_train(n, 0);
  for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = 1;

  std::pair<Dataset, Dataset> parts;
  parts.first.samples.reserve(n_train);
  parts.second.samples.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i)
    (in_train[i] ? parts.first : parts.second).samples.push_back(dataset.samples[i]);
  return parts;
}

}  // namespace taskmerge
