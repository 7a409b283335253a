#include "taskmerge/baseline.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>

#include "taskmerge/errors.hpp"
#include "taskmerge/model_file.hpp"
#include "text_util.hpp"

namespace taskmerge::baseline {

double NaiveModel::predict(const FeatureVector& x) const {
  auto it = table_.find(CompositionKey::from(x));
  return it == table_.end() ? global_mean_ : it->second;
}

NaiveModel fit_naive(const Dataset& train_set) {
  if (train_set.empty())
    throw std::invalid_argument("cannot fit the naive model on an empty dataset");

  struct Accumulator {
    double sum = 0.0;
    std::size_t count = 0;
  };
  std::map<CompositionKey, Accumulator> acc;
  double total = 0.0;
  for (const Sample& s : train_set.samples) {
    Accumulator& a = acc[CompositionKey::from(s.features)];
    a.sum += s.saving;
    ++a.count;
    total += s.saving;
  }

  std::map<CompositionKey, double> table;
  for (const auto& [key, a] : acc)
    table.emplace(key, a.sum / static_cast<double>(a.count));
  return NaiveModel(std::move(table),
                    total / static_cast<double>(train_set.size()));
}

void save_model(const NaiveModel& model, std::ostream& out) {
  out << kModelFileMagic << '\n'
      << "kind naive\n"
      << "global_mean " << detail::format_double(model.global_mean()) << '\n'
      << "entries " << model.table().size() << '\n';
  for (const auto& [key, mean] : model.table()) {
    out << "e " << key.b_count << ' ' << key.s_count << ' ' << key.r_count << ' '
        << key.mpeg4 << ' ' << key.vp9 << ' ' << key.hevc << ' '
        << detail::format_double(mean) << '\n';
  }
  out << "end\n";
}

void save_model_file(const NaiveModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  save_model(model, out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing model file '" + path + "'");
}

NaiveModel load_model(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::string_view {
    if (!std::getline(in, line)) throw ParseError("truncated model file", line_no + 1);
    ++line_no;
    return detail::trim(line);
  };

  if (next_line() != kModelFileMagic)
    throw ParseError("not a " + std::string(kModelFileMagic) + " file (version mismatch?)",
                     line_no);
  if (next_line() != "kind naive")
    throw ParseError("model kind mismatch: expected 'kind naive'", line_no);

  std::string_view mean_line = next_line();
  if (!mean_line.starts_with("global_mean "))
    throw ParseError("expected 'global_mean <value>'", line_no);
  const double global_mean =
      detail::parse_double(mean_line.substr(12), "global_mean", line_no);

  std::string_view entries_line = next_line();
  if (!entries_line.starts_with("entries "))
    throw ParseError("expected 'entries <count>'", line_no);
  const long long entries =
      detail::parse_int(entries_line.substr(8), "entries", line_no);
  if (entries < 0) throw ParseError("negative entry count", line_no);

  std::map<CompositionKey, double> table;
  for (long long i = 0; i < entries; ++i) {
    const auto fields = detail::split_fields(next_line(), ' ');
    if (fields.size() != 8 || fields[0] != "e")
      throw ParseError("expected 'e <b> <s> <r> <mpeg4> <vp9> <hevc> <mean>'",
                       line_no);
    CompositionKey key;
    key.b_count = static_cast<int>(detail::parse_int(fields[1], "b_count", line_no));
    key.s_count = static_cast<int>(detail::parse_int(fields[2], "s_count", line_no));
    key.r_count = static_cast<int>(detail::parse_int(fields[3], "r_count", line_no));
    key.mpeg4 = static_cast<int>(detail::parse_int(fields[4], "mpeg4", line_no));
    key.vp9 = static_cast<int>(detail::parse_int(fields[5], "vp9", line_no));
    key.hevc = static_cast<int>(detail::parse_int(fields[6], "hevc", line_no));
    const double mean = detail::parse_double(fields[7], "mean", line_no);
    if (!table.emplace(key, mean).second)
      throw ParseError("duplicate composition key", line_no);
  }
  if (next_line() != "end") throw ParseError("expected 'end'", line_no);
  return NaiveModel(std::move(table), global_mean);
}

NaiveModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
  return load_model(in);
}

}  // namespace taskmerge::baseline
