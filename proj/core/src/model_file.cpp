#include "taskmerge/model_file.hpp"

#include <fstream>
#include <stdexcept>

#include "text_util.hpp"

namespace taskmerge {

std::string model_file_kind(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kModelFileMagic)
    throw std::runtime_error("'" + path + "' is not a " +
                             std::string(kModelFileMagic) + " file");
  if (!std::getline(in, line))
    throw std::runtime_error("'" + path + "': truncated model file");
  std::string_view sv = detail::trim(line);
  if (!sv.starts_with("kind "))
    throw std::runtime_error("'" + path + "': missing model kind");
  return std::string(detail::trim(sv.substr(5)));
}

}  // namespace taskmerge
