#include "tpr/cli.hpp"

#include "tpr/error.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace tpr::cli {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string Manifest::render() const {
  std::ostringstream s;
  for (const auto& [k, v] : entries_) s << k << '=' << v << '\n';
  return s.str();
}

std::vector<std::string> config_to_flags(const std::string& text) {
  std::vector<std::string> flags;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::DomainError, "config line " + std::to_string(number) + " is not key=value");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    while (!key.empty() && key[0] == '-') key.erase(0, 1);
    if (key.empty()) throw Error(ErrorKind::DomainError, "config line " + std::to_string(number) + " has no key");
    flags.push_back("--" + key + "=" + value);
  }
  return flags;
}

}  // namespace tpr::cli
