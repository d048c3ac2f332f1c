#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace tpr::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNonConvergence = 4 };

/// Shortest round-trip decimal form; "inf", "-inf", "nan" for non-finite.
std::string format_double(double v);

/// Sidecar record of a run: sorted key=value lines.
class Manifest {
 public:
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }
  std::string render() const;

 private:
  std::map<std::string, std::string> entries_;
};

/// Reads `key=value` lines ('#' comments, blank lines ignored) into flags
/// of the form --key=value.
std::vector<std::string> config_to_flags(const std::string& text);

/// Entry point shared by the executable and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tpr::cli
