#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mcddpm {

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string doc;
};

/// Every key a run understands, in echo order.
const std::vector<ConfigKey>& config_keys();

/// Plain-text key=value run configuration. Unknown keys are rejected; every key has a
/// default, so the resolved config is always complete.
class RunConfig {
 public:
  RunConfig();

  /// Parses "key = value" lines; '#' starts a comment, blank lines are skipped.
  static RunConfig from_text(std::string_view text, const std::string& origin = "<text>");
  static RunConfig from_file(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  /// Applies another text on top of this one.
  void merge_text(std::string_view text, const std::string& origin);

  const std::string& get(const std::string& key) const;
  long long get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;

  /// The fully resolved config, one "key = value" per line.
  std::string to_text() const;
  /// Writes `<command>.config.txt` into `dir`.
  void echo(const std::filesystem::path& dir, const std::string& command) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace mcddpm
