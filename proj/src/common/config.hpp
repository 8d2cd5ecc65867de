#pragma once

#include <map>
#include <string>
#include <vector>

namespace racelab {

// Reads a flat "key = value" text file. '#' starts a comment, blank lines are
// skipped. Used for run configs and track metadata.
std::map<std::string, std::string> read_kv_text(const std::string& text);
std::map<std::string, std::string> read_kv_file(const std::string& path);

// Run configuration. Every tunable constant in the project lives here with
// its default; unknown keys are rejected so typos fail loudly.
class Config {
 public:
  Config();  // all defaults

  static Config load(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  double get_f(const std::string& key) const;
  int get_i(const std::string& key) const;
  long get_l(const std::string& key) const;
  bool get_b(const std::string& key) const;
  const std::string& get_s(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;

  // Canonical sorted dump; embedded in manifests and checkpoints.
  std::string to_string() const;

  const std::map<std::string, std::string>& items() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace racelab
