/* Copyright 2026 The spdmbi Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/


#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spdmbi::cli {

// Bad configuration or usage; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat key/value settings. Keys use the long flag spelling ("chi-r");
// underscores in config files are accepted as hyphens.
class Settings {
 public:
  void set(std::string key, std::string value);
  bool has(std::string_view key) const;

  double real(std::string_view key, double fallback) const;
  int integer(std::string_view key, int fallback) const;
  std::string text(std::string_view key, std::string fallback) const;
  bool flag(std::string_view key) const;
  // Overrides the recorded value with one derived from several keys.
  void record(std::string_view key, std::string value) const { resolved_[std::string(key)] = std::move(value); }

  // Throws ConfigError naming the first key outside `known`.
  void require_known(const std::vector<std::string>& known) const;

  const std::map<std::string, std::string, std::less<>>& raw() const { return values_; }
  // Every value read so far, defaults included.
  const std::map<std::string, std::string>& resolved() const { return resolved_; }

 private:
  const std::string* find(std::string_view key) const;

  std::map<std::string, std::string, std::less<>> values_;
  mutable std::map<std::string, std::string> resolved_;
};

// `key = value` lines, '#' starts a comment, blank lines ignored.
Settings load_config(const std::filesystem::path& path);

// Entry point of the spdmbi tool. Exit codes: 0 success, 2 configuration or
// usage error, 3 numerical contract violation.
int run(int argc, const char* const argv[], std::ostream& out, std::ostream& err);

}  // namespace spdmbi::cli
