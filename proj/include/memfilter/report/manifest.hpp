// Copyright 2026 The Memfilter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MEMFILTER_REPORT_MANIFEST_HPP_
#define MEMFILTER_REPORT_MANIFEST_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace memfilter::report {

std::string_view version();

// 64-bit FNV-1a (offset basis 0xcbf29ce484222325, prime 0x100000001b3).
std::uint64_t fnv1a64(std::string_view bytes);
std::string fingerprint_hex(std::uint64_t h);  // 16 lowercase hex digits
std::string fingerprint_file(const std::filesystem::path& path);

// An output directory. Files are rendered in memory, hashed, and written;
// finish() adds manifest.json listing inputs, config, and output hashes.
class OutputDir {
 public:
  OutputDir(std::filesystem::path dir, std::string subcommand);

  const std::filesystem::path& path() const { return dir_; }

  void add_input(const std::string& role, const std::filesystem::path& file);
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  nlohmann::ordered_json& config() { return config_; }

  void write(const std::string& name,
             const std::function<void(std::ostream&)>& render);

  void finish(std::size_t errors, std::size_t warnings);

 private:
  std::filesystem::path dir_;
  std::string subcommand_;
  std::uint64_t seed_ = 0;
  nlohmann::ordered_json config_ = nlohmann::ordered_json::object();
  std::vector<std::pair<std::string, nlohmann::ordered_json>> inputs_;
  std::vector<std::pair<std::string, std::string>> outputs_;
};

}  // namespace memfilter::report

#endif  // MEMFILTER_REPORT_MANIFEST_HPP_
