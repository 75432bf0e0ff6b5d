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

#include "memfilter/report/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "memfilter/core/error.hpp"

#ifndef MEMFILTER_VERSION
#define MEMFILTER_VERSION "0.0.0"
#endif

namespace memfilter::report {

std::string_view version() { return MEMFILTER_VERSION; }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fingerprint_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fingerprint_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  return fingerprint_hex(fnv1a64(bytes));
}

OutputDir::OutputDir(std::filesystem::path dir, std::string subcommand)
    : dir_(std::move(dir)), subcommand_(std::move(subcommand)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error("cannot create " + dir_.string() + ": " + ec.message());
}

void OutputDir::add_input(const std::string& role,
                          const std::filesystem::path& file) {
  nlohmann::ordered_json entry;
  entry["file"] = file.filename().string();
  entry["fnv1a64"] = fingerprint_file(file);
  inputs_.emplace_back(role, std::move(entry));
}

void OutputDir::write(const std::string& name,
                      const std::function<void(std::ostream&)>& render) {
  std::ostringstream buf;
  render(buf);
  const std::string bytes = buf.str();
  const auto target = dir_ / name;
  std::ofstream out(target, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + target.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + target.string());
  outputs_.emplace_back(name, fingerprint_hex(fnv1a64(bytes)));
}

void OutputDir::finish(std::size_t errors, std::size_t warnings) {
  nlohmann::ordered_json m;
  m["subcommand"] = subcommand_;
  m["tool_version"] = std::string(version());
  m["seed"] = seed_;
  auto inputs = nlohmann::ordered_json::object();
  for (const auto& [role, entry] : inputs_) inputs[role] = entry;
  m["inputs"] = inputs;
  m["config"] = config_;
  auto outputs = nlohmann::ordered_json::object();
  for (const auto& [name, hash] : outputs_) outputs[name] = hash;
  m["outputs"] = outputs;
  m["error_count"] = errors;
  m["warning_count"] = warnings;
  const auto target = dir_ / "manifest.json";
  std::ofstream out(target, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + target.string());
  out << m.dump(2) << '\n';
}

}  // namespace memfilter::report
