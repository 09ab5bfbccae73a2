/* Copyright 2026 The QFCA Authors. All Rights Reserved.

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
#include "qfca/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "qfca/error.hpp"

namespace qfca {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& value) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ArgumentError("config key '" + key + "': expected an integer, got '" + value + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ArgumentError("config key '" + key + "': expected true or false, got '" + value + "'");
}

}  // namespace

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& key, const std::string& value) {
  if (value == "inf" || value == "infinity") return std::numeric_limits<double>::infinity();
  double v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ArgumentError("'" + key + "': expected a number, got '" + value + "'");
  return v;
}

ConfigEntries parse_config_text(const std::string& text) {
  ConfigEntries entries;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ArgumentError("config line " + std::to_string(number) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    entries[key] = value;
  }
  return entries;
}

ConfigEntries read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void apply_config(const ConfigEntries& entries, RunConfig& config) {
  auto& p = config.pipeline;
  for (const auto& [key, value] : entries) {
    if (key == "bins") p.n_bins = parse_int(key, value);
    else if (key == "patch-size") p.patch_size = parse_int(key, value);
    else if (key == "sigma-p") p.sigma_p = parse_double(key, value);
    else if (key == "sigma-s") p.sigma_s = parse_double(key, value);
    else if (key == "pca-components") p.pca_components = parse_int(key, value);
    else if (key == "reference") p.reference = parse_reference_mode(value);
    else if (key == "sample-budget") p.sample_budget = parse_int(key, value);
    else if (key == "border") p.border_exclusion = parse_int(key, value);
    else if (key == "pad") p.pad = parse_pad(value);
    else if (key == "feature-scale") config.bank.scale = parse_int(key, value);
    else if (key == "laplacian") config.bank.laplacian = parse_bool(key, value);
    else if (key == "filter-sigmas") {
      std::vector<double> sigmas;
      std::istringstream in(value);
      std::string item;
      while (std::getline(in, item, ',')) sigmas.push_back(parse_double(key, trim(item)));
      if (sigmas.empty()) throw ArgumentError("filter-sigmas needs at least one value");
      config.bank.sigmas = sigmas;
    } else {
      throw ArgumentError("unknown config key '" + key + "'");
    }
  }
}

std::string format_config(const RunConfig& config) {
  const auto& p = config.pipeline;
  std::ostringstream out;
  out << "bins = " << p.n_bins << "\n"
      << "patch-size = " << p.patch_size << "\n"
      << "sigma-p = " << format_double(p.sigma_p) << "\n"
      << "sigma-s = " << format_double(p.sigma_s) << "\n"
      << "pca-components = " << p.pca_components << "\n"
      << "reference = " << to_string(p.reference) << "\n"
      << "sample-budget = " << p.sample_budget << "\n"
      << "border = " << p.border_exclusion << "\n"
      << "pad = " << to_string(p.pad) << "\n"
      << "feature-scale = " << config.bank.scale << "\n"
      << "laplacian = " << (config.bank.laplacian ? "true" : "false") << "\n"
      << "filter-sigmas = ";
  for (std::size_t i = 0; i < config.bank.sigmas.size(); ++i)
    out << (i ? "," : "") << format_double(config.bank.sigmas[i]);
  out << "\n";
  return out.str();
}

}  // namespace qfca
