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
#ifndef QFCA_CONFIG_HPP
#define QFCA_CONFIG_HPP

// key = value run configuration, one entry per line, '#' starts a comment.
// Keys are the long CLI flag names without the leading dashes.

#include <filesystem>
#include <map>
#include <string>

#include "qfca/features.hpp"
#include "qfca/scoring.hpp"

namespace qfca {

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  PipelineConfig pipeline;
  FilterBankConfig bank;
};

using ConfigEntries = std::map<std::string, std::string>;

ConfigEntries parse_config_text(const std::string& text);
ConfigEntries read_config_file(const std::filesystem::path& path);

/// Applies known keys, throwing ArgumentError on unknown keys or bad values.
void apply_config(const ConfigEntries& entries, RunConfig& config);

/// Every key with its current value; parse + apply reproduces `config`.
std::string format_config(const RunConfig& config);

std::string format_double(double v);
double parse_double(const std::string& key, const std::string& value);

}  // namespace qfca

#endif  // QFCA_CONFIG_HPP
