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
#ifndef QFCA_ERROR_HPP
#define QFCA_ERROR_HPP

#include <filesystem>
#include <stdexcept>
#include <string>

namespace qfca {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument to an operation (even kernel size, k > C, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(const std::filesystem::path& path, const std::string& what)
      : Error(path.string() + ": " + what), path_(path) {}
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

// Malformed tensor file. `kind()` tells the three QTF1 failure modes apart.
class FormatError : public Error {
 public:
  enum class Kind { kBadMagic, kTruncated, kUnsupportedDtype, kShape };

  FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

// Dataset index inconsistency (e.g. anomalous image without a mask).
class IndexError : public Error {
 public:
  using Error::Error;
};

// Patch and reference histograms do not carry the same total mass.
class MassError : public Error {
 public:
  using Error::Error;
};

// Finite-difference check requested on inputs with near-duplicate entries.
class IllConditioned : public Error {
 public:
  using Error::Error;
};

}  // namespace qfca

#endif  // QFCA_ERROR_HPP
