// Copyright 2026 The hapax-mcmc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HAPAX_ERROR_HPP_
#define HAPAX_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace hapax {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A function was called with arguments outside its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Reading or decoding an input file failed.
class IngestionError : public Error {
 public:
  IngestionError(const std::string& file, const std::string& what)
      : Error(file + ": " + what), file_(file) {}

  const std::string& file() const { return file_; }

 private:
  std::string file_;
};

// The corpus produced no hapax at all.
class EmptyTableError : public Error {
 public:
  using Error::Error;
};

// Two artifacts that must agree do not (e.g. a token missing from a table).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

// An iterative procedure did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// A pipeline stage needs the output of a stage that has not been run.
class DependencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace hapax

#endif  // HAPAX_ERROR_HPP_
