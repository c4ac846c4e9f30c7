// Copyright 2026 The volaug Authors
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

#ifndef VOLAUG_ERROR_HPP
#define VOLAUG_ERROR_HPP

#include <stdexcept>
#include <string>

namespace volaug {

/** Base class of every exception thrown by the library. */
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/** A caller-side precondition was violated (bad dims, ranges, mismatched pairs). */
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/** Input data is malformed or statistically degenerate. */
class DataError : public Error {
 public:
  using Error::Error;
};

/** File system or stream failure. */
class IoError : public Error {
 public:
  using Error::Error;
};

/** A metric is undefined for the given inputs (e.g. an empty mask). */
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

/** A configuration document or spec file is invalid. */
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace volaug

#endif  // VOLAUG_ERROR_HPP
