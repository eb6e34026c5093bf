// SPDX-FileCopyrightText: Copyright (c) 2026 The flashtok Authors
// SPDX-License-Identifier: Apache-2.0
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

#pragma once

#include <stdexcept>
#include <string>

namespace flashtok {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// I/O failure on a file.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Bytes were readable but not a supported or well-formed image.
class DecodeError : public Error {
 public:
  using Error::Error;
};

/// Rectangle outside the image it addresses.
class BoundsError : public Error {
 public:
  using Error::Error;
};

/// Shapes that do not fit together (divisibility, mismatched dims).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Configuration violating a stated invariant.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of a function (step range, empty input).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace flashtok
