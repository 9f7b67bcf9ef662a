// Copyright 2026 The vsx Authors.
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

namespace vsx {

//! Base class of every error thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

//! Two keys hash to the same signature but carry different values. A new
//! global seed usually fixes it; if it does not, the input itself maps one key
//! to two values.
class DuplicateSignatureConflict : public Error {
  public:
    using Error::Error;
};

//! Two distinct signatures in the same shard share their local signature.
//! Only raised for functions; use wider local signatures or another seed.
class DuplicateLocalSignature : public Error {
  public:
    using Error::Error;
};

//! Every global seed in the retry budget produced a failing shard.
class RetriesExhausted : public Error {
  public:
    using Error::Error;
};

//! Malformed, truncated or unsupported serialized structure.
class FormatError : public Error {
  public:
    using Error::Error;
};

}  // namespace vsx
