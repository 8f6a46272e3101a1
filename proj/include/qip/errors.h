// Copyright 2026 The qipsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QIP_ERRORS_H
#define QIP_ERRORS_H

#include <stdexcept>
#include <string>

namespace qip {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad sizes or shapes (non-square operators, mismatched dimensions).
struct DimensionError : Error {
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
    using Error::Error;
};

/// Symbol not in the expected alphabet, or alphabets that do not line up.
struct AlphabetError : Error {
    using Error::Error;
};

/// Caller broke a documented precondition.
struct ContractError : Error {
    using Error::Error;
};

/// Malformed spec or prover file.
struct ParseError : Error {
    using Error::Error;
};

/// A classical table that is not injective where it has to be.
struct ReversibilityError : Error {
    using Error::Error;
};

/// Columns that cannot be completed to a unitary.
struct OrthonormalityError : Error {
    using Error::Error;
};

/// A verifier that breaks its declared head or halting discipline.
struct StructureError : Error {
    using Error::Error;
};

/// Enumeration or matrix size above the configured cap.
struct CapacityError : Error {
    using Error::Error;
};

}  // namespace qip

#endif
