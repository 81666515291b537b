// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace nnb {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shape/arity mismatch between operands.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Malformed input file.
class ParseError : public Error {
public:
    using Error::Error;
};

// Semantic violation in an otherwise well-formed problem; carries the offending field.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

// Optimization backend failure (infeasible programs are reported via statuses, not this).
class SolveError : public Error {
public:
    using Error::Error;
};

}  // namespace nnb
