#pragma once

#include <stdexcept>
#include <string>

namespace qpred {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input values (negative cost, nonpositive Q-error operand, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

// File / schema problems in snapshots and logs.
class SchemaError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Not enough training data to fit a model; callers keep the previous model.
class UnderTrainedError : public Error {
public:
    using Error::Error;
};

}  // namespace qpred
