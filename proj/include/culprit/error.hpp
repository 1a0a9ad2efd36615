// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Culprit Authors

#pragma once

#include <stdexcept>
#include <string>

namespace culprit {

/// Malformed or inconsistent input data (exit code 2 at the CLI).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid arguments or preconditions supplied by the caller (exit code 1).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace culprit
