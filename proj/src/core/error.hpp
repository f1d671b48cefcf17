// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#pragma once

#include <stdexcept>
#include <string>

namespace iatrack {

// Bad user input: unreadable/malformed files, nonsensical values.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public InputError {
public:
    explicit ParseError(const std::string& msg) : InputError(msg) {}
};

class IoError : public InputError {
public:
    explicit IoError(const std::string& msg) : InputError(msg) {}
};

// A tracking-state contract was violated (e.g. a target window left the image).
class StateError : public std::runtime_error {
public:
    explicit StateError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace iatrack
