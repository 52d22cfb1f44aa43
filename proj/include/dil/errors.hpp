// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace dil {

enum class ErrorCode {
    config,     // invalid configuration values or malformed config documents
    bounds,     // timestep outside the schedule table
    ordering,   // timestep pair in the wrong order
    shape,      // vector dimension mismatch
    lookup,     // unknown condition id
    integrity,  // record hash does not match the active schedule/denoiser
    undefined,  // result is mathematically undefined (e.g. cosine of a zero vector)
    io,         // file read/write failure
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace dil
