// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace nlq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// Subcommands gen-data, train, predict, rerank and eval. Returns the process
// exit code: 0 on success, 1 for usage or validation errors, 2 otherwise.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nlq::cli
