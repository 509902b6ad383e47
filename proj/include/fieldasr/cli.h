// fieldasr/cli.h

// Copyright 2026  The fieldasr Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef FIELDASR_CLI_H_
#define FIELDASR_CLI_H_

#include <exception>
#include <ostream>
#include <string>
#include <vector>

namespace fieldasr {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitData = 3;

/// Exit code for an exception thrown by the library.
int ExitCodeFor(const std::exception& e);

/// Runs `fieldasr <args...>` (args exclude the program name) and returns the
/// exit code. Normal output goes to `out`, diagnostics to `err`.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace fieldasr

#endif  // FIELDASR_CLI_H_
