// Copyright 2026 The relpcnn Authors.
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

// Command-line front end: inspect, train, grid, predict and evaluate.

#ifndef RELPCNN_CLI_H_
#define RELPCNN_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace relpcnn {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

// Runs one command. `args` excludes the program name. Normal output goes to
// `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err);

// Hex SHA-256 of a file's contents. Throws LoadError if it cannot be read.
std::string file_sha256(const std::string &path);

}  // namespace relpcnn

#endif  // RELPCNN_CLI_H_
