// Copyright 2026 The Prime Authors
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

// Batch front end. Every command is a function of a fully resolved JSON
// argument object; the same object is stored in <out>/run.json so that
// `prime replay <out>/run.json` re-executes the run byte for byte.

#ifndef PRIME_TOOLS_CLI_H_
#define PRIME_TOOLS_CLI_H_

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace prime::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNotConverged = 3;

// Invalid option values or combinations.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Invocation {
  std::string command;
  // Every option with its default resolved. Paths are absolute.
  nlohmann::ordered_json args;
};

// 64-bit FNV-1a of `data` as 16 lowercase hex digits.
std::string Fnv1a64(const std::string& data);

// Runs one command, writing its outputs and run.json into `out_dir` (created
// if missing). Returns kExitOk or kExitNotConverged; throws on errors.
int Execute(const Invocation& invocation, const std::string& out_dir);

// Re-runs the invocation stored in a run.json. The output directory defaults
// to the one holding run.json. Throws IoError if an input file changed.
int Replay(const std::string& run_json,
           const std::optional<std::string>& out_dir);

// Full command line entry point; maps exceptions to exit codes.
int Main(int argc, char** argv);

}  // namespace prime::cli

#endif  // PRIME_TOOLS_CLI_H_
