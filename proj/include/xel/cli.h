// Copyright 2026 The XEL Authors.
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

#ifndef XEL_CLI_H_
#define XEL_CLI_H_

#include <string>
#include <vector>

namespace xel {

// Command-line front end. Subcommands: build-stats, build-dictionary,
// candidates, link, train, eval, gradcheck. Returns the process exit code:
// 0 on success, 1 on a runtime failure, 2 on a usage error.
int RunCli(int argc, const char *const *argv);
int RunCli(const std::vector<std::string> &args);

}  // namespace xel

#endif  // XEL_CLI_H_
