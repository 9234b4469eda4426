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

#ifndef XEL_TEXT_H_
#define XEL_TEXT_H_

#include <string>
#include <string_view>

namespace xel {

// Trims the string and collapses every run of Unicode whitespace into a
// single ASCII space. Throws Error on malformed UTF-8.
std::string CollapseWhitespace(std::string_view text);

// Surface-form key used by the mention dictionary: Unicode lowercase
// (root locale) followed by CollapseWhitespace.
std::string NormalizeSurface(std::string_view text);

}  // namespace xel

#endif  // XEL_TEXT_H_
