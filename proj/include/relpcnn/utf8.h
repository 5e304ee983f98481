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

#ifndef RELPCNN_UTF8_H_
#define RELPCNN_UTF8_H_

#include <string>
#include <string_view>

namespace relpcnn::utf8 {

// Decodes UTF-8 into Unicode scalar values. Throws ParseError on invalid
// sequences.
std::u32string decode(std::string_view text);

std::string encode(std::u32string_view text);

void append(std::string &out, char32_t c);

// Number of scalar values in a UTF-8 string.
std::size_t length(std::string_view text);

}  // namespace relpcnn::utf8

#endif  // RELPCNN_UTF8_H_
