// Copyright 2026 The sslsv Authors
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

#ifndef SSLSV_COMMON_HPP_
#define SSLSV_COMMON_HPP_

#include <sstream>
#include <stdexcept>
#include <string>

namespace sslsv {

// All recoverable failures (bad files, shape mismatches, violated
// preconditions) are reported as sslsv::Error.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

inline void cat_into(std::ostringstream&) {}

template <typename T, typename... Rest>
void cat_into(std::ostringstream& os, const T& v, const Rest&... rest) {
  os << v;
  cat_into(os, rest...);
}

template <typename... Args>
std::string str_cat(const Args&... args) {
  std::ostringstream os;
  os.precision(17);
  cat_into(os, args...);
  return os.str();
}

template <typename... Args>
[[noreturn]] void fail(const Args&... args) {
  throw Error(str_cat(args...));
}

}  // namespace detail

}  // namespace sslsv

// Precondition / invariant check that throws sslsv::Error with a message
// built from the variadic arguments.
#define SSLSV_REQUIRE(cond, ...)                \
  do {                                          \
    if (!(cond)) ::sslsv::detail::fail(__VA_ARGS__); \
  } while (0)

#define SSLSV_FAIL(...) ::sslsv::detail::fail(__VA_ARGS__)

#endif  // SSLSV_COMMON_HPP_
