// include/smt/error.h
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

#ifndef SMT_ERROR_H_
#define SMT_ERROR_H_

#include <stdexcept>
#include <string>

namespace smt {

// Error categories map onto the CLI exit codes: usage 1, data 2, internal 3.
enum class ErrorKind { kUsage = 1, kData = 2, kInternal = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Bad arguments or violated preconditions.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::kUsage, what) {}
};

// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

// Same category as `kind`, as the matching subclass.
[[noreturn]] inline void throw_error(ErrorKind kind, const std::string& what) {
  switch (kind) {
    case ErrorKind::kUsage: throw UsageError(what);
    case ErrorKind::kData: throw DataError(what);
    default: throw Error(kind, what);
  }
}

}  // namespace smt

#endif  // SMT_ERROR_H_
