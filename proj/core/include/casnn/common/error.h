/*
 * Copyright 2026 The CasNN Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CASNN_COMMON_ERROR_H_
#define CASNN_COMMON_ERROR_H_

#include <stdexcept>
#include <string>

namespace casnn {

// Violated precondition of an operation: bad shapes, out-of-range indices,
// wrong window size. Callers can usually fix the call site.
class ContractError : public std::invalid_argument {
 public:
  explicit ContractError(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed or missing external data: unreadable files, corrupt headers,
// masks that disagree with their images.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace casnn

#endif  // CASNN_COMMON_ERROR_H_
