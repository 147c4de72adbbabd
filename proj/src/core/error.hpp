/* Copyright 2026 The tabinv Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef TABINV_CORE_ERROR_HPP_
#define TABINV_CORE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace tabinv {

enum class ErrorCode {
  kInvalidArgument = 1,
  kParse,
  kInvalidTable,
  kPermutationSizeMismatch,
  kOutOfRange,
  kNoHighlight,
  kInvalidPMax,
  kDimensionMismatch,
  kEmptyBatch,
  kNonFiniteLoss,
  kLengthMismatch,
  kIo,
  kInvariantViolated,
};

// Every failure raised by the core carries one of the codes above so the
// C boundary can translate it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tabinv

#endif  // TABINV_CORE_ERROR_HPP_
