// casr/error.h

// Copyright 2026  CASR Authors

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

#ifndef CASR_ERROR_H_
#define CASR_ERROR_H_

#include <stdexcept>
#include <string>

namespace casr {

// Error classes map 1:1 onto CLI exit codes (0 = success).
enum class ErrorClass : int {
  kUsage = 1,    // bad command line
  kConfig = 2,   // invalid or unknown configuration
  kIo = 3,       // file system / parse failures
  kData = 4,     // input violates a module precondition
  kNumeric = 5,  // divergence, overflow
  kInternal = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& kind, const std::string& msg)
      : std::runtime_error(kind + ": " + msg), cls_(cls), kind_(kind) {}
  ErrorClass error_class() const { return cls_; }
  const std::string& kind() const { return kind_; }

 private:
  ErrorClass cls_;
  std::string kind_;
};

#define CASR_DEFINE_ERROR(Name, Class)                          \
  class Name : public Error {                                   \
   public:                                                      \
    explicit Name(const std::string& msg)                       \
        : Error(Class, #Name, msg) {}                           \
  }

CASR_DEFINE_ERROR(EmptyInput, ErrorClass::kData);
CASR_DEFINE_ERROR(UnknownSenone, ErrorClass::kData);
CASR_DEFINE_ERROR(IncompleteTransitionModel, ErrorClass::kData);
CASR_DEFINE_ERROR(LabelMismatch, ErrorClass::kData);
CASR_DEFINE_ERROR(ShapeError, ErrorClass::kData);
CASR_DEFINE_ERROR(MissingFeature, ErrorClass::kData);
CASR_DEFINE_ERROR(UtteranceMismatch, ErrorClass::kData);
CASR_DEFINE_ERROR(DegenerateInput, ErrorClass::kData);
CASR_DEFINE_ERROR(EmptyReference, ErrorClass::kData);
CASR_DEFINE_ERROR(InvalidConfig, ErrorClass::kConfig);
CASR_DEFINE_ERROR(NumericalOverflow, ErrorClass::kNumeric);
CASR_DEFINE_ERROR(TrainingDiverged, ErrorClass::kNumeric);
CASR_DEFINE_ERROR(SyncError, ErrorClass::kInternal);
CASR_DEFINE_ERROR(IoError, ErrorClass::kIo);

#undef CASR_DEFINE_ERROR

// Wraps a failure with the pipeline stage it occurred in; keeps the
// underlying error class so exit codes stay meaningful.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const Error& cause)
      : Error(cause.error_class(), "StageError",
              "stage '" + stage + "' failed: " + cause.what()),
        stage_(stage) {}
  StageError(const std::string& stage, const std::string& msg)
      : Error(ErrorClass::kInternal, "StageError",
              "stage '" + stage + "' failed: " + msg),
        stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace casr

#endif  // CASR_ERROR_H_
