// casr/io.h

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

#ifndef CASR_IO_H_
#define CASR_IO_H_

#include <filesystem>
#include <string>
#include <vector>

#include "casr/common.h"

namespace casr {

// Text matrix format: header line "T S", then one row per line,
// 17 significant digits.
void WriteMatrix(const std::filesystem::path& path, const Matrix& m);
Matrix ReadMatrix(const std::filesystem::path& path);

std::string ReadFileToString(const std::filesystem::path& path);
void WriteStringToFile(const std::filesystem::path& path, const std::string& content);
std::vector<std::string> ReadLines(const std::filesystem::path& path);

// Content hash of a file, hex encoded (FNV-1a/64).
std::string HashFile(const std::filesystem::path& path);
std::string HashHex(std::uint64_t h);

}  // namespace casr

#endif  // CASR_IO_H_
