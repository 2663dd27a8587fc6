// proscore/include/proscore/binary_io.h

// Copyright 2026  The proscore Authors
//
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

#ifndef PROSCORE_BINARY_IO_H_
#define PROSCORE_BINARY_IO_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "proscore/common.h"

namespace proscore {

/// Appends little-endian primitives to an in-memory byte buffer.
class ByteWriter {
 public:
  void Magic(std::string_view magic);
  void U8(uint8_t v);
  void U32(uint32_t v);
  void F64(double v);
  void Str(std::string_view s);
  /// Row-major doubles, no header.
  void Doubles(const double* data, size_t n);
  void MatrixBody(const Matrix& m) { Doubles(m.data(), static_cast<size_t>(m.size())); }
  /// Appends raw bytes (for nested blobs).
  void Raw(std::string_view bytes) { buf_.append(bytes); }

  const std::string& bytes() const { return buf_; }
  std::string Take() { return std::move(buf_); }

 private:
  std::string buf_;
};

/// Reads little-endian primitives from a byte buffer; every read is bounds
/// checked and throws DataError naming `what` on truncation.
class ByteReader {
 public:
  ByteReader(std::string_view bytes, std::string what)
      : bytes_(bytes), what_(std::move(what)) {}

  void ExpectMagic(std::string_view magic);
  uint8_t U8();
  uint32_t U32();
  double F64();
  std::string Str();
  void Doubles(double* out, size_t n);
  Matrix MatrixBody(uint32_t rows, uint32_t cols);
  /// Consumes `n` raw bytes.
  std::string_view Raw(size_t n);
  /// Throws unless the buffer is fully consumed.
  void ExpectEnd() const;

  size_t offset() const { return pos_; }
  std::string_view rest() const { return bytes_.substr(pos_); }
  const std::string& what() const { return what_; }

 private:
  void Need(size_t n) const;

  std::string_view bytes_;
  std::string what_;
  size_t pos_ = 0;
};

std::string ReadFileBytes(const std::string& path);
void WriteFileBytes(const std::string& path, const std::string& bytes);

/// Returns the first four bytes of a file, or "" if it is shorter.
std::string PeekMagic(const std::string& path);

}  // namespace proscore

#endif  // PROSCORE_BINARY_IO_H_
