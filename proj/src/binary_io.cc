// proscore/src/binary_io.cc

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

#include "proscore/binary_io.h"

#include <bit>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

namespace proscore {

void ByteWriter::Magic(std::string_view magic) { buf_.append(magic); }

void ByteWriter::U8(uint8_t v) { buf_.push_back(static_cast<char>(v)); }

void ByteWriter::U32(uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void ByteWriter::F64(double v) {
  const auto bits = std::bit_cast<uint64_t>(v);
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

void ByteWriter::Str(std::string_view s) {
  U32(static_cast<uint32_t>(s.size()));
  buf_.append(s);
}

void ByteWriter::Doubles(const double* data, size_t n) {
  buf_.reserve(buf_.size() + 8 * n);
  for (size_t i = 0; i < n; ++i) F64(data[i]);
}

void ByteReader::Need(size_t n) const {
  if (pos_ + n > bytes_.size()) {
    throw DataError(what_ + ": truncated at byte " + std::to_string(pos_));
  }
}

void ByteReader::ExpectMagic(std::string_view magic) {
  Need(magic.size());
  if (bytes_.substr(pos_, magic.size()) != magic) {
    throw DataError(what_ + ": bad magic, expected \"" + std::string(magic) + "\"");
  }
  pos_ += magic.size();
}

uint8_t ByteReader::U8() {
  Need(1);
  return static_cast<uint8_t>(bytes_[pos_++]);
}

uint32_t ByteReader::U32() {
  Need(4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<uint32_t>(static_cast<uint8_t>(bytes_[pos_ + i])) << (8 * i);
  }
  pos_ += 4;
  return v;
}

double ByteReader::F64() {
  Need(8);
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<uint64_t>(static_cast<uint8_t>(bytes_[pos_ + i])) << (8 * i);
  }
  pos_ += 8;
  return std::bit_cast<double>(bits);
}

std::string ByteReader::Str() {
  const uint32_t n = U32();
  Need(n);
  std::string s(bytes_.substr(pos_, n));
  pos_ += n;
  return s;
}

void ByteReader::Doubles(double* out, size_t n) {
  Need(8 * n);
  for (size_t i = 0; i < n; ++i) out[i] = F64();
}

Matrix ByteReader::MatrixBody(uint32_t rows, uint32_t cols) {
  Matrix m(rows, cols);
  Doubles(m.data(), static_cast<size_t>(rows) * cols);
  return m;
}

std::string_view ByteReader::Raw(size_t n) {
  Need(n);
  auto out = bytes_.substr(pos_, n);
  pos_ += n;
  return out;
}

void ByteReader::ExpectEnd() const {
  if (pos_ != bytes_.size()) {
    throw DataError(what_ + ": " + std::to_string(bytes_.size() - pos_) +
                    " trailing bytes");
  }
}

std::string ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFileBytes(const std::string& path, const std::string& bytes) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for " + path);
}

std::string PeekMagic(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  char buf[4];
  in.read(buf, 4);
  if (in.gcount() != 4) return "";
  return std::string(buf, 4);
}

}  // namespace proscore
