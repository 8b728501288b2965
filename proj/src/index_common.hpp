// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include "serval/errors.hpp"
#include "serval/hashing.hpp"
#include "serval/types.hpp"

namespace serval::detail {

static_assert(std::endian::native == std::endian::little,
              "index files are little-endian and written in host byte order");

/// Bounded collection of the best k entries under ranks_before().
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) {}

  void offer(const DocId& doc_id, double score) {
    if (k_ == 0) return;
    if (heap_.size() < k_) {
      heap_.push(ScoredDoc{doc_id, score});
      return;
    }
    const ScoredDoc& worst = heap_.top();
    if (score > worst.score || (score == worst.score && doc_id < worst.doc_id)) {
      heap_.pop();
      heap_.push(ScoredDoc{doc_id, score});
    }
  }

  std::vector<ScoredDoc> take() {
    std::vector<ScoredDoc> out;
    out.reserve(heap_.size());
    while (!heap_.empty()) {
      out.push_back(heap_.top());
      heap_.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  // Top of the heap is the entry that ranks last.
  struct RanksBefore {
    bool operator()(const ScoredDoc& a, const ScoredDoc& b) const { return ranks_before(a, b); }
  };
  std::size_t k_;
  std::priority_queue<ScoredDoc, std::vector<ScoredDoc>, RanksBefore> heap_;
};

class ByteWriter {
 public:
  template <typename T>
  void put(T value) {
    char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    buf_.append(raw, sizeof(T));
  }
  void put_bytes(std::string_view bytes) { buf_.append(bytes); }

  /// Appends the CRC32 of everything written so far and writes the file.
  void finish(const std::filesystem::path& path) {
    put<std::uint32_t>(crc32(buf_));
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write index file '" + path.string() + "'");
    out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    if (!out) throw Error("failed writing index file '" + path.string() + "'");
  }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  template <typename T>
  T get(const char* what) {
    if (remaining() < sizeof(T)) throw IndexFormatError(std::string("truncated index file at ") + what);
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string_view get_bytes(std::size_t n, const char* what) {
    if (remaining() < n) throw IndexFormatError(std::string("truncated index file at ") + what);
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::string_view rest() {
    auto out = data_.substr(pos_);
    pos_ = data_.size();
    return out;
  }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

/// Reads an index file, checks the trailing CRC32 and magic, and returns the
/// payload between the magic and the checksum.
inline std::string read_checked(const std::filesystem::path& path, std::string_view magic,
                                std::size_t min_payload) {
  std::string bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const ParseError& e) {
    throw IndexFormatError(e.what());
  }
  if (bytes.size() < magic.size() + min_payload + sizeof(std::uint32_t)) {
    throw IndexFormatError("truncated index file '" + path.string() + "'");
  }
  const std::size_t body = bytes.size() - sizeof(std::uint32_t);
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + body, sizeof stored);
  if (crc32(std::string_view(bytes.data(), body)) != stored) {
    throw IndexFormatError("checksum mismatch in index file '" + path.string() +
                           "' (corrupted or truncated)");
  }
  if (std::string_view(bytes.data(), magic.size()) != magic) {
    throw IndexFormatError("'" + path.string() + "' is not a " + std::string(magic) + " index");
  }
  return bytes.substr(magic.size(), body - magic.size());
}

}  // namespace serval::detail
