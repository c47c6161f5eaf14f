/*
 * Copyright 2026 The heartvault Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "heartvault/secure/channel.hpp"

namespace hv::store {

/// Frame on disk: len u32 | CipherRecord wire bytes | crc32 u32, where the
/// CRC covers the length prefix and the record bytes.
inline constexpr std::size_t kFrameOverhead = 8;

Bytes frame(ByteView record_bytes);

struct LogOptions {
  std::uint64_t segment_bytes = 64ull << 20;  // roll to a new segment past this
  std::uint64_t capacity_bytes = 0;          // 0 = unlimited
  bool verify_writes = true;                 // read each frame back after writing
  bool sync_on_flush = true;                 // fdatasync in flush()
};

struct Location {
  std::uint32_t segment = 0;
  std::uint64_t offset = 0;  // frame start within the segment file
  bool operator==(const Location&) const = default;
};

struct IndexEntry {
  std::uint64_t timestamp_ms = 0;
  std::uint64_t seq = 0;
  Location at;
  bool operator==(const IndexEntry&) const = default;
};

using Index = std::map<std::string, std::vector<IndexEntry>>;

/// What open() had to discard.
struct Recovery {
  std::uint32_t segment = 0;
  std::uint64_t kept_bytes = 0;     // segment truncated to this length
  std::uint64_t dropped_bytes = 0;
  std::string reason;
};

/// Append-only record log with a per-patient (timestamp, seq) index held in
/// memory and rebuilt from the segment files on open. One writer per
/// directory (enforced with an advisory lock); query() may run concurrently
/// with append().
class RecordLog {
 public:
  /// Creates the directory if needed. A torn frame at the end of the last
  /// segment is truncated away and described by recovery(); damage anywhere
  /// else throws CorruptRecord. Throws IoFailure when another process holds
  /// the log.
  static std::unique_ptr<RecordLog> open(const std::filesystem::path& dir, LogOptions options = {});
  ~RecordLog();
  RecordLog(const RecordLog&) = delete;
  RecordLog& operator=(const RecordLog&) = delete;

  /// Throws StorageFull past capacity_bytes (or on ENOSPC), CorruptRecord
  /// when write-back verification fails, IoFailure otherwise.
  Location append(const secure::CipherRecord& record);
  /// Durable once this returns.
  void flush();

  /// Records with t0 <= timestamp <= t1, ascending by (timestamp, seq).
  /// Unknown patients give an empty list; t0 > t1 throws BadRequest.
  std::vector<secure::CipherRecord> query(const std::string& patient_id, std::uint64_t t0, std::uint64_t t1) const;
  /// Raw stored bytes of the record at `at`, after CRC check.
  Bytes read_raw(const Location& at) const;

  std::vector<std::string> patients() const;
  std::size_t record_count() const;
  std::uint64_t total_bytes() const;
  Index index() const;
  const std::optional<Recovery>& recovery() const { return recovery_; }
  const std::filesystem::path& directory() const { return dir_; }
  std::vector<std::filesystem::path> segment_paths() const;

  static std::filesystem::path segment_path(const std::filesystem::path& dir, std::uint32_t segment);

 private:
  RecordLog(std::filesystem::path dir, LogOptions options);
  void scan_segment(std::uint32_t segment, bool last);
  void insert_index(const secure::RecordHeader& h, Location at);
  void open_writer(std::uint32_t segment);
  int reader_fd(std::uint32_t segment) const;

  std::filesystem::path dir_;
  LogOptions options_;
  int lock_fd_ = -1;
  int write_fd_ = -1;
  std::uint32_t write_segment_ = 0;
  std::uint64_t write_offset_ = 0;
  std::uint64_t total_bytes_ = 0;
  std::size_t count_ = 0;
  std::optional<Recovery> recovery_;

  mutable std::mutex write_mu_;
  mutable std::shared_mutex index_mu_;
  Index index_;
  mutable std::mutex fd_mu_;
  mutable std::map<std::uint32_t, int> read_fds_;
};

}  // namespace hv::store
