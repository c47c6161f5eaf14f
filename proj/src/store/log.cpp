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

#include "heartvault/store/log.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>
#include <zlib.h>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <tuple>

#include "heartvault/common/error.hpp"

namespace hv::store {

namespace fs = std::filesystem;

namespace {

std::uint32_t crc_of(ByteView b) {
  return static_cast<std::uint32_t>(::crc32(0L, b.data(), static_cast<uInt>(b.size())));
}

[[noreturn]] void io_fail(const std::string& what) {
  const int e = errno;
  if (e == ENOSPC || e == EDQUOT) throw Error(ErrorCode::StorageFull, what + ": " + std::strerror(e));
  throw Error(ErrorCode::IoFailure, what + ": " + std::strerror(e));
}

void pread_all(int fd, std::uint8_t* buf, std::size_t n, std::uint64_t off) {
  std::size_t got = 0;
  while (got < n) {
    const ssize_t r = ::pread(fd, buf + got, n - got, static_cast<off_t>(off + got));
    if (r < 0) {
      if (errno == EINTR) continue;
      io_fail("read");
    }
    if (r == 0) throw Error(ErrorCode::CorruptRecord, "frame runs past the end of its segment");
    got += static_cast<std::size_t>(r);
  }
}

void write_all(int fd, const std::uint8_t* buf, std::size_t n) {
  std::size_t put = 0;
  while (put < n) {
    const ssize_t r = ::write(fd, buf + put, n - put);
    if (r < 0) {
      if (errno == EINTR) continue;
      io_fail("write");
    }
    put += static_cast<std::size_t>(r);
  }
}

bool key_less(const IndexEntry& a, const IndexEntry& b) {
  return std::tie(a.timestamp_ms, a.seq, a.at.segment, a.at.offset) <
         std::tie(b.timestamp_ms, b.seq, b.at.segment, b.at.offset);
}

// Reads and checks one frame; returns the record bytes.
Bytes read_frame(int fd, std::uint64_t off) {
  std::uint8_t lenb[4];
  pread_all(fd, lenb, 4, off);
  const std::uint32_t len = Reader(ByteView(lenb, 4)).u32();
  Bytes buf(4 + static_cast<std::size_t>(len) + 4);
  pread_all(fd, buf.data(), buf.size(), off);
  const std::uint32_t stored = Reader(ByteView(buf).subspan(4 + len, 4)).u32();
  if (crc_of(ByteView(buf).first(4 + len)) != stored) throw Error(ErrorCode::CorruptRecord, "frame CRC mismatch");
  return Bytes(buf.begin() + 4, buf.begin() + 4 + len);
}

}  // namespace

Bytes frame(ByteView record_bytes) {
  Bytes out;
  out.reserve(record_bytes.size() + kFrameOverhead);
  put_u32(out, static_cast<std::uint32_t>(record_bytes.size()));
  put_bytes(out, record_bytes);
  put_u32(out, crc_of(out));
  return out;
}

fs::path RecordLog::segment_path(const fs::path& dir, std::uint32_t segment) {
  char name[32];
  std::snprintf(name, sizeof name, "segment-%06u.log", segment);
  return dir / name;
}

RecordLog::RecordLog(fs::path dir, LogOptions options) : dir_(std::move(dir)), options_(options) {}

RecordLog::~RecordLog() {
  if (write_fd_ >= 0) {
    ::fdatasync(write_fd_);
    ::close(write_fd_);
  }
  for (auto& [seg, fd] : read_fds_) ::close(fd);
  if (lock_fd_ >= 0) ::close(lock_fd_);
}

std::unique_ptr<RecordLog> RecordLog::open(const fs::path& dir, LogOptions options) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
  std::unique_ptr<RecordLog> log(new RecordLog(dir, options));

  log->lock_fd_ = ::open((dir / "LOCK").c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (log->lock_fd_ < 0) io_fail("open lock file");
  if (::flock(log->lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    throw Error(ErrorCode::IoFailure, "log " + dir.string() + " is held by another writer");
  }

  std::vector<std::uint32_t> segments;
  for (const auto& e : fs::directory_iterator(dir)) {
    unsigned n = 0;
    const auto name = e.path().filename().string();
    char tail = 0;
    if (std::sscanf(name.c_str(), "segment-%6u.lo%c", &n, &tail) == 2 && tail == 'g' &&
        segment_path(dir, n).filename() == name) {
      segments.push_back(n);
    }
  }
  std::sort(segments.begin(), segments.end());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i] != i) throw Error(ErrorCode::CorruptRecord, "segment files are not contiguous");
    log->scan_segment(segments[i], i + 1 == segments.size());
  }
  log->open_writer(segments.empty() ? 0 : segments.back());
  return log;
}

void RecordLog::scan_segment(std::uint32_t segment, bool last) {
  const fs::path path = segment_path(dir_, segment);
  const int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd < 0) io_fail("open " + path.string());
  struct stat st{};
  if (::fstat(fd, &st) != 0) {
    ::close(fd);
    io_fail("stat " + path.string());
  }
  const auto size = static_cast<std::uint64_t>(st.st_size);
  Bytes data(size);
  try {
    if (size > 0) pread_all(fd, data.data(), data.size(), 0);
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);

  std::uint64_t off = 0;
  std::string problem;
  while (off < size) {
    if (size - off < 4) {
      problem = "torn length prefix";
      break;
    }
    const std::uint32_t len = Reader(ByteView(data).subspan(off, 4)).u32();
    if (len == 0 || size - off - 4 < static_cast<std::uint64_t>(len) + 4) {
      problem = len == 0 ? "zero-length frame" : "torn frame";
      break;
    }
    const ByteView framed = ByteView(data).subspan(off, 4 + len);
    if (crc_of(framed) != Reader(ByteView(data).subspan(off + 4 + len, 4)).u32()) {
      problem = "CRC mismatch";
      break;
    }
    secure::CipherRecord rec;
    try {
      rec = secure::parse_record(framed.subspan(4));
    } catch (const Error&) {
      problem = "unparseable record";
      break;
    }
    insert_index(rec.header, Location{segment, off});
    ++count_;
    off += 4 + len + 4;
  }
  if (!problem.empty()) {
    if (!last) {
      throw Error(ErrorCode::CorruptRecord,
                  path.string() + ": " + problem + " at offset " + std::to_string(off) + " in a sealed segment");
    }
    if (::truncate(path.c_str(), static_cast<off_t>(off)) != 0) io_fail("truncate " + path.string());
    recovery_ = Recovery{segment, off, size - off, problem};
  }
  total_bytes_ += off;
}

void RecordLog::insert_index(const secure::RecordHeader& h, Location at) {
  auto& v = index_[h.patient_id];
  const IndexEntry e{h.timestamp_ms, h.seq, at};
  v.insert(std::upper_bound(v.begin(), v.end(), e, key_less), e);
}

void RecordLog::open_writer(std::uint32_t segment) {
  if (write_fd_ >= 0) {
    if (options_.sync_on_flush && ::fdatasync(write_fd_) != 0) io_fail("sync");
    ::close(write_fd_);
  }
  const fs::path path = segment_path(dir_, segment);
  write_fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (write_fd_ < 0) io_fail("open " + path.string());
  struct stat st{};
  if (::fstat(write_fd_, &st) != 0) io_fail("stat " + path.string());
  write_segment_ = segment;
  write_offset_ = static_cast<std::uint64_t>(st.st_size);
}

Location RecordLog::append(const secure::CipherRecord& record) {
  const Bytes body = secure::serialize(record);
  if (body.empty()) throw Error(ErrorCode::BadRequest, "empty record");
  const Bytes framed = frame(body);

  std::lock_guard lk(write_mu_);
  if (options_.capacity_bytes > 0 && total_bytes_ + framed.size() > options_.capacity_bytes) {
    throw Error(ErrorCode::StorageFull, "log capacity of " + std::to_string(options_.capacity_bytes) + " bytes reached");
  }
  if (write_offset_ > 0 && write_offset_ + framed.size() > options_.segment_bytes) open_writer(write_segment_ + 1);

  const Location at{write_segment_, write_offset_};
  try {
    write_all(write_fd_, framed.data(), framed.size());
  } catch (...) {
    // Leave the file ending on a frame boundary.
    if (::ftruncate(write_fd_, static_cast<off_t>(write_offset_)) != 0) { /* reopen will trim it */ }
    throw;
  }
  if (options_.verify_writes) {
    Bytes back(framed.size());
    pread_all(reader_fd(at.segment), back.data(), back.size(), at.offset);
    if (back != framed) {
      if (::ftruncate(write_fd_, static_cast<off_t>(write_offset_)) != 0) { /* reopen will trim it */ }
      throw Error(ErrorCode::CorruptRecord, "write-back verification failed");
    }
  }
  write_offset_ += framed.size();
  {
    std::unique_lock ix(index_mu_);
    insert_index(record.header, at);
    ++count_;
    total_bytes_ += framed.size();
  }
  return at;
}

void RecordLog::flush() {
  std::lock_guard lk(write_mu_);
  if (options_.sync_on_flush && write_fd_ >= 0 && ::fdatasync(write_fd_) != 0) io_fail("sync");
}

int RecordLog::reader_fd(std::uint32_t segment) const {
  std::lock_guard lk(fd_mu_);
  auto it = read_fds_.find(segment);
  if (it != read_fds_.end()) return it->second;
  const fs::path path = segment_path(dir_, segment);
  const int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd < 0) io_fail("open " + path.string());
  read_fds_[segment] = fd;
  return fd;
}

Bytes RecordLog::read_raw(const Location& at) const { return read_frame(reader_fd(at.segment), at.offset); }

std::vector<secure::CipherRecord> RecordLog::query(const std::string& patient_id, std::uint64_t t0,
                                                   std::uint64_t t1) const {
  if (t0 > t1) throw Error(ErrorCode::BadRequest, "t0 must not exceed t1");
  std::vector<Location> hits;
  {
    std::shared_lock ix(index_mu_);
    const auto it = index_.find(patient_id);
    if (it == index_.end()) return {};
    const auto& v = it->second;
    auto lo = std::lower_bound(v.begin(), v.end(), t0,
                               [](const IndexEntry& e, std::uint64_t t) { return e.timestamp_ms < t; });
    for (; lo != v.end() && lo->timestamp_ms <= t1; ++lo) hits.push_back(lo->at);
  }
  // Frames are immutable once indexed, so reading happens outside the lock.
  std::vector<secure::CipherRecord> out;
  out.reserve(hits.size());
  for (const auto& at : hits) out.push_back(secure::parse_record(read_raw(at)));
  return out;
}

std::vector<std::string> RecordLog::patients() const {
  std::shared_lock ix(index_mu_);
  std::vector<std::string> out;
  for (const auto& [p, v] : index_) out.push_back(p);
  return out;
}

std::size_t RecordLog::record_count() const {
  std::shared_lock ix(index_mu_);
  return count_;
}

std::uint64_t RecordLog::total_bytes() const {
  std::shared_lock ix(index_mu_);
  return total_bytes_;
}

Index RecordLog::index() const {
  std::shared_lock ix(index_mu_);
  return index_;
}

std::vector<fs::path> RecordLog::segment_paths() const {
  std::lock_guard lk(write_mu_);
  std::vector<fs::path> out;
  for (std::uint32_t s = 0; s <= write_segment_; ++s) out.push_back(segment_path(dir_, s));
  return out;
}

}  // namespace hv::store
