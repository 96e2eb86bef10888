#pragma once

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "wdkit/errors.hpp"

namespace wdkit::archive {

struct Entry {
  std::string name;
  std::vector<std::uint8_t> data;
};

namespace detail {

inline std::uint16_t rd16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t rd32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::vector<std::uint8_t> inflate_raw(const std::uint8_t* src, size_t src_len,
                                             size_t expected_len, int window_bits) {
  std::vector<std::uint8_t> out;
  out.resize(expected_len > 0 ? expected_len : 64 * 1024);
  z_stream zs{};
  if (inflateInit2(&zs, window_bits) != Z_OK) throw ArchiveError("zlib init failed");
  zs.next_in = const_cast<Bytef*>(src);
  zs.avail_in = static_cast<uInt>(src_len);
  size_t produced = 0;
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    if (produced == out.size()) out.resize(out.size() * 2);
    zs.next_out = out.data() + produced;
    zs.avail_out = static_cast<uInt>(out.size() - produced);
    rc = inflate(&zs, Z_NO_FLUSH);
    produced = out.size() - zs.avail_out;
    if (rc == Z_STREAM_END) break;
    if (rc != Z_OK) {
      inflateEnd(&zs);
      throw ArchiveError("corrupt deflate stream");
    }
    if (zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      throw ArchiveError("truncated deflate stream");
    }
  }
  inflateEnd(&zs);
  out.resize(produced);
  return out;
}

}  // namespace detail

// Minimal ZIP reader: walks the central directory, supports stored and
// deflated entries, verifies CRC-32. Enough for driver release archives.
inline std::vector<Entry> extract_zip(const std::vector<std::uint8_t>& bytes) {
  using detail::rd16;
  using detail::rd32;
  if (bytes.size() < 22) throw ArchiveError("zip: too short");

  // End-of-central-directory record: scan backwards (comment may follow).
  size_t eocd = std::string::npos;
  size_t scan_start = bytes.size() >= 22 + 65535 ? bytes.size() - 22 - 65535 : 0;
  for (size_t i = bytes.size() - 22 + 1; i-- > scan_start;) {
    if (bytes[i] == 0x50 && bytes[i + 1] == 0x4B && bytes[i + 2] == 0x05 && bytes[i + 3] == 0x06) {
      eocd = i;
      break;
    }
  }
  if (eocd == std::string::npos) throw ArchiveError("zip: end-of-central-directory not found");

  std::uint16_t entry_count = rd16(&bytes[eocd + 10]);
  std::uint32_t cd_offset = rd32(&bytes[eocd + 16]);
  if (cd_offset >= bytes.size()) throw ArchiveError("zip: bad central directory offset");

  std::vector<Entry> entries;
  size_t pos = cd_offset;
  for (std::uint16_t n = 0; n < entry_count; ++n) {
    if (pos + 46 > bytes.size() || rd32(&bytes[pos]) != 0x02014B50) {
      throw ArchiveError("zip: bad central directory entry");
    }
    std::uint16_t method = rd16(&bytes[pos + 10]);
    std::uint32_t crc = rd32(&bytes[pos + 16]);
    std::uint32_t comp_size = rd32(&bytes[pos + 20]);
    std::uint32_t uncomp_size = rd32(&bytes[pos + 24]);
    std::uint16_t name_len = rd16(&bytes[pos + 28]);
    std::uint16_t extra_len = rd16(&bytes[pos + 30]);
    std::uint16_t comment_len = rd16(&bytes[pos + 32]);
    std::uint32_t local_offset = rd32(&bytes[pos + 42]);
    if (pos + 46 + name_len > bytes.size()) throw ArchiveError("zip: truncated entry name");
    std::string name(reinterpret_cast<const char*>(&bytes[pos + 46]), name_len);
    pos += 46 + name_len + extra_len + comment_len;

    if (!name.empty() && name.back() == '/') continue;  // directory

    if (local_offset + 30 > bytes.size() || rd32(&bytes[local_offset]) != 0x04034B50) {
      throw ArchiveError("zip: bad local header for '" + name + "'");
    }
    std::uint16_t lf_name_len = rd16(&bytes[local_offset + 26]);
    std::uint16_t lf_extra_len = rd16(&bytes[local_offset + 28]);
    size_t data_start = local_offset + 30 + lf_name_len + lf_extra_len;
    if (data_start + comp_size > bytes.size()) {
      throw ArchiveError("zip: truncated data for '" + name + "'");
    }

    std::vector<std::uint8_t> data;
    if (method == 0) {
      if (comp_size != uncomp_size) throw ArchiveError("zip: stored size mismatch");
      data.assign(bytes.begin() + static_cast<long>(data_start),
                  bytes.begin() + static_cast<long>(data_start + comp_size));
    } else if (method == 8) {
      data = detail::inflate_raw(&bytes[data_start], comp_size, uncomp_size, -MAX_WBITS);
      if (data.size() != uncomp_size) throw ArchiveError("zip: inflated size mismatch");
    } else {
      throw ArchiveError("zip: unsupported compression method " + std::to_string(method));
    }
    std::uint32_t actual_crc =
        static_cast<std::uint32_t>(crc32(0L, data.data(), static_cast<uInt>(data.size())));
    if (actual_crc != crc) throw ArchiveError("zip: crc mismatch for '" + name + "'");
    entries.push_back({std::move(name), std::move(data)});
  }
  return entries;
}

inline std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 18 || bytes[0] != 0x1F || bytes[1] != 0x8B) {
    throw ArchiveError("gzip: bad magic");
  }
  return detail::inflate_raw(bytes.data(), bytes.size(), 0, 15 + 16);
}

// Plain ustar reader (regular files only).
inline std::vector<Entry> extract_tar(const std::vector<std::uint8_t>& bytes) {
  std::vector<Entry> entries;
  size_t pos = 0;
  while (pos + 512 <= bytes.size()) {
    const std::uint8_t* hdr = &bytes[pos];
    bool all_zero = true;
    for (int i = 0; i < 512; ++i) {
      if (hdr[i] != 0) {
        all_zero = false;
        break;
      }
    }
    if (all_zero) break;  // end marker

    char name_buf[101] = {0};
    std::memcpy(name_buf, hdr, 100);
    std::string name(name_buf);
    char size_buf[13] = {0};
    std::memcpy(size_buf, hdr + 124, 12);
    size_t size = 0;
    for (const char* p = size_buf; *p != '\0'; ++p) {
      if (*p == ' ') continue;
      if (*p < '0' || *p > '7') throw ArchiveError("tar: bad size field");
      size = size * 8 + static_cast<size_t>(*p - '0');
    }
    char type = static_cast<char>(hdr[156]);
    pos += 512;
    if (pos + size > bytes.size()) throw ArchiveError("tar: truncated file data");
    if (type == '0' || type == '\0') {
      entries.push_back({name, std::vector<std::uint8_t>(
                                   bytes.begin() + static_cast<long>(pos),
                                   bytes.begin() + static_cast<long>(pos + size))});
    }
    pos += (size + 511) / 512 * 512;
  }
  return entries;
}

inline std::vector<Entry> extract_tar_gz(const std::vector<std::uint8_t>& bytes) {
  return extract_tar(gunzip(bytes));
}

enum class Format { zip, tar_gz, tar, raw };

inline Format format_for_name(const std::string& name) {
  auto ends_with = [&](const char* suffix) {
    size_t n = std::strlen(suffix);
    return name.size() >= n && name.compare(name.size() - n, n, suffix) == 0;
  };
  if (ends_with(".zip")) return Format::zip;
  if (ends_with(".tar.gz") || ends_with(".tgz")) return Format::tar_gz;
  if (ends_with(".tar")) return Format::tar;
  return Format::raw;
}

}  // namespace wdkit::archive
