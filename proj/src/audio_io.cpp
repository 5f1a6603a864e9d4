#include "tfwm/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>

#include "tfwm/errors.hpp"

namespace tfwm {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_le32(unsigned char* p, std::uint32_t v) {
  p[0] = static_cast<unsigned char>(v & 0xFF);
  p[1] = static_cast<unsigned char>((v >> 8) & 0xFF);
  p[2] = static_cast<unsigned char>((v >> 16) & 0xFF);
  p[3] = static_cast<unsigned char>((v >> 24) & 0xFF);
}

void put_le16(unsigned char* p, std::uint16_t v) {
  p[0] = static_cast<unsigned char>(v & 0xFF);
  p[1] = static_cast<unsigned char>((v >> 8) & 0xFF);
}

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

WavReadResult read_wav(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) fail(ErrorClass::io, "cannot open '" + path + "' for reading");

  unsigned char hdr[12];
  if (std::fread(hdr, 1, 12, f.get()) != 12 || std::memcmp(hdr, "RIFF", 4) != 0 ||
      std::memcmp(hdr + 8, "WAVE", 4) != 0) {
    fail(ErrorClass::format, "'" + path + "' is not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::vector<unsigned char> data;
  bool have_data = false;

  unsigned char chunk_hdr[8];
  while (std::fread(chunk_hdr, 1, 8, f.get()) == 8) {
    const std::uint32_t size = le32(chunk_hdr + 4);
    if (std::memcmp(chunk_hdr, "fmt ", 4) == 0) {
      if (size < 16) fail(ErrorClass::format, "fmt chunk too small");
      std::vector<unsigned char> fmt(size);
      if (std::fread(fmt.data(), 1, size, f.get()) != size)
        fail(ErrorClass::format, "truncated fmt chunk");
      format = le16(fmt.data());
      channels = le16(fmt.data() + 2);
      rate = le32(fmt.data() + 4);
      bits = le16(fmt.data() + 14);
      if (format == kFormatExtensible) {
        // sub-format GUID starts at offset 24 of the extension; first two
        // bytes carry the wave format tag
        if (size >= 40)
          format = le16(fmt.data() + 24);
        else
          fail(ErrorClass::format, "extensible fmt chunk too small");
      }
      have_fmt = true;
    } else if (std::memcmp(chunk_hdr, "data", 4) == 0) {
      data.resize(size);
      if (size > 0 && std::fread(data.data(), 1, size, f.get()) != size)
        fail(ErrorClass::format, "truncated data chunk");
      have_data = true;
    } else {
      // skip unknown chunk (word aligned)
      if (std::fseek(f.get(), static_cast<long>(size + (size & 1)), SEEK_CUR) != 0)
        fail(ErrorClass::format, "truncated chunk in '" + path + "'");
      continue;
    }
    if (size & 1) std::fseek(f.get(), 1, SEEK_CUR);  // pad byte
  }

  if (!have_fmt || !have_data)
    fail(ErrorClass::format, "'" + path + "' is missing fmt or data chunk");
  if (format == kFormatFloat)
    fail(ErrorClass::unsupported_encoding, "float WAV encoding is not supported");
  if (format != kFormatPcm)
    fail(ErrorClass::unsupported_encoding,
         "unsupported WAV format tag " + std::to_string(format));
  if (bits != 8 && bits != 16 && bits != 24)
    fail(ErrorClass::unsupported_encoding,
         std::to_string(bits) + "-bit PCM is not supported (8/16/24 only)");
  if (channels != 1 && channels != 2)
    fail(ErrorClass::unsupported_encoding,
         std::to_string(channels) + "-channel audio is not supported");
  if (rate == 0) fail(ErrorClass::format, "sample rate is zero");
  if (data.empty()) fail(ErrorClass::format, "data chunk is empty");

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t block = bytes_per_sample * channels;
  const std::size_t n = data.size() / block;
  if (n == 0) fail(ErrorClass::format, "data chunk holds no complete sample");

  WavReadResult result;
  result.clip.sample_rate_hz = static_cast<int>(rate);
  result.clip.source_bit_depth = bits;
  result.clip.samples.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* p = data.data() + i * block;  // channel 0
    double v = 0.0;
    if (bits == 8) {
      v = (static_cast<int>(p[0]) - 128) / 128.0;
    } else if (bits == 16) {
      const std::int16_t s = static_cast<std::int16_t>(p[0] | (p[1] << 8));
      v = s / 32768.0;
    } else {
      std::int32_t s = p[0] | (p[1] << 8) | (p[2] << 16);
      if (s & 0x800000) s |= ~0xFFFFFF;  // sign extend
      v = s / 8388608.0;
    }
    result.clip.samples[i] = v;
  }

  if (channels == 2)
    result.warnings.push_back("stereo input: kept channel 0, dropped channel 1");
  return result;
}

WavWriteStats write_wav(const AudioClip& clip, const std::string& path,
                        int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16 && bit_depth != 24)
    fail(ErrorClass::config, "bit depth must be 8, 16 or 24");
  for (double v : clip.samples)
    if (!std::isfinite(v)) fail(ErrorClass::domain, "non-finite sample");
  if (clip.sample_rate_hz <= 0) fail(ErrorClass::config, "sample rate must be positive");

  const std::size_t n = clip.samples.size();
  const std::size_t bytes_per_sample = static_cast<std::size_t>(bit_depth) / 8;
  const std::size_t data_bytes = n * bytes_per_sample;

  std::vector<unsigned char> out(44 + data_bytes);
  unsigned char* p = out.data();
  std::memcpy(p, "RIFF", 4);
  put_le32(p + 4, static_cast<std::uint32_t>(36 + data_bytes));
  std::memcpy(p + 8, "WAVE", 4);
  std::memcpy(p + 12, "fmt ", 4);
  put_le32(p + 16, 16);
  put_le16(p + 20, kFormatPcm);
  put_le16(p + 22, 1);  // mono
  put_le32(p + 24, static_cast<std::uint32_t>(clip.sample_rate_hz));
  put_le32(p + 28, static_cast<std::uint32_t>(clip.sample_rate_hz * bytes_per_sample));
  put_le16(p + 32, static_cast<std::uint16_t>(bytes_per_sample));
  put_le16(p + 34, static_cast<std::uint16_t>(bit_depth));
  std::memcpy(p + 36, "data", 4);
  put_le32(p + 40, static_cast<std::uint32_t>(data_bytes));

  WavWriteStats stats;
  const double scale = static_cast<double>(1u << (bit_depth - 1));
  unsigned char* d = p + 44;
  for (std::size_t i = 0; i < n; ++i) {
    double v = clip.samples[i];
    if (v < -1.0 || v > 1.0) {
      ++stats.clipped_samples;
      v = std::clamp(v, -1.0, 1.0);
    }
    long q = std::lround(v * scale);
    const long lo = -static_cast<long>(scale);
    const long hi = static_cast<long>(scale) - 1;
    q = std::clamp(q, lo, hi);
    if (bit_depth == 8) {
      d[i] = static_cast<unsigned char>(q + 128);
    } else if (bit_depth == 16) {
      put_le16(d + 2 * i, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    } else {
      const std::uint32_t u = static_cast<std::uint32_t>(q) & 0xFFFFFF;
      d[3 * i] = static_cast<unsigned char>(u & 0xFF);
      d[3 * i + 1] = static_cast<unsigned char>((u >> 8) & 0xFF);
      d[3 * i + 2] = static_cast<unsigned char>((u >> 16) & 0xFF);
    }
  }

  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) fail(ErrorClass::io, "cannot open '" + path + "' for writing");
  if (std::fwrite(out.data(), 1, out.size(), f.get()) != out.size())
    fail(ErrorClass::io, "short write to '" + path + "'");
  return stats;
}

FrameSet frame(const AudioClip& clip, int m0) {
  if (m0 <= 0) fail(ErrorClass::config, "frame length must be positive");
  if (clip.samples.empty()) fail(ErrorClass::config, "cannot frame an empty clip");

  const std::size_t n = clip.samples.size();
  const std::size_t count = (n + static_cast<std::size_t>(m0) - 1) / m0;

  FrameSet fs;
  fs.frame_length = m0;
  fs.tail_padding = static_cast<int>(count * m0 - n);
  fs.frames.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    fs.frames[i].assign(static_cast<std::size_t>(m0), 0.0);
    const std::size_t begin = i * m0;
    const std::size_t len = std::min<std::size_t>(m0, n - begin);
    std::copy_n(clip.samples.begin() + static_cast<std::ptrdiff_t>(begin), len,
                fs.frames[i].begin());
  }
  return fs;
}

std::vector<double> deframe(const FrameSet& frames, std::size_t n) {
  const std::size_t total = frames.frame_count() * static_cast<std::size_t>(frames.frame_length);
  if (n > total)
    fail(ErrorClass::length, "requested " + std::to_string(n) + " samples from " +
                                 std::to_string(total) + " framed samples");
  std::vector<double> out;
  out.reserve(n);
  for (const auto& fr : frames.frames) {
    const std::size_t take = std::min(fr.size(), n - out.size());
    out.insert(out.end(), fr.begin(), fr.begin() + static_cast<std::ptrdiff_t>(take));
    if (out.size() == n) break;
  }
  return out;
}

const char* error_class_name(ErrorClass cls) noexcept {
  switch (cls) {
    case ErrorClass::usage: return "usage";
    case ErrorClass::format: return "format";
    case ErrorClass::unsupported_encoding: return "unsupported-encoding";
    case ErrorClass::io: return "io";
    case ErrorClass::config: return "config";
    case ErrorClass::band: return "band";
    case ErrorClass::capacity: return "capacity";
    case ErrorClass::shape: return "shape";
    case ErrorClass::length: return "length";
    case ErrorClass::index: return "index";
    case ErrorClass::domain: return "domain";
    case ErrorClass::external_tool: return "external-tool";
    case ErrorClass::alignment: return "alignment";
    case ErrorClass::tuning_failure: return "tuning-failure";
  }
  return "unknown";
}

}  // namespace tfwm
