#include "nrfar/audio.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "nrfar/errors.hpp"

namespace nrfar {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

AudioSignal read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open WAV file: " + path);
  std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
  const std::size_t n = raw.size();

  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
    throw DataError("not a RIFF/WAVE file: " + path);

  int sample_rate = 0;
  int channels = 0;
  int bits = 0;
  int format = 0;
  bool have_fmt = false;
  const unsigned char* data_ptr = nullptr;
  std::size_t data_len = 0;

  std::size_t off = 12;
  while (off + 8 <= n) {
    const std::uint32_t chunk_len = read_u32(p + off + 4);
    const unsigned char* body = p + off + 8;
    if (off + 8 + chunk_len > n)
      throw DataError("truncated WAV chunk in " + path);
    if (std::memcmp(p + off, "fmt ", 4) == 0) {
      if (chunk_len < 16) throw DataError("malformed fmt chunk in " + path);
      format = read_u16(body);
      channels = read_u16(body + 2);
      sample_rate = static_cast<int>(read_u32(body + 4));
      bits = read_u16(body + 14);
      have_fmt = true;
    } else if (std::memcmp(p + off, "data", 4) == 0) {
      data_ptr = body;
      data_len = chunk_len;
    }
    off += 8 + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data_ptr == nullptr)
    throw DataError("WAV file missing fmt/data chunk: " + path);
  if (format != 1 || bits != 16)
    throw DataError("unsupported WAV encoding (need PCM 16-bit): " + path);
  if (channels != 1)
    throw DataError("unsupported channel count (need mono): " + path);
  if (sample_rate <= 0) throw DataError("invalid sample rate in " + path);

  AudioSignal sig;
  sig.sample_rate_hz = sample_rate;
  const std::size_t count = data_len / 2;
  sig.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::int16_t v =
        static_cast<std::int16_t>(read_u16(data_ptr + 2 * i));
    sig.samples[i] = static_cast<double>(v) / 32768.0;
  }
  return sig;
}

void write_wav(const std::string& path, const AudioSignal& signal) {
  if (signal.sample_rate_hz <= 0)
    throw ConfigError("write_wav: sample rate must be positive");
  const std::size_t count = signal.samples.size();
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(count * 2);

  std::string out;
  out.reserve(44 + data_bytes);
  out.append("RIFF");
  put_u32(out, 36 + data_bytes);
  out.append("WAVE");
  out.append("fmt ");
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate_hz));
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate_hz) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.append("data");
  put_u32(out, data_bytes);
  for (std::size_t i = 0; i < count; ++i) {
    double v = std::lround(signal.samples[i] * 32768.0);
    if (v > 32767.0) v = 32767.0;
    if (v < -32768.0) v = -32768.0;
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write WAV file: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("WAV write failed: " + path);
}

}  // namespace nrfar
