#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "cruse/error.hpp"

namespace cruse::dsp {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

enum class SampleFormat { pcm16, float32 };

// Mono audio normalized to [-1, 1).
struct Audio {
  int sample_rate = 16000;
  SampleFormat format = SampleFormat::pcm16;
  std::vector<double> samples;
};

namespace detail {

template <typename T>
T read_le(const std::vector<char>& bytes, std::size_t offset) {
  if (offset + sizeof(T) > bytes.size()) throw FormatError("wav: truncated header");
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

template <typename T>
void write_le(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

}  // namespace detail

// Parses RIFF/WAVE with a PCM 16-bit or IEEE float 32-bit mono data chunk.
inline Audio read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("wav: cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("wav: " + path.string() + " is not a RIFF/WAVE file");
  }

  Audio audio;
  bool have_fmt = false;
  std::uint16_t tag = 0, channels = 0, bits = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id(bytes.data() + pos, 4);
    const auto size = detail::read_le<std::uint32_t>(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      tag = detail::read_le<std::uint16_t>(bytes, body);
      channels = detail::read_le<std::uint16_t>(bytes, body + 2);
      audio.sample_rate = static_cast<int>(detail::read_le<std::uint32_t>(bytes, body + 4));
      bits = detail::read_le<std::uint16_t>(bytes, body + 14);
      if (tag == 0xFFFE && size >= 26) tag = detail::read_le<std::uint16_t>(bytes, body + 24);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError("wav: data chunk before fmt chunk");
      if (channels != 1) throw FormatError("wav: only mono files are supported");
      const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
      if (tag == 1 && bits == 16) {
        audio.format = SampleFormat::pcm16;
        audio.samples.resize(avail / 2);
        for (std::size_t i = 0; i < audio.samples.size(); ++i) {
          audio.samples[i] = detail::read_le<std::int16_t>(bytes, body + 2 * i) / 32768.0;
        }
      } else if (tag == 3 && bits == 32) {
        audio.format = SampleFormat::float32;
        audio.samples.resize(avail / 4);
        for (std::size_t i = 0; i < audio.samples.size(); ++i) {
          audio.samples[i] = detail::read_le<float>(bytes, body + 4 * i);
        }
      } else {
        throw FormatError("wav: unsupported encoding (need 16-bit PCM or 32-bit float)");
      }
      return audio;
    }
    pos = body + size + (size & 1u);
  }
  throw FormatError("wav: no data chunk in " + path.string());
}

inline void write_wav(const std::filesystem::path& path, std::span<const double> samples,
                      int sample_rate = 16000, SampleFormat format = SampleFormat::pcm16) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("wav: cannot create " + path.string());
  const std::uint16_t bits = format == SampleFormat::pcm16 ? 16 : 32;
  const std::uint16_t tag = format == SampleFormat::pcm16 ? 1 : 3;
  const std::uint32_t block = bits / 8;
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * block);

  out.write("RIFF", 4);
  detail::write_le<std::uint32_t>(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  detail::write_le<std::uint32_t>(out, 16);
  detail::write_le<std::uint16_t>(out, tag);
  detail::write_le<std::uint16_t>(out, 1);
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate));
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate) * block);
  detail::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(block));
  detail::write_le<std::uint16_t>(out, bits);
  out.write("data", 4);
  detail::write_le<std::uint32_t>(out, data_bytes);
  for (double s : samples) {
    if (format == SampleFormat::pcm16) {
      const double scaled = std::round(s * 32768.0);
      detail::write_le<std::int16_t>(out, static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0)));
    } else {
      detail::write_le<float>(out, static_cast<float>(s));
    }
  }
  if (!out) throw FormatError("wav: write failed for " + path.string());
}

}  // namespace cruse::dsp
