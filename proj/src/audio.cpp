#include "deidforge/audio.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace deidforge::audio {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

struct WavHeader {
  int sample_rate = 0;
  std::int64_t data_offset = 0;
  std::int64_t data_bytes = 0;
};

WavHeader parse_wav_header(std::ifstream& f, const std::string& path) {
  auto fail = [&](const std::string& what) -> WavHeader {
    throw UnsupportedFormat(path + ": " + what);
  };
  char tag[4];
  std::uint32_t u32;
  auto read_u32 = [&]() {
    unsigned char b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  };
  auto read_u16 = [&]() {
    unsigned char b[2];
    f.read(reinterpret_cast<char*>(b), 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  };

  f.read(tag, 4);
  if (!f || std::memcmp(tag, "RIFF", 4) != 0) return fail("not a RIFF file");
  read_u32();  // riff size
  f.read(tag, 4);
  if (!f || std::memcmp(tag, "WAVE", 4) != 0) return fail("not a WAVE file");

  WavHeader h;
  bool have_fmt = false;
  while (f.read(tag, 4)) {
    u32 = read_u32();
    if (!f) break;
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      std::uint16_t format = read_u16();
      std::uint16_t channels = read_u16();
      std::uint32_t rate = read_u32();
      read_u32();  // byte rate
      read_u16();  // block align
      std::uint16_t bits = read_u16();
      if (format != 1) return fail("not PCM (format " + std::to_string(format) + ")");
      if (channels != 1)
        return fail("expected mono, got " + std::to_string(channels) + " channels");
      if (bits != 16) return fail("expected 16-bit samples, got " + std::to_string(bits));
      h.sample_rate = static_cast<int>(rate);
      have_fmt = true;
      if (u32 > 16) f.seekg(u32 - 16, std::ios::cur);
    } else if (std::memcmp(tag, "data", 4) == 0) {
      h.data_offset = f.tellg();
      h.data_bytes = u32;
      break;
    } else {
      f.seekg(u32 + (u32 & 1), std::ios::cur);
    }
  }
  if (!have_fmt || h.data_offset == 0) return fail("missing fmt or data chunk");
  if (h.sample_rate <= 0) return fail("bad sample rate");
  return h;
}

std::int64_t frame_count(std::size_t samples, std::int64_t frame_len) {
  return static_cast<std::int64_t>((samples + frame_len - 1) / frame_len);
}

double frame_rms(const AudioBuffer& b, std::int64_t frame, std::int64_t frame_len) {
  std::size_t begin = static_cast<std::size_t>(frame * frame_len);
  std::size_t end = std::min(b.samples.size(), begin + static_cast<std::size_t>(frame_len));
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i)
    acc += static_cast<double>(b.samples[i]) * b.samples[i];
  std::size_t n = end - begin;
  return n ? std::sqrt(acc / static_cast<double>(n)) : 0.0;
}

}  // namespace

AudioBuffer read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  WavHeader h = parse_wav_header(f, path);

  std::int64_t n = h.data_bytes / 2;
  AudioBuffer out;
  out.sample_rate = h.sample_rate;
  out.samples.resize(static_cast<std::size_t>(n));
  std::vector<char> raw(static_cast<std::size_t>(h.data_bytes));
  f.read(raw.data(), h.data_bytes);
  if (!f) throw IoError("truncated data chunk in " + path);
  for (std::int64_t i = 0; i < n; ++i) {
    std::int16_t s = static_cast<std::int16_t>(
        static_cast<unsigned char>(raw[static_cast<std::size_t>(2 * i)]) |
        (static_cast<unsigned char>(raw[static_cast<std::size_t>(2 * i + 1)]) << 8));
    out.samples[static_cast<std::size_t>(i)] = static_cast<float>(s) / 32768.0f;
  }
  return out;
}

std::pair<std::int64_t, int> wav_info(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  WavHeader h = parse_wav_header(f, path);
  return {h.data_bytes / 2, h.sample_rate};
}

void write_wav(const AudioBuffer& buffer, const std::string& path) {
  if (buffer.sample_rate <= 0) throw UnsupportedFormat("sample_rate must be positive");
  std::string out;
  std::uint32_t data_bytes = static_cast<std::uint32_t>(buffer.samples.size() * 2);
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(buffer.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(buffer.sample_rate * 2));
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_bytes);
  for (float s : buffer.samples) {
    long q = std::lround(static_cast<double>(s) * 32768.0);
    if (q > 32767) q = 32767;
    if (q < -32768) q = -32768;
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("short write to " + path);
}

AudioBuffer slice(const AudioBuffer& buffer, TimeInterval interval) {
  if (!interval.valid())
    throw OutOfRange("invalid interval [" + std::to_string(interval.start_ms) + "," +
                     std::to_string(interval.end_ms) + ")");
  std::int64_t begin = sample_index(interval.start_ms, buffer.sample_rate);
  std::int64_t end = sample_index(interval.end_ms, buffer.sample_rate);
  if (end > static_cast<std::int64_t>(buffer.samples.size()))
    throw OutOfRange("interval ends at sample " + std::to_string(end) + " but buffer has " +
                     std::to_string(buffer.samples.size()));
  AudioBuffer out;
  out.sample_rate = buffer.sample_rate;
  out.samples.assign(buffer.samples.begin() + begin, buffer.samples.begin() + end);
  return out;
}

AudioBuffer concat(const std::vector<AudioBuffer>& buffers, int crossfade_ms) {
  AudioBuffer out;
  for (const auto& b : buffers) {
    if (out.sample_rate == 0) out.sample_rate = b.sample_rate;
    if (b.sample_rate != out.sample_rate)
      throw RateMismatch("cannot concat " + std::to_string(b.sample_rate) + " Hz into " +
                         std::to_string(out.sample_rate) + " Hz");
    std::size_t overlap = 0;
    if (crossfade_ms > 0 && !out.samples.empty() && !b.samples.empty()) {
      overlap = static_cast<std::size_t>(sample_index(crossfade_ms, out.sample_rate));
      overlap = std::min({overlap, out.samples.size(), b.samples.size()});
    }
    if (overlap > 0) {
      std::size_t base = out.samples.size() - overlap;
      for (std::size_t i = 0; i < overlap; ++i) {
        float t = static_cast<float>(i + 1) / static_cast<float>(overlap + 1);
        out.samples[base + i] = out.samples[base + i] * (1.0f - t) + b.samples[i] * t;
      }
      out.samples.insert(out.samples.end(), b.samples.begin() + static_cast<std::ptrdiff_t>(overlap),
                         b.samples.end());
    } else {
      out.samples.insert(out.samples.end(), b.samples.begin(), b.samples.end());
    }
  }
  return out;
}

AudioBuffer silence_fill(const AudioBuffer& buffer, TimeInterval interval) {
  if (!interval.valid()) throw OutOfRange("invalid interval");
  std::int64_t begin = sample_index(interval.start_ms, buffer.sample_rate);
  std::int64_t end = sample_index(interval.end_ms, buffer.sample_rate);
  if (end > static_cast<std::int64_t>(buffer.samples.size()))
    throw OutOfRange("silence interval exceeds buffer");
  AudioBuffer out = buffer;
  for (std::int64_t i = begin; i < end; ++i) out.samples[static_cast<std::size_t>(i)] = 0.0f;
  return out;
}

double rms(const AudioBuffer& buffer, bool active_only, double threshold_dbfs, int frame_ms) {
  if (buffer.samples.empty()) throw EmptyBuffer("rms of empty buffer");
  if (!active_only) {
    double acc = 0.0;
    for (float s : buffer.samples) acc += static_cast<double>(s) * s;
    return std::sqrt(acc / static_cast<double>(buffer.samples.size()));
  }
  std::int64_t frame_len = sample_index(frame_ms, buffer.sample_rate);
  if (frame_len <= 0) frame_len = 1;
  double threshold = dbfs_to_amplitude(threshold_dbfs);
  double acc = 0.0;
  std::int64_t active_samples = 0;
  std::int64_t frames = frame_count(buffer.samples.size(), frame_len);
  for (std::int64_t fr = 0; fr < frames; ++fr) {
    if (frame_rms(buffer, fr, frame_len) <= threshold) continue;
    std::size_t begin = static_cast<std::size_t>(fr * frame_len);
    std::size_t end = std::min(buffer.samples.size(), begin + static_cast<std::size_t>(frame_len));
    for (std::size_t i = begin; i < end; ++i)
      acc += static_cast<double>(buffer.samples[i]) * buffer.samples[i];
    active_samples += static_cast<std::int64_t>(end - begin);
  }
  if (active_samples == 0) return 0.0;
  return std::sqrt(acc / static_cast<double>(active_samples));
}

GainResult match_rms(const AudioBuffer& snippet, double reference_level, double threshold_dbfs,
                     int frame_ms) {
  double level = rms(snippet, /*active_only=*/true, threshold_dbfs, frame_ms);
  if (level <= 0.0) throw SilentSnippet("snippet has no speech-active frames");
  double gain = reference_level / level;
  GainResult result;
  result.audio.sample_rate = snippet.sample_rate;
  result.audio.samples.reserve(snippet.samples.size());
  std::size_t clipped = 0;
  for (float s : snippet.samples) {
    double v = static_cast<double>(s) * gain;
    if (v > 1.0) {
      v = 1.0;
      ++clipped;
    } else if (v < -1.0) {
      v = -1.0;
      ++clipped;
    }
    result.audio.samples.push_back(static_cast<float>(v));
  }
  result.clipped_fraction =
      snippet.samples.empty() ? 0.0
                              : static_cast<double>(clipped) / static_cast<double>(snippet.samples.size());
  return result;
}

AudioBuffer trim_silence(const AudioBuffer& snippet, double threshold_dbfs, int frame_ms) {
  AudioBuffer out;
  out.sample_rate = snippet.sample_rate;
  if (snippet.samples.empty()) return out;
  std::int64_t frame_len = sample_index(frame_ms, snippet.sample_rate);
  if (frame_len <= 0) frame_len = 1;
  double threshold = dbfs_to_amplitude(threshold_dbfs);
  std::int64_t frames = frame_count(snippet.samples.size(), frame_len);
  std::int64_t first = 0;
  while (first < frames && frame_rms(snippet, first, frame_len) < threshold) ++first;
  if (first == frames) return out;  // all silent
  std::int64_t last = frames - 1;
  while (last > first && frame_rms(snippet, last, frame_len) < threshold) --last;
  std::size_t begin = static_cast<std::size_t>(first * frame_len);
  std::size_t end = std::min(snippet.samples.size(), static_cast<std::size_t>((last + 1) * frame_len));
  out.samples.assign(snippet.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                     snippet.samples.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

}  // namespace deidforge::audio
