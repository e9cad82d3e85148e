#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace deidforge::audio {

struct AudioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnsupportedFormat : AudioError {
  using AudioError::AudioError;
};
struct IoError : AudioError {
  using AudioError::AudioError;
};
struct OutOfRange : AudioError {
  using AudioError::AudioError;
};
struct RateMismatch : AudioError {
  using AudioError::AudioError;
};
struct EmptyBuffer : AudioError {
  using AudioError::AudioError;
};
struct SilentSnippet : AudioError {
  using AudioError::AudioError;
};

// Mono PCM, samples in [-1, 1].
struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate = 0;

  std::size_t size() const { return samples.size(); }
  double duration_ms() const {
    return sample_rate > 0 ? 1000.0 * static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// Millisecond interval, half-open in sample space: [index(start), index(end)).
struct TimeInterval {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;

  std::int64_t duration_ms() const { return end_ms - start_ms; }
  bool valid() const { return start_ms >= 0 && start_ms < end_ms; }
  bool operator==(const TimeInterval&) const = default;
};

// Millisecond-to-sample conversion, round half up. All modules share this
// so interval math never drifts by a sample between them.
inline std::int64_t sample_index(std::int64_t ms, int rate) {
  return (ms * rate + 500) / 1000;
}

// Default silence frame parameters (conventional VAD-grade values,
// overridable per call).
inline constexpr double kSilenceThresholdDbfs = -40.0;
inline constexpr int kSilenceFrameMs = 10;

// 16-bit PCM mono RIFF/WAV. read scales by 1/32768; write rounds to
// nearest and clamps, so write . read . write is byte-identical.
AudioBuffer read_wav(const std::string& path);
void write_wav(const AudioBuffer& buffer, const std::string& path);

// Header-only probe: (sample_count, sample_rate) without loading data.
std::pair<std::int64_t, int> wav_info(const std::string& path);

AudioBuffer slice(const AudioBuffer& buffer, TimeInterval interval);

AudioBuffer concat(const std::vector<AudioBuffer>& buffers, int crossfade_ms = 0);

// Zeroes samples inside the interval, leaves everything else untouched.
AudioBuffer silence_fill(const AudioBuffer& buffer, TimeInterval interval);

// Root-mean-square amplitude. With active_only, measured only over
// frame_ms frames whose own RMS exceeds the dBFS threshold; 0 if no
// frame is active.
double rms(const AudioBuffer& buffer, bool active_only = false,
           double threshold_dbfs = kSilenceThresholdDbfs, int frame_ms = kSilenceFrameMs);

struct GainResult {
  AudioBuffer audio;
  double clipped_fraction = 0.0;
};

// Scales the snippet so its active RMS equals reference_level, then
// hard-clips to [-1, 1].
GainResult match_rms(const AudioBuffer& snippet, double reference_level,
                     double threshold_dbfs = kSilenceThresholdDbfs,
                     int frame_ms = kSilenceFrameMs);

// Drops maximal leading/trailing runs of frames whose RMS is below the
// threshold. All-silent input yields an empty buffer.
AudioBuffer trim_silence(const AudioBuffer& snippet,
                         double threshold_dbfs = kSilenceThresholdDbfs,
                         int frame_ms = kSilenceFrameMs);

inline double dbfs_to_amplitude(double dbfs) {
  return std::pow(10.0, dbfs / 20.0);
}

}  // namespace deidforge::audio
