#ifndef TFWM_AUDIO_IO_HPP
#define TFWM_AUDIO_IO_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace tfwm {

// Mono audio in normalized full-scale floats. Quantization happens only at
// file boundaries; everything in between works on doubles.
struct AudioClip {
  std::vector<double> samples;  // values in [-1, 1]
  int sample_rate_hz = 0;
  int source_bit_depth = 16;

  std::size_t length() const { return samples.size(); }
};

// Non-overlapping framing of a clip. The final frame is zero padded so every
// frame has exactly frame_length entries.
struct FrameSet {
  std::vector<std::vector<double>> frames;
  int frame_length = 0;   // M0
  int tail_padding = 0;   // zeros appended to the last frame

  std::size_t frame_count() const { return frames.size(); }
};

struct WavReadResult {
  AudioClip clip;
  std::vector<std::string> warnings;  // e.g. stereo reduced to channel 0
};

struct WavWriteStats {
  std::size_t clipped_samples = 0;  // inputs outside [-1, 1]
};

// Reads a RIFF/WAVE file with integer PCM samples (8/16/24-bit, mono or
// stereo). Stereo input keeps channel 0 only and records a warning.
WavReadResult read_wav(const std::string& path);

// Writes mono integer PCM. Samples outside [-1, 1] are hard-clipped and
// counted. bit_depth must be 8, 16 or 24.
WavWriteStats write_wav(const AudioClip& clip, const std::string& path,
                        int bit_depth);

// Partitions into ceil(N / m0) non-overlapping frames, zero padding the tail.
FrameSet frame(const AudioClip& clip, int m0);

// Concatenates frames and truncates to n samples; exact inverse of frame().
std::vector<double> deframe(const FrameSet& frames, std::size_t n);

}  // namespace tfwm

#endif
