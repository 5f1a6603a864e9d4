#ifndef TFWM_ATTACK_SIM_HPP
#define TFWM_ATTACK_SIM_HPP

#include <cstdint>
#include <string>

#include "tfwm/audio_io.hpp"

namespace tfwm {

// A deterministic channel attack. `param` carries bits / target SNR dB /
// scale factor / proxy strength / bitrate kbps depending on the kind.
struct AttackSpec {
  enum class Kind { requantize, awgn, amplitude_scale, compress_proxy, external_codec };

  Kind kind = Kind::amplitude_scale;
  double param = 1.0;
  std::uint64_t seed = 0;       // awgn only
  std::string codec_command;    // external_codec only

  std::string label() const;    // stable human-readable row label

  static AttackSpec requantize(int bits);
  static AttackSpec awgn(double target_snr_db, std::uint64_t seed);
  static AttackSpec amplitude_scale(double factor);
  static AttackSpec compress_proxy(double strength);
  static AttackSpec external_codec(std::string command, double bitrate_kbps);
};

AudioClip apply_attack(const AudioClip& clip, const AttackSpec& spec);

// Samples quantized to 2^bits uniform levels over [-1, 1) and back.
AudioClip requantize(const AudioClip& clip, int bits);

// Adds seeded zero-mean Gaussian noise with variance mean-power / 10^(SNR/10).
AudioClip awgn(const AudioClip& clip, double target_snr_db, std::uint64_t seed);

// Multiplies every sample by c; no clipping (floating pipeline).
AudioClip amplitude_scale(const AudioClip& clip, double c);

// Perceptual-codec surrogate: per-frame cosine transform, low-pass above a
// strength-dependent cutoff, coarse quantization of retained coefficients.
// strength 1 is transparent, small strength a harsh codec.
AudioClip compress_proxy(const AudioClip& clip, double strength);

// Round trip through an external encoder/decoder command with {in}, {out} and
// {kbps} placeholders, then realignment to the original length.
AudioClip external_codec(const AudioClip& clip, const std::string& command_template,
                         double bitrate_kbps);

// Fixed documented mapping from MP3/AAC-style bitrate onto proxy strength.
double proxy_strength_for_bitrate(double kbps);

// Best alignment of `degraded` against `reference` within +-max_lag samples
// by cross-correlation; returns the shifted clip cut to reference length.
// A normalized peak below 0.5 raises an alignment error.
AudioClip align_to_reference(const AudioClip& reference, const AudioClip& degraded,
                             int max_lag);

}  // namespace tfwm

#endif
