#ifndef TFWM_SS_CORE_HPP
#define TFWM_SS_CORE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tfwm/audio_io.hpp"
#include "tfwm/patch_grid.hpp"
#include "tfwm/tf_analysis.hpp"

namespace tfwm {

struct Payload {
  enum class Origin { random, logo };

  std::vector<int> bits;  // +1 / -1
  Origin origin = Origin::random;
  int logo_rows = 0;
  int logo_cols = 0;

  int size() const { return static_cast<int>(bits.size()); }
};

// All embedding tunables. The same config must be supplied to the extractor;
// the scheme is blind beyond this shared configuration and its keys.
struct EmbedConfig {
  int frame_length = 1024;    // M0, samples per frame (even)
  double band_lo_hz = 60.0;   // f1
  double band_hi_hz = 2800.0; // f2
  int patch_window = 16;      // W
  int payload_bits = 32;      // P
  double alpha = 0.1;         // embedding strength, 0 < alpha < 1
  bool iss = true;            // true = ISS (host interference removed), false = SS
  TransformKind transform = TransformKind::stft;
  SelectionMode selection = SelectionMode::energy_sort;
  std::uint64_t selection_key = 0;
  std::uint64_t pn_key = 1;
  bool pn_shared = false;     // reuse one PN sequence for every bit

  // Throws a config error when any invariant is violated for the given rate.
  void validate(int sample_rate_hz) const;
};

// Everything needed to audit an embedding run.
struct EmbedRecord {
  EmbedConfig config;
  int sample_rate_hz = 0;
  std::size_t host_length = 0;
  int patch_count = 0;             // capacity of the partitioned band image
  PatchSelection selection;        // embedding order
  std::vector<cplx> host_correlations;  // per-bit phi (Eq. host projection)
  double dwr_db = 0.0;             // achieved distortion
};

struct EmbedResult {
  AudioClip watermarked;
  EmbedRecord record;
};

// Deterministic keyed +/-1 spreading sequence for bit `index`. Sequences of
// length >= 16 are rebalanced so |mean| <= 0.25.
std::vector<int> pn_sequence(std::uint64_t key, std::uint64_t index, int length);

// Deterministic random payload of +/-1 bits.
Payload random_payload(int bits, std::uint64_t seed);

// Eq. host projection: phi = (f^T p) / ||p||^2, plain transpose without
// conjugation.
cplx host_correlation(std::span<const cplx> f, std::span<const int> p);

// f + (alpha * bit - I * phi) * p. With iss the host interference is removed:
// the output correlates to exactly alpha * bit.
std::vector<cplx> embed_bit(std::span<const cplx> f, int bit, std::span<const int> p,
                            double alpha, bool iss);

// sign of <Re(f_w), p> / ||p||^2, with sign(0) defined as +1.
int extract_bit(std::span<const cplx> f_w, std::span<const int> p);

// Full embedding pipeline: frame, transform, partition, select, per-bit
// spread-spectrum embedding, write back, inverse transform.
EmbedResult embed(const AudioClip& host, const Payload& payload, const EmbedConfig& config);

// Blind extraction: recomputes image, grid and selection, then decides each
// bit by sign correlation.
Payload extract(const AudioClip& clip, const EmbedConfig& config);

// The selection the blind extractor would compute for this clip (used by the
// tuner to check feature invariance).
PatchSelection selection_of(const AudioClip& clip, const EmbedConfig& config);

}  // namespace tfwm

#endif
