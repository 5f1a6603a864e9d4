#include "tfwm/ss_core.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>

#include "tfwm/errors.hpp"
#include "tfwm/keyed_rng.hpp"
#include "tfwm/quality.hpp"

namespace tfwm {

void EmbedConfig::validate(int sample_rate_hz) const {
  if (frame_length <= 0 || (frame_length & 1))
    fail(ErrorClass::config, "frame length must be positive and even");
  if (!(alpha > 0.0 && alpha < 1.0))
    fail(ErrorClass::config, "alpha must lie in (0, 1)");
  if (payload_bits < 1) fail(ErrorClass::config, "payload must hold at least one bit");
  if (patch_window <= 0) fail(ErrorClass::config, "patch window must be positive");
  if (sample_rate_hz <= 0) fail(ErrorClass::config, "sample rate must be positive");
  if (band_lo_hz < 0.0 || band_lo_hz >= band_hi_hz || band_hi_hz > sample_rate_hz / 2.0)
    fail(ErrorClass::config, "band must satisfy 0 <= f1 < f2 <= rate/2");

  const int lo = static_cast<int>(std::ceil(band_lo_hz * frame_length / sample_rate_hz));
  const int hi = static_cast<int>(std::floor(band_hi_hz * frame_length / sample_rate_hz));
  if (lo > hi) fail(ErrorClass::band, "empty embedding band");
  const int m = hi - lo + 1;
  if (m % patch_window != 0)
    fail(ErrorClass::config, "patch window " + std::to_string(patch_window) +
                                 " must divide the band height " + std::to_string(m));
  if (transform == TransformKind::stft) {
    // Embedding into the DC or Nyquist bin would not survive the real-part
    // reconstruction; keep the band strictly inside the positive frequencies.
    if (lo < 1 || hi > frame_length / 2 - 1)
      fail(ErrorClass::config,
           "STFT embedding band must lie strictly between DC and Nyquist");
  }
}

std::vector<int> pn_sequence(std::uint64_t key, std::uint64_t index, int length) {
  if (length < 1) fail(ErrorClass::config, "PN sequence length must be >= 1");
  std::vector<int> p(static_cast<std::size_t>(length));
  for (std::uint64_t round = 0;; ++round) {
    KeyedRng rng(mix_key(key, splitmix64(index) + round));
    long sum = 0;
    for (auto& v : p) {
      v = rng.next_sign();
      sum += v;
    }
    if (length < 16 || std::abs(sum) * 4 <= length) return p;  // |mean| <= 0.25
  }
}

Payload random_payload(int bits, std::uint64_t seed) {
  if (bits < 1) fail(ErrorClass::config, "payload must hold at least one bit");
  KeyedRng rng(splitmix64(seed));
  Payload payload;
  payload.origin = Payload::Origin::random;
  payload.bits.resize(static_cast<std::size_t>(bits));
  for (auto& b : payload.bits) b = rng.next_sign();
  return payload;
}

cplx host_correlation(std::span<const cplx> f, std::span<const int> p) {
  if (f.size() != p.size())
    fail(ErrorClass::shape, "feature and PN sequence lengths differ");
  cplx acc(0.0, 0.0);
  for (std::size_t k = 0; k < f.size(); ++k)
    acc += f[k] * static_cast<double>(p[k]);
  return acc / static_cast<double>(p.size());  // ||p||^2 == length for +/-1 entries
}

std::vector<cplx> embed_bit(std::span<const cplx> f, int bit, std::span<const int> p,
                            double alpha, bool iss) {
  if (f.size() != p.size())
    fail(ErrorClass::shape, "feature and PN sequence lengths differ");
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorClass::config, "alpha must lie in (0, 1)");

  const cplx gain = alpha * static_cast<double>(bit) -
                    (iss ? host_correlation(f, p) : cplx(0.0, 0.0));
  std::vector<cplx> out(f.begin(), f.end());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] += gain * static_cast<double>(p[k]);
  return out;
}

int extract_bit(std::span<const cplx> f_w, std::span<const int> p) {
  if (f_w.size() != p.size())
    fail(ErrorClass::shape, "feature and PN sequence lengths differ");
  double acc = 0.0;
  for (std::size_t k = 0; k < f_w.size(); ++k)
    acc += f_w[k].real() * static_cast<double>(p[k]);
  return acc < 0.0 ? -1 : 1;  // sign(0) := +1
}

namespace {

struct AnalysisState {
  TfImage image;
  PatchGrid grid;
  PatchSelection selection;
};

AnalysisState analyze(const AudioClip& clip, const EmbedConfig& config) {
  config.validate(clip.sample_rate_hz);
  const FrameSet frames = frame(clip, config.frame_length);
  AnalysisState st;
  st.image = forward(frames, config.transform, config.band_lo_hz, config.band_hi_hz,
                     clip.sample_rate_hz);
  st.grid = partition(st.image, config.patch_window);
  st.selection = select(st.grid, config.payload_bits, config.selection,
                        config.selection_key);
  return st;
}

}  // namespace

EmbedResult embed(const AudioClip& host, const Payload& payload, const EmbedConfig& config) {
  if (payload.size() != config.payload_bits)
    fail(ErrorClass::config, "payload holds " + std::to_string(payload.size()) +
                                 " bits but config expects " +
                                 std::to_string(config.payload_bits));
  for (int b : payload.bits)
    if (b != 1 && b != -1) fail(ErrorClass::config, "payload bits must be +1 or -1");

  AnalysisState st = analyze(host, config);
  const int pn_len = config.patch_window * config.patch_window;

  EmbedResult result;
  result.record.config = config;
  result.record.sample_rate_hz = host.sample_rate_hz;
  result.record.host_length = host.length();
  result.record.patch_count = st.grid.patch_count();
  result.record.selection = st.selection;
  result.record.host_correlations.reserve(st.selection.coords.size());

  for (std::size_t i = 0; i < st.selection.coords.size(); ++i) {
    const PatchCoord& coord = st.selection.coords[i];
    const std::vector<int> p =
        pn_sequence(config.pn_key, config.pn_shared ? 0 : i, pn_len);
    const std::vector<cplx> f = vectorize(st.image, st.grid, coord);
    const cplx phi = host_correlation(f, p);
    result.record.host_correlations.push_back(phi);
    const std::vector<cplx> f_w =
        embed_bit(f, payload.bits[i], p, config.alpha, config.iss);
    devectorize(st.image, st.grid, coord, f_w);
  }

  result.watermarked.samples = inverse(st.image, config.transform);
  result.watermarked.sample_rate_hz = host.sample_rate_hz;
  result.watermarked.source_bit_depth = host.source_bit_depth;
  result.record.dwr_db = dwr_db(host, result.watermarked);
  return result;
}

Payload extract(const AudioClip& clip, const EmbedConfig& config) {
  AnalysisState st = analyze(clip, config);
  const int pn_len = config.patch_window * config.patch_window;

  Payload out;
  out.bits.reserve(st.selection.coords.size());
  for (std::size_t i = 0; i < st.selection.coords.size(); ++i) {
    const std::vector<int> p =
        pn_sequence(config.pn_key, config.pn_shared ? 0 : i, pn_len);
    const std::vector<cplx> f_w = vectorize(st.image, st.grid, st.selection.coords[i]);
    out.bits.push_back(extract_bit(f_w, p));
  }
  return out;
}

PatchSelection selection_of(const AudioClip& clip, const EmbedConfig& config) {
  return analyze(clip, config).selection;
}

}  // namespace tfwm
