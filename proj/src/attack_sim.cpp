#include "tfwm/attack_sim.hpp"

#include <unistd.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <utility>

#include "tfwm/errors.hpp"
#include "tfwm/keyed_rng.hpp"
#include "tfwm/tf_analysis.hpp"

namespace tfwm {

namespace {

std::string format_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string AttackSpec::label() const {
  switch (kind) {
    case Kind::requantize: return "requantize " + format_param(param) + " bit";
    case Kind::awgn: return "awgn " + format_param(param) + " dB";
    case Kind::amplitude_scale: return "scale x" + format_param(param);
    case Kind::compress_proxy: return "compress-proxy " + format_param(param);
    case Kind::external_codec: return "codec " + format_param(param) + " kbps";
  }
  return "?";
}

AttackSpec AttackSpec::requantize(int bits) {
  return {Kind::requantize, static_cast<double>(bits), 0, {}};
}
AttackSpec AttackSpec::awgn(double target_snr_db, std::uint64_t seed) {
  return {Kind::awgn, target_snr_db, seed, {}};
}
AttackSpec AttackSpec::amplitude_scale(double factor) {
  return {Kind::amplitude_scale, factor, 0, {}};
}
AttackSpec AttackSpec::compress_proxy(double strength) {
  return {Kind::compress_proxy, strength, 0, {}};
}
AttackSpec AttackSpec::external_codec(std::string command, double bitrate_kbps) {
  return {Kind::external_codec, bitrate_kbps, 0, std::move(command)};
}

AudioClip apply_attack(const AudioClip& clip, const AttackSpec& spec) {
  switch (spec.kind) {
    case AttackSpec::Kind::requantize:
      return requantize(clip, static_cast<int>(spec.param));
    case AttackSpec::Kind::awgn:
      return awgn(clip, spec.param, spec.seed);
    case AttackSpec::Kind::amplitude_scale:
      return amplitude_scale(clip, spec.param);
    case AttackSpec::Kind::compress_proxy:
      return compress_proxy(clip, spec.param);
    case AttackSpec::Kind::external_codec:
      return external_codec(clip, spec.codec_command, spec.param);
  }
  fail(ErrorClass::usage, "unknown attack kind");
}

AudioClip requantize(const AudioClip& clip, int bits) {
  if (bits < 4 || bits > 16)
    fail(ErrorClass::config, "requantization depth must lie in 4..16 bits");
  const double scale = static_cast<double>(1 << (bits - 1));
  const long lo = -(1L << (bits - 1));
  const long hi = (1L << (bits - 1)) - 1;
  AudioClip out = clip;
  for (double& v : out.samples) {
    const long q = std::clamp(std::lround(v * scale), lo, hi);
    v = static_cast<double>(q) / scale;
  }
  return out;
}

AudioClip awgn(const AudioClip& clip, double target_snr_db, std::uint64_t seed) {
  if (target_snr_db < 0.0 || target_snr_db > 100.0)
    fail(ErrorClass::config, "target SNR must lie in [0, 100] dB");
  double power = 0.0;
  for (double v : clip.samples) power += v * v;
  if (clip.samples.empty() || power == 0.0)
    fail(ErrorClass::domain, "SNR undefined for a silent clip");
  power /= static_cast<double>(clip.samples.size());

  const double sigma = std::sqrt(power * std::pow(10.0, -target_snr_db / 10.0));
  KeyedRng rng(splitmix64(seed));
  AudioClip out = clip;
  for (double& v : out.samples) v += sigma * rng.next_gauss();
  return out;
}

AudioClip amplitude_scale(const AudioClip& clip, double c) {
  if (c <= 0.0) fail(ErrorClass::config, "scale factor must be positive");
  AudioClip out = clip;
  for (double& v : out.samples) v *= c;
  return out;
}

double proxy_strength_for_bitrate(double kbps) {
  // fixed mapping; linear between table entries, clamped at the ends
  constexpr std::array<std::pair<double, double>, 5> table = {{
      {64.0, 0.60}, {96.0, 0.70}, {128.0, 0.80}, {160.0, 0.85}, {192.0, 0.90}}};
  if (kbps <= table.front().first) return table.front().second;
  if (kbps >= table.back().first) return table.back().second;
  for (std::size_t i = 1; i < table.size(); ++i) {
    if (kbps <= table[i].first) {
      const auto [x0, y0] = table[i - 1];
      const auto [x1, y1] = table[i];
      return y0 + (y1 - y0) * (kbps - x0) / (x1 - x0);
    }
  }
  return table.back().second;
}

AudioClip compress_proxy(const AudioClip& clip, double strength) {
  if (!(strength > 0.0 && strength <= 1.0))
    fail(ErrorClass::config, "proxy strength must lie in (0, 1]");

  constexpr int kFrame = 1024;
  const int cutoff = static_cast<int>(std::lround(strength * kFrame));
  const double step = 0.02 * (1.0 - strength);

  FrameTransformer t(kFrame);
  AudioClip out = clip;
  const std::size_t n = clip.samples.size();
  std::vector<double> buf(kFrame);

  for (std::size_t begin = 0; begin < n; begin += kFrame) {
    const std::size_t len = std::min<std::size_t>(kFrame, n - begin);
    std::fill(buf.begin(), buf.end(), 0.0);
    std::copy_n(clip.samples.begin() + static_cast<std::ptrdiff_t>(begin), len, buf.begin());
    std::vector<double> coeff = t.dct_ortho(buf);
    for (int k = 0; k < kFrame; ++k) {
      if (k >= cutoff)
        coeff[static_cast<std::size_t>(k)] = 0.0;
      else if (step > 0.0)
        coeff[static_cast<std::size_t>(k)] =
            step * std::round(coeff[static_cast<std::size_t>(k)] / step);
    }
    const std::vector<double> rec = t.idct_ortho(coeff);
    std::copy_n(rec.begin(), len, out.samples.begin() + static_cast<std::ptrdiff_t>(begin));
  }
  return out;
}

AudioClip align_to_reference(const AudioClip& reference, const AudioClip& degraded,
                             int max_lag) {
  if (reference.samples.empty() || degraded.samples.empty())
    fail(ErrorClass::alignment, "cannot align empty clips");

  // correlate over a slice long enough to lock on, short enough to stay fast
  const std::size_t slice =
      std::min<std::size_t>({reference.samples.size(), degraded.samples.size(), 1u << 17});
  double ref_energy = 0.0;
  for (std::size_t i = 0; i < slice; ++i)
    ref_energy += reference.samples[i] * reference.samples[i];

  double best_corr = 0.0;
  int best_lag = 0;
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    double num = 0.0, deg_energy = 0.0;
    for (std::size_t i = 0; i < slice; ++i) {
      const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + lag;
      if (j < 0 || j >= static_cast<std::ptrdiff_t>(degraded.samples.size())) continue;
      const double d = degraded.samples[static_cast<std::size_t>(j)];
      num += reference.samples[i] * d;
      deg_energy += d * d;
    }
    if (deg_energy == 0.0 || ref_energy == 0.0) continue;
    const double corr = num / std::sqrt(ref_energy * deg_energy);
    if (corr > best_corr) {
      best_corr = corr;
      best_lag = lag;
    }
  }
  if (best_corr < 0.5)
    fail(ErrorClass::alignment, "codec output does not align with the input (peak " +
                                    std::to_string(best_corr) + ")");

  AudioClip out;
  out.sample_rate_hz = reference.sample_rate_hz;
  out.source_bit_depth = reference.source_bit_depth;
  out.samples.assign(reference.samples.size(), 0.0);
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + best_lag;
    if (j >= 0 && j < static_cast<std::ptrdiff_t>(degraded.samples.size()))
      out.samples[i] = degraded.samples[static_cast<std::size_t>(j)];
  }
  return out;
}

AudioClip external_codec(const AudioClip& clip, const std::string& command_template,
                         double bitrate_kbps) {
  if (command_template.find("{in}") == std::string::npos ||
      command_template.find("{out}") == std::string::npos)
    fail(ErrorClass::config, "codec command needs {in} and {out} placeholders");
  if (bitrate_kbps <= 0.0) fail(ErrorClass::config, "bitrate must be positive");

  namespace fs = std::filesystem;
  static std::atomic<unsigned> counter{0};
  const auto tag = std::to_string(static_cast<unsigned>(getpid())) + "_" +
                   std::to_string(counter.fetch_add(1));
  const fs::path in_path = fs::temp_directory_path() / ("tfwm_codec_in_" + tag + ".wav");
  const fs::path out_path = fs::temp_directory_path() / ("tfwm_codec_out_" + tag + ".wav");

  write_wav(clip, in_path.string(), 16);

  std::string cmd = command_template;
  const auto substitute = [&cmd](const std::string& token, const std::string& value) {
    for (std::size_t pos = cmd.find(token); pos != std::string::npos;
         pos = cmd.find(token, pos + value.size()))
      cmd.replace(pos, token.size(), value);
  };
  substitute("{in}", in_path.string());
  substitute("{out}", out_path.string());
  substitute("{kbps}", format_param(bitrate_kbps));

  const int status = std::system(cmd.c_str());
  std::error_code ec;
  if (status != 0) {
    fs::remove(in_path, ec);
    fail(ErrorClass::external_tool,
         "codec command failed with status " + std::to_string(status) + ": " + cmd);
  }
  if (!fs::exists(out_path)) {
    fs::remove(in_path, ec);
    fail(ErrorClass::external_tool, "codec command produced no output file: " + cmd);
  }

  const WavReadResult decoded = read_wav(out_path.string());
  fs::remove(in_path, ec);
  fs::remove(out_path, ec);

  return align_to_reference(clip, decoded.clip, 1024);
}

}  // namespace tfwm
