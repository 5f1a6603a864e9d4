#include "tfwm/quality.hpp"

#include <unistd.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>

#include "tfwm/errors.hpp"

namespace tfwm {

double dwr_db(const AudioClip& x, const AudioClip& x_w) {
  if (x.samples.size() != x_w.samples.size())
    fail(ErrorClass::shape, "clips differ in length");
  double sig = 0.0, dist = 0.0;
  for (std::size_t i = 0; i < x.samples.size(); ++i) {
    sig += x.samples[i] * x.samples[i];
    const double d = x_w.samples[i] - x.samples[i];
    dist += d * d;
  }
  if (dist == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(sig / dist);
}

double detection_rate(std::span<const int> w, std::span<const int> w_hat) {
  if (w.size() != w_hat.size()) fail(ErrorClass::shape, "payloads differ in length");
  if (w.empty()) fail(ErrorClass::shape, "empty payload");
  long err = 0;
  for (std::size_t i = 0; i < w.size(); ++i) err += std::abs(w[i] - w_hat[i]);
  return (1.0 - static_cast<double>(err) / (2.0 * static_cast<double>(w.size()))) * 100.0;
}

double snr_db(const AudioClip& x_w, double sigma2) {
  if (sigma2 <= 0.0) fail(ErrorClass::domain, "noise variance must be positive");
  if (x_w.samples.empty()) fail(ErrorClass::domain, "empty clip");
  double power = 0.0;
  for (double v : x_w.samples) power += v * v;
  power /= static_cast<double>(x_w.samples.size());
  return 10.0 * std::log10(power / sigma2);
}

namespace {

constexpr int kProxyFrame = 1024;
constexpr double kSilenceFloor = 1e-10;  // per-sample mean square below this is silence

// Piecewise-linear map from mean segmental distortion-to-signal ratio (dB)
// onto the grade scale. Calibrated so that -1.0 sits near DWR 35 dB for
// default embeddings and broadband distortion below DWR 10 dB grades <= -3.
constexpr std::array<std::pair<double, double>, 12> kGradeCurve = {{
    {-90.0, -0.001},
    {-70.0, -0.05},
    {-55.0, -0.25},
    {-45.0, -0.60},
    {-41.0, -0.80},
    {-31.0, -1.20},
    {-25.0, -1.60},
    {-19.0, -2.20},
    {-13.0, -2.80},
    {-9.0, -3.20},
    {0.0, -3.90},
    {6.0, -4.00},
}};

double grade_from_dsr_db(double dsr_db) {
  if (dsr_db <= kGradeCurve.front().first) return kGradeCurve.front().second;
  if (dsr_db >= kGradeCurve.back().first) return kGradeCurve.back().second;
  for (std::size_t i = 1; i < kGradeCurve.size(); ++i) {
    if (dsr_db <= kGradeCurve[i].first) {
      const auto [x0, y0] = kGradeCurve[i - 1];
      const auto [x1, y1] = kGradeCurve[i];
      return y0 + (y1 - y0) * (dsr_db - x0) / (x1 - x0);
    }
  }
  return kGradeCurve.back().second;
}

}  // namespace

double odg_proxy(const AudioClip& x, const AudioClip& x_w) {
  if (x.samples.size() != x_w.samples.size())
    fail(ErrorClass::shape, "clips differ in length");
  if (x.samples == x_w.samples) return 0.0;

  const std::size_t n = x.samples.size();
  double ratio_sum = 0.0;
  std::size_t used = 0;
  for (std::size_t begin = 0; begin < n; begin += kProxyFrame) {
    const std::size_t len = std::min<std::size_t>(kProxyFrame, n - begin);
    double s = 0.0, d = 0.0;
    for (std::size_t i = begin; i < begin + len; ++i) {
      s += x.samples[i] * x.samples[i];
      const double diff = x_w.samples[i] - x.samples[i];
      d += diff * diff;
    }
    if (s <= kSilenceFloor * static_cast<double>(len)) continue;  // silent host frame
    ratio_sum += d / s;
    ++used;
  }
  if (used == 0) return -0.001;  // distortion exists only against digital silence
  const double q = ratio_sum / static_cast<double>(used);
  if (q <= 0.0) return -0.001;   // distortion confined to excluded frames
  return grade_from_dsr_db(10.0 * std::log10(q));
}

QualityMetric external_metric_command(std::string command_template) {
  return [command_template](const AudioClip& x, const AudioClip& x_w) -> double {
    namespace fs = std::filesystem;
    static std::atomic<unsigned> counter{0};
    const fs::path dir = fs::temp_directory_path();
    const auto tag = std::to_string(static_cast<unsigned>(getpid())) + "_" +
                     std::to_string(counter.fetch_add(1));
    const fs::path ref = dir / ("tfwm_ref_" + tag + ".wav");
    const fs::path deg = dir / ("tfwm_deg_" + tag + ".wav");
    write_wav(x, ref.string(), 16);
    write_wav(x_w, deg.string(), 16);

    std::string cmd = command_template;
    const auto substitute = [&cmd](const std::string& token, const std::string& value) {
      for (std::size_t pos = cmd.find(token); pos != std::string::npos;
           pos = cmd.find(token, pos + value.size()))
        cmd.replace(pos, token.size(), value);
    };
    substitute("{ref}", ref.string());
    substitute("{deg}", deg.string());

    std::string output;
    {
      std::unique_ptr<std::FILE, int (*)(std::FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
      if (!pipe) fail(ErrorClass::external_tool, "cannot run quality metric command");
      char buf[256];
      while (std::fgets(buf, sizeof buf, pipe.get())) output += buf;
    }
    std::error_code ec;
    fs::remove(ref, ec);
    fs::remove(deg, ec);

    double grade = 0.0;
    std::istringstream is(output);
    if (!(is >> grade))
      fail(ErrorClass::external_tool,
           "quality metric command printed no numeric grade: '" + output + "'");
    return std::clamp(grade, -4.0, 0.0);
  };
}

TuneResult tune_alpha(const AudioClip& host, const Payload& payload, EmbedConfig config,
                      const TunerConfig& tuner, const QualityMetric& metric) {
  if (!metric) fail(ErrorClass::config, "no quality metric supplied");
  if (tuner.target_grade < -4.0 || tuner.target_grade > 0.0)
    fail(ErrorClass::config, "target grade must lie in [-4, 0]");
  if (tuner.max_iterations < 1) fail(ErrorClass::config, "need at least one iteration");

  constexpr double kAlphaMin = 1e-6;
  constexpr double kAlphaMax = 0.999;
  double alpha = std::clamp(tuner.alpha_init, kAlphaMin, kAlphaMax);

  // A digitally silent host can never keep the embedded patches among the
  // minimum-energy set; feature invariance is not a meaningful constraint
  // there and only the quality loop applies.
  bool host_silent = true;
  for (double v : host.samples)
    if (v != 0.0) {
      host_silent = false;
      break;
    }

  TuneResult result;
  result.config = config;

  // Once an alpha breaks feature recovery it becomes a ceiling; the tuner
  // never steps back up into known-infeasible territory, so the trace stays
  // monotone between direction changes.
  double ceiling = kAlphaMax * tuner.step_up;
  struct Feasible {
    double alpha;
    QualityReport report;
  };
  std::optional<Feasible> best_feasible;

  for (int iter = 0; iter < tuner.max_iterations; ++iter) {
    result.config.alpha = alpha;
    const EmbedResult embedded = embed(host, payload, result.config);
    const double grade = metric(host, embedded.watermarked);
    const double recovery = verify_recovery(
        embedded.record.selection, selection_of(embedded.watermarked, result.config));

    result.trace.push_back({alpha, grade, embedded.record.dwr_db, recovery});
    result.report = {embedded.record.dwr_db, grade, "tuned"};

    const bool feasible = host_silent || recovery >= 1.0;
    if (feasible) best_feasible = {alpha, result.report};

    const bool quality_ok =
        grade >= tuner.target_grade - tuner.tolerance && grade <= tuner.target_grade;
    if (feasible && quality_ok) {
      result.converged = true;
      return result;
    }

    if (!feasible || grade < tuner.target_grade - tuner.tolerance) {
      if (!feasible) ceiling = std::min(ceiling, alpha);
      const double next = alpha * tuner.step_down;
      if (next < kAlphaMin)
        throw TuningError("no feasible alpha in (0, 1): reached lower bound at alpha = " +
                              std::to_string(alpha),
                          result.trace);
      alpha = next;
      continue;
    }

    // quality better than target: embed more strongly while allowed
    const double next = alpha * tuner.step_up;
    if (alpha >= kAlphaMax || next >= ceiling) {
      result.bound_stop = true;
      return result;
    }
    alpha = std::min(next, kAlphaMax);
  }

  // iteration budget exhausted; settle on the last feasible point
  if (best_feasible && result.config.alpha != best_feasible->alpha) {
    result.config.alpha = best_feasible->alpha;
    result.report = best_feasible->report;
  }
  return result;
}

}  // namespace tfwm
