#ifndef TFWM_QUALITY_HPP
#define TFWM_QUALITY_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tfwm/audio_io.hpp"
#include "tfwm/errors.hpp"
#include "tfwm/ss_core.hpp"

namespace tfwm {

struct QualityReport {
  double dwr_db = 0.0;
  double grade = 0.0;  // perceptual grade in [-4, 0], 0 = imperceptible
  std::string metric_name;
};

struct TunerConfig {
  double target_grade = -1.0;  // desired quality level
  double tolerance = 0.1;
  double alpha_init = 0.1;
  double step_up = 1.25;
  double step_down = 0.7;
  int max_iterations = 30;
};

// 10 log10 ||x||^2 / ||x_w - x||^2. Identical signals give +infinity.
double dwr_db(const AudioClip& x, const AudioClip& x_w);

// Percentage of correctly recovered bits: 100 for w_hat == w, 0 for w_hat == -w.
double detection_rate(std::span<const int> w, std::span<const int> w_hat);

// 10 log10 (mean power of x_w / sigma2).
double snr_db(const AudioClip& x_w, double sigma2);

// Deterministic stand-in for a perceptual grade. Frame-wise segmental
// distortion-to-signal ratios (1024-sample frames, frames with silent host
// excluded) are averaged and mapped through a fixed piecewise-linear curve
// onto [-4, 0]. Monotone: more distortion along a fixed direction never
// raises the grade. Zero distortion gives exactly 0.
double odg_proxy(const AudioClip& x, const AudioClip& x_w);

// Pluggable quality metric: reference clip, degraded clip -> grade in [-4, 0].
using QualityMetric = std::function<double(const AudioClip&, const AudioClip&)>;

// Runs `command_template` with {ref} and {deg} replaced by temporary WAV
// paths; the command must print the grade on stdout.
QualityMetric external_metric_command(std::string command_template);

struct TuneStep {
  double alpha = 0.0;
  double grade = 0.0;
  double dwr_db = 0.0;
  double recovery = 0.0;
};

struct TuneResult {
  EmbedConfig config;       // with the tuned alpha
  QualityReport report;
  std::vector<TuneStep> trace;
  bool converged = false;   // grade within [target - tol, target], recovery 1.0
  bool bound_stop = false;  // stopped at the alpha upper bound
};

class TuningError : public Error {
public:
  TuningError(std::string msg, std::vector<TuneStep> trace)
      : Error(ErrorClass::tuning_failure, std::move(msg)), trace(std::move(trace)) {}

  std::vector<TuneStep> trace;
};

// Feedback loop: embed, grade, adjust alpha multiplicatively until the grade
// falls within [target - tolerance, target]. Any alpha that breaks feature
// recovery is rejected (alpha decreased). Throws a tuning-failure error when
// no feasible alpha exists in (0, 1).
TuneResult tune_alpha(const AudioClip& host, const Payload& payload, EmbedConfig config,
                      const TunerConfig& tuner, const QualityMetric& metric);

}  // namespace tfwm

#endif
