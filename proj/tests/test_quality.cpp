#include <doctest.h>

#include <cmath>
#include <limits>

#include "support/corpus.hpp"
#include "tfwm/errors.hpp"
#include "tfwm/keyed_rng.hpp"
#include "tfwm/quality.hpp"

using namespace tfwm;
namespace ts = tfwm::testsupport;

namespace {

AudioClip constant_clip(double value, std::size_t n) {
  AudioClip clip;
  clip.sample_rate_hz = 44100;
  clip.samples.assign(n, value);
  return clip;
}

}  // namespace

TEST_CASE("dwr_db follows the energy-ratio formula") {
  // ||x||^2 = 625 * 0.25 = 156.25; distortion 0.125^2 -> ratio exactly 1e4
  AudioClip x = constant_clip(0.5, 625);
  AudioClip xw = x;
  xw.samples[7] += 0.125;
  CHECK(dwr_db(x, xw) == doctest::Approx(40.0).epsilon(1e-12));

  SUBCASE("identical clips give the distinguished infinite value") {
    CHECK(std::isinf(dwr_db(x, x)));
  }
  SUBCASE("scaling both signals together changes nothing") {
    AudioClip x2 = x, xw2 = xw;
    for (double& v : x2.samples) v *= 0.37;
    for (double& v : xw2.samples) v *= 0.37;
    CHECK(dwr_db(x2, xw2) == doctest::Approx(dwr_db(x, xw)).epsilon(1e-12));
  }
  SUBCASE("length mismatch is a shape error") {
    AudioClip shorter = constant_clip(0.5, 624);
    CHECK_THROWS_AS(dwr_db(x, shorter), Error);
  }
}

TEST_CASE("detection_rate identities") {
  for (int p : {1, 32, 1024}) {
    const Payload w = random_payload(p, 3);
    std::vector<int> flipped = w.bits;
    for (int& b : flipped) b = -b;
    CHECK(detection_rate(w.bits, w.bits) == 100.0);
    CHECK(detection_rate(w.bits, flipped) == 0.0);
  }
  // one wrong bit of 32
  const Payload w = random_payload(32, 4);
  std::vector<int> one_off = w.bits;
  one_off[13] = -one_off[13];
  CHECK(detection_rate(w.bits, one_off) == doctest::Approx(96.875));
}

TEST_CASE("snr_db uses mean sample power") {
  AudioClip x;
  x.sample_rate_hz = 44100;
  x.samples = {1.0, -1.0, 1.0, -1.0};  // mean power 1.0
  CHECK(snr_db(x, 0.001) == doctest::Approx(30.0).epsilon(1e-12));
  CHECK(snr_db(x, 1.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(snr_db(x, 0.0), Error);
  CHECK_THROWS_AS(snr_db(x, -1.0), Error);
}

TEST_CASE("odg_proxy: zero distortion, range, monotonicity") {
  const AudioClip x = ts::make_music_clip(7, 2.0);

  SUBCASE("identical signals grade 0") { CHECK(odg_proxy(x, x) == 0.0); }

  SUBCASE("monotone along a fixed direction, always in [-4, 0]") {
    KeyedRng rng(8);
    std::vector<double> direction(x.samples.size());
    for (auto& v : direction) v = 0.002 * rng.next_gauss();

    double previous = 0.0;
    for (int scale = 1; scale <= 64; scale *= 2) {
      AudioClip xw = x;
      for (std::size_t i = 0; i < xw.samples.size(); ++i)
        xw.samples[i] += scale * direction[i];
      const double grade = odg_proxy(x, xw);
      CHECK(grade <= 0.0);
      CHECK(grade >= -4.0);
      CHECK(grade < 0.0);  // nonzero distortion grades strictly negative
      CHECK(grade <= previous + 1e-12);
      previous = grade;
    }
  }

  SUBCASE("gross broadband distortion grades at most -3") {
    double power = 0.0;
    for (double v : x.samples) power += v * v;
    power /= static_cast<double>(x.samples.size());

    KeyedRng rng(9);
    AudioClip xw = x;
    const double sigma = std::sqrt(power / std::pow(10.0, 0.95));  // DWR ~ 9.5 dB
    for (double& v : xw.samples) v += sigma * rng.next_gauss();
    REQUIRE(dwr_db(x, xw) < 10.0);
    CHECK(odg_proxy(x, xw) <= -3.0);
  }
}

TEST_CASE("tune_alpha converges on a corpus clip") {
  const AudioClip host = ts::make_music_clip(11, 2.0);
  EmbedConfig cfg;
  cfg.patch_window = 8;
  cfg.payload_bits = 8;
  const Payload payload = random_payload(8, 5);
  const TunerConfig tuner;  // target -1.0, tolerance 0.1

  const QualityMetric metric = [](const AudioClip& a, const AudioClip& b) {
    return odg_proxy(a, b);
  };
  const TuneResult result = tune_alpha(host, payload, cfg, tuner, metric);

  CHECK(result.trace.size() <= 30);
  REQUIRE(!result.trace.empty());
  if (result.converged) {
    CHECK(result.report.grade >= -1.1);
    CHECK(result.report.grade <= -1.0);
    CHECK(result.trace.back().recovery == 1.0);
  } else {
    CHECK((result.bound_stop || result.trace.size() == 30));
  }

  // the trace flips direction at most a couple of times (no oscillation)
  int flips = 0;
  for (std::size_t i = 2; i < result.trace.size(); ++i) {
    const double d1 = result.trace[i - 1].alpha - result.trace[i - 2].alpha;
    const double d2 = result.trace[i].alpha - result.trace[i - 1].alpha;
    if (d1 * d2 < 0.0) ++flips;
  }
  CHECK(flips <= 2);
}

TEST_CASE("tune_alpha on a silent host climbs to the upper bound") {
  AudioClip silent = constant_clip(0.0, 44100);
  EmbedConfig cfg;
  cfg.patch_window = 8;
  cfg.payload_bits = 8;
  const Payload payload = random_payload(8, 6);
  TunerConfig tuner;
  tuner.max_iterations = 40;

  const TuneResult result = tune_alpha(silent, payload, cfg, tuner, odg_proxy);
  CHECK(result.bound_stop);
  CHECK(result.report.grade >= -0.01);  // 0-adjacent
  CHECK(result.config.alpha > 0.9);
}

TEST_CASE("tune_alpha reports failure when no alpha preserves recovery") {
  // identical frames of an exact-bin cosine: patches away from the tone hold
  // only rounding noise, so any embedding energy displaces the selection
  AudioClip host;
  host.sample_rate_hz = 44100;
  host.samples.resize(16384);
  for (std::size_t n = 0; n < host.samples.size(); ++n)
    host.samples[n] = 0.5 * std::cos(2.0 * M_PI * 43.0 * static_cast<double>(n % 1024) / 1024.0);

  EmbedConfig cfg;
  cfg.patch_window = 8;
  cfg.payload_bits = 8;
  TunerConfig tuner;
  tuner.max_iterations = 60;

  try {
    tune_alpha(host, random_payload(8, 7), cfg, tuner, odg_proxy);
    FAIL("expected a tuning failure");
  } catch (const TuningError& e) {
    CHECK(e.cls() == ErrorClass::tuning_failure);
    CHECK(!e.trace.empty());
    for (const TuneStep& s : e.trace) CHECK(s.recovery < 1.0);
  }
}

TEST_CASE("external metric command runs and is parsed") {
  const AudioClip x = ts::make_music_clip(12, 0.2);
  AudioClip xw = x;
  xw.samples[0] += 0.01;

  const QualityMetric metric = external_metric_command("echo ' -1.5' # {ref} {deg}");
  CHECK(metric(x, xw) == doctest::Approx(-1.5));

  const QualityMetric junk = external_metric_command("echo not-a-number # {ref} {deg}");
  CHECK_THROWS_AS(junk(x, xw), Error);
}
