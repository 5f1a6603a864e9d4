// Acceptance suite: runs every gate criterion on the synthetic desk corpus and
// prints one PASS/FAIL line per criterion. Exit status 0 only if all pass.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "support/corpus.hpp"
#include "support/reference_pipeline.hpp"
#include "tfwm/attack_sim.hpp"
#include "tfwm/bench_report.hpp"
#include "tfwm/errors.hpp"
#include "tfwm/keyed_rng.hpp"
#include "tfwm/payload_io.hpp"
#include "tfwm/quality.hpp"
#include "tfwm/ss_core.hpp"

using namespace tfwm;
namespace ts = tfwm::testsupport;
namespace fs = std::filesystem;

namespace {

struct Gate {
  bool all_pass = true;
  void report(int number, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s  %2d %-24s %s\n", pass ? "PASS" : "FAIL", number, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && pass;
  }
};

std::string fmt(double v, int prec = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

struct TunedClip {
  std::string id;
  AudioClip host;
  Payload payload;
  EmbedConfig config;       // tuned STFT-ISS
  EmbedResult embedded;     // at the tuned alpha
  QualityReport quality;
  bool tuner_converged = false;
};

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

int main() {
  Gate gate;
  const fs::path out_dir =
      fs::temp_directory_path() / ("tfwm_acceptance_" + std::to_string(getpid()));
  fs::create_directories(out_dir);
  std::printf("artifacts: %s\n", out_dir.c_str());

  const TunerConfig tuner;  // target -1.0, tolerance 0.1
  const QualityMetric metric = [](const AudioClip& a, const AudioClip& b) {
    return odg_proxy(a, b);
  };

  // ---- corpus preparation: four ~10 s clips, tuned STFT-ISS embeddings ----
  std::vector<TunedClip> corpus;
  {
    std::uint64_t payload_seed = 900;
    for (auto& [id, clip] : ts::acceptance_corpus()) {
      TunedClip tc;
      tc.id = id;
      tc.host = std::move(clip);
      tc.payload = random_payload(32, payload_seed++);
      EmbedConfig base;  // spec defaults: M0=1024, 60:2800, W=16, P=32, STFT-ISS
      const TuneResult tuned = tune_alpha(tc.host, tc.payload, base, tuner, metric);
      tc.config = tuned.config;
      tc.quality = tuned.report;
      tc.tuner_converged = tuned.converged;
      tc.embedded = embed(tc.host, tc.payload, tc.config);
      corpus.push_back(std::move(tc));
    }
  }

  // ---- 1: closed-loop ISS exactness at defaults ----
  {
    bool pass = true;
    std::string detail;
    for (const TunedClip& tc : corpus) {
      const auto t0 = std::chrono::steady_clock::now();
      const EmbedResult result = embed(tc.host, tc.payload, tc.config);
      const Payload got = extract(result.watermarked, tc.config);
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const double dr = detection_rate(tc.payload.bits, got.bits);
      pass = pass && dr == 100.0 && seconds < 5.0;
      detail += tc.id + ":DR=" + fmt(dr, 1) + "/" + fmt(seconds, 2) + "s ";
    }
    gate.report(1, "closed-loop-iss", pass, detail);
  }

  // ---- 2: feature invariance (STFT exact; STCT informational) ----
  {
    bool pass = true;
    bool stct_weaker_somewhere = false;
    std::string detail;
    for (const TunedClip& tc : corpus) {
      const double stft_rec = verify_recovery(
          tc.embedded.record.selection, selection_of(tc.embedded.watermarked, tc.config));
      pass = pass && stft_rec == 1.0;

      EmbedConfig stct_cfg = tc.config;
      stct_cfg.transform = TransformKind::stct;
      const EmbedResult stct = embed(tc.host, tc.payload, stct_cfg);
      const double stct_rec = verify_recovery(
          stct.record.selection, selection_of(stct.watermarked, stct_cfg));
      if (stct_rec < stft_rec) stct_weaker_somewhere = true;
      detail += tc.id + ":stft=" + fmt(stft_rec, 3) + ",stct=" + fmt(stct_rec, 3) + " ";
    }
    detail += stct_weaker_somewhere ? "(stct weaker: as expected)" : "(stct not weaker)";
    gate.report(2, "feature-invariance", pass, detail);
  }

  // ---- 3: amplitude-scaling invariance, SS and ISS, zero tolerance ----
  {
    bool pass = true;
    for (const TunedClip& tc : corpus) {
      for (bool iss : {true, false}) {
        EmbedConfig cfg = tc.config;
        cfg.iss = iss;
        const EmbedResult result = embed(tc.host, tc.payload, cfg);
        const Payload base = extract(result.watermarked, cfg);
        for (double c : {1.2, 1.8}) {
          const Payload scaled = extract(amplitude_scale(result.watermarked, c), cfg);
          pass = pass && scaled.bits == base.bits;
        }
      }
    }
    gate.report(3, "amplitude-scaling", pass, pass ? "bit-identical at x1.2 and x1.8" : "mismatch");
  }

  // ---- 4: AWGN robustness bands over 10 seeds ----
  {
    std::vector<double> dr50, dr30;
    for (const TunedClip& tc : corpus) {
      for (std::uint64_t seed = 201; seed <= 210; ++seed) {
        const Payload got50 =
            extract(awgn(tc.embedded.watermarked, 50.0, seed), tc.config);
        const Payload got30 =
            extract(awgn(tc.embedded.watermarked, 30.0, seed), tc.config);
        dr50.push_back(detection_rate(tc.payload.bits, got50.bits));
        dr30.push_back(detection_rate(tc.payload.bits, got30.bits));
      }
    }
    const double avg50 = mean(dr50), avg30 = mean(dr30);
    const bool pass = avg50 >= 99.0 && avg30 >= 85.0;
    gate.report(4, "awgn-bands", pass,
                "avg50dB=" + fmt(avg50) + "% avg30dB=" + fmt(avg30) + "%");
  }

  // ---- 5: 8-bit requantization ----
  {
    bool pass = true;
    std::string detail;
    for (const TunedClip& tc : corpus) {
      const Payload got = extract(requantize(tc.embedded.watermarked, 8), tc.config);
      const double dr = detection_rate(tc.payload.bits, got.bits);
      pass = pass && dr >= 95.0;
      detail += tc.id + "=" + fmt(dr, 1) + "% ";
    }
    gate.report(5, "requantize-8bit", pass, detail);
  }

  // ---- 6: compression proxy bands (real codec optional, non-gating) ----
  {
    std::vector<double> dr128, dr64;
    for (const TunedClip& tc : corpus) {
      const double s128 = proxy_strength_for_bitrate(128.0);
      const double s64 = proxy_strength_for_bitrate(64.0);
      const Payload got128 =
          extract(compress_proxy(tc.embedded.watermarked, s128), tc.config);
      const Payload got64 =
          extract(compress_proxy(tc.embedded.watermarked, s64), tc.config);
      dr128.push_back(detection_rate(tc.payload.bits, got128.bits));
      dr64.push_back(detection_rate(tc.payload.bits, got64.bits));
    }
    const double avg128 = mean(dr128), avg64 = mean(dr64);
    bool pass = avg128 >= 95.0 && avg64 >= 80.0;
    std::string detail = "avg128k=" + fmt(avg128) + "% avg64k=" + fmt(avg64) + "%";
    if (std::system("command -v lame > /dev/null 2>&1") == 0) {
      std::vector<double> dr_mp3;
      const std::string cmd =
          "lame --quiet -b {kbps} {in} {out}.mp3 && lame --quiet --decode {out}.mp3 {out} "
          "&& rm -f {out}.mp3";
      for (const TunedClip& tc : corpus) {
        const Payload got =
            extract(external_codec(tc.embedded.watermarked, cmd, 128.0), tc.config);
        dr_mp3.push_back(detection_rate(tc.payload.bits, got.bits));
      }
      const double avg_mp3 = mean(dr_mp3);
      detail += " mp3-128k=" + fmt(avg_mp3) + "%";
      pass = pass && avg_mp3 >= 95.0;
    } else {
      detail += " (no mp3 encoder installed; real-codec check skipped)";
    }
    gate.report(6, "compression-proxy", pass, detail);
  }

  // ---- 7: imperceptibility band at the tuned alpha ----
  {
    bool pass = true;
    std::string detail;
    for (const TunedClip& tc : corpus) {
      const double dwr = tc.embedded.record.dwr_db;
      const double grade = tc.quality.grade;
      const bool ok = dwr >= 30.0 && dwr <= 50.0 && grade >= -1.1 && grade <= 0.0;
      pass = pass && ok;
      detail += tc.id + ":dwr=" + fmt(dwr, 1) + ",grade=" + fmt(grade) + " ";
    }
    gate.report(7, "imperceptibility", pass, detail);
  }

  // ---- 8: small-instance oracle equivalence, 100 random trials ----
  {
    EmbedConfig small;
    small.frame_length = 16;
    small.band_lo_hz = 1000.0;  // bins 1..6 at 16 kHz, M = 6
    small.band_hi_hz = 6900.0;
    small.patch_window = 2;
    small.payload_bits = 2;
    small.alpha = 0.25;

    int matched = 0, payload_hits = 0;
    KeyedRng rng(4242);
    for (int trial = 0; trial < 100; ++trial) {
      AudioClip host;
      host.sample_rate_hz = 16000;
      host.samples.resize(256);
      for (auto& v : host.samples) v = rng.next_unit() - 0.5;
      small.pn_key = 10000 + static_cast<std::uint64_t>(trial);
      const Payload payload = random_payload(2, 5000 + static_cast<std::uint64_t>(trial));

      const EmbedResult prod = embed(host, payload, small);
      const Payload prod_bits = extract(prod.watermarked, small);

      const ts::ReferenceResult ref = ts::reference_stft_pipeline(
          host.samples, host.sample_rate_hz, small, payload.bits,
          [&](std::size_t i) {
            return pn_sequence(small.pn_key, small.pn_shared ? 0 : i, 4);
          });

      double max_sample_diff = 0.0;
      for (std::size_t i = 0; i < host.samples.size(); ++i)
        max_sample_diff = std::max(
            max_sample_diff, std::fabs(prod.watermarked.samples[i] - ref.watermarked[i]));

      const TfImage img_w = forward(frame(prod.watermarked, 16), TransformKind::stft,
                                    small.band_lo_hz, small.band_hi_hz, 16000);
      double max_band_diff = 0.0;
      for (int r = 0; r < img_w.band_rows(); ++r)
        for (std::size_t c = 0; c < img_w.cols(); ++c)
          max_band_diff =
              std::max(max_band_diff, std::abs(img_w.band_at(r, c) -
                                               ref.band_embedded[static_cast<std::size_t>(r)][c]));

      const bool ok = max_sample_diff <= 1e-9 && max_band_diff <= 1e-9 &&
                      prod_bits.bits == ref.extracted_bits;
      if (ok) ++matched;
      if (prod_bits.bits == payload.bits) ++payload_hits;
    }
    gate.report(8, "small-instance-oracle", matched == 100,
                "matched=" + std::to_string(matched) + "/100 (closed-loop payload hits " +
                    std::to_string(payload_hits) + "/100)");
  }

  // ---- 9: metric identities ----
  {
    bool pass = true;
    for (int p : {1, 32, 1024}) {
      const Payload w = random_payload(p, 77);
      std::vector<int> neg = w.bits;
      for (int& b : neg) b = -b;
      pass = pass && detection_rate(w.bits, w.bits) == 100.0 &&
             detection_rate(w.bits, neg) == 0.0;
    }
    AudioClip x;
    x.sample_rate_hz = 44100;
    x.samples.assign(625, 0.5);  // energy 156.25
    AudioClip xw = x;
    xw.samples[0] += 0.125;  // distortion 0.015625 -> ratio exactly 1e4
    pass = pass && std::fabs(dwr_db(x, xw) - 40.0) <= 1e-9;

    const AudioClip& probe = corpus[0].host;
    double noise = 0.0;
    const AudioClip noisy = awgn(probe, 30.0, 55);
    for (std::size_t i = 0; i < probe.samples.size(); ++i) {
      const double d = noisy.samples[i] - probe.samples[i];
      noise += d * d;
    }
    noise /= static_cast<double>(probe.samples.size());
    const double measured = snr_db(noisy, noise);
    pass = pass && std::fabs(measured - 30.0) <= 0.2;
    gate.report(9, "metric-identities", pass, "dwr-40dB exact, awgn snr=" + fmt(measured));
  }

  // ---- 10: logo recovery on the long host ----
  {
    const AudioClip host = ts::logo_host_clip();
    const Payload logo = ts::test_logo_32x32();
    EmbedConfig cfg;
    cfg.payload_bits = 1024;

    const std::size_t frames_count = (host.length() + 1023) / 1024;
    const int capacity = 4 * static_cast<int>(frames_count / 16);

    const TuneResult tuned = tune_alpha(host, logo, cfg, tuner, metric);
    const EmbedResult result = embed(host, logo, tuned.config);
    const Payload clean = extract(result.watermarked, tuned.config);
    const bool exact = clean.bits == logo.bits;

    const Payload noisy =
        extract(awgn(result.watermarked, 30.0, 777), tuned.config);
    int pixel_errors = 0;
    for (std::size_t i = 0; i < logo.bits.size(); ++i)
      if (noisy.bits[i] != logo.bits[i]) ++pixel_errors;
    const double error_rate = 100.0 * pixel_errors / 1024.0;

    render_logo(logo.bits, 32, 32, (out_dir / "logo_original.pbm").string());
    render_logo(clean.bits, 32, 32, (out_dir / "logo_recovered.pbm").string());
    render_logo(noisy.bits, 32, 32, (out_dir / "logo_recovered_awgn30.pbm").string());

    const bool pass = capacity >= 1024 && exact && error_rate <= 15.0;
    gate.report(10, "logo-recovery", pass,
                "capacity=" + std::to_string(capacity) + " exact=" +
                    (exact ? "yes" : "no") + " awgn30-pixel-errors=" + fmt(error_rate, 1) +
                    "%");
  }

  // ---- 11: whole-bench determinism ----
  {
    BenchInputs inputs;
    for (const TunedClip& tc : corpus) {
      inputs.clip_ids.push_back(tc.id);
      inputs.clips.push_back(tc.host);
    }
    inputs.payloads = {random_payload(32, 31337)};
    inputs.base_config = EmbedConfig{};
    inputs.tuner = tuner;
    inputs.metric = metric;
    inputs.attacks = {
        AttackSpec::requantize(8),          AttackSpec::awgn(30.0, 7),
        AttackSpec::awgn(50.0, 8),          AttackSpec::amplitude_scale(1.2),
        AttackSpec::amplitude_scale(1.8),   AttackSpec::compress_proxy(0.8),
        AttackSpec::compress_proxy(0.6),
    };
    inputs.variants = {{TransformKind::stft, true}};

    const BenchReport r1 = run_matrix(inputs);
    const BenchReport r2 = run_matrix(inputs);
    emit_csv(r1, (out_dir / "bench_run1.csv").string());
    emit_csv(r2, (out_dir / "bench_run2.csv").string());

    const auto slurp = [](const fs::path& p) {
      std::ifstream in(p, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      return ss.str();
    };
    const std::string c1 = slurp(out_dir / "bench_run1.csv");
    const bool pass = !c1.empty() && c1 == slurp(out_dir / "bench_run2.csv");
    gate.report(11, "bench-determinism", pass,
                pass ? "two runs byte-identical" : "reports differ");
  }

  std::printf("%s\n", gate.all_pass ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED");
  return gate.all_pass ? 0 : 1;
}
