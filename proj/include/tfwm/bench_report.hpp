#ifndef TFWM_BENCH_REPORT_HPP
#define TFWM_BENCH_REPORT_HPP

#include <optional>
#include <string>
#include <vector>

#include "tfwm/attack_sim.hpp"
#include "tfwm/quality.hpp"
#include "tfwm/ss_core.hpp"

namespace tfwm {

struct BenchVariant {
  TransformKind transform = TransformKind::stft;
  bool iss = true;

  std::string name() const {
    return std::string(transform == TransformKind::stft ? "STFT" : "STCT") +
           (iss ? "-ISS" : "-SS");
  }
};

struct BenchCell {
  std::string clip_id;
  double dr_percent = 0.0;
  bool failed = false;
  std::string error;
};

struct BenchRow {
  std::string attack_label;       // "none" for the control row
  std::optional<AttackSpec> attack;
  std::vector<BenchCell> cells;   // corpus order
  double average_dr = 0.0;
};

struct ClipQuality {
  std::string clip_id;
  double alpha = 0.0;
  double dwr_db = 0.0;
  double grade = 0.0;
  double recovery = 0.0;
};

struct BenchReport {
  EmbedConfig config_echo;
  std::uint64_t payload_seed = 0;

  struct VariantBlock {
    BenchVariant variant;
    std::vector<ClipQuality> quality_row;
    std::vector<BenchRow> rows;  // control row first, then the attack list
  };
  std::vector<VariantBlock> blocks;
};

struct BenchInputs {
  std::vector<std::string> clip_ids;
  std::vector<AudioClip> clips;
  std::vector<Payload> payloads;     // size 1 (shared) or one per clip
  std::vector<AttackSpec> attacks;
  std::vector<BenchVariant> variants;
  EmbedConfig base_config;
  std::optional<TunerConfig> tuner;  // absent = fixed alpha from base_config
  QualityMetric metric;              // used for the quality row
};

// Runs every (variant, clip, attack) cell: tune (or fixed alpha), embed,
// attack, extract, score. Per-cell failures are recorded in the report and
// never abort the matrix.
BenchReport run_matrix(const BenchInputs& inputs);

// Writes the recovered logo as a plain PBM, +1 = black, row major.
void render_logo(std::span<const int> bits, int rows, int cols, const std::string& path);

// Byte-deterministic table emission.
void emit_csv(const BenchReport& report, const std::string& path);
void emit_markdown(const BenchReport& report, const std::string& path);

}  // namespace tfwm

#endif
