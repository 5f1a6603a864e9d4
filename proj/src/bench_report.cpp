#include "tfwm/bench_report.hpp"

#include <cstdio>
#include <fstream>

#include "tfwm/errors.hpp"
#include "tfwm/payload_io.hpp"

namespace tfwm {

namespace {

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

const Payload& payload_for(const BenchInputs& in, std::size_t clip_index) {
  return in.payloads.size() == 1 ? in.payloads[0] : in.payloads[clip_index];
}

}  // namespace

BenchReport run_matrix(const BenchInputs& in) {
  if (in.clips.empty()) fail(ErrorClass::usage, "bench corpus is empty");
  if (in.clip_ids.size() != in.clips.size())
    fail(ErrorClass::usage, "clip id list does not match corpus");
  if (in.payloads.size() != 1 && in.payloads.size() != in.clips.size())
    fail(ErrorClass::usage, "need one payload, or one per clip");
  if (in.variants.empty()) fail(ErrorClass::usage, "no scheme variants requested");

  BenchReport report;
  report.config_echo = in.base_config;

  for (const BenchVariant& variant : in.variants) {
    BenchReport::VariantBlock block;
    block.variant = variant;

    // one row per attack plus the no-attack control row
    block.rows.emplace_back();
    block.rows.back().attack_label = "none";
    for (const AttackSpec& attack : in.attacks) {
      block.rows.emplace_back();
      block.rows.back().attack_label = attack.label();
      block.rows.back().attack = attack;
    }

    for (std::size_t ci = 0; ci < in.clips.size(); ++ci) {
      const AudioClip& clip = in.clips[ci];
      const Payload& payload = payload_for(in, ci);

      EmbedConfig config = in.base_config;
      config.transform = variant.transform;
      config.iss = variant.iss;
      config.payload_bits = payload.size();

      ClipQuality quality;
      quality.clip_id = in.clip_ids[ci];

      std::string embed_error;
      std::optional<EmbedResult> embedded;
      try {
        if (in.tuner) {
          const TuneResult tuned =
              tune_alpha(clip, payload, config, *in.tuner, in.metric);
          config = tuned.config;
        }
        embedded = embed(clip, payload, config);
        quality.alpha = config.alpha;
        quality.dwr_db = embedded->record.dwr_db;
        quality.grade = in.metric ? in.metric(clip, embedded->watermarked)
                                  : odg_proxy(clip, embedded->watermarked);
        quality.recovery = verify_recovery(
            embedded->record.selection, selection_of(embedded->watermarked, config));
      } catch (const Error& e) {
        embed_error = std::string(error_class_name(e.cls())) + ": " + e.what();
      }
      block.quality_row.push_back(quality);

      for (BenchRow& row : block.rows) {
        BenchCell cell;
        cell.clip_id = in.clip_ids[ci];
        if (!embed_error.empty()) {
          cell.failed = true;
          cell.error = embed_error;
        } else {
          try {
            const AudioClip attacked =
                row.attack ? apply_attack(embedded->watermarked, *row.attack)
                           : embedded->watermarked;
            const Payload extracted = extract(attacked, config);
            cell.dr_percent = detection_rate(payload.bits, extracted.bits);
          } catch (const Error& e) {
            cell.failed = true;
            cell.error = std::string(error_class_name(e.cls())) + ": " + e.what();
          }
        }
        row.cells.push_back(std::move(cell));
      }
    }

    for (BenchRow& row : block.rows) {
      double sum = 0.0;
      int ok = 0;
      for (const BenchCell& cell : row.cells) {
        if (cell.failed) continue;
        sum += cell.dr_percent;
        ++ok;
      }
      row.average_dr = ok ? sum / ok : 0.0;
    }
    report.blocks.push_back(std::move(block));
  }
  return report;
}

void render_logo(std::span<const int> bits, int rows, int cols, const std::string& path) {
  write_pbm(bits, rows, cols, path);
}

void emit_csv(const BenchReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorClass::io, "cannot open '" + path + "' for writing");
  out << "scheme,transform,attack,param,clip_id,dr_percent,dwr_db,quality_grade,seed\n";
  for (const auto& block : report.blocks) {
    const std::string scheme = block.variant.iss ? "iss" : "ss";
    const std::string transform =
        block.variant.transform == TransformKind::stft ? "stft" : "stct";
    for (const auto& row : block.rows) {
      std::string kind = "none", param = "0";
      std::uint64_t seed = 0;
      if (row.attack) {
        switch (row.attack->kind) {
          case AttackSpec::Kind::requantize: kind = "requantize"; break;
          case AttackSpec::Kind::awgn: kind = "awgn"; break;
          case AttackSpec::Kind::amplitude_scale: kind = "amplitude_scale"; break;
          case AttackSpec::Kind::compress_proxy: kind = "compress_proxy"; break;
          case AttackSpec::Kind::external_codec: kind = "external_codec"; break;
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", row.attack->param);
        param = buf;
        seed = row.attack->seed;
      }
      for (std::size_t ci = 0; ci < row.cells.size(); ++ci) {
        const BenchCell& cell = row.cells[ci];
        const ClipQuality& q = block.quality_row[ci];
        out << scheme << ',' << transform << ',' << kind << ',' << param << ','
            << cell.clip_id << ',';
        if (cell.failed)
          out << "error";
        else
          out << fixed4(cell.dr_percent);
        out << ',' << fixed4(q.dwr_db) << ',' << fixed4(q.grade) << ',' << seed << '\n';
      }
    }
  }
  if (!out) fail(ErrorClass::io, "short write to '" + path + "'");
}

void emit_markdown(const BenchReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorClass::io, "cannot open '" + path + "' for writing");

  for (const auto& block : report.blocks) {
    out << "## " << block.variant.name() << "\n\n";

    out << "| Clip | alpha | DWR (dB) | Grade | Recovery |\n";
    out << "|---|---|---|---|---|\n";
    for (const auto& q : block.quality_row)
      out << "| " << q.clip_id << " | " << fixed4(q.alpha) << " | " << fixed2(q.dwr_db)
          << " | " << fixed2(q.grade) << " | " << fixed2(q.recovery) << " |\n";
    out << "\n";

    out << "| Attack |";
    for (const auto& cell : block.rows.front().cells) out << ' ' << cell.clip_id << " |";
    out << " Average |\n|---|";
    for (std::size_t i = 0; i < block.rows.front().cells.size(); ++i) out << "---|";
    out << "---|\n";
    for (const auto& row : block.rows) {
      out << "| " << row.attack_label << " |";
      for (const auto& cell : row.cells) {
        if (cell.failed)
          out << " error |";
        else
          out << ' ' << fixed2(cell.dr_percent) << " |";
      }
      out << ' ' << fixed2(row.average_dr) << " |\n";
    }
    out << "\n";
  }
  if (!out) fail(ErrorClass::io, "short write to '" + path + "'");
}

}  // namespace tfwm
