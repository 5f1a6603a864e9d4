// Command line front end: embed, extract, attack, tune, bench, inspect.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tfwm/attack_sim.hpp"
#include "tfwm/bench_report.hpp"
#include "tfwm/errors.hpp"
#include "tfwm/payload_io.hpp"
#include "tfwm/quality.hpp"
#include "tfwm/ss_core.hpp"

namespace {

using namespace tfwm;

struct CommonOpts {
  EmbedConfig config;
  TunerConfig tuner;
  std::string config_path;
  std::string transform = "stft";
  std::string scheme = "iss";
  std::string select = "energy";
  std::string band = "60:2800";
  std::string metric_cmd;
  bool fixed_alpha = false;
};

void add_embedding_options(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config_path,
                  "key=value config file; explicit flags take precedence");
  sub->add_option("--transform", o.transform, "transform kind: stft|stct")
      ->check(CLI::IsMember({"stft", "stct"}));
  sub->add_option("--scheme", o.scheme, "embedding scheme: ss|iss")
      ->check(CLI::IsMember({"ss", "iss"}));
  sub->add_option("--frame", o.config.frame_length, "samples per frame (M0)");
  sub->add_option("--band", o.band, "embedding band f1:f2 in Hz");
  sub->add_option("--patch", o.config.patch_window, "patch window W");
  sub->add_option("--bits", o.config.payload_bits, "payload size P");
  sub->add_option("--alpha", o.config.alpha,
                  "fixed embedding strength in (0,1); skips the tuner");
  sub->add_option("--target-odg", o.tuner.target_grade, "tuner quality target");
  sub->add_option("--odg-tolerance", o.tuner.tolerance, "tuner tolerance");
  sub->add_option("--tuner-iterations", o.tuner.max_iterations, "tuner iteration cap");
  sub->add_option("--pn-key", o.config.pn_key, "PN sequence key");
  sub->add_flag("--pn-shared", o.config.pn_shared, "reuse one PN sequence for all bits");
  sub->add_option("--select", o.select, "patch selection: energy|keyed")
      ->check(CLI::IsMember({"energy", "keyed"}));
  sub->add_option("--select-key", o.config.selection_key, "keyed selection key");
  sub->add_option("--metric-cmd", o.metric_cmd,
                  "external quality metric command with {ref} and {deg} placeholders");
}

void apply_config_file(CLI::App* sub, CommonOpts& o) {
  const auto kv = read_record(o.config_path);  // same key=value format as records
  const auto fresh = [sub](const char* flag) {
    return sub->count(std::string("--") + flag) == 0;
  };
  const auto parse_int = [](const std::string& k, const std::string& v) {
    try {
      return std::stoi(v);
    } catch (const std::exception&) {
      fail(ErrorClass::usage, "config key '" + k + "' is not an integer: " + v);
    }
  };
  const auto parse_double = [](const std::string& k, const std::string& v) {
    try {
      return std::stod(v);
    } catch (const std::exception&) {
      fail(ErrorClass::usage, "config key '" + k + "' is not a number: " + v);
    }
  };

  for (const auto& [key, value] : kv) {
    if (key == "transform") {
      if (fresh("transform")) o.transform = value;
    } else if (key == "scheme") {
      if (fresh("scheme")) o.scheme = value;
    } else if (key == "frame") {
      if (fresh("frame")) o.config.frame_length = parse_int(key, value);
    } else if (key == "band") {
      if (fresh("band")) o.band = value;
    } else if (key == "patch") {
      if (fresh("patch")) o.config.patch_window = parse_int(key, value);
    } else if (key == "bits") {
      if (fresh("bits")) o.config.payload_bits = parse_int(key, value);
    } else if (key == "alpha") {
      if (fresh("alpha")) {
        o.config.alpha = parse_double(key, value);
        o.fixed_alpha = true;
      }
    } else if (key == "target-odg") {
      if (fresh("target-odg")) o.tuner.target_grade = parse_double(key, value);
    } else if (key == "odg-tolerance") {
      if (fresh("odg-tolerance")) o.tuner.tolerance = parse_double(key, value);
    } else if (key == "tuner-iterations") {
      if (fresh("tuner-iterations")) o.tuner.max_iterations = parse_int(key, value);
    } else if (key == "pn-key") {
      if (fresh("pn-key")) o.config.pn_key = std::stoull(value);
    } else if (key == "pn-shared") {
      if (fresh("pn-shared")) o.config.pn_shared = value == "1" || value == "true";
    } else if (key == "select") {
      if (fresh("select")) o.select = value;
    } else if (key == "select-key") {
      if (fresh("select-key")) o.config.selection_key = std::stoull(value);
    } else if (key == "metric-cmd") {
      if (fresh("metric-cmd")) o.metric_cmd = value;
    } else {
      fail(ErrorClass::usage, "unknown config key '" + key + "'");
    }
  }
}

void finalize_options(CLI::App* sub, CommonOpts& o) {
  o.fixed_alpha = sub->count("--alpha") > 0;
  if (!o.config_path.empty()) apply_config_file(sub, o);
  if (o.transform != "stft" && o.transform != "stct")
    fail(ErrorClass::usage, "transform must be stft or stct");
  if (o.scheme != "ss" && o.scheme != "iss")
    fail(ErrorClass::usage, "scheme must be ss or iss");
  if (o.select != "energy" && o.select != "keyed")
    fail(ErrorClass::usage, "select must be energy or keyed");
  o.config.transform = o.transform == "stct" ? TransformKind::stct : TransformKind::stft;
  o.config.iss = o.scheme != "ss";
  o.config.selection =
      o.select == "keyed" ? SelectionMode::keyed_index : SelectionMode::energy_sort;
  const std::size_t colon = o.band.find(':');
  if (colon == std::string::npos)
    fail(ErrorClass::usage, "--band expects f1:f2, e.g. 60:2800");
  try {
    o.config.band_lo_hz = std::stod(o.band.substr(0, colon));
    o.config.band_hi_hz = std::stod(o.band.substr(colon + 1));
  } catch (const std::exception&) {
    fail(ErrorClass::usage, "--band expects numeric f1:f2");
  }
}

QualityMetric metric_for(const CommonOpts& o) {
  if (!o.metric_cmd.empty()) return external_metric_command(o.metric_cmd);
  return [](const AudioClip& x, const AudioClip& x_w) { return odg_proxy(x, x_w); };
}

std::string config_summary(const EmbedConfig& c) {
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "config: transform=%s scheme=%s frame=%d band=%g:%g patch=%d bits=%d "
                "select=%s pn-key=%llu",
                c.transform == TransformKind::stft ? "stft" : "stct",
                c.iss ? "iss" : "ss", c.frame_length, c.band_lo_hz, c.band_hi_hz,
                c.patch_window, c.payload_bits,
                c.selection == SelectionMode::energy_sort ? "energy" : "keyed",
                static_cast<unsigned long long>(c.pn_key));
  return buf;
}

Payload load_payload(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".pbm") return read_pbm(path);
  return read_bit_text(path);
}

AudioClip load_clip(const std::string& path, bool print_warnings = true) {
  WavReadResult r = read_wav(path);
  if (print_warnings)
    for (const auto& w : r.warnings) std::cerr << "warning: " << path << ": " << w << "\n";
  return std::move(r.clip);
}

int cmd_embed(CLI::App* sub, CommonOpts& o, const std::string& in,
              const std::string& payload_path, const std::string& out,
              const std::string& record_path) {
  finalize_options(sub, o);
  const AudioClip host = load_clip(in);
  Payload payload = load_payload(payload_path);
  if (sub->count("--bits") && o.config.payload_bits != payload.size())
    fail(ErrorClass::usage, "--bits disagrees with the payload file (" +
                                std::to_string(payload.size()) + " bits)");
  o.config.payload_bits = payload.size();

  std::optional<QualityReport> quality;
  if (!o.fixed_alpha) {
    const TuneResult tuned = tune_alpha(host, payload, o.config, o.tuner, metric_for(o));
    o.config = tuned.config;
    quality = tuned.report;
    std::cout << "tuned alpha=" << o.config.alpha << " grade=" << tuned.report.grade
              << (tuned.converged ? "" : tuned.bound_stop ? " (bound stop)" : " (budget)")
              << "\n";
  }

  const EmbedResult result = embed(host, payload, o.config);
  if (result.record.selection.at_capacity)
    std::cerr << "warning: payload occupies every patch; no minimum-energy headroom\n";
  if (!quality) {
    QualityReport q;
    q.dwr_db = result.record.dwr_db;
    q.grade = metric_for(o)(host, result.watermarked);
    q.metric_name = o.metric_cmd.empty() ? "odg-proxy" : "external";
    quality = q;
  }
  const WavWriteStats stats = write_wav(result.watermarked, out, 16);
  if (stats.clipped_samples)
    std::cerr << "warning: " << stats.clipped_samples << " samples clipped on write\n";
  if (!record_path.empty()) write_record(result.record, quality, record_path);

  std::cout << "embedded " << payload.size() << " bits into " << out
            << "  dwr=" << result.record.dwr_db << " dB grade=" << quality->grade << "\n";
  return 0;
}

int cmd_extract(CLI::App* sub, CommonOpts& o, const std::string& in,
                const std::string& out, const std::string& expected_path,
                const std::string& logo_dims) {
  finalize_options(sub, o);
  const AudioClip clip = load_clip(in);
  const Payload payload = extract(clip, o.config);
  std::cout << config_summary(o.config) << "\n";

  if (!logo_dims.empty()) {
    const std::size_t x = logo_dims.find('x');
    if (x == std::string::npos) fail(ErrorClass::usage, "--logo expects ROWSxCOLS");
    const int rows = std::stoi(logo_dims.substr(0, x));
    const int cols = std::stoi(logo_dims.substr(x + 1));
    write_pbm(payload.bits, rows, cols, out);
  } else {
    write_bit_text(payload.bits, out);
  }

  if (!expected_path.empty()) {
    const Payload expected = load_payload(expected_path);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", detection_rate(expected.bits, payload.bits));
    std::cout << "DR=" << buf << "\n";
  } else {
    std::cout << "extracted " << payload.size() << " bits to " << out << "\n";
  }
  return 0;
}

struct AttackOpts {
  std::string kind;
  int bits = 8;
  double snr = 30.0;
  std::uint64_t seed = 0;
  double factor = 1.0;
  double strength = 0.8;
  double kbps = 128.0;
  std::string codec_cmd;
};

int cmd_attack(const AttackOpts& a, const std::string& in, const std::string& out) {
  const AudioClip clip = load_clip(in);
  AudioClip attacked;
  if (a.kind == "requantize")
    attacked = requantize(clip, a.bits);
  else if (a.kind == "awgn")
    attacked = awgn(clip, a.snr, a.seed);
  else if (a.kind == "scale")
    attacked = amplitude_scale(clip, a.factor);
  else if (a.kind == "compress")
    attacked = compress_proxy(clip, a.strength);
  else if (a.kind == "codec")
    attacked = external_codec(clip, a.codec_cmd, a.kbps);
  else
    fail(ErrorClass::usage, "unknown attack kind '" + a.kind + "'");

  const WavWriteStats stats = write_wav(attacked, out, 16);
  if (stats.clipped_samples)
    std::cerr << "warning: " << stats.clipped_samples << " samples clipped on write\n";
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_tune(CLI::App* sub, CommonOpts& o, const std::string& in,
             const std::string& payload_path) {
  finalize_options(sub, o);
  const AudioClip host = load_clip(in);
  Payload payload = load_payload(payload_path);
  o.config.payload_bits = payload.size();

  const TuneResult tuned = tune_alpha(host, payload, o.config, o.tuner, metric_for(o));
  std::cout << "iter  alpha       grade    dwr_db   recovery\n";
  for (std::size_t i = 0; i < tuned.trace.size(); ++i) {
    const TuneStep& s = tuned.trace[i];
    std::printf("%4zu  %-10.6f  %-7.3f  %-7.2f  %.3f\n", i, s.alpha, s.grade, s.dwr_db,
                s.recovery);
  }
  std::cout << "tuned alpha=" << tuned.config.alpha
            << (tuned.converged ? " (converged)"
                                : tuned.bound_stop ? " (bound stop)" : " (budget exhausted)")
            << "\n";
  return 0;
}

int cmd_bench(CLI::App* sub, CommonOpts& o, const std::string& corpus_dir,
              const std::string& out_dir, const std::string& payload_path,
              std::uint64_t payload_seed, std::uint64_t attack_seed,
              const std::string& codec_cmd, bool all_variants) {
  finalize_options(sub, o);
  namespace fs = std::filesystem;

  BenchInputs inputs;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(corpus_dir))
    if (entry.path().extension() == ".wav") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) fail(ErrorClass::usage, "no .wav files in '" + corpus_dir + "'");
  for (const auto& f : files) {
    inputs.clip_ids.push_back(f.stem().string());
    inputs.clips.push_back(load_clip(f.string()));
  }

  if (!payload_path.empty())
    inputs.payloads.push_back(load_payload(payload_path));
  else
    inputs.payloads.push_back(random_payload(o.config.payload_bits, payload_seed));
  inputs.base_config = o.config;
  inputs.base_config.payload_bits = inputs.payloads[0].size();
  if (!o.fixed_alpha) inputs.tuner = o.tuner;
  inputs.metric = metric_for(o);

  inputs.attacks = {
      AttackSpec::requantize(8),
      AttackSpec::awgn(30.0, attack_seed),
      AttackSpec::awgn(50.0, attack_seed + 1),
      AttackSpec::amplitude_scale(1.2),
      AttackSpec::amplitude_scale(1.8),
      AttackSpec::compress_proxy(proxy_strength_for_bitrate(128.0)),
      AttackSpec::compress_proxy(proxy_strength_for_bitrate(64.0)),
  };
  if (!codec_cmd.empty()) {
    inputs.attacks.push_back(AttackSpec::external_codec(codec_cmd, 128.0));
    inputs.attacks.push_back(AttackSpec::external_codec(codec_cmd, 64.0));
  }

  if (all_variants)
    inputs.variants = {{TransformKind::stft, false},
                       {TransformKind::stft, true},
                       {TransformKind::stct, false},
                       {TransformKind::stct, true}};
  else
    inputs.variants = {{o.config.transform, o.config.iss}};

  const BenchReport report = run_matrix(inputs);

  fs::create_directories(out_dir);
  emit_csv(report, (fs::path(out_dir) / "report.csv").string());
  emit_markdown(report, (fs::path(out_dir) / "report.md").string());

  // echo the effective configuration next to the tables
  EmbedRecord echo;
  echo.config = inputs.base_config;
  echo.sample_rate_hz = inputs.clips[0].sample_rate_hz;
  echo.host_length = inputs.clips[0].length();
  write_record(echo, std::nullopt, (fs::path(out_dir) / "report_config.txt").string());

  std::cout << "wrote " << out_dir << "/report.csv and report.md ("
            << report.blocks.size() << " variants x " << inputs.clips.size()
            << " clips)\n";
  return 0;
}

int cmd_inspect(CLI::App* sub, CommonOpts& o, const std::string& in,
                const std::string& out_prefix, const std::string& record_path) {
  finalize_options(sub, o);
  const AudioClip clip = load_clip(in);
  o.config.validate(clip.sample_rate_hz);

  const FrameSet frames = frame(clip, o.config.frame_length);
  const TfImage image = forward(frames, o.config.transform, o.config.band_lo_hz,
                                o.config.band_hi_hz, clip.sample_rate_hz);
  const PatchGrid grid = partition(image, o.config.patch_window);
  const PatchSelection sel =
      select(grid, o.config.payload_bits, o.config.selection, o.config.selection_key);

  if (!out_prefix.empty()) {
    std::FILE* f = std::fopen((out_prefix + "_energies.csv").c_str(), "wb");
    if (!f) fail(ErrorClass::io, "cannot write energy map");
    for (int rb = 0; rb < grid.block_rows; ++rb) {
      for (int cb = 0; cb < grid.block_cols; ++cb)
        std::fprintf(f, "%s%.12g", cb ? "," : "",
                     grid.energies[static_cast<std::size_t>(rb * grid.block_cols + cb)]);
      std::fprintf(f, "\n");
    }
    std::fclose(f);
    f = std::fopen((out_prefix + "_selection.csv").c_str(), "wb");
    if (!f) fail(ErrorClass::io, "cannot write selection");
    std::fprintf(f, "order,row_block,col_block\n");
    for (std::size_t i = 0; i < sel.coords.size(); ++i)
      std::fprintf(f, "%zu,%d,%d\n", i, sel.coords[i].row_block, sel.coords[i].col_block);
    std::fclose(f);
  }

  std::cout << "grid " << grid.block_rows << "x" << grid.block_cols << " ("
            << grid.patch_count() << " patches, " << grid.dropped_cols
            << " columns dropped)\n";
  for (std::size_t i = 0; i < sel.coords.size(); ++i)
    std::cout << i << ": (" << sel.coords[i].row_block << ", " << sel.coords[i].col_block
              << ")\n";

  if (!record_path.empty()) {
    const auto kv = read_record(record_path);
    bool match = kv.count("selection.count") &&
                 std::stoul(kv.at("selection.count")) == sel.coords.size();
    for (std::size_t i = 0; match && i < sel.coords.size(); ++i) {
      const auto it = kv.find("selection." + std::to_string(i));
      const std::string want = std::to_string(sel.coords[i].row_block) + "," +
                               std::to_string(sel.coords[i].col_block);
      match = it != kv.end() && it->second == want;
    }
    std::cout << (match ? "selection matches record\n" : "selection DIFFERS from record\n");
    if (!match) return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"time-frequency patch audio watermarking toolkit"};
  app.require_subcommand(1);

  CommonOpts embed_opts, extract_opts, tune_opts, bench_opts, inspect_opts;
  std::string in, out, payload_path, record_path, expected_path, logo_dims;
  std::string corpus_dir, out_dir, bench_payload, codec_cmd;
  std::uint64_t payload_seed = 1, attack_seed = 7;
  bool all_variants = false;
  AttackOpts attack_opts;

  CLI::App* c_embed = app.add_subcommand("embed", "embed a payload into a WAV file");
  add_embedding_options(c_embed, embed_opts);
  c_embed->add_option("--in", in, "host WAV")->required();
  c_embed->add_option("--payload", payload_path, "payload file (.pbm or bit text)")
      ->required();
  c_embed->add_option("--out", out, "watermarked WAV")->required();
  c_embed->add_option("--record", record_path, "write the embedding record here");

  CLI::App* c_extract = app.add_subcommand("extract", "extract a payload from a WAV file");
  add_embedding_options(c_extract, extract_opts);
  c_extract->add_option("--in", in, "watermarked WAV")->required();
  c_extract->add_option("--out", out, "payload output file")->required();
  c_extract->add_option("--expected", expected_path, "reference payload; prints DR");
  c_extract->add_option("--logo", logo_dims, "write a PBM logo with ROWSxCOLS");

  CLI::App* c_attack = app.add_subcommand("attack", "apply a channel attack to a WAV file");
  c_attack->add_option("--in", in, "input WAV")->required();
  c_attack->add_option("--out", out, "attacked WAV")->required();
  c_attack->add_option("--kind", attack_opts.kind,
                       "requantize|awgn|scale|compress|codec")
      ->required()
      ->check(CLI::IsMember({"requantize", "awgn", "scale", "compress", "codec"}));
  c_attack->add_option("--bits", attack_opts.bits, "requantize: target depth");
  c_attack->add_option("--snr", attack_opts.snr, "awgn: target SNR in dB");
  c_attack->add_option("--seed", attack_opts.seed, "awgn: noise seed");
  c_attack->add_option("--factor", attack_opts.factor, "scale: amplitude factor");
  c_attack->add_option("--strength", attack_opts.strength, "compress: proxy strength");
  c_attack->add_option("--kbps", attack_opts.kbps, "codec: bitrate");
  c_attack->add_option("--codec-cmd", attack_opts.codec_cmd,
                       "codec: command with {in} {out} {kbps}");

  CLI::App* c_tune = app.add_subcommand("tune", "tune alpha against the quality target");
  add_embedding_options(c_tune, tune_opts);
  c_tune->add_option("--in", in, "host WAV")->required();
  c_tune->add_option("--payload", payload_path, "payload file")->required();

  CLI::App* c_bench = app.add_subcommand("bench", "run the robustness matrix over a corpus");
  add_embedding_options(c_bench, bench_opts);
  c_bench->add_option("corpus", corpus_dir, "directory of host WAV files")->required();
  c_bench->add_option("--out", out_dir, "report output directory")->required();
  c_bench->add_option("--payload", bench_payload, "payload file shared by all clips");
  c_bench->add_option("--payload-seed", payload_seed, "seed for the random payload");
  c_bench->add_option("--attack-seed", attack_seed, "seed for seeded attacks");
  c_bench->add_option("--codec-cmd", codec_cmd, "adds external codec rows");
  c_bench->add_flag("--all-variants", all_variants, "run STFT/STCT x SS/ISS");

  CLI::App* c_inspect =
      app.add_subcommand("inspect", "dump the patch energy map and selection");
  add_embedding_options(c_inspect, inspect_opts);
  c_inspect->add_option("--in", in, "WAV to analyze")->required();
  c_inspect->add_option("--out", out, "prefix for _energies.csv and _selection.csv");
  c_inspect->add_option("--record", record_path, "embedding record to cross-check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (c_embed->parsed())
      return cmd_embed(c_embed, embed_opts, in, payload_path, out, record_path);
    if (c_extract->parsed())
      return cmd_extract(c_extract, extract_opts, in, out, expected_path, logo_dims);
    if (c_attack->parsed()) return cmd_attack(attack_opts, in, out);
    if (c_tune->parsed()) return cmd_tune(c_tune, tune_opts, in, payload_path);
    if (c_bench->parsed())
      return cmd_bench(c_bench, bench_opts, corpus_dir, out_dir, bench_payload,
                       payload_seed, attack_seed, codec_cmd, all_variants);
    if (c_inspect->parsed())
      return cmd_inspect(c_inspect, inspect_opts, in, out, record_path);
  } catch (const TuningError& e) {
    std::cerr << "error (tuning-failure): " << e.what() << "\n";
    for (const TuneStep& s : e.trace)
      std::cerr << "  alpha=" << s.alpha << " grade=" << s.grade
                << " recovery=" << s.recovery << "\n";
    return exit_code_for(e.cls());
  } catch (const Error& e) {
    std::cerr << "error (" << error_class_name(e.cls()) << "): " << e.what() << "\n";
    return exit_code_for(e.cls());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
