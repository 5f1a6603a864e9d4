#include "tfwm/payload_io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tfwm/errors.hpp"

namespace tfwm {

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorClass::io, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spill(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorClass::io, "cannot open '" + path + "' for writing");
  out << content;
  if (!out) fail(ErrorClass::io, "short write to '" + path + "'");
}

// strips PBM comments and returns whitespace-separated tokens
std::vector<std::string> pbm_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  bool comment = false;
  for (char ch : text) {
    if (comment) {
      if (ch == '\n') comment = false;
      continue;
    }
    if (ch == '#') {
      comment = true;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) tokens.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

}  // namespace

Payload read_bit_text(const std::string& path) {
  const std::string text = slurp(path);
  Payload payload;
  payload.origin = Payload::Origin::random;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) continue;
    if (ch == '0')
      payload.bits.push_back(-1);
    else if (ch == '1')
      payload.bits.push_back(1);
    else
      fail(ErrorClass::format, "'" + path + "' holds character '" + std::string(1, ch) +
                                   "'; bit text allows only 0, 1 and whitespace");
  }
  if (payload.bits.empty()) fail(ErrorClass::format, "'" + path + "' holds no bits");
  return payload;
}

void write_bit_text(std::span<const int> bits, const std::string& path) {
  std::string text;
  text.reserve(bits.size() + 1);
  for (int b : bits) text.push_back(b > 0 ? '1' : '0');
  text.push_back('\n');
  spill(path, text);
}

Payload read_pbm(const std::string& path) {
  const auto tokens = pbm_tokens(slurp(path));
  if (tokens.size() < 3 || tokens[0] != "P1")
    fail(ErrorClass::format, "'" + path + "' is not a plain PBM (P1) file");
  int cols = 0, rows = 0;
  try {
    cols = std::stoi(tokens[1]);
    rows = std::stoi(tokens[2]);
  } catch (const std::exception&) {
    fail(ErrorClass::format, "'" + path + "' has a malformed PBM header");
  }
  if (cols <= 0 || rows <= 0)
    fail(ErrorClass::format, "'" + path + "' has non-positive PBM dimensions");
  const std::size_t expect = static_cast<std::size_t>(cols) * static_cast<std::size_t>(rows);

  Payload payload;
  payload.origin = Payload::Origin::logo;
  payload.logo_rows = rows;
  payload.logo_cols = cols;
  payload.bits.reserve(expect);
  for (std::size_t i = 3; i < tokens.size(); ++i) {
    for (char ch : tokens[i]) {  // plain PBM allows digit runs without spaces
      if (ch == '1')
        payload.bits.push_back(1);  // black
      else if (ch == '0')
        payload.bits.push_back(-1);
      else
        fail(ErrorClass::format, "'" + path + "' holds a non-bit PBM pixel");
    }
  }
  if (payload.bits.size() != expect)
    fail(ErrorClass::format, "'" + path + "' holds " + std::to_string(payload.bits.size()) +
                                 " pixels, header says " + std::to_string(expect));
  return payload;
}

void write_pbm(std::span<const int> bits, int rows, int cols, const std::string& path) {
  if (rows <= 0 || cols <= 0 ||
      static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) != bits.size())
    fail(ErrorClass::shape, "logo dimensions " + std::to_string(rows) + "x" +
                                std::to_string(cols) + " do not match " +
                                std::to_string(bits.size()) + " bits");
  std::string text = "P1\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n";
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c) text.push_back(' ');
      text.push_back(bits[static_cast<std::size_t>(r) * cols + c] > 0 ? '1' : '0');
    }
    text.push_back('\n');
  }
  spill(path, text);
}

void write_record(const EmbedRecord& record, const std::optional<QualityReport>& quality,
                  const std::string& path) {
  std::string text;
  char buf[128];
  const auto put = [&text](const std::string& key, const std::string& value) {
    text += key + "=" + value + "\n";
  };
  const auto put_f = [&](const std::string& key, double v) {
    std::snprintf(buf, sizeof buf, "%.12g", v);
    put(key, buf);
  };

  put("record.version", "1");
  put("config.frame_length", std::to_string(record.config.frame_length));
  put_f("config.band_lo_hz", record.config.band_lo_hz);
  put_f("config.band_hi_hz", record.config.band_hi_hz);
  put("config.patch_window", std::to_string(record.config.patch_window));
  put("config.payload_bits", std::to_string(record.config.payload_bits));
  put_f("config.alpha", record.config.alpha);
  put("config.scheme", record.config.iss ? "iss" : "ss");
  put("config.transform",
      record.config.transform == TransformKind::stft ? "stft" : "stct");
  put("config.selection",
      record.config.selection == SelectionMode::energy_sort ? "energy" : "keyed");
  put("config.selection_key", std::to_string(record.config.selection_key));
  put("config.pn_key", std::to_string(record.config.pn_key));
  put("config.pn_shared", record.config.pn_shared ? "1" : "0");
  put("host.sample_rate_hz", std::to_string(record.sample_rate_hz));
  put("host.length", std::to_string(record.host_length));
  put("grid.patch_count", std::to_string(record.patch_count));
  put("selection.count", std::to_string(record.selection.coords.size()));
  for (std::size_t i = 0; i < record.selection.coords.size(); ++i) {
    const auto& c = record.selection.coords[i];
    put("selection." + std::to_string(i),
        std::to_string(c.row_block) + "," + std::to_string(c.col_block));
  }
  for (std::size_t i = 0; i < record.host_correlations.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g", record.host_correlations[i].real(),
                  record.host_correlations[i].imag());
    put("phi." + std::to_string(i), buf);
  }
  put_f("metrics.dwr_db", record.dwr_db);
  if (quality) {
    put_f("metrics.grade", quality->grade);
    put("metrics.metric", quality->metric_name);
  }
  spill(path, text);
}

std::map<std::string, std::string> read_record(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorClass::io, "cannot open '" + path + "' for reading");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorClass::format, "'" + path + "' is not a key=value record");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

}  // namespace tfwm
