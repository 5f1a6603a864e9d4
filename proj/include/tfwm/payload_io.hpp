#ifndef TFWM_PAYLOAD_IO_HPP
#define TFWM_PAYLOAD_IO_HPP

#include <map>
#include <optional>
#include <span>
#include <string>

#include "tfwm/quality.hpp"
#include "tfwm/ss_core.hpp"

namespace tfwm {

// Bit text: '0' -> -1, '1' -> +1, whitespace ignored.
Payload read_bit_text(const std::string& path);
void write_bit_text(std::span<const int> bits, const std::string& path);

// Plain PBM (P1) logos: black (1) -> +1, row major.
Payload read_pbm(const std::string& path);
void write_pbm(std::span<const int> bits, int rows, int cols, const std::string& path);

// Key-value text form of an embedding record, for audit and the inspect
// command. Metrics are attached when available.
void write_record(const EmbedRecord& record, const std::optional<QualityReport>& quality,
                  const std::string& path);
std::map<std::string, std::string> read_record(const std::string& path);

}  // namespace tfwm

#endif
