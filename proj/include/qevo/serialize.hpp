#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qevo/evolve.hpp"
#include "qevo/qnn.hpp"

namespace qevo {

inline constexpr std::uint32_t kGenomeFormatVersion = 1;
inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

// Genome files carry a header (input width, depth, hidden widths, output
// width) followed by the phase array. Both encodings round-trip bit-exactly:
// the binary form stores IEEE-754 little-endian doubles, the text form uses
// hexadecimal floating-point literals.
//
// Binary layout:
//   "QEVOGNM\0"  magic (8 bytes)
//   u32 version, u32 reserved
//   u64 input_width, u64 depth, u64 hidden_width * depth, u64 output_width
//   u64 phase_count, f64 phase * phase_count
std::vector<std::uint8_t> encode_genome_binary(const NetworkGenome &genome);
NetworkGenome decode_genome_binary(const std::vector<std::uint8_t> &bytes);

std::string encode_genome_text(const NetworkGenome &genome);
NetworkGenome decode_genome_text(const std::string &text);

void save_genome(const NetworkGenome &genome, const std::filesystem::path &path);
/// Detects the encoding from the leading magic.
NetworkGenome load_genome(const std::filesystem::path &path);

std::string encode_checkpoint(const Checkpoint &checkpoint);
Checkpoint decode_checkpoint(const std::string &text);

void save_checkpoint(const Checkpoint &checkpoint, const std::filesystem::path &path);
Checkpoint load_checkpoint(const std::filesystem::path &path);

} // namespace qevo
