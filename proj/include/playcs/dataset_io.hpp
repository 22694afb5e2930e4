// Binary dataset files. Fixed little-endian layout, stable across versions:
//
//   magic "PCSD" | u32 version=1 | u8 kind | u8 redraw_beamformer |
//   u16 reserved | u32 n | u32 m | u32 slots | u32 sparsity |
//   f64 snr_db | u64 seed | f64 angle_walk_std | f64 gain_ar_coeff |
//   f64 support_change_prob | f64 value_walk_std |
//   then per slot: truth (n c128), A (m*n c128 row-major),
//   R (m*m c128 row-major), y (m c128), noise (m c128)
//
// c128 = two f64 (re, im). Round-trips are bit-exact.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "playcs/signal_gen.hpp"

namespace playcs {

struct io_error : std::runtime_error {
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

std::string serialize_dataset(const SequenceDataset& ds);
SequenceDataset deserialize_dataset(const std::string& bytes);

void save_dataset(const SequenceDataset& ds, const std::string& path);
SequenceDataset load_dataset(const std::string& path);

// FNV-1a 64-bit content digest.
uint64_t fnv1a(const std::string& bytes);
uint64_t file_digest(const std::string& path);
std::string digest_hex(uint64_t digest);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace playcs
