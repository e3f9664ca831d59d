#pragma once

// Portable field dumps.
//
// A dump is two files: `<stem>.json` (header) and `<stem>.bin` (payload).
// The payload is a flat array of IEEE-754 doubles, little-endian, each
// complex number written as (real, imag). Blocks appear in this order:
//
//   gauge links   for s in sites, for mu in {0, 1}, for r, for c: U_{s,mu}(r, c)
//   twist links   for s in sites, for mu in {0, 1}: l_{s,mu}
//   Higgs field   for s in sites, for r, for c: Phi_s(r, c)
//   metric        (only if present) for s in sites, for r, for c: H_s(r, c)
//
// i.e. site-major, axis-minor, row-major matrices. The header records the
// lattice size and volume, rank, gauge degree, twist degree, the seed that
// produced the fields and the block layout, so a reader can check the byte
// count before trusting the payload.

#include <cstdint>
#include <filesystem>
#include <optional>

#include "ymh/fields.hpp"

namespace ymh {

struct FieldDump {
  HiggsPair pair;
  std::optional<HermitianMetricField> metric;
  std::uint64_t seed = 0;
};

/// Throws FormatError on I/O failure.
void write_field_dump(const std::filesystem::path& stem, const FieldDump& dump);

/// Rebuilds the lattice from the header and validates sizes, unitarity and
/// the recorded degrees. Throws FormatError on any mismatch.
FieldDump read_field_dump(const std::filesystem::path& stem);

}  // namespace ymh
