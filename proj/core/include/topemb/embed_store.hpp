#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "topemb/matrix.hpp"

namespace topemb {

// Vectors whose norm is already within this distance of 1 are left untouched
// by normalize(), which makes normalization exactly idempotent.
inline constexpr double kUnitTolerance = 1e-6;
inline constexpr double kZeroNormThreshold = 1e-12;

// N vectors of dimension D drawn from one modality (or, after
// concat_modalities, several modalities tagged per row).
struct EmbeddingSet {
  Matrix vectors;  // N×D
  std::string modality;
  std::vector<std::int64_t> ids;
  // Per-row modality tags; empty means every row belongs to `modality`.
  std::vector<std::string> row_modality;

  std::size_t count() const noexcept { return vectors.rows(); }
  std::size_t dim() const noexcept { return vectors.cols(); }
  const std::string& modality_of(std::size_t row) const {
    return row_modality.empty() ? modality : row_modality[row];
  }
};

// Builds a set with ids 0..N-1. Throws InvalidArgument unless N ≥ 1, D ≥ 2.
EmbeddingSet make_set(Matrix vectors, std::string modality);

// Checks the structural invariants (sizes, sorted unique ids).
void validate(const EmbeddingSet& set);

// Two aligned sets: row i of `a` is paired with row i of `b`.
struct PairedDataset {
  EmbeddingSet a;
  EmbeddingSet b;
  std::string name;

  std::size_t count() const noexcept { return a.count(); }
  std::size_t dim() const noexcept { return a.dim(); }
};

PairedDataset make_paired(EmbeddingSet a, EmbeddingSet b, std::string name);

struct ManifestEntry {
  std::string path;  // relative to the manifest's directory
  std::string modality;
  std::uint64_t n = 0;
  std::uint32_t d = 0;
  bool normalized = true;  // false: load raw vectors without normalizing
};

struct Manifest {
  int version = 1;
  std::string name;
  std::vector<ManifestEntry> sets;
  std::string notes;
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

// TOPE payload: "TOPE", u32 version, u32 D, u64 N, N×D little-endian f32.
struct PayloadHeader {
  std::uint32_t version = 1;
  std::uint32_t d = 0;
  std::uint64_t n = 0;
};

inline constexpr std::uint32_t kPayloadVersion = 1;
inline constexpr std::size_t kPayloadHeaderBytes = 4 + 4 + 4 + 8;

PayloadHeader read_payload_header(const std::filesystem::path& path);
Matrix read_payload(const std::filesystem::path& path);
// Values are narrowed to binary32.
void write_payload(const std::filesystem::path& path, const Matrix& vectors);

PairedDataset load_dataset(const std::filesystem::path& manifest_path);

// Writes <dir>/<stem>_a.tope, <dir>/<stem>_b.tope and <dir>/manifest.json,
// returning the manifest path. Round-trips bit-exactly for values that are
// representable in binary32.
std::filesystem::path save_dataset(const PairedDataset& ds,
                                   const std::filesystem::path& dir,
                                   bool normalize_on_load = true,
                                   const std::string& notes = {});

// Rescales every row to unit norm. Throws ZeroVector for rows with norm
// below kZeroNormThreshold.
EmbeddingSet normalize(const EmbeddingSet& set);
void normalize_rows(Matrix& vectors);

// Stacks setA over setB (2N rows) keeping a modality tag per row.
EmbeddingSet concat_modalities(const PairedDataset& ds);

// Rounds every entry to the nearest binary32 value, i.e. the stored
// representation.
void round_to_storage(Matrix& vectors);

}  // namespace topemb
