#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "coregae/dense.h"

namespace coregae {

// Embedding rows with the original node id of each row.
struct Embedding {
  DenseMatrix z;
  std::vector<std::uint64_t> ids;
};

// TSV: original_id followed by f values per line.
void write_embedding_tsv(const std::filesystem::path& path, const DenseMatrix& z,
                         std::span<const std::uint64_t> ids);
Embedding read_embedding_tsv(const std::filesystem::path& path);

// Binary: "GAEZ", u8 version 1, u64 n, u64 f, then n*f little-endian f64
// row-major. Row ids are not stored; they live in the id-map sidecar.
void write_embedding_gaez(const std::filesystem::path& path, const DenseMatrix& z);
DenseMatrix read_embedding_gaez(const std::filesystem::path& path);

// Writes by extension: ".gaez" binary (plus "<path>.ids" sidecar), anything
// else TSV.
void write_embedding(const std::filesystem::path& path, const DenseMatrix& z,
                     std::span<const std::uint64_t> ids);
// Reads either format. For GAEZ, ids come from `<path>.ids` when present,
// otherwise 0..n-1.
Embedding read_embedding(const std::filesystem::path& path);

bool is_gaez_file(const std::filesystem::path& path);

}  // namespace coregae
