#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "sparsenet/model.hpp"
#include "sparsenet/pruning.hpp"

namespace sparsenet {

/// Binary model formats, little-endian throughout.
///
/// Shared header: magic (4 bytes), format version u32, layer count u32.
///
/// SND1 (dense) layer: rows u32, cols u32, activation u8,
///   weights (rows * cols f64, row-major), biases (rows f64).
/// SNZ1 (sparse) layer: rows u32, cols u32, activation u8, nnz u64,
///   row offsets ((rows + 1) u64), column indices (nnz u32),
///   values (nnz f64), biases (rows f64).
///
/// Activation tags: 0 = identity, 1 = relu.
inline constexpr char kDenseMagic[4] = {'S', 'N', 'D', '1'};
inline constexpr char kSparseMagic[4] = {'S', 'N', 'Z', '1'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

void write_dense(std::ostream& out, const Network& net);
Network read_dense(std::istream& in);
void write_sparse(std::ostream& out, const SparseModel& model);
SparseModel read_sparse(std::istream& in);

void save_dense(const std::filesystem::path& path, const Network& net);
void save_sparse(const std::filesystem::path& path, const SparseModel& model);

/// A model file of either format. Sparse files also carry their mask.
struct LoadedModel {
  Network net;
  std::optional<PruneMask> mask;
};

/// Dispatches on the magic bytes. Throws FormatError on unknown or damaged files.
LoadedModel load_model(const std::filesystem::path& path);

}  // namespace sparsenet
