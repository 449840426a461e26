#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "sparsenet/numerics.hpp"

namespace sparsenet {

enum class Split { train, test };

std::string_view to_string(Split s) noexcept;

/// Labelled samples; feature values lie in [0, 1].
struct Dataset {
  Matrix features;          // samples x dims
  std::vector<int> labels;  // one class index per row
  std::size_t classes = 0;
  Split split = Split::train;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dims() const noexcept { return features.cols(); }

  /// Throws InputError if labels and rows disagree or values leave [0, 1].
  void validate() const;

  /// The rows at `indices`, gathered into a contiguous batch.
  Matrix gather(std::span<const std::size_t> indices) const;
  std::vector<int> gather_labels(std::span<const std::size_t> indices) const;
};

/// Reads an IDX image file (magic 0x00000803, dims n x 28 x 28, u8) and its
/// label file (magic 0x00000801, u8). Header integers are big-endian.
/// Pixels are divided by 255.
Dataset load_mnist(const std::filesystem::path& images, const std::filesystem::path& labels,
                   Split split = Split::train);

/// Gaussian clusters, one per class. Class c is centred at 0.15 + e_(c mod dims) / sqrt(2)
/// so distinct centres sit one unit apart (classes beyond `dims` get a random
/// centre in [0.15, 0.85]^dims). Samples get N(0, noise^2) per coordinate and
/// are clipped to [0, 1]. Labels cycle 0..classes-1 before a seeded shuffle.
Dataset synth_blobs(std::size_t classes, std::size_t samples, std::size_t dims, std::uint64_t seed,
                    double noise = 0.25, Split split = Split::train);

/// Splits off the last `test_count` rows as a test set.
std::pair<Dataset, Dataset> split_tail(Dataset data, std::size_t test_count);

}  // namespace sparsenet
