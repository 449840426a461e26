#include "sparsenet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "sparsenet/errors.hpp"

namespace sparsenet {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

class IdxReader {
 public:
  explicit IdxReader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw Error("cannot open " + path.string());
  }

  std::uint32_t be32(const char* what) {
    unsigned char b[4];
    read(reinterpret_cast<char*>(b), 4, what);
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
           std::uint32_t{b[3]};
  }

  void read(char* dst, std::size_t n, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    const auto got = static_cast<std::size_t>(in_.gcount());
    if (got != n) {
      throw FormatError(path_.string() + ": truncated while reading " + what, offset_ + got);
    }
    offset_ += n;
  }

  std::uint64_t offset() const noexcept { return offset_; }
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::uint64_t offset_ = 0;
};

}  // namespace

std::string_view to_string(Split s) noexcept { return s == Split::train ? "train" : "test"; }

void Dataset::validate() const {
  if (features.rows() != labels.size()) {
    throw InputError("dataset has " + std::to_string(features.rows()) + " rows but " +
                     std::to_string(labels.size()) + " labels");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
      throw InputError("label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                       " is outside [0, " + std::to_string(classes) + ")");
    }
  }
  for (double v : features.data()) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("feature value outside [0, 1]");
  }
}

Matrix Dataset::gather(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), dims());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = features.row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

std::vector<int> Dataset::gather_labels(std::span<const std::size_t> indices) const {
  std::vector<int> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(labels[i]);
  return out;
}

Dataset load_mnist(const std::filesystem::path& images, const std::filesystem::path& labels,
                   Split split) {
  IdxReader img(images);
  const auto img_magic = img.be32("image magic");
  if (img_magic != kImageMagic) {
    throw FormatError(images.string() + ": bad image magic " + std::to_string(img_magic) +
                          " (expected 2051)",
                      0);
  }
  const auto n = img.be32("image count");
  const auto rows = img.be32("row count");
  const auto cols = img.be32("column count");
  if (rows != 28 || cols != 28) {
    throw FormatError(images.string() + ": expected 28x28 images, got " + std::to_string(rows) +
                          "x" + std::to_string(cols),
                      8);
  }

  IdxReader lab(labels);
  const auto lab_magic = lab.be32("label magic");
  if (lab_magic != kLabelMagic) {
    throw FormatError(labels.string() + ": bad label magic " + std::to_string(lab_magic) +
                          " (expected 2049)",
                      0);
  }
  const auto n_labels = lab.be32("label count");
  if (n_labels != n) {
    throw FormatError(labels.string() + ": " + std::to_string(n_labels) + " labels for " +
                          std::to_string(n) + " images",
                      4);
  }

  constexpr std::size_t kPixels = 28 * 28;
  Dataset data;
  data.split = split;
  data.classes = 10;
  data.features = Matrix(n, kPixels);
  std::vector<unsigned char> buf(kPixels);
  for (std::size_t i = 0; i < n; ++i) {
    img.read(reinterpret_cast<char*>(buf.data()), kPixels, "pixels");
    auto row = data.features.row(i);
    for (std::size_t p = 0; p < kPixels; ++p) row[p] = buf[p] / 255.0;
  }
  data.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    unsigned char y;
    const std::uint64_t at = lab.offset();
    lab.read(reinterpret_cast<char*>(&y), 1, "labels");
    if (y > 9) throw FormatError(labels.string() + ": label " + std::to_string(y) + " > 9", at);
    data.labels[i] = y;
  }
  return data;
}

Dataset synth_blobs(std::size_t classes, std::size_t samples, std::size_t dims, std::uint64_t seed,
                    double noise, Split split) {
  if (classes == 0 || samples == 0 || dims == 0) {
    throw ConfigError("synth_blobs needs classes, samples and dims >= 1");
  }
  Rng rng(seed);
  Matrix centres(classes, dims, 0.15);
  for (std::size_t c = 0; c < classes; ++c) {
    if (c < dims) {
      centres(c, c) += 1.0 / std::sqrt(2.0);
    } else {
      for (double& v : centres.row(c)) v = rng.uniform(0.15, 0.85);
    }
  }

  Dataset data;
  data.split = split;
  data.classes = classes;
  data.labels.resize(samples);
  for (std::size_t i = 0; i < samples; ++i) data.labels[i] = static_cast<int>(i % classes);
  rng.shuffle(std::span<int>(data.labels));

  data.features = Matrix(samples, dims);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto centre = centres.row(static_cast<std::size_t>(data.labels[i]));
    auto row = data.features.row(i);
    for (std::size_t d = 0; d < dims; ++d) {
      row[d] = std::clamp(centre[d] + noise * rng.normal(), 0.0, 1.0);
    }
  }
  return data;
}

std::pair<Dataset, Dataset> split_tail(Dataset data, std::size_t test_count) {
  if (test_count >= data.size()) throw ConfigError("test split would leave no training samples");
  const std::size_t n_train = data.size() - test_count;
  std::vector<std::size_t> train_idx(n_train), test_idx(test_count);
  std::iota(train_idx.begin(), train_idx.end(), std::size_t{0});
  std::iota(test_idx.begin(), test_idx.end(), n_train);
  Dataset train{data.gather(train_idx), data.gather_labels(train_idx), data.classes, Split::train};
  Dataset test{data.gather(test_idx), data.gather_labels(test_idx), data.classes, Split::test};
  return {std::move(train), std::move(test)};
}

}  // namespace sparsenet
