#include <gtest/gtest.h>

#include <array>
#include <filesystem>
#include <fstream>

#include "sparsenet/errors.hpp"
#include "sparsenet/dataset.hpp"
#include "sparsenet/training.hpp"

namespace sparsenet {
namespace {

namespace fs = std::filesystem;

void put_be32(std::ofstream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                     static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b, 4);
}

struct IdxFiles {
  fs::path dir;
  fs::path images;
  fs::path labels;
  ~IdxFiles() { fs::remove_all(dir); }
};

// Pixel p of image i is (i + p) % 256; label is i % 10.
IdxFiles write_idx(const std::string& name, std::uint32_t n, std::uint32_t n_labels,
                   std::uint32_t img_magic = 0x803, std::uint32_t lab_magic = 0x801,
                   std::size_t drop_tail = 0) {
  IdxFiles f;
  f.dir = fs::temp_directory_path() / ("sparsenet_idx_" + name);
  fs::create_directories(f.dir);
  f.images = f.dir / "images";
  f.labels = f.dir / "labels";
  {
    std::ofstream out(f.images, std::ios::binary);
    put_be32(out, img_magic);
    put_be32(out, n);
    put_be32(out, 28);
    put_be32(out, 28);
    std::string px(std::size_t{n} * 784, '\0');
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t p = 0; p < 784; ++p) px[i * 784 + p] = static_cast<char>((i + p) % 256);
    px.resize(px.size() - drop_tail);
    out.write(px.data(), static_cast<std::streamsize>(px.size()));
  }
  {
    std::ofstream out(f.labels, std::ios::binary);
    put_be32(out, lab_magic);
    put_be32(out, n_labels);
    for (std::uint32_t i = 0; i < n_labels; ++i) out.put(static_cast<char>(i % 10));
  }
  return f;
}

TEST(LoadMnist, ParsesTenThousandSamples) {
  const IdxFiles f = write_idx("full", 10000, 10000);
  const Dataset d = load_mnist(f.images, f.labels, Split::test);
  EXPECT_EQ(d.size(), 10000u);
  EXPECT_EQ(d.dims(), 784u);
  EXPECT_EQ(d.classes, 10u);
  EXPECT_EQ(d.split, Split::test);
  EXPECT_EQ(d.features(0, 0), 0.0);
  EXPECT_EQ(d.features(0, 255), 1.0);
  EXPECT_DOUBLE_EQ(d.features(3, 4), 7.0 / 255.0);
  EXPECT_EQ(d.labels[9999], 9);
  EXPECT_NO_THROW(d.validate());
}

TEST(LoadMnist, BadImageMagic) {
  const IdxFiles f = write_idx("badimg", 5, 5, 0x801);
  EXPECT_THROW(load_mnist(f.images, f.labels), FormatError);
}

TEST(LoadMnist, BadLabelMagic) {
  const IdxFiles f = write_idx("badlab", 5, 5, 0x803, 0x803);
  EXPECT_THROW(load_mnist(f.images, f.labels), FormatError);
}

TEST(LoadMnist, CountMismatch) {
  const IdxFiles f = write_idx("count", 5, 4);
  EXPECT_THROW(load_mnist(f.images, f.labels), FormatError);
}

TEST(LoadMnist, TruncatedImagesReportOffset) {
  const IdxFiles f = write_idx("trunc", 5, 5, 0x803, 0x801, 100);
  try {
    load_mnist(f.images, f.labels);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 16u + 5 * 784 - 100);
  }
}

TEST(LoadMnist, BundledDeskSetParses) {
  const fs::path dir = SPARSENET_TEST_DATA_DIR "/mnist";
  if (!fs::exists(dir / "t10k-images-idx3-ubyte")) GTEST_SKIP() << "no bundled MNIST files";
  const Dataset test =
      load_mnist(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte", Split::test);
  const Dataset train =
      load_mnist(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte", Split::train);
  EXPECT_EQ(test.size() + train.size(), 10000u);
  EXPECT_EQ(test.dims(), 784u);
  EXPECT_NO_THROW(test.validate());
  EXPECT_NO_THROW(train.validate());
}

TEST(SynthBlobs, SeedDeterminesDataset) {
  const Dataset a = synth_blobs(4, 500, 8, 7);
  const Dataset b = synth_blobs(4, 500, 8, 7);
  const Dataset c = synth_blobs(4, 500, 8, 8);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_NE(a.features, c.features);
}

TEST(SynthBlobs, LabelsBalancedAndValuesInRange) {
  const Dataset d = synth_blobs(7, 1003, 5, 3);
  EXPECT_NO_THROW(d.validate());
  std::vector<int> counts(7, 0);
  for (int y : d.labels) ++counts[static_cast<std::size_t>(y)];
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  EXPECT_LE(*hi - *lo, 1);
}

TEST(SynthBlobs, LinearModelSeparatesTwoClasses) {
  const Dataset d = synth_blobs(2, 1000, 2, 11);
  const std::array<std::size_t, 2> sizes{2, 2};
  Rng rng(1);
  Network net = init_weights(Network::mlp(sizes), rng);
  TrainConfig cfg;
  cfg.eta = 0.5;
  cfg.epochs = 20;
  cfg.batch_size = 32;
  const TrainResult r = train(std::move(net), d, cfg);
  EXPECT_GT(evaluate(r.net, d), 0.95);
}

TEST(SplitTail, KeepsOrderAndTags) {
  const Dataset d = synth_blobs(3, 10, 2, 1);
  const auto [tr, te] = split_tail(d, 4);
  EXPECT_EQ(tr.size(), 6u);
  EXPECT_EQ(te.size(), 4u);
  EXPECT_EQ(te.split, Split::test);
  EXPECT_EQ(te.labels[0], d.labels[6]);
  EXPECT_EQ(te.features(3, 1), d.features(9, 1));
  EXPECT_THROW(split_tail(d, 10), ConfigError);
}

TEST(Dataset, ValidateRejectsOutOfRangeValues) {
  Dataset d{Matrix{{0.5, 1.5}}, {0}, 2, Split::train};
  EXPECT_THROW(d.validate(), InputError);
  d.features(0, 1) = 1.0;
  EXPECT_NO_THROW(d.validate());
  d.labels[0] = 2;
  EXPECT_THROW(d.validate(), InputError);
}

}  // namespace
}  // namespace sparsenet
