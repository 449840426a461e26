#include "sparsenet/model_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "sparsenet/errors.hpp"

namespace sparsenet {

namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename T>
T to_little(T v) noexcept {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  } else {
    return v;
  }
}

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <typename T>
  void put(T v) {
    v = to_little(v);
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void put_magic(const char (&magic)[4]) { out_.write(magic, 4); }

 private:
  std::ostream& out_;
};

// Tracks the byte offset so format errors can say where they happened.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T get(const char* what) {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (in_.gcount() != static_cast<std::streamsize>(sizeof(T))) {
      throw FormatError(std::string("truncated model file while reading ") + what, offset_);
    }
    offset_ += sizeof(T);
    return to_little(v);
  }

  std::array<char, 4> magic() {
    std::array<char, 4> m{};
    in_.read(m.data(), 4);
    if (in_.gcount() != 4) throw FormatError("model file shorter than its magic", offset_);
    offset_ += 4;
    return m;
  }

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

void write_header(Writer& w, const char (&magic)[4], std::size_t layers) {
  w.put_magic(magic);
  w.put<std::uint32_t>(kModelFormatVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(layers));
}

std::uint32_t read_header(Reader& r, const char (&magic)[4]) {
  const auto m = r.magic();
  if (!std::equal(m.begin(), m.end(), magic)) {
    throw FormatError("bad magic, expected " + std::string(magic, 4), 0);
  }
  const auto version = r.get<std::uint32_t>("format version");
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported format version " + std::to_string(version), 4);
  }
  const auto layers = r.get<std::uint32_t>("layer count");
  if (layers == 0) throw FormatError("model file declares zero layers", 8);
  return layers;
}

Activation read_activation(Reader& r) {
  const std::uint64_t at = r.offset();
  const auto tag = r.get<std::uint8_t>("activation tag");
  if (tag > 1) throw FormatError("unknown activation tag " + std::to_string(tag), at);
  return static_cast<Activation>(tag);
}

// Guards allocations against corrupt size fields.
void check_count(std::uint64_t count, std::uint64_t limit, const char* what, std::uint64_t at) {
  if (count > limit) throw FormatError(std::string("implausible ") + what, at);
}

constexpr std::uint64_t kMaxDim = 1u << 24;

void open_check(const std::ios& s, const std::filesystem::path& path, const char* mode) {
  if (!s) throw Error(std::string("cannot open ") + path.string() + " for " + mode);
}

}  // namespace

void write_dense(std::ostream& out, const Network& net) {
  Writer w(out);
  write_header(w, kDenseMagic, net.num_layers());
  for (const auto& l : net.layers()) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(l.out_dim()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(l.in_dim()));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(l.activation));
    for (double v : l.weights.data()) w.put(v);
    for (double b : l.biases) w.put(b);
  }
  if (!out) throw Error("write failed");
}

Network read_dense(std::istream& in) {
  Reader r(in);
  const auto count = read_header(r, kDenseMagic);
  std::vector<DenseLayer> layers;
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::uint64_t at = r.offset();
    const auto rows = r.get<std::uint32_t>("rows");
    const auto cols = r.get<std::uint32_t>("cols");
    check_count(rows, kMaxDim, "row count", at);
    check_count(cols, kMaxDim, "column count", at + 4);
    const Activation act = read_activation(r);
    DenseLayer l{Matrix(rows, cols), std::vector<double>(rows), act};
    for (double& v : l.weights.data()) v = r.get<double>("weights");
    for (double& b : l.biases) b = r.get<double>("biases");
    layers.push_back(std::move(l));
  }
  try {
    return Network(std::move(layers));
  } catch (const Error& e) {
    throw FormatError(std::string("inconsistent dense model: ") + e.what(), r.offset());
  }
}

void write_sparse(std::ostream& out, const SparseModel& model) {
  model.validate();
  Writer w(out);
  write_header(w, kSparseMagic, model.layers.size());
  for (const auto& l : model.layers) {
    w.put<std::uint32_t>(l.rows);
    w.put<std::uint32_t>(l.cols);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(l.activation));
    w.put<std::uint64_t>(l.nnz());
    for (auto o : l.row_offsets) w.put(o);
    for (auto c : l.col_indices) w.put(c);
    for (double v : l.values) w.put(v);
    for (double b : l.biases) w.put(b);
  }
  if (!out) throw Error("write failed");
}

SparseModel read_sparse(std::istream& in) {
  Reader r(in);
  const auto count = read_header(r, kSparseMagic);
  SparseModel model;
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::uint64_t at = r.offset();
    CsrLayer l;
    l.rows = r.get<std::uint32_t>("rows");
    l.cols = r.get<std::uint32_t>("cols");
    check_count(l.rows, kMaxDim, "row count", at);
    check_count(l.cols, kMaxDim, "column count", at + 4);
    l.activation = read_activation(r);
    const std::uint64_t nnz_at = r.offset();
    const auto nnz = r.get<std::uint64_t>("nnz");
    check_count(nnz, std::uint64_t{l.rows} * l.cols, "nnz", nnz_at);
    l.row_offsets.resize(std::size_t{l.rows} + 1);
    for (auto& o : l.row_offsets) o = r.get<std::uint64_t>("row offsets");
    l.col_indices.resize(nnz);
    for (auto& c : l.col_indices) c = r.get<std::uint32_t>("column indices");
    l.values.resize(nnz);
    for (auto& v : l.values) v = r.get<double>("values");
    l.biases.resize(l.rows);
    for (auto& b : l.biases) b = r.get<double>("biases");
    try {
      l.validate();
    } catch (const FormatError& e) {
      throw FormatError(e.what(), at);
    }
    model.layers.push_back(std::move(l));
  }
  model.validate();
  return model;
}

void save_dense(const std::filesystem::path& path, const Network& net) {
  std::ofstream out(path, std::ios::binary);
  open_check(out, path, "writing");
  write_dense(out, net);
}

void save_sparse(const std::filesystem::path& path, const SparseModel& model) {
  std::ofstream out(path, std::ios::binary);
  open_check(out, path, "writing");
  write_sparse(out, model);
}

LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  open_check(in, path, "reading");
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4) throw FormatError(path.string() + ": file shorter than its magic", 0);
  in.seekg(0);
  if (std::equal(magic, magic + 4, kDenseMagic)) return {read_dense(in), std::nullopt};
  if (std::equal(magic, magic + 4, kSparseMagic)) {
    SparseModel sparse = read_sparse(in);
    PruneMask mask = sparsity_mask(sparse);
    return {densify(sparse), std::move(mask)};
  }
  throw FormatError(path.string() + ": unknown model magic", 0);
}

}  // namespace sparsenet
