#pragma once
// Dataset ingestion: big-endian IDX parsing for MNIST, a deterministic
// Gaussian-blob generator, and stratified train/eval splitting. Features live
// in [0,1]; pixels are scaled by /255 so epsilon stays in pixel units.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "catrain/rng.hpp"
#include "catrain/tensor.hpp"

namespace catrain {

struct Dataset {
  Tensor x;  // [n x d], all entries in [0,1]
  std::vector<int> y;
  int num_classes = 0;
  std::string split_tag = "train";

  std::size_t size() const { return x.rows(); }
  std::size_t dim() const { return x.cols(); }
};

inline void validate_dataset(const Dataset& ds) {
  if (ds.num_classes < 1) throw std::invalid_argument("dataset: no classes");
  if (ds.y.size() != ds.size()) {
    throw std::invalid_argument("dataset: " + std::to_string(ds.y.size()) + " labels for " +
                                std::to_string(ds.size()) + " examples");
  }
  if (ds.size() < static_cast<std::size_t>(ds.num_classes)) {
    throw std::invalid_argument("dataset: fewer examples than classes");
  }
  std::vector<std::size_t> counts(static_cast<std::size_t>(ds.num_classes), 0);
  for (std::size_t i = 0; i < ds.y.size(); ++i) {
    if (ds.y[i] < 0 || ds.y[i] >= ds.num_classes) {
      throw std::invalid_argument("dataset: label " + std::to_string(ds.y[i]) +
                                  " out of range [0," + std::to_string(ds.num_classes) +
                                  ") at index " + std::to_string(i));
    }
    ++counts[static_cast<std::size_t>(ds.y[i])];
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) {
      throw std::invalid_argument("dataset: class " + std::to_string(c) + " is empty");
    }
  }
  for (double v : ds.x.data) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("dataset: feature outside [0,1]");
    }
  }
}

namespace detail {

inline std::uint32_t read_be_u32(std::istream& is, const std::string& path) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) {
    throw std::runtime_error("idx: truncated file " + path);
  }
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

inline void write_be_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  os.write(reinterpret_cast<char*>(b), 4);
}

}  // namespace detail

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

inline Dataset load_mnist_idx(const std::string& images_path,
                              const std::string& labels_path) {
  std::ifstream imgs(images_path, std::ios::binary);
  if (!imgs) throw std::runtime_error("idx: cannot open " + images_path);
  std::uint32_t magic = detail::read_be_u32(imgs, images_path);
  if (magic != kIdxImagesMagic) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "0x%08x", magic);
    throw std::runtime_error("idx: bad images magic " + std::string(buf) + " in " +
                             images_path);
  }
  std::uint32_t n = detail::read_be_u32(imgs, images_path);
  std::uint32_t rows = detail::read_be_u32(imgs, images_path);
  std::uint32_t cols = detail::read_be_u32(imgs, images_path);

  std::ifstream labs(labels_path, std::ios::binary);
  if (!labs) throw std::runtime_error("idx: cannot open " + labels_path);
  std::uint32_t lmagic = detail::read_be_u32(labs, labels_path);
  if (lmagic != kIdxLabelsMagic) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "0x%08x", lmagic);
    throw std::runtime_error("idx: bad labels magic " + std::string(buf) + " in " +
                             labels_path);
  }
  std::uint32_t ln = detail::read_be_u32(labs, labels_path);
  if (ln != n) {
    throw std::runtime_error("idx: image count " + std::to_string(n) +
                             " disagrees with label count " + std::to_string(ln));
  }
  if (n == 0) throw std::runtime_error("idx: empty dataset in " + images_path);

  const std::size_t d = std::size_t(rows) * cols;
  std::vector<unsigned char> pixel_row(d);
  Dataset ds;
  ds.x = Tensor({n, d});
  ds.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!imgs.read(reinterpret_cast<char*>(pixel_row.data()),
                   static_cast<std::streamsize>(d))) {
      throw std::runtime_error("idx: truncated file " + images_path);
    }
    for (std::size_t j = 0; j < d; ++j) {
      ds.x.data[i * d + j] = static_cast<double>(pixel_row[j]) / 255.0;
    }
  }
  std::vector<unsigned char> label_bytes(n);
  if (!labs.read(reinterpret_cast<char*>(label_bytes.data()),
                 static_cast<std::streamsize>(n))) {
    throw std::runtime_error("idx: truncated file " + labels_path);
  }
  int max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ds.y[i] = label_bytes[i];
    max_label = std::max(max_label, ds.y[i]);
  }
  ds.num_classes = max_label + 1;
  validate_dataset(ds);
  return ds;
}

// Writes features (expected in [0,1]) back to IDX as uint8 via round(v*255).
inline void write_idx_images(const std::string& path, const Tensor& x, std::size_t rows,
                             std::size_t cols) {
  detail::require_matrix(x, "write_idx_images");
  if (rows * cols != x.cols()) {
    throw std::invalid_argument("write_idx_images: " + std::to_string(rows) + "x" +
                                std::to_string(cols) + " does not match width " +
                                std::to_string(x.cols()));
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("idx: cannot open " + path + " for writing");
  detail::write_be_u32(os, kIdxImagesMagic);
  detail::write_be_u32(os, static_cast<std::uint32_t>(x.rows()));
  detail::write_be_u32(os, static_cast<std::uint32_t>(rows));
  detail::write_be_u32(os, static_cast<std::uint32_t>(cols));
  std::vector<unsigned char> row(x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      double v = std::lround(x(i, j) * 255.0);
      row[j] = static_cast<unsigned char>(std::clamp(v, 0.0, 255.0));
    }
    os.write(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!os) throw std::runtime_error("idx: write failed for " + path);
}

inline void write_idx_labels(const std::string& path, const std::vector<int>& y) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("idx: cannot open " + path + " for writing");
  detail::write_be_u32(os, kIdxLabelsMagic);
  detail::write_be_u32(os, static_cast<std::uint32_t>(y.size()));
  for (int v : y) {
    unsigned char b = static_cast<unsigned char>(v);
    os.write(reinterpret_cast<char*>(&b), 1);
  }
  if (!os) throw std::runtime_error("idx: write failed for " + path);
}

// K Gaussian clusters with seeded centers inside [0.2, 0.8]^d, features
// clipped to [0,1]; class sizes differ by at most one.
inline Dataset make_blobs(std::size_t n, int num_classes, std::size_t d, double spread,
                          std::uint64_t seed) {
  if (num_classes < 1) throw std::invalid_argument("make_blobs: bad class count");
  if (n < static_cast<std::size_t>(num_classes)) {
    throw std::invalid_argument("make_blobs: n = " + std::to_string(n) + " below K = " +
                                std::to_string(num_classes));
  }
  if (d < 2) throw std::invalid_argument("make_blobs: need d >= 2");
  if (!(spread >= 0.0)) throw std::invalid_argument("make_blobs: negative spread");

  const std::size_t k = static_cast<std::size_t>(num_classes);
  std::vector<double> centers(k * d);
  {
    auto st = rng::stream(seed, "blob-centers");
    for (auto& v : centers) v = st.uniform(0.2, 0.8);
  }
  Dataset ds;
  ds.x = Tensor({n, d});
  ds.y.resize(n);
  ds.num_classes = num_classes;
  auto st = rng::stream(seed, "blob-points");
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t cls = i % k;
    ds.y[i] = static_cast<int>(cls);
    for (std::size_t j = 0; j < d; ++j) {
      double v = centers[cls * d + j] + spread * st.normal();
      ds.x.data[i * d + j] = std::clamp(v, 0.0, 1.0);
    }
  }
  validate_dataset(ds);
  return ds;
}

// Disjoint seeded stratified split; per-class eval counts land within one of
// class_size * eval_fraction and both sides keep every class populated.
inline std::pair<Dataset, Dataset> split(const Dataset& ds, double eval_fraction,
                                         std::uint64_t seed) {
  if (!(eval_fraction > 0.0 && eval_fraction < 1.0)) {
    throw std::invalid_argument("split: eval fraction must be in (0,1), got " +
                                std::to_string(eval_fraction));
  }
  const std::size_t k = static_cast<std::size_t>(ds.num_classes);
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    members[static_cast<std::size_t>(ds.y[i])].push_back(i);
  }

  // largest-remainder allocation of round(n * fraction) eval slots
  std::size_t eval_total =
      static_cast<std::size_t>(std::lround(static_cast<double>(ds.size()) * eval_fraction));
  std::vector<std::size_t> eval_count(k);
  std::vector<std::pair<double, std::size_t>> fractional(k);
  std::size_t base_sum = 0;
  for (std::size_t c = 0; c < k; ++c) {
    double target = static_cast<double>(members[c].size()) * eval_fraction;
    eval_count[c] = static_cast<std::size_t>(target);
    fractional[c] = {target - std::floor(target), c};
    base_sum += eval_count[c];
  }
  std::stable_sort(fractional.begin(), fractional.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  for (std::size_t r = 0; base_sum < eval_total && r < k; ++r) {
    ++eval_count[fractional[r].second];
    ++base_sum;
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (members[c].size() < 2) {
      throw std::invalid_argument("split: class " + std::to_string(c) +
                                  " has a single example and cannot appear in both splits");
    }
    eval_count[c] = std::clamp(eval_count[c], std::size_t{1}, members[c].size() - 1);
  }

  std::vector<std::size_t> eval_idx, train_idx;
  for (std::size_t c = 0; c < k; ++c) {
    auto st = rng::stream(seed, "split", c);
    std::vector<std::size_t> shuffled = members[c];
    for (std::size_t i = shuffled.size(); i-- > 1;) {
      std::size_t j = static_cast<std::size_t>(st.below(i + 1));
      std::swap(shuffled[i], shuffled[j]);
    }
    for (std::size_t i = 0; i < shuffled.size(); ++i) {
      (i < eval_count[c] ? eval_idx : train_idx).push_back(shuffled[i]);
    }
  }
  std::sort(eval_idx.begin(), eval_idx.end());
  std::sort(train_idx.begin(), train_idx.end());

  auto gather = [&](const std::vector<std::size_t>& idx, const std::string& tag) {
    Dataset out;
    out.x = Tensor({idx.size(), ds.dim()});
    out.y.resize(idx.size());
    out.num_classes = ds.num_classes;
    out.split_tag = tag;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t j = 0; j < ds.dim(); ++j) out.x(i, j) = ds.x(idx[i], j);
      out.y[i] = ds.y[idx[i]];
    }
    return out;
  };
  Dataset train = gather(train_idx, "train");
  Dataset eval = gather(eval_idx, "eval");
  validate_dataset(train);
  validate_dataset(eval);
  return {std::move(train), std::move(eval)};
}

}  // namespace catrain
