#include "auq/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "auq/losses.hpp"
#include "auq/rng.hpp"

namespace auq {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), ErrorKind::io, "cannot open file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  require(!f.bad(), ErrorKind::io, "read failure: " + path);
  return bytes;
}

std::uint32_t read_u32be(const std::vector<unsigned char>& b, size_t offset,
                         const std::string& path) {
  if (offset + 4 > b.size())
    fail(ErrorKind::data, path + ": truncated at byte offset " +
                              std::to_string(offset) + " (need 4 more bytes)");
  return (static_cast<std::uint32_t>(b[offset]) << 24) |
         (static_cast<std::uint32_t>(b[offset + 1]) << 16) |
         (static_cast<std::uint32_t>(b[offset + 2]) << 8) |
         static_cast<std::uint32_t>(b[offset + 3]);
}

void write_u32be(std::ofstream& f, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v)};
  f.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::vector<unsigned char> img = read_file(images_path);
  std::uint32_t magic = read_u32be(img, 0, images_path);
  if (magic != kImagesMagic)
    fail(ErrorKind::data, images_path + ": bad magic at byte offset 0 (got 0x" +
                              [&] {
                                char b[16];
                                std::snprintf(b, sizeof(b), "%08x", magic);
                                return std::string(b);
                              }() +
                              ", want 0x00000803)");
  std::uint32_t count = read_u32be(img, 4, images_path);
  std::uint32_t rows = read_u32be(img, 8, images_path);
  std::uint32_t cols = read_u32be(img, 12, images_path);
  size_t pixels = static_cast<size_t>(count) * rows * cols;
  if (img.size() != 16 + pixels)
    fail(ErrorKind::data,
         images_path + ": payload size mismatch at byte offset 16 (file has " +
             std::to_string(img.size() - 16) + " payload bytes, header implies " +
             std::to_string(pixels) + ")");

  std::vector<unsigned char> lab = read_file(labels_path);
  std::uint32_t lmagic = read_u32be(lab, 0, labels_path);
  if (lmagic != kLabelsMagic)
    fail(ErrorKind::data, labels_path + ": bad magic at byte offset 0 (want 0x00000801)");
  std::uint32_t lcount = read_u32be(lab, 4, labels_path);
  if (lab.size() != 8 + lcount)
    fail(ErrorKind::data,
         labels_path + ": payload size mismatch at byte offset 8 (file has " +
             std::to_string(lab.size() - 8) + " labels, header says " +
             std::to_string(lcount) + ")");
  if (lcount != count)
    fail(ErrorKind::data, labels_path + ": label count " + std::to_string(lcount) +
                              " does not match image count " + std::to_string(count));

  Dataset d;
  Eigen::Index m = static_cast<Eigen::Index>(rows) * static_cast<Eigen::Index>(cols);
  d.features.resize(static_cast<Eigen::Index>(count), m);
  for (std::uint32_t i = 0; i < count; ++i)
    for (Eigen::Index p = 0; p < m; ++p)
      d.features(static_cast<Eigen::Index>(i), p) =
          static_cast<double>(img[16 + static_cast<size_t>(i) * static_cast<size_t>(m) +
                                  static_cast<size_t>(p)]) /
          255.0;
  d.labels.resize(count);
  int maxlab = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    d.labels[i] = static_cast<int>(lab[8 + i]);
    maxlab = std::max(maxlab, d.labels[i]);
  }
  d.class_count = count > 0 ? maxlab + 1 : 0;
  return d;
}

void save_idx(const Dataset& d, const std::string& images_path,
              const std::string& labels_path) {
  require(d.size() == static_cast<Eigen::Index>(d.labels.size()), ErrorKind::argument,
          "save_idx: label count mismatch");
  {
    std::ofstream f(images_path, std::ios::binary);
    require(f.good(), ErrorKind::io, "cannot open file for writing: " + images_path);
    write_u32be(f, kImagesMagic);
    write_u32be(f, static_cast<std::uint32_t>(d.size()));
    write_u32be(f, 1);
    write_u32be(f, static_cast<std::uint32_t>(d.dim()));
    for (Eigen::Index i = 0; i < d.size(); ++i)
      for (Eigen::Index p = 0; p < d.dim(); ++p) {
        double q = std::round(d.features(i, p) * 255.0);
        unsigned char byte =
            static_cast<unsigned char>(std::clamp(q, 0.0, 255.0));
        f.write(reinterpret_cast<const char*>(&byte), 1);
      }
    f.flush();
    require(f.good(), ErrorKind::io, "write failure: " + images_path);
  }
  {
    std::ofstream f(labels_path, std::ios::binary);
    require(f.good(), ErrorKind::io, "cannot open file for writing: " + labels_path);
    write_u32be(f, kLabelsMagic);
    write_u32be(f, static_cast<std::uint32_t>(d.size()));
    for (int y : d.labels) {
      require(y >= 0 && y <= 255, ErrorKind::argument, "save_idx: label out of byte range");
      unsigned char byte = static_cast<unsigned char>(y);
      f.write(reinterpret_cast<const char*>(&byte), 1);
    }
    f.flush();
    require(f.good(), ErrorKind::io, "write failure: " + labels_path);
  }
}

std::vector<Dataset> partition_by_class(const Dataset& d, int workers,
                                        Eigen::Index per_class_cap) {
  require(workers >= 1, ErrorKind::config, "partition: need at least one worker");
  require(per_class_cap >= 1, ErrorKind::config, "partition: per-class cap must be >= 1");
  require(d.class_count >= 1, ErrorKind::config, "partition: dataset has no classes");
  require(workers <= d.class_count, ErrorKind::config,
          "partition: more workers than classes leaves workers empty");

  // Class c feeds worker c mod workers, capped per class in dataset order.
  std::vector<std::vector<Eigen::Index>> rows(static_cast<size_t>(workers));
  for (int c = 0; c < d.class_count; ++c) {
    int target = c % workers;
    Eigen::Index taken = 0;
    for (Eigen::Index i = 0; i < d.size() && taken < per_class_cap; ++i) {
      if (d.labels[static_cast<size_t>(i)] == c) {
        rows[static_cast<size_t>(target)].push_back(i);
        ++taken;
      }
    }
  }

  std::vector<Dataset> shards(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const auto& idx = rows[static_cast<size_t>(w)];
    require(!idx.empty(), ErrorKind::config,
            "partition: worker " + std::to_string(w) + " received no samples");
    Dataset& s = shards[static_cast<size_t>(w)];
    s.features.resize(static_cast<Eigen::Index>(idx.size()), d.dim());
    s.labels.resize(idx.size());
    for (size_t r = 0; r < idx.size(); ++r) {
      s.features.row(static_cast<Eigen::Index>(r)) = d.features.row(idx[r]);
      s.labels[r] = d.labels[static_cast<size_t>(idx[r])];
    }
    s.class_count = d.class_count;
  }
  return shards;
}

Dataset synth_blobs(Eigen::Index dim, int classes, Eigen::Index per_class,
                    double noise, std::uint64_t seed) {
  require(dim >= 1 && classes >= 1 && per_class >= 1, ErrorKind::config,
          "synth_blobs: dim, classes and per_class must be positive");
  require(noise >= 0.0, ErrorKind::config, "synth_blobs: noise must be nonnegative");

  Dataset d;
  d.features.resize(static_cast<Eigen::Index>(classes) * per_class, dim);
  d.labels.resize(static_cast<size_t>(classes) * static_cast<size_t>(per_class));
  d.class_count = classes;
  // Centers are sparse: each class gets a random support of ~dim/classes
  // coordinates, so classes carry class-specific feature structure the way
  // image categories occupy distinct pixel regions.
  Eigen::Index support = std::max<Eigen::Index>(
      Eigen::Index{1}, dim / static_cast<Eigen::Index>(classes));
  Eigen::Index row = 0;
  for (int c = 0; c < classes; ++c) {
    Rng rng(derive_seed(seed, 3, static_cast<std::uint64_t>(c)));
    std::vector<Eigen::Index> coords(static_cast<size_t>(dim));
    for (Eigen::Index i = 0; i < dim; ++i) coords[static_cast<size_t>(i)] = i;
    for (Eigen::Index i = 0; i < support; ++i) {
      Eigen::Index pick =
          i + static_cast<Eigen::Index>(rng.next_u64() %
                                        static_cast<std::uint64_t>(dim - i));
      std::swap(coords[static_cast<size_t>(i)], coords[static_cast<size_t>(pick)]);
    }
    Vector center = Vector::Zero(dim);
    for (Eigen::Index i = 0; i < support; ++i)
      center[coords[static_cast<size_t>(i)]] = rng.next_gaussian();
    double norm = center.norm();
    if (norm == 0.0) center[coords[0]] = 1.0;
    else center /= norm;
    for (Eigen::Index i = 0; i < per_class; ++i, ++row) {
      d.features.row(row) = (center + noise * rng.gaussian_vector(dim)).transpose();
      d.labels[static_cast<size_t>(row)] = c;
    }
  }
  return d;
}

Matrix demo_image(Eigen::Index side) {
  require(side >= 2, ErrorKind::argument, "demo_image: side must be >= 2");
  Matrix img(side, side);
  auto bump = [](double x, double y, double cx, double cy, double s) {
    double dx = x - cx, dy = y - cy;
    return std::exp(-(dx * dx + dy * dy) / s);
  };
  for (Eigen::Index r = 0; r < side; ++r)
    for (Eigen::Index c = 0; c < side; ++c) {
      double x = static_cast<double>(r) / static_cast<double>(side - 1);
      double y = static_cast<double>(c) / static_cast<double>(side - 1);
      img(r, c) = bump(x, y, 0.30, 0.35, 0.020) +
                  0.8 * bump(x, y, 0.70, 0.60, 0.045) +
                  0.6 * bump(x, y, 0.25, 0.80, 0.010) + 0.2 * y;
    }
  double mn = img.minCoeff(), mx = img.maxCoeff();
  img = (img.array() - mn) / (mx - mn);
  return img;
}

DenoiseInstance quadrant_denoise(const Matrix& image, double noise_sigma,
                                 std::uint64_t seed, double alpha) {
  require(image.rows() == image.cols() && image.rows() >= 2 &&
              image.rows() % 2 == 0,
          ErrorKind::argument,
          "quadrant_denoise: image must be square with an even side >= 2");
  require(noise_sigma >= 0.0, ErrorKind::argument,
          "quadrant_denoise: noise must be nonnegative");
  require(alpha >= 0.0, ErrorKind::argument, "quadrant_denoise: alpha must be nonnegative");

  DenoiseInstance inst;
  inst.side = image.rows();
  inst.alpha = alpha;
  Eigen::Index n = inst.side * inst.side;
  inst.ground_truth.resize(n);
  for (Eigen::Index r = 0; r < inst.side; ++r)
    for (Eigen::Index c = 0; c < inst.side; ++c)
      inst.ground_truth[r * inst.side + c] = image(r, c);

  Rng rng(derive_seed(seed, 4));
  inst.noisy = inst.ground_truth + noise_sigma * rng.gaussian_vector(n);

  Eigen::Index half = inst.side / 2;
  for (Eigen::Index r = 0; r < inst.side; ++r)
    for (Eigen::Index c = 0; c < inst.side; ++c) {
      int q = (r < half ? 0 : 2) + (c < half ? 0 : 1);
      inst.quadrants[static_cast<size_t>(q)].push_back(r * inst.side + c);
    }

  inst.problem.regularizer = ProxRegularizer::tikhonov(alpha);
  for (int q = 0; q < 4; ++q) {
    const auto& idx = inst.quadrants[static_cast<size_t>(q)];
    Matrix sel = Matrix::Zero(static_cast<Eigen::Index>(idx.size()), n);
    Vector obs(static_cast<Eigen::Index>(idx.size()));
    Vector masked = Vector::Zero(n);
    for (size_t r = 0; r < idx.size(); ++r) {
      sel(static_cast<Eigen::Index>(r), idx[r]) = 1.0;
      obs[static_cast<Eigen::Index>(r)] = inst.noisy[idx[r]];
      masked[idx[r]] = inst.noisy[idx[r]];
    }
    inst.masked_observations[static_cast<size_t>(q)] = masked;
    inst.problem.losses.push_back(
        std::make_shared<ElasticNetLoss>(std::move(sel), std::move(obs)));
  }
  return inst;
}

}  // namespace auq
