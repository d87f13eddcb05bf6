#include "pntk/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "pntk/rng.hpp"

namespace pntk {
namespace {

Dataset take_rows(const Dataset& ds, const std::vector<Eigen::Index>& rows) {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), ds.d());
  out.labels.resize(static_cast<Eigen::Index>(rows.size()), ds.c());
  out.ids.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = ds.features.row(rows[i]);
    out.labels.row(static_cast<Eigen::Index>(i)) = ds.labels.row(rows[i]);
    out.ids.push_back(ds.ids[static_cast<std::size_t>(rows[i])]);
  }
  return out;
}

std::uint32_t read_be32(std::istream& in, const char* what, std::streamoff at) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in)
    throw format_error(std::string("truncated file while reading ") + what +
                       " at byte offset " + std::to_string(at));
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace

void normalize_rows(Matrix& x) {
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double nrm = x.row(i).norm();
    if (nrm < 1e-12)
      throw invalid_input("zero-norm row cannot be unit-normalized (row " +
                          std::to_string(i) + ")");
    // Skip rows already at unit norm so normalize(normalize(X)) == normalize(X)
    // bitwise.
    if (std::abs(nrm - 1.0) <= 4.0 * kEps) continue;
    x.row(i) /= nrm;
  }
}

Dataset synth_classes(int n, int d, int n_classes, double margin, std::uint64_t seed) {
  if (n < 1 || d < 2) throw invalid_input("synth: need n >= 1 and d >= 2");
  if (n_classes < 1) throw invalid_input("synth: need at least one class");
  if (!(margin > 0.0 && margin < 1.0))
    throw invalid_input("synth: margin must lie in (0,1)");

  CounterRng dir_rng(seed, stream_id(0x64697273ULL));  // cluster directions
  Matrix u(n_classes, d);
  dir_rng.fill_normal(u);
  for (Eigen::Index r = 0; r < u.rows(); ++r) u.row(r) /= u.row(r).norm();

  CounterRng noise_rng(seed, stream_id(0x6E6F6973ULL));
  Matrix g(n, d);
  noise_rng.fill_normal(g);
  g /= std::sqrt(static_cast<double>(d));

  Dataset ds;
  ds.features.resize(n, d);
  const bool binary = (n_classes == 2);
  ds.labels = Matrix::Zero(n, binary ? 1 : n_classes);
  ds.ids.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int cls = i % n_classes;
    ds.features.row(i) = margin * u.row(cls) + (1.0 - margin) * g.row(i);
    if (binary)
      ds.labels(i, 0) = (cls == 0) ? 1.0 : -1.0;
    else
      ds.labels(i, cls) = 1.0;
    ds.ids[static_cast<std::size_t>(i)] = i;
  }
  normalize_rows(ds.features);
  return ds;
}

Dataset synth_two_class(int n, int d, double margin, std::uint64_t seed) {
  if (n % 2 != 0) throw invalid_input("synth_two_class: n must be even");
  return synth_classes(n, d, 2, margin, seed);
}

Dataset load_idx(const std::filesystem::path& image_path,
                 const std::filesystem::path& label_path,
                 std::optional<std::size_t> limit) {
  std::ifstream img(image_path, std::ios::binary);
  if (!img) throw format_error("cannot open image file: " + image_path.string());
  std::ifstream lab(label_path, std::ios::binary);
  if (!lab) throw format_error("cannot open label file: " + label_path.string());

  const std::uint32_t img_magic = read_be32(img, "image magic", 0);
  if (img_magic != 0x00000803)
    throw format_error("bad magic in image file at byte offset 0 (expected 0x00000803)");
  const std::uint32_t lab_magic = read_be32(lab, "label magic", 0);
  if (lab_magic != 0x00000801)
    throw format_error("bad magic in label file at byte offset 0 (expected 0x00000801)");

  const std::uint32_t n_img = read_be32(img, "image count", 4);
  const std::uint32_t rows = read_be32(img, "row count", 8);
  const std::uint32_t cols = read_be32(img, "column count", 12);
  const std::uint32_t n_lab = read_be32(lab, "label count", 4);
  if (n_img != n_lab)
    throw format_error("image/label count mismatch: " + std::to_string(n_img) +
                       " vs " + std::to_string(n_lab));

  std::size_t n = n_img;
  if (limit) n = std::min(n, *limit);
  const std::size_t dim = static_cast<std::size_t>(rows) * cols;

  Dataset ds;
  ds.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  ds.labels = Matrix::Zero(static_cast<Eigen::Index>(n), 10);
  ds.ids.resize(n);

  std::vector<unsigned char> buf(dim);
  for (std::size_t i = 0; i < n; ++i) {
    img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(dim));
    if (!img)
      throw format_error("truncated image data at byte offset " +
                         std::to_string(16 + i * dim));
    for (std::size_t j = 0; j < dim; ++j)
      ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          buf[j] / 255.0;
    char lc;
    lab.read(&lc, 1);
    if (!lab)
      throw format_error("truncated label data at byte offset " +
                         std::to_string(8 + i));
    const int y = static_cast<unsigned char>(lc);
    if (y > 9)
      throw format_error("label out of range at record " + std::to_string(i));
    ds.labels(static_cast<Eigen::Index>(i), y) = 1.0;
    ds.ids[i] = static_cast<std::int64_t>(i);
  }
  normalize_rows(ds.features);
  return ds;
}

Dataset load_csv(const std::filesystem::path& path, int label_cols,
                 std::optional<bool> header) {
  if (label_cols < 1) throw invalid_input("load_csv: label_cols must be >= 1");
  std::ifstream in(path);
  if (!in) throw format_error("cannot open csv: " + path.string());

  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      bool is_header;
      if (header) {
        is_header = *header;
      } else {
        // A header is any first line whose first field does not parse as a number.
        std::istringstream probe(line.substr(0, line.find(',')));
        double v;
        is_header = !(probe >> v);
      }
      if (is_header) continue;
    }
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw format_error("non-numeric cell '" + cell + "' in " + path.string());
      }
    }
    if (!rows.empty() && vals.size() != rows.front().size())
      throw format_error("ragged csv row in " + path.string());
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw format_error("empty csv: " + path.string());
  const int total = static_cast<int>(rows.front().size());
  if (total <= label_cols)
    throw format_error("csv has no feature columns after removing labels");

  Dataset ds;
  const int d = total - label_cols;
  ds.features.resize(static_cast<Eigen::Index>(rows.size()), d);
  ds.labels.resize(static_cast<Eigen::Index>(rows.size()), label_cols);
  ds.ids.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < d; ++j)
      ds.features(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    for (int j = 0; j < label_cols; ++j)
      ds.labels(static_cast<Eigen::Index>(i), j) =
          rows[i][static_cast<std::size_t>(d + j)];
    ds.ids[i] = static_cast<std::int64_t>(i);
  }
  normalize_rows(ds.features);
  return ds;
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw format_error("cannot write csv: " + path.string());
  for (Eigen::Index j = 0; j < ds.d(); ++j) out << "x" << j << ",";
  for (Eigen::Index j = 0; j < ds.c(); ++j)
    out << "y" << j << (j + 1 < ds.c() ? "," : "\n");
  out.precision(17);
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    for (Eigen::Index j = 0; j < ds.d(); ++j) out << ds.features(i, j) << ",";
    for (Eigen::Index j = 0; j < ds.c(); ++j)
      out << ds.labels(i, j) << (j + 1 < ds.c() ? "," : "\n");
  }
  if (!out) throw format_error("write failed: " + path.string());
}

std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec) {
  if (spec.prior_fraction < 0.0 || spec.prior_fraction >= 1.0)
    throw invalid_input("split: prior_fraction must lie in [0,1)");
  const auto n = ds.n();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  CounterRng rng(spec.seed, stream_id(0x73706C74ULL));  // split shuffle
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(rng.next_u64() %
                                             static_cast<std::uint64_t>(i + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }

  const auto n_prior =
      static_cast<std::size_t>(std::floor(spec.prior_fraction * static_cast<double>(n)));
  std::vector<Eigen::Index> prior_rows(order.begin(),
                                       order.begin() + static_cast<std::ptrdiff_t>(n_prior));
  std::vector<Eigen::Index> post_rows(order.begin() + static_cast<std::ptrdiff_t>(n_prior),
                                      order.end());
  std::sort(prior_rows.begin(), prior_rows.end());
  std::sort(post_rows.begin(), post_rows.end());
  return {take_rows(ds, prior_rows), take_rows(ds, post_rows)};
}

}  // namespace pntk
