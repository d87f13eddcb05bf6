#include "pntk/serialize.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

namespace pntk {

namespace {

constexpr std::uint32_t kContainerVersion = 1;

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw format_error("container: truncated header length");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

void write_matrix(std::ostream& out, const Matrix& m) {
  std::vector<double> buf(static_cast<std::size_t>(m.rows() * m.cols()));
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) buf[k++] = m(i, j);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(double)));
}

Matrix read_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
  std::vector<double> buf(static_cast<std::size_t>(rows * cols));
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(double)));
  if (!in) throw format_error("container: truncated payload");
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = buf[k++];
  return m;
}

ordered_json read_header(std::istream& in, const std::string& kind) {
  const std::uint64_t len = read_u64(in);
  if (len == 0 || len > (1ull << 24)) throw format_error("container: bad header length");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw format_error("container: truncated header");
  ordered_json header;
  try {
    header = ordered_json::parse(text);
  } catch (const nlohmann::json::exception&) {
    throw format_error("container: header is not valid JSON");
  }
  if (!header.contains("kind") || header["kind"] != kind)
    throw format_error("container: wrong kind, expected " + kind);
  if (!header.contains("version") || header["version"].get<std::uint32_t>() != kContainerVersion)
    throw format_error("container: unsupported version");
  return header;
}

void write_container_header(std::ostream& out, const ordered_json& header) {
  const std::string text = header.dump();
  write_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw format_error("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw format_error("cannot open for reading: " + path);
  return in;
}

}  // namespace

void save_state(const PNNState& state, const std::string& path) {
  auto out = open_out(path, std::ios::binary);
  ordered_json shapes = ordered_json::array();
  for (const auto& layer : state.layers)
    shapes.push_back({layer.mu.rows(), layer.mu.cols()});
  ordered_json header;
  header["kind"] = "pntk-state";
  header["version"] = kContainerVersion;
  header["m"] = state.m;
  header["L"] = state.L;
  header["out_dim"] = state.out_dim;
  header["shapes"] = shapes;
  header["has_signs"] = state.v.size() > 0;
  header["has_prior"] = !state.prior.empty();
  write_container_header(out, header);

  for (const auto& layer : state.layers) {
    write_matrix(out, layer.mu);
    write_matrix(out, layer.sigma);
  }
  if (state.v.size() > 0) write_matrix(out, state.v);
  for (const auto& layer : state.prior) {
    write_matrix(out, layer.mu);
    write_matrix(out, layer.sigma);
  }
  if (!out) throw format_error("state save failed: " + path);
}

PNNState load_state(const std::string& path) {
  auto in = open_in(path, std::ios::binary);
  const ordered_json header = read_header(in, "pntk-state");
  PNNState state;
  state.m = header["m"].get<int>();
  state.L = header["L"].get<int>();
  state.out_dim = header["out_dim"].get<int>();
  const auto& shapes = header["shapes"];
  for (const auto& shape : shapes) {
    const auto rows = shape[0].get<Eigen::Index>();
    const auto cols = shape[1].get<Eigen::Index>();
    LayerParams layer;
    layer.mu = read_matrix(in, rows, cols);
    layer.sigma = read_matrix(in, rows, cols);
    state.layers.push_back(std::move(layer));
  }
  if (header["has_signs"].get<bool>()) state.v = read_matrix(in, state.m, 1);
  if (header["has_prior"].get<bool>()) {
    for (const auto& shape : shapes) {
      const auto rows = shape[0].get<Eigen::Index>();
      const auto cols = shape[1].get<Eigen::Index>();
      LayerParams layer;
      layer.mu = read_matrix(in, rows, cols);
      layer.sigma = read_matrix(in, rows, cols);
      state.prior.push_back(std::move(layer));
    }
  }
  return state;
}

void save_kernel(const KernelMatrix& k, const std::string& path) {
  auto out = open_out(path, std::ios::binary);
  ordered_json header;
  header["kind"] = "pntk-kernel";
  header["version"] = kContainerVersion;
  header["n"] = k.n();
  header["source"] = static_cast<int>(k.source);
  write_container_header(out, header);
  write_matrix(out, k.values);
  if (!out) throw format_error("kernel save failed: " + path);
}

KernelMatrix load_kernel(const std::string& path) {
  auto in = open_in(path, std::ios::binary);
  const ordered_json header = read_header(in, "pntk-kernel");
  const auto n = header["n"].get<Eigen::Index>();
  const auto source = static_cast<KernelSource>(header["source"].get<int>());
  return KernelMatrix(read_matrix(in, n, n), source);
}

void save_trace_csv(const TrainTrace& trace, const std::string& path) {
  auto out = open_out(path, std::ios::out);
  out << "step,objective,risk,kl,grad_mu_norm,grad_sigma_norm\n";
  for (const auto& rec : trace.records)
    out << rec.step << ',' << fmt_double(rec.objective) << ',' << fmt_double(rec.risk)
        << ',' << fmt_double(rec.kl) << ',' << fmt_double(rec.grad_mu_norm) << ','
        << fmt_double(rec.grad_sigma_norm) << '\n';
  if (!out) throw format_error("trace save failed: " + path);
}

ordered_json to_json(const HyperParams& hp) {
  ordered_json j;
  j["lambda"] = hp.lambda;
  j["rho0"] = hp.rho0;
  j["sigma_hat"] = hp.sigma_hat;
  j["eta"] = hp.eta;
  j["steps"] = hp.steps;
  j["m"] = hp.m;
  j["delta"] = hp.delta;
  j["mc_train"] = hp.mc_train;
  j["mc_cert"] = hp.mc_cert;
  j["lambda_bar"] = hp.lambda_bar;
  j["prior_fraction"] = hp.prior_fraction;
  j["seed"] = hp.seed;
  j["freeze_sigma"] = hp.freeze_sigma;
  return j;
}

HyperParams hyperparams_from_json(const ordered_json& j) {
  HyperParams hp;
  hp.lambda = j.at("lambda").get<double>();
  hp.rho0 = j.at("rho0").get<double>();
  hp.sigma_hat = j.at("sigma_hat").get<double>();
  hp.eta = j.at("eta").get<double>();
  hp.steps = j.at("steps").get<int>();
  hp.m = j.at("m").get<int>();
  hp.delta = j.at("delta").get<double>();
  hp.mc_train = j.at("mc_train").get<int>();
  hp.mc_cert = j.at("mc_cert").get<int>();
  hp.lambda_bar = j.at("lambda_bar").get<double>();
  hp.prior_fraction = j.at("prior_fraction").get<double>();
  hp.seed = j.at("seed").get<std::uint64_t>();
  hp.freeze_sigma = j.at("freeze_sigma").get<bool>();
  hp.validate();
  return hp;
}

ordered_json to_json(const BoundReport& report) {
  ordered_json j;
  j["risk_mc"] = report.risk_mc;
  j["risk_mc_upper"] = report.risk_mc_upper;
  j["kl_value"] = report.kl_value;
  j["kl_bound"] = report.kl_bound;
  j["lambda_bound"] = report.lambda_bound;
  j["ntk_pb_bound"] = report.ntk_pb_bound;
  j["ntk_rad_bound"] = report.ntk_rad_bound;
  j["ntk_pb_delta_term"] = report.ntk_pb_delta_term;
  j["ntk_rad_delta_term"] = report.ntk_rad_delta_term;
  j["pa_score"] = report.pa_score;
  if (report.test_error >= 0.0)
    j["test_error"] = report.test_error;
  else
    j["test_error"] = nullptr;
  j["config"] = to_json(report.config);
  return j;
}

ordered_json to_json(const ConcentrationReport& report) {
  ordered_json j;
  j["widths"] = report.widths;
  j["median_mu_dist"] = report.median_mu_dist;
  j["median_sigma_dist"] = report.median_sigma_dist;
  j["median_cross_dist"] = report.median_cross_dist;
  j["slope_available"] = report.slope_available;
  if (report.slope_available) {
    j["slope_mu"] = report.slope_mu;
    j["slope_sigma"] = report.slope_sigma;
  } else {
    j["slope_mu"] = nullptr;
    j["slope_sigma"] = nullptr;
  }
  return j;
}

ordered_json to_json(const DriftStudyReport& report) {
  ordered_json j;
  ordered_json records = ordered_json::array();
  for (const auto& rec : report.records) {
    ordered_json r;
    r["m"] = rec.m;
    r["layer"] = rec.layer;
    r["param"] = rec.param;
    r["rel_frobenius"] = rec.rel_frobenius;
    records.push_back(std::move(r));
  }
  j["records"] = std::move(records);
  ordered_json slopes = ordered_json::array();
  for (const auto& s : report.slopes) {
    ordered_json r;
    r["layer"] = s.layer;
    r["param"] = s.param;
    r["slope"] = s.slope;
    slopes.push_back(std::move(r));
  }
  j["slopes"] = std::move(slopes);
  return j;
}

ordered_json to_json(const GradNormReport& report) {
  ordered_json j;
  j["widths"] = report.widths;
  j["mean_grad_mu"] = report.mean_grad_mu;
  j["mean_grad_sigma"] = report.mean_grad_sigma;
  j["mean_ratio"] = report.mean_ratio;
  return j;
}

ordered_json to_json(const KrrEquivalenceReport& report) {
  ordered_json j;
  j["widths"] = report.widths;
  j["max_abs_error"] = report.max_abs_error;
  j["init_mean_abs"] = report.init_mean_abs;
  j["ridge"] = report.ridge;
  return j;
}

ordered_json to_json(const ConvergenceReport& report) {
  ordered_json j;
  j["final_risk"] = report.final_risk;
  j["r_squared"] = report.r_squared;
  j["fitted_rate"] = report.fitted_rate;
  j["rate_reference"] = report.rate_reference;
  j["risk_curve"] = report.risk_curve;
  return j;
}

ordered_json to_json(const KernelStabilityReport& report) {
  ordered_json j;
  j["widths"] = report.widths;
  j["rel_drift"] = report.rel_drift;
  return j;
}

ordered_json to_json(const ValidityReport& report) {
  ordered_json j;
  j["runs"] = report.runs;
  j["holds"] = report.holds;
  j["kl_bounds"] = report.kl_bounds;
  j["lambda_bounds"] = report.lambda_bounds;
  j["test_errors"] = report.test_errors;
  return j;
}

ordered_json to_json(const GridSearchResult& result) {
  // Wall-clock times stay out of the file on purpose: repeated identical
  // runs must produce bit-identical reports.
  auto point_json = [](const GridPoint& p) {
    ordered_json j;
    j["rho0"] = p.rho0;
    j["lambda"] = p.lambda;
    j["prior_fraction"] = p.prior_fraction;
    j["pa_score"] = p.report.pa_score;
    j["lambda_bound"] = p.report.lambda_bound;
    j["kl_bound"] = p.report.kl_bound;
    if (p.report.test_error >= 0.0)
      j["test_error"] = p.report.test_error;
    else
      j["test_error"] = nullptr;
    return j;
  };
  ordered_json j;
  ordered_json points = ordered_json::array();
  for (const auto& p : result.points) points.push_back(point_json(p));
  j["points"] = std::move(points);
  j["tau_pa_vs_bound"] = result.tau_pa_vs_bound;
  j["best_by_pa"] = point_json(result.best_by_pa);
  j["best_by_bound"] = point_json(result.best_by_bound);
  return j;
}

void write_json(const ordered_json& j, const std::string& path) {
  auto out = open_out(path, std::ios::out);
  out << j.dump(2) << '\n';
  if (!out) throw format_error("json save failed: " + path);
}

void write_grid_csv(const GridSearchResult& result, const std::string& path) {
  auto out = open_out(path, std::ios::out);
  out << "rho0,lambda,prior_fraction,pa_score,lambda_bound,kl_bound,test_error\n";
  for (const auto& p : result.points) {
    out << fmt_double(p.rho0) << ',' << fmt_double(p.lambda) << ','
        << fmt_double(p.prior_fraction) << ',' << fmt_double(p.report.pa_score) << ','
        << fmt_double(p.report.lambda_bound) << ',' << fmt_double(p.report.kl_bound)
        << ',';
    if (p.report.test_error >= 0.0) out << fmt_double(p.report.test_error);
    out << '\n';
  }
  if (!out) throw format_error("grid csv save failed: " + path);
}

}  // namespace pntk
