#include "cpdgrid/circuit_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <utility>

#include "cpdgrid/error.hpp"

namespace cpdgrid {

namespace {

constexpr double kStructuralTol = 1e-12;
constexpr double kSpectralTol = 1e-10;

}  // namespace

Network::Network(std::vector<std::string> nodes, std::vector<Branch> branches,
                 std::map<std::string, double> injections,
                 std::vector<std::string> interior)
    : nodes_(std::move(nodes)),
      branches_(std::move(branches)),
      injections_(std::move(injections)),
      interior_(std::move(interior)) {
  if (nodes_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "network has no nodes");
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].empty()) {
      throw Error(ErrorCode::InvalidArgument, "node label must be non-empty");
    }
    if (!index_.emplace(nodes_[i], i).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate node label '" + nodes_[i] + "'");
    }
  }

  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<std::vector<std::size_t>> adjacency(nodes_.size());
  for (const auto& branch : branches_) {
    const auto ia = index_of(branch.a);
    const auto ib = index_of(branch.b);
    if (ia == ib) {
      throw Error(ErrorCode::SelfLoop, "self-loop branch at node '" + branch.a + "'");
    }
    if (!std::isfinite(branch.conductance) || branch.conductance <= 0.0) {
      throw Error(ErrorCode::NonpositiveConductance,
                  "branch " + branch.a + "-" + branch.b + " has nonpositive conductance");
    }
    if (!seen.emplace(std::min(ia, ib), std::max(ia, ib)).second) {
      throw Error(ErrorCode::DuplicateBranch,
                  "duplicate branch between '" + branch.a + "' and '" + branch.b + "'");
    }
    adjacency[ia].push_back(ib);
    adjacency[ib].push_back(ia);
  }

  std::vector<bool> visited(nodes_.size(), false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  visited[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const auto u = frontier.front();
    frontier.pop();
    for (auto v : adjacency[u]) {
      if (!visited[v]) {
        visited[v] = true;
        ++reached;
        frontier.push(v);
      }
    }
  }
  if (reached != nodes_.size()) {
    throw Error(ErrorCode::DisconnectedGraph,
                "network is disconnected (" + std::to_string(reached) + " of " +
                    std::to_string(nodes_.size()) + " nodes reachable)");
  }

  std::set<std::string> interior_set;
  for (const auto& node : interior_) {
    (void)index_of(node);
    if (!interior_set.insert(node).second) {
      throw Error(ErrorCode::InvalidArgument, "interior node '" + node + "' listed twice");
    }
  }
  for (const auto& [node, power] : injections_) {
    (void)index_of(node);
    if (!std::isfinite(power)) {
      throw Error(ErrorCode::InvalidArgument, "injection at '" + node + "' is not finite");
    }
    if (interior_set.count(node) != 0) {
      throw Error(ErrorCode::InteriorNodeHasInjection,
                  "interior node '" + node + "' carries an injection");
    }
  }
  if (interior_set.size() == nodes_.size()) {
    throw Error(ErrorCode::SingularInteriorBlock, "every node is interior; no ports remain");
  }
}

std::size_t Network::index_of(std::string_view node) const {
  auto it = index_.find(std::string(node));
  if (it == index_.end()) {
    throw Error(ErrorCode::UnknownNode, "unknown node '" + std::string(node) + "'");
  }
  return it->second;
}

bool Network::is_interior(std::string_view node) const {
  return std::find(interior_.begin(), interior_.end(), node) != interior_.end();
}

std::vector<std::string> Network::port_ids() const {
  std::vector<std::string> ports;
  ports.reserve(nodes_.size() - interior_.size());
  for (const auto& node : nodes_) {
    if (!is_interior(node)) ports.push_back(node);
  }
  return ports;
}

Vector Network::injection_vector() const {
  const auto ports = port_ids();
  Vector p = Vector::Zero(static_cast<Eigen::Index>(ports.size()));
  for (std::size_t k = 0; k < ports.size(); ++k) {
    auto it = injections_.find(ports[k]);
    if (it != injections_.end()) p(static_cast<Eigen::Index>(k)) = it->second;
  }
  return p;
}

double Network::min_conductance() const {
  double g = std::numeric_limits<double>::infinity();
  for (const auto& branch : branches_) g = std::min(g, branch.conductance);
  return g;
}

Network Network::with_injections(const Vector& port_powers) const {
  const auto ports = port_ids();
  if (static_cast<std::size_t>(port_powers.size()) != ports.size()) {
    throw Error(ErrorCode::DimensionMismatch, "injection vector length does not match ports");
  }
  std::map<std::string, double> injections;
  for (std::size_t k = 0; k < ports.size(); ++k) {
    injections[ports[k]] = port_powers(static_cast<Eigen::Index>(k));
  }
  return Network(nodes_, branches_, std::move(injections), interior_);
}

Network Network::scaled_conductances(double factor) const {
  if (!(factor > 0.0)) {
    throw Error(ErrorCode::NonpositiveConductance, "conductance scale factor must be positive");
  }
  auto branches = branches_;
  for (auto& branch : branches) branch.conductance *= factor;
  return Network(nodes_, std::move(branches), injections_, interior_);
}

ConductanceMatrix::ConductanceMatrix(Matrix values, std::vector<std::string> labels)
    : values_(std::move(values)), labels_(std::move(labels)) {
  if (values_.rows() != values_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "conductance matrix must be square");
  }
  if (labels_.empty()) {
    for (Eigen::Index i = 0; i < values_.rows(); ++i) labels_.push_back(std::to_string(i + 1));
  }
  if (static_cast<Eigen::Index>(labels_.size()) != values_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "label count does not match matrix size");
  }
}

Vector ConductanceMatrix::currents(const Vector& voltages) const {
  const auto n = values_.rows();
  if (voltages.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "voltage vector length does not match G");
  }
  Vector current = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) sum -= values_(i, j) * (voltages(i) - voltages(j));
    }
    current(i) = sum;
  }
  return current;
}

ConductanceMatrix ConductanceMatrix::scaled(double factor) const {
  return ConductanceMatrix(values_ * factor, labels_);
}

ConductanceMatrix build_conductance_matrix(const Network& network) {
  const auto n = static_cast<Eigen::Index>(network.node_count());
  Matrix g = Matrix::Zero(n, n);
  for (const auto& branch : network.branches()) {
    const auto i = static_cast<Eigen::Index>(network.index_of(branch.a));
    const auto j = static_cast<Eigen::Index>(network.index_of(branch.b));
    g(i, i) += branch.conductance;
    g(j, j) += branch.conductance;
    g(i, j) -= branch.conductance;
    g(j, i) -= branch.conductance;
  }
  return ConductanceMatrix(std::move(g), network.nodes());
}

ConductanceMatrix port_conductance_matrix(const Network& network) {
  auto full = build_conductance_matrix(network);
  if (network.interior().empty()) return full;
  return kron_reduce(full, network.interior());
}

ConductanceMatrix kron_reduce(const ConductanceMatrix& matrix,
                              const std::vector<std::string>& interior) {
  const auto& labels = matrix.labels();
  const auto n = static_cast<Eigen::Index>(labels.size());
  std::vector<bool> eliminated(labels.size(), false);
  std::vector<Eigen::Index> order;
  for (const auto& node : interior) {
    auto it = std::find(labels.begin(), labels.end(), node);
    if (it == labels.end()) {
      throw Error(ErrorCode::UnknownNode, "unknown interior node '" + node + "'");
    }
    const auto k = static_cast<Eigen::Index>(it - labels.begin());
    if (eliminated[static_cast<std::size_t>(k)]) {
      throw Error(ErrorCode::InvalidArgument, "interior node '" + node + "' listed twice");
    }
    eliminated[static_cast<std::size_t>(k)] = true;
    order.push_back(k);
  }
  if (order.empty()) return matrix;
  if (order.size() == labels.size()) {
    throw Error(ErrorCode::SingularInteriorBlock, "cannot eliminate every node");
  }

  Matrix g = matrix.values();
  const double scale = std::max(g.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);
  std::vector<bool> active(labels.size(), true);
  for (auto k : order) {
    const double pivot = g(k, k);
    if (!(pivot > kStructuralTol * scale)) {
      throw Error(ErrorCode::SingularInteriorBlock,
                  "interior block is singular at node '" + labels[static_cast<std::size_t>(k)] +
                      "'");
    }
    active[static_cast<std::size_t>(k)] = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!active[static_cast<std::size_t>(i)] || g(i, k) == 0.0) continue;
      const double factor = g(i, k) / pivot;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (active[static_cast<std::size_t>(j)]) g(i, j) -= factor * g(k, j);
      }
    }
  }

  std::vector<Eigen::Index> keep;
  std::vector<std::string> kept_labels;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (active[static_cast<std::size_t>(i)]) {
      keep.push_back(i);
      kept_labels.push_back(labels[static_cast<std::size_t>(i)]);
    }
  }
  const auto m = static_cast<Eigen::Index>(keep.size());
  Matrix reduced(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) reduced(a, b) = g(keep[a], keep[b]);
  }
  // Symmetrize away roundoff from the asymmetric update order.
  reduced = 0.5 * (reduced + reduced.transpose()).eval();
  return ConductanceMatrix(std::move(reduced), std::move(kept_labels));
}

Network reduce_network(const Network& network) {
  if (network.interior().empty()) return network;
  const auto reduced = port_conductance_matrix(network);
  const auto& labels = reduced.labels();
  std::vector<Branch> branches;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      const double g = -reduced(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (g > 0.0) branches.push_back({labels[i], labels[j], g});
    }
  }
  return Network(labels, std::move(branches), network.injections(), {});
}

LaplacianDiagnostics validate_laplacian(const Matrix& matrix) {
  LaplacianDiagnostics report;
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) return report;
  const auto n = matrix.rows();
  report.inf_norm = matrix.cwiseAbs().rowwise().sum().maxCoeff();
  report.max_row_sum = matrix.rowwise().sum().cwiseAbs().maxCoeff();
  report.symmetry_defect = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
  report.min_diagonal = matrix.diagonal().minCoeff();
  report.max_offdiagonal = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) report.max_offdiagonal = std::max(report.max_offdiagonal, matrix(i, j));
    }
  }
  if (n == 1) report.max_offdiagonal = 0.0;
  const Matrix symmetric = 0.5 * (matrix + matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
  report.min_eigenvalue = solver.info() == Eigen::Success
                              ? solver.eigenvalues().minCoeff()
                              : -std::numeric_limits<double>::infinity();

  const double tol = kStructuralTol * std::max(report.inf_norm, 1e-300);
  report.symmetry_ok = report.symmetry_defect <= tol;
  report.row_sum_ok = report.max_row_sum <= tol;
  report.sign_pattern_ok = report.max_offdiagonal <= 0.0 && report.min_diagonal >= 0.0;
  report.psd_ok = report.min_eigenvalue >= -kSpectralTol * std::max(report.inf_norm, 1e-300);
  return report;
}

}  // namespace cpdgrid
