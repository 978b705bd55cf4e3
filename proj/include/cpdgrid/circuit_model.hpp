#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace cpdgrid {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Resistive branch between two nodes, conductance in siemens.
struct Branch {
  std::string a;
  std::string b;
  double conductance = 0.0;

  bool operator==(const Branch&) const = default;
};

/// Resistive network with constant-power devices at its ports.
///
/// Every node is either a port (it may carry a power injection in watts,
/// positive for generation, negative for load) or a passive interior node
/// that is removed by Kron reduction before analysis. The datum node is
/// implicit. Construction validates the invariants and throws cpdgrid::Error:
///   - branch endpoints exist, no self loops, no duplicate unordered pairs
///   - every conductance is finite and strictly positive
///   - the graph on all nodes is connected
///   - interior nodes carry no injection
class Network {
 public:
  Network(std::vector<std::string> nodes, std::vector<Branch> branches,
          std::map<std::string, double> injections,
          std::vector<std::string> interior = {});

  [[nodiscard]] const std::vector<std::string>& nodes() const noexcept { return nodes_; }
  [[nodiscard]] const std::vector<Branch>& branches() const noexcept { return branches_; }
  [[nodiscard]] const std::map<std::string, double>& injections() const noexcept {
    return injections_;
  }
  [[nodiscard]] const std::vector<std::string>& interior() const noexcept { return interior_; }

  [[nodiscard]] std::size_t node_count() const noexcept { return nodes_.size(); }
  [[nodiscard]] std::size_t index_of(std::string_view node) const;
  [[nodiscard]] bool is_interior(std::string_view node) const;

  /// Port labels (all nodes not declared interior), in node order.
  [[nodiscard]] std::vector<std::string> port_ids() const;

  /// Injection vector over port_ids(); ports without an entry inject 0 W.
  [[nodiscard]] Vector injection_vector() const;

  /// Smallest branch conductance.
  [[nodiscard]] double min_conductance() const;

  /// Same topology with injections replaced (values over port_ids()).
  [[nodiscard]] Network with_injections(const Vector& port_powers) const;

  /// Same topology with every conductance multiplied by `factor` > 0.
  [[nodiscard]] Network scaled_conductances(double factor) const;

 private:
  std::vector<std::string> nodes_;
  std::vector<Branch> branches_;
  std::map<std::string, double> injections_;
  std::vector<std::string> interior_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Symmetric conductance (Laplacian) matrix with node labels.
class ConductanceMatrix {
 public:
  ConductanceMatrix(Matrix values, std::vector<std::string> labels);

  [[nodiscard]] std::size_t size() const noexcept {
    return static_cast<std::size_t>(values_.rows());
  }
  [[nodiscard]] const Matrix& values() const noexcept { return values_; }
  [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return labels_; }
  [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }

  /// Nodal currents G·V evaluated as sum_j g_ij (V_i - V_j), so that a
  /// uniform profile yields exactly zero current.
  [[nodiscard]] Vector currents(const Vector& voltages) const;

  [[nodiscard]] ConductanceMatrix scaled(double factor) const;

 private:
  Matrix values_;
  std::vector<std::string> labels_;
};

/// Laplacian of the full network (ports and interior nodes, node order).
ConductanceMatrix build_conductance_matrix(const Network& network);

/// Laplacian over the ports only: build, then Kron-reduce the interior.
ConductanceMatrix port_conductance_matrix(const Network& network);

/// Schur complement of `matrix` with respect to the `interior` nodes,
/// eliminated one pivot at a time in the order given. Remaining labels keep
/// their original order. Throws SingularInteriorBlock, UnknownNode.
ConductanceMatrix kron_reduce(const ConductanceMatrix& matrix,
                              const std::vector<std::string>& interior);

/// Port-only network equivalent to `network`: branches are read back from
/// the reduced Laplacian, injections are kept. Identity when there are no
/// interior nodes.
Network reduce_network(const Network& network);

struct LaplacianDiagnostics {
  double max_row_sum = 0.0;        // max_i |sum_j G_ij|
  double symmetry_defect = 0.0;    // max_ij |G_ij - G_ji|
  double max_offdiagonal = 0.0;    // largest off-diagonal entry (should be <= 0)
  double min_diagonal = 0.0;
  double min_eigenvalue = 0.0;
  double inf_norm = 0.0;

  bool symmetry_ok = false;
  bool row_sum_ok = false;
  bool sign_pattern_ok = false;
  bool psd_ok = false;

  [[nodiscard]] bool passed() const noexcept {
    return symmetry_ok && row_sum_ok && sign_pattern_ok && psd_ok;
  }
};

/// Numerical check of the Laplacian properties: symmetry and row sums at
/// 1e-12 relative to ||G||_inf, PSD at -1e-10 relative. Report only.
LaplacianDiagnostics validate_laplacian(const Matrix& matrix);

}  // namespace cpdgrid
