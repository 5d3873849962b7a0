#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "scramble/chain.hpp"
#include "scramble/graph.hpp"
#include "scramble/rng.hpp"

namespace scramble {

using Complex = std::complex<double>;
using DenseOperator = Eigen::MatrixXcd;

/// Memory caps for dense simulation. Defaults allow 12 qubits in the state
/// picture and 7 qubits in the operator picture.
struct OracleLimits {
  std::size_t max_state_dim = 4096;
  std::size_t max_operator_dim = 128;
};

/// d^V, throwing SizeError (with the memory it would need) above `cap`.
std::size_t hilbert_dim(int d, std::size_t num_sites, std::size_t cap, bool operator_picture = false);

/// Pure state on V qudits. Basis index = sum_v s_v d^v (vertex 0 least significant).
class QuantumState {
 public:
  /// |0...0>.
  QuantumState(int d, std::size_t num_sites, const OracleLimits& limits = {});
  QuantumState(int d, std::size_t num_sites, Eigen::VectorXcd amplitudes);

  int local_dim() const noexcept { return d_; }
  std::size_t num_sites() const noexcept { return sites_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(amps_.size()); }
  const Eigen::VectorXcd& amplitudes() const noexcept { return amps_; }
  Eigen::VectorXcd& amplitudes() noexcept { return amps_; }
  double norm() const { return amps_.norm(); }

 private:
  int d_;
  std::size_t sites_;
  Eigen::VectorXcd amps_;
};

/// Unitary operator basis on one qudit. For d = 2: 0 = I, 1 = X, 2 = Y, 3 = Z.
/// For d > 2: index p = a*d + b maps to the clock/shift product X^a Z^b.
Eigen::MatrixXcd single_site_pauli(int d, int index);

/// op acting on `site` tensored with identity elsewhere (d^V x d^V).
DenseOperator embed_single_site(const Eigen::MatrixXcd& op, int d, std::size_t num_sites, Vertex site);

/// Haar-random unitary: QR of a complex Gaussian matrix, with the phases of
/// R's diagonal moved into Q.
Eigen::MatrixXcd haar_unitary(int dim, Rng& rng);

bool is_unitary(const Eigen::MatrixXcd& m, double tol = 1e-10);

/// Gate in the basis index s_u * d + s_v.
struct CircuitGate {
  Vertex u;
  Vertex v;
  Eigen::MatrixXcd gate;
};
using Circuit = std::vector<CircuitGate>;

/// One independent Haar gate per listed edge, in order.
Circuit sample_circuit(int d, std::span<const Edge> edges, Rng& rng);
/// Edge list of a recorded trajectory (every scheduled gate, whatever its outcome).
std::vector<Edge> event_edges(const Trajectory& trajectory);

void apply_two_site_gate(QuantumState& state, const Eigen::MatrixXcd& gate, Vertex u, Vertex v);

/// op <- G^dagger op G for a two-site gate G on (u, v).
void conjugate_by_gate(DenseOperator& op, int d, std::size_t num_sites, const Eigen::MatrixXcd& gate,
                       Vertex u, Vertex v);

/// Sequential gate application; every gate must sit on an edge of g.
QuantumState evolve_circuit(const Graph& g, int d, const Circuit& circuit, QuantumState initial);

/// Operator picture in step order: op <- G_k^dagger op G_k for k = 1..T.
/// This is the order in which the spreading chain consumes the schedule.
DenseOperator conjugate_in_order(DenseOperator op, int d, std::size_t num_sites, const Circuit& circuit);

/// Heisenberg picture U^dagger op U with U = G_T ... G_1.
DenseOperator heisenberg(DenseOperator op, int d, std::size_t num_sites, const Circuit& circuit);

/// C = 1 - Re (1/d^V) Tr[O1^dagger O2(t)^dagger O1 O2(t)] with O1 = pauli_a at x
/// and O2(t) the Heisenberg-evolved pauli_b at y. Identity indices are rejected.
double otoc_exact(const Graph& g, int d, Vertex x, Vertex y, const Circuit& circuit, int pauli_a, int pauli_b,
                  const OracleLimits& limits = {});

/// otoc_exact averaged over the d^2 - 1 non-identity choices of pauli_a.
double otoc_pauli_averaged(const Graph& g, int d, Vertex x, Vertex y, const Circuit& circuit, int pauli_b,
                           const OracleLimits& limits = {});

/// alpha_q = (1/d^V) Tr[op sigma_q^dagger], indexed by sum_v q_v (d^2)^v.
std::vector<Complex> pauli_expansion(const DenseOperator& op, int d, std::size_t num_sites);

/// Pauli weight on y of pauli_p at x conjugated through the circuit in step order:
/// the sum of |alpha_q|^2 over strings q that are non-identity at y.
double pauli_weight_at(const Graph& g, int d, Vertex x, const Circuit& circuit, Vertex y, int pauli_p = 1,
                       const OracleLimits& limits = {});

enum class EntropyUnit { nats, bits };

/// Eigenvalues of the reduced density matrix of the smaller side of the cut.
Eigen::VectorXd reduced_spectrum(const QuantumState& state, const Cut& cut);
/// Von Neumann entropy; eigenvalues below 1e-12 count as exact zeros.
double entanglement_entropy(const QuantumState& state, const Cut& cut, EntropyUnit unit = EntropyUnit::nats);
/// -log Tr[rho_A^2].
double renyi2(const QuantumState& state, const Cut& cut, EntropyUnit unit = EntropyUnit::nats);

struct IncrementCheck {
  std::size_t gates = 0;
  std::size_t checks = 0;
  std::size_t violations = 0;
  double max_crossing_increment = 0.0;       // von Neumann and Renyi-2 pooled
  double max_noncrossing_increment = 0.0;
};

/// Runs the circuit from |0...0> and checks every gate against every cut:
/// entropy increments at most 2 log d + tol for crossing gates and at most tol
/// otherwise, for both von Neumann and Renyi-2 entropy (nats).
IncrementCheck check_entropy_increments(const Graph& g, int d, const Circuit& circuit, std::span<const Cut> cuts,
                                        double tol = 1e-8);

/// Circuit-averaged Pauli weight at y against chain occupancy of y, both
/// after every gate of a fixed schedule.
struct MappingCheck {
  std::vector<double> oracle_mean;
  std::vector<double> oracle_se;
  std::vector<double> chain_mean;
  std::vector<double> chain_se;
  std::vector<double> z;  // |difference| / pooled standard error
  double max_z = 0.0;
};

MappingCheck mapping_equivalence(const Graph& g, int d, Vertex x, Vertex y,
                                 std::span<const std::uint32_t> edge_sequence, std::size_t circuit_samples,
                                 std::size_t chain_samples, const RngPolicy& policy, unsigned workers = 0);

}  // namespace scramble
