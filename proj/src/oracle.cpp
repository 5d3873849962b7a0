#include "scramble/oracle.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "scramble/errors.hpp"
#include "scramble/parallel.hpp"

namespace scramble {
namespace {

std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) out *= base;
  return out;
}

/// Applies m (d^2 x d^2, local index digit1 * d + digit2) to every group of
/// d^2 slots of `data` addressed by the two digit strides.
void apply_local(Complex* data, std::size_t len, int d, std::size_t stride1, std::size_t stride2,
                 const Eigen::MatrixXcd& m) {
  const int dd = d * d;
  std::vector<std::size_t> offsets(dd);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) offsets[a * d + b] = a * stride1 + b * stride2;
  }
  Eigen::VectorXcd in(dd);
  Eigen::VectorXcd out(dd);
  for (std::size_t base = 0; base < len; ++base) {
    if ((base / stride1) % d != 0 || (base / stride2) % d != 0) continue;
    for (int k = 0; k < dd; ++k) in(k) = data[base + offsets[k]];
    out.noalias() = m * in;
    for (int k = 0; k < dd; ++k) data[base + offsets[k]] = out(k);
  }
}

void check_gate(const Eigen::MatrixXcd& gate, int d, Vertex u, Vertex v, std::size_t num_sites) {
  if (gate.rows() != d * d || gate.cols() != d * d) {
    throw ContractError("two-site gate must be " + std::to_string(d * d) + "x" + std::to_string(d * d));
  }
  if (u == v) throw ContractError("two-site gate needs distinct sites");
  if (u >= num_sites || v >= num_sites) throw ContractError("two-site gate site out of range");
}

void check_pauli_index(int d, int index) {
  if (index < 0 || index >= d * d) throw ContractError("Pauli index out of range");
}

double log_factor(EntropyUnit unit) { return unit == EntropyUnit::bits ? std::numbers::ln2 : 1.0; }

/// Weight on `site` from an expansion in the sum_v q_v (d^2)^v layout.
double weight_at_site(std::span<const Complex> alpha, int d, Vertex site) {
  const std::size_t dd = static_cast<std::size_t>(d) * d;
  const std::size_t stride = ipow(dd, site);
  double total = 0.0;
  for (std::size_t s = 0; s < alpha.size(); ++s) {
    if ((s / stride) % dd != 0) total += std::norm(alpha[s]);
  }
  return total;
}

}  // namespace

std::size_t hilbert_dim(int d, std::size_t num_sites, std::size_t cap, bool operator_picture) {
  if (d < 2) throw ValidationError("local dimension must be at least 2");
  std::size_t dim = 1;
  for (std::size_t i = 0; i < num_sites; ++i) {
    if (dim > cap / static_cast<std::size_t>(d)) {
      const double need = std::pow(static_cast<double>(d), static_cast<double>(num_sites));
      const double bytes = (operator_picture ? need * need : need) * sizeof(Complex);
      throw SizeError("dense simulation of " + std::to_string(num_sites) + " sites with d=" + std::to_string(d) +
                      " needs dimension " + std::to_string(static_cast<long double>(need)) + " (" +
                      std::to_string(bytes / (1 << 20)) + " MiB" + (operator_picture ? " per operator" : "") +
                      "); cap is dimension " + std::to_string(cap));
    }
    dim *= static_cast<std::size_t>(d);
  }
  return dim;
}

QuantumState::QuantumState(int d, std::size_t num_sites, const OracleLimits& limits)
    : d_(d), sites_(num_sites), amps_(Eigen::VectorXcd::Zero(hilbert_dim(d, num_sites, limits.max_state_dim))) {
  amps_(0) = 1.0;
}

QuantumState::QuantumState(int d, std::size_t num_sites, Eigen::VectorXcd amplitudes)
    : d_(d), sites_(num_sites), amps_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amps_.size()) != ipow(d, num_sites)) {
    throw ContractError("amplitude vector length must be d^V");
  }
  if (std::abs(amps_.squaredNorm() - 1.0) > 1e-10) throw ContractError("state must be normalized");
}

Eigen::MatrixXcd single_site_pauli(int d, int index) {
  check_pauli_index(d, index);
  using namespace std::complex_literals;
  if (d == 2) {
    Eigen::Matrix2cd m;
    switch (index) {
      case 0: m << 1, 0, 0, 1; break;
      case 1: m << 0, 1, 1, 0; break;
      case 2: m << 0, -1i, 1i, 0; break;
      default: m << 1, 0, 0, -1; break;
    }
    return m;
  }
  const int a = index / d;
  const int b = index % d;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  for (int c = 0; c < d; ++c) {
    const double phase = 2.0 * std::numbers::pi * b * c / d;
    m((c + a) % d, c) = std::polar(1.0, phase);
  }
  return m;
}

DenseOperator embed_single_site(const Eigen::MatrixXcd& op, int d, std::size_t num_sites, Vertex site) {
  if (site >= num_sites) throw ContractError("embed: site out of range");
  const std::size_t dim = ipow(d, num_sites);
  const std::size_t stride = ipow(d, site);
  DenseOperator out = DenseOperator::Zero(dim, dim);
  for (std::size_t c = 0; c < dim; ++c) {
    const std::size_t cs = (c / stride) % d;
    const std::size_t rest = c - cs * stride;
    for (int rs = 0; rs < d; ++rs) out(rest + rs * stride, c) = op(rs, cs);
  }
  return out;
}

Eigen::MatrixXcd haar_unitary(int dim, Rng& rng) {
  if (dim < 1) throw ContractError("haar_unitary: dim must be positive");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd z(dim, dim);
  for (int c = 0; c < dim; ++c) {
    for (int r = 0; r < dim; ++r) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      z(r, c) = Complex(re, im);
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  Eigen::MatrixXcd q = qr.householderQ();
  const auto diag = qr.matrixQR().diagonal();
  for (int c = 0; c < dim; ++c) {
    const double mag = std::abs(diag(c));
    if (mag > 0.0) q.col(c) *= diag(c) / mag;
  }
  return q;
}

bool is_unitary(const Eigen::MatrixXcd& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m.adjoint() * m - Eigen::MatrixXcd::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

Circuit sample_circuit(int d, std::span<const Edge> edges, Rng& rng) {
  Circuit out;
  out.reserve(edges.size());
  for (const Edge& e : edges) out.push_back({e.u, e.v, haar_unitary(d * d, rng)});
  return out;
}

std::vector<Edge> event_edges(const Trajectory& trajectory) {
  if (!trajectory.has_event_log) throw ContractError("event_edges: trajectory has no event log");
  std::vector<Edge> out;
  out.reserve(trajectory.events.size());
  for (const auto& ev : trajectory.events) out.push_back({ev.u, ev.v});
  return out;
}

void apply_two_site_gate(QuantumState& state, const Eigen::MatrixXcd& gate, Vertex u, Vertex v) {
  const int d = state.local_dim();
  check_gate(gate, d, u, v, state.num_sites());
  apply_local(state.amplitudes().data(), state.dim(), d, ipow(d, u), ipow(d, v), gate);
}

void conjugate_by_gate(DenseOperator& op, int d, std::size_t num_sites, const Eigen::MatrixXcd& gate, Vertex u,
                       Vertex v) {
  check_gate(gate, d, u, v, num_sites);
  const std::size_t dim = static_cast<std::size_t>(op.rows());
  const std::size_t len = dim * dim;
  // Column-major storage: flat index r + dim * c.
  const Eigen::MatrixXcd gate_adj = gate.adjoint();
  const Eigen::MatrixXcd gate_t = gate.transpose();
  apply_local(op.data(), len, d, ipow(d, u), ipow(d, v), gate_adj);
  apply_local(op.data(), len, d, dim * ipow(d, u), dim * ipow(d, v), gate_t);
}

QuantumState evolve_circuit(const Graph& g, int d, const Circuit& circuit, QuantumState initial) {
  if (initial.local_dim() != d || initial.num_sites() != g.num_vertices()) {
    throw ContractError("evolve_circuit: state does not match the graph");
  }
  for (const auto& gate : circuit) {
    if (!g.has_edge(gate.u, gate.v)) throw ContractError("evolve_circuit: gate is not on an edge of the graph");
    apply_two_site_gate(initial, gate.gate, gate.u, gate.v);
  }
  return initial;
}

DenseOperator conjugate_in_order(DenseOperator op, int d, std::size_t num_sites, const Circuit& circuit) {
  for (const auto& gate : circuit) conjugate_by_gate(op, d, num_sites, gate.gate, gate.u, gate.v);
  return op;
}

DenseOperator heisenberg(DenseOperator op, int d, std::size_t num_sites, const Circuit& circuit) {
  for (auto it = circuit.rbegin(); it != circuit.rend(); ++it) conjugate_by_gate(op, d, num_sites, it->gate, it->u, it->v);
  return op;
}

double otoc_exact(const Graph& g, int d, Vertex x, Vertex y, const Circuit& circuit, int pauli_a, int pauli_b,
                  const OracleLimits& limits) {
  check_pauli_index(d, pauli_a);
  check_pauli_index(d, pauli_b);
  if (pauli_a == 0 || pauli_b == 0) throw ContractError("otoc_exact: identity Pauli makes the OTOC trivially 0");
  const std::size_t n = g.num_vertices();
  const std::size_t dim = hilbert_dim(d, n, limits.max_operator_dim, true);
  for (const auto& gate : circuit) {
    if (!g.has_edge(gate.u, gate.v)) throw ContractError("otoc_exact: gate is not on an edge of the graph");
  }
  const DenseOperator o1 = embed_single_site(single_site_pauli(d, pauli_a), d, n, x);
  const DenseOperator o2 = heisenberg(embed_single_site(single_site_pauli(d, pauli_b), d, n, y), d, n, circuit);
  const DenseOperator left = o1.adjoint() * o2.adjoint();
  const DenseOperator right = o1 * o2;
  const Complex tr = (left.transpose().cwiseProduct(right)).sum();
  return 1.0 - tr.real() / static_cast<double>(dim);
}

double otoc_pauli_averaged(const Graph& g, int d, Vertex x, Vertex y, const Circuit& circuit, int pauli_b,
                           const OracleLimits& limits) {
  double total = 0.0;
  for (int a = 1; a < d * d; ++a) total += otoc_exact(g, d, x, y, circuit, a, pauli_b, limits);
  return total / (d * d - 1);
}

std::vector<Complex> pauli_expansion(const DenseOperator& op, int d, std::size_t num_sites) {
  const std::size_t dim = ipow(d, num_sites);
  if (static_cast<std::size_t>(op.rows()) != dim || static_cast<std::size_t>(op.cols()) != dim) {
    throw ContractError("pauli_expansion: operator shape does not match d^V");
  }
  const int dd = d * d;
  // Per-site map from (row digit, column digit) to Pauli index q; result for q
  // is stored in the slot (q / d, q % d).
  Eigen::MatrixXcd transform(dd, dd);
  for (int q = 0; q < dd; ++q) {
    const Eigen::MatrixXcd sigma = single_site_pauli(d, q);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) transform(q, r * d + c) = std::conj(sigma(r, c)) / static_cast<double>(d);
    }
  }
  DenseOperator work = op;
  const std::size_t len = dim * dim;
  for (std::size_t s = 0; s < num_sites; ++s) {
    const std::size_t stride = ipow(d, s);
    apply_local(work.data(), len, d, stride, dim * stride, transform);
  }
  std::vector<Complex> alpha(len);
  for (std::size_t str = 0; str < len; ++str) {
    std::size_t rest = str;
    std::size_t row = 0;
    std::size_t col = 0;
    std::size_t stride = 1;
    for (std::size_t s = 0; s < num_sites; ++s) {
      const std::size_t q = rest % dd;
      rest /= dd;
      row += (q / d) * stride;
      col += (q % d) * stride;
      stride *= d;
    }
    alpha[str] = work(row, col);
  }
  return alpha;
}

double pauli_weight_at(const Graph& g, int d, Vertex x, const Circuit& circuit, Vertex y, int pauli_p,
                       const OracleLimits& limits) {
  check_pauli_index(d, pauli_p);
  if (pauli_p == 0) throw ContractError("pauli_weight_at: starting Pauli must be non-identity");
  const std::size_t n = g.num_vertices();
  hilbert_dim(d, n, limits.max_operator_dim, true);
  if (x >= n || y >= n) throw ContractError("pauli_weight_at: vertex out of range");
  for (const auto& gate : circuit) {
    if (!g.has_edge(gate.u, gate.v)) throw ContractError("pauli_weight_at: gate is not on an edge of the graph");
  }
  const DenseOperator op = conjugate_in_order(embed_single_site(single_site_pauli(d, pauli_p), d, n, x), d, n, circuit);
  return weight_at_site(pauli_expansion(op, d, n), d, y);
}

Eigen::VectorXd reduced_spectrum(const QuantumState& state, const Cut& cut) {
  if (cut.num_vertices() != state.num_sites()) throw ContractError("cut does not match the state");
  const int d = state.local_dim();
  const bool use_a = cut.size_a() <= cut.size_b();
  std::vector<std::size_t> row_stride(state.num_sites(), 0);
  std::vector<std::size_t> col_stride(state.num_sites(), 0);
  std::size_t rows = 1;
  std::size_t cols = 1;
  for (Vertex v = 0; v < state.num_sites(); ++v) {
    if (cut.in_a(v) == use_a) {
      row_stride[v] = rows;
      rows *= d;
    } else {
      col_stride[v] = cols;
      cols *= d;
    }
  }
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(rows, cols);
  const auto& amps = state.amplitudes();
  for (std::size_t i = 0; i < state.dim(); ++i) {
    std::size_t rest = i;
    std::size_t r = 0;
    std::size_t c = 0;
    for (Vertex v = 0; v < state.num_sites(); ++v) {
      const std::size_t digit = rest % d;
      rest /= d;
      r += digit * row_stride[v];
      c += digit * col_stride[v];
    }
    m(r, c) = amps(i);
  }
  const Eigen::MatrixXcd rho = m * m.adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

double entanglement_entropy(const QuantumState& state, const Cut& cut, EntropyUnit unit) {
  const Eigen::VectorXd lambda = reduced_spectrum(state, cut);
  double s = 0.0;
  for (double l : lambda) {
    if (l > 1e-12) s -= l * std::log(l);
  }
  return s / log_factor(unit);
}

double renyi2(const QuantumState& state, const Cut& cut, EntropyUnit unit) {
  const Eigen::VectorXd lambda = reduced_spectrum(state, cut);
  return -std::log(lambda.squaredNorm()) / log_factor(unit);
}

IncrementCheck check_entropy_increments(const Graph& g, int d, const Circuit& circuit, std::span<const Cut> cuts,
                                        double tol) {
  IncrementCheck out;
  QuantumState state(d, g.num_vertices());
  const double bound = 2.0 * std::log(static_cast<double>(d));
  std::vector<double> vn(cuts.size());
  std::vector<double> r2(cuts.size());
  for (std::size_t c = 0; c < cuts.size(); ++c) {
    vn[c] = entanglement_entropy(state, cuts[c]);
    r2[c] = renyi2(state, cuts[c]);
  }
  for (const auto& gate : circuit) {
    if (!g.has_edge(gate.u, gate.v)) throw ContractError("entropy check: gate is not on an edge of the graph");
    apply_two_site_gate(state, gate.gate, gate.u, gate.v);
    ++out.gates;
    for (std::size_t c = 0; c < cuts.size(); ++c) {
      const double vn_next = entanglement_entropy(state, cuts[c]);
      const double r2_next = renyi2(state, cuts[c]);
      const bool crossing = cuts[c].in_a(gate.u) != cuts[c].in_a(gate.v);
      for (double inc : {vn_next - vn[c], r2_next - r2[c]}) {
        ++out.checks;
        if (crossing) {
          out.max_crossing_increment = std::max(out.max_crossing_increment, inc);
          if (inc > bound + tol) ++out.violations;
        } else {
          out.max_noncrossing_increment = std::max(out.max_noncrossing_increment, inc);
          if (inc > tol) ++out.violations;
        }
      }
      vn[c] = vn_next;
      r2[c] = r2_next;
    }
  }
  return out;
}

MappingCheck mapping_equivalence(const Graph& g, int d, Vertex x, Vertex y,
                                 std::span<const std::uint32_t> edge_sequence, std::size_t circuit_samples,
                                 std::size_t chain_samples, const RngPolicy& policy, unsigned workers) {
  const std::size_t n = g.num_vertices();
  hilbert_dim(d, n, OracleLimits{}.max_operator_dim, true);
  if (circuit_samples < 2 || chain_samples < 1) throw ContractError("mapping_equivalence: too few samples");
  const std::size_t steps = edge_sequence.size();
  std::vector<Edge> edges;
  for (auto idx : edge_sequence) {
    if (idx >= g.num_edges()) throw ContractError("mapping_equivalence: edge index out of range");
    edges.push_back(g.edge(idx));
  }

  std::vector<double> weights(circuit_samples * steps);
  const RngPolicy oracle_policy = policy.fork("oracle");
  const DenseOperator start = embed_single_site(single_site_pauli(d, 1), d, n, x);
  parallel_for(circuit_samples, workers, [&](std::size_t k) {
    Rng rng = oracle_policy.stream(k);
    DenseOperator op = start;
    for (std::size_t j = 0; j < steps; ++j) {
      conjugate_by_gate(op, d, n, haar_unitary(d * d, rng), edges[j].u, edges[j].v);
      weights[k * steps + j] = weight_at_site(pauli_expansion(op, d, n), d, y);
    }
  });

  std::vector<double> sample_times(steps);
  for (std::size_t j = 0; j < steps; ++j) sample_times[j] = static_cast<double>(j + 1) / static_cast<double>(g.num_edges());
  const Schedule schedule = Schedule::fixed({edge_sequence.begin(), edge_sequence.end()});
  const SaturationCurve chain =
      occupancy_curve(g, ChainParams(d), x, y, schedule, sample_times, chain_samples, policy.fork("chain"), workers);

  MappingCheck out;
  const double count = static_cast<double>(circuit_samples);
  for (std::size_t j = 0; j < steps; ++j) {
    double mean = 0.0;
    for (std::size_t k = 0; k < circuit_samples; ++k) mean += weights[k * steps + j];
    mean /= count;
    double var = 0.0;
    for (std::size_t k = 0; k < circuit_samples; ++k) {
      const double dev = weights[k * steps + j] - mean;
      var += dev * dev;
    }
    var /= count - 1.0;
    const double se = std::sqrt(var / count);
    out.oracle_mean.push_back(mean);
    out.oracle_se.push_back(se);
    out.chain_mean.push_back(chain.estimates[j]);
    out.chain_se.push_back(chain.std_errors[j]);
    const double diff = std::abs(mean - chain.estimates[j]);
    const double pooled = std::hypot(se, chain.std_errors[j]);
    const double z = diff < 1e-12 ? 0.0 : (pooled > 0.0 ? diff / pooled : std::numeric_limits<double>::infinity());
    out.z.push_back(z);
    out.max_z = std::max(out.max_z, z);
  }
  return out;
}

}  // namespace scramble
