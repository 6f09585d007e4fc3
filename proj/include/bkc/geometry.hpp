// geometry.hpp — Metric weights, curved inner products, discretized
// curved-space operators, and Bethe-lattice tree graphs with dimension
// reduction to asymmetric-hopping chains.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <ostream>
#include <vector>

#include "bkc/model.hpp"

namespace bkc::geometry {

// Constant-negative-curvature strip sampled at s_n = n d, n = 1..L.
// orientation = +1 puts the funneling mouth (smallest sqrt(g)) at site L.
struct HyperbolicMetric {
    double kappa = 0.0;  // curvature magnitude, >= 0
    double d = 1.0;
    int L = 2;
    int orientation = +1;
};

// Metric of the hyperbolic surface dual to a chain: kappa = ln^2|t_R/t_L|/d^2,
// mouth on the side the eigenstates pile up (sign of A).
HyperbolicMetric metric_for_chain(const HNParams& chain);

// sqrt(g)_n = exp(-orientation * sqrt(kappa) * n * d).
Eigen::VectorXd metric_weights(const HyperbolicMetric& metric);

// Discrete flavor: layer sizes q^{n-1} of a branching-q tree, n = 1..N.
Eigen::VectorXd tree_metric_weights(int q, int N);

std::complex<double> curved_inner_product(const Eigen::VectorXcd& a,
                                          const Eigen::VectorXcd& b,
                                          const Eigen::VectorXd& weights);

// Discretized curved-space Schroedinger operator at zero transverse momentum:
// H = -(hbar^2/2m)(d_ss - sqrt(kappa) d_s) + Gamma - hbar^2 kappa/(8m),
// central differences, Dirichlet ends. Returned with Hamiltonian kind.
Generator build_curved_schrodinger_operator(const HyperbolicMetric& metric, double mass,
                                            double Gamma, double hbar = 1.0);

// Curved diffusion-reaction flow: G = D (d_ss - sqrt(kappa) d_s) - Gamma + kappa D/4.
Generator build_curved_diffusion_operator(const HyperbolicMetric& metric, double D,
                                          double Gamma);

// Bethe-lattice tree, breadth-first layer-major node order. Node (n, m) with
// 1 <= n <= N, 1 <= m <= q^{n-1}; parent of (n, m) is (n-1, ceil(m/q)).
struct TreeGraph {
    int q = 2;
    int N = 1;
    long long nodes = 1;
    std::vector<long long> layer_offset;  // size N+1, offsets into node array
    // adjacency in CSR form
    std::vector<long long> row_ptr;
    std::vector<long long> cols;
};

TreeGraph build_tree(int q, int N);  // rejects (q^N - 1)/(q - 1) > 1e6

long long tree_node_index(const TreeGraph& t, int layer, long long m);  // 1-based (n, m)
long long tree_parent(const TreeGraph& t, long long node);              // -1 for the root

struct TreeTrajectory {
    std::vector<double> times;
    Eigen::MatrixXcd states;  // one row per sample
};

// Schroedinger evolution i phi_dot = -t (sum over neighbors), complex RK4.
TreeTrajectory evolve_tree(const TreeGraph& tree, double t_hop,
                           const Eigen::VectorXcd& s0, const std::vector<double>& times,
                           double dt);

struct ReducedTreeTrajectory {
    std::vector<double> times;
    Eigen::MatrixXcd layers;      // one row per sample, N columns
    double max_nonuniformity = 0.0;
};

// Layer profile Phi_n(tau) of a layer-uniform evolution. Rejects initial
// states with in-layer deviation > 1e-12 and asserts < 1e-8 at all samples.
ReducedTreeTrajectory reduce_tree(const TreeGraph& tree, const TreeTrajectory& traj);

// Hamiltonian of the layer-uniform sector: i Phi_dot_n = -t Phi_{n-1} - q t Phi_{n+1}.
// As an asymmetric-hopping chain this is (t_R, t_L) = (t, -q t) up to the i^n
// gauge, the oscillatory chain with |t_L| = q t the tree reduces to.
Eigen::MatrixXd reduced_chain_hamiltonian(int q, double t_hop, int N);

// Edge list CSV: parent_id,child_id (0-based node ids).
void write_tree_edges_csv(const TreeGraph& tree, std::ostream& os);

}  // namespace bkc::geometry
