// geometry.cpp — metric weights, curved operators, tree graphs, reduction.

#include "bkc/geometry.hpp"

#include <cmath>

#include "bkc/io.hpp"

namespace bkc::geometry {

using cd = std::complex<double>;

HyperbolicMetric metric_for_chain(const HNParams& chain) {
    HyperbolicMetric m;
    m.kappa = curvature(chain);
    m.d = chain.d;
    m.L = chain.L;
    const double a = std::log(std::abs(chain.t_R / chain.t_L));
    m.orientation = a >= 0.0 ? +1 : -1;
    return m;
}

Eigen::VectorXd metric_weights(const HyperbolicMetric& metric) {
    if (metric.kappa < 0.0) throw domain_error("metric_weights: kappa must be >= 0");
    Eigen::VectorXd w(metric.L);
    const double rate = metric.orientation * std::sqrt(metric.kappa) * metric.d;
    for (int n = 1; n <= metric.L; ++n) w[n - 1] = std::exp(-rate * n);
    return w;
}

Eigen::VectorXd tree_metric_weights(int q, int N) {
    if (q < 2 || N < 1) throw domain_error("tree_metric_weights: q >= 2, N >= 1 required");
    Eigen::VectorXd w(N);
    double v = 1.0;
    for (int n = 0; n < N; ++n) { w[n] = v; v *= q; }
    return w;
}

std::complex<double> curved_inner_product(const Eigen::VectorXcd& a,
                                          const Eigen::VectorXcd& b,
                                          const Eigen::VectorXd& weights) {
    if (a.size() != b.size() || a.size() != weights.size())
        throw domain_error("curved_inner_product: length mismatch");
    cd acc = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) acc += weights[i] * std::conj(a[i]) * b[i];
    return acc;
}

namespace {

Generator curved_tridiagonal(const HyperbolicMetric& metric, double c2,
                             double diag_const, GeneratorKind kind) {
    // central differences for  c2 * (d_ss - sqrt(kappa) d_s) + diag_const
    if (metric.L < 3) throw domain_error("curved operator: L must be >= 3");
    const double d = metric.d;
    const double sk = metric.orientation * std::sqrt(metric.kappa);
    Generator g;
    g.kind = kind;
    g.band_offsets = {-1, 0, 1};
    g.mat = Eigen::MatrixXd::Zero(metric.L, metric.L);
    const double diag = -2.0 * c2 / (d * d) + diag_const;
    const double sub = c2 / (d * d) + c2 * sk / (2.0 * d);
    const double sup = c2 / (d * d) - c2 * sk / (2.0 * d);
    for (int n = 0; n < metric.L; ++n) {
        g.mat(n, n) = diag;
        if (n - 1 >= 0) g.mat(n, n - 1) = sub;
        if (n + 1 < metric.L) g.mat(n, n + 1) = sup;
    }
    return g;
}

}  // namespace

Generator build_curved_schrodinger_operator(const HyperbolicMetric& metric, double mass,
                                            double Gamma, double hbar) {
    if (mass == 0.0) throw domain_error("build_curved_schrodinger_operator: zero mass");
    const double c2 = -hbar * hbar / (2.0 * mass);
    const double diag_const = Gamma - hbar * hbar * metric.kappa / (8.0 * mass);
    return curved_tridiagonal(metric, c2, diag_const, GeneratorKind::Hamiltonian);
}

Generator build_curved_diffusion_operator(const HyperbolicMetric& metric, double D,
                                          double Gamma) {
    const double diag_const = -Gamma + metric.kappa * D / 4.0;
    return curved_tridiagonal(metric, D, diag_const, GeneratorKind::Flow);
}

TreeGraph build_tree(int q, int N) {
    if (q < 2) throw domain_error("build_tree: q must be >= 2");
    if (N < 1) throw domain_error("build_tree: N must be >= 1");
    TreeGraph t;
    t.q = q;
    t.N = N;
    t.layer_offset.assign(N + 1, 0);
    long long sz = 1;
    for (int n = 0; n < N; ++n) {
        t.layer_offset[n + 1] = t.layer_offset[n] + sz;
        if (t.layer_offset[n + 1] > 1000000)
            throw domain_error("build_tree: node count (q^N - 1)/(q - 1) exceeds 1e6");
        sz *= q;
    }
    t.nodes = t.layer_offset[N];

    // degree counts: root q children; internal 1 parent + q children; leaf 1 parent
    t.row_ptr.assign(t.nodes + 1, 0);
    for (long long v = 0; v < t.nodes; ++v) {
        long long deg = 0;
        const bool is_root = (v == 0);
        const bool is_leaf = (v >= t.layer_offset[N - 1]);
        if (!is_root) deg += 1;
        if (!is_leaf) deg += q;
        t.row_ptr[v + 1] = t.row_ptr[v] + deg;
    }
    t.cols.assign(t.row_ptr[t.nodes], 0);
    std::vector<long long> fill(t.nodes, 0);
    for (int n = 1; n < N; ++n) {
        const long long layer_sz = t.layer_offset[n + 1] - t.layer_offset[n];
        for (long long m = 0; m < layer_sz; ++m) {
            const long long child = t.layer_offset[n] + m;
            const long long parent = t.layer_offset[n - 1] + m / q;
            t.cols[t.row_ptr[child] + fill[child]++] = parent;
            t.cols[t.row_ptr[parent] + fill[parent]++] = child;
        }
    }
    return t;
}

long long tree_node_index(const TreeGraph& t, int layer, long long m) {
    if (layer < 1 || layer > t.N) throw domain_error("tree_node_index: layer out of range");
    const long long sz = t.layer_offset[layer] - t.layer_offset[layer - 1];
    if (m < 1 || m > sz) throw domain_error("tree_node_index: m out of range");
    return t.layer_offset[layer - 1] + (m - 1);
}

long long tree_parent(const TreeGraph& t, long long node) {
    if (node <= 0) return -1;
    int layer = 1;
    while (t.layer_offset[layer] <= node) ++layer;  // node in layer `layer` (1-based)
    const long long m = node - t.layer_offset[layer - 1];
    return t.layer_offset[layer - 2] + m / t.q;
}

TreeTrajectory evolve_tree(const TreeGraph& tree, double t_hop,
                           const Eigen::VectorXcd& s0, const std::vector<double>& times,
                           double dt) {
    if (s0.size() != tree.nodes) throw domain_error("evolve_tree: state size mismatch");
    const double hnorm = std::abs(t_hop) * (tree.q + 1);
    if (dt * hnorm >= 0.5)
        throw domain_error("evolve_tree: dt * ||H||_inf violates the stability bound");

    const long long n = tree.nodes;
    // phi_dot = i t_hop * (Adj phi)
    const cd factor = cd(0.0, t_hop);
    auto apply = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
        for (long long v = 0; v < n; ++v) {
            cd acc = 0.0;
            for (long long e = tree.row_ptr[v]; e < tree.row_ptr[v + 1]; ++e)
                acc += x[tree.cols[e]];
            y[v] = factor * acc;
        }
    };

    TreeTrajectory out;
    out.times = times;
    out.states.resize(times.size(), n);
    Eigen::VectorXcd y = s0, k1(n), k2(n), k3(n), k4(n), tmp(n);
    double tau = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double target = times[i];
        if (target < tau - 1e-12)
            throw domain_error("evolve_tree: times must be increasing");
        while (tau < target - 1e-12) {
            const double h = std::min(dt, target - tau);
            apply(y, k1);
            tmp = y + 0.5 * h * k1;
            apply(tmp, k2);
            tmp = y + 0.5 * h * k2;
            apply(tmp, k3);
            tmp = y + h * k3;
            apply(tmp, k4);
            y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            tau += h;
        }
        if (!y.allFinite())
            throw domain_error("evolve_tree: NaN/overflow at tau = " + io::format_g17(tau));
        out.states.row(i) = y;
    }
    return out;
}

ReducedTreeTrajectory reduce_tree(const TreeGraph& tree, const TreeTrajectory& traj) {
    ReducedTreeTrajectory out;
    out.times = traj.times;
    out.layers.resize(traj.times.size(), tree.N);

    auto layer_spread = [&](Eigen::Index row, int n) {
        const long long lo = tree.layer_offset[n], hi = tree.layer_offset[n + 1];
        const cd ref = traj.states(row, lo);
        double dev = 0.0;
        for (long long v = lo; v < hi; ++v)
            dev = std::max(dev, std::abs(traj.states(row, v) - ref));
        return dev;
    };

    for (int n = 0; n < tree.N; ++n)
        if (layer_spread(0, n) > 1e-12)
            throw domain_error("reduce_tree: initial state not layer-uniform "
                               "(in-layer deviation > 1e-12)");
    for (Eigen::Index r = 0; r < out.layers.rows(); ++r) {
        for (int n = 0; n < tree.N; ++n) {
            const double dev = layer_spread(r, n);
            out.max_nonuniformity = std::max(out.max_nonuniformity, dev);
            if (dev > 1e-8)
                throw domain_error("reduce_tree: layer uniformity violated at tau = " +
                                   io::format_g17(out.times[r]));
            out.layers(r, n) = traj.states(r, tree.layer_offset[n]);
        }
    }
    return out;
}

Eigen::MatrixXd reduced_chain_hamiltonian(int q, double t_hop, int N) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(N, N);
    for (int n = 0; n < N; ++n) {
        if (n - 1 >= 0) h(n, n - 1) = -t_hop;
        if (n + 1 < N) h(n, n + 1) = -q * t_hop;
    }
    return h;
}

void write_tree_edges_csv(const TreeGraph& tree, std::ostream& os) {
    os << "parent_id,child_id\n";
    for (int n = 1; n < tree.N; ++n) {
        for (long long v = tree.layer_offset[n]; v < tree.layer_offset[n + 1]; ++v)
            os << tree_parent(tree, v) << ',' << v << '\n';
    }
}

}  // namespace bkc::geometry
