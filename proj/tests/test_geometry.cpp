// test_geometry.cpp — metric weights, curved inner products, curved-operator
// duality, tree graphs and dimension reduction.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bkc/dynamics.hpp"
#include "bkc/geometry.hpp"
#include "bkc/model.hpp"
#include "bkc/perturbation.hpp"
#include "bkc/spectral.hpp"

using namespace bkc;
using namespace bkc::geometry;
using cd = std::complex<double>;

TEST_CASE("metric weights") {
    SUBCASE("flat metric gives all ones") {
        auto w = metric_weights({0.0, 1.0, 6, +1});
        for (int i = 0; i < 6; ++i) CHECK(w[i] == 1.0);
    }
    SUBCASE("tree layer sizes: q = 2, N = 5") {
        auto w = tree_metric_weights(2, 5);
        const double want[5] = {1, 2, 4, 8, 16};
        for (int i = 0; i < 5; ++i) CHECK(w[i] == want[i]);
    }
    SUBCASE("adjacent-site ratio e^{sqrt(kappa) d}") {
        const double kappa = std::log(1.5) * std::log(1.5);
        auto w = metric_weights({kappa, 1.0, 8, -1});
        for (int i = 0; i + 1 < 8; ++i)
            CHECK(w[i + 1] / w[i] == doctest::Approx(1.5).epsilon(1e-12));
    }
}

TEST_CASE("curved inner product") {
    SUBCASE("unit weights reduce to the plain inner product") {
        Eigen::VectorXcd a(3), b(3);
        a << cd(1, 1), cd(0, 2), cd(3, 0);
        b << cd(2, 0), cd(1, -1), cd(0, 1);
        auto ip = curved_inner_product(a, b, Eigen::VectorXd::Ones(3));
        CHECK(ip == (a.adjoint() * b)(0, 0));
        CHECK_THROWS_AS((void)curved_inner_product(a, b, Eigen::VectorXd::Ones(4)),
                        domain_error);
    }
    SUBCASE("chain eigenvectors are orthonormal under the (t_L/t_R)^n weights") {
        const HNParams c{2.0, 1.0, 24, 1.0};
        auto s = spectral::eigs(build_generator_hn(c));
        Eigen::VectorXd w(c.L);
        for (int n = 1; n <= c.L; ++n) w[n - 1] = std::pow(c.t_L / c.t_R, n);
        const auto& v = *s.right_eigenvectors;
        for (int k = 0; k < c.L; ++k) {
            const double nk = std::sqrt(curved_inner_product(v.col(k), v.col(k), w).real());
            for (int j = k + 1; j < c.L; ++j) {
                const double nj =
                    std::sqrt(curved_inner_product(v.col(j), v.col(j), w).real());
                const auto ip = curved_inner_product(v.col(k), v.col(j), w);
                CHECK(std::abs(ip) / (nk * nj) < 1e-10);
            }
        }
    }
    SUBCASE("doublet state has unit curved norm under its own chain metric") {
        ModelParams p;
        p.J = 1.0;
        p.Delta = 0.2;
        p.L = 40;
        const double chi2 = 1.5;
        auto gd = perturbation::ground_doublet(p);
        Eigen::VectorXd wx(p.L), wp(p.L);
        for (int n = 1; n <= p.L; ++n) {
            wx[n - 1] = std::pow(chi2, double(p.L - n));
            wp[n - 1] = std::pow(chi2, double(n - 1));
        }
        CHECK(curved_inner_product(gd.psi_X, gd.psi_X, wx).real() ==
              doctest::Approx(1.0).epsilon(1e-12));
        CHECK(curved_inner_product(gd.psi_P, gd.psi_P, wp).real() ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("curved operators") {
    SUBCASE("flat Schroedinger operator is the discrete Laplacian plus Gamma") {
        auto g = build_curved_schrodinger_operator({0.0, 1.0, 5, +1}, 0.5, 0.25);
        // -(1/(2m)) d_ss + Gamma with hbar = 1, m = 0.5: -d_ss + 0.25
        CHECK(g.kind == GeneratorKind::Hamiltonian);
        CHECK(g.mat(2, 2) == doctest::Approx(2.0 + 0.25));
        CHECK(g.mat(2, 1) == doctest::Approx(-1.0));
        CHECK(g.mat(2, 3) == doctest::Approx(-1.0));
    }
    SUBCASE("flat diffusion operator with Gamma = 0 conserves mass in the bulk") {
        auto g = build_curved_diffusion_operator({0.0, 1.0, 7, +1}, 0.8, 0.0);
        for (int n = 1; n + 1 < 7; ++n) CHECK(g.mat.row(n).sum() == doctest::Approx(0.0));
    }
    SUBCASE("diagonal constants reproduce the closed-form offsets exactly") {
        const HNParams chain{-0.8, 1.2, 40, 1.0};  // oscillatory
        const double kappa = curvature(chain);
        auto co = continuum_coefficients(chain, BandEdge::Bottom);
        auto gs = build_curved_schrodinger_operator({kappa, 1.0, 40, +1}, co.mass, co.Gamma);
        const double want_s = co.Gamma - kappa / (8.0 * co.mass);
        // isolate the constant: diag = 2 c/d^2 + const with c = 1/(2m)
        const double c2 = 1.0 / (2.0 * co.mass);
        CHECK(gs.mat(5, 5) == doctest::Approx(2.0 * c2 + want_s).epsilon(1e-14));
        // A^2 identity: Gamma - hbar^2 kappa/(8m) = Gamma - hbar^2 A^2/(2m)
        CHECK(want_s == doctest::Approx(co.Gamma - co.A * co.A / (2.0 * co.mass)));

        const HNParams dchain{0.8, 1.2, 40, 1.0};  // diffusive
        auto cd_ = continuum_coefficients(dchain, BandEdge::Top);
        auto gd = build_curved_diffusion_operator({curvature(dchain), 1.0, 40, +1},
                                                  cd_.diffusion, cd_.Gamma);
        CHECK(gd.mat(5, 5) ==
              doctest::Approx(-2.0 * cd_.diffusion + cd_.gamma).epsilon(1e-14));
    }
    SUBCASE("diffusion-operator top sits kappa D/4 below the packet gain gamma") {
        // the spectral top approaches the band edge -Gamma; the packet gain
        // gamma = -Gamma + kappa D/4 exceeds it by the curvature energy of the
        // tilt, which only transient (non-normal) packets realize
        const HNParams chain{0.8, 1.2, 400, 1.0};
        auto co = continuum_coefficients(chain, BandEdge::Top);
        auto g = build_curved_diffusion_operator(metric_for_chain(chain), co.diffusion,
                                                 co.Gamma);
        auto s = spectral::eigs(g, {.want_vectors = false});
        const double top = s.eigenvalues.real().maxCoeff();
        const double kappa = curvature(chain);
        CHECK(co.gamma - top ==
              doctest::Approx(kappa * co.diffusion / 4.0).epsilon(5e-3));
        CHECK(top == doctest::Approx(-co.Gamma).epsilon(1e-3));
    }
    SUBCASE("band-edge spectra match the gauged chain with O(d^2) convergence") {
        // fixed continuum problem (m, Gamma, A, domain) discretized at h and h/2
        const double sqT0 = std::sqrt(0.96);
        const double A = std::log(1.5) / 2.0;
        const double kappa = 4.0 * A * A;
        const double mass = 1.0 / (2.0 * sqT0);
        const int L0 = 60;
        const double ell = L0 + 1.0;
        auto lattice_bottom = [&](double h, int k) {
            const double sqT = 1.0 / (2.0 * mass * h * h);
            return -2.0 * sqT * std::cos(k * kPi * h / ell);
        };
        auto curved_low = [&](double h, int m) {
            const int Lh = static_cast<int>(std::lround(ell / h)) - 1;
            // Gamma_h = -2 sqrt(T_h) = -1/(m h^2)
            auto g = build_curved_schrodinger_operator({kappa, h, Lh, +1}, mass,
                                                       -1.0 / (mass * h * h));
            auto s = spectral::eigs(g, {.want_vectors = false});
            Eigen::VectorXd re = s.eigenvalues.real();
            std::sort(re.data(), re.data() + re.size());
            return re[m - 1];
        };
        for (int k = 1; k <= 3; ++k) {
            const double e1 = curved_low(1.0, k) - lattice_bottom(1.0, k);
            const double e2 = curved_low(0.5, k) - lattice_bottom(0.5, k);
            CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
        }
    }
}

TEST_CASE("tree graphs") {
    SUBCASE("q = 2, N = 4 has 15 nodes; degrees are q / q+1 / 1") {
        auto t = build_tree(2, 4);
        CHECK(t.nodes == 15);
        CHECK(t.row_ptr[1] - t.row_ptr[0] == 2);     // root
        CHECK(t.row_ptr[2] - t.row_ptr[1] == 3);     // internal
        CHECK(t.row_ptr[15] - t.row_ptr[14] == 1);   // leaf
    }
    SUBCASE("q = 3, N = 3: 13 nodes, root degree 3") {
        auto t = build_tree(3, 3);
        CHECK(t.nodes == 13);
        CHECK(t.row_ptr[1] - t.row_ptr[0] == 3);
    }
    SUBCASE("parent map reproduces ceil(m/2)") {
        auto t = build_tree(2, 4);
        for (int layer = 2; layer <= 4; ++layer) {
            const long long sz = t.layer_offset[layer] - t.layer_offset[layer - 1];
            for (long long m = 1; m <= sz; ++m) {
                const long long node = tree_node_index(t, layer, m);
                const long long want_parent =
                    tree_node_index(t, layer - 1, (m + 1) / 2);
                CHECK(tree_parent(t, node) == want_parent);
            }
        }
    }
    SUBCASE("size cap enforced") {
        CHECK_THROWS_AS((void)build_tree(2, 21), domain_error);
    }
    SUBCASE("edge list CSV") {
        auto t = build_tree(2, 3);
        std::ostringstream os;
        write_tree_edges_csv(t, os);
        CHECK(os.str() ==
              "parent_id,child_id\n0,1\n0,2\n1,3\n1,4\n2,5\n2,6\n");
    }
}

TEST_CASE("tree evolution and reduction") {
    SUBCASE("t = 0 keeps the state; single layer only rotates trivially") {
        auto t = build_tree(2, 3);
        Eigen::VectorXcd s0 = Eigen::VectorXcd::Ones(t.nodes);
        auto traj = evolve_tree(t, 0.0, s0, {0.0, 1.0}, 0.01);
        CHECK((traj.states.row(1).transpose() - s0).cwiseAbs().maxCoeff() == 0.0);
        auto t1 = build_tree(2, 1);
        Eigen::VectorXcd one = Eigen::VectorXcd::Ones(1);
        auto tr1 = evolve_tree(t1, 1.0, one, {0.0, 0.7}, 0.001);
        CHECK(std::abs(tr1.states(1, 0)) == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("norm conservation, q = 2, N = 10") {
        auto t = build_tree(2, 10);
        Eigen::VectorXcd s0(t.nodes);
        for (int n = 0; n < 10; ++n) {
            const double v = std::exp(-(n - 4.0) * (n - 4.0) / 6.0);
            for (long long i = t.layer_offset[n]; i < t.layer_offset[n + 1]; ++i)
                s0[i] = v;
        }
        s0 /= s0.norm();
        std::vector<double> times = {0.0, 5.0, 10.0, 20.0};
        auto traj = evolve_tree(t, 1.0, s0, times, 0.002);
        for (int i = 0; i < 4; ++i)
            CHECK(std::abs(traj.states.row(i).norm() - 1.0) < 1e-8);
    }
    SUBCASE("layer-uniform reduction matches the reduced chain, q in {2, 3}") {
        for (int q : {2, 3}) {
            auto t = build_tree(q, 10);
            Eigen::VectorXcd s0(t.nodes);
            Eigen::VectorXcd prof(10);
            for (int n = 0; n < 10; ++n) {
                prof[n] = std::exp(-(n - 3.0) * (n - 3.0) / 4.0);
                for (long long i = t.layer_offset[n]; i < t.layer_offset[n + 1]; ++i)
                    s0[i] = prof[n];
            }
            std::vector<double> times;
            for (int i = 0; i <= 10; ++i) times.push_back(i * 1.0);
            auto traj = evolve_tree(t, 1.0, s0, times, 0.002);
            auto red = reduce_tree(t, traj);
            CHECK(red.max_nonuniformity < 1e-8);
            auto h = reduced_chain_hamiltonian(q, 1.0, 10);
            auto chain = dynamics::evolve_rk4_complex(h, prof, times, 0.002);
            CHECK((red.layers - chain).cwiseAbs().maxCoeff() < 1e-8);
            // layer norms concentrate as q^{n-1} |Phi_n|^2
            const auto w = tree_metric_weights(q, 10);
            for (int n = 0; n < 10; ++n) {
                double acc = 0.0;
                for (long long i = t.layer_offset[n]; i < t.layer_offset[n + 1]; ++i)
                    acc += std::norm(traj.states(5, i));
                CHECK(acc == doctest::Approx(w[n] * std::norm(red.layers(5, n)))
                                 .epsilon(1e-10));
            }
        }
    }
    SUBCASE("non-uniform input rejected") {
        auto t = build_tree(2, 4);
        Eigen::VectorXcd s0 = Eigen::VectorXcd::Ones(t.nodes);
        s0[5] += 0.01;
        auto traj = evolve_tree(t, 1.0, s0, {0.0, 0.5}, 0.005);
        CHECK_THROWS_AS((void)reduce_tree(t, traj), domain_error);
    }
}
