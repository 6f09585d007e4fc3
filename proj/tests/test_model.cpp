// test_model.cpp — gauge reduction, chain extraction, generators, conserved
// form, curvature and continuum coefficients.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bkc/dynamics.hpp"
#include "bkc/io.hpp"
#include "bkc/model.hpp"
#include "bkc/spectral.hpp"

using namespace bkc;
using cd = std::complex<double>;

namespace {

ModelParams make(double J, double theta, double Delta, double mu = 0.0, int L = 8) {
    ModelParams p;
    p.J = J;
    p.theta = theta;
    p.Delta = Delta;
    p.mu = mu;
    p.L = L;
    return p;
}

}  // namespace

TEST_CASE("reduce_gauge regimes and formulas") {
    SUBCASE("theta already pi/2 is the identity map") {
        auto r = reduce_gauge(make(1.0, kPi / 2, 0.5));
        CHECK(r.regime == GaugeRegime::Nontrivial);
        CHECK(r.reduced.Delta == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(r.reduced.J == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(r.reduced.theta == kPi / 2);
        CHECK(r.reduced.phi == kPi / 2);
    }
    SUBCASE("theta = pi/3, Delta = 1") {
        auto r = reduce_gauge(make(1.0, kPi / 3, 1.0));
        CHECK(r.regime == GaugeRegime::Nontrivial);
        CHECK(r.reduced.Delta == doctest::Approx(std::sqrt(0.75)).epsilon(1e-12));
        CHECK(r.reduced.J == doctest::Approx(std::sin(kPi / 3)).epsilon(1e-12));
    }
    SUBCASE("Delta < J cos(theta) is trivial and untouched") {
        auto r = reduce_gauge(make(1.0, 0.0, 0.5));
        CHECK(r.regime == GaugeRegime::Trivial);
        CHECK(r.reduced.Delta == 0.5);
        CHECK(r.reduced.theta == 0.0);
    }
    SUBCASE("boundary Delta = J cos(theta)") {
        auto r = reduce_gauge(make(1.0, kPi / 3, 0.5));
        CHECK(r.regime == GaugeRegime::Boundary);
        CHECK(r.reduced.Delta == doctest::Approx(0.0));
    }
    SUBCASE("idempotent") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int trial = 0; trial < 50; ++trial) {
            auto p = make(0.2 + u(rng), u(rng) * kPi, u(rng) * 1.5, u(rng));
            auto r1 = reduce_gauge(p);
            auto r2 = reduce_gauge(r1.reduced);
            CHECK(r2.reduced.J == doctest::Approx(r1.reduced.J).epsilon(1e-14));
            CHECK(r2.reduced.Delta == doctest::Approx(r1.reduced.Delta).epsilon(1e-14));
            CHECK(r2.reduced.theta == r1.reduced.theta);
        }
    }
    SUBCASE("original phi kept in the reduction record") {
        auto p = make(1.0, kPi / 2, 0.5);
        p.phi = 0.3;
        auto r = reduce_gauge(p);
        CHECK(r.original.phi == 0.3);
        CHECK(r.reduced.phi == kPi / 2);
    }
}

TEST_CASE("hn_chains coefficients and reciprocal ratios") {
    SUBCASE("Delta = 0: symmetric magnitudes, oscillatory") {
        auto ch = hn_chains(make(1.0, kPi / 2, 0.0));
        CHECK(std::abs(ch.x_chain.t_L) == doctest::Approx(1.0));
        CHECK(std::abs(ch.x_chain.t_R) == doctest::Approx(1.0));
        CHECK(regime_of(ch.x_chain) == ChainRegime::Oscillatory);
    }
    SUBCASE("Delta = 0.2 generator coefficients match the equations of motion") {
        auto ch = hn_chains(make(1.0, kPi / 2, 0.2));
        auto gx = build_generator_hn(ch.x_chain);
        auto gp = build_generator_hn(ch.p_chain);
        CHECK(gx.mat(3, 2) == doctest::Approx(1.2));   // X_{n-1} coefficient
        CHECK(gx.mat(3, 4) == doctest::Approx(-0.8));  // X_{n+1}
        CHECK(gp.mat(3, 2) == doctest::Approx(0.8));
        CHECK(gp.mat(3, 4) == doctest::Approx(-1.2));
        CHECK(ch.x_chain.t_L * ch.x_chain.t_R == doctest::Approx(-0.96));
        CHECK(regime_of(ch.x_chain) == ChainRegime::Oscillatory);
    }
    SUBCASE("Delta = 1 is the exceptional point") {
        auto ch = hn_chains(make(1.0, kPi / 2, 1.0));
        CHECK(ch.x_chain.t_L * ch.x_chain.t_R == 0.0);
        CHECK(regime_of(ch.x_chain) == ChainRegime::Exceptional);
    }
    SUBCASE("reciprocal hopping-ratio product, random parameters") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int trial = 0; trial < 100; ++trial) {
            const double J = 0.2 + u(rng), D = 0.01 + 1.5 * u(rng);
            if (std::abs(D - J) < 1e-3) continue;
            auto ch = hn_chains(make(J, kPi / 2, D));
            const double prod = std::abs(ch.x_chain.t_R / ch.x_chain.t_L) *
                                std::abs(ch.p_chain.t_R / ch.p_chain.t_L);
            CHECK(std::abs(prod - 1.0) < 1e-14);
        }
    }
    SUBCASE("unreduced parameters rejected") {
        CHECK_THROWS_AS((void)hn_chains(make(1.0, 0.3, 0.5)), domain_error);
    }
}

TEST_CASE("build_generator_hn structure") {
    SUBCASE("zero hoppings give the zero matrix") {
        auto g = build_generator_hn(HNParams{0.0, 0.0, 3});
        CHECK(g.mat.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("L = 4 has exactly 6 nonzero entries") {
        auto g = build_generator_hn(HNParams{2.0, 1.0, 4});
        int nnz = 0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                if (g.mat(i, j) != 0.0) ++nnz;
        CHECK(nnz == 6);
        CHECK(g.band_profile_ok());
    }
}

TEST_CASE("coupled generator") {
    SUBCASE("mu = 0 equals the direct sum of the chain generators, exactly") {
        auto p = make(1.0, kPi / 2, 0.3, 0.0, 6);
        auto g = build_generator_coupled(p);
        auto ch = hn_chains(p);
        auto gx = build_generator_hn(ch.x_chain);
        auto gp = build_generator_hn(ch.p_chain);
        CHECK((g.mat.topLeftCorner(6, 6) - gx.mat).cwiseAbs().maxCoeff() == 0.0);
        CHECK((g.mat.bottomRightCorner(6, 6) - gp.mat).cwiseAbs().maxCoeff() == 0.0);
        CHECK(g.mat.topRightCorner(6, 6).cwiseAbs().maxCoeff() == 0.0);
        CHECK(g.mat.bottomLeftCorner(6, 6).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("mu coupling blocks carry the +/- identity") {
        auto p = make(1.0, kPi / 2, 0.2, 0.1, 3);
        auto g = build_generator_coupled(p);
        REQUIRE(g.size() == 6);
        for (int n = 0; n < 3; ++n) {
            CHECK(g.mat(n, 3 + n) == doctest::Approx(0.1));
            CHECK(g.mat(3 + n, n) == doctest::Approx(-0.1));
        }
        CHECK(g.mat(0, 1) == doctest::Approx(-0.8));  // X block
        CHECK(g.mat(1, 0) == doctest::Approx(1.2));
        CHECK(g.mat(3, 4) == doctest::Approx(-1.2));  // P block
        CHECK(g.mat(4, 3) == doctest::Approx(0.8));
    }
}

TEST_CASE("classical Hamiltonian") {
    auto p = make(1.0, kPi / 2, 0.25, 0.4, 12);
    SUBCASE("zero and single-site states") {
        CHECK(classical_hamiltonian(Eigen::VectorXd::Zero(24), p) == 0.0);
        Eigen::VectorXd s = Eigen::VectorXd::Zero(24);
        s[0] = 1.0;
        auto p0 = p;
        p0.mu = 0.0;
        CHECK(classical_hamiltonian(s, p0) == 0.0);
    }
    SUBCASE("conserved exactly under the exact flow") {
        std::mt19937_64 rng(3);
        std::normal_distribution<double> dist;
        Eigen::VectorXd s0(24);
        for (int i = 0; i < 24; ++i) s0[i] = dist(rng);
        auto g = build_generator_coupled(p);
        auto spec = spectral::eigs(g, {.want_vectors = true});
        std::vector<double> times;
        for (int i = 0; i <= 20; ++i) times.push_back(0.5 * i);  // tau J up to 10
        auto traj = dynamics::evolve_exact(spec, {0.0, s0}, times);
        const double h0 = classical_hamiltonian(s0, p);
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double h = classical_hamiltonian(traj.states.row(i).transpose(), p);
            CHECK(std::abs(h - h0) / std::abs(h0) < 1e-10);
        }
    }
}

TEST_CASE("gauge transforms") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> dist;
    Eigen::VectorXcd f(9);
    for (int i = 0; i < 9; ++i) f[i] = cd(dist(rng), dist(rng));
    SUBCASE("i^n applied four times is the identity") {
        auto g = f;
        for (int k = 0; k < 4; ++k) g = gauge_transform(g, GaugeKind::IPow);
        CHECK((g - f).cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("(-i)^n inverts i^n") {
        auto g = gauge_transform(gauge_transform(f, GaugeKind::IPow), GaugeKind::MinusIPow);
        CHECK((g - f).cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("tilt r = 1 is the identity; r <= 0 rejected") {
        auto g = gauge_transform(f, GaugeKind::Tilt, 1.0);
        CHECK((g - f).cwiseAbs().maxCoeff() == 0.0);
        CHECK_THROWS_AS((void)gauge_transform(f, GaugeKind::Tilt, 0.0), domain_error);
    }
    SUBCASE("carrier then inverse carrier is the identity") {
        auto g = gauge_transform(gauge_transform(f, GaugeKind::Carrier, 0.7),
                                 GaugeKind::Carrier, -0.7);
        CHECK((g - f).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("i^n conjugation sends the flow generator to the Schroedinger form") {
        const HNParams c{-1.0, -1.3225, 7, 1.0};
        const auto g = build_generator_hn(c);
        const auto h = schrodinger_hamiltonian(c);
        // S^-1 G S with S = diag(i^n) must equal -i H
        Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(7, 7);
        const cd ip[4] = {cd(1, 0), cd(0, 1), cd(-1, 0), cd(0, -1)};
        for (int n = 0; n < 7; ++n) s(n, n) = ip[(n + 1) % 4];
        const Eigen::MatrixXcd lhs = s.inverse() * g.mat.cast<cd>() * s;
        const Eigen::MatrixXcd rhs = cd(0, -1) * h.cast<cd>();
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("curvature") {
    SUBCASE("flat when |t_R| = |t_L|") {
        CHECK(curvature(HNParams{-1.0, 1.0, 5}) == 0.0);
    }
    SUBCASE("X-chain of (J=1, Delta=0.2) has kappa = ln^2(1.5)") {
        auto ch = hn_chains(make(1.0, kPi / 2, 0.2));
        CHECK(curvature(ch.x_chain) ==
              doctest::Approx(std::log(1.5) * std::log(1.5)).epsilon(1e-12));
    }
    SUBCASE("kappa = 4 A^2 identity") {
        std::mt19937_64 rng(13);
        std::uniform_real_distribution<double> u(0.1, 3.0);
        for (int trial = 0; trial < 50; ++trial) {
            HNParams c{u(rng), u(rng), 5, 0.5 + u(rng)};
            auto co = continuum_coefficients(c, BandEdge::Top);
            CHECK(std::abs(curvature(c) - 4.0 * co.A * co.A) < 1e-12);
        }
    }
    SUBCASE("exceptional chains rejected") {
        CHECK_THROWS_AS((void)curvature(HNParams{0.0, 1.0, 5}), domain_error);
    }
}

TEST_CASE("continuum coefficients") {
    SUBCASE("symmetric oscillatory chain at the band bottom") {
        const double t = 0.7;
        auto c = continuum_coefficients(HNParams{-t, t, 9, 1.0}, BandEdge::Bottom);
        CHECK(c.regime == ChainRegime::Oscillatory);
        CHECK(c.A == 0.0);
        CHECK(c.Gamma == doctest::Approx(-2.0 * t));
        CHECK(c.mass == doctest::Approx(1.0 / (2.0 * t)));
    }
    SUBCASE("diffusive 0.8/1.2 chain at the band top") {
        auto c = continuum_coefficients(HNParams{0.8, 1.2, 9, 1.0}, BandEdge::Top);
        const double sqT = std::sqrt(0.96);
        CHECK(c.diffusion == doctest::Approx(sqT));
        CHECK(c.A == doctest::Approx(std::log(1.5) / 2.0));
        CHECK(c.Gamma == doctest::Approx(-2.0 * sqT));
        CHECK(c.gamma ==
              doctest::Approx(2.0 * sqT + sqT * std::log(1.5) * std::log(1.5) / 4.0));
        CHECK(c.K0 == doctest::Approx(kPi));  // positive hoppings: top is staggered
    }
    SUBCASE("X and P chains have opposite-sign A") {
        auto ch = hn_chains(make(1.0, kPi / 2, 0.2));
        auto cx = continuum_coefficients(ch.x_chain, BandEdge::Top);
        auto cp = continuum_coefficients(ch.p_chain, BandEdge::Top);
        CHECK(cx.A == doctest::Approx(-cp.A));
        CHECK(cx.A > 0.0);
    }
    SUBCASE("gamma identity in the diffusive regime") {
        auto ch = hn_chains(make(1.0, kPi / 2, 1.8));
        for (auto band : {BandEdge::Top, BandEdge::Bottom}) {
            auto c = continuum_coefficients(ch.x_chain, band);
            CHECK(c.gamma == doctest::Approx(-c.Gamma +
                                             curvature(ch.x_chain) * c.diffusion / 4.0));
        }
    }
    SUBCASE("band labels verified against the measured tilted-carrier growth rate") {
        const double delta = (1.15 * 1.15 + 1.0) / (1.15 * 1.15 - 1.0);  // mild tilt
        auto ch = hn_chains(make(1.0, kPi / 2, delta, 0.0, 121));
        for (const auto& chain : {ch.x_chain, ch.p_chain}) {
            const double sqT = std::sqrt(chain.t_L * chain.t_R);
            for (auto band : {BandEdge::Top, BandEdge::Bottom}) {
                auto co = continuum_coefficients(chain, band);
                dynamics::WavepacketSpec wp;
                wp.center = 61;
                wp.sigma = 6.0;
                wp.K0 = co.K0;
                auto s0 = dynamics::gaussian_wavepacket(wp, chain);
                auto g = build_generator_hn(chain);
                const double dt = 1e-3;
                auto traj = dynamics::evolve_rk4(g, s0, 0.2, dt, 3);
                const double rate =
                    std::log(traj.states.row(2).norm() / traj.states.row(0).norm()) / 0.2;
                const double want = band == BandEdge::Top ? 2.0 * sqT : -2.0 * sqT;
                CHECK(rate == doctest::Approx(want).epsilon(0.02));
            }
        }
    }
    SUBCASE("exceptional rejected") {
        CHECK_THROWS_AS((void)continuum_coefficients(HNParams{0.0, 1.0, 5}, BandEdge::Top),
                        domain_error);
    }
}

TEST_CASE("effective theory at general K") {
    SUBCASE("K0 = pi/(2d): pure drift") {
        auto e = effective_theory_at_K(HNParams{1.0, 1.0, 9, 1.0}, kPi / 2);
        CHECK(std::abs(e.reaction) < 1e-14);
        CHECK(std::abs(e.diffusion) < 1e-14);
        CHECK(e.drift == doctest::Approx(e.v_s));
    }
    SUBCASE("K0 = 0: no drift, diffusion-reaction form") {
        auto e = effective_theory_at_K(HNParams{0.8, 1.2, 9, 1.0}, 0.0);
        CHECK(e.drift == 0.0);
        CHECK(e.reaction == doctest::Approx(-2.0 * std::sqrt(0.96)));
        CHECK(e.diffusion == doctest::Approx(-std::sqrt(0.96)));
        CHECK(e.K.imag() == doctest::Approx(-std::log(1.5) / 2.0));
    }
    SUBCASE("K0 = pi/3 on the symmetric chain") {
        auto e = effective_theory_at_K(HNParams{1.0, 1.0, 9, 1.0}, kPi / 3);
        CHECK(e.drift == doctest::Approx(std::sin(kPi / 3) * 2.0));
        CHECK(e.reaction == doctest::Approx(std::cos(kPi / 3) * (-2.0)));
    }
    SUBCASE("oscillatory chains rejected") {
        CHECK_THROWS_AS((void)effective_theory_at_K(HNParams{-1.0, 1.0, 9}, 0.0),
                        domain_error);
    }
}

TEST_CASE("ModelParams JSON round-trip with defaults") {
    nlohmann::json j = {{"J", 1.0},   {"theta", 0.5}, {"Delta", 0.25},
                        {"phi", 1.0}, {"mu", 0.125},  {"L", 17}};
    auto p = io::model_from_json(j);
    CHECK(p.d == 1.0);
    CHECK(p.hbar == 1.0);
    auto j2 = io::to_json(p);
    auto p2 = io::model_from_json(j2);
    CHECK(io::to_json(p2) == j2);
    CHECK(p2.L == 17);
    CHECK(p2.mu == 0.125);
    CHECK_THROWS_AS((void)io::model_from_json(nlohmann::json{{"J", 1.0}}), config_error);
}
