// model.cpp — Gauge reductions, generator builders, continuum coefficients.

#include "bkc/model.hpp"

#include <cmath>

namespace bkc {

namespace {

double sq(double x) { return x * x; }

void require_reduced(const ModelParams& p, const char* op) {
    const double tol = 1e-12;
    if (std::abs(p.theta - kPi / 2) > tol || std::abs(p.phi - kPi / 2) > tol) {
        throw domain_error(std::string(op) +
                           ": params must be gauge-reduced first (theta = phi = pi/2); "
                           "call reduce_gauge");
    }
}

}  // namespace

GaugeReduction reduce_gauge(const ModelParams& params) {
    params.validate();
    const double jc = params.J * std::cos(params.theta);
    const double scale = std::max({1.0, params.J, params.Delta});
    GaugeReduction out{GaugeRegime::Trivial, params, params};
    if (std::abs(params.Delta - jc) <= 1e-12 * scale) {
        out.regime = GaugeRegime::Boundary;
    } else if (params.Delta > jc) {
        out.regime = GaugeRegime::Nontrivial;
    } else {
        out.regime = GaugeRegime::Trivial;
        return out;  // parameters unchanged, flag only
    }
    ModelParams r = params;
    const double d2 = sq(params.Delta) - sq(params.J) * sq(std::cos(params.theta));
    r.Delta = std::sqrt(std::max(0.0, d2));
    r.J = params.J * std::sin(params.theta);
    r.theta = kPi / 2;
    r.phi = kPi / 2;
    out.reduced = r;
    return out;
}

HNChains hn_chains(const ModelParams& params) {
    params.validate();
    require_reduced(params, "hn_chains");
    const double J = params.J, D = params.Delta;
    HNChains ch;
    // X_dot_n = (J+D) X_{n-1} + (D-J) X_{n+1}
    ch.x_chain = HNParams{J - D, -(J + D), params.L, params.d};
    // P_dot_n = (J-D) P_{n-1} - (J+D) P_{n+1}
    ch.p_chain = HNParams{J + D, D - J, params.L, params.d};
    return ch;
}

bool Generator::band_profile_ok() const {
    const int n = size();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (mat(i, j) == 0.0) continue;
            bool allowed = false;
            for (int off : band_offsets) {
                if (j - i == off) { allowed = true; break; }
            }
            if (!allowed) return false;
        }
    }
    return true;
}

Generator build_generator_hn(const HNParams& chain) {
    if (chain.L < 2) throw domain_error("build_generator_hn: L must be >= 2");
    Generator g;
    g.mat = Eigen::MatrixXd::Zero(chain.L, chain.L);
    g.band_offsets = {-1, 1};
    for (int n = 0; n < chain.L; ++n) {
        if (n - 1 >= 0) g.mat(n, n - 1) = -chain.t_R;
        if (n + 1 < chain.L) g.mat(n, n + 1) = -chain.t_L;
    }
    return g;
}

Generator build_generator_coupled(const ModelParams& params) {
    require_reduced(params, "build_generator_coupled");
    const int L = params.L;
    const auto ch = hn_chains(params);
    const Generator gx = build_generator_hn(ch.x_chain);
    const Generator gp = build_generator_hn(ch.p_chain);
    Generator g;
    g.mat = Eigen::MatrixXd::Zero(2 * L, 2 * L);
    g.band_offsets = {-1, 1, -L, L};
    g.mat.topLeftCorner(L, L) = gx.mat;
    g.mat.bottomRightCorner(L, L) = gp.mat;
    for (int n = 0; n < L; ++n) {
        g.mat(n, L + n) = params.mu;    // X_dot gains +mu P
        g.mat(L + n, n) = -params.mu;   // P_dot gains -mu X
    }
    return g;
}

Eigen::MatrixXd schrodinger_hamiltonian(const HNParams& chain) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(chain.L, chain.L);
    for (int n = 0; n < chain.L; ++n) {
        if (n - 1 >= 0) h(n, n - 1) = -chain.t_R;
        if (n + 1 < chain.L) h(n, n + 1) = chain.t_L;
    }
    return h;
}

Eigen::VectorXcd gauge_transform(const Eigen::VectorXcd& field, GaugeKind kind,
                                 double param) {
    using cd = std::complex<double>;
    const auto L = field.size();
    Eigen::VectorXcd out(L);
    switch (kind) {
        case GaugeKind::IPow: {
            const cd factors[4] = {cd(1, 0), cd(0, 1), cd(-1, 0), cd(0, -1)};
            for (Eigen::Index i = 0; i < L; ++i) out[i] = field[i] * factors[(i + 1) % 4];
            break;
        }
        case GaugeKind::MinusIPow: {
            const cd factors[4] = {cd(1, 0), cd(0, -1), cd(-1, 0), cd(0, 1)};
            for (Eigen::Index i = 0; i < L; ++i) out[i] = field[i] * factors[(i + 1) % 4];
            break;
        }
        case GaugeKind::Tilt: {
            if (!(param > 0.0)) throw domain_error("gauge_transform: tilt ratio r must be > 0");
            for (Eigen::Index i = 0; i < L; ++i)
                out[i] = field[i] * std::pow(param, static_cast<double>(i + 1));
            break;
        }
        case GaugeKind::Carrier: {
            for (Eigen::Index i = 0; i < L; ++i)
                out[i] = field[i] * std::exp(cd(0, param * static_cast<double>(i + 1)));
            break;
        }
    }
    return out;
}

double classical_hamiltonian(const Eigen::VectorXd& state, const ModelParams& params) {
    require_reduced(params, "classical_hamiltonian");
    const int L = params.L;
    if (state.size() != 2 * L)
        throw domain_error("classical_hamiltonian: state length must be 2L");
    const double J = params.J, D = params.Delta;
    double h = 0.0;
    for (int n = 0; n < L; ++n) {
        double hop = 0.0;
        if (n - 1 >= 0) hop += (J + D) * state[n - 1];
        if (n + 1 < L) hop += (D - J) * state[n + 1];
        h += state[L + n] * hop;
        h += 0.5 * params.mu * (sq(state[n]) + sq(state[L + n]));
    }
    return h;
}

double curvature(const HNParams& chain) {
    if (chain.t_L == 0.0 || chain.t_R == 0.0)
        throw domain_error("curvature: undefined at the exceptional point (zero hopping)");
    const double lnr = std::log(std::abs(chain.t_R / chain.t_L));
    return sq(lnr) / sq(chain.d);
}

double carrier_for_band(const HNParams& chain, BandEdge band) {
    const ChainRegime reg = regime_of(chain);
    if (reg == ChainRegime::Exceptional)
        throw domain_error("carrier_for_band: exceptional chain has no band structure");
    // Tilted plane waves e^{i K0 n d} |t_R/t_L|^{n/2}:
    //   flow generator growth rate  lambda(K0) = -2 sign(t_L) sqrt(t_L t_R) cos(K0 d)
    //   Schroedinger-form energy    E(K0)      = -2 sign(t_R) sqrt|t_L t_R| cos(K0 d)
    const double pi_d = kPi / chain.d;
    if (reg == ChainRegime::Diffusive) {
        const bool top_at_zero = (chain.t_L < 0.0);  // lambda(0) = +2 sqrt(T)
        if (band == BandEdge::Top) return top_at_zero ? 0.0 : pi_d;
        return top_at_zero ? pi_d : 0.0;
    }
    const bool bottom_at_zero = (chain.t_R > 0.0);  // E(0) = -2 sqrt|T|
    if (band == BandEdge::Bottom) return bottom_at_zero ? 0.0 : pi_d;
    return bottom_at_zero ? pi_d : 0.0;
}

EffCoeffs continuum_coefficients(const HNParams& chain, BandEdge band, double hbar) {
    const ChainRegime reg = regime_of(chain);
    if (reg == ChainRegime::Exceptional)
        throw domain_error("continuum_coefficients: rejected at the exceptional point");
    EffCoeffs c;
    c.regime = reg;
    c.band = band;
    c.d = chain.d;
    c.hbar = hbar;
    const double sqT = std::sqrt(std::abs(chain.t_L * chain.t_R));
    const double d = chain.d;
    c.A = std::log(std::abs(chain.t_R / chain.t_L)) / (2.0 * d);
    c.v_s = 2.0 * sqT * d;
    c.K0 = carrier_for_band(chain, band);
    c.K = std::complex<double>(c.K0, -c.A);
    const double kappa = 4.0 * c.A * c.A;
    if (reg == ChainRegime::Diffusive) {
        const double D0 = sqT * d * d;
        if (band == BandEdge::Top) {
            c.diffusion = D0;
            c.Gamma = -2.0 * sqT;
        } else {
            c.diffusion = -D0;
            c.Gamma = 2.0 * sqT;
        }
        c.gamma = -c.Gamma + kappa * c.diffusion / 4.0;
    } else {
        const double m0 = hbar * hbar / (2.0 * sqT * d * d);
        if (band == BandEdge::Bottom) {
            c.mass = m0;
            c.Gamma = -2.0 * sqT;
        } else {
            c.mass = -m0;
            c.Gamma = 2.0 * sqT;
        }
    }
    return c;
}

EffTheoryK effective_theory_at_K(const HNParams& chain, double K0) {
    if (regime_of(chain) != ChainRegime::Diffusive)
        throw domain_error("effective_theory_at_K: requires a diffusive chain (t_L t_R > 0)");
    EffTheoryK out;
    const double d = chain.d;
    const double sqT = std::sqrt(chain.t_L * chain.t_R);
    const double sgn = (chain.t_L > 0.0) ? 1.0 : -1.0;
    out.v_s = 2.0 * sqT * d;
    // Exact Taylor coefficients of the generator acting on e^{iKnd} envelopes,
    // K = K0 - i ln(t_R/t_L)/(2d); for positive hoppings these reduce to
    // reaction = cos(K0 d) Gamma, diffusion = -cos(K0 d) D, drift = sin(K0 d) v_s.
    out.reaction = -2.0 * sgn * sqT * std::cos(K0 * d);
    out.diffusion = -sgn * sqT * d * d * std::cos(K0 * d);
    out.drift = sgn * std::sin(K0 * d) * out.v_s;
    out.K = std::complex<double>(K0, -std::log(chain.t_R / chain.t_L) / (2.0 * d));
    return out;
}

}  // namespace bkc
