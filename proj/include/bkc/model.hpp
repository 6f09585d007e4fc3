// model.hpp — Physical parameters, gauge reductions, lattice generators, and
// continuum-theory coefficient sets for the quadrature chains.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "bkc/errors.hpp"

namespace bkc {

inline constexpr double kPi = 3.14159265358979323846;

// Parameters of the quadratic chain Hamiltonian: tunneling J e^{i theta},
// pairing Delta e^{i phi}, chemical potential mu, L sites, spacing d.
struct ModelParams {
    double J = 1.0;
    double theta = kPi / 2;
    double Delta = 0.0;
    double phi = kPi / 2;
    double mu = 0.0;
    int L = 2;
    double d = 1.0;
    double hbar = 1.0;

    void validate() const {
        if (!(J >= 0.0)) throw domain_error("ModelParams: J must be >= 0");
        if (!(Delta >= 0.0)) throw domain_error("ModelParams: Delta must be >= 0");
        if (L < 2) throw domain_error("ModelParams: L must be >= 2");
        if (!(d > 0.0)) throw domain_error("ModelParams: d must be > 0");
        if (!(hbar > 0.0)) throw domain_error("ModelParams: hbar must be > 0");
    }
};

// One asymmetric-hopping chain, field equation psi_dot_n = -t_R psi_{n-1} - t_L psi_{n+1}.
struct HNParams {
    double t_L = 0.0;
    double t_R = 0.0;
    int L = 2;
    double d = 1.0;
};

enum class ChainRegime { Oscillatory, Diffusive, Exceptional };
enum class GaugeRegime { Trivial, Nontrivial, Boundary };
enum class BandEdge { Top, Bottom };
enum class Quadrature { X, P };

// Sign rule only; spectral::classify_regime adds the spectral verification.
inline ChainRegime regime_of(const HNParams& c) {
    const double p = c.t_L * c.t_R;
    if (p < 0.0) return ChainRegime::Oscillatory;
    if (p > 0.0) return ChainRegime::Diffusive;
    return ChainRegime::Exceptional;
}

struct GaugeReduction {
    GaugeRegime regime;
    ModelParams reduced;   // theta = phi = pi/2 for Nontrivial/Boundary
    ModelParams original;  // as given (keeps the original phi)
};

GaugeReduction reduce_gauge(const ModelParams& params);

struct HNChains {
    HNParams x_chain;
    HNParams p_chain;
};

// Decoupled quadrature chains of a reduced parameter set (theta = phi = pi/2).
HNChains hn_chains(const ModelParams& params);

enum class GeneratorKind {
    Flow,        // d/dtau state = G * state
    Hamiltonian  // i d/dtau state = G * state  (G real symmetric-like Schroedinger form)
};

// Dense real evolution generator with a declared band profile.
struct Generator {
    Eigen::MatrixXd mat;
    std::vector<int> band_offsets;  // allowed diagonals, e.g. {-1, +1}
    GeneratorKind kind = GeneratorKind::Flow;

    int size() const { return static_cast<int>(mat.rows()); }
    // True when every entry outside the declared offsets is exactly zero.
    bool band_profile_ok() const;
};

Generator build_generator_hn(const HNParams& chain);

// Coupled 2L x 2L generator on the state layout (X_1..X_L, P_1..P_L).
Generator build_generator_coupled(const ModelParams& params);

// Schroedinger-form hopping matrix H with i phi_dot = H phi, obtained from the
// flow generator by the i^n gauge: H(n,n-1) = -t_R, H(n,n+1) = +t_L.
Eigen::MatrixXd schrodinger_hamiltonian(const HNParams& chain);

enum class GaugeKind { IPow, MinusIPow, Tilt, Carrier };

// Elementwise gauge factors: i^n, (-i)^n, r^n, e^{i K n d}. `param` is r for
// Tilt (r > 0) and K*d for Carrier; ignored otherwise. n runs 1..L.
Eigen::VectorXcd gauge_transform(const Eigen::VectorXcd& field, GaugeKind kind,
                                 double param = 0.0);

// Conserved quadratic form of the coupled flow (integrator diagnostic):
// H = sum_n P_n [(J+D) X_{n-1} + (D-J) X_{n+1}] + (mu/2) sum_n (X_n^2 + P_n^2).
double classical_hamiltonian(const Eigen::VectorXd& state, const ModelParams& params);

// kappa = ln^2|t_R/t_L| / d^2. Exceptional chains rejected.
double curvature(const HNParams& chain);

// Continuum coefficients near a band edge.
struct EffCoeffs {
    ChainRegime regime{};
    BandEdge band{};
    double mass = 0.0;       // oscillatory regime
    double diffusion = 0.0;  // diffusive regime (signed per band)
    double A = 0.0;          // imaginary vector potential, ln|t_R/t_L|/(2d)
    double Gamma = 0.0;      // reaction / energy offset (signed per band)
    double gamma = 0.0;      // net gain -Gamma + kappa*D/4 (diffusive)
    double v_s = 0.0;        // 2 sqrt|t_L t_R| d
    double K0 = 0.0;         // real carrier wavevector of this band edge
    std::complex<double> K{0.0, 0.0};  // K0 - i A
    double d = 1.0;          // lattice spacing the coefficients were built on
    double hbar = 1.0;
};

// Carrier K0 in {0, pi/d} whose tilted plane wave sits at the requested band
// edge of the flow generator; fixed by sign(t_L) (diffusive) / sign(t_R)
// (oscillatory) and verified against the measured growth rate in the tests.
double carrier_for_band(const HNParams& chain, BandEdge band);

EffCoeffs continuum_coefficients(const HNParams& chain, BandEdge band, double hbar = 1.0);

// Effective drift/reaction/diffusion coefficients around a general carrier K0
// (diffusive chains): psi_dot = [reaction - i*drift*(d_s - iK) + diffusion*(d_s - iK)^2] psi.
struct EffTheoryK {
    double drift = 0.0;      // sin(K0 d) v_s   (sign-adjusted to the chain)
    double reaction = 0.0;   // cos(K0 d) Gamma
    double diffusion = 0.0;  // -cos(K0 d) D
    double v_s = 0.0;
    std::complex<double> K{0.0, 0.0};
};

EffTheoryK effective_theory_at_K(const HNParams& chain, double K0);

}  // namespace bkc
