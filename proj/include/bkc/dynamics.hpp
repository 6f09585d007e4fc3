// dynamics.hpp — Time evolution of lattice fields (RK4 and exact spectral),
// wavepacket preparation, gain subtraction, observables, and closed-form
// continuum profiles.

#pragma once

#include <Eigen/Dense>

#include <optional>
#include <ostream>
#include <vector>

#include "bkc/model.hpp"
#include "bkc/spectral.hpp"

namespace bkc::dynamics {

struct FieldState {
    double tau = 0.0;
    Eigen::VectorXd values;
};

struct WavepacketSpec {
    int center = 1;        // site index n0 in 1..L
    double sigma = 2.0;    // width in sites
    double K0 = 0.0;       // carrier wavevector, one of {0, +-pi/(2d), pi/d}
    bool tilt = true;      // include the carrier tilt |t_R/t_L|^{(n-n0)/2}
    Quadrature quad = Quadrature::X;
};

// Re[exp(-(n-n0)^2 d^2 / (4 sigma^2)) e^{iK n d}] with K = K0 - iA (tilt
// relative to the packet center), normalized to peak magnitude 1. Rejects
// packets touching the open boundary (edge tail > 1e-6).
FieldState gaussian_wavepacket(const WavepacketSpec& spec, const HNParams& chain);

struct Trajectory {
    std::vector<double> times;
    Eigen::MatrixXd states;  // one row per sample
    uint64_t generator_fingerprint = 0;
};

// Classic fixed-step RK4 for d/dtau s = G s. Pre-checks dt * ||G||_inf < 0.5
// and aborts on NaN/overflow naming the offending time.
Trajectory evolve_rk4(const Generator& g, const FieldState& s0, double tau_end,
                      double dt, int n_samples = 129);

// Complex RK4 for i d/dtau s = H s (Hamiltonian-kind generators).
Eigen::MatrixXcd evolve_rk4_complex(const Eigen::MatrixXd& h, const Eigen::VectorXcd& s0,
                                    const std::vector<double>& times, double dt);

// state(tau) = V exp(Lambda tau) V^-1 s0. Requires eigenvectors; rejects
// near-defective spectra (condition > 1e12). Fast-path spectra evolve through
// the exact tilted-symmetric factorization instead of V^-1.
Trajectory evolve_exact(const spectral::Spectrum& spec, const FieldState& s0,
                        const std::vector<double>& times);

// Fast-path-only variant restricted to symmetric-frame modes with eigenvalue
// inside [lam_lo, lam_hi]; the discarded complement of a band-edge packet is
// exponentially small while its floating-point noise would otherwise be
// amplified ahead of the decaying signal.
Trajectory evolve_exact_windowed(const spectral::Spectrum& spec, const FieldState& s0,
                                 const std::vector<double>& times, double lam_lo,
                                 double lam_hi);

// Values multiplied by e^{-sign * gamma * tau} per sample.
Trajectory subtract_gain(const Trajectory& traj, double gamma, int sign = 1);

struct Observables {
    double center = 0.0;         // weighted by |psi_n|^2
    double width = 0.0;          // weighted standard deviation
    double peak = 0.0;           // max |psi_n|
    double norm = 0.0;           // plain 2-norm
    double weighted_norm = 0.0;  // sqrt(sum w_n psi_n^2) when weights given
};

Observables observables(const FieldState& s,
                        const std::optional<Eigen::VectorXd>& metric_weights = {});

// Closed-form continuum profile at time tau for a band-edge Gaussian packet:
// tilt e^{A(s-s0)} times the exact heat-kernel (diffusive) or dispersive
// (oscillatory) Gaussian, carrier taken through its real part, normalized so
// the tau = 0 profile has peak 1. Gain is NOT subtracted here. Throws
// focus_error once an anti-diffusive width parameter reaches zero.
Eigen::VectorXd continuum_gaussian(const EffCoeffs& coeffs, const WavepacketSpec& spec,
                                   int L, double tau);

// Spectral projector window for a band-edge packet of the given chain: keeps
// symmetric-frame modes within delta_c of the band edge in wavenumber.
std::pair<double, double> band_window(const HNParams& chain, BandEdge band, double delta_c);

// Trajectory CSV: header tau,site_1..site_N.
void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

}  // namespace bkc::dynamics
