// spectral.hpp — Eigendecomposition of generators, regime classification,
// exact kernels, localization diagnostics, and doublet-gap extraction.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <ostream>
#include <vector>

#include "bkc/model.hpp"

namespace bkc::spectral {

// Stable factorized form of a symmetrizable tridiagonal generator:
//   G = T * Phase * (U S U^T) * Phase^-1 * T^-1
// with T = diag(e^{log_tilt_n}), Phase = diag(i^n) in the anti-symmetric case,
// U orthogonal and S = diag(sym_eigs). Eigenvalues are sym_eigs (symmetric
// case) or -i*sym_eigs (anti-symmetric case).
struct TiltedSymForm {
    Eigen::VectorXd log_tilt;
    Eigen::MatrixXd modes;     // U, columns ordered with sym_eigs ascending
    Eigen::VectorXd sym_eigs;
    bool anti = false;         // true: eigenvalues are -i * sym_eigs
};

struct Spectrum {
    Eigen::VectorXcd eigenvalues;
    std::optional<Eigen::MatrixXcd> right_eigenvectors;  // unit columns
    Eigen::VectorXd residuals;       // ||G v - lambda v||_2 / ||G||_inf per pair
    double generator_norm = 0.0;     // ||G||_inf
    bool fast_path = false;
    std::optional<TiltedSymForm> tilted;   // present on the fast path
    double vector_condition = 0.0;   // estimate of cond_1(V) when vectors exist
};

struct EigsOptions {
    bool want_vectors = true;
    int size_cap = 2000;
    bool force_general = false;  // bypass the tridiagonal fast path
};

// Full spectrum. Uniform or non-uniform tridiagonal generators whose
// sub/super products share one sign are solved through the exact diagonal
// similarity to a symmetric (or anti-symmetric) tridiagonal problem; strictly
// triangular tridiagonals return their diagonal exactly. Everything else goes
// through balancing + Hessenberg + Francis double-shift QR, with eigenvectors
// on demand via inverse iteration.
Spectrum eigs(const Generator& g, const EigsOptions& opts = {});

// Sign of t_L t_R; the Exceptional answer is additionally verified spectrally.
ChainRegime classify_regime(const HNParams& chain);

struct StationaryModes {
    std::optional<Eigen::VectorXd> right_kernel;
    std::optional<Eigen::VectorXd> left_kernel;
};

// Exact kernel of the open-boundary chain generator (odd L only): recursion
// psi_{n+1} = -(t_R/t_L) psi_{n-1}, support on odd sites. Left kernel from the
// adjoint recursion. Even L returns empty optionals.
StationaryModes stationary_modes(const HNParams& chain);

struct LocalizationMetric {
    double center_of_mass = 0.0;  // site index in 1..L
    double decay_rate = 0.0;      // slope of the fitted ln|v_n| envelope
};

std::vector<LocalizationMetric> localization_metrics(const Spectrum& spec);

struct DoubletGap {
    double e_low = 0.0;   // Im(lambda) of the tracked pair
    double e_high = 0.0;
    double dE = 0.0;
    double dE_pred = 0.0;  // closed-form prediction used for the floor check
};

// Splitting of the two levels that continue from the mu = 0 ground doublet
// (most negative Im(lambda) branch), tracked from mu = 0 by nearest-neighbor
// matching with linear extrapolation. Throws precision_floor_error when the
// predicted splitting is below 1e-10 * spectral radius, and domain_error when
// the spectrum is not purely imaginary (wrong regime / instability).
DoubletGap doublet_gap(const ModelParams& params);

// CSV: index,re_lambda,im_lambda,residual sorted by (Im, Re).
void write_spectrum_csv(const Spectrum& spec, std::ostream& os);

}  // namespace bkc::spectral
