// perturbation.hpp — Curved-space degenerate perturbation theory for the
// coupled quadrature chains: doublet wavefunctions, metric-weighted matrix
// elements, closed-form splitting, gap scans, and scaling fits.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bkc/model.hpp"

namespace bkc::perturbation {

struct GroundDoublet {
    Eigen::VectorXcd psi_X;  // ((J+D)/(J-D))^{(n-L)/2} sin(pi n/(L+1)) i^n, unit curved norm
    Eigen::VectorXcd psi_P;  // mirror envelope
    double E0 = 0.0;         // Schroedinger energy 2 sqrt(J^2-D^2) cos(pi/(L+1))
};

GroundDoublet ground_doublet(const ModelParams& params);

struct OffdiagElements {
    std::complex<double> M12;  // P-chain metric weights, -i mu sum
    std::complex<double> M21;  // X-chain metric weights, +i mu sum
};

OffdiagElements offdiag_elements(const ModelParams& params);

// Signed magnitude in the log domain: value = sign * exp(log_abs).
struct LogValue {
    double log_abs = 0.0;
    int sign = 0;
    double value() const;  // may overflow to inf
    double mantissa10() const;
    int exp10() const;
};

// Coefficient c of the effective 2x2 matrix M = c sigma_y (so dE_pred = 2|c|).
// Delta = 0 is the exact special case c = mu. Throws on chi <= 1 outside that
// case or when the linear-domain value overflows (use the log variant).
double closed_form_c(const ModelParams& params);
LogValue closed_form_c_log(const ModelParams& params);

struct PerturbationResult {
    double chi = 0.0;
    std::complex<double> M12, M21;
    double c = 0.0;
    double dE_pred = 0.0;
    std::optional<double> dE_exact;
    std::optional<double> rel_err;
};

PerturbationResult perturbation_result(const ModelParams& params, bool with_exact);

struct GapScanRow {
    int L = 0;
    double mu = 0.0;
    double dE_pred_mantissa = 0.0;
    int dE_pred_exp10 = 0;
    double log_dE_pred = 0.0;  // natural log, for fits
    std::optional<double> dE_exact;
    std::optional<double> rel_err;
    std::string validity;  // ok | extrapolated | floor | zero
    std::string error;
};

// Cartesian scan over L x mu at fixed Delta; rows in (L, mu) grid order.
// Per-point failures are recorded in the row, never aborting the scan.
std::vector<GapScanRow> gap_scan(const std::vector<int>& Ls, double J, double Delta,
                                 const std::vector<double>& mus, bool with_exact,
                                 unsigned threads = 1);

struct ScalingFit {
    double slope = 0.0;      // coefficient of L       (expect ln chi)
    double power = 0.0;      // coefficient of ln(L+1) (expect -3)
    double intercept = 0.0;
    int points = 0;
};

// Least-squares fit of ln(dE_pred/mu) = slope*L + power*ln(L+1) + intercept
// over rows in the asymptotic window (L+1) ln(chi) > 5. Requires >= 6 distinct L.
ScalingFit asymptotic_scaling(const std::vector<GapScanRow>& rows, double J, double Delta);

// CSV: L,mu,dE_pred_mantissa,dE_pred_exp10,dE_exact,rel_err,validity_flag
void write_gap_scan_csv(const std::vector<GapScanRow>& rows, std::ostream& os);

}  // namespace bkc::perturbation
