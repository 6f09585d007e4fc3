// perturbation.cpp — doublet states, metric-weighted elements, closed form,
// scans, and scaling fits.

#include "bkc/perturbation.hpp"

#include <cmath>
#include <limits>

#include "bkc/io.hpp"
#include "bkc/spectral.hpp"
#include "bkc/sweep.hpp"

namespace bkc::perturbation {

namespace {

using cd = std::complex<double>;

void require_oscillatory(const ModelParams& p, const char* op, bool strict) {
    if (!(p.Delta < p.J))
        throw domain_error(std::string(op) + ": requires Delta < J");
    if (strict && p.Delta <= 0.0)
        throw domain_error(std::string(op) + ": requires Delta > 0");
}

double chi_of(const ModelParams& p) {
    return std::sqrt((p.J + p.Delta) / (p.J - p.Delta));
}

}  // namespace

GroundDoublet ground_doublet(const ModelParams& params) {
    params.validate();
    require_oscillatory(params, "ground_doublet", false);
    const int L = params.L;
    const double chi = chi_of(params);
    const double theta = kPi / (L + 1);
    const double norm = std::sqrt(2.0 / (L + 1));
    const cd iphase[4] = {cd(1, 0), cd(0, 1), cd(-1, 0), cd(0, -1)};
    GroundDoublet out;
    out.psi_X.resize(L);
    out.psi_P.resize(L);
    for (int n = 1; n <= L; ++n) {
        const double s = std::sin(theta * n);
        out.psi_X[n - 1] = norm * std::pow(chi, double(n - L)) * s * iphase[n % 4];
        out.psi_P[n - 1] = norm * std::pow(chi, double(1 - n)) * s * iphase[n % 4];
    }
    out.E0 = 2.0 * std::sqrt(params.J * params.J - params.Delta * params.Delta) *
             std::cos(theta);
    return out;
}

OffdiagElements offdiag_elements(const ModelParams& params) {
    params.validate();
    require_oscillatory(params, "offdiag_elements", false);
    if (!(params.mu > 0.0))
        throw domain_error("offdiag_elements: requires mu > 0");
    if (params.Delta == 0.0) {
        // exact special case: flat metric, both sums equal mu
        return {cd(0.0, -params.mu), cd(0.0, params.mu)};
    }
    const GroundDoublet gd = ground_doublet(params);
    const int L = params.L;
    const double chi2 = (params.J + params.Delta) / (params.J - params.Delta);
    cd s12 = 0.0, s21 = 0.0;
    for (int n = 1; n <= L; ++n) {
        const double wp = std::pow(chi2, double(n - 1));      // P-chain metric
        const double wx = std::pow(chi2, double(L - n));      // X-chain metric
        s12 += wp * std::conj(gd.psi_P[n - 1]) * gd.psi_X[n - 1];
        s21 += wx * std::conj(gd.psi_X[n - 1]) * gd.psi_P[n - 1];
    }
    // coupling signs of the coupled flow: the P row is fed by -mu X, the X row
    // by +mu P, giving M = c sigma_y with c real positive
    return {cd(0.0, -1.0) * params.mu * s12, cd(0.0, 1.0) * params.mu * s21};
}

double LogValue::value() const { return sign * std::exp(log_abs); }

double LogValue::mantissa10() const {
    if (sign == 0) return 0.0;
    const double l10 = log_abs / std::log(10.0);
    return sign * std::pow(10.0, l10 - std::floor(l10));
}

int LogValue::exp10() const {
    if (sign == 0) return 0;
    return static_cast<int>(std::floor(log_abs / std::log(10.0)));
}

LogValue closed_form_c_log(const ModelParams& params) {
    params.validate();
    require_oscillatory(params, "closed_form_c", false);
    LogValue out;
    if (params.mu == 0.0) return out;  // sign 0 encodes exact zero
    if (params.Delta == 0.0) {
        out.sign = params.mu > 0 ? 1 : -1;
        out.log_abs = std::log(std::abs(params.mu));
        return out;
    }
    const int L = params.L;
    const double chi2 = (params.J + params.Delta) / (params.J - params.Delta);
    const double lnchi = 0.5 * std::log(chi2);
    const double theta = kPi / (L + 1);
    const double x = (L + 1) * lnchi;  // sinh argument, > 0
    if (x > 7.0e5)
        throw domain_error("closed_form_c: (L+1) ln(chi) = " + io::format_g17(x) +
                           " beyond the supported log-domain range");
    const double log_sinh = x - std::log(2.0) + std::log1p(-std::exp(-2.0 * x));
    const double denom_mod2 =
        (chi2 - std::cos(2.0 * theta)) * (chi2 - std::cos(2.0 * theta)) +
        std::sin(2.0 * theta) * std::sin(2.0 * theta);
    out.sign = params.mu > 0 ? 1 : -1;
    out.log_abs = std::log(std::abs(params.mu)) + std::log(4.0) + std::log(chi2 + 1.0) +
                  2.0 * std::log(std::sin(theta)) + std::log(chi2) + log_sinh -
                  std::log(double(L + 1)) - std::log(chi2 - 1.0) - std::log(denom_mod2);
    return out;
}

double closed_form_c(const ModelParams& params) {
    params.validate();
    require_oscillatory(params, "closed_form_c", false);
    if (params.Delta == 0.0) return params.mu;  // exact special case
    const LogValue lv = closed_form_c_log(params);
    if (lv.sign == 0) return 0.0;
    if (lv.log_abs > 700.0)
        throw domain_error("closed_form_c: value overflows double (log = " +
                           io::format_g17(lv.log_abs) + "); use closed_form_c_log");
    return lv.value();
}

PerturbationResult perturbation_result(const ModelParams& params, bool with_exact) {
    PerturbationResult r;
    r.chi = chi_of(params);
    const auto od = offdiag_elements(params);
    r.M12 = od.M12;
    r.M21 = od.M21;
    r.c = od.M21.imag();  // M21 = +i c
    r.dE_pred = 2.0 * std::abs(r.c);
    if (with_exact) {
        const auto dg = spectral::doublet_gap(params);
        r.dE_exact = dg.dE;
        if (dg.dE > 0.0) r.rel_err = std::abs(r.dE_pred - dg.dE) / dg.dE;
    }
    return r;
}

std::vector<GapScanRow> gap_scan(const std::vector<int>& Ls, double J, double Delta,
                                 const std::vector<double>& mus, bool with_exact,
                                 unsigned threads) {
    if (Ls.empty() || mus.empty())
        throw domain_error("gap_scan: empty grid");
    std::vector<GapScanRow> rows(Ls.size() * mus.size());
    sweep::run_indexed(rows.size(), threads, [&](std::size_t idx) {
        const int L = Ls[idx / mus.size()];
        const double mu = mus[idx % mus.size()];
        GapScanRow row;
        row.L = L;
        row.mu = mu;
        ModelParams p;
        p.J = J;
        p.Delta = Delta;
        p.mu = mu;
        p.L = L;
        try {
            const LogValue lv = closed_form_c_log(p);
            if (lv.sign == 0) {
                row.validity = "zero";
            } else {
                const LogValue dE{lv.log_abs + std::log(2.0), lv.sign};
                row.dE_pred_mantissa = dE.mantissa10();
                row.dE_pred_exp10 = dE.exp10();
                row.log_dE_pred = dE.log_abs;
                // perturbative validity: compare against the unperturbed level
                // spacing next to the ground doublet
                const double sqJD = std::sqrt(J * J - Delta * Delta);
                const double th = kPi / (L + 1);
                const double spacing = 2.0 * sqJD * (std::cos(th) - std::cos(2.0 * th));
                row.validity = (dE.log_abs > std::log(0.1 * spacing)) ? "extrapolated" : "ok";
                if (with_exact) {
                    try {
                        const auto dg = spectral::doublet_gap(p);
                        row.dE_exact = dg.dE;
                        if (dg.dE > 0.0)
                            row.rel_err = std::abs(dE.sign * std::exp(dE.log_abs) - dg.dE) / dg.dE;
                    } catch (const precision_floor_error&) {
                        row.validity = "floor";
                    }
                }
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows[idx] = std::move(row);
    });
    return rows;
}

ScalingFit asymptotic_scaling(const std::vector<GapScanRow>& rows, double J, double Delta) {
    ModelParams p;
    p.J = J;
    p.Delta = Delta;
    const double lnchi = std::log(chi_of(p));
    // one point per distinct L inside the asymptotic window
    std::vector<std::pair<double, double>> pts;  // (L, ln(dE/mu))
    for (const auto& r : rows) {
        if (!r.error.empty() || r.validity == "zero") continue;
        if ((r.L + 1) * lnchi <= 5.0) continue;
        const double y = r.log_dE_pred - std::log(std::abs(r.mu));
        bool seen = false;
        for (auto& q : pts)
            if (q.first == r.L) { seen = true; break; }
        if (!seen) pts.emplace_back(double(r.L), y);
    }
    if (pts.size() < 6)
        throw domain_error("asymptotic_scaling: need >= 6 L-points with (L+1) ln(chi) > 5, got " +
                           std::to_string(pts.size()));
    // 3-parameter normal equations for y = a L + b ln(L+1) + c
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Eigen::Vector3d aty = Eigen::Vector3d::Zero();
    for (auto& [L, y] : pts) {
        const Eigen::Vector3d row(L, std::log(L + 1.0), 1.0);
        ata += row * row.transpose();
        aty += row * y;
    }
    const Eigen::Vector3d sol = ata.ldlt().solve(aty);
    return {sol[0], sol[1], sol[2], static_cast<int>(pts.size())};
}

void write_gap_scan_csv(const std::vector<GapScanRow>& rows, std::ostream& os) {
    os << "L,mu,dE_pred_mantissa,dE_pred_exp10,dE_exact,rel_err,validity_flag\n";
    for (const auto& r : rows) {
        os << r.L << ',' << io::format_g17(r.mu) << ','
           << io::format_g17(r.dE_pred_mantissa) << ',' << r.dE_pred_exp10 << ',';
        if (r.dE_exact) os << io::format_g17(*r.dE_exact);
        os << ',';
        if (r.rel_err) os << io::format_g17(*r.rel_err);
        os << ',' << (r.error.empty() ? r.validity : std::string("error:") + r.error) << '\n';
    }
}

}  // namespace bkc::perturbation
