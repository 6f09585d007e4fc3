// dynamics.cpp — wavepackets, RK4 and exact propagation, gain subtraction,
// observables, continuum profiles.

#include "bkc/dynamics.hpp"

#include <cmath>
#include <limits>

#include "bkc/io.hpp"

namespace bkc::dynamics {

namespace {

using cd = std::complex<double>;

std::vector<double> sample_times(double tau_end, int steps, int n_samples) {
    std::vector<int> marks;
    const int samples = std::max(2, std::min(n_samples, steps + 1));
    marks.reserve(samples);
    for (int s = 0; s < samples; ++s)
        marks.push_back(static_cast<int>(std::llround(double(s) * steps / (samples - 1))));
    std::vector<double> out;
    out.reserve(marks.size());
    for (int m : marks) out.push_back(tau_end * m / steps);
    return out;
}

void check_finite(const Eigen::VectorXd& v, double tau) {
    if (!v.allFinite())
        throw domain_error("evolution produced NaN/overflow at tau = " + io::format_g17(tau));
}

}  // namespace

FieldState gaussian_wavepacket(const WavepacketSpec& spec, const HNParams& chain) {
    const int L = chain.L;
    if (spec.sigma < 2.0)
        throw domain_error("gaussian_wavepacket: sigma must be >= 2 sites");
    if (spec.center - 4.0 * spec.sigma < 1.0 || spec.center + 4.0 * spec.sigma > L)
        throw domain_error("gaussian_wavepacket: center " + std::to_string(spec.center) +
                           " +- 4 sigma leaves the lattice [1," + std::to_string(L) + "]");
    const double d = chain.d;
    const double A =
        spec.tilt ? std::log(std::abs(chain.t_R / chain.t_L)) / (2.0 * d) : 0.0;
    FieldState s;
    s.values.resize(L);
    for (int n = 1; n <= L; ++n) {
        const double x = (n - spec.center) * d;
        const double gauss = std::exp(-x * x / (4.0 * spec.sigma * spec.sigma * d * d));
        const double carrier = std::cos(spec.K0 * n * d);
        s.values[n - 1] = carrier * std::exp(A * x) * gauss;
    }
    const double peak = s.values.cwiseAbs().maxCoeff();
    if (!(peak > 0.0))
        throw domain_error("gaussian_wavepacket: carrier zeroes the whole packet");
    s.values /= peak;
    if (std::abs(s.values[0]) > 1e-6 || std::abs(s.values[L - 1]) > 1e-6)
        throw domain_error("gaussian_wavepacket: packet overlaps the open boundary "
                           "(edge tail > 1e-6)");
    return s;
}

Trajectory evolve_rk4(const Generator& g, const FieldState& s0, double tau_end,
                      double dt, int n_samples) {
    if (g.kind != GeneratorKind::Flow)
        throw domain_error("evolve_rk4: generator must be of flow kind");
    if (s0.values.size() != g.size())
        throw domain_error("evolve_rk4: state length does not match generator");
    if (!(tau_end > 0.0) || !(dt > 0.0))
        throw domain_error("evolve_rk4: tau_end and dt must be positive");
    const double gnorm = g.mat.cwiseAbs().rowwise().sum().maxCoeff();
    if (dt * gnorm >= 0.5)
        throw domain_error("evolve_rk4: dt * ||G||_inf = " + io::format_g17(dt * gnorm) +
                           " violates the stability bound 0.5");
    const int steps = static_cast<int>(std::ceil(tau_end / dt - 1e-12));
    const double h = tau_end / steps;
    const auto times = sample_times(tau_end, steps, n_samples);

    Trajectory traj;
    traj.times = times;
    traj.states.resize(times.size(), g.size());
    traj.generator_fingerprint = io::fingerprint(g.mat);

    Eigen::VectorXd y = s0.values;
    std::vector<int> marks(times.size());
    for (std::size_t i = 0; i < times.size(); ++i)
        marks[i] = static_cast<int>(std::llround(times[i] / h));

    std::size_t mark = 0;
    while (mark < times.size() && marks[mark] == 0) {
        traj.states.row(mark) = y;
        ++mark;
    }
    Eigen::VectorXd k1(g.size()), k2(g.size()), k3(g.size()), k4(g.size()), tmp(g.size());
    for (int step = 1; step <= steps; ++step) {
        k1.noalias() = g.mat * y;
        tmp = y + 0.5 * h * k1;
        k2.noalias() = g.mat * tmp;
        tmp = y + 0.5 * h * k2;
        k3.noalias() = g.mat * tmp;
        tmp = y + h * k3;
        k4.noalias() = g.mat * tmp;
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        while (mark < times.size() && marks[mark] == step) {
            check_finite(y, times[mark]);
            traj.states.row(mark) = y;
            ++mark;
        }
    }
    return traj;
}

Eigen::MatrixXcd evolve_rk4_complex(const Eigen::MatrixXd& h, const Eigen::VectorXcd& s0,
                                    const std::vector<double>& times, double dt) {
    // i ds/dtau = H s  ->  ds/dtau = -i H s
    const double hnorm = h.cwiseAbs().rowwise().sum().maxCoeff();
    if (dt * hnorm >= 0.5)
        throw domain_error("evolve_rk4_complex: dt * ||H||_inf violates the stability bound");
    Eigen::MatrixXcd out(times.size(), s0.size());
    Eigen::VectorXcd y = s0;
    double tau = 0.0;
    const cd mi(0.0, -1.0);
    Eigen::VectorXcd k1, k2, k3, k4;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double target = times[i];
        if (target < tau - 1e-12)
            throw domain_error("evolve_rk4_complex: times must be increasing");
        while (tau < target - 1e-12) {
            const double step = std::min(dt, target - tau);
            k1 = mi * (h * y);
            k2 = mi * (h * (y + 0.5 * step * k1));
            k3 = mi * (h * (y + 0.5 * step * k2));
            k4 = mi * (h * (y + step * k3));
            y += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            tau += step;
        }
        out.row(i) = y;
    }
    return out;
}

namespace {

Trajectory evolve_fast_path(const spectral::Spectrum& spec, const FieldState& s0,
                            const std::vector<double>& times,
                            const std::optional<std::pair<double, double>>& window) {
    const auto& f = *spec.tilted;
    const int n = static_cast<int>(f.log_tilt.size());
    const double lt_ref = 0.5 * (f.log_tilt.maxCoeff() + f.log_tilt.minCoeff());

    Eigen::VectorXcd u0(n);
    const cd iphase_conj[4] = {cd(1, 0), cd(0, -1), cd(-1, 0), cd(0, 1)};  // (-i)^n
    for (int i = 0; i < n; ++i) {
        const double w = std::exp(-(f.log_tilt[i] - lt_ref));
        u0[i] = f.anti ? iphase_conj[(i + 1) % 4] * s0.values[i] * w
                       : cd(s0.values[i] * w, 0.0);
    }
    Eigen::VectorXcd c = f.modes.transpose().cast<cd>() * u0;
    if (window) {
        for (int k = 0; k < n; ++k)
            if (f.sym_eigs[k] < window->first || f.sym_eigs[k] > window->second) c[k] = 0.0;
    }

    Trajectory traj;
    traj.times = times;
    traj.states.resize(times.size(), n);
    const cd iphase[4] = {cd(1, 0), cd(0, 1), cd(-1, 0), cd(0, -1)};
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        const double tau = times[ti];
        Eigen::VectorXcd ct(n);
        for (int k = 0; k < n; ++k) {
            const cd lam = f.anti ? cd(0.0, -f.sym_eigs[k]) : cd(f.sym_eigs[k], 0.0);
            ct[k] = c[k] * std::exp(lam * tau);
        }
        Eigen::VectorXcd ut = f.modes.cast<cd>() * ct;
        Eigen::VectorXd row(n);
        double max_im = 0.0, max_re = 0.0;
        for (int i = 0; i < n; ++i) {
            cd v = ut[i] * std::exp(f.log_tilt[i] - lt_ref);
            if (f.anti) v *= iphase[(i + 1) % 4];
            max_im = std::max(max_im, std::abs(v.imag()));
            max_re = std::max(max_re, std::abs(v.real()));
            row[i] = v.real();
        }
        if (max_im > 1e-9 * std::max(1.0, max_re))
            throw domain_error("evolve_exact: imaginary residue " + io::format_g17(max_im) +
                               " exceeds tolerance at tau = " + io::format_g17(tau));
        check_finite(row, tau);
        traj.states.row(ti) = row;
    }
    return traj;
}

}  // namespace

Trajectory evolve_exact(const spectral::Spectrum& spec, const FieldState& s0,
                        const std::vector<double>& times) {
    if (spec.tilted) return evolve_fast_path(spec, s0, times, std::nullopt);
    if (!spec.right_eigenvectors)
        throw domain_error("evolve_exact: spectrum lacks eigenvectors");
    if (spec.vector_condition > 1e12)
        throw domain_error("evolve_exact: eigenvector condition " +
                           io::format_g17(spec.vector_condition) +
                           " exceeds 1e12 (near-defective); use RK4");
    const auto& v = *spec.right_eigenvectors;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(v);
    Eigen::VectorXcd c = lu.solve(s0.values.cast<cd>());

    Trajectory traj;
    traj.times = times;
    traj.states.resize(times.size(), v.rows());
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        const double tau = times[ti];
        Eigen::VectorXcd ct(c.size());
        for (int k = 0; k < c.size(); ++k) ct[k] = c[k] * std::exp(spec.eigenvalues[k] * tau);
        const Eigen::VectorXcd st = v * ct;
        const double max_re = st.real().cwiseAbs().maxCoeff();
        const double max_im = st.imag().cwiseAbs().maxCoeff();
        if (max_im > 1e-9 * std::max(1.0, max_re))
            throw domain_error("evolve_exact: imaginary residue " + io::format_g17(max_im) +
                               " exceeds tolerance at tau = " + io::format_g17(tau));
        Eigen::VectorXd row = st.real();
        check_finite(row, tau);
        traj.states.row(ti) = row;
    }
    return traj;
}

Trajectory evolve_exact_windowed(const spectral::Spectrum& spec, const FieldState& s0,
                                 const std::vector<double>& times, double lam_lo,
                                 double lam_hi) {
    if (!spec.tilted)
        throw domain_error("evolve_exact_windowed: requires a fast-path spectrum");
    return evolve_fast_path(spec, s0, times, std::make_pair(lam_lo, lam_hi));
}

Trajectory subtract_gain(const Trajectory& traj, double gamma, int sign) {
    if (!std::isfinite(gamma)) throw domain_error("subtract_gain: gamma must be finite");
    Trajectory out = traj;
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        out.states.row(i) *= std::exp(-sign * gamma * traj.times[i]);
    return out;
}

Observables observables(const FieldState& s,
                        const std::optional<Eigen::VectorXd>& metric_weights) {
    const int n = static_cast<int>(s.values.size());
    Observables o;
    o.norm = s.values.norm();
    o.peak = s.values.cwiseAbs().maxCoeff();
    if (!(o.norm > 0.0)) throw domain_error("observables: zero state");
    double wsum = 0.0, c = 0.0;
    for (int i = 0; i < n; ++i) {
        const double w = s.values[i] * s.values[i];
        wsum += w;
        c += (i + 1) * w;
    }
    o.center = c / wsum;
    double var = 0.0;
    for (int i = 0; i < n; ++i) {
        const double w = s.values[i] * s.values[i];
        var += (i + 1 - o.center) * (i + 1 - o.center) * w;
    }
    o.width = std::sqrt(var / wsum);
    if (metric_weights) {
        if (metric_weights->size() != n)
            throw domain_error("observables: metric weight length mismatch");
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += (*metric_weights)[i] * s.values[i] * s.values[i];
        o.weighted_norm = std::sqrt(acc);
    }
    return o;
}

Eigen::VectorXd continuum_gaussian(const EffCoeffs& coeffs, const WavepacketSpec& spec,
                                   int L, double tau) {
    const double d = coeffs.d;
    const double s0 = spec.center * d;
    const double sig = spec.sigma * d;
    Eigen::VectorXd prof0(L), prof(L);
    const bool diffusive = coeffs.regime == ChainRegime::Diffusive;

    auto eval = [&](double t, Eigen::VectorXd& out) {
        if (diffusive) {
            const double s2 = sig * sig + coeffs.diffusion * t;
            if (s2 <= 0.0)
                throw focus_error("continuum_gaussian: anti-diffusive width parameter "
                                  "sigma0^2 + D tau = " + io::format_g17(s2) +
                                  " <= 0 (focusing time passed); no closed-form solution");
            const double amp = std::exp(-coeffs.Gamma * t) * (sig / std::sqrt(s2));
            for (int n = 1; n <= L; ++n) {
                const double x = n * d - s0;
                out[n - 1] = std::cos(coeffs.K0 * n * d) * std::exp(coeffs.A * x) * amp *
                             std::exp(-x * x / (4.0 * s2));
            }
        } else {
            // dispersive Gaussian of i u_t = -(hbar^2/2m) u'' + Gamma u
            const double c2 = coeffs.hbar * coeffs.hbar / (2.0 * coeffs.mass);
            const cd q(sig * sig, c2 * t);
            const cd pref = sig / std::sqrt(q);
            const cd phase = std::exp(cd(0.0, -coeffs.Gamma * t));
            for (int n = 1; n <= L; ++n) {
                const double x = n * d - s0;
                const cd u = pref * phase * std::exp(-x * x / (4.0 * q));
                const cd carrier = std::exp(cd(0.0, coeffs.K0 * n * d));
                out[n - 1] = (carrier * u).real() * std::exp(coeffs.A * x);
            }
        }
    };
    eval(0.0, prof0);
    const double norm0 = prof0.cwiseAbs().maxCoeff();
    eval(tau, prof);
    return prof / norm0;
}

std::pair<double, double> band_window(const HNParams& chain, BandEdge band, double delta_c) {
    const double sqT = std::sqrt(std::abs(chain.t_L * chain.t_R));
    const double edge = 2.0 * sqT;
    const double inner = 2.0 * sqT * std::cos(std::min(delta_c * chain.d, kPi / 2));
    if (band == BandEdge::Top) return {inner, edge * (1.0 + 1e-12)};
    return {-edge * (1.0 + 1e-12), -inner};
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
    const int n = static_cast<int>(traj.states.cols());
    os << "tau";
    for (int i = 1; i <= n; ++i) os << ",site_" << i;
    os << '\n';
    for (std::size_t r = 0; r < traj.times.size(); ++r) {
        os << io::format_g17(traj.times[r]);
        for (int i = 0; i < n; ++i) os << ',' << io::format_g17(traj.states(r, i));
        os << '\n';
    }
}

}  // namespace bkc::dynamics
