// dense_eig.cpp — Balancing, Hessenberg reduction, Francis QR, inverse
// iteration, and symmetric tridiagonal QL.

#include "bkc/dense_eig.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace bkc::eig {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double sign_of(double a, double b) { return b >= 0.0 ? std::abs(a) : -std::abs(a); }

}  // namespace

void balance(Eigen::MatrixXd& a, Eigen::VectorXd& scale) {
    const int n = static_cast<int>(a.rows());
    const double radix = 2.0, sqrdx = radix * radix;
    scale = Eigen::VectorXd::Ones(n);
    bool done = false;
    while (!done) {
        done = true;
        for (int i = 0; i < n; ++i) {
            double r = 0.0, c = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix, f = 1.0;
            const double s = c + r;
            while (c < g) { f *= radix; c *= sqrdx; }
            g = r * radix;
            while (c > g) { f /= radix; c /= sqrdx; }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                g = 1.0 / f;
                scale[i] *= f;
                a.row(i) *= g;
                a.col(i) *= f;
            }
        }
    }
}

void hessenberg(Eigen::MatrixXd& a, Eigen::MatrixXd* q) {
    const int n = static_cast<int>(a.rows());
    if (q) *q = Eigen::MatrixXd::Identity(n, n);
    for (int k = 0; k + 2 < n; ++k) {
        const int m = n - k - 1;
        Eigen::VectorXd v = a.col(k).segment(k + 1, m);
        const double xnorm = v.norm();
        if (xnorm == 0.0) continue;
        const double alpha = -sign_of(xnorm, v[0] != 0.0 ? v[0] : 1.0);
        v[0] -= alpha;
        const double vnorm = v.norm();
        if (vnorm <= kEps * xnorm) continue;
        v /= vnorm;
        a.block(k + 1, k, m, n - k).noalias() -=
            2.0 * v * (v.transpose() * a.block(k + 1, k, m, n - k));
        a.block(0, k + 1, n, m).noalias() -=
            2.0 * (a.block(0, k + 1, n, m) * v) * v.transpose();
        if (q)
            q->block(0, k + 1, n, m).noalias() -=
                2.0 * (q->block(0, k + 1, n, m) * v) * v.transpose();
        for (int i = k + 2; i < n; ++i) a(i, k) = 0.0;
    }
}

Eigen::VectorXcd hqr_eigenvalues(Eigen::MatrixXd h, QrReport* report,
                                 int iter_cap_per_block) {
    using cd = std::complex<double>;
    const int n = static_cast<int>(h.rows());
    Eigen::VectorXcd w(n);
    if (n == 0) return w;
    if (n == 1) { w[0] = h(0, 0); return w; }

    double anorm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(h(i, j));
    if (anorm == 0.0) anorm = 1.0;

    std::vector<double> shifts;
    int total_sweeps = 0;
    const int total_cap = 30 * n + 100;

    int nn = n - 1;
    double t = 0.0;
    while (nn >= 0) {
        int its = 0;
        int l;
        do {
            for (l = nn; l >= 1; --l) {
                double s = std::abs(h(l - 1, l - 1)) + std::abs(h(l, l));
                if (s == 0.0) s = anorm;
                if (std::abs(h(l, l - 1)) <= kEps * s) {
                    h(l, l - 1) = 0.0;
                    break;
                }
            }
            if (l < 0) l = 0;
            double x = h(nn, nn);
            if (l == nn) {
                w[nn--] = x + t;
            } else {
                double y = h(nn - 1, nn - 1);
                double ww = h(nn, nn - 1) * h(nn - 1, nn);
                if (l == nn - 1) {
                    double p = 0.5 * (y - x);
                    double q = p * p + ww;
                    double z = std::sqrt(std::abs(q));
                    x += t;
                    if (q >= 0.0) {
                        z = p + sign_of(z, p);
                        w[nn - 1] = w[nn] = cd(x + z, 0.0);
                        if (z != 0.0) w[nn] = cd(x - ww / z, 0.0);
                    } else {
                        w[nn] = cd(x + p, -z);
                        w[nn - 1] = std::conj(w[nn]);
                    }
                    nn -= 2;
                } else {
                    if (its >= iter_cap_per_block || ++total_sweeps > total_cap) {
                        std::ostringstream os;
                        os << "hqr: block [" << l << "," << nn
                           << "] failed to deflate after " << its
                           << " sweeps; recent shifts:";
                        const std::size_t k0 = shifts.size() > 12 ? shifts.size() - 12 : 0;
                        for (std::size_t k = k0; k < shifts.size(); ++k) os << ' ' << shifts[k];
                        throw std::runtime_error(os.str());
                    }
                    if (its == 10 || its == 20 || its == 30) {
                        t += x;
                        for (int i = 0; i <= nn; ++i) h(i, i) -= x;
                        double s = std::abs(h(nn, nn - 1)) + std::abs(h(nn - 1, nn - 2));
                        y = x = 0.75 * s;
                        ww = -0.4375 * s * s;
                    }
                    ++its;
                    shifts.push_back(x + t);
                    if (shifts.size() > 64) shifts.erase(shifts.begin(), shifts.begin() + 32);
                    int m;
                    double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
                    for (m = nn - 2; m >= l; --m) {
                        z = h(m, m);
                        double rr = x - z;
                        double ss = y - z;
                        p = (rr * ss - ww) / h(m + 1, m) + h(m, m + 1);
                        q = h(m + 1, m + 1) - z - rr - ss;
                        r = h(m + 2, m + 1);
                        double sc = std::abs(p) + std::abs(q) + std::abs(r);
                        p /= sc; q /= sc; r /= sc;
                        if (m == l) break;
                        const double u = std::abs(h(m, m - 1)) * (std::abs(q) + std::abs(r));
                        const double v = std::abs(p) * (std::abs(h(m - 1, m - 1)) +
                                                        std::abs(z) + std::abs(h(m + 1, m + 1)));
                        if (u <= kEps * v) break;
                    }
                    for (int i = m; i < nn - 1; ++i) {
                        h(i + 2, i) = 0.0;
                        if (i != m) h(i + 2, i - 1) = 0.0;
                    }
                    for (int k = m; k < nn; ++k) {
                        if (k != m) {
                            p = h(k, k - 1);
                            q = h(k + 1, k - 1);
                            r = (k + 1 != nn) ? h(k + 2, k - 1) : 0.0;
                            x = std::abs(p) + std::abs(q) + std::abs(r);
                            if (x != 0.0) { p /= x; q /= x; r /= x; }
                        }
                        double s = sign_of(std::sqrt(p * p + q * q + r * r), p);
                        if (s == 0.0) continue;
                        if (k == m) {
                            if (l != m) h(k, k - 1) = -h(k, k - 1);
                        } else {
                            h(k, k - 1) = -s * x;
                        }
                        p += s;
                        x = p / s;
                        y = q / s;
                        z = r / s;
                        q /= p;
                        r /= p;
                        for (int j = k; j <= nn; ++j) {
                            p = h(k, j) + q * h(k + 1, j);
                            if (k + 1 != nn) {
                                p += r * h(k + 2, j);
                                h(k + 2, j) -= p * z;
                            }
                            h(k + 1, j) -= p * y;
                            h(k, j) -= p * x;
                        }
                        const int mmin = nn < k + 3 ? nn : k + 3;
                        for (int i = l; i <= mmin; ++i) {
                            p = x * h(i, k) + y * h(i, k + 1);
                            if (k + 1 != nn) {
                                p += z * h(i, k + 2);
                                h(i, k + 2) -= p * r;
                            }
                            h(i, k + 1) -= p * q;
                            h(i, k) -= p;
                        }
                    }
                }
            }
        } while (l < nn - 1);
    }
    if (report) {
        report->sweeps = total_sweeps;
        report->shift_history = std::move(shifts);
    }
    return w;
}

Eigen::VectorXcd hessenberg_inverse_iteration(const Eigen::MatrixXd& h,
                                              std::complex<double> lambda) {
    using cd = std::complex<double>;
    const int n = static_cast<int>(h.rows());
    const double hnorm = h.cwiseAbs().rowwise().sum().maxCoeff();
    const double tiny = kEps * std::max(hnorm, 1.0);

    auto solve = [&](Eigen::VectorXcd b) {
        Eigen::MatrixXcd u = h.cast<cd>();
        u.diagonal().array() -= lambda;
        for (int k = 0; k + 1 < n; ++k) {
            if (std::abs(u(k + 1, k)) > std::abs(u(k, k))) {
                u.row(k).segment(k, n - k).swap(u.row(k + 1).segment(k, n - k));
                std::swap(b[k], b[k + 1]);
            }
            if (u(k, k) == cd(0.0, 0.0)) u(k, k) = tiny;
            const cd f = u(k + 1, k) / u(k, k);
            u.row(k + 1).segment(k + 1, n - k - 1) -= f * u.row(k).segment(k + 1, n - k - 1);
            u(k + 1, k) = 0.0;
            b[k + 1] -= f * b[k];
        }
        if (u(n - 1, n - 1) == cd(0.0, 0.0)) u(n - 1, n - 1) = tiny;
        for (int i = n - 1; i >= 0; --i) {
            cd s = b[i];
            for (int j = i + 1; j < n; ++j) s -= u(i, j) * b[j];
            b[i] = s / u(i, i);
        }
        return b;
    };

    Eigen::VectorXcd v = Eigen::VectorXcd::Constant(n, cd(1.0, 0.0));
    v /= v.norm();
    for (int pass = 0; pass < 2; ++pass) {
        v = solve(std::move(v));
        const double nrm = v.norm();
        if (!(nrm > 0.0) || !std::isfinite(nrm)) {
            v = Eigen::VectorXcd::Constant(n, cd(1.0, 0.0)) / std::sqrt(double(n));
            break;
        }
        v /= nrm;
    }
    return v;
}

void tql2(Eigen::VectorXd& d, Eigen::VectorXd& ein, Eigen::MatrixXd* z) {
    const int n = static_cast<int>(d.size());
    if (n <= 1) return;
    if (ein.size() < n - 1) throw std::invalid_argument("tql2: off-diagonal size");
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);  // e[n-1] is scratch
    e.head(n - 1) = ein.head(n - 1);

    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= kEps * dd) break;
            }
            if (m != l) {
                if (iter++ == 50)
                    throw std::runtime_error("tql2: too many iterations");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + sign_of(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i = m - 1;
                for (; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    if (z) {
                        for (int k = 0; k < n; ++k) {
                            f = (*z)(k, i + 1);
                            (*z)(k, i + 1) = s * (*z)(k, i) + c * f;
                            (*z)(k, i) = c * (*z)(k, i) - s * f;
                        }
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }

    // sort ascending, carrying eigenvectors
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return d[a] < d[b]; });
    Eigen::VectorXd ds(n);
    for (int i = 0; i < n; ++i) ds[i] = d[idx[i]];
    d = ds;
    if (z) {
        Eigen::MatrixXd zs(n, n);
        for (int i = 0; i < n; ++i) zs.col(i) = z->col(idx[i]);
        *z = zs;
    }
}

}  // namespace bkc::eig
