#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "hbasket/math.hpp"
#include "hbasket/model.hpp"
#include "hbasket/moments.hpp"
#include "hbasket/polynomial.hpp"

namespace hbasket {

// Probabilists' Hermite polynomial H_k in monomial coefficients, via the
// recurrence H_k = z H_{k-1} - H'_{k-1}, H_0 = 1.
inline const Polynomial& hermite_poly(int k) {
    static const std::vector<Polynomial> table = [] {
        std::vector<Polynomial> t;
        t.emplace_back(std::vector<double>{1.0});
        for (int j = 1; j <= 12; ++j) {
            const Polynomial& prev = t.back();
            std::vector<double> z_prev(prev.coeffs.size() + 1, 0.0);
            for (std::size_t i = 0; i < prev.coeffs.size(); ++i) z_prev[i + 1] = prev.coeffs[i];
            Polynomial next(std::move(z_prev));
            Polynomial dp = prev.derivative();
            dp *= -1.0;
            next += dp;
            t.push_back(next);
        }
        return t;
    }();
    if (k < 0 || k > 12) throw InvalidParameter("hermite_poly order out of range");
    return table[static_cast<std::size_t>(k)];
}

// J(z) = sum_k alpha_k H_k(z) in the monomial basis.
inline Polynomial expansion_poly(const std::vector<double>& alpha) {
    Polynomial p;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        if (alpha[k] == 0.0) continue;
        Polynomial h = hermite_poly(static_cast<int>(k));
        h *= alpha[k];
        p += h;
    }
    return p;
}

// E[p(Z)] for Z standard normal.
inline double contract_normal(const Polynomial& p) {
    NeumaierSum s;
    for (std::size_t j = 0; j < p.coeffs.size(); ++j)
        if (j % 2 == 0 && p.coeffs[j] != 0.0) s.add(p.coeffs[j] * normal_moment(static_cast<int>(j)));
    return s.value();
}

// Exact E[J(Z)^k]: J is converted to the monomial basis, raised to the k-th
// power by coefficient convolution, and contracted against E[Z^n] = (n-1)!!.
inline double expansion_moment(const std::vector<double>& alpha, int k) {
    if (k < 0) throw InvalidParameter("expansion_moment order must be >= 0");
    Polynomial j = expansion_poly(alpha);
    if ((static_cast<int>(alpha.size()) - 1) * k > 30)
        throw InvalidParameter("expansion_moment: J^k degree exceeds the normal moment table");
    Polynomial p(std::vector<double>{1.0});
    for (int i = 0; i < k; ++i) p = p * j;
    return contract_normal(p);
}

// Entries d E[J^k] / d alpha_i for k = 1..m (rows) and i = 1..m-1 (columns);
// alpha_0 is pinned by the first moment and excluded. Row k uses
// d E[J^k]/d alpha_i = k E[J^{k-1} H_i].
inline Eigen::MatrixXd expansion_moment_jacobian(const std::vector<double>& alpha, int m) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m - 1);
    Polynomial j = expansion_poly(alpha);
    std::vector<Polynomial> powers(static_cast<std::size_t>(m));
    powers[0] = Polynomial(std::vector<double>{1.0}); // J^0
    for (int k = 1; k < m; ++k) powers[static_cast<std::size_t>(k)] = powers[static_cast<std::size_t>(k - 1)] * j;
    for (int k = 2; k <= m; ++k)
        for (int i = 1; i <= m - 1; ++i)
            jac(k - 1, i - 1) = static_cast<double>(k) *
                                contract_normal(powers[static_cast<std::size_t>(k - 1)] * hermite_poly(i));
    return jac;
}

// Matched Hermite expansion alpha_0..alpha_{m-1} with solver diagnostics.
struct HermiteExpansion {
    std::vector<double> alpha;
    Variant variant = Variant::A;
    int m = 4;
    double residual_norm = 0.0; // max relative moment-match error
    int iterations = 0;
    bool monotone = false; // J'(z) > 0 on [-8, 8]
    bool converged = false;
    bool degenerate = false; // constant expansion (zero implied variance)

    Polynomial poly() const { return expansion_poly(alpha); }
};

namespace detail {

inline double match_residual_norm(const std::vector<double>& ejk, const std::vector<double>& target, int m) {
    double rn = 0.0;
    for (int k = 2; k <= m; ++k) {
        double scale = std::max(1.0, std::abs(target[static_cast<std::size_t>(k)]));
        rn = std::max(rn, std::abs(ejk[static_cast<std::size_t>(k)] - target[static_cast<std::size_t>(k)]) / scale);
    }
    return rn;
}

inline std::vector<double> all_expansion_moments(const std::vector<double>& alpha, int m) {
    Polynomial j = expansion_poly(alpha);
    std::vector<double> out(static_cast<std::size_t>(m) + 1, 1.0);
    Polynomial p(std::vector<double>{1.0});
    for (int k = 1; k <= m; ++k) {
        p = p * j;
        out[static_cast<std::size_t>(k)] = contract_normal(p);
    }
    return out;
}

inline bool expansion_is_monotone(const std::vector<double>& alpha) {
    Polynomial dp = expansion_poly(alpha).derivative();
    if (dp.is_zero()) return false;
    if (!(dp(0.0) > 0.0)) return false;
    for (double rt : real_roots(dp))
        if (std::abs(rt) <= 8.0) return false;
    return true;
}

} // namespace detail

// Solves E[J^k] = target[k], k = 1..m, for the Hermite coefficients.
// alpha_0 = target[1] exactly; the remaining coefficients come from a damped
// Newton iteration with the analytic Jacobian, started from the Gaussian
// guess alpha_1 = sqrt(target[2] - target[1]^2), higher coefficients zero.
// Up to 40 random restarts perturb the start before the match is declared
// failed; failure is a first-class outcome (converged = false), not an
// exception. Among the sign-symmetric solution pair the branch with
// alpha_1 > 0 is returned.
inline HermiteExpansion match_moments(const std::vector<double>& target, int m,
                                      Variant variant = Variant::A) {
    if (m != 4 && m != 6) throw InvalidParameter("match_moments supports m = 4 or 6");
    if (static_cast<int>(target.size()) != m + 1)
        throw DimensionMismatch("match_moments expects target[0..m]");

    HermiteExpansion ex;
    ex.variant = variant;
    ex.m = m;
    ex.alpha.assign(static_cast<std::size_t>(m), 0.0);
    ex.alpha[0] = target[1];

    const double var0 = target[2] - target[1] * target[1];
    if (var0 <= 1e-14) {
        // Zero implied variance: constant expansion, pricing reduces to
        // discounted intrinsic value.
        ex.converged = true;
        ex.degenerate = true;
        return ex;
    }

    const double s = std::sqrt(var0);
    const int n_unknowns = m - 1;
    std::mt19937_64 restart_rng(0x484d415443481ULL);
    std::uniform_real_distribution<double> u(-0.5, 0.5);

    int total_iter = 0;
    double best_resnorm = std::numeric_limits<double>::infinity();
    std::vector<double> best_x;

    for (int attempt = 0; attempt <= 40; ++attempt) {
        std::vector<double> x(static_cast<std::size_t>(n_unknowns), 0.0);
        x[0] = s;
        if (attempt > 0)
            for (auto& v : x) v += s * u(restart_rng);

        auto alpha_of = [&](const std::vector<double>& xs) {
            std::vector<double> a(static_cast<std::size_t>(m));
            a[0] = target[1];
            for (int i = 0; i < n_unknowns; ++i) a[static_cast<std::size_t>(i) + 1] = xs[static_cast<std::size_t>(i)];
            return a;
        };

        double resnorm = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 60; ++it) {
            ++total_iter;
            auto alpha = alpha_of(x);
            auto ejk = detail::all_expansion_moments(alpha, m);
            resnorm = detail::match_residual_norm(ejk, target, m);
            if (resnorm <= 1e-12) break;

            Eigen::VectorXd r(n_unknowns);
            for (int k = 2; k <= m; ++k)
                r(k - 2) = ejk[static_cast<std::size_t>(k)] - target[static_cast<std::size_t>(k)];
            Eigen::MatrixXd full = expansion_moment_jacobian(alpha, m);
            Eigen::MatrixXd jac = full.bottomRows(m - 1);
            Eigen::VectorXd dx = jac.partialPivLu().solve(-r);
            if (!dx.allFinite()) break;

            double n0 = r.norm();
            double lam = 1.0;
            bool improved = false;
            for (int ls = 0; ls < 30; ++ls) {
                std::vector<double> xt = x;
                for (int i = 0; i < n_unknowns; ++i) xt[static_cast<std::size_t>(i)] += lam * dx(i);
                auto et = detail::all_expansion_moments(alpha_of(xt), m);
                double nt = 0.0;
                for (int k = 2; k <= m; ++k) {
                    double d = et[static_cast<std::size_t>(k)] - target[static_cast<std::size_t>(k)];
                    nt += d * d;
                }
                if (std::sqrt(nt) < n0) {
                    x = xt;
                    improved = true;
                    break;
                }
                lam *= 0.5;
            }
            if (!improved) break;
        }

        if (resnorm < best_resnorm) {
            best_resnorm = resnorm;
            best_x = x;
        }
        if (resnorm <= 1e-10) break; // accepted: lowest restart index among successes
    }

    ex.iterations = total_iter;
    ex.residual_norm = best_resnorm;
    for (int i = 0; i < n_unknowns; ++i) ex.alpha[static_cast<std::size_t>(i) + 1] = best_x[static_cast<std::size_t>(i)];
    ex.converged = best_resnorm <= 1e-10;
    if (ex.converged && ex.alpha[1] < 0.0)
        for (std::size_t j = 1; j < ex.alpha.size(); ++j)
            if (j % 2 == 1) ex.alpha[j] = -ex.alpha[j];
    ex.monotone = detail::expansion_is_monotone(ex.alpha);
    return ex;
}

} // namespace hbasket
