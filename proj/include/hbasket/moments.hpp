#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hbasket/math.hpp"
#include "hbasket/model.hpp"

namespace hbasket {

// Which normalized basket return the expansion is fitted to:
//   A: B_T / (B_0 e^{rT})        (first moment 1)
//   B: B_T / (B_0 e^{rT}) - 1    (first moment 0)
enum class Variant { A, B };

inline char variant_tag(Variant v) { return v == Variant::A ? 'A' : 'B'; }

namespace detail {

// Visits every non-decreasing multi-index of length k over {0..n-1} once.
// There are exactly C(n+k-1, k) of them; the moment summand is symmetric
// under index permutation so each multiset is weighted by its multinomial
// multiplicity instead of walking all n^k ordered tuples.
inline void for_each_multiset(int n, int k, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> idx(static_cast<std::size_t>(std::max(k, 0)), 0);
    if (k <= 0) {
        fn(idx);
        return;
    }
    for (;;) {
        fn(idx);
        int j = k - 1;
        while (j >= 0 && idx[static_cast<std::size_t>(j)] == n - 1) --j;
        if (j < 0) return;
        int v = idx[static_cast<std::size_t>(j)] + 1;
        for (int l = j; l < k; ++l) idx[static_cast<std::size_t>(l)] = v;
    }
}

inline double multiset_multiplicity(const std::vector<int>& idx) {
    double mult = factorial(static_cast<int>(idx.size()));
    int run = 1;
    for (std::size_t j = 1; j <= idx.size(); ++j) {
        if (j < idx.size() && idx[j] == idx[j - 1]) {
            ++run;
        } else {
            mult /= factorial(run);
            run = 1;
        }
    }
    return mult;
}

// log mgf of the vector sigma_i V_t^(i) + sum log(Y+1) evaluated at the
// sparse integer argument {(index, count)}:
//   t u'Su/2 + t sum_i lambda_i (exp(eta_i u_i + ups_i^2 u_i^2 / 2) - 1),
// S_ij = sigma_i sigma_j rho_ij.
inline double log_mgf_sparse(const ValidatedBasket& vb,
                             const std::vector<std::pair<int, int>>& arg, double t) {
    double quad = 0.0;
    for (const auto& [i, ci] : arg) {
        double si = vb.asset(i).vol * static_cast<double>(ci);
        for (const auto& [j, cj] : arg)
            quad += si * vb.asset(j).vol * static_cast<double>(cj) * vb.correlation()(i, j);
    }
    double jump = 0.0;
    for (const auto& [i, ci] : arg) {
        const auto& a = vb.asset(i);
        if (a.jump_intensity > 0.0) {
            double u = static_cast<double>(ci);
            jump += a.jump_intensity *
                    std::expm1(a.jump_log_mean * u + 0.5 * a.jump_log_vol * a.jump_log_vol * u * u);
        }
    }
    return t * (0.5 * quad + jump);
}

inline std::vector<std::pair<int, int>> to_sparse(const std::vector<int>& idx) {
    std::vector<std::pair<int, int>> arg;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        if (!arg.empty() && arg.back().first == idx[j])
            ++arg.back().second;
        else
            arg.emplace_back(idx[j], 1);
    }
    return arg;
}

inline void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw OverflowError(std::string(what) + " exceeded floating range");
}

} // namespace detail

// mgf of the log-return vector at a dense argument u.
inline double joint_mgf(const ValidatedBasket& vb, const Eigen::VectorXd& u, double t) {
    if (u.size() != vb.size()) throw DimensionMismatch("mgf argument dimension mismatch");
    double quad = 0.0, jump = 0.0;
    for (int i = 0; i < vb.size(); ++i) {
        double si = vb.asset(i).vol * u(i);
        for (int j = 0; j < vb.size(); ++j) quad += si * vb.asset(j).vol * u(j) * vb.correlation()(i, j);
        const auto& a = vb.asset(i);
        if (a.jump_intensity > 0.0)
            jump += a.jump_intensity *
                    std::expm1(a.jump_log_mean * u(i) + 0.5 * a.jump_log_vol * a.jump_log_vol * u(i) * u(i));
    }
    double v = std::exp(t * (0.5 * quad + jump));
    detail::check_finite(v, "joint_mgf");
    return v;
}

// mu_k = E[B_t^k], the k-th raw moment of the shifted basket.
inline double basket_moment(const ValidatedBasket& vb, int k, double t) {
    if (k < 1 || k > 12) throw InvalidParameter("basket_moment order out of range");
    const int n = vb.size();
    std::vector<double> coef(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        coef[static_cast<std::size_t>(i)] =
            vb.weight(i) * vb.effective_spot(i) * std::exp((vb.rate() + vb.omega(i)) * t);
    NeumaierSum sum;
    detail::for_each_multiset(n, k, [&](const std::vector<int>& idx) {
        auto arg = detail::to_sparse(idx);
        double term = detail::multiset_multiplicity(idx) * std::exp(detail::log_mgf_sparse(vb, arg, t));
        for (int i : idx) term *= coef[static_cast<std::size_t>(i)];
        detail::check_finite(term, "basket_moment");
        sum.add(term);
    });
    double v = sum.value();
    detail::check_finite(v, "basket_moment");
    return v;
}

// d mu_k / d a_1: k-fold symmetry collapses the derivative to a (k-1)-fold
// sum with the differentiated slot pinned to asset 1 and its weight factor
// removed:
//   k (S_0^(1) - b_1 d_1) e^{(r+w_1)t} * sum over (k-1)-multisets
//     prod_j a_ij (S_0 - b d)_ij e^{(r+w_ij)t} mgf(e_1 + e_i1 + ... + e_ik-1)
inline double dmoment_da1(const ValidatedBasket& vb, int k, double t) {
    if (k < 1 || k > 12) throw InvalidParameter("dmoment_da1 order out of range");
    const int n = vb.size();
    std::vector<double> coef(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        coef[static_cast<std::size_t>(i)] =
            vb.weight(i) * vb.effective_spot(i) * std::exp((vb.rate() + vb.omega(i)) * t);
    const double c1 = vb.effective_spot(0) * std::exp((vb.rate() + vb.omega(0)) * t);
    NeumaierSum sum;
    detail::for_each_multiset(n, k - 1, [&](const std::vector<int>& idx) {
        auto arg = detail::to_sparse(idx);
        // add the differentiated slot's e_1
        if (!arg.empty() && arg.front().first == 0)
            ++arg.front().second;
        else
            arg.insert(arg.begin(), {0, 1});
        double term = detail::multiset_multiplicity(idx) * std::exp(detail::log_mgf_sparse(vb, arg, t));
        for (int i : idx) term *= coef[static_cast<std::size_t>(i)];
        detail::check_finite(term, "dmoment_da1");
        sum.add(term);
    });
    double v = static_cast<double>(k) * c1 * sum.value();
    detail::check_finite(v, "dmoment_da1");
    return v;
}

// Raw moments mu_1..mu_m of B_T plus the normalized target moments of the
// chosen variant. raw_moment(0) == target_moment(0) == 1 by convention.
struct MomentVector {
    std::vector<double> raw;    // raw[k] = mu_k, k = 0..m
    std::vector<double> target; // target[k] = E[X^k], k = 0..m
    Variant variant = Variant::A;
    int order = 4;

    double raw_moment(int k) const { return raw[static_cast<std::size_t>(k)]; }
    double target_moment(int k) const { return target[static_cast<std::size_t>(k)]; }
};

inline MomentVector target_moments(const ValidatedBasket& vb, double t, Variant variant, int m) {
    if (m < 1 || m > 8) throw InvalidParameter("moment order out of range");
    MomentVector mv;
    mv.variant = variant;
    mv.order = m;
    mv.raw.assign(static_cast<std::size_t>(m) + 1, 1.0);
    mv.target.assign(static_cast<std::size_t>(m) + 1, 1.0);
    for (int k = 1; k <= m; ++k) mv.raw[static_cast<std::size_t>(k)] = basket_moment(vb, k, t);
    const double fwd = vb.b0() * std::exp(vb.rate() * t);
    for (int k = 1; k <= m; ++k) {
        if (variant == Variant::A) {
            mv.target[static_cast<std::size_t>(k)] =
                mv.raw[static_cast<std::size_t>(k)] / std::pow(fwd, k);
        } else {
            NeumaierSum s;
            for (int i = 0; i <= k; ++i) {
                double sign = (i % 2 == 0) ? 1.0 : -1.0;
                s.add(binomial(k, i) * sign * mv.raw[static_cast<std::size_t>(k - i)] /
                      std::pow(fwd, k - i));
            }
            mv.target[static_cast<std::size_t>(k)] = s.value();
        }
        detail::check_finite(mv.target[static_cast<std::size_t>(k)], "target_moments");
    }
    return mv;
}

// d(target_k)/d(B_0) for k = 1..m, through the a_1 chain rule
// d/dB_0 = (1/S_1) d/da_1, with the quotient rule against the (B_0 e^{rt})^k
// normalizer. Entry [0] is 0 (target_0 == 1).
inline std::vector<double> dtargets_dB0(const ValidatedBasket& vb, double t, Variant variant, int m) {
    if (vb.asset(0).spot == 0.0) throw InvalidParameter("dtargets_dB0 requires asset 1 spot != 0");
    const double fwd = vb.b0() * std::exp(vb.rate() * t);
    const double p1 = vb.effective_spot(0); // dB_0/da_1
    std::vector<double> mu(static_cast<std::size_t>(m) + 1, 1.0);
    std::vector<double> dmu(static_cast<std::size_t>(m) + 1, 0.0);
    for (int k = 1; k <= m; ++k) {
        mu[static_cast<std::size_t>(k)] = basket_moment(vb, k, t);
        dmu[static_cast<std::size_t>(k)] = dmoment_da1(vb, k, t);
    }
    // dN_k/da_1 where N_k = mu_k / fwd^k
    std::vector<double> dn(static_cast<std::size_t>(m) + 1, 0.0);
    for (int k = 1; k <= m; ++k)
        dn[static_cast<std::size_t>(k)] =
            dmu[static_cast<std::size_t>(k)] / std::pow(fwd, k) -
            static_cast<double>(k) * mu[static_cast<std::size_t>(k)] * std::exp(vb.rate() * t) * p1 /
                std::pow(fwd, k + 1);
    std::vector<double> out(static_cast<std::size_t>(m) + 1, 0.0);
    for (int k = 1; k <= m; ++k) {
        if (variant == Variant::A) {
            out[static_cast<std::size_t>(k)] = dn[static_cast<std::size_t>(k)] / vb.asset(0).spot;
        } else {
            NeumaierSum s;
            for (int i = 0; i < k; ++i) { // i = k term is the constant 1
                double sign = (i % 2 == 0) ? 1.0 : -1.0;
                s.add(binomial(k, i) * sign * dn[static_cast<std::size_t>(k - i)]);
            }
            out[static_cast<std::size_t>(k)] = s.value() / vb.asset(0).spot;
        }
    }
    return out;
}

} // namespace hbasket
