#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace hbasket {

inline double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// erfc-based so the tails stay accurate down to ~1e-300.
inline double norm_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// Inverse standard normal CDF. Acklam's rational approximation followed by
// one Halley step against erfc, which brings the result to machine accuracy.
inline double inv_norm_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        return std::numeric_limits<double>::quiet_NaN();
    }
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double e = norm_cdf(x) - p;
    double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

// Compensated (Neumaier) accumulator. The basket moment sums alternate in
// sign for negative-weight baskets and plain summation loses digits there.
class NeumaierSum {
public:
    void add(double v) {
        double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    void add(const NeumaierSum& other) {
        add(other.sum_);
        comp_ += other.comp_;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// E[Z^n] for Z standard normal: 0 for odd n, (n-1)!! for even n.
// Exact in double up to n = 30 (29!! < 2^53).
inline double normal_moment(int n) {
    static const std::array<double, 31> table = [] {
        std::array<double, 31> t{};
        t[0] = 1.0;
        for (int k = 2; k <= 30; k += 2) t[k] = t[k - 2] * static_cast<double>(k - 1);
        return t;
    }();
    if (n < 0) return 0.0;
    if (n % 2 == 1) return 0.0;
    return n <= 30 ? table[static_cast<std::size_t>(n)] : std::numeric_limits<double>::quiet_NaN();
}

inline double factorial(int n) {
    static const std::array<double, 21> table = [] {
        std::array<double, 21> t{};
        t[0] = 1.0;
        for (int k = 1; k <= 20; ++k) t[k] = t[k - 1] * static_cast<double>(k);
        return t;
    }();
    return table[static_cast<std::size_t>(n)];
}

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return factorial(n) / (factorial(k) * factorial(n - k));
}

} // namespace hbasket
