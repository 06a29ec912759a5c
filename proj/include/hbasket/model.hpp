#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "hbasket/math.hpp"

namespace hbasket {

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionMismatch : ValidationError {
    using ValidationError::ValidationError;
};
struct InvalidCorrelation : ValidationError {
    using ValidationError::ValidationError;
};
struct ZeroShiftedBasket : ValidationError {
    using ValidationError::ValidationError;
};
struct InvalidParameter : ValidationError {
    using ValidationError::ValidationError;
};

// Thrown when a moment or MGF evaluation leaves the floating range. A silent
// infinity would poison the matching solver, so computation aborts instead.
struct OverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One asset of the shifted jump-diffusion market:
//   S_t = (S_0 - b d_0) exp((r - beta*lambda - sigma^2/2) t + sigma V_t) prod(Y+1) + b d_0 e^{rt}
// with log(Y+1) ~ N(eta, upsilon^2) i.i.d., N_t Poisson(lambda t), b in {-1,+1}.
struct AssetSpec {
    double spot = 0.0;
    double vol = 0.0;            // sigma, per sqrt(year)
    double shift0 = 0.0;         // d_0, currency, any sign
    int shift_sign = 1;          // b
    double jump_intensity = 0.0; // lambda, per year
    double jump_log_mean = 0.0;  // eta
    double jump_log_vol = 0.0;   // upsilon

    bool operator==(const AssetSpec&) const = default;
};

struct BasketSpec {
    std::vector<AssetSpec> assets;
    std::vector<double> weights;
    Eigen::MatrixXd correlation;
    double rate = 0.0;     // continuously compounded, per year
    double maturity = 1.0; // years
    double strike_raw = 0.0;

    int size() const { return static_cast<int>(assets.size()); }
};

// Risk-neutral expected jump size E[Y] = exp(eta + upsilon^2/2) - 1.
inline double jump_mean_beta(double eta, double upsilon) {
    return std::expm1(eta + 0.5 * upsilon * upsilon);
}

// Compensator drift per asset: omega = -beta*lambda - sigma^2/2.
struct DriftTerms {
    std::vector<double> beta_tilde;
    std::vector<double> omega;
};

// BasketSpec whose invariants have been checked, with the correlation matrix
// cleaned (PSD-clipped and re-normalized when needed) and the elementary
// quantities every other module consumes precomputed.
class ValidatedBasket {
public:
    const BasketSpec& spec() const { return spec_; }
    const DriftTerms& drift() const { return drift_; }
    int size() const { return spec_.size(); }

    const AssetSpec& asset(int i) const { return spec_.assets[static_cast<std::size_t>(i)]; }
    double weight(int i) const { return spec_.weights[static_cast<std::size_t>(i)]; }
    double rate() const { return spec_.rate; }
    double maturity() const { return spec_.maturity; }
    double strike_raw() const { return spec_.strike_raw; }
    const Eigen::MatrixXd& correlation() const { return spec_.correlation; }
    double omega(int i) const { return drift_.omega[static_cast<std::size_t>(i)]; }
    double beta_tilde(int i) const { return drift_.beta_tilde[static_cast<std::size_t>(i)]; }

    // S_0^(i) - b_i d_0^(i)
    double effective_spot(int i) const {
        const auto& a = asset(i);
        return a.spot - static_cast<double>(a.shift_sign) * a.shift0;
    }

    // B_0 = sum_i a_i (S_0^(i) - b_i d_0^(i))
    double b0() const { return b0_; }
    // B*_0 = sum_i a_i S_0^(i)
    double b0_raw() const { return b0_raw_; }
    // Aggregate time-0 shift D = sum_i a_i b_i d_0^(i), so K(t) = K* - D e^{rt}.
    double aggregate_shift() const { return agg_shift_; }
    // Shifted strike at the option maturity.
    double strike_shifted() const { return strike_shifted_; }

    friend ValidatedBasket validate_basket(const BasketSpec& spec);

    // Rebuilds derived quantities without invariant checks. Sensitivity bumps
    // need parameters slightly outside the validated domain (e.g. a negative
    // jump intensity around a zero base point) where the formulas still
    // evaluate.
    static ValidatedBasket unchecked(const BasketSpec& spec) {
        ValidatedBasket out;
        out.spec_ = spec;
        const int n = spec.size();
        out.drift_.beta_tilde.resize(static_cast<std::size_t>(n));
        out.drift_.omega.resize(static_cast<std::size_t>(n));
        NeumaierSum b0, b0_raw, agg;
        for (int i = 0; i < n; ++i) {
            const auto& a = spec.assets[static_cast<std::size_t>(i)];
            double beta = jump_mean_beta(a.jump_log_mean, a.jump_log_vol);
            out.drift_.beta_tilde[static_cast<std::size_t>(i)] = beta;
            out.drift_.omega[static_cast<std::size_t>(i)] =
                -beta * a.jump_intensity - 0.5 * a.vol * a.vol;
            double w = spec.weights[static_cast<std::size_t>(i)];
            b0.add(w * out.effective_spot(i));
            b0_raw.add(w * a.spot);
            agg.add(w * static_cast<double>(a.shift_sign) * a.shift0);
        }
        out.b0_ = b0.value();
        out.b0_raw_ = b0_raw.value();
        out.agg_shift_ = agg.value();
        out.strike_shifted_ = spec.strike_raw - out.agg_shift_ * std::exp(spec.rate * spec.maturity);
        return out;
    }

    bool operator==(const ValidatedBasket& o) const {
        return spec_.assets == o.spec_.assets && spec_.weights == o.spec_.weights &&
               spec_.correlation == o.spec_.correlation && spec_.rate == o.spec_.rate &&
               spec_.maturity == o.spec_.maturity && spec_.strike_raw == o.spec_.strike_raw;
    }

private:
    BasketSpec spec_;
    DriftTerms drift_;
    double b0_ = 0.0;
    double b0_raw_ = 0.0;
    double agg_shift_ = 0.0;
    double strike_shifted_ = 0.0;
};

// Shifted basket value and shifted strike at time t:
//   B_0, K(t) = K* - sum_i a_i b_i d_0^(i) e^{rt}
inline std::pair<double, double> shifted_basket_and_strike(const ValidatedBasket& vb, double t) {
    return {vb.b0(), vb.strike_raw() - vb.aggregate_shift() * std::exp(vb.rate() * t)};
}

inline ValidatedBasket validate_basket(const BasketSpec& spec) {
    const int n = spec.size();
    if (n < 1) throw DimensionMismatch("basket needs at least one asset");
    if (static_cast<int>(spec.weights.size()) != n)
        throw DimensionMismatch("weights length " + std::to_string(spec.weights.size()) +
                                " != asset count " + std::to_string(n));
    if (spec.correlation.rows() != n || spec.correlation.cols() != n)
        throw DimensionMismatch("correlation must be " + std::to_string(n) + "x" + std::to_string(n));
    if (!(spec.rate >= 0.0)) throw InvalidParameter("rate must be >= 0");
    if (!(spec.maturity > 0.0)) throw InvalidParameter("maturity must be > 0");
    if (!std::isfinite(spec.strike_raw)) throw InvalidParameter("strike must be finite");

    for (int i = 0; i < n; ++i) {
        const auto& a = spec.assets[static_cast<std::size_t>(i)];
        if (!(a.vol >= 0.0)) throw InvalidParameter("vol[" + std::to_string(i) + "] must be >= 0");
        if (!(a.jump_intensity >= 0.0))
            throw InvalidParameter("jump_intensity[" + std::to_string(i) + "] must be >= 0");
        if (!(a.jump_log_vol >= 0.0))
            throw InvalidParameter("jump_log_vol[" + std::to_string(i) + "] must be >= 0");
        if (a.shift_sign != 1 && a.shift_sign != -1)
            throw InvalidParameter("shift_sign[" + std::to_string(i) + "] must be +1 or -1");
        double eff = a.spot - static_cast<double>(a.shift_sign) * a.shift0;
        if (!std::isfinite(eff) || !std::isfinite(a.jump_log_mean))
            throw InvalidParameter("asset " + std::to_string(i) + " has non-finite parameters");
        if (!std::isfinite(spec.weights[static_cast<std::size_t>(i)]))
            throw InvalidParameter("weight[" + std::to_string(i) + "] must be finite");
    }

    ValidatedBasket out;
    out.spec_ = spec;

    // Correlation: symmetric, unit diagonal, numerically PSD. Smallest
    // eigenvalue down to -1e-10 is accepted (scenario generators produce
    // borderline matrices); negative eigenvalues are then clipped to zero and
    // the matrix re-normalized to unit diagonal. An already-clean matrix is
    // passed through untouched, which makes validation idempotent.
    Eigen::MatrixXd corr = spec.correlation;
    for (int i = 0; i < n; ++i) {
        if (std::abs(corr(i, i) - 1.0) > 1e-12)
            throw InvalidCorrelation("correlation diagonal must be 1");
        for (int j = 0; j < i; ++j) {
            if (std::abs(corr(i, j) - corr(j, i)) > 1e-12)
                throw InvalidCorrelation("correlation must be symmetric");
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr);
    double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < -1e-10)
        throw InvalidCorrelation("correlation not PSD: min eigenvalue " + std::to_string(min_eig));
    if (min_eig < -1e-13) {
        Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
        Eigen::MatrixXd rebuilt =
            es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
        Eigen::VectorXd d = rebuilt.diagonal().cwiseSqrt();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) rebuilt(i, j) /= d(i) * d(j);
        rebuilt = 0.5 * (rebuilt + rebuilt.transpose()).eval();
        rebuilt.diagonal().setOnes();
        out.spec_.correlation = rebuilt;
    }

    out.drift_.beta_tilde.resize(static_cast<std::size_t>(n));
    out.drift_.omega.resize(static_cast<std::size_t>(n));
    NeumaierSum b0, b0_raw, agg;
    for (int i = 0; i < n; ++i) {
        const auto& a = spec.assets[static_cast<std::size_t>(i)];
        double beta = jump_mean_beta(a.jump_log_mean, a.jump_log_vol);
        out.drift_.beta_tilde[static_cast<std::size_t>(i)] = beta;
        out.drift_.omega[static_cast<std::size_t>(i)] =
            -beta * a.jump_intensity - 0.5 * a.vol * a.vol;
        double w = spec.weights[static_cast<std::size_t>(i)];
        b0.add(w * out.effective_spot(i));
        b0_raw.add(w * a.spot);
        agg.add(w * static_cast<double>(a.shift_sign) * a.shift0);
    }
    out.b0_ = b0.value();
    out.b0_raw_ = b0_raw.value();
    out.agg_shift_ = agg.value();
    out.strike_shifted_ = spec.strike_raw - out.agg_shift_ * std::exp(spec.rate * spec.maturity);

    double scale = 0.0;
    for (int i = 0; i < n; ++i)
        scale += std::abs(out.weight(i)) * (std::abs(out.asset(i).spot) + std::abs(out.asset(i).shift0));
    if (std::abs(out.b0_) <= 1e-12 * std::max(1.0, scale))
        throw ZeroShiftedBasket("shifted basket B_0 is zero");

    return out;
}

inline ValidatedBasket validate_basket(const ValidatedBasket& vb) { return validate_basket(vb.spec()); }

} // namespace hbasket
