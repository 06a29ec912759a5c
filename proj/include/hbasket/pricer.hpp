#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hbasket/hermite.hpp"
#include "hbasket/math.hpp"
#include "hbasket/model.hpp"
#include "hbasket/moments.hpp"

namespace hbasket {

enum class Method { M4GA, M4GB, M6GA, M6GB };

inline int method_order(Method m) { return (m == Method::M4GA || m == Method::M4GB) ? 4 : 6; }
inline Variant method_variant(Method m) {
    return (m == Method::M4GA || m == Method::M6GA) ? Variant::A : Variant::B;
}
inline std::string method_name(Method m) {
    switch (m) {
        case Method::M4GA: return "4GA";
        case Method::M4GB: return "4GB";
        case Method::M6GA: return "6GA";
        default: return "6GB";
    }
}
inline std::optional<Method> parse_method(const std::string& s) {
    if (s == "4GA") return Method::M4GA;
    if (s == "4GB") return Method::M4GB;
    if (s == "6GA") return Method::M6GA;
    if (s == "6GB") return Method::M6GB;
    return std::nullopt;
}

enum class QuoteStatus { Ok, MatchFailure };

struct PriceQuote {
    double price = std::numeric_limits<double>::quiet_NaN();
    double z_tilde = std::numeric_limits<double>::quiet_NaN();
    int h1 = 0; // 0 for variant A, 1 for variant B
    int h2 = 1; // sgn(B_0)
    Method method = Method::M4GA;
    HermiteExpansion expansion;
    MomentVector moments;
    std::vector<std::string> warnings;
    QuoteStatus status = QuoteStatus::Ok;

    bool ok() const { return status == QuoteStatus::Ok; }
};

struct ExerciseRoot {
    double z = std::numeric_limits<double>::infinity();
    int real_root_count = 0;
    bool multiple = false; // more than one usable crossing
};

// Beyond |z| = 9 the normal CDF factors underflow; such roots are collapsed
// to the all-in / all-out limits.
inline constexpr double kRootInfinityThreshold = 9.0;

// Solves J(z) + h1 = K / (B_0 e^{rT}). Returns the real solution of smallest
// absolute value; when several usable crossings exist the quote gets a
// warning and the smallest one is still used. With no crossing the root is
// +/- infinity, signed so that Phi(-h2 z) becomes 1 when the option is
// everywhere in the money under the expansion and 0 when it is everywhere
// out.
inline ExerciseRoot exercise_root(const HermiteExpansion& expansion, double b0, double strike,
                                  double rate, double maturity) {
    const double h1 = expansion.variant == Variant::A ? 0.0 : 1.0;
    const double h2 = b0 > 0.0 ? 1.0 : -1.0;
    const double fwd = b0 * std::exp(rate * maturity);
    Polynomial p = expansion.poly();

    ExerciseRoot out;
    Polynomial shifted = p;
    shifted.coeffs[0] += h1 - strike / fwd;
    shifted.trim();
    std::vector<double> roots = real_roots(shifted);
    out.real_root_count = static_cast<int>(roots.size());
    int usable = 0;
    for (double z : roots)
        if (std::abs(z) <= kRootInfinityThreshold) ++usable;
    out.multiple = usable > 1;

    if (!roots.empty()) {
        double best = roots.front();
        for (double z : roots)
            if (std::abs(z) < std::abs(best)) best = z;
        out.z = best;
        if (std::abs(best) <= kRootInfinityThreshold) return out;
    }
    // No usable crossing: surely in or out of the money under the expansion.
    const bool itm = fwd * (p(0.0) + h1) - strike >= 0.0;
    out.z = (itm ? -h2 : h2) * std::numeric_limits<double>::infinity();
    return out;
}

namespace detail {

// g(z) = phi(z) sum_{k=0}^{m-2} w_{k+1} H_k(z); with w = alpha this is the
// pricing g, with w = d alpha / du it is the sensitivity counterpart.
inline double g_function(const std::vector<double>& w, double z) {
    if (std::isinf(z)) return 0.0;
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < w.size(); ++k) s += w[k + 1] * hermite_poly(static_cast<int>(k))(z);
    return norm_pdf(z) * s;
}

inline double phi_big(double h2, double z) {
    if (std::isinf(z)) return z * h2 < 0.0 ? 1.0 : 0.0;
    return norm_cdf(-h2 * z);
}

} // namespace detail

// Closed-form price of the European basket call under the matched expansion:
//   c_0 = B_0 [ (alpha_0 + h1) Phi(-h2 z) + h2 g(z) ] - K e^{-rT} Phi(-h2 z)
inline PriceQuote price(const ValidatedBasket& vb, Method method) {
    PriceQuote q;
    q.method = method;
    const Variant variant = method_variant(method);
    const int m = method_order(method);
    q.h1 = variant == Variant::A ? 0 : 1;
    q.h2 = vb.b0() > 0.0 ? 1 : -1;

    q.moments = target_moments(vb, vb.maturity(), variant, m);
    q.expansion = match_moments(q.moments.target, m, variant);
    if (!q.expansion.converged) {
        q.status = QuoteStatus::MatchFailure;
        return q;
    }
    if (!q.expansion.monotone && !q.expansion.degenerate)
        q.warnings.push_back("non-monotone expansion");

    const double b0 = vb.b0();
    const double strike = vb.strike_shifted();
    const double disc = std::exp(-vb.rate() * vb.maturity());

    ExerciseRoot root = exercise_root(q.expansion, b0, strike, vb.rate(), vb.maturity());
    if (root.multiple) q.warnings.push_back("multiple exercise roots");
    double z = root.z;
    if (std::abs(z) > kRootInfinityThreshold && !std::isinf(z)) {
        const bool itm = b0 / disc * (q.expansion.poly()(0.0) + q.h1) - strike >= 0.0;
        z = (itm ? -q.h2 : q.h2) * std::numeric_limits<double>::infinity();
    }
    q.z_tilde = z;

    const double h1 = static_cast<double>(q.h1);
    const double h2 = static_cast<double>(q.h2);
    const double big_phi = detail::phi_big(h2, z);
    const double g = detail::g_function(q.expansion.alpha, z);
    q.price = b0 * ((q.expansion.alpha[0] + h1) * big_phi + h2 * g) - strike * disc * big_phi;
    return q;
}

// ---------------------------------------------------------------------------
// Hedging parameters

struct GreekParameter {
    enum class Kind { Spot, ShiftedBasket, Sigma, Rate, Maturity, Weight, JumpIntensity, Shift, JumpLogMean, JumpLogVol };
    Kind kind = Kind::ShiftedBasket;
    int index = 0; // asset index where applicable

    static GreekParameter b0() { return {Kind::ShiftedBasket, 0}; }
    static GreekParameter spot(int i) { return {Kind::Spot, i}; }
    static GreekParameter sigma(int i) { return {Kind::Sigma, i}; }
    static GreekParameter rate() { return {Kind::Rate, 0}; }
    static GreekParameter maturity() { return {Kind::Maturity, 0}; }
    static GreekParameter weight(int i) { return {Kind::Weight, i}; }
    static GreekParameter jump_intensity(int i) { return {Kind::JumpIntensity, i}; }
    static GreekParameter shift(int i) { return {Kind::Shift, i}; }
    static GreekParameter jump_log_mean(int i) { return {Kind::JumpLogMean, i}; }
    static GreekParameter jump_log_vol(int i) { return {Kind::JumpLogVol, i}; }

    std::string name() const {
        switch (kind) {
            case Kind::Spot: return "S0[" + std::to_string(index) + "]";
            case Kind::ShiftedBasket: return "B0";
            case Kind::Sigma: return "sigma[" + std::to_string(index) + "]";
            case Kind::Rate: return "r";
            case Kind::Maturity: return "T";
            case Kind::Weight: return "a[" + std::to_string(index) + "]";
            case Kind::JumpIntensity: return "lambda[" + std::to_string(index) + "]";
            case Kind::Shift: return "delta0[" + std::to_string(index) + "]";
            case Kind::JumpLogMean: return "eta[" + std::to_string(index) + "]";
            default: return "upsilon[" + std::to_string(index) + "]";
        }
    }
};

enum class GreekStatus { Ok, SingularJacobian };

struct GreekReport {
    GreekParameter parameter;
    double value = std::numeric_limits<double>::quiet_NaN();
    bool analytic = false; // analytic target-moment derivative (u = B_0 only)
    GreekStatus status = GreekStatus::Ok;
};

namespace detail {

inline ValidatedBasket rebuild_unchecked(const BasketSpec& spec) {
    return ValidatedBasket::unchecked(spec);
}

inline BasketSpec bumped_spec(const ValidatedBasket& vb, const GreekParameter& p, double h) {
    BasketSpec s = vb.spec();
    auto& asset = s.assets[static_cast<std::size_t>(p.index)];
    switch (p.kind) {
        case GreekParameter::Kind::Spot: asset.spot += h; break;
        case GreekParameter::Kind::Sigma: asset.vol += h; break;
        case GreekParameter::Kind::Rate: s.rate += h; break;
        case GreekParameter::Kind::Maturity: s.maturity += h; break;
        case GreekParameter::Kind::Weight: s.weights[static_cast<std::size_t>(p.index)] += h; break;
        case GreekParameter::Kind::JumpIntensity: asset.jump_intensity += h; break;
        case GreekParameter::Kind::Shift: asset.shift0 += h; break;
        case GreekParameter::Kind::JumpLogMean: asset.jump_log_mean += h; break;
        case GreekParameter::Kind::JumpLogVol: asset.jump_log_vol += h; break;
        case GreekParameter::Kind::ShiftedBasket:
            // bump through a_1: da_1 = h / S_1
            s.weights[0] += h / vb.asset(0).spot;
            break;
    }
    return s;
}

inline double bump_step(const ValidatedBasket& vb, const GreekParameter& p) {
    double base = 0.0, floor = 1e-2;
    switch (p.kind) {
        case GreekParameter::Kind::Spot: base = std::abs(vb.asset(p.index).spot); floor = 1.0; break;
        case GreekParameter::Kind::Sigma: base = vb.asset(p.index).vol; break;
        case GreekParameter::Kind::Rate: base = vb.rate(); break;
        case GreekParameter::Kind::Maturity: base = vb.maturity(); break;
        case GreekParameter::Kind::Weight: base = std::abs(vb.weight(p.index)); floor = 0.1; break;
        case GreekParameter::Kind::JumpIntensity: base = vb.asset(p.index).jump_intensity; floor = 0.1; break;
        case GreekParameter::Kind::Shift: base = std::abs(vb.asset(p.index).shift0); floor = 1.0; break;
        case GreekParameter::Kind::JumpLogMean: base = std::abs(vb.asset(p.index).jump_log_mean); floor = 0.1; break;
        case GreekParameter::Kind::JumpLogVol: base = vb.asset(p.index).jump_log_vol; floor = 0.1; break;
        case GreekParameter::Kind::ShiftedBasket: base = std::abs(vb.b0()); floor = 1.0; break;
    }
    return 1e-6 * std::max(base, floor);
}

struct AssemblyTerms {
    double d_disc = 0.0;    // d e^{-rT} / du
    double d_forward = 0.0; // d (B_0 e^{rT}) / du
    double d_strike = 0.0;  // d K / du
};

inline AssemblyTerms assembly_terms(const ValidatedBasket& vb, const GreekParameter& p) {
    AssemblyTerms t;
    const double r = vb.rate(), T = vb.maturity();
    const double ert = std::exp(r * T), disc = std::exp(-r * T);
    const double agg = vb.aggregate_shift();
    switch (p.kind) {
        case GreekParameter::Kind::Spot:
            t.d_forward = vb.weight(p.index) * ert;
            break;
        case GreekParameter::Kind::ShiftedBasket: {
            const auto& a1 = vb.asset(0);
            t.d_forward = ert * vb.effective_spot(0) / a1.spot;
            t.d_strike = -static_cast<double>(a1.shift_sign) * a1.shift0 * ert / a1.spot;
            break;
        }
        case GreekParameter::Kind::Rate:
            t.d_disc = -T * disc;
            t.d_forward = vb.b0() * T * ert;
            t.d_strike = -agg * T * ert;
            break;
        case GreekParameter::Kind::Maturity:
            t.d_disc = -r * disc;
            t.d_forward = vb.b0() * r * ert;
            t.d_strike = -agg * r * ert;
            break;
        case GreekParameter::Kind::Weight: {
            const auto& ai = vb.asset(p.index);
            t.d_forward = vb.effective_spot(p.index) * ert;
            t.d_strike = -static_cast<double>(ai.shift_sign) * ai.shift0 * ert;
            break;
        }
        case GreekParameter::Kind::Shift: {
            const auto& ai = vb.asset(p.index);
            double ab = vb.weight(p.index) * static_cast<double>(ai.shift_sign);
            t.d_forward = -ab * ert;
            t.d_strike = -ab * ert;
            break;
        }
        default:
            break; // sigma and jump parameters touch only the moments
    }
    return t;
}

} // namespace detail

// Hedging parameter d c_0 / du. The expansion-coefficient response solves the
// linear system  J_alpha * (d alpha / du) = d target / du  with the analytic
// moment Jacobian; the target derivative is analytic for u = B_0 and a
// central bump of the target moments for every other parameter. Assembly
// (written for the B_0 > 0 branch; h2 handles the mirrored one):
//   dc = c_0 e^{rT} d(e^{-rT}) + e^{-rT} d(B_0 e^{rT}) [h2 g + (a0+h1) Phi(-h2 z)]
//        + B_0 [h2 g' + (d a0) Phi(-h2 z)] - e^{-rT} dK Phi(-h2 z)
// where g' reuses g's form with d alpha / du in place of alpha. The printed
// variant of this formula shows phi(-h2 z) where Phi(-h2 z) appears above;
// differentiating the pricing integral gives the CDF, and the finite
// difference oracle in the test suite confirms that placement.
inline GreekReport greek(const ValidatedBasket& vb, const PriceQuote& quote, GreekParameter param) {
    if (!quote.ok()) throw InvalidParameter("greek requires a successfully priced quote");
    GreekReport rep;
    rep.parameter = param;
    rep.analytic = param.kind == GreekParameter::Kind::ShiftedBasket;

    const int m = quote.expansion.m;
    const Variant variant = quote.expansion.variant;
    const double h1 = static_cast<double>(quote.h1);
    const double h2 = static_cast<double>(quote.h2);
    const double disc = std::exp(-vb.rate() * vb.maturity());

    // d target / du
    std::vector<double> dt(static_cast<std::size_t>(m) + 1, 0.0);
    if (rep.analytic) {
        dt = dtargets_dB0(vb, vb.maturity(), variant, m);
    } else {
        const double h = detail::bump_step(vb, param);
        ValidatedBasket up = detail::rebuild_unchecked(detail::bumped_spec(vb, param, h));
        ValidatedBasket dn = detail::rebuild_unchecked(detail::bumped_spec(vb, param, -h));
        MomentVector mu = target_moments(up, up.maturity(), variant, m);
        MomentVector md = target_moments(dn, dn.maturity(), variant, m);
        for (int k = 1; k <= m; ++k)
            dt[static_cast<std::size_t>(k)] =
                (mu.target[static_cast<std::size_t>(k)] - md.target[static_cast<std::size_t>(k)]) / (2.0 * h);
    }

    // d alpha / du
    std::vector<double> dalpha(static_cast<std::size_t>(m), 0.0);
    dalpha[0] = dt[1]; // identically zero for both variants; kept for clarity
    if (!quote.expansion.degenerate) {
        Eigen::MatrixXd full = expansion_moment_jacobian(quote.expansion.alpha, m);
        Eigen::MatrixXd jac = full.bottomRows(m - 1);
        Eigen::VectorXd rhs(m - 1);
        for (int k = 2; k <= m; ++k) rhs(k - 2) = dt[static_cast<std::size_t>(k)];
        Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
        if (!lu.isInvertible()) {
            rep.status = GreekStatus::SingularJacobian;
            return rep;
        }
        Eigen::VectorXd sol = lu.solve(rhs);
        for (int i = 1; i < m; ++i) dalpha[static_cast<std::size_t>(i)] = sol(i - 1);
    }

    const double z = quote.z_tilde;
    const double big_phi = detail::phi_big(h2, z);
    const double g = detail::g_function(quote.expansion.alpha, z);
    const double gs = detail::g_function(dalpha, z);
    const auto terms = detail::assembly_terms(vb, param);

    rep.value = quote.price / disc * terms.d_disc +
                disc * terms.d_forward * (h2 * g + (quote.expansion.alpha[0] + h1) * big_phi) +
                vb.b0() * (h2 * gs + dalpha[0] * big_phi) - disc * terms.d_strike * big_phi;
    return rep;
}

inline GreekReport greek(const ValidatedBasket& vb, Method method, GreekParameter param) {
    PriceQuote q = price(vb, method);
    if (!q.ok()) throw InvalidParameter("greek requires a successfully priced quote");
    return greek(vb, q, param);
}

// Delta = d c_0 / d B_0; the analytic target-moment derivative case.
inline GreekReport delta(const ValidatedBasket& vb, const PriceQuote& quote) {
    return greek(vb, quote, GreekParameter::b0());
}
inline GreekReport delta(const ValidatedBasket& vb, Method method) {
    return greek(vb, method, GreekParameter::b0());
}

} // namespace hbasket
