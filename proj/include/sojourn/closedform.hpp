#pragma once

// Ordinary walk (L = R = 1): q = P{U=-1}, r = P{U=0}, p = P{U=1}, start 0,
// E0 = {0}. Closed forms for K_0 and K~_0, their series expansions, and the
// comparison of the displayed K~_0 forms against the structural solution.

#include "chain.hpp"
#include "erratum.hpp"
#include "errors.hpp"
#include "genfun.hpp"
#include "lrwalk.hpp"
#include "scalar.hpp"
#include "series.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sojourn {

template <typename S>
struct OrdinaryWalk {
    S p, q, r;

    OrdinaryWalk(S p_, S q_, S r_) : p(std::move(p_)), q(std::move(q_)), r(std::move(r_))
    {
        if (p < 0 || q < 0 || r < 0) throw std::invalid_argument("negative step probability");
        S total = p + q + r;
        if (!sums_to_one(total)) throw std::invalid_argument("p + q + r must equal 1");
    }

    static OrdinaryWalk from_jump(const JumpDistribution<S>& j)
    {
        if (j.L() != 1 || j.R() != 1) throw std::invalid_argument("ordinary walk needs L = R = 1");
        return OrdinaryWalk(j.pi(1), j.pi(-1), j.pi(0));
    }
    JumpDistribution<S> jump() const { return JumpDistribution<S>(1, 1, {q, r, p}); }

    OrdinaryWalk<double> numeric() const
    {
        return OrdinaryWalk<double>(scalar_traits<S>::to_double(p), scalar_traits<S>::to_double(q),
                                    scalar_traits<S>::to_double(r));
    }
    std::string describe() const
    {
        std::ostringstream out;
        out << "p=" << scalar_traits<S>::format(p) << " q=" << scalar_traits<S>::format(q)
            << " r=" << scalar_traits<S>::format(r);
        return out.str();
    }
};

enum class OrdinaryTarget { all, origin };

inline TargetSet to_target(OrdinaryTarget t)
{
    return t == OrdinaryTarget::all ? TargetSet::all() : TargetSet::finite({0});
}

inline const char* to_string(OrdinaryTarget t) { return t == OrdinaryTarget::all ? "Z" : "{0}"; }

// ---------------------------------------------------------------------------
// Numeric pieces

/// Delta(u) = (1-ru)^2 - 4pq u^2.
inline double delta(const OrdinaryWalk<double>& w, double u)
{
    return (1 - w.r * u) * (1 - w.r * u) - 4 * w.p * w.q * u * u;
}

inline double sqrt_delta(const OrdinaryWalk<double>& w, double u)
{
    const double d = delta(w, u);
    if (!(d > 0)) throw numerical_error("Delta(u) is not positive");
    return std::sqrt(d);
}

/// Root inside the unit disc, z(x) = (1 - rx - sqrt(Delta)) / (2px).
inline double z_root(const OrdinaryWalk<double>& w, double x)
{
    return (1 - w.r * x - sqrt_delta(w, x)) / (2 * w.p * x);
}

inline double zeta_root(const OrdinaryWalk<double>& w, double x)
{
    return (1 - w.r * x + sqrt_delta(w, x)) / (2 * w.p * x);
}

inline double k0_closed(const OrdinaryWalk<double>& w, OrdinaryTarget t, double x, double y)
{
    const double sx = sqrt_delta(w, x), sy = sqrt_delta(w, y);
    const double den = y - x + y * sx + x * sy;
    if (std::fabs(den) < 1e-300) throw numerical_error("K0 denominator vanishes");
    if (t == OrdinaryTarget::origin) return 2 * y / den;
    return y * ((w.p - w.q) * (x - y) + (1 - y) * sx + (1 - x) * sy) / ((1 - x) * (1 - y) * den);
}

/// K_0(x,0) in simplified form, F = Z.
inline double k0_at_y0(const OrdinaryWalk<double>& w, double x)
{
    return ((2 * w.p + w.r) * x - 1 + sqrt_delta(w, x)) / (2 * w.p * x * (1 - x));
}

/// K_0(x,0) before simplification, F = Z.
inline double k0_at_y0_unsimplified(const OrdinaryWalk<double>& w, double x)
{
    const double s = sqrt_delta(w, x);
    return (1 - (2 * w.q + w.r) * x + s) / ((1 - x) * (1 - w.r * x + s));
}

/// K_0(0,y), F = Z.
inline double k0_at_x0(const OrdinaryWalk<double>& w, double y)
{
    return (1 - (2 * w.p + w.r) * y + sqrt_delta(w, y)) / (2 * (1 - y));
}

struct FactorizationReport {
    int points = 0;
    double max_rel_dev = 0;
    double worst_x = 0, worst_y = 0;
};

inline FactorizationReport k0_factorization_check(const OrdinaryWalk<double>& w, const std::vector<double>& grid)
{
    FactorizationReport rep;
    for (double x : grid) {
        for (double y : grid) {
            const double lhs = k0_closed(w, OrdinaryTarget::all, x, y);
            const double rhs = k0_at_y0(w, x) * k0_at_x0(w, y);
            const double dev = std::fabs(lhs - rhs) / std::fabs(lhs);
            ++rep.points;
            if (dev >= rep.max_rel_dev) {
                rep.max_rel_dev = dev;
                rep.worst_x = x;
                rep.worst_y = y;
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Series expansions

namespace detail {

template <typename S>
Series1<S> sqrt_delta_series(const OrdinaryWalk<S>& w, int order)
{
    Series1<S> d(order);
    d[0] = scalar_traits<S>::one();
    if (order >= 1) d[1] = -2 * w.r;
    if (order >= 2) d[2] = w.r * w.r - 4 * w.p * w.q;
    return d.sqrt();
}

template <typename S>
Series1<S> geometric(int order)
{
    return Series1<S>(order, std::vector<S>(static_cast<std::size_t>(order) + 1, scalar_traits<S>::one()));
}

}  // namespace detail

/// K_0 as a bivariate series; after dividing the denominator by y it is a unit.
template <typename S>
Series2<S> k0_closed_series(const OrdinaryWalk<S>& w, OrdinaryTarget t, int order)
{
    using B = Series2<S>;
    const Series1<S> sd = detail::sqrt_delta_series(w, order + 1);
    const Series1<S> sdn = sd.truncated(order);
    const Series1<S> one1 = Series1<S>::constant(order + 1, scalar_traits<S>::one());
    const Series1<S> tail = (sd - one1).divide_by_x();  // (sqrt(Delta(y)) - 1) / y
    const B one = B::constant(order, scalar_traits<S>::one());
    const B x = B::var_x(order), y = B::var_y(order);
    const B den = one + B::lift_x(sdn) + x * B::lift_y(tail);
    if (t == OrdinaryTarget::origin) return B::constant(order, S(2)) * den.invert();
    const B num = (x - y) * S(w.p - w.q) + (one - y) * B::lift_x(sdn) + (one - x) * B::lift_y(sdn);
    return num * B::lift_x(detail::geometric<S>(order)) * B::lift_y(detail::geometric<S>(order)) * den.invert();
}

// ---------------------------------------------------------------------------
// K~_0 displayed forms

inline double tilde_A(const OrdinaryWalk<double>& w, double x, double y)
{
    const double p = w.p, q = w.q, r = w.r;
    return (1 - r * x) * (1 - r * y) *
           (2 * (1 - r) * (1 - q * x - p * y - r * x * y) -
            (1 / (p * x)) * (1 - y) * (r * (1 - r * x) * (1 - r * x) + (1 - r) * (1 - r) * p * x) -
            (1 / (q * y)) * (1 - x) * (r * (1 - r * y) * (1 - r * y) + (1 - r) * (1 - r) * q * y));
}

inline double tilde_B(const OrdinaryWalk<double>& w, double x, double y)
{
    const double p = w.p, r = w.r;
    return (1 / (p * x)) * (1 - y) * (1 - r * y) * (r * (1 - r * x) * (1 - r * x) + (1 - r) * (1 - r) * p * x);
}

inline double tilde_C(const OrdinaryWalk<double>& w, double x, double y)
{
    const double q = w.q, r = w.r;
    return (1 / (q * y)) * (1 - x) * (1 - r * x) * (r * (1 - r * y) * (1 - r * y) + (1 - r) * (1 - r) * q * y);
}

inline double tilde_A_prime(const OrdinaryWalk<double>& w, double x, double y)
{
    const double p = w.p, q = w.q, r = w.r;
    return (1 - r * x) * (1 - r * y) *
           ((1 - 2 * r - r * r) + r * (1 - r * x) * (1 - r * x) / (2 * p * q * x * x) +
            r * (1 - r * y) * (1 - r * y) / (2 * p * q * y * y));
}

inline double tilde_B_prime(const OrdinaryWalk<double>& w, double x, double y)
{
    const double p = w.p, q = w.q, r = w.r;
    return -(r * (1 - r * y) / (p * q * x * x)) * (p * q * (1 - r) * x * x + (1 - r * x) * (1 - r * x));
}

inline double tilde_C_prime(const OrdinaryWalk<double>& w, double x, double y)
{
    const double p = w.p, q = w.q, r = w.r;
    return -(r * (1 - r * x) / (p * q * y * y)) * (p * q * (1 - r) * y * y + (1 - r * y) * (1 - r * y));
}

inline double tilde_denominator(const OrdinaryWalk<double>& w, double x, double y)
{
    const double r = w.r;
    return 2 * r * (1 - r * x) * (1 - r * y) +
           (1 - r) * ((1 - r * y) * sqrt_delta(w, x) + (1 - r * x) * sqrt_delta(w, y));
}

inline void require_pq(const OrdinaryWalk<double>& w)
{
    if (!(w.p > 0 && w.q > 0)) throw std::invalid_argument("K~_0 closed forms need p > 0 and q > 0");
}

/// The displayed K~_0 theorem forms, evaluated as printed.
inline double ktilde0_closed(const OrdinaryWalk<double>& w, OrdinaryTarget t, double x, double y)
{
    require_pq(w);
    const double sx = sqrt_delta(w, x), sy = sqrt_delta(w, y);
    const double den = tilde_denominator(w, x, y);
    if (t == OrdinaryTarget::all) {
        return (tilde_A(w, x, y) + tilde_B(w, x, y) * sx + tilde_C(w, x, y) * sy) / ((1 - x) * (1 - y) * den);
    }
    return (tilde_A_prime(w, x, y) + tilde_B_prime(w, x, y) * sx + tilde_C_prime(w, x, y) * sy) / den;
}

inline void require_r0(const OrdinaryWalk<double>& w)
{
    if (w.r != 0) throw std::invalid_argument("corollary form needs r = 0");
}

/// r = 0 corollary.
inline double ktilde0_corollary(const OrdinaryWalk<double>& w, OrdinaryTarget t, double x, double y)
{
    require_r0(w);
    const double sx = sqrt_delta(w, x), sy = sqrt_delta(w, y);
    if (t == OrdinaryTarget::origin) return 1 / (sx + sy);
    return ((w.p - w.q) * (x - y) + (1 - y) * sx + (1 - x) * sy) / ((1 - x) * (1 - y) * (sx + sy));
}

/// r = 0, F = Z corollary in the split form.
inline double ktilde0_corollary_split(const OrdinaryWalk<double>& w, double x, double y)
{
    require_r0(w);
    const double sx = sqrt_delta(w, x), sy = sqrt_delta(w, y);
    return ((w.p - w.q + sx) / (1 - x) + (w.q - w.p + sy) / (1 - y)) / (sx + sy);
}

template <typename S>
Series2<S> ktilde0_corollary_series(const OrdinaryWalk<S>& w, OrdinaryTarget t, int order)
{
    using B = Series2<S>;
    if (!scalar_traits<S>::is_zero(w.r)) throw std::invalid_argument("corollary form needs r = 0");
    const Series1<S> sd = detail::sqrt_delta_series(w, order);
    const B one = B::constant(order, scalar_traits<S>::one());
    const B x = B::var_x(order), y = B::var_y(order);
    const B inv = (B::lift_x(sd) + B::lift_y(sd)).invert();
    if (t == OrdinaryTarget::origin) return inv;
    const B num = (x - y) * S(w.p - w.q) + (one - y) * B::lift_x(sd) + (one - x) * B::lift_y(sd);
    return num * B::lift_x(detail::geometric<S>(order)) * B::lift_y(detail::geometric<S>(order)) * inv;
}

// ---------------------------------------------------------------------------
// Expansion coefficients of A(x,y) / ((1-rx)(1-ry))

template <typename S>
struct TildeCoefficients {
    S a11, a10, a01, a00, am10, a0m1, a1m1, am11;
};

/// As displayed (first of each pair of equivalent forms).
template <typename S>
TildeCoefficients<S> tilde_coefficients_printed(const OrdinaryWalk<S>& w)
{
    const S &p = w.p, &q = w.q, &r = w.r;
    TildeCoefficients<S> c;
    S r2 = r * r;
    S r3 = r2 * r;
    S one_r = 1 - r;
    c.a11 = 2 * r3 / p + 2 * r3 / q + 2 * r2 - 2 * r;
    c.a10 = -r3 / p - 2 * r2 / q + one_r * one_r - 2 * q * one_r;
    c.a01 = -r3 / q - 2 * r2 / p + one_r * one_r - 2 * p * one_r;
    c.a00 = 2 * r2 / p + 2 * r2 / q - 2 * r2 + 2 * r;
    c.am10 = -r / p;
    c.a0m1 = -r / q;
    c.a1m1 = r / q;
    c.am11 = r / p;
    return c;
}

/// The second displayed form of a11, a10, a01, a00 (after substituting p+q = 1-r).
template <typename S>
TildeCoefficients<S> tilde_coefficients_printed_factored(const OrdinaryWalk<S>& w)
{
    const S &p = w.p, &q = w.q, &r = w.r;
    TildeCoefficients<S> c = tilde_coefficients_printed(w);
    S r2 = r * r;
    S one_r = 1 - r;
    c.a11 = 2 * r * one_r * (r2 / (p * q) - 2);
    c.a10 = -r2 * (r / p + 2 / q) + (p - q) * one_r;
    c.a01 = -r2 * (r / q + 2 / p) + (q - p) * one_r;
    c.a00 = 2 * r * one_r * (r / (p * q) + 1);
    return c;
}

namespace detail {

// Laurent polynomial in x, y: exponent pair -> coefficient.
template <typename S>
using Laurent = std::map<std::pair<int, int>, S>;

template <typename S>
Laurent<S> lmul(const Laurent<S>& a, const Laurent<S>& b)
{
    Laurent<S> out;
    for (const auto& [ea, ca] : a)
        for (const auto& [eb, cb] : b) {
            S v = ca * cb;
            out[{ea.first + eb.first, ea.second + eb.second}] += v;
        }
    return out;
}

template <typename S>
void ladd(Laurent<S>& a, const Laurent<S>& b, const S& scale)
{
    for (const auto& [e, c] : b) {
        S v = c * scale;
        a[e] += v;
    }
}

}  // namespace detail

/// Coefficients obtained by expanding A(x,y)/((1-rx)(1-ry)) term by term.
template <typename S>
TildeCoefficients<S> tilde_coefficients_expanded(const OrdinaryWalk<S>& w)
{
    using L = detail::Laurent<S>;
    const S &p = w.p, &q = w.q, &r = w.r;
    const S one = scalar_traits<S>::one();
    S one_r = 1 - r;
    S r2 = r * r;
    S r3 = r2 * r;
    S sq = one_r * one_r;

    L acc;
    // 2(1-r)(1 - qx - py - rxy)
    L t1{{{0, 0}, one}, {{1, 0}, S(-q)}, {{0, 1}, S(-p)}, {{1, 1}, S(-r)}};
    detail::ladd(acc, t1, S(2 * one_r));
    // -(1-y)(r/p x^-1 - 2r^2/p + r^3/p x + (1-r)^2)
    L one_minus_y{{{0, 0}, one}, {{0, 1}, S(-one)}};
    L one_minus_x{{{0, 0}, one}, {{1, 0}, S(-one)}};
    L t2{{{-1, 0}, S(r / p)}, {{0, 0}, S(-2 * r2 / p + sq)}, {{1, 0}, S(r3 / p)}};
    L t3{{{0, -1}, S(r / q)}, {{0, 0}, S(-2 * r2 / q + sq)}, {{0, 1}, S(r3 / q)}};
    detail::ladd(acc, detail::lmul(one_minus_y, t2), S(-one));
    detail::ladd(acc, detail::lmul(one_minus_x, t3), S(-one));

    auto get = [&](int a, int b) {
        auto it = acc.find({a, b});
        return it == acc.end() ? scalar_traits<S>::zero() : it->second;
    };
    TildeCoefficients<S> c;
    c.a11 = get(1, 1);
    c.a10 = get(1, 0);
    c.a01 = get(0, 1);
    c.a00 = get(0, 0);
    c.am10 = get(-1, 0);
    c.a0m1 = get(0, -1);
    c.a1m1 = get(1, -1);
    c.am11 = get(-1, 1);
    for (const auto& [e, v] : acc) {
        if (std::abs(e.first) > 1 || std::abs(e.second) > 1 || (e.first == -1 && e.second == -1)) {
            if (!scalar_traits<S>::is_zero(v)) throw std::logic_error("unexpected monomial in A expansion");
        }
    }
    return c;
}

/// The displayed expansion, with its displayed signs, at a point.
inline double tilde_A_from_expansion(const OrdinaryWalk<double>& w, const TildeCoefficients<double>& c, double x,
                                     double y)
{
    return (1 - w.r * x) * (1 - w.r * y) *
           (c.a11 * x * y + c.a10 * x + c.a01 * y + c.a1m1 * x / y + c.am11 * y / x - c.am10 / x - c.a0m1 / y + c.a00);
}

// ---------------------------------------------------------------------------
// Cross-check against the structural solution

inline std::vector<double> default_grid()
{
    std::vector<double> g;
    for (int k = 1; k <= 9; ++k) g.push_back(k / 10.0);
    return g;
}

/// Structural K~_0 at a point from the (L,R) matrix representation.
template <typename S>
double ktilde0_structural(const OrdinaryWalk<S>& w, OrdinaryTarget t, double x, double y)
{
    return ktilde_lr(w.jump().template as<double>(), to_target(t), x, y).at(0);
}

namespace detail {

template <typename S>
ErratumEntry series_entry(const std::string& id, const std::string& note, const Series2<S>& printed,
                          const Series2<S>& structural)
{
    EntryBuilder b(id, note, 0.0);
    for (int n = 0; n <= printed.order(); ++n) {
        for (int m = 0; m <= n; ++m) {
            const double s = scalar_traits<S>::to_double(structural.coeff(m, n - m));
            const double pr = scalar_traits<S>::to_double(printed.coeff(m, n - m));
            const bool same = printed.coeff(m, n - m) == structural.coeff(m, n - m);
            b.add(m, n - m, s, same ? s : pr);
        }
    }
    ErratumEntry e = b.finish();
    e.worst_x = std::round(e.worst_x);
    e.worst_y = std::round(e.worst_y);
    return e;
}

template <typename S>
ErratumEntry coefficient_entry(const std::string& id, const std::string& note, const S& printed, const S& truth)
{
    ErratumEntry e;
    e.formula_id = id;
    e.note = note;
    e.grid.points = 1;
    e.structural_value = scalar_traits<S>::to_double(truth);
    e.printed_value = scalar_traits<S>::to_double(printed);
    e.grid.max_abs_diff = std::fabs(e.structural_value - e.printed_value);
    e.grid.max_rel_diff = e.grid.max_abs_diff / std::max(std::fabs(e.structural_value), 1e-300);
    if (e.structural_value != 0) e.grid.min_ratio = e.grid.max_ratio = e.printed_value / e.structural_value;
    e.verdict = printed == truth ? Verdict::match : Verdict::mismatch;
    return e;
}

}  // namespace detail

/// Compares every displayed K~_0 form with the structural value on the grid,
/// and the series forms with the structural series coefficient by coefficient.
template <typename S>
ErratumReport ktilde0_crosscheck(const OrdinaryWalk<S>& w, const std::vector<double>& grid, int order)
{
    const OrdinaryWalk<double> wd = w.numeric();
    ErratumReport rep;
    rep.subject = "ordinary walk " + w.describe();

    const JumpDistribution<double> jd = w.jump().template as<double>();
    auto structural = [&](OrdinaryTarget t, double x, double y) { return ktilde_lr(jd, to_target(t), x, y).at(0); };
    auto printed_theorem = [&](OrdinaryTarget t, double x, double y) {
        return ktilde_lr(jd, to_target(t), x, y, GammaRoute::general, nullptr, KtildeForm::as_printed).at(0);
    };

    const bool pq = wd.p > 0 && wd.q > 0;
    const bool r0 = scalar_traits<S>::is_zero(w.r);

    for (OrdinaryTarget t : {OrdinaryTarget::all, OrdinaryTarget::origin}) {
        const std::string tag = t == OrdinaryTarget::all ? "all" : "origin";
        EntryBuilder closed("ktilde0_theorem_" + tag, std::string("displayed A,B,C") +
                                                          (t == OrdinaryTarget::all ? "" : "'") + " form, F=" +
                                                          to_string(t));
        EntryBuilder theorem("ktilde_matrix_as_printed_" + tag,
                             std::string("matrix representation with the displayed I+- factor, F=") + to_string(t));
        for (double x : grid) {
            for (double y : grid) {
                const double s = structural(t, x, y);
                if (pq) closed.add(x, y, s, ktilde0_closed(wd, t, x, y));
                theorem.add(x, y, s, printed_theorem(t, x, y));
            }
        }
        rep.entries.push_back(closed.finish());
        rep.entries.push_back(theorem.finish());

        EntryBuilder cor("ktilde0_corollary_r0_" + tag, std::string("r=0 corollary, F=") + to_string(t));
        if (r0 && pq) {
            for (double x : grid)
                for (double y : grid) cor.add(x, y, structural(t, x, y), ktilde0_corollary(wd, t, x, y));
        }
        rep.entries.push_back(cor.finish());
    }
    {
        EntryBuilder split("ktilde0_corollary_r0_split", "r=0 corollary, F=Z, split form");
        if (r0 && pq) {
            for (double x : grid)
                for (double y : grid)
                    split.add(x, y, structural(OrdinaryTarget::all, x, y), ktilde0_corollary_split(wd, x, y));
        }
        rep.entries.push_back(split.finish());
    }

    // series: structural from the finite-window solver
    if (order >= 0) {
        const JumpDistribution<S> j = w.jump();
        const Window<S> win = horizon_window(j, 0, order + 1);
        for (OrdinaryTarget t : {OrdinaryTarget::all, OrdinaryTarget::origin}) {
            const std::string tag = t == OrdinaryTarget::all ? "all" : "origin";
            const auto surf = ktilde_solve(win.chain, win.partition, win.translate(to_target(t)), SeriesContext<S>(order));
            const Series2<S> st = surf.at(win.index_of(0));
            if (r0 && pq) {
                rep.entries.push_back(detail::series_entry("ktilde0_corollary_r0_" + tag + "_series",
                                                           std::string("r=0 corollary series, F=") + to_string(t),
                                                           ktilde0_corollary_series(w, t, order), st));
            }
            rep.entries.push_back(detail::series_entry(
                "ktilde_matrix_as_printed_" + tag + "_series",
                std::string("matrix representation with the displayed I+- factor, series, F=") + to_string(t),
                ktilde_lr_series(j, to_target(t), order, KtildeForm::as_printed).at(0), st));
        }
    }

    // expansion coefficients of A
    if (pq) {
        const TildeCoefficients<S> pr = tilde_coefficients_printed(w);
        const TildeCoefficients<S> pf = tilde_coefficients_printed_factored(w);
        const TildeCoefficients<S> ex = tilde_coefficients_expanded(w);
        auto add = [&](const char* id, const S& printed, const S& truth) {
            rep.entries.push_back(detail::coefficient_entry<S>(id, "coefficient of A(x,y)/((1-rx)(1-ry))", printed, truth));
        };
        add("a11", pr.a11, ex.a11);
        add("a11_factored", pf.a11, ex.a11);
        add("a10", pr.a10, ex.a10);
        add("a10_factored", pf.a10, ex.a10);
        add("a01", pr.a01, ex.a01);
        add("a01_factored", pf.a01, ex.a01);
        add("a00", pr.a00, ex.a00);
        add("a00_factored", pf.a00, ex.a00);
        add("a1-1", pr.a1m1, ex.a1m1);
        add("a-11", pr.am11, ex.am11);
        // the expansion shows -a_{-10}/x and -a_{0-1}/y
        S neg_am10 = -pr.am10;
        S neg_a0m1 = -pr.a0m1;
        add("a-10_as_used", neg_am10, ex.am10);
        add("a0-1_as_used", neg_a0m1, ex.a0m1);

        const TildeCoefficients<double> pd{scalar_traits<S>::to_double(pr.a11),  scalar_traits<S>::to_double(pr.a10),
                                           scalar_traits<S>::to_double(pr.a01),  scalar_traits<S>::to_double(pr.a00),
                                           scalar_traits<S>::to_double(pr.am10), scalar_traits<S>::to_double(pr.a0m1),
                                           scalar_traits<S>::to_double(pr.a1m1), scalar_traits<S>::to_double(pr.am11)};
        EntryBuilder expan("A_expansion", "displayed expansion of A against the definition of A");
        for (double x : grid)
            for (double y : grid) expan.add(x, y, tilde_A(wd, x, y), tilde_A_from_expansion(wd, pd, x, y));
        rep.entries.push_back(expan.finish());
    }
    return rep;
}

}  // namespace sojourn
