#pragma once

// (L,R) random walk on Z: roots of the characteristic polynomial, the kernel
// Gamma_j(x) = sum_m P_0{X_m = j} x^m, the M x M matrix family, and the matrix
// representations of K and K-tilde. E- = (-inf,-1], E0 = {0..M-1}, E+ = [M,inf).

#include "chain.hpp"
#include "errors.hpp"
#include "scalar.hpp"
#include "series.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sojourn {

using cdouble = std::complex<double>;

inline constexpr double kRootGuard = 1e-9;
inline constexpr double kRootResidual = 1e-10;
inline constexpr double kMultipleRoot = 1e-12;

/// P_x(z) = z^L - x sum_{j=0}^{L+R} pi_{j-L} z^j at a fixed x.
struct CharPoly {
    int L = 1;
    int R = 1;
    double x = 0;
    std::vector<double> a;  // a[k] multiplies z^k

    int degree() const
    {
        int d = static_cast<int>(a.size()) - 1;
        while (d > 0 && a[static_cast<std::size_t>(d)] == 0.0) --d;
        return d;
    }
    cdouble eval(cdouble z) const
    {
        cdouble v = 0;
        for (int k = degree(); k >= 0; --k) v = v * z + a[static_cast<std::size_t>(k)];
        return v;
    }
    cdouble deriv(cdouble z) const
    {
        cdouble v = 0;
        for (int k = degree(); k >= 1; --k) v = v * z + static_cast<double>(k) * a[static_cast<std::size_t>(k)];
        return v;
    }
    /// sum |a_k| |z|^k, the natural size of P_x(z).
    double magnitude(cdouble z) const
    {
        double s = 0, r = std::abs(z), p = 1;
        for (int k = 0; k <= degree(); ++k, p *= r) s += std::fabs(a[static_cast<std::size_t>(k)]) * p;
        return s;
    }
    double deriv_magnitude(cdouble z) const
    {
        double s = 0, r = std::abs(z), p = 1;
        for (int k = 1; k <= degree(); ++k, p *= r) s += k * std::fabs(a[static_cast<std::size_t>(k)]) * p;
        return s;
    }
};

template <typename S>
CharPoly char_poly(const JumpDistribution<S>& jump, double x)
{
    CharPoly cp;
    cp.L = jump.L();
    cp.R = jump.R();
    cp.x = x;
    cp.a.assign(static_cast<std::size_t>(jump.L() + jump.R()) + 1, 0.0);
    for (int j = 0; j <= jump.L() + jump.R(); ++j) {
        cp.a[static_cast<std::size_t>(j)] = -x * scalar_traits<S>::to_double(jump.pi(j - jump.L()));
    }
    cp.a[static_cast<std::size_t>(jump.L())] += 1.0;
    return cp;
}

struct RootSet {
    CharPoly poly;
    std::vector<cdouble> roots;
    std::vector<std::size_t> inside;
    std::vector<std::size_t> outside;
    int zero_roots = 0;
    int iterations = 0;
    double max_residual = 0;  // relative: |P(z)| / sum |a_k||z|^k

    std::vector<cdouble> inside_roots() const
    {
        std::vector<cdouble> v;
        for (std::size_t k : inside) v.push_back(roots[k]);
        return v;
    }
    std::vector<cdouble> outside_roots() const
    {
        std::vector<cdouble> v;
        for (std::size_t k : outside) v.push_back(roots[k]);
        return v;
    }
};

namespace detail {

// Durand-Kerner on the monic polynomial with coefficients c (c.back() == 1).
inline std::vector<cdouble> durand_kerner(const std::vector<double>& c, int& iterations, bool& converged)
{
    const int n = static_cast<int>(c.size()) - 1;
    std::vector<cdouble> w(static_cast<std::size_t>(n));
    const cdouble seed(0.4, 0.9);
    cdouble p = 1;
    for (int k = 0; k < n; ++k, p *= seed) w[static_cast<std::size_t>(k)] = p;
    auto q = [&](cdouble z) {
        cdouble v = 0;
        for (int k = n; k >= 0; --k) v = v * z + c[static_cast<std::size_t>(k)];
        return v;
    };
    converged = false;
    for (iterations = 1; iterations <= 200; ++iterations) {
        double change = 0;
        for (int k = 0; k < n; ++k) {
            cdouble den = 1;
            for (int j = 0; j < n; ++j) {
                if (j != k) den *= w[static_cast<std::size_t>(k)] - w[static_cast<std::size_t>(j)];
            }
            if (den == cdouble(0)) den = cdouble(1e-300);
            const cdouble step = q(w[static_cast<std::size_t>(k)]) / den;
            w[static_cast<std::size_t>(k)] -= step;
            change = std::max(change, std::abs(step) / std::max(1.0, std::abs(w[static_cast<std::size_t>(k)])));
        }
        if (change <= 1e-13) {
            converged = true;
            break;
        }
    }
    iterations = std::min(iterations, 200);
    return w;
}

}  // namespace detail

/// All roots of P_x, split by modulus. Zero roots (pi_{-L} = 0) are exact and inside.
template <typename S>
RootSet roots(const JumpDistribution<S>& jump, double x)
{
    if (!(x > 0 && x < 1)) throw std::invalid_argument("roots need x in (0,1)");
    RootSet rs;
    rs.poly = char_poly(jump, x);
    const CharPoly& cp = rs.poly;
    const int deg = cp.degree();
    int low = 0;
    while (low < deg && cp.a[static_cast<std::size_t>(low)] == 0.0) ++low;
    rs.zero_roots = low;
    for (int k = 0; k < low; ++k) rs.roots.push_back(0.0);

    const int n = deg - low;
    if (n > 0) {
        std::vector<double> monic(static_cast<std::size_t>(n) + 1);
        const double lead = cp.a[static_cast<std::size_t>(deg)];
        for (int k = 0; k <= n; ++k) monic[static_cast<std::size_t>(k)] = cp.a[static_cast<std::size_t>(k + low)] / lead;
        bool converged = false;
        std::vector<cdouble> w = detail::durand_kerner(monic, rs.iterations, converged);
        for (cdouble& z : w) {
            for (int it = 0; it < 3; ++it) {
                const cdouble d = cp.deriv(z);
                if (d == cdouble(0)) break;
                const cdouble step = cp.eval(z) / d;
                if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
                z -= step;
            }
            // a real polynomial: snap numerically real roots onto the axis
            if (std::fabs(z.imag()) <= 1e-14 * std::max(1.0, std::abs(z))) z = cdouble(z.real(), 0.0);
            rs.roots.push_back(z);
        }
        (void)converged;
    }

    for (std::size_t k = 0; k < rs.roots.size(); ++k) {
        const cdouble z = rs.roots[k];
        if (z != cdouble(0)) {
            const double r = std::abs(cp.eval(z)) / cp.magnitude(z);
            rs.max_residual = std::max(rs.max_residual, r);
        }
    }
    if (rs.max_residual > kRootResidual) {
        std::ostringstream msg;
        msg << "root finder did not converge: relative residual " << rs.max_residual << " after " << rs.iterations
            << " iterations";
        throw numerical_error(msg.str());
    }
    for (std::size_t k = 0; k < rs.roots.size(); ++k) {
        const double m = std::abs(rs.roots[k]);
        if (std::fabs(m - 1.0) <= kRootGuard) throw numerical_error("ill-separated roots");
        (m < 1.0 ? rs.inside : rs.outside).push_back(k);
    }
    if (static_cast<int>(rs.inside.size() + rs.outside.size()) != deg) {
        throw numerical_error("root count does not match the polynomial degree");
    }
    return rs;
}

/// Gamma_d on a contiguous range of d.
template <typename T>
struct GammaKernel {
    int dmin = 0;
    std::vector<T> values;

    int dmax() const { return dmin + static_cast<int>(values.size()) - 1; }
    const T& at(int d) const
    {
        if (d < dmin || d > dmax()) throw std::out_of_range("Gamma index outside computed range");
        return values[static_cast<std::size_t>(d - dmin)];
    }
};

enum class GammaRoute { general, symmetric };

/// Gamma_d(x) from the roots of P_x. The symmetric route pairs z with 1/z and
/// only sums over inside roots.
template <typename S>
GammaKernel<double> gamma_numeric(const JumpDistribution<S>& jump, double x, int dmin, int dmax,
                                  GammaRoute route = GammaRoute::general, const RootSet* given = nullptr)
{
    if (dmax < dmin) throw std::invalid_argument("empty Gamma range");
    const RootSet rs = given ? *given : roots(jump, x);
    const CharPoly& cp = rs.poly;
    const int L = jump.L();

    int r_eff = jump.R();
    while (r_eff > 0 && scalar_traits<S>::is_zero(jump.pi(r_eff))) --r_eff;
    if (r_eff == 0) throw std::invalid_argument("walk without positive jumps");

    std::vector<cdouble> inv_deriv(rs.roots.size());
    for (std::size_t k = 0; k < rs.roots.size(); ++k) {
        const cdouble z = rs.roots[k];
        if (z == cdouble(0)) continue;
        const cdouble d = cp.deriv(z);
        if (std::abs(d) < kMultipleRoot * std::max(1.0, cp.deriv_magnitude(z))) throw numerical_error("near-multiple root");
        inv_deriv[k] = 1.0 / d;
    }

    bool use_sym = route == GammaRoute::symmetric;
    if (use_sym) {
        if (!jump.symmetric()) throw std::invalid_argument("symmetric Gamma route needs a symmetric walk");
        if (scalar_traits<S>::is_zero(jump.pi(jump.M())) || rs.inside.size() != static_cast<std::size_t>(jump.M())) {
            throw numerical_error("symmetric Gamma route needs M roots inside the unit disc");
        }
    }

    GammaKernel<double> g;
    g.dmin = dmin;
    for (int d = dmin; d <= dmax; ++d) {
        cdouble v = 0;
        if (use_sym) {
            const int M = jump.M();
            for (std::size_t k : rs.inside) {
                const cdouble z = rs.roots[k];
                v += std::pow(z, M - 1) * inv_deriv[k] * std::pow(z, std::abs(d));
            }
        } else if (d < 0) {
            for (std::size_t k : rs.inside) {
                const cdouble z = rs.roots[k];
                if (z == cdouble(0)) continue;
                v += std::pow(z, -d + L - 1) * inv_deriv[k];
            }
        } else {
            for (std::size_t k : rs.outside) {
                const cdouble z = rs.roots[k];
                v -= std::pow(z, -d + L - 1) * inv_deriv[k];
            }
        }
        g.values.push_back(v.real());
    }
    return g;
}

/// Gamma_d as exact series: coefficient m is P_0{X_m = d}, by repeated convolution.
template <typename S>
GammaKernel<Series1<S>> gamma_series(const JumpDistribution<S>& jump, int order, int dmin, int dmax)
{
    if (order < 0) throw std::invalid_argument("negative series order");
    if (dmax < dmin) throw std::invalid_argument("empty Gamma range");
    const long lo = -static_cast<long>(order) * jump.L();
    const long hi = static_cast<long>(order) * jump.R();
    const std::size_t width = static_cast<std::size_t>(hi - lo + 1);
    std::vector<S> dist(width, scalar_traits<S>::zero()), next(width);
    dist[static_cast<std::size_t>(-lo)] = scalar_traits<S>::one();

    GammaKernel<Series1<S>> g;
    g.dmin = dmin;
    g.values.assign(static_cast<std::size_t>(dmax - dmin + 1), Series1<S>(order));
    for (int m = 0; m <= order; ++m) {
        for (int d = dmin; d <= dmax; ++d) {
            if (d >= lo && d <= hi) g.values[static_cast<std::size_t>(d - dmin)][m] = dist[static_cast<std::size_t>(d - lo)];
        }
        if (m == order) break;
        std::fill(next.begin(), next.end(), scalar_traits<S>::zero());
        for (std::size_t s = 0; s < width; ++s) {
            if (scalar_traits<S>::is_zero(dist[s])) continue;
            for (int k = -jump.L(); k <= jump.R(); ++k) {
                const long t = static_cast<long>(s) + k;
                if (t < 0 || t >= static_cast<long>(width)) continue;
                const S pk = jump.pi(k);
                if (scalar_traits<S>::is_zero(pk)) continue;
                S inc = dist[s] * pk;
                next[static_cast<std::size_t>(t)] += inc;
            }
        }
        std::swap(dist, next);
    }
    return g;
}

/// Range of Gamma indices the matrix family needs for this target.
template <typename S>
std::pair<int, int> gamma_range(const JumpDistribution<S>& jump, const TargetSet& target)
{
    const int M = jump.M();
    int lo = -3 * M + 1, hi = 3 * M - 1;
    if (!target.is_all()) {
        if (target.states().empty()) throw std::invalid_argument("empty target set");
        const long fmin = *target.states().begin();
        const long fmax = *target.states().rbegin();
        lo = std::min<long>(lo, fmin - 2 * M + 1);
        hi = std::max<long>(hi, fmax + M);
    }
    return {lo, hi};
}

/// One argument (x or y) of the matrix family: the variable, its Gamma kernel,
/// and 1/(1-variable) for F = Z.
template <typename U>
struct LrSide {
    U var;
    std::function<U(int)> gamma;
    U geometric;
};

template <typename U>
struct LrMatrixSet {
    int M = 1;
    Matrix<U> I, Ipm, oneF, oneFpm;
    Matrix<U> P, Pminus, Pplus, Pdag;
    Matrix<U> Gamma, GammaMinus, GammaPlus, GammaEq, GammaDdag;
    Matrix<U> G, Gminus, Gplus, Gdag;
};

template <typename U, typename S>
LrMatrixSet<U> build_matrices(const JumpDistribution<S>& jump, const TargetSet& target, const LrSide<U>& side)
{
    using R = ring_traits<U>;
    const U& proto = side.var;
    const U zero = R::zero_like(proto);
    auto c = [&](const S& v) { return R::from_scalar_like(proto, v); };
    const int M = jump.M();
    const std::size_t m = static_cast<std::size_t>(M);

    LrMatrixSet<U> s;
    s.M = M;
    s.I = Matrix<U>::identity(m, proto);
    s.Ipm = Matrix<U>(m, m, zero);
    s.oneF = Matrix<U>(m, 1, zero);
    s.oneFpm = Matrix<U>(m, 1, zero);
    for (int i = 0; i < M; ++i) {
        const S w = varpi(jump, i);
        s.Ipm(i, i) = c(w);
        if (target.contains(i)) {
            s.oneF(i, 0) = R::one_like(proto);
            s.oneFpm(i, 0) = c(w);
        }
    }
    s.P = s.Pminus = s.Pplus = s.Gamma = s.GammaMinus = s.GammaPlus = s.GammaEq = s.GammaDdag = Matrix<U>(m, m, zero);
    s.Pdag = Matrix<U>(m, 2 * m, zero);
    for (int i = 0; i < M; ++i) {
        for (int j = 0; j < M; ++j) {
            s.P(i, j) = c(jump.pi(j - i));
            s.Pminus(i, j) = c(jump.pi(j - i - M));
            s.Pplus(i, j) = c(jump.pi(j - i + M));
            s.Gamma(i, j) = side.gamma(j - i);
            s.GammaMinus(i, j) = side.gamma(j - i - M);
            s.GammaPlus(i, j) = side.gamma(j - i + M);
            s.GammaEq(i, j) = side.gamma(j - i - 2 * M);
            s.GammaDdag(i, j) = side.gamma(j - i + 2 * M);
        }
        for (int j = 0; j < 2 * M; ++j) s.Pdag(i, j) = c(jump.pi(j - i));
    }
    auto g_at = [&](int i) {
        if (target.is_all()) return side.geometric;
        U v = zero;
        for (long f : target.states()) v += side.gamma(static_cast<int>(f - i));
        return v;
    };
    s.G = s.Gminus = s.Gplus = Matrix<U>(m, 1, zero);
    s.Gdag = Matrix<U>(2 * m, 1, zero);
    for (int i = 0; i < M; ++i) {
        s.G(i, 0) = g_at(i);
        s.Gminus(i, 0) = g_at(i - M);
        s.Gplus(i, 0) = g_at(i + M);
    }
    for (int i = 0; i < 2 * M; ++i) s.Gdag(i, 0) = g_at(i);
    return s;
}

/// K = D^{-1} N from the x-side and y-side matrix sets.
template <typename U>
std::vector<U> k_from_matrices(const LrMatrixSet<U>& mx, const LrMatrixSet<U>& my, const U& x, const U& y,
                               SolveDiagnostics* diag = nullptr)
{
    const Matrix<U> gx_inv = invert_matrix(mx.Gamma, diag);
    const Matrix<U> gy_inv = invert_matrix(my.Gamma, diag);
    const Matrix<U> wx = mx.GammaMinus * gx_inv;
    const Matrix<U> wy = my.GammaPlus * gy_inv;
    const Matrix<U> ax = mx.I - (mx.P + mx.Pplus * wx).scaled(x);
    const Matrix<U> d = ax - (my.Pminus * wy).scaled(x);
    const Matrix<U> n = ax * (mx.G - wx * mx.Gminus) + my.G - (my.Pdag * my.Gdag).scaled(y) -
                        (my.Pminus * wy * my.G).scaled(y) - mx.oneF;
    const Matrix<U> k = solve_linear(d, n, diag);
    std::vector<U> out;
    for (std::size_t i = 0; i < k.rows(); ++i) out.push_back(k(i, 0));
    return out;
}

/// renewal: the restart kernel uses (I - tP)^{-1}, which reproduces the
/// oracle. as_printed: the displayed (I - tP)^{-1} I^{+-}, which counts
/// P_j{X_1 in E+-} twice and loses mass when some varpi_j < 1.
enum class KtildeForm { renewal, as_printed };

/// K-tilde = D-tilde^{-1} N-tilde.
template <typename U>
std::vector<U> ktilde_from_matrices(const LrMatrixSet<U>& mx, const LrMatrixSet<U>& my, const U& x, const U& y,
                                    SolveDiagnostics* diag = nullptr, KtildeForm form = KtildeForm::renewal)
{
    const Matrix<U> gx_inv = invert_matrix(mx.Gamma, diag);
    const Matrix<U> gy_inv = invert_matrix(my.Gamma, diag);
    Matrix<U> ix = invert_matrix(mx.I - mx.P.scaled(x), diag);
    Matrix<U> iy = invert_matrix(my.I - my.P.scaled(y), diag);
    if (form == KtildeForm::as_printed) {
        ix = ix * mx.Ipm;
        iy = iy * my.Ipm;
    }
    const Matrix<U> bx = (mx.Pplus * mx.GammaMinus * gx_inv * ix).scaled(x);
    const Matrix<U> by = (my.Pminus * my.GammaPlus * gy_inv * iy).scaled(y);
    const Matrix<U> d = mx.I - bx - by;
    const Matrix<U> rx = mx.oneFpm + (mx.Pplus * (mx.Gplus - mx.GammaEq * gx_inv * mx.Gminus)).scaled(x);
    const Matrix<U> ry = my.oneFpm + (my.Pminus * (my.Gminus - my.GammaDdag * gy_inv * my.Gplus)).scaled(y);
    const Matrix<U> n = (mx.I - bx) * rx + (my.I - by) * ry - mx.oneFpm;
    const Matrix<U> k = solve_linear(d, n, diag);
    std::vector<U> out;
    for (std::size_t i = 0; i < k.rows(); ++i) out.push_back(k(i, 0));
    return out;
}

namespace detail {

template <typename S>
struct SeriesSides {
    LrMatrixSet<Series2<S>> mx, my;
    Series2<S> x, y;
};

template <typename S>
SeriesSides<S> series_sides(const JumpDistribution<S>& jump, const TargetSet& target, int order)
{
    const auto [lo, hi] = gamma_range(jump, target);
    const GammaKernel<Series1<S>> gs = gamma_series(jump, order, lo, hi);
    std::vector<S> ones(static_cast<std::size_t>(order) + 1, scalar_traits<S>::one());
    const Series1<S> geo(order, ones);
    LrSide<Series2<S>> sx{Series2<S>::var_x(order), [&gs](int d) { return Series2<S>::lift_x(gs.at(d)); },
                          Series2<S>::lift_x(geo)};
    LrSide<Series2<S>> sy{Series2<S>::var_y(order), [&gs](int d) { return Series2<S>::lift_y(gs.at(d)); },
                          Series2<S>::lift_y(geo)};
    SeriesSides<S> out{build_matrices(jump, target, sx), build_matrices(jump, target, sy), sx.var, sy.var};
    return out;
}

template <typename S>
LrMatrixSet<double> numeric_side(const JumpDistribution<S>& jump, const TargetSet& target, double v,
                                 GammaRoute route)
{
    const auto [lo, hi] = gamma_range(jump, target);
    const GammaKernel<double> g = gamma_numeric(jump, v, lo, hi, route);
    LrSide<double> side{v, [&g](int d) { return g.at(d); }, 1.0 / (1.0 - v)};
    return build_matrices(jump, target, side);
}

inline void check_point(double x, double y)
{
    if (!(x > 0 && x < 1 && y > 0 && y < 1)) throw std::invalid_argument("(x,y) must lie in (0,1)^2");
}

inline numerical_error singular_d(const numerical_error& e, const SolveDiagnostics& diag)
{
    std::ostringstream msg;
    msg << e.what() << " (smallest pivot " << diag.min_pivot << ")";
    return numerical_error(msg.str());
}

}  // namespace detail

/// Series mode: entry i is K_i as a bivariate series; slice_n(n)[m] = P_i{T_n = m, X_n in F}.
template <typename S>
std::vector<Series2<S>> k_lr_series(const JumpDistribution<S>& jump, const TargetSet& target, int order)
{
    const auto sides = detail::series_sides(jump, target, order);
    return k_from_matrices(sides.mx, sides.my, sides.x, sides.y);
}

/// Series mode for K-tilde; slice_n(n)[m] = P_i{T~_n = m, X_n in F, X_1 in E+-}.
template <typename S>
std::vector<Series2<S>> ktilde_lr_series(const JumpDistribution<S>& jump, const TargetSet& target, int order,
                                         KtildeForm form = KtildeForm::renewal)
{
    const auto sides = detail::series_sides(jump, target, order);
    return ktilde_from_matrices(sides.mx, sides.my, sides.x, sides.y, nullptr, form);
}

template <typename S>
std::vector<double> k_lr(const JumpDistribution<S>& jump, const TargetSet& target, double x, double y,
                         GammaRoute route = GammaRoute::general, SolveDiagnostics* diag = nullptr)
{
    detail::check_point(x, y);
    const auto mx = detail::numeric_side(jump, target, x, route);
    const auto my = detail::numeric_side(jump, target, y, route);
    SolveDiagnostics local;
    try {
        return k_from_matrices(mx, my, x, y, diag ? diag : &local);
    } catch (const numerical_error& e) {
        throw detail::singular_d(e, diag ? *diag : local);
    }
}

template <typename S>
std::vector<double> ktilde_lr(const JumpDistribution<S>& jump, const TargetSet& target, double x, double y,
                              GammaRoute route = GammaRoute::general, SolveDiagnostics* diag = nullptr,
                              KtildeForm form = KtildeForm::renewal)
{
    detail::check_point(x, y);
    const auto mx = detail::numeric_side(jump, target, x, route);
    const auto my = detail::numeric_side(jump, target, y, route);
    SolveDiagnostics local;
    try {
        return ktilde_from_matrices(mx, my, x, y, diag ? diag : &local, form);
    } catch (const numerical_error& e) {
        throw detail::singular_d(e, diag ? *diag : local);
    }
}

// ---------------------------------------------------------------------------
// Symmetric (2,2) walk with explicit roots and entry formulas.

struct Sym22Law {
    double p0, p1, p2;
    double varpi() const { return p1 + 2 * p2; }
};

template <typename S>
Sym22Law sym22_law(const JumpDistribution<S>& jump)
{
    if (jump.L() != 2 || jump.R() != 2 || !jump.symmetric()) {
        throw std::invalid_argument("explicit (2,2) path needs a symmetric walk with L = R = 2");
    }
    const Sym22Law law{scalar_traits<S>::to_double(jump.pi(0)), scalar_traits<S>::to_double(jump.pi(1)),
                       scalar_traits<S>::to_double(jump.pi(2))};
    if (!(law.p2 > 0)) throw std::invalid_argument("explicit (2,2) path needs pi_2 > 0");
    return law;
}

/// Closed-form roots. z1 and z2_as_printed are the displayed expressions; the
/// displayed z2 has modulus > 1, so z2 is its reciprocal, the inside partner.
struct Sym22Roots {
    cdouble z1, z2, z2_as_printed;
    double disc;  // (pi1+4pi2)^2 + 4pi2(1/x-1)

    std::vector<cdouble> all() const { return {z1, z2, 1.0 / z1, 1.0 / z2}; }
};

inline Sym22Roots sym22_roots(const Sym22Law& w, double x)
{
    const double disc = (w.p1 + 4 * w.p2) * (w.p1 + 4 * w.p2) + 4 * w.p2 * (1 / x - 1);
    const double sd = std::sqrt(disc);
    const double base = w.p1 * w.p1 + 4 * w.p1 * w.p2 - 2 * w.p2 + 2 * w.p2 / x;
    const cdouble r1 = std::sqrt(cdouble(base - w.p1 * sd));
    const cdouble r2 = std::sqrt(cdouble(base + w.p1 * sd));
    Sym22Roots r;
    r.disc = disc;
    r.z1 = -(1 / (4 * w.p2)) * (w.p1 - sd + std::sqrt(2.0) * r1);
    r.z2_as_printed = -(1 / (4 * w.p2)) * (w.p1 + sd + std::sqrt(2.0) * r2);
    r.z2 = std::abs(r.z2_as_printed) > 1 ? 1.0 / r.z2_as_printed : r.z2_as_printed;
    return r;
}

/// Gamma_0..Gamma_5 from the explicit roots.
inline std::vector<double> sym22_gamma(const Sym22Law& w, double x, int count = 6)
{
    const Sym22Roots r = sym22_roots(w, x);
    std::vector<double> g;
    for (int d = 0; d < count; ++d) {
        const cdouble v = (std::pow(r.z1, d + 1) / (1.0 - r.z1 * r.z1) - std::pow(r.z2, d + 1) / (1.0 - r.z2 * r.z2)) /
                          (x * std::sqrt(r.disc));
        g.push_back(v.real());
    }
    return g;
}

/// Entry numerators at one argument t. Matrices are stored row-major [i][j].
struct Sym22Terms {
    double t = 0;
    double Gamma[6] = {};
    double Delta = 0;  // Gamma_0^2 - Gamma_1^2
    double delta = 0;  // (pi0^2 - pi1^2) t^2 - 2 pi0 t + 1
    double Dp[2][2] = {}, Dm[2][2] = {};
    double Nminus[2] = {}, Ndag[2] = {};
    double Dtp[2][2] = {}, Dtm[2][2] = {};
    double Dtp01_as_printed = 0;
    double Ntp[2] = {}, Ntm[2] = {};
};

inline Sym22Terms sym22_terms(const Sym22Law& w, double t)
{
    Sym22Terms s;
    s.t = t;
    const std::vector<double> g = sym22_gamma(w, t);
    std::copy(g.begin(), g.end(), s.Gamma);
    const double G0 = g[0], G1 = g[1], G2 = g[2], G3 = g[3], G4 = g[4], G5 = g[5];
    const double p0 = w.p0, p1 = w.p1, p2 = w.p2;
    s.Delta = G0 * G0 - G1 * G1;
    s.delta = (p0 * p0 - p1 * p1) * t * t - 2 * p0 * t + 1;
    const double D = s.Delta;

    s.Dp[0][0] = p2 * (G0 * G2 - G1 * G1);
    s.Dp[0][1] = p2 * (G0 * G1 - G1 * G2);
    s.Dp[1][0] = p1 * (G0 * G2 - G1 * G1) + p2 * (G0 * G3 - G1 * G2);
    s.Dp[1][1] = p1 * (G0 * G1 - G1 * G2) + p2 * (G0 * G2 - G1 * G3);
    s.Dm[0][0] = p1 * (G0 * G1 - G1 * G2) + p2 * (G0 * G2 - G1 * G3);
    s.Dm[0][1] = p1 * (G0 * G2 - G1 * G1) + p2 * (G0 * G3 - G1 * G2);
    s.Dm[1][0] = p2 * (G0 * G1 - G1 * G2);
    s.Dm[1][1] = p2 * (G0 * G2 - G1 * G1);

    s.Nminus[0] = D - (G0 - G1) * (G1 + G2);
    s.Nminus[1] = D - (G0 - G1) * (G2 + G3);
    s.Ndag[0] = (1 - (1 - p1 - p2) * t) * D - t * (G0 - G1) * (p1 * G1 + (p1 + p2) * G2 + p2 * G3);
    s.Ndag[1] = (1 - (1 - p2) * t) * D - p2 * t * (G0 - G1) * (G1 + G2);

    const double a = 1 - p0 * t;
    s.Dtp[0][0] = p2 * (p1 * t * G0 * G1 + a * G0 * G2 - a * G1 * G1 - p1 * t * G1 * G2);
    s.Dtp[0][1] = p2 * (a * G0 * G1 + p1 * t * G0 * G2 - p1 * t * G1 * G1 - a * G1 * G2);
    s.Dtp01_as_printed = p2 * (a * G0 * G1 + p2 * t * G0 * G2 - p1 * t * G1 * G1 - a * G1 * G2);
    s.Dtp[1][0] = p1 * p1 * t * G0 * G1 + p1 * (1 + (p2 - p0) * t) * G0 * G2 + p2 * a * G0 * G3 - p1 * a * G1 * G1 -
                  (p2 + (p1 * p1 - p0 * p2) * t) * G1 * G2 - p1 * p2 * t * G1 * G3;
    s.Dtp[1][1] = p1 * a * G0 * G1 + (p2 + (p1 * p1 - p0 * p2) * t) * G0 * G2 + p1 * p2 * t * G0 * G3 -
                  p1 * p1 * t * G1 * G1 - p1 * (1 + (p2 - p0) * t) * G1 * G2 - p2 * a * G1 * G3;
    s.Dtm[0][0] = s.Dtp[1][1];
    s.Dtm[0][1] = s.Dtp[1][0];
    s.Dtm[1][0] = p2 * (a * G0 * G1 + p1 * t * G0 * G2 - p1 * t * G1 * G1 - a * G1 * G2);
    s.Dtm[1][1] = s.Dtp[0][0];

    s.Ntp[0] = p2 * D - p2 * (G0 - G1) * (G3 + G4);
    s.Ntp[1] = (p1 + p2) * D - (G0 - G1) * (p1 * G3 + (p1 + p2) * G4 + p2 * G5);
    s.Ntm[0] = s.Ntp[1];
    s.Ntm[1] = s.Ntp[0];
    return s;
}

struct Sym22Result {
    std::vector<double> k, ktilde;
    // K-tilde with the displayed varpi factor on the D-tilde+- terms
    std::vector<double> ktilde_varpi_factor;
    // the inverse displays evaluated verbatim (ktilde: varpi factor, D-tilde+_01
    // and the displayed layout)
    std::vector<double> k_inverse_as_printed, ktilde_inverse_as_printed;
    Sym22Terms at_x, at_y;
};

namespace detail {

inline std::vector<double> apply2(const double m[2][2], double scale, const double v[2])
{
    return {scale * (m[0][0] * v[0] + m[0][1] * v[1]), scale * (m[1][0] * v[0] + m[1][1] * v[1])};
}

inline double det2(const double m[2][2]) { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

}  // namespace detail

template <typename S>
Sym22Result symmetric22(const JumpDistribution<S>& jump, const TargetSet& target, double x, double y)
{
    if (!target.is_all()) throw std::invalid_argument("explicit (2,2) entries are written for F = Z");
    detail::check_point(x, y);
    const Sym22Law w = sym22_law(jump);
    Sym22Result res;
    res.at_x = sym22_terms(w, x);
    res.at_y = sym22_terms(w, y);
    const Sym22Terms& X = res.at_x;
    const Sym22Terms& Y = res.at_y;
    const double p0 = w.p0, p1 = w.p1, vp = w.varpi();
    const double Dx = X.Delta, Dy = Y.Delta, dx = X.delta, dy = Y.delta;

    // D scaled by Delta(x) Delta(y); x multiplies both Gamma-ratio terms
    double md[2][2];
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const double pij = (i == j) ? p0 : p1;
            md[i][j] = (i == j ? 1.0 : 0.0) * Dx * Dy - x * pij * Dx * Dy - x * Dy * X.Dp[i][j] - x * Dx * Y.Dm[i][j];
        }
    }
    double n[2];
    n[0] = (((1 - p0 * x) * Dx - x * X.Dp[0][0]) * X.Nminus[0] - x * (p1 * Dx + X.Dp[0][1]) * X.Nminus[1]) /
               ((1 - x) * Dx * Dx) +
           Y.Ndag[0] / ((1 - y) * Dy) - 1;
    n[1] = (-x * (p1 * Dx + X.Dp[1][0]) * X.Nminus[0] + ((1 - p0 * x) * Dx - x * X.Dp[1][1]) * X.Nminus[1]) /
               ((1 - x) * Dx * Dx) +
           Y.Ndag[1] / ((1 - y) * Dy) - 1;
    {
        const double adj[2][2] = {{md[1][1], -md[0][1]}, {-md[1][0], md[0][0]}};
        res.k = detail::apply2(adj, Dx * Dy / detail::det2(md), n);
        double pr[2][2];
        pr[0][0] = (1 - p0 * x) * Dx * Dy - x * Dy * X.Dp[1][1] - y * Dx * Y.Dm[1][1];
        pr[0][1] = p1 * x * Dx * Dy + x * Dy * X.Dp[0][1] + y * Dx * Y.Dm[0][1];
        pr[1][0] = p1 * x * Dx * Dy + x * Dy * X.Dp[1][0] + y * Dx * Y.Dm[1][0];
        pr[1][1] = (1 - p0 * x) * Dx * Dy - x * Dy * X.Dp[0][0] - y * Dx * Y.Dm[0][0];
        res.k_inverse_as_printed = detail::apply2(pr, Dx * Dy / detail::det2(pr), n);
    }

    // D-tilde scaled by delta(x) delta(y) Delta(x) Delta(y); f is the factor on
    // the D-tilde+- terms (1 for the renewal kernel, varpi as displayed)
    const double sc = dx * dy * Dx * Dy;
    auto tilde = [&](double f, bool printed) {
        auto bx = [&](int i, int j) { return f * x / (dx * Dx) * X.Dtp[i][j]; };
        auto by = [&](int i, int j) { return f * y / (dy * Dy) * Y.Dtm[i][j]; };
        auto rx = [&](int k) { return vp + x / ((1 - x) * Dx) * X.Ntp[k]; };
        auto ry = [&](int k) { return vp + y / ((1 - y) * Dy) * Y.Ntm[k]; };
        double nt[2];
        nt[0] = (1 - bx(0, 0)) * rx(0) - bx(0, 1) * rx(1) + (1 - by(0, 0)) * ry(0) - by(0, 1) * ry(1) - vp;
        nt[1] = -bx(1, 0) * rx(0) + (1 - bx(1, 1)) * rx(1) - by(1, 0) * ry(0) + (1 - by(1, 1)) * ry(1) - vp;
        if (!printed) {
            double mt[2][2];
            for (int i = 0; i < 2; ++i) {
                for (int j = 0; j < 2; ++j) {
                    mt[i][j] = (i == j ? sc : 0.0) - f * x * dy * Dy * X.Dtp[i][j] - f * y * dx * Dx * Y.Dtm[i][j];
                }
            }
            const double adj[2][2] = {{mt[1][1], -mt[0][1]}, {-mt[1][0], mt[0][0]}};
            return detail::apply2(adj, sc / detail::det2(mt), nt);
        }
        double pr[2][2];
        pr[0][0] = sc - f * x * dy * Dy * X.Dtp[0][0] - f * y * dx * Dx * Y.Dtm[0][0];
        pr[0][1] = f * x * dy * Dy * X.Dtp[1][0] + f * y * dx * Dx * Y.Dtm[1][0];
        pr[1][0] = f * x * dy * Dy * X.Dtp01_as_printed + f * y * dx * Dx * Y.Dtm[0][1];
        pr[1][1] = sc - f * x * dy * Dy * X.Dtp[1][1] - f * y * dx * Dx * Y.Dtm[1][1];
        return detail::apply2(pr, sc / detail::det2(pr), nt);
    };
    res.ktilde = tilde(1.0, false);
    res.ktilde_varpi_factor = tilde(vp, false);
    res.ktilde_inverse_as_printed = tilde(vp, true);
    return res;
}

// ---------------------------------------------------------------------------
// Symmetric example families.

namespace detail {

inline Rational binom(int n, int k)
{
    mpz_class r;
    mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return Rational(r);
}

inline Rational rpow(const Rational& b, int e)
{
    Rational r = 1;
    for (int k = 0; k < e; ++k) r *= b;
    return r;
}

inline JumpDistribution<Rational> symmetric_from(int M, const std::vector<Rational>& side, const Rational& p0)
{
    std::vector<Rational> probs(static_cast<std::size_t>(2 * M) + 1);
    probs[static_cast<std::size_t>(M)] = p0;
    for (int i = 1; i <= M; ++i) {
        probs[static_cast<std::size_t>(M + i)] = side[static_cast<std::size_t>(i - 1)];
        probs[static_cast<std::size_t>(M - i)] = side[static_cast<std::size_t>(i - 1)];
    }
    return JumpDistribution<Rational>(M, M, std::move(probs));
}

}  // namespace detail

/// pi_i = c C(2M, i+M) for i != 0, pi_0 = 1 - c (4^M - C(2M,M)).
inline JumpDistribution<Rational> binomial_family(int M, const Rational& c)
{
    std::vector<Rational> side;
    for (int i = 1; i <= M; ++i) side.push_back(c * detail::binom(2 * M, i + M));
    const Rational p0 = 1 - c * (detail::rpow(4, M) - detail::binom(2 * M, M));
    return detail::symmetric_from(M, side, p0);
}

/// pi_i = c rho^|i| C(M,|i|) for i != 0, pi_0 = 1 - 2c((rho+1)^M - 1).
inline JumpDistribution<Rational> rho_binomial_family(int M, const Rational& rho, const Rational& c)
{
    std::vector<Rational> side;
    for (int i = 1; i <= M; ++i) side.push_back(c * detail::rpow(rho, i) * detail::binom(M, i));
    const Rational p0 = 1 - 2 * c * (detail::rpow(rho + 1, M) - 1);
    return detail::symmetric_from(M, side, p0);
}

/// pi_i = c for 0 < |i| <= M, pi_0 = 1 - 2Mc.
inline JumpDistribution<Rational> uniform_family(int M, const Rational& c)
{
    std::vector<Rational> side(static_cast<std::size_t>(M), c);
    const Rational p0 = 1 - 2 * M * c;
    return detail::symmetric_from(M, side, p0);
}

}  // namespace sojourn
