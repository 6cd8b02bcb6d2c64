#pragma once

// Generating-function engine for finite chains: Green kernel, entrance
// ladders, and the linear systems for K_i(x,y) and K~_i(x,y). Every routine
// is generic over the coefficient ring, so the same code runs on truncated
// series (exact coefficient extraction) and at numeric points.

#include "chain.hpp"
#include "series.hpp"

#include <optional>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace sojourn {

/// Bivariate context over truncated series: x and y are both the series
/// variable of order N, lifted to Series2 on demand.
template <typename S>
struct SeriesContext {
    using scalar = S;
    using uni = Series1<S>;
    using bi = Series2<S>;
    int order;

    explicit SeriesContext(int n) : order(n)
    {
        if (n < 0) throw std::invalid_argument("series order must be nonnegative");
    }
    uni x() const { return uni::variable(order); }
    uni y() const { return uni::variable(order); }
    bool shared_xy() const { return true; }
    bi from_x(const uni& f) const { return bi::lift_x(f); }
    bi from_y(const uni& f) const { return bi::lift_y(f); }
    bi x_over_y(const uni& f_of_y) const { return bi::x_over_y(f_of_y); }
    bi constant(const S& v) const { return bi::constant(order, v); }
};

/// Bivariate context at a numeric point (x, y).
template <typename S>
struct PointContext {
    using scalar = S;
    using uni = S;
    using bi = S;
    S px;
    S py;

    PointContext(S x_, S y_) : px(x_), py(y_) {}
    uni x() const { return px; }
    uni y() const { return py; }
    bool shared_xy() const { return false; }
    bi from_x(const uni& f) const { return f; }
    bi from_y(const uni& f) const { return f; }
    bi x_over_y(const uni& f_of_y) const
    {
        if (scalar_traits<S>::is_zero(py)) throw std::invalid_argument("x/y term needs y != 0");
        return px / py * f_of_y;
    }
    bi constant(const S& v) const { return v; }
};

namespace detail {

template <typename U>
U lift_scalar(const U& proto, const typename ring_traits<U>::scalar& v)
{
    return ring_traits<U>::from_scalar_like(proto, v);
}

}  // namespace detail

/// G = (I - xP)^{-1}; G_ij(x) = sum_m P_i{X_m = j} x^m.
template <typename S, typename U>
Matrix<U> green(const FiniteChain<S>& chain, const U& x)
{
    static_assert(std::is_same_v<typename ring_traits<U>::scalar, S>, "ring scalar must match chain scalar");
    using R = ring_traits<U>;
    const std::size_t n = chain.size();
    if constexpr (R::is_series) {
        // backward Kolmogorov recursion, coefficient by coefficient
        const int order = x.order();
        std::vector<std::vector<S>> power(n, std::vector<S>(n, scalar_traits<S>::zero()));
        for (std::size_t i = 0; i < n; ++i) power[i][i] = scalar_traits<S>::one();
        Matrix<U> g(n, n, R::zero_like(x));
        for (int m = 0; m <= order; ++m) {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) g(i, j)[m] = power[i][j];
            if (m == order) break;
            std::vector<std::vector<S>> next(n, std::vector<S>(n, scalar_traits<S>::zero()));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t k = 0; k < n; ++k) {
                    const S& pik = chain.p(i, k);
                    if (scalar_traits<S>::is_zero(pik)) continue;
                    for (std::size_t j = 0; j < n; ++j) next[i][j] += pik * power[k][j];
                }
            power = std::move(next);
        }
        return g;
    } else {
        Matrix<U> a = Matrix<U>::identity(n, x);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) a(i, j) -= x * chain.p(i, j);
        return invert_matrix(a);
    }
}

/// G_i = sum_{j in F} G_ij.
template <typename U>
std::vector<U> green_rows(const Matrix<U>& g, const TargetSet& target)
{
    std::vector<U> out(g.rows(), ring_traits<U>::zero_like(g(0, 0)));
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j)
            if (target.contains(static_cast<long>(j))) out[i] += g(i, j);
    return out;
}

enum class EntranceTarget { circ, dag, plus, minus };

inline bool in_target(EntranceTarget t, const Partition& part, std::size_t j)
{
    switch (t) {
    case EntranceTarget::circ: return part.in_circ(j);
    case EntranceTarget::dag: return part.in_dag(j);
    case EntranceTarget::plus: return part.in_plus(j);
    case EntranceTarget::minus: return part.in_minus(j);
    }
    return false;
}

/// Entrance generating functions H^u_ij(x) for j in the target set u, from
/// sum_{k in u} H_ik G_kj = G_ij - delta_ij (j in u). Columns outside u are zero.
template <typename U>
Matrix<U> entrance_gf(const Matrix<U>& g, const Partition& part, EntranceTarget target)
{
    using R = ring_traits<U>;
    const std::size_t n = g.rows();
    const U zero = R::zero_like(g(0, 0));
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < n; ++j)
        if (in_target(target, part, j)) cols.push_back(j);
    Matrix<U> h(n, n, zero);
    if (cols.empty()) return h;
    const std::size_t t = cols.size();
    // transposed system: G_TT^T H^T = (G_{.T} - E)^T
    Matrix<U> a(t, t, zero);
    Matrix<U> rhs(t, n, zero);
    for (std::size_t p = 0; p < t; ++p) {
        for (std::size_t q = 0; q < t; ++q) a(p, q) = g(cols[q], cols[p]);
        for (std::size_t i = 0; i < n; ++i) {
            rhs(p, i) = g(i, cols[p]);
            if (i == cols[p]) rhs(p, i) -= R::one_like(zero);
        }
    }
    Matrix<U> sol = solve_linear(std::move(a), std::move(rhs));
    for (std::size_t p = 0; p < t; ++p)
        for (std::size_t i = 0; i < n; ++i) h(i, cols[p]) = sol(p, i);
    return h;
}

/// H† expressed through H°: H° on E- rows, p_ij x on E+ rows, x(p_ij + sum_{k in E-} p_ik H°_kj) on E° rows.
template <typename S, typename U>
Matrix<U> h_dag_from_h_circ(const FiniteChain<S>& chain, const Partition& part, const Matrix<U>& h_circ, const U& x)
{
    const std::size_t n = chain.size();
    const U zero = ring_traits<U>::zero_like(x);
    Matrix<U> h(n, n, zero);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (!part.in_dag(j)) continue;
            if (part.in_minus(i)) {
                h(i, j) = h_circ(i, j);
            } else if (part.in_plus(i)) {
                h(i, j) = x * chain.p(i, j);
            } else {
                U acc = detail::lift_scalar(x, chain.p(i, j));
                for (std::size_t k = 0; k < n; ++k) {
                    if (part.in_minus(k) && !scalar_traits<S>::is_zero(chain.p(i, k))) acc += h_circ(k, j) * chain.p(i, k);
                }
                h(i, j) = x * acc;
            }
        }
    }
    return h;
}

template <typename U>
struct CircSplit {
    Matrix<U> dag;    // H°†: first step into E†
    Matrix<U> plus;   // H°+: first step into E+
    Matrix<U> minus;  // H°-: first step into E-
};

template <typename S, typename U>
CircSplit<U> h_circ_split(const FiniteChain<S>& chain, const Partition& part, const Matrix<U>& h_circ, const U& x)
{
    const std::size_t n = chain.size();
    const U zero = ring_traits<U>::zero_like(x);
    CircSplit<U> out{Matrix<U>(n, n, zero), Matrix<U>(n, n, zero), Matrix<U>(n, n, zero)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (!part.in_circ(j)) continue;
            U via_plus = zero;
            U via_minus = zero;
            for (std::size_t k = 0; k < n; ++k) {
                const S& pik = chain.p(i, k);
                if (scalar_traits<S>::is_zero(pik)) continue;
                if (part.in_plus(k)) via_plus += h_circ(k, j) * pik;
                if (part.in_minus(k)) via_minus += h_circ(k, j) * pik;
            }
            out.plus(i, j) = x * via_plus;
            out.minus(i, j) = x * via_minus;
            out.dag(i, j) = x * (detail::lift_scalar(x, chain.p(i, j)) + via_plus);
        }
    }
    return out;
}

template <typename U>
struct ExitLadder {
    Matrix<U> h_exit;           // H^±_ij, i,j in E° (exponent tau± - 1)
    Matrix<U> ht_plus;          // H~^{±+}
    Matrix<U> ht_minus;         // H~^{±-}
    Matrix<U> stay;             // (I - x P_{E°E°})^{-1}: E_i x^k 1{X_1..X_k in E°, X_k = j}
    Matrix<U> rt_plus;          // H°+ stay, the renewal kernel of the K~ system
    Matrix<U> rt_minus;         // H°- stay
    Matrix<U> h_minus_plus;     // H^{-+}_ij, i in E°, j in E-
    Matrix<U> h_plus_minus;     // H^{+-}_ij, i in E°, j in E+
    std::vector<U> g_plus;      // G^+_i
    std::vector<U> g_minus;     // G^-_i
};

/// All generating functions evaluated at one argument (a series variable or a number).
template <typename U>
struct Ladder {
    U x;
    Matrix<U> g;
    std::vector<U> g_rows;
    Matrix<U> h_circ;
    Matrix<U> h_dag;
    Matrix<U> h_plus;
    Matrix<U> h_minus;
    CircSplit<U> split;
    std::optional<ExitLadder<U>> exit;
};

template <typename S, typename U>
ExitLadder<U> exit_ladder(const FiniteChain<S>& chain, const Partition& part, const TargetSet& target,
                          const Ladder<U>& lad)
{
    using R = ring_traits<U>;
    const std::size_t n = chain.size();
    const U& x = lad.x;
    const U zero = R::zero_like(x);
    const auto circ = part.e_circ();
    const std::size_t c = circ.size();

    ExitLadder<U> out{Matrix<U>(n, n, zero), Matrix<U>(n, n, zero), Matrix<U>(n, n, zero),
                      Matrix<U>(n, n, zero), Matrix<U>(n, n, zero), Matrix<U>(n, n, zero),
                      Matrix<U>(n, n, zero), Matrix<U>(n, n, zero), std::vector<U>(n, zero),
                      std::vector<U>(n, zero)};
    if (c > 0) {
        // (I - x P_{E°E°}) H^± = diag(varpi)
        Matrix<U> a = Matrix<U>::identity(c, x);
        Matrix<U> rhs(c, c, zero);
        for (std::size_t p = 0; p < c; ++p) {
            for (std::size_t q = 0; q < c; ++q) a(p, q) -= x * chain.p(circ[p], circ[q]);
            rhs(p, p) = detail::lift_scalar(x, varpi(chain, part, circ[p]));
        }
        Matrix<U> st = invert_matrix(a);
        Matrix<U> hx = st * rhs;
        for (std::size_t p = 0; p < c; ++p) {
            for (std::size_t q = 0; q < c; ++q) {
                out.h_exit(circ[p], circ[q]) = hx(p, q);
                out.stay(circ[p], circ[q]) = st(p, q);
            }
        }
    }
    for (std::size_t i : circ) {
        for (std::size_t j : circ) {
            U tp = zero;
            U tm = zero;
            U rp = zero;
            U rm = zero;
            for (std::size_t k : circ) {
                tp += lad.split.plus(i, k) * out.h_exit(k, j);
                tm += lad.split.minus(i, k) * out.h_exit(k, j);
                rp += lad.split.plus(i, k) * out.stay(k, j);
                rm += lad.split.minus(i, k) * out.stay(k, j);
            }
            out.ht_plus(i, j) = tp;
            out.ht_minus(i, j) = tm;
            out.rt_plus(i, j) = rp;
            out.rt_minus(i, j) = rm;
        }
        for (std::size_t j = 0; j < n; ++j) {
            U mp = zero;
            U pm = zero;
            for (std::size_t k = 0; k < n; ++k) {
                const S& pik = chain.p(i, k);
                if (scalar_traits<S>::is_zero(pik)) continue;
                if (part.in_minus(j) && part.in_plus(k)) mp += lad.h_minus(k, j) * pik;
                if (part.in_plus(j) && part.in_minus(k)) pm += lad.h_plus(k, j) * pik;
            }
            out.h_minus_plus(i, j) = x * mp;
            out.h_plus_minus(i, j) = x * pm;
        }
        S to_plus = scalar_traits<S>::zero();
        S to_minus = scalar_traits<S>::zero();
        U sum_plus = zero;
        U sum_minus = zero;
        for (std::size_t j = 0; j < n; ++j) {
            const S& pij = chain.p(i, j);
            if (scalar_traits<S>::is_zero(pij)) continue;
            if (part.in_plus(j)) {
                to_plus += pij;
                sum_plus += lad.g_rows[j] * pij;
            } else if (part.in_minus(j)) {
                to_minus += pij;
                sum_minus += lad.g_rows[j] * pij;
            }
        }
        const bool fi = target.contains(static_cast<long>(i));
        out.g_plus[i] = x * sum_plus + detail::lift_scalar(x, fi ? to_plus : scalar_traits<S>::zero());
        out.g_minus[i] = x * sum_minus + detail::lift_scalar(x, fi ? to_minus : scalar_traits<S>::zero());
    }
    return out;
}

template <typename S, typename U>
Ladder<U> build_ladder(const FiniteChain<S>& chain, const Partition& part, const TargetSet& target, const U& x,
                       bool with_exit)
{
    Ladder<U> lad{x, green(chain, x), {}, {}, {}, {}, {}, {}, std::nullopt};
    lad.g_rows = green_rows(lad.g, target);
    lad.h_circ = entrance_gf(lad.g, part, EntranceTarget::circ);
    lad.h_dag = h_dag_from_h_circ(chain, part, lad.h_circ, x);
    lad.h_plus = entrance_gf(lad.g, part, EntranceTarget::plus);
    lad.h_minus = entrance_gf(lad.g, part, EntranceTarget::minus);
    lad.split = h_circ_split(chain, part, lad.h_circ, x);
    if (with_exit) lad.exit = exit_ladder(chain, part, target, lad);
    return lad;
}

template <typename B, typename U>
struct KSurface {
    std::vector<std::optional<B>> k;   // K_i(x,y) per state (unset when not computed)
    std::vector<std::optional<U>> at_y0;  // K_i(x,0)
    std::vector<std::optional<U>> at_x0;  // K_i(0,y)

    const B& at(std::size_t i) const
    {
        if (i >= k.size() || !k[i]) throw std::invalid_argument("no generating function for this start");
        return *k[i];
    }
};

/// K_i(x,0) = G_i(x) - sum_{j in E-} H-_ij(x) G_j(x).
template <typename U>
std::vector<U> k_boundary_x(const Ladder<U>& lx, const Partition& part)
{
    const std::size_t n = lx.g.rows();
    std::vector<U> out(lx.g_rows);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (part.in_minus(j)) out[i] -= lx.h_minus(i, j) * lx.g_rows[j];
    return out;
}

/// K_i(0,y) = G_i(y) - sum_{j in E†} H†_ij(y) G_j(y).
template <typename U>
std::vector<U> k_boundary_y(const Ladder<U>& ly, const Partition& part)
{
    const std::size_t n = ly.g.rows();
    std::vector<U> out(ly.g_rows);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (part.in_dag(j)) out[i] -= ly.h_dag(i, j) * ly.g_rows[j];
    return out;
}

namespace detail {

template <typename Ctx, typename S>
void require_matching(const FiniteChain<S>&)
{
    static_assert(std::is_same_v<typename Ctx::scalar, S>, "context scalar must match chain scalar");
}

}  // namespace detail

/// K_i(x,y) for every state: the E° system, then the extension to E+ and E-.
template <typename S, typename Ctx>
KSurface<typename Ctx::bi, typename Ctx::uni> k_solve(const FiniteChain<S>& chain, const Partition& part,
                                                      const TargetSet& target, const Ctx& ctx)
{
    detail::require_matching<Ctx>(chain);
    require_assumptions(chain, part);
    using U = typename Ctx::uni;
    using B = typename Ctx::bi;
    const std::size_t n = chain.size();
    const Ladder<U> lx = build_ladder(chain, part, target, ctx.x(), false);
    const Ladder<U> ly_own = ctx.shared_xy() ? Ladder<U>{} : build_ladder(chain, part, target, ctx.y(), false);
    const Ladder<U>& ly = ctx.shared_xy() ? lx : ly_own;

    KSurface<B, U> surf;
    surf.k.resize(n);
    surf.at_y0.resize(n);
    surf.at_x0.resize(n);
    const auto kx0 = k_boundary_x(lx, part);
    const auto k0y = k_boundary_y(ly, part);
    for (std::size_t i = 0; i < n; ++i) {
        surf.at_y0[i] = kx0[i];
        surf.at_x0[i] = k0y[i];
    }

    const auto circ = part.e_circ();
    const std::size_t c = circ.size();
    const B bzero = ring_traits<B>::zero_like(ctx.from_x(kx0[0]));
    const B bone = ring_traits<B>::one_like(bzero);
    std::vector<B> kc(c, bzero);
    if (c > 0) {
        Matrix<B> a = Matrix<B>::identity(c, bzero);
        Matrix<B> rhs(c, 1, bzero);
        for (std::size_t p = 0; p < c; ++p) {
            const std::size_t i = circ[p];
            B r = ctx.from_x(kx0[i]) + ctx.from_y(k0y[i]);
            if (target.contains(static_cast<long>(i))) r -= bone;
            for (std::size_t q = 0; q < c; ++q) {
                const std::size_t j = circ[q];
                const B hd = ctx.from_x(lx.split.dag(i, j));
                a(p, q) -= hd + ctx.x_over_y(ly.split.minus(i, j));
                r -= hd * ctx.from_x(kx0[j]);
            }
            rhs(p, 0) = r;
        }
        Matrix<B> sol = solve_linear(std::move(a), std::move(rhs));
        for (std::size_t p = 0; p < c; ++p) kc[p] = sol(p, 0);
        for (std::size_t p = 0; p < c; ++p) surf.k[circ[p]] = kc[p];
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (part.in_circ(i)) continue;
        if (part.in_plus(i)) {
            B v = ctx.from_x(lx.g_rows[i]);
            for (std::size_t q = 0; q < c; ++q) {
                const std::size_t j = circ[q];
                const B h = ctx.from_x(lx.h_circ(i, j));
                v += h * (kc[q] - ctx.from_x(lx.g_rows[j]));
            }
            surf.k[i] = v;
        } else {
            B v = ctx.from_y(ly.g_rows[i]);
            for (std::size_t q = 0; q < c; ++q) {
                const std::size_t j = circ[q];
                v -= ctx.from_y(ly.h_circ(i, j) * ly.g_rows[j]);
                v += ctx.x_over_y(ly.h_circ(i, j)) * kc[q];
            }
            surf.k[i] = v;
        }
    }
    return surf;
}

/// K~_i(x,y) for i in E°: P_i{X_1 in E±, T~_n = m, X_n in F}.
template <typename S, typename Ctx>
KSurface<typename Ctx::bi, typename Ctx::uni> ktilde_solve(const FiniteChain<S>& chain, const Partition& part,
                                                           const TargetSet& target, const Ctx& ctx)
{
    detail::require_matching<Ctx>(chain);
    require_assumptions(chain, part);
    using U = typename Ctx::uni;
    using B = typename Ctx::bi;
    const std::size_t n = chain.size();
    const Ladder<U> lx = build_ladder(chain, part, target, ctx.x(), true);
    const Ladder<U> ly_own = ctx.shared_xy() ? Ladder<U>{} : build_ladder(chain, part, target, ctx.y(), true);
    const Ladder<U>& ly = ctx.shared_xy() ? lx : ly_own;
    const ExitLadder<U>& ex = *lx.exit;
    const ExitLadder<U>& ey = *ly.exit;

    KSurface<B, U> surf;
    surf.k.resize(n);
    surf.at_y0.resize(n);
    surf.at_x0.resize(n);
    const auto circ = part.e_circ();
    const std::size_t c = circ.size();
    if (c == 0) return surf;

    for (std::size_t i : circ) {
        S to_plus = scalar_traits<S>::zero();
        S to_minus = scalar_traits<S>::zero();
        for (std::size_t j = 0; j < n; ++j) {
            if (part.in_plus(j)) to_plus += chain.p(i, j);
            if (part.in_minus(j)) to_minus += chain.p(i, j);
        }
        const bool fi = target.contains(static_cast<long>(i));
        U bx = ex.g_plus[i];
        U by = ey.g_minus[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (part.in_minus(j)) bx -= ex.h_minus_plus(i, j) * lx.g_rows[j];
            if (part.in_plus(j)) by -= ey.h_plus_minus(i, j) * ly.g_rows[j];
        }
        if (fi) {
            bx += detail::lift_scalar(lx.x, to_minus);
            by += detail::lift_scalar(ly.x, to_plus);
        }
        surf.at_y0[i] = bx;
        surf.at_x0[i] = by;
    }

    const B bzero = ring_traits<B>::zero_like(ctx.from_x(*surf.at_y0[circ[0]]));
    Matrix<B> a = Matrix<B>::identity(c, bzero);
    Matrix<B> rhs(c, 1, bzero);
    for (std::size_t p = 0; p < c; ++p) {
        const std::size_t i = circ[p];
        B r = ctx.from_x(*surf.at_y0[i]) + ctx.from_y(*surf.at_x0[i]);
        if (target.contains(static_cast<long>(i))) r -= ctx.constant(varpi(chain, part, i));
        for (std::size_t q = 0; q < c; ++q) {
            const std::size_t j = circ[q];
            // X_{tau~ - 1} = j is not a stopping event: the restart at j
            // already carries P_j{X_1 in E±}, so the kernel omits it
            const B hp = ctx.from_x(ex.rt_plus(i, j));
            const B hm = ctx.from_y(ey.rt_minus(i, j));
            a(p, q) -= hp + hm;
            r -= hp * ctx.from_x(*surf.at_y0[j]);
            r -= hm * ctx.from_y(*surf.at_x0[j]);
        }
        rhs(p, 0) = r;
    }
    Matrix<B> sol = solve_linear(std::move(a), std::move(rhs));
    for (std::size_t p = 0; p < c; ++p) surf.k[circ[p]] = sol(p, 0);
    return surf;
}

/// K~ for one start, refusing starts outside E°.
template <typename S, typename Ctx>
typename Ctx::bi ktilde_for(const FiniteChain<S>& chain, const Partition& part, const TargetSet& target,
                            std::size_t start, const Ctx& ctx)
{
    if (start >= chain.size() || !part.in_circ(start)) {
        throw std::invalid_argument("K~ is defined for starts X_0 in E0 only");
    }
    return ktilde_solve(chain, part, target, ctx).at(start);
}

/// Row n of a bivariate series as a probability vector over m.
template <typename S>
std::vector<S> distribution_row(const Series2<S>& k, int n)
{
    return k.slice_n(n);
}

}  // namespace sojourn
