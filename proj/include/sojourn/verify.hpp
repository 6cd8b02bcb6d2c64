#pragma once

// Acceptance suite: one result per criterion, run in a worker pool and
// merged in criterion order.

#include "chain.hpp"
#include "closedform.hpp"
#include "erratum.hpp"
#include "genfun.hpp"
#include "lrwalk.hpp"
#include "oracle.hpp"
#include "scalar.hpp"
#include "series.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace sojourn {

enum class Suite { quick, full };

inline const char* to_string(Suite s) { return s == Suite::quick ? "quick" : "full"; }

struct VerifyOptions {
    Suite suite = Suite::full;
    bool tamper_oracle = false;  // harness sanity: perturbs every oracle value at (n,m) = (2,1)
    unsigned jobs = 0;           // 0: hardware concurrency
    std::uint64_t seed = 0;
};

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail;
    double seconds = 0;
};

struct VerifyReport {
    Suite suite = Suite::full;
    std::vector<CriterionResult> criteria;
    std::vector<ErratumReport> errata;

    bool all_passed() const
    {
        return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.passed; });
    }
};

namespace verify_detail {

using Q = Rational;

// Float evaluation of a generating function carries its own rounding on top
// of the truncation tail.
inline constexpr double kRoundoffUnits = 8 * std::numeric_limits<double>::epsilon();

class Tally {
public:
    void check(bool ok, const std::string& what)
    {
        ++checks_;
        if (!ok) {
            ++failures_;
            if (first_.empty()) first_ = what;
        }
    }
    void note(const std::string& s)
    {
        if (!notes_.empty()) notes_ += "; ";
        notes_ += s;
    }
    bool ok() const { return failures_ == 0 && checks_ > 0; }
    std::string summary() const
    {
        std::ostringstream out;
        out << checks_ << " checks, " << failures_ << " failed";
        if (!first_.empty()) out << " (first: " << first_ << ")";
        if (!notes_.empty()) out << "; " << notes_;
        return out.str();
    }
    long checks() const { return checks_; }

private:
    long checks_ = 0;
    long failures_ = 0;
    std::string first_;
    std::string notes_;
};

struct Oracle {
    bool tamper = false;

    template <typename S>
    S adjust(S v, int n, int m) const
    {
        if (tamper && n == 2 && m == 1) v += scalar_traits<S>::from_ratio(1, 1000);
        return v;
    }
    template <typename S>
    S prob(const SojournTable<S>& t, int n, int m) const
    {
        return adjust(t.prob(n, m), n, m);
    }
    template <typename S>
    S prob(const WalkSojourn<S>& t, int n, int m) const
    {
        return adjust(t.prob(n, m), n, m);
    }
    /// Entrance laws are perturbed at exponent 1.
    template <typename S>
    S entrance(const EntranceTable<S>& t, int e, std::size_t j) const
    {
        return adjust(t.at(e, j), 2, e);
    }
    template <typename S>
    S joint(const WalkSojourn<S>& t, int n, int m, long state) const
    {
        return adjust(t.joint_at(n, m, state), n, m);
    }
};

inline std::string where(const std::string& tag, int n, int m)
{
    return tag + " n=" + std::to_string(n) + " m=" + std::to_string(m);
}

inline std::string fmt(double v)
{
    std::ostringstream out;
    out.precision(3);
    out << v;
    return out.str();
}

inline JumpDistribution<Q> lr_walk(int L, int R, std::vector<Q> pi) { return JumpDistribution<Q>(L, R, std::move(pi)); }

inline std::vector<JumpDistribution<Q>> lr_walks()
{
    return {
        lr_walk(1, 1, {Q(1, 2), Q(0), Q(1, 2)}),
        lr_walk(1, 1, {Q(1, 5), Q(3, 10), Q(1, 2)}),
        lr_walk(1, 2, {Q(1, 3), Q(1, 3), Q(0), Q(1, 3)}),
        lr_walk(1, 2, {Q(1, 4), Q(1, 4), Q(1, 4), Q(1, 4)}),
        lr_walk(2, 1, {Q(1, 4), Q(1, 8), Q(1, 8), Q(1, 2)}),
        lr_walk(2, 1, {Q(1, 6), Q(1, 3), Q(1, 6), Q(1, 3)}),
        lr_walk(2, 2, {Q(1, 5), Q(1, 5), Q(1, 5), Q(1, 5), Q(1, 5)}),
        lr_walk(2, 2, {Q(1, 10), Q(1, 5), Q(2, 5), Q(1, 5), Q(1, 10)}),
    };
}

inline std::string walk_tag(const JumpDistribution<Q>& j)
{
    std::ostringstream out;
    out << "(" << j.L() << "," << j.R() << ") pi=";
    for (std::size_t k = 0; k < j.probs().size(); ++k) out << (k ? "," : "") << scalar_traits<Q>::format(j.probs()[k]);
    return out.str();
}

/// Numeric K (or K~) against the exact partial sum of the oracle table.
inline void check_partial_sums(Tally& t, const Oracle& oracle, const JumpDistribution<Q>& j, bool tilde,
                               const std::vector<std::pair<double, double>>& points, int N)
{
    const JumpDistribution<double> jd = j.as<double>();
    for (long i = 0; i < j.M(); ++i) {
        const auto table = walk_sojourn_dp(j, i, TargetSet::all(), N,
                                           tilde ? SojournKind::modified : SojournKind::plain, tilde);
        for (const bool origin : {false, true}) {
            const TargetSet F = origin ? TargetSet::finite({0}) : TargetSet::all();
            for (const auto& [x, y] : points) {
                long double partial = 0;
                for (int n = 0; n <= N; ++n) {
                    for (int m = 0; m <= n; ++m) {
                        const Q p = origin ? oracle.joint(table, n, m, 0) : oracle.prob(table, n, m);
                        partial += static_cast<long double>(p.get_d()) * std::pow(static_cast<long double>(x), m) *
                                   std::pow(static_cast<long double>(y), n - m);
                    }
                }
                const double value = (tilde ? ktilde_lr(jd, F, x, y) : k_lr(jd, F, x, y)).at(static_cast<std::size_t>(i));
                const double mx = std::max(x, y);
                const double bound =
                    std::pow(mx, N + 1) / (1 - mx) + kRoundoffUnits * std::max(1.0, std::fabs(value));
                const double diff = std::fabs(value - static_cast<double>(partial));
                t.check(diff <= bound, walk_tag(j) + (tilde ? " K~" : " K") + " i=" + std::to_string(i) +
                                           " F=" + F.describe() + " at (" + fmt(x) + "," + fmt(y) +
                                           ") diff " + fmt(diff) + " > " + fmt(bound));
            }
        }
    }
}

// ---------------------------------------------------------------------------

inline CriterionResult chung_feller(const VerifyOptions& opt)
{
    const Oracle oracle{opt.tamper_oracle};
    const int N = 16;
    const JumpDistribution<Q> b = lr_walk(1, 1, {Q(1, 2), Q(0), Q(1, 2)});
    const auto table = walk_sojourn_dp(b, 0, TargetSet::all(), N, SojournKind::modified);
    const Window<Q> win = horizon_window(b, 0, N + 1);
    const Series2<Q> gen =
        ktilde_solve(win.chain, win.partition, win.translate(TargetSet::all()), SeriesContext<Q>(N)).at(win.index_of(0));
    const Series2<Q> lr = ktilde_lr_series(b, TargetSet::all(), N).at(0);
    Tally t;
    for (int n = 0; n <= N; n += 2) {
        for (int m = 0; m <= n; ++m) {
            const Q o = oracle.prob(table, n, m);
            t.check(gen.coeff(m, n - m) == o, where("genfun vs oracle", n, m));
            t.check(lr.coeff(m, n - m) == o, where("lrwalk vs oracle", n, m));
            if (m % 2 == 0) {
                const Q f = detail::binom(m, m / 2) * detail::binom(n - m, (n - m) / 2) / detail::rpow(Q(2), n);
                t.check(o == f, where("oracle vs 2^-n C(m,m/2) C(n-m,(n-m)/2)", n, m));
            }
        }
    }
    return {1, "Chung-Feller exactness", t.ok(), t.summary()};
}

inline CriterionResult conditional_uniformity(const VerifyOptions& opt)
{
    const Oracle oracle{opt.tamper_oracle};
    const int N = 16;
    const JumpDistribution<Q> b = lr_walk(1, 1, {Q(1, 2), Q(0), Q(1, 2)});
    const TargetSet F = TargetSet::finite({0});
    const auto table = walk_sojourn_dp(b, 0, F, N, SojournKind::modified);
    const Window<Q> win = horizon_window(b, 0, N + 1);
    const Series2<Q> gen = ktilde_solve(win.chain, win.partition, win.translate(F), SeriesContext<Q>(N)).at(win.index_of(0));
    const Series2<Q> lr = ktilde_lr_series(b, F, N).at(0);
    Tally t;
    for (int n = 0; n <= N; n += 2) {
        const Q first = oracle.prob(table, n, 0);
        for (int m = 0; m <= n; m += 2) {
            const Q o = oracle.prob(table, n, m);
            t.check(o == first, where("P{T~=m, X=0} not constant over even m", n, m));
            t.check(gen.coeff(m, n - m) == o, where("genfun vs oracle", n, m));
            t.check(lr.coeff(m, n - m) == o, where("lrwalk vs oracle", n, m));
        }
    }
    const Q v4 = oracle.prob(table, 4, 2);
    t.check(v4 == Q(1, 8), "n=4 joint value is " + scalar_traits<Q>::format(v4) + ", expected 1/8");
    t.note("n=4 joint value " + scalar_traits<Q>::format(v4));
    return {2, "Conditional uniformity", t.ok(), t.summary()};
}

/// Random chain with a partition satisfying the one-step boundary assumptions.
inline std::pair<FiniteChain<Q>, Partition> random_chain(std::mt19937_64& rng)
{
    const std::size_t n = 5 + static_cast<std::size_t>(rng() % 4);
    std::vector<StateClass> classes(n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    const StateClass kinds[3] = {StateClass::minus, StateClass::circ, StateClass::plus};
    for (std::size_t k = 0; k < n; ++k) classes[order[k]] = k < 3 ? kinds[k] : kinds[rng() % 3];
    const Partition part(classes);
    std::vector<std::vector<Q>> p(n, std::vector<Q>(n, Q(0)));
    for (std::size_t i = 0; i < n; ++i) {
        long total = 0;
        std::vector<long> w(n, 0);
        for (std::size_t j = 0; j < n; ++j) {
            const bool forbidden = (part.in_minus(i) && part.in_plus(j)) || (part.in_plus(i) && part.in_minus(j));
            if (forbidden) continue;
            w[j] = static_cast<long>(rng() % 5);
            total += w[j];
        }
        if (total == 0) {
            w[i] = 1;
            total = 1;
        }
        for (std::size_t j = 0; j < n; ++j) {
            p[i][j] = Q(w[j], total);
            p[i][j].canonicalize();
        }
    }
    return {FiniteChain<Q>(std::move(p)), part};
}

inline CriterionResult random_chains(const VerifyOptions& opt)
{
    const Oracle oracle{opt.tamper_oracle};
    const int count = opt.suite == Suite::full ? 50 : 12;
    const int N = opt.suite == Suite::full ? 12 : 8;
    std::mt19937_64 rng(opt.seed + 0x5eed);
    Tally t;
    for (int c = 0; c < count; ++c) {
        const auto [chain, part] = random_chain(rng);
        const std::size_t single = static_cast<std::size_t>(rng() % chain.size());
        for (const TargetSet& F : {TargetSet::all(), TargetSet::finite({static_cast<long>(single)})}) {
            const auto plain = k_solve(chain, part, F, SeriesContext<Q>(N));
            const auto tilde = ktilde_solve(chain, part, F, SeriesContext<Q>(N));
            for (std::size_t i = 0; i < chain.size(); ++i) {
                const std::string tag = "chain " + std::to_string(c) + " start " + std::to_string(i) + " F=" + F.describe();
                const auto op = sojourn_dp(chain, part, i, F, N, SojournKind::plain);
                const Series2<Q>& kp = plain.at(i);
                for (int n = 0; n <= N; ++n)
                    for (int m = 0; m <= n; ++m) t.check(kp.coeff(m, n - m) == oracle.prob(op, n, m), where(tag + " K", n, m));
                if (!part.in_circ(i)) continue;
                const auto ot = sojourn_dp(chain, part, i, F, N, SojournKind::modified, true);
                const Series2<Q>& kt = tilde.at(i);
                for (int n = 0; n <= N; ++n)
                    for (int m = 0; m <= n; ++m) t.check(kt.coeff(m, n - m) == oracle.prob(ot, n, m), where(tag + " K~", n, m));
            }
        }
    }
    t.note(std::to_string(count) + " chains, n <= " + std::to_string(N));
    return {3, "Oracle equivalence, general chains", t.ok(), t.summary()};
}

inline CriterionResult lr_matrix_theorem(const VerifyOptions& opt)
{
    const Oracle oracle{opt.tamper_oracle};
    const int N = 10;
    const int tail = opt.suite == Suite::full ? 60 : 40;
    const std::vector<std::pair<double, double>> points{{0.2, 0.3}, {0.2, 0.6}, {0.5, 0.3}, {0.5, 0.6}};
    Tally t;
    for (const auto& j : lr_walks()) {
        for (const bool tilde : {false, true}) {
            for (const TargetSet& F : {TargetSet::all(), TargetSet::finite({0})}) {
                const auto ks = tilde ? ktilde_lr_series(j, F, N) : k_lr_series(j, F, N);
                for (long i = 0; i < j.M(); ++i) {
                    const auto o = walk_sojourn_dp(j, i, F, N, tilde ? SojournKind::modified : SojournKind::plain, tilde);
                    const std::string tag = walk_tag(j) + (tilde ? " K~" : " K") + " i=" + std::to_string(i) + " F=" + F.describe();
                    for (int n = 0; n <= N; ++n)
                        for (int m = 0; m <= n; ++m)
                            t.check(ks[static_cast<std::size_t>(i)].coeff(m, n - m) == oracle.prob(o, n, m), where(tag, n, m));
                }
            }
            check_partial_sums(t, oracle, j, tilde, points, tail);
        }
    }
    t.note("partial sums to N=" + std::to_string(tail));
    return {4, "(L,R) matrix theorem", t.ok(), t.summary()};
}

inline CriterionResult plain_closed_forms(const VerifyOptions& opt)
{
    const Oracle oracle{opt.tamper_oracle};
    const int N = 24;
    Tally t;
    const std::vector<OrdinaryWalk<Q>> walks{{Q(1, 2), Q(1, 2), Q(0)}, {Q(1, 2), Q(3, 10), Q(1, 5)}, {Q(1, 5), Q(3, 5), Q(1, 5)}};
    double worst = 0;
    for (const auto& w : walks) {
        for (const OrdinaryTarget target : {OrdinaryTarget::all, OrdinaryTarget::origin}) {
            const Series2<Q> s = k0_closed_series(w, target, N);
            const auto o = walk_sojourn_dp(w.jump(), 0, to_target(target), N, SojournKind::plain);
            for (int n = 0; n <= N; ++n)
                for (int m = 0; m <= n; ++m)
                    t.check(s.coeff(m, n - m) == oracle.prob(o, n, m), where(w.describe() + " F=" + to_string(target), n, m));
        }
        const auto f = k0_factorization_check(w.numeric(), default_grid());
        worst = std::max(worst, f.max_rel_dev);
        t.check(f.points == 81 && f.max_rel_dev <= 1e-10, w.describe() + " factorization deviation " + fmt(f.max_rel_dev));
    }
    t.note("max factorization deviation " + fmt(worst));
    return {5, "Plain closed forms for the ordinary walk", t.ok(), t.summary()};
}

inline std::vector<OrdinaryWalk<Q>> erratum_walks()
{
    return {{Q(1, 2), Q(1, 2), Q(0)},
            {Q(2, 3), Q(1, 3), Q(0)},
            {Q(1, 4), Q(1, 4), Q(1, 2)},
            {Q(1, 2), Q(1, 6), Q(1, 3)}};
}

inline CriterionResult tilde_closed_forms(const VerifyOptions& opt, std::vector<ErratumReport>& reports)
{
    const Oracle oracle{opt.tamper_oracle};
    const int order = opt.suite == Suite::full ? 10 : 6;
    const std::vector<double> grid = default_grid();
    Tally t;
    for (const auto& w : erratum_walks()) {
        const OrdinaryWalk<double> wd = w.numeric();
        const JumpDistribution<double> jd = w.jump().as<double>();
        if (scalar_traits<Q>::is_zero(w.r)) {
            double worst = 0;
            for (double x : grid) {
                for (double y : grid) {
                    const double s = ktilde_lr(jd, TargetSet::all(), x, y).at(0);
                    worst = std::max(worst, std::fabs(ktilde0_corollary(wd, OrdinaryTarget::all, x, y) - s) / std::fabs(s));
                }
            }
            t.check(worst <= 1e-10, w.describe() + " corollary deviation " + fmt(worst));
            t.note(w.describe() + " corollary deviation " + fmt(worst));
        }
        // structural path against the oracle: series exactly, points by partial sums
        const Window<Q> win = horizon_window(w.jump(), 0, order + 1);
        for (const OrdinaryTarget target : {OrdinaryTarget::all, OrdinaryTarget::origin}) {
            const Series2<Q> st = ktilde_solve(win.chain, win.partition, win.translate(to_target(target)), SeriesContext<Q>(order))
                                      .at(win.index_of(0));
            const auto o = walk_sojourn_dp(w.jump(), 0, to_target(target), order, SojournKind::modified, true);
            for (int n = 0; n <= order; ++n)
                for (int m = 0; m <= n; ++m)
                    t.check(st.coeff(m, n - m) == oracle.prob(o, n, m), where(w.describe() + " structural K~", n, m));
        }
        check_partial_sums(t, oracle, w.jump(), true, {{0.3, 0.6}, {0.5, 0.5}}, 60);

        const ErratumReport rep = ktilde0_crosscheck(w, grid, order);
        const ErratumReport again = ktilde0_crosscheck(w, grid, order);
        t.check(to_json(rep).dump() == to_json(again).dump(), w.describe() + " erratum report not reproducible");
        for (const auto& e : rep.entries) {
            if (e.verdict != Verdict::mismatch) continue;
            t.check(std::isfinite(e.structural_value) && std::isfinite(e.printed_value),
                    w.describe() + " " + e.formula_id + " lacks finite values");
        }
        t.check(!rep.entries.empty(), w.describe() + " empty erratum report");
        reports.push_back(rep);
    }
    int mismatches = 0;
    for (const auto& r : reports) mismatches += r.count(Verdict::mismatch);
    t.note(std::to_string(mismatches) + " printed-form mismatches recorded");
    return {6, "K~ corollary and erratum report", t.ok(), t.summary()};
}

inline double quadratic_root_error(const RootSet& rs)
{
    // a2 z^2 + a1 z + a0, stable form
    const double a2 = rs.poly.a[2], a1 = rs.poly.a[1], a0 = rs.poly.a[0];
    const double disc = a1 * a1 - 4 * a2 * a0;
    const double sq = std::sqrt(disc);
    const double qv = -0.5 * (a1 + (a1 >= 0 ? sq : -sq));
    const double r1 = qv / a2, r2 = a0 / qv;
    double err = 0;
    for (double r : {r1, r2}) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& z : rs.roots) best = std::min(best, std::abs(z - cdouble(r)) / std::max(1.0, std::fabs(r)));
        err = std::max(err, best);
    }
    return err;
}

inline double set_distance(const std::vector<cdouble>& a, const std::vector<cdouble>& b)
{
    double worst = 0;
    for (const auto& z : a) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& w : b) best = std::min(best, std::abs(z - w) / std::max(1.0, std::abs(z)));
        worst = std::max(worst, best);
    }
    return worst;
}

inline CriterionResult root_quality(const VerifyOptions&)
{
    Tally t;
    std::vector<JumpDistribution<Q>> walks = lr_walks();
    walks.push_back(lr_walk(3, 1, {Q(1, 10), Q(1, 10), Q(1, 5), Q(1, 5), Q(2, 5)}));
    walks.push_back(uniform_family(3, Q(1, 8)));
    walks.push_back(binomial_family(2, Q(1, 16)));
    double residual = 0, quad = 0, explicit22 = 0, pairs = 0;
    for (const auto& j : walks) {
        const JumpDistribution<double> jd = j.as<double>();
        for (double x : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const RootSet rs = roots(jd, x);
            residual = std::max(residual, rs.max_residual);
            t.check(rs.max_residual <= 1e-10, walk_tag(j) + " residual " + fmt(rs.max_residual));
            if (j.L() == 1 && j.R() == 1) {
                const double e = quadratic_root_error(rs);
                quad = std::max(quad, e);
                t.check(e <= 1e-12, walk_tag(j) + " quadratic mismatch " + fmt(e));
            }
            if (j.symmetric()) {
                const double d = std::max(set_distance(rs.roots, [&] {
                                              std::vector<cdouble> inv;
                                              for (const auto& z : rs.roots) inv.push_back(1.0 / z);
                                              return inv;
                                          }()),
                                          0.0);
                pairs = std::max(pairs, d);
                t.check(d <= 1e-9, walk_tag(j) + " inverse pairs " + fmt(d));
                if (j.L() == 2) {
                    const Sym22Roots er = sym22_roots(sym22_law(jd), x);
                    const std::vector<cdouble> shown{er.z1, er.z2_as_printed, 1.0 / er.z1, 1.0 / er.z2_as_printed};
                    const double e = std::max(set_distance(shown, rs.roots), set_distance(rs.roots, shown));
                    explicit22 = std::max(explicit22, e);
                    t.check(e <= 1e-9, walk_tag(j) + " explicit (2,2) roots " + fmt(e));
                }
            }
        }
    }
    t.note("max residual " + fmt(residual) + ", quadratic " + fmt(quad) + ", explicit (2,2) " + fmt(explicit22) +
           ", inverse pairs " + fmt(pairs));
    return {7, "Root quality", t.ok(), t.summary()};
}

inline CriterionResult two_path_22(const VerifyOptions&)
{
    Tally t;
    const std::vector<std::pair<double, double>> points{{0.2, 0.3}, {0.2, 0.6}, {0.5, 0.3}, {0.5, 0.6},
                                                        {0.7, 0.4}, {0.9, 0.1}, {0.35, 0.85}, {0.6, 0.6}};
    double worst = 0;
    for (const auto& j : {uniform_family(2, Q(1, 5)), lr_walk(2, 2, {Q(1, 10), Q(1, 5), Q(2, 5), Q(1, 5), Q(1, 10)})}) {
        const JumpDistribution<double> jd = j.as<double>();
        for (const auto& [x, y] : points) {
            const Sym22Result ex = symmetric22(jd, TargetSet::all(), x, y);
            const auto k = k_lr(jd, TargetSet::all(), x, y);
            const auto kt = ktilde_lr(jd, TargetSet::all(), x, y);
            for (std::size_t i = 0; i < 2; ++i) {
                const double dk = std::fabs(ex.k[i] - k[i]) / std::fabs(k[i]);
                const double dt = std::fabs(ex.ktilde[i] - kt[i]) / std::fabs(kt[i]);
                worst = std::max({worst, dk, dt});
                t.check(dk <= 1e-9, walk_tag(j) + " K at (" + fmt(x) + "," + fmt(y) + ") " + fmt(dk));
                t.check(dt <= 1e-9, walk_tag(j) + " K~ at (" + fmt(x) + "," + fmt(y) + ") " + fmt(dt));
            }
        }
    }
    t.note("max relative difference " + fmt(worst));
    return {8, "Two-path (2,2) agreement", t.ok(), t.summary()};
}

inline CriterionResult translation_identities(const VerifyOptions& opt)
{
    const Oracle oracle{opt.tamper_oracle};
    const int N = 10;
    Tally t;
    for (const auto& j : {lr_walk(1, 1, {Q(1, 5), Q(3, 10), Q(1, 2)}), lr_walk(1, 2, {Q(1, 4), Q(1, 4), Q(1, 4), Q(1, 4)}),
                          lr_walk(2, 1, {Q(1, 4), Q(1, 8), Q(1, 8), Q(1, 2)}),
                          lr_walk(2, 2, {Q(1, 10), Q(1, 5), Q(2, 5), Q(1, 5), Q(1, 10)})}) {
        const long M = j.M();
        const long span = (N + 4) * M + 2;
        const Window<Q> win = materialize_window(j, -span, span);
        const Matrix<Series1<Q>> g = green(win.chain, Series1<Q>::variable(N));
        const Matrix<Series1<Q>> hp = entrance_gf(g, win.partition, EntranceTarget::plus);
        const Matrix<Series1<Q>> hm = entrance_gf(g, win.partition, EntranceTarget::minus);
        const Matrix<Series1<Q>> hc = entrance_gf(g, win.partition, EntranceTarget::circ);
        auto idx = [&](long s) { return win.index_of(s); };
        for (long i = -2 * M; i <= 2 * M - 1; ++i) {
            for (long jj = -2 * M; jj <= 3 * M - 1; ++jj) {
                const std::string tag = walk_tag(j) + " i=" + std::to_string(i) + " j=" + std::to_string(jj);
                if (i <= M - 1 && jj >= M) {
                    const auto& lhs = hp(idx(i), idx(jj));
                    const auto& rhs = hc(idx(i - M), idx(jj - M));
                    for (int m = 0; m <= N; ++m) t.check(lhs[m] == rhs[m], tag + " H+ m=" + std::to_string(m));
                }
                if (i >= 0 && jj <= -1) {
                    const auto& lhs = hm(idx(i), idx(jj));
                    const auto& rhs = hc(idx(i + M), idx(jj + M));
                    for (int m = 0; m <= N; ++m) t.check(lhs[m] == rhs[m], tag + " H- m=" + std::to_string(m));
                }
            }
        }
        // the entrance laws themselves against the path DP
        for (long i = -M; i <= M - 1; ++i) {
            const auto ep = entrance_dp(win.chain, win.partition, idx(i), EntranceKind::plus, N);
            const auto ec = entrance_dp(win.chain, win.partition, idx(i - M), EntranceKind::circ, N);
            for (long jj = M; jj <= 2 * M - 1; ++jj) {
                for (int m = 0; m <= N; ++m) {
                    t.check(hp(idx(i), idx(jj))[m] == oracle.entrance(ep, m, idx(jj)),
                            walk_tag(j) + " H+ vs entrance DP");
                    t.check(hc(idx(i - M), idx(jj - M))[m] == oracle.entrance(ec, m, idx(jj - M)),
                            walk_tag(j) + " H0 vs entrance DP");
                }
            }
        }
    }
    return {9, "Translation identities for H+ and H-", t.ok(), t.summary()};
}

inline CriterionResult monte_carlo_sanity(const VerifyOptions& opt)
{
    const Oracle oracle{opt.tamper_oracle};
    const int N = 10;
    const std::uint64_t paths = 100000;
    Tally t;
    for (const auto& j : {lr_walk(1, 1, {Q(1, 2), Q(0), Q(1, 2)}), lr_walk(2, 1, {Q(1, 4), Q(1, 8), Q(1, 8), Q(1, 2)})}) {
        const Window<Q> win = horizon_window(j, 0, N);
        const Window<double> wd{win.chain.as<double>(), win.partition, win.lo, win.hi};
        for (const SojournKind kind : {SojournKind::plain, SojournKind::modified}) {
            const auto exact = sojourn_dp(win.chain, win.partition, win.index_of(0), TargetSet::all(), N, kind);
            const auto a = monte_carlo(wd.chain, wd.partition, win.index_of(0), TargetSet::all(), N, kind, paths,
                                       opt.seed, 1);
            const auto b = monte_carlo(wd.chain, wd.partition, win.index_of(0), TargetSet::all(), N, kind, paths,
                                       opt.seed, 4);
            t.check(a.counts == b.counts, walk_tag(j) + " simulation depends on thread count");
            for (int n = 0; n <= N; ++n) {
                for (int m = 0; m <= n; ++m) {
                    const double p = oracle.prob(exact, n, m).get_d();
                    const double band = 3 * std::sqrt(p * (1 - p) / static_cast<double>(paths));
                    const double f = a.freq(n, m);
                    t.check(std::fabs(f - p) <= band, where(walk_tag(j) + " " + to_string(kind) + " outside 3 sigma", n, m));
                }
            }
        }
    }
    t.note("10^5 paths, seed " + std::to_string(opt.seed));
    return {10, "Monte Carlo sanity", t.ok(), t.summary()};
}

}  // namespace verify_detail

inline VerifyReport run_verification(const VerifyOptions& opt = {})
{
    using namespace verify_detail;
    VerifyReport report;
    report.suite = opt.suite;
    std::vector<ErratumReport> errata;
    std::vector<std::function<CriterionResult()>> jobs{
        [&] { return chung_feller(opt); },
        [&] { return conditional_uniformity(opt); },
        [&] { return random_chains(opt); },
        [&] { return lr_matrix_theorem(opt); },
        [&] { return plain_closed_forms(opt); },
        [&] { return tilde_closed_forms(opt, errata); },
        [&] { return root_quality(opt); },
        [&] { return two_path_22(opt); },
        [&] { return translation_identities(opt); },
        [&] { return monte_carlo_sanity(opt); },
    };
    auto timed = [](const std::function<CriterionResult()>& f, int id) {
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = f();
        } catch (const std::exception& e) {
            r.id = id;
            r.title = "criterion " + std::to_string(id);
            r.passed = false;
            r.detail = std::string("exception: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return r;
    };
    unsigned workers = opt.jobs ? opt.jobs : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(jobs.size()));
    std::vector<CriterionResult> results(jobs.size());
    if (workers <= 1) {
        for (std::size_t k = 0; k < jobs.size(); ++k) results[k] = timed(jobs[k], static_cast<int>(k) + 1);
    } else {
        std::vector<std::future<CriterionResult>> futures;
        for (std::size_t k = 0; k < jobs.size(); ++k)
            futures.push_back(std::async(std::launch::async, timed, jobs[k], static_cast<int>(k) + 1));
        for (std::size_t k = 0; k < jobs.size(); ++k) results[k] = futures[k].get();
    }
    report.criteria = std::move(results);
    report.errata = std::move(errata);
    return report;
}

inline std::string format_line(const CriterionResult& c)
{
    std::ostringstream out;
    out << (c.passed ? "PASS" : "FAIL") << " [" << c.id << "] " << c.title << " (" << std::fixed;
    out.precision(2);
    out << c.seconds << " s): " << c.detail;
    return out.str();
}

inline nlohmann::json to_json(const VerifyReport& r)
{
    nlohmann::json crit = nlohmann::json::array();
    for (const auto& c : r.criteria) {
        crit.push_back({{"id", c.id}, {"title", c.title}, {"passed", c.passed}, {"detail", c.detail}, {"seconds", c.seconds}});
    }
    nlohmann::json errata = nlohmann::json::array();
    for (const auto& e : r.errata) errata.push_back(to_json(e));
    return {{"suite", to_string(r.suite)}, {"passed", r.all_passed()}, {"criteria", crit}, {"erratum_reports", errata}};
}

}  // namespace sojourn
