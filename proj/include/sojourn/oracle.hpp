#pragma once

// Exact dynamic programming for the joint laws of (T_n, X_n), (T~_n, X_n)
// and of the entrance times, a path enumerator used to check the counting
// flag, and a seeded Monte Carlo simulator.

#include "chain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace sojourn {

enum class SojournKind { plain, modified };

inline const char* to_string(SojournKind k) { return k == SojournKind::plain ? "T" : "Ttilde"; }

/// Joint law P_i{T_n = m, X_n = j} (times the first-step restriction, if any).
template <typename S>
class SojournTable {
public:
    SojournTable(std::size_t start, int horizon, SojournKind kind, TargetSet target, std::size_t states)
        : start_(start), horizon_(horizon), kind_(kind), target_(std::move(target)), states_(states)
    {
        joint_.resize(static_cast<std::size_t>(horizon) + 1);
        for (int n = 0; n <= horizon; ++n) {
            joint_[static_cast<std::size_t>(n)].assign(static_cast<std::size_t>(n) + 1,
                                                      std::vector<S>(states, scalar_traits<S>::zero()));
        }
    }

    std::size_t start() const { return start_; }
    int horizon() const { return horizon_; }
    SojournKind kind() const { return kind_; }
    const TargetSet& target() const { return target_; }
    std::size_t states() const { return states_; }

    S& joint(int n, int m, std::size_t j) { return joint_[idx(n)][idx(m)][j]; }
    const S& joint(int n, int m, std::size_t j) const { return joint_[idx(n)][idx(m)][j]; }

    /// P{T_n = m, X_n in F}.
    S prob(int n, int m) const
    {
        S total = scalar_traits<S>::zero();
        for (std::size_t j = 0; j < states_; ++j) {
            if (target_.contains(static_cast<long>(j))) total += joint(n, m, j);
        }
        return total;
    }

    std::vector<S> row(int n) const
    {
        std::vector<S> out(static_cast<std::size_t>(n) + 1);
        for (int m = 0; m <= n; ++m) out[idx(m)] = prob(n, m);
        return out;
    }

private:
    static std::size_t idx(int k) { return static_cast<std::size_t>(k); }

    std::size_t start_;
    int horizon_;
    SojournKind kind_;
    TargetSet target_;
    std::size_t states_;
    std::vector<std::vector<std::vector<S>>> joint_;
};

/// The target set F is given in chain state indices.
template <typename S>
SojournTable<S> sojourn_dp(const FiniteChain<S>& chain, const Partition& part, std::size_t start,
                           const TargetSet& target, int horizon, SojournKind kind,
                           bool restrict_first_step = false)
{
    if (horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
    if (start >= chain.size()) throw std::invalid_argument("start state out of range");
    if (part.size() != chain.size()) throw std::invalid_argument("partition does not match chain size");
    const std::size_t n_states = chain.size();
    SojournTable<S> table(start, horizon, kind, target, n_states);
    const S zero = scalar_traits<S>::zero();

    // dist[m][mode][j]; mode 1 = counting (the current E° run came from E+)
    using Layer = std::vector<std::vector<std::vector<S>>>;
    auto fresh = [&](int n) {
        return Layer(static_cast<std::size_t>(n) + 1, std::vector<std::vector<S>>(2, std::vector<S>(n_states, zero)));
    };
    Layer dist = fresh(0);
    const int mode0 = (kind == SojournKind::modified && part.in_plus(start)) ? 1 : 0;

    if (restrict_first_step) {
        table.joint(0, 0, start) = varpi(chain, part, start);
    } else {
        table.joint(0, 0, start) = scalar_traits<S>::one();
    }
    dist[0][static_cast<std::size_t>(mode0)][start] = scalar_traits<S>::one();

    for (int n = 1; n <= horizon; ++n) {
        Layer next = fresh(n);
        for (int m = 0; m < n; ++m) {
            for (int mode = 0; mode < 2; ++mode) {
                const auto& src = dist[static_cast<std::size_t>(m)][static_cast<std::size_t>(mode)];
                for (std::size_t i = 0; i < n_states; ++i) {
                    if (scalar_traits<S>::is_zero(src[i])) continue;
                    for (std::size_t j = 0; j < n_states; ++j) {
                        const S& pij = chain.p(i, j);
                        if (scalar_traits<S>::is_zero(pij)) continue;
                        if (n == 1 && restrict_first_step && part.in_circ(j)) continue;
                        int inc = 0;
                        int new_mode = 0;
                        if (kind == SojournKind::plain) {
                            inc = part.in_dag(j) ? 1 : 0;
                        } else if (part.in_plus(j)) {
                            inc = 1;
                            new_mode = 1;
                        } else if (part.in_circ(j)) {
                            inc = mode;
                            new_mode = mode;
                        }
                        S w = src[i] * pij;
                        next[static_cast<std::size_t>(m + inc)][static_cast<std::size_t>(new_mode)][j] += w;
                    }
                }
            }
        }
        dist = std::move(next);
        for (int m = 0; m <= n; ++m) {
            for (std::size_t j = 0; j < n_states; ++j) {
                table.joint(n, m, j) = dist[static_cast<std::size_t>(m)][0][j] + dist[static_cast<std::size_t>(m)][1][j];
            }
        }
    }
    return table;
}

/// Sojourn table of an (L,R) walk, computed on a window wide enough to be exact.
/// States in the result are indexed by window position; use `window` to map them.
template <typename S>
struct WalkSojourn {
    Window<S> window;
    SojournTable<S> table;

    S prob(int n, int m) const { return table.prob(n, m); }
    std::vector<S> row(int n) const { return table.row(n); }
    S joint_at(int n, int m, long state) const
    {
        if (state < window.lo || state > window.hi) return scalar_traits<S>::zero();
        return table.joint(n, m, window.index_of(state));
    }
};

template <typename S>
WalkSojourn<S> walk_sojourn_dp(const JumpDistribution<S>& jump, long start, const TargetSet& target, int horizon,
                               SojournKind kind, bool restrict_first_step = false, int extra_margin = 0)
{
    Window<S> w = horizon_window(jump, start, horizon + extra_margin);
    auto table = sojourn_dp(w.chain, w.partition, w.index_of(start), w.translate(target), horizon, kind,
                            restrict_first_step);
    return WalkSojourn<S>{std::move(w), std::move(table)};
}

enum class EntranceKind {
    circ,      // tau°: first m >= 1 with X_m in E°, records X_tau
    dag,       // tau†
    plus,      // tau+
    minus,     // tau-
    pm,        // tau±, records X_tau
    exit_pm,   // tau±, records X_{tau-1} with exponent tau-1
    tilde_pm,  // tau~± = min{m >= tau°: X_m in E±}, records X_{tau-1} with exponent tau-1
};

enum class FirstStep { any, dag, plus, minus, pm };

inline bool first_step_allows(FirstStep f, const Partition& part, std::size_t j)
{
    switch (f) {
    case FirstStep::any: return true;
    case FirstStep::dag: return part.in_dag(j);
    case FirstStep::plus: return part.in_plus(j);
    case FirstStep::minus: return part.in_minus(j);
    case FirstStep::pm: return part.in_plus_minus(j);
    }
    return false;
}

/// Law of an entrance time: entry (e, j) is the probability that the
/// generating-function exponent equals e and the recorded location is j.
template <typename S>
class EntranceTable {
public:
    EntranceTable(std::size_t start, EntranceKind kind, int horizon, std::size_t states)
        : start_(start), kind_(kind), horizon_(horizon),
          entries_(static_cast<std::size_t>(horizon) + 1, std::vector<S>(states, scalar_traits<S>::zero()))
    {
    }

    std::size_t start() const { return start_; }
    EntranceKind kind() const { return kind_; }
    int horizon() const { return horizon_; }
    S& at(int e, std::size_t j) { return entries_[static_cast<std::size_t>(e)][j]; }
    const S& at(int e, std::size_t j) const { return entries_[static_cast<std::size_t>(e)][j]; }

    S total_mass() const
    {
        S t = scalar_traits<S>::zero();
        for (const auto& row : entries_)
            for (const auto& v : row) t += v;
        return t;
    }

private:
    std::size_t start_;
    EntranceKind kind_;
    int horizon_;
    std::vector<std::vector<S>> entries_;
};

/// Exponents up to `horizon` are exact.
template <typename S>
EntranceTable<S> entrance_dp(const FiniteChain<S>& chain, const Partition& part, std::size_t start,
                             EntranceKind kind, int horizon, FirstStep first = FirstStep::any)
{
    if (horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
    const std::size_t n_states = chain.size();
    EntranceTable<S> table(start, kind, horizon, n_states);
    const S zero = scalar_traits<S>::zero();

    auto hits = [&](std::size_t j) {
        switch (kind) {
        case EntranceKind::circ: return part.in_circ(j);
        case EntranceKind::dag: return part.in_dag(j);
        case EntranceKind::plus: return part.in_plus(j);
        case EntranceKind::minus: return part.in_minus(j);
        default: return part.in_plus_minus(j);
        }
    };
    const bool records_previous = kind == EntranceKind::exit_pm || kind == EntranceKind::tilde_pm;

    // phase 0: still waiting; for tilde_pm phase 0 waits for E°, phase 1 for E±
    std::vector<std::vector<S>> dist(2, std::vector<S>(n_states, zero));
    dist[0][start] = scalar_traits<S>::one();
    const int steps = records_previous ? horizon + 1 : horizon;
    for (int m = 1; m <= steps; ++m) {
        std::vector<std::vector<S>> next(2, std::vector<S>(n_states, zero));
        for (int phase = 0; phase < 2; ++phase) {
            for (std::size_t i = 0; i < n_states; ++i) {
                const S& mass = dist[static_cast<std::size_t>(phase)][i];
                if (scalar_traits<S>::is_zero(mass)) continue;
                for (std::size_t j = 0; j < n_states; ++j) {
                    const S& pij = chain.p(i, j);
                    if (scalar_traits<S>::is_zero(pij)) continue;
                    if (m == 1 && !first_step_allows(first, part, j)) continue;
                    S w = mass * pij;
                    if (kind == EntranceKind::tilde_pm && phase == 0) {
                        next[part.in_circ(j) ? 1 : 0][j] += w;
                        continue;
                    }
                    if (hits(j)) {
                        if (records_previous) {
                            table.at(m - 1, i) += w;
                        } else {
                            table.at(m, j) += w;
                        }
                    } else {
                        next[static_cast<std::size_t>(phase)][j] += w;
                    }
                }
            }
        }
        dist = std::move(next);
    }
    return table;
}

/// Path enumeration with the counting indicator evaluated from its event
/// definition: delta_m = 1 iff some A_{l,m} occurs, l = 0..m, where A_{l,m}
/// asks X_m..X_{m-l+1} in E° and X_{m-l} in E+. Exponential; small n only.
template <typename S>
SojournTable<S> brute_force_sojourn(const FiniteChain<S>& chain, const Partition& part, std::size_t start,
                                    const TargetSet& target, int horizon, SojournKind kind)
{
    const std::size_t n_states = chain.size();
    SojournTable<S> table(start, horizon, kind, target, n_states);
    std::vector<std::size_t> path{start};

    auto delta = [&](int m) -> int {
        if (kind == SojournKind::plain) return part.in_dag(path[static_cast<std::size_t>(m)]) ? 1 : 0;
        for (int l = 0; l <= m; ++l) {
            bool run = true;
            for (int t = m - l + 1; t <= m; ++t) run = run && part.in_circ(path[static_cast<std::size_t>(t)]);
            if (run && part.in_plus(path[static_cast<std::size_t>(m - l)])) return 1;
        }
        return 0;
    };

    std::function<void(int, const S&, int)> walk = [&](int n, const S& weight, int count) {
        table.joint(n, count, path.back()) += weight;
        if (n == horizon) return;
        const std::size_t here = path.back();
        for (std::size_t j = 0; j < n_states; ++j) {
            const S& pij = chain.p(here, j);
            if (scalar_traits<S>::is_zero(pij)) continue;
            path.push_back(j);
            S w = weight * pij;
            walk(n + 1, w, count + delta(n + 1));
            path.pop_back();
        }
    };
    walk(0, scalar_traits<S>::one(), 0);
    return table;
}

/// Complement events A'_{l,m} (ending in an E- visit, or in an E° run that
/// started at time 1 from E- or E°); used to check that they exactly cover
/// the non-counted steps.
inline bool complement_partition_holds(const std::vector<std::size_t>& path, const Partition& part)
{
    const int n = static_cast<int>(path.size()) - 1;
    auto at = [&](int t) { return path[static_cast<std::size_t>(t)]; };
    for (int m = 1; m <= n; ++m) {
        int in_b = 0;
        for (int l = 0; l <= m - 1; ++l) {
            bool run = true;
            for (int t = m - l + 1; t <= m; ++t) run = run && part.in_circ(at(t));
            if (run && part.in_plus(at(m - l))) ++in_b;
        }
        int in_bp = 0;
        if (m == 1) {
            in_bp = part.in_plus(at(1)) ? 0 : 1;
        } else {
            for (int l = 0; l <= m - 2; ++l) {
                bool run = true;
                for (int t = m - l + 1; t <= m; ++t) run = run && part.in_circ(at(t));
                if (run && part.in_minus(at(m - l))) ++in_bp;
            }
            bool run = true;
            for (int t = 2; t <= m; ++t) run = run && part.in_circ(at(t));
            if (run && !part.in_plus(at(1))) ++in_bp;
        }
        if (in_b > 1 || in_bp > 1 || in_b + in_bp != 1) return false;
    }
    return true;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform in [0,1) from (seed, path, step); independent of how paths are sharded.
inline double counter_uniform(std::uint64_t seed, std::uint64_t path, std::uint64_t step)
{
    std::uint64_t h = splitmix64(seed ^ splitmix64(path * 0x100000001b3ULL + splitmix64(step)));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// counts[n][m] is the number of paths with T_n = m and X_n in F.
struct EmpiricalTable {
    std::size_t start = 0;
    int horizon = 0;
    SojournKind kind = SojournKind::plain;
    std::uint64_t paths = 0;
    std::uint64_t seed = 0;
    std::vector<std::vector<std::uint64_t>> counts;

    double freq(int n, int m) const
    {
        return static_cast<double>(counts[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)]) /
               static_cast<double>(paths);
    }
};

template <typename S>
EmpiricalTable monte_carlo(const FiniteChain<S>& chain, const Partition& part, std::size_t start,
                           const TargetSet& target, int horizon, SojournKind kind, std::uint64_t paths,
                           std::uint64_t seed, unsigned threads = 1)
{
    if (paths < 1) throw std::invalid_argument("paths must be at least 1");
    if (horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
    const std::size_t n_states = chain.size();
    std::vector<std::vector<double>> cdf(n_states, std::vector<double>(n_states));
    for (std::size_t i = 0; i < n_states; ++i) {
        double acc = 0;
        for (std::size_t j = 0; j < n_states; ++j) {
            acc += scalar_traits<S>::to_double(chain.p(i, j));
            cdf[i][j] = acc;
        }
        for (auto& v : cdf[i]) v /= acc;
    }
    auto fresh_counts = [&] {
        std::vector<std::vector<std::uint64_t>> c(static_cast<std::size_t>(horizon) + 1);
        for (int n = 0; n <= horizon; ++n) c[static_cast<std::size_t>(n)].assign(static_cast<std::size_t>(n) + 1, 0);
        return c;
    };

    auto run_range = [&](std::uint64_t begin, std::uint64_t end, std::vector<std::vector<std::uint64_t>>& counts) {
        for (std::uint64_t p = begin; p < end; ++p) {
            std::size_t x = start;
            int count = 0;
            int mode = (kind == SojournKind::modified && part.in_plus(start)) ? 1 : 0;
            if (target.contains(static_cast<long>(x))) ++counts[0][0];
            for (int n = 1; n <= horizon; ++n) {
                const double u = detail::counter_uniform(seed, p, static_cast<std::uint64_t>(n));
                const auto& row = cdf[x];
                std::size_t j = static_cast<std::size_t>(std::upper_bound(row.begin(), row.end(), u) - row.begin());
                if (j >= n_states) {
                    j = n_states - 1;
                    while (j > 0 && row[j] == row[j - 1]) --j;
                }
                x = j;
                if (kind == SojournKind::plain) {
                    count += part.in_dag(x) ? 1 : 0;
                } else if (part.in_plus(x)) {
                    ++count;
                    mode = 1;
                } else if (part.in_circ(x)) {
                    count += mode;
                } else {
                    mode = 0;
                }
                if (target.contains(static_cast<long>(x))) {
                    ++counts[static_cast<std::size_t>(n)][static_cast<std::size_t>(count)];
                }
            }
        }
    };

    EmpiricalTable out;
    out.start = start;
    out.horizon = horizon;
    out.kind = kind;
    out.paths = paths;
    out.seed = seed;
    out.counts = fresh_counts();
    threads = std::max(1u, threads);
    std::vector<std::vector<std::vector<std::uint64_t>>> shard(threads, fresh_counts());
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (paths + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::uint64_t b = std::min<std::uint64_t>(paths, t * chunk);
        const std::uint64_t e = std::min<std::uint64_t>(paths, b + chunk);
        if (threads == 1) {
            run_range(b, e, shard[t]);
        } else {
            pool.emplace_back([&, b, e, t] { run_range(b, e, shard[t]); });
        }
    }
    for (auto& th : pool) th.join();
    for (const auto& s : shard)
        for (int n = 0; n <= horizon; ++n)
            for (int m = 0; m <= n; ++m)
                out.counts[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)] +=
                    s[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)];
    return out;
}

}  // namespace sojourn
