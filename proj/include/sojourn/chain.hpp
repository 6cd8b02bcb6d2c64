#pragma once

// Chain models (explicit finite stochastic matrices and translation-invariant
// bounded-jump walks on Z), the E-/E°/E+ state partition, the query set F and
// the one-step structural check of the boundary assumptions.

#include "errors.hpp"
#include "scalar.hpp"

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sojourn {

enum class StateClass { minus, circ, plus };

inline const char* to_string(StateClass c)
{
    switch (c) {
    case StateClass::minus: return "E-";
    case StateClass::circ: return "E0";
    case StateClass::plus: return "E+";
    }
    return "?";
}

template <typename S>
bool sums_to_one(const S& total)
{
    if constexpr (scalar_traits<S>::exact) {
        return total == scalar_traits<S>::one();
    } else {
        return std::fabs(total - 1.0) <= scalar_traits<S>::sum_tolerance;
    }
}

/// Law of a single jump supported on {-L, ..., R}.
template <typename S>
class JumpDistribution {
public:
    JumpDistribution(int left, int right, std::vector<S> probs)
        : left_(left), right_(right), probs_(std::move(probs))
    {
        if (left_ < 1 || right_ < 1) throw std::invalid_argument("L and R must be positive");
        if (probs_.size() != static_cast<std::size_t>(left_ + right_ + 1)) {
            throw std::invalid_argument("jump law needs exactly L+R+1 probabilities");
        }
        S total = scalar_traits<S>::zero();
        for (const S& p : probs_) {
            if (p < 0) throw std::invalid_argument("negative jump probability");
            total += p;
        }
        if (!sums_to_one(total)) throw std::invalid_argument("jump probabilities do not sum to 1");
    }

    int L() const { return left_; }
    int R() const { return right_; }
    int M() const { return std::max(left_, right_); }

    /// P{U = k}; zero outside the support.
    S pi(long k) const
    {
        if (k < -left_ || k > right_) return scalar_traits<S>::zero();
        return probs_[static_cast<std::size_t>(k + left_)];
    }

    const std::vector<S>& probs() const { return probs_; }

    bool symmetric() const
    {
        if (left_ != right_) return false;
        for (int k = 1; k <= right_; ++k) {
            if (pi(k) != pi(-k)) return false;
        }
        return true;
    }

    template <typename T>
    JumpDistribution<T> as() const
    {
        std::vector<T> converted;
        converted.reserve(probs_.size());
        for (const S& p : probs_) converted.push_back(scalar_cast<T>(p));
        if constexpr (!scalar_traits<T>::exact) {
            // keep the float copy normalized after rounding
            T total = 0;
            for (const T& p : converted) total += p;
            for (T& p : converted) p /= total;
        }
        return JumpDistribution<T>(left_, right_, std::move(converted));
    }

private:
    int left_;
    int right_;
    std::vector<S> probs_;
};

/// Explicit stochastic matrix on states 0..size-1.
template <typename S>
class FiniteChain {
public:
    explicit FiniteChain(std::vector<std::vector<S>> transition) : p_(std::move(transition))
    {
        const std::size_t n = p_.size();
        if (n == 0) throw std::invalid_argument("empty chain");
        for (std::size_t i = 0; i < n; ++i) {
            if (p_[i].size() != n) throw std::invalid_argument("transition matrix is not square");
            S total = scalar_traits<S>::zero();
            for (const S& v : p_[i]) {
                if (v < 0) throw std::invalid_argument("negative transition probability");
                total += v;
            }
            if (!sums_to_one(total)) {
                throw std::invalid_argument("row " + std::to_string(i) + " does not sum to 1");
            }
        }
    }

    std::size_t size() const { return p_.size(); }
    const S& p(std::size_t i, std::size_t j) const { return p_[i][j]; }
    const std::vector<S>& row(std::size_t i) const { return p_[i]; }
    const std::vector<std::vector<S>>& matrix() const { return p_; }

    template <typename T>
    FiniteChain<T> as() const
    {
        std::vector<std::vector<T>> m(size(), std::vector<T>(size()));
        for (std::size_t i = 0; i < size(); ++i) {
            T total = 0;
            for (std::size_t j = 0; j < size(); ++j) {
                m[i][j] = scalar_cast<T>(p_[i][j]);
                total += m[i][j];
            }
            if constexpr (!scalar_traits<T>::exact) {
                for (auto& v : m[i]) v /= total;
            }
        }
        return FiniteChain<T>(std::move(m));
    }

private:
    std::vector<std::vector<S>> p_;
};

/// Partition of a finite state space into E-, E°, E+.
class Partition {
public:
    Partition() = default;

    explicit Partition(std::vector<StateClass> classes) : classes_(std::move(classes)) {}

    Partition(std::size_t size, const std::vector<std::size_t>& e_circ,
              const std::vector<std::size_t>& e_plus, const std::vector<std::size_t>& e_minus)
    {
        std::vector<int> seen(size, 0);
        classes_.assign(size, StateClass::minus);
        auto mark = [&](const std::vector<std::size_t>& states, StateClass c) {
            for (std::size_t s : states) {
                if (s >= size) throw std::invalid_argument("partition state out of range");
                if (seen[s]++) throw std::invalid_argument("partition sets overlap");
                classes_[s] = c;
            }
        };
        mark(e_circ, StateClass::circ);
        mark(e_plus, StateClass::plus);
        mark(e_minus, StateClass::minus);
        for (std::size_t s = 0; s < size; ++s) {
            if (!seen[s]) throw std::invalid_argument("partition does not cover state " + std::to_string(s));
        }
    }

    std::size_t size() const { return classes_.size(); }
    StateClass cls(std::size_t i) const { return classes_[i]; }
    bool in_circ(std::size_t i) const { return classes_[i] == StateClass::circ; }
    bool in_plus(std::size_t i) const { return classes_[i] == StateClass::plus; }
    bool in_minus(std::size_t i) const { return classes_[i] == StateClass::minus; }
    bool in_dag(std::size_t i) const { return classes_[i] != StateClass::minus; }
    bool in_plus_minus(std::size_t i) const { return classes_[i] != StateClass::circ; }

    std::vector<std::size_t> members(StateClass c) const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < classes_.size(); ++i) {
            if (classes_[i] == c) out.push_back(i);
        }
        return out;
    }
    std::vector<std::size_t> e_circ() const { return members(StateClass::circ); }
    std::vector<std::size_t> e_plus() const { return members(StateClass::plus); }
    std::vector<std::size_t> e_minus() const { return members(StateClass::minus); }
    std::vector<std::size_t> e_dag() const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < classes_.size(); ++i) {
            if (in_dag(i)) out.push_back(i);
        }
        return out;
    }

    const std::vector<StateClass>& classes() const { return classes_; }

private:
    std::vector<StateClass> classes_;
};

/// Canonical partition of Z for an (L,R) walk: E- = {i<0}, E° = {0..M-1}, E+ = {i>=M}.
struct LrPartition {
    int M = 1;

    StateClass classify(long i) const
    {
        if (i < 0) return StateClass::minus;
        if (i < M) return StateClass::circ;
        return StateClass::plus;
    }
    bool in_circ(long i) const { return classify(i) == StateClass::circ; }
    bool in_plus(long i) const { return classify(i) == StateClass::plus; }
    bool in_minus(long i) const { return classify(i) == StateClass::minus; }
};

template <typename S>
LrPartition lr_canonical_partition(const JumpDistribution<S>& jump)
{
    return LrPartition{jump.M()};
}

/// The query set F: the whole space or a finite set of states.
class TargetSet {
public:
    static TargetSet all() { return TargetSet(); }
    static TargetSet finite(std::set<long> states)
    {
        TargetSet t;
        t.all_ = false;
        t.states_ = std::move(states);
        return t;
    }

    bool is_all() const { return all_; }
    const std::set<long>& states() const { return states_; }
    bool contains(long s) const { return all_ || states_.count(s) > 0; }

    std::string describe() const
    {
        if (all_) return "all";
        std::ostringstream out;
        bool first = true;
        for (long s : states_) {
            if (!first) out << ',';
            out << s;
            first = false;
        }
        return out.str();
    }

private:
    bool all_ = true;
    std::set<long> states_;
};

template <typename S>
struct Violation {
    std::size_t from;
    std::size_t to;
    S prob;
    const char* assumption;  // "A1" (E- -> E+) or "A2" (E+ -> E-)
};

template <typename S>
struct ValidationReport {
    std::vector<Violation<S>> violations;
    bool ok() const { return violations.empty(); }

    std::string describe() const
    {
        std::ostringstream out;
        for (const auto& v : violations) {
            out << v.assumption << " violated: p(" << v.from << "," << v.to
                << ") = " << scalar_traits<S>::format(v.prob) << '\n';
        }
        return out.str();
    }
};

/// No positive one-step edge E- -> E+ (A1) and none E+ -> E- (A2).
template <typename S>
ValidationReport<S> check_assumptions(const FiniteChain<S>& chain, const Partition& partition)
{
    if (partition.size() != chain.size()) {
        throw std::invalid_argument("partition does not match chain size");
    }
    ValidationReport<S> report;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        for (std::size_t j = 0; j < chain.size(); ++j) {
            if (scalar_traits<S>::is_zero(chain.p(i, j))) continue;
            if (partition.in_minus(i) && partition.in_plus(j)) {
                report.violations.push_back({i, j, chain.p(i, j), "A1"});
            } else if (partition.in_plus(i) && partition.in_minus(j)) {
                report.violations.push_back({i, j, chain.p(i, j), "A2"});
            }
        }
    }
    return report;
}

template <typename S>
void require_assumptions(const FiniteChain<S>& chain, const Partition& partition)
{
    auto report = check_assumptions(chain, partition);
    if (!report.ok()) throw assumption_error(report.describe());
}

/// A finite truncation of an (L,R) walk on [lo, hi] with two absorbing
/// sentinels collecting the mass that leaves the window.
template <typename S>
struct Window {
    FiniteChain<S> chain;
    Partition partition;
    long lo;
    long hi;

    std::size_t index_of(long state) const
    {
        if (state < lo || state > hi) throw std::out_of_range("state outside window");
        return static_cast<std::size_t>(state - lo);
    }
    long state_of(std::size_t index) const { return lo + static_cast<long>(index); }
    std::size_t lower_sentinel() const { return static_cast<std::size_t>(hi - lo + 1); }
    std::size_t upper_sentinel() const { return static_cast<std::size_t>(hi - lo + 2); }

    /// F on the window; "all" stays "all" (sentinels are never reached within the horizon).
    TargetSet translate(const TargetSet& target) const
    {
        if (target.is_all()) return target;
        std::set<long> mapped;
        for (long s : target.states()) {
            if (s >= lo && s <= hi) mapped.insert(static_cast<long>(index_of(s)));
        }
        return TargetSet::finite(std::move(mapped));
    }
};

template <typename S>
Window<S> materialize_window(const JumpDistribution<S>& jump, long lo, long hi)
{
    if (lo >= hi) throw std::invalid_argument("window requires lo < hi");
    const long width = hi - lo + 1;
    if (width < jump.L() + jump.R() + 1) throw std::invalid_argument("window too small");
    const std::size_t n = static_cast<std::size_t>(width) + 2;
    const std::size_t lower = static_cast<std::size_t>(width);
    const std::size_t upper = lower + 1;
    std::vector<std::vector<S>> p(n, std::vector<S>(n, scalar_traits<S>::zero()));
    for (long s = lo; s <= hi; ++s) {
        const std::size_t i = static_cast<std::size_t>(s - lo);
        for (long k = -jump.L(); k <= jump.R(); ++k) {
            const long t = s + k;
            std::size_t j = t < lo ? lower : (t > hi ? upper : static_cast<std::size_t>(t - lo));
            p[i][j] += jump.pi(k);
        }
    }
    p[lower][lower] = scalar_traits<S>::one();
    p[upper][upper] = scalar_traits<S>::one();

    const LrPartition canon = lr_canonical_partition(jump);
    std::vector<StateClass> classes(n);
    for (long s = lo; s <= hi; ++s) classes[static_cast<std::size_t>(s - lo)] = canon.classify(s);
    classes[lower] = StateClass::minus;
    classes[upper] = StateClass::plus;
    return Window<S>{FiniteChain<S>(std::move(p)), Partition(std::move(classes)), lo, hi};
}

/// Window on which an n-step computation started at `start` never feels the truncation.
template <typename S>
Window<S> horizon_window(const JumpDistribution<S>& jump, long start, int horizon)
{
    const int M = jump.M();
    long lo = std::min<long>(start - static_cast<long>(horizon) * jump.L() - 1, -M - 1);
    long hi = std::max<long>(start + static_cast<long>(horizon) * jump.R() + 1, 2 * M);
    if (hi - lo + 1 < jump.L() + jump.R() + 1) hi = lo + jump.L() + jump.R();
    return materialize_window(jump, lo, hi);
}

/// P_i{X_1 in E±}.
template <typename S>
S varpi(const FiniteChain<S>& chain, const Partition& partition, std::size_t i)
{
    S total = scalar_traits<S>::zero();
    for (std::size_t j = 0; j < chain.size(); ++j) {
        if (partition.in_plus_minus(j)) total += chain.p(i, j);
    }
    return total;
}

template <typename S>
S varpi(const JumpDistribution<S>& jump, long i)
{
    const LrPartition part = lr_canonical_partition(jump);
    S total = scalar_traits<S>::zero();
    for (long k = -jump.L(); k <= jump.R(); ++k) {
        if (!part.in_circ(i + k)) total += jump.pi(k);
    }
    return total;
}

}  // namespace sojourn
