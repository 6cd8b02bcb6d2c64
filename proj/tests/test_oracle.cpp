#include <sojourn/oracle.hpp>

#include <gtest/gtest.h>

#include "test_util.hpp"

#include <random>

using namespace sojourn;
using Q = Rational;

namespace {

JumpDistribution<Q> bernoulli() { return JumpDistribution<Q>(1, 1, {q(1, 2), Q(0), q(1, 2)}); }

Q binom(int n, int k)
{
    mpz_class b;
    mpz_bin_uiui(b.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return Q(b);
}

Q two_pow(int n)
{
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(n));
    return Q(p);
}

// small chain obeying A1/A2; state 0 in E-, 1..2 in E°, 3 in E+
std::pair<FiniteChain<Q>, Partition> small_chain()
{
    FiniteChain<Q> c({{q(1, 3), q(1, 3), q(1, 3), Q(0)},
                      {q(1, 4), q(1, 4), q(1, 4), q(1, 4)},
                      {q(1, 5), q(2, 5), Q(0), q(2, 5)},
                      {Q(0), q(1, 2), q(1, 6), q(1, 3)}});
    return {c, Partition(4, {1, 2}, {3}, {0})};
}

}  // namespace

TEST(SojournDp, MatchesBruteForceOnSmallChain)
{
    auto [c, p] = small_chain();
    for (SojournKind kind : {SojournKind::plain, SojournKind::modified}) {
        for (std::size_t start = 0; start < 4; ++start) {
            for (const TargetSet& f : {TargetSet::all(), TargetSet::finite({2})}) {
                auto dp = sojourn_dp(c, p, start, f, 6, kind);
                auto bf = brute_force_sojourn(c, p, start, f, 6, kind);
                for (int n = 0; n <= 6; ++n) EXPECT_EQ(dp.row(n), bf.row(n)) << to_string(kind) << " n=" << n;
            }
        }
    }
}

TEST(SojournDp, RowsAreDistributions)
{
    auto [c, p] = small_chain();
    auto t = sojourn_dp(c, p, 1, TargetSet::all(), 8, SojournKind::modified);
    for (int n = 0; n <= 8; ++n) {
        Q total = 0;
        for (const Q& v : t.row(n)) total += v;
        EXPECT_EQ(total, 1);
    }
}

TEST(SojournDp, ZeroHorizon)
{
    auto [c, p] = small_chain();
    auto t = sojourn_dp(c, p, 2, TargetSet::finite({1}), 0, SojournKind::plain);
    ASSERT_EQ(t.row(0).size(), 1u);
    EXPECT_EQ(t.prob(0, 0), 0);
    auto u = sojourn_dp(c, p, 2, TargetSet::finite({2}), 0, SojournKind::plain);
    EXPECT_EQ(u.prob(0, 0), 1);
}

TEST(SojournDp, RejectsBadArguments)
{
    auto [c, p] = small_chain();
    EXPECT_THROW(sojourn_dp(c, p, 9, TargetSet::all(), 3, SojournKind::plain), std::invalid_argument);
    EXPECT_THROW(sojourn_dp(c, p, 0, TargetSet::all(), -1, SojournKind::plain), std::invalid_argument);
    EXPECT_THROW(sojourn_dp(c, Partition(3, {0}, {1}, {2}), 0, TargetSet::all(), 3, SojournKind::plain),
                 std::invalid_argument);
}

TEST(WalkOracle, ChungFellerLaw)
{
    const int N = 12;
    auto w = walk_sojourn_dp(bernoulli(), 0, TargetSet::all(), N, SojournKind::modified);
    for (int n = 0; n <= N; n += 2) {
        for (int m = 0; m <= n; ++m) {
            Q expect = 0;
            if (m % 2 == 0) expect = binom(m, m / 2) * binom(n - m, (n - m) / 2) / two_pow(n);
            EXPECT_EQ(w.prob(n, m), expect) << "n=" << n << " m=" << m;
        }
    }
}

TEST(WalkOracle, UniformGivenReturnToOrigin)
{
    auto w = walk_sojourn_dp(bernoulli(), 0, TargetSet::all(), 10, SojournKind::modified);
    for (int n = 2; n <= 10; n += 2) {
        const Q first = w.joint_at(n, 0, 0);
        for (int m = 0; m <= n; m += 2) EXPECT_EQ(w.joint_at(n, m, 0), first);
    }
    EXPECT_EQ(w.joint_at(4, 2, 0), q(1, 8));
}

TEST(WalkOracle, RestrictedFirstStepScalesByVarpi)
{
    JumpDistribution<Q> j(1, 1, {q(1, 4), q(1, 2), q(1, 4)});
    auto w = walk_sojourn_dp(j, 0, TargetSet::all(), 5, SojournKind::modified, true);
    Q total = 0;
    for (const Q& v : w.row(5)) total += v;
    EXPECT_EQ(total, q(1, 2));
    EXPECT_EQ(w.prob(0, 0), q(1, 2));
}

TEST(WalkOracle, WindowIsWideEnough)
{
    JumpDistribution<Q> j(2, 1, {q(1, 3), q(1, 6), q(1, 6), q(1, 3)});
    auto w1 = walk_sojourn_dp(j, 1, TargetSet::all(), 6, SojournKind::plain);
    auto w2 = walk_sojourn_dp(j, 1, TargetSet::all(), 6, SojournKind::plain, false, 5);
    for (int n = 0; n <= 6; ++n) EXPECT_EQ(w1.row(n), w2.row(n));
}

TEST(Entrance, MassBoundedByOne)
{
    auto [c, p] = small_chain();
    for (EntranceKind k : {EntranceKind::circ, EntranceKind::dag, EntranceKind::plus, EntranceKind::minus,
                           EntranceKind::pm}) {
        auto e = entrance_dp(c, p, 1, k, 20);
        EXPECT_LE(e.total_mass(), 1);
        EXPECT_GT(e.total_mass(), 0);
        EXPECT_EQ(e.at(0, 1), 0);
    }
}

TEST(Entrance, FirstHitOfPlusMatchesDirectStep)
{
    auto [c, p] = small_chain();
    auto e = entrance_dp(c, p, 1, EntranceKind::plus, 4);
    EXPECT_EQ(e.at(1, 3), c.p(1, 3));
    // 1 -> 2 -> 3 or 1 -> 1 -> 3 or 1 -> 0 -> ... never (A1)
    EXPECT_EQ(e.at(2, 3), c.p(1, 1) * c.p(1, 3) + c.p(1, 2) * c.p(2, 3));
}

TEST(MonteCarlo, DeterministicAndThreadIndependent)
{
    auto [c, p] = small_chain();
    auto a = monte_carlo(c, p, 1, TargetSet::all(), 6, SojournKind::modified, 5000, 42, 1);
    auto b = monte_carlo(c, p, 1, TargetSet::all(), 6, SojournKind::modified, 5000, 42, 4);
    auto d = monte_carlo(c, p, 1, TargetSet::all(), 6, SojournKind::modified, 5000, 43, 1);
    EXPECT_EQ(a.counts, b.counts);
    EXPECT_NE(a.counts, d.counts);
    EXPECT_THROW(monte_carlo(c, p, 1, TargetSet::all(), 6, SojournKind::plain, 0, 1), std::invalid_argument);
}

TEST(MonteCarlo, WithinThreeSigma)
{
    auto w = materialize_window(bernoulli(), -6, 6);
    const std::size_t s = w.index_of(0);
    const std::uint64_t paths = 100000;
    auto emp = monte_carlo(w.chain, w.partition, s, TargetSet::all(), 4, SojournKind::modified, paths, 0, 2);
    const double p0 = 3.0 / 8;
    const double sigma = std::sqrt(p0 * (1 - p0) / static_cast<double>(paths));
    EXPECT_NEAR(emp.freq(4, 0), p0, 3 * sigma);
}

TEST(Property, RandomChainsAgreeWithBruteForce)
{
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> w(0, 4);
    for (int trial = 0; trial < 15; ++trial) {
        const std::size_t n = 4;
        std::vector<StateClass> cls = {StateClass::minus, StateClass::circ, StateClass::circ, StateClass::plus};
        std::shuffle(cls.begin(), cls.end(), rng);
        Partition part(cls);
        std::vector<std::vector<Q>> m(n, std::vector<Q>(n));
        for (std::size_t i = 0; i < n; ++i) {
            Q total = 0;
            for (std::size_t j = 0; j < n; ++j) {
                const bool banned = (part.in_minus(i) && part.in_plus(j)) || (part.in_plus(i) && part.in_minus(j));
                m[i][j] = banned ? Q(0) : Q(w(rng) + (i == j ? 1 : 0));
                total += m[i][j];
            }
            for (auto& v : m[i]) v /= total;
        }
        FiniteChain<Q> c(m);
        for (std::size_t start = 0; start < n; ++start) {
            auto dp = sojourn_dp(c, part, start, TargetSet::finite({0}), 5, SojournKind::modified);
            auto bf = brute_force_sojourn(c, part, start, TargetSet::finite({0}), 5, SojournKind::modified);
            for (int k = 0; k <= 5; ++k) ASSERT_EQ(dp.row(k), bf.row(k));
        }
    }
}
