#include <sojourn/genfun.hpp>
#include <sojourn/oracle.hpp>

#include <gtest/gtest.h>

#include "test_util.hpp"

#include <random>

using namespace sojourn;
using Q = Rational;
using Ctx = SeriesContext<Q>;

namespace {

JumpDistribution<Q> bernoulli() { return JumpDistribution<Q>(1, 1, {q(1, 2), Q(0), q(1, 2)}); }

std::pair<FiniteChain<Q>, Partition> small_chain()
{
    FiniteChain<Q> c({{q(1, 3), q(1, 3), q(1, 3), q(0), Q(0)},
                      {q(1, 4), q(1, 4), q(1, 4), q(1, 4), Q(0)},
                      {q(1, 5), q(2, 5), Q(0), q(1, 5), q(1, 5)},
                      {Q(0), q(1, 2), q(1, 6), q(1, 6), q(1, 6)},
                      {q(0), Q(0), q(1, 2), q(1, 4), q(1, 4)}});
    return {c, Partition(5, {1, 2}, {3, 4}, {0})};
}

EntranceKind to_kind(EntranceTarget t)
{
    switch (t) {
    case EntranceTarget::circ: return EntranceKind::circ;
    case EntranceTarget::dag: return EntranceKind::dag;
    case EntranceTarget::plus: return EntranceKind::plus;
    case EntranceTarget::minus: return EntranceKind::minus;
    }
    return EntranceKind::circ;
}

}  // namespace

TEST(Green, CoefficientsAreTransitionPowers)
{
    auto [c, p] = small_chain();
    auto g = green(c, Series1<Q>::variable(3));
    EXPECT_EQ(g(1, 1)[0], 1);
    EXPECT_EQ(g(1, 3)[1], c.p(1, 3));
    Q two_step = 0;
    for (std::size_t k = 0; k < 5; ++k) two_step += c.p(2, k) * c.p(k, 4);
    EXPECT_EQ(g(2, 4)[2], two_step);

    auto gd = green(c.as<double>(), 0.4);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(gd(i, j), g(i, j).evaluate(0.4), 0.4 * 0.4 * 0.4 / 0.6 + 1e-12);
}

TEST(Entrance, GeneratingFunctionsMatchOracle)
{
    auto [c, p] = small_chain();
    const int N = 10;
    auto g = green(c, Series1<Q>::variable(N));
    for (EntranceTarget t : {EntranceTarget::circ, EntranceTarget::dag, EntranceTarget::plus, EntranceTarget::minus}) {
        auto h = entrance_gf(g, p, t);
        for (std::size_t i = 0; i < 5; ++i) {
            auto table = entrance_dp(c, p, i, to_kind(t), N);
            for (std::size_t j = 0; j < 5; ++j)
                for (int e = 0; e <= N; ++e) ASSERT_EQ(h(i, j)[e], table.at(e, j)) << i << "," << j << " e=" << e;
        }
    }
}

TEST(Entrance, DaggerFromCircIdentity)
{
    auto [c, p] = small_chain();
    const auto x = Series1<Q>::variable(9);
    auto g = green(c, x);
    auto h_circ = entrance_gf(g, p, EntranceTarget::circ);
    auto direct = entrance_gf(g, p, EntranceTarget::dag);
    auto via = h_dag_from_h_circ(c, p, h_circ, x);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(direct(i, j), via(i, j)) << i << "," << j;
}

TEST(Entrance, CircSplitAddsUp)
{
    auto [c, p] = small_chain();
    const auto x = Series1<Q>::variable(9);
    auto g = green(c, x);
    auto h_circ = entrance_gf(g, p, EntranceTarget::circ);
    auto split = h_circ_split(c, p, h_circ, x);
    for (std::size_t i : p.e_circ())
        for (std::size_t j : p.e_circ()) EXPECT_EQ(split.dag(i, j) + split.minus(i, j), h_circ(i, j));
}

TEST(KSolve, BoundaryFormsOnBernoulliWalk)
{
    auto w = horizon_window(bernoulli(), 0, 8);
    auto surf = k_solve(w.chain, w.partition, TargetSet::all(), Ctx(7));
    const auto& k0 = *surf.at_y0[w.index_of(0)];
    EXPECT_EQ(k0[0], 1);
    EXPECT_EQ(k0[1], q(1, 2));
    EXPECT_EQ(k0[2], q(1, 2));
    EXPECT_EQ(k0[3], q(3, 8));
    const auto& k = surf.at(w.index_of(0));
    for (int n = 0; n <= 7; ++n) EXPECT_EQ(k.coeff(0, n), (*surf.at_x0[w.index_of(0)])[n]);
    for (int n = 0; n <= 7; ++n) EXPECT_EQ(k.coeff(n, 0), k0[n]);
}

TEST(KSolve, FiniteChainMatchesOracle)
{
    auto [c, p] = small_chain();
    const int N = 9;
    for (const TargetSet& f : {TargetSet::all(), TargetSet::finite({2}), TargetSet::finite({0, 4})}) {
        auto surf = k_solve(c, p, f, Ctx(N));
        for (std::size_t i = 0; i < 5; ++i) {
            auto t = sojourn_dp(c, p, i, f, N, SojournKind::plain);
            for (int n = 0; n <= N; ++n) ASSERT_EQ(distribution_row(surf.at(i), n), t.row(n)) << "i=" << i;
        }
    }
}

TEST(KTildeSolve, FiniteChainMatchesRestrictedOracle)
{
    auto [c, p] = small_chain();
    const int N = 9;
    for (const TargetSet& f : {TargetSet::all(), TargetSet::finite({1})}) {
        auto surf = ktilde_solve(c, p, f, Ctx(N));
        for (std::size_t i : p.e_circ()) {
            auto t = sojourn_dp(c, p, i, f, N, SojournKind::modified, true);
            for (int n = 0; n <= N; ++n) ASSERT_EQ(distribution_row(surf.at(i), n), t.row(n)) << "i=" << i;
        }
        EXPECT_THROW(ktilde_for(c, p, f, 0, Ctx(N)), std::invalid_argument);
    }
}

TEST(KTildeSolve, ChungFellerOnBernoulliWalk)
{
    const int N = 10;
    auto w = horizon_window(bernoulli(), 0, N + 1);
    auto kt = ktilde_for(w.chain, w.partition, TargetSet::all(), w.index_of(0), Ctx(N));
    EXPECT_EQ(distribution_row(kt, 4), (std::vector<Q>{q(3, 8), 0, q(1, 4), 0, q(3, 8)}));
}

TEST(PointMode, AgreesWithPartialSums)
{
    auto [c, p] = small_chain();
    auto cd = c.as<double>();
    const double x = 0.3;
    const double y = 0.6;
    const int N = 70;
    auto surf = k_solve(cd, p, TargetSet::all(), PointContext<double>(x, y));
    auto tsurf = ktilde_solve(cd, p, TargetSet::all(), PointContext<double>(x, y));
    const double tail = std::pow(y, N + 1) / (1 - y) + 1e-12;
    for (std::size_t i = 0; i < 5; ++i) {
        auto t = sojourn_dp(c, p, i, TargetSet::all(), N, SojournKind::plain);
        auto tt = sojourn_dp(c, p, i, TargetSet::all(), N, SojournKind::modified, true);
        double sum = 0;
        double tsum = 0;
        for (int n = 0; n <= N; ++n)
            for (int m = 0; m <= n; ++m) {
                const double w = std::pow(x, m) * std::pow(y, n - m);
                sum += t.prob(n, m).get_d() * w;
                tsum += tt.prob(n, m).get_d() * w;
            }
        EXPECT_NEAR(surf.at(i), sum, tail);
        if (p.in_circ(i)) {
            EXPECT_NEAR(tsurf.at(i), tsum, tail);
        }
    }
}

TEST(Assumptions, SolversRefuseViolatingChains)
{
    FiniteChain<Q> c({{q(1, 2), Q(0), q(1, 2)}, {q(1, 3), q(1, 3), q(1, 3)}, {q(1, 4), q(1, 4), q(1, 2)}});
    Partition p(3, {1}, {2}, {0});
    EXPECT_THROW(k_solve(c, p, TargetSet::all(), Ctx(3)), assumption_error);
    EXPECT_THROW(ktilde_solve(c, p, TargetSet::all(), Ctx(3)), assumption_error);
}

TEST(Property, RandomChainsAgreeWithOracle)
{
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> w(0, 3);
    for (int trial = 0; trial < 8; ++trial) {
        const std::size_t n = 6;
        std::vector<StateClass> cls = {StateClass::minus, StateClass::minus, StateClass::circ,
                                       StateClass::circ,  StateClass::plus,  StateClass::plus};
        std::shuffle(cls.begin(), cls.end(), rng);
        Partition part(cls);
        std::vector<std::vector<Q>> m(n, std::vector<Q>(n));
        for (std::size_t i = 0; i < n; ++i) {
            Q total = 0;
            for (std::size_t j = 0; j < n; ++j) {
                const bool banned = (part.in_minus(i) && part.in_plus(j)) || (part.in_plus(i) && part.in_minus(j));
                m[i][j] = banned ? Q(0) : Q(w(rng) + 1);
                total += m[i][j];
            }
            for (auto& v : m[i]) v /= total;
        }
        FiniteChain<Q> c(m);
        const TargetSet f = TargetSet::finite({static_cast<long>(trial % n)});
        auto ks = k_solve(c, part, f, Ctx(7));
        auto kt = ktilde_solve(c, part, f, Ctx(7));
        for (std::size_t i = 0; i < n; ++i) {
            auto t = sojourn_dp(c, part, i, f, 7, SojournKind::plain);
            for (int k = 0; k <= 7; ++k) ASSERT_EQ(distribution_row(ks.at(i), k), t.row(k));
            if (!part.in_circ(i)) continue;
            auto tt = sojourn_dp(c, part, i, f, 7, SojournKind::modified, true);
            for (int k = 0; k <= 7; ++k) ASSERT_EQ(distribution_row(kt.at(i), k), tt.row(k));
        }
    }
}
