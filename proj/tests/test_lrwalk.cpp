#include <sojourn/lrwalk.hpp>
#include <sojourn/oracle.hpp>

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace sojourn;
using Q = Rational;

namespace {

JumpDistribution<Q> bernoulli() { return JumpDistribution<Q>(1, 1, {q(1, 2), Q(0), q(1, 2)}); }

std::vector<JumpDistribution<Q>> walks()
{
    return {JumpDistribution<Q>(1, 1, {q(1, 3), q(1, 6), q(1, 2)}),
            JumpDistribution<Q>(1, 2, {q(1, 4), q(1, 4), q(1, 4), q(1, 4)}),
            JumpDistribution<Q>(2, 1, {q(1, 5), q(1, 5), q(1, 5), q(2, 5)}),
            JumpDistribution<Q>(2, 2, {q(1, 10), q(2, 10), q(3, 10), q(1, 10), q(3, 10)}),
            uniform_family(2, q(1, 5))};
}

double partial_sum(const WalkSojourn<Q>& t, int N, double x, double y)
{
    double s = 0;
    for (int n = 0; n <= N; ++n)
        for (int m = 0; m <= n; ++m) s += t.prob(n, m).get_d() * std::pow(x, m) * std::pow(y, n - m);
    return s;
}

}  // namespace

TEST(Roots, BernoulliQuadratic)
{
    auto rs = roots(bernoulli(), 0.5);
    ASSERT_EQ(rs.roots.size(), 2u);
    ASSERT_EQ(rs.inside.size(), 1u);
    ASSERT_EQ(rs.outside.size(), 1u);
    EXPECT_NEAR(rs.inside_roots()[0].real(), 2 - std::sqrt(3.0), 1e-12);
    EXPECT_NEAR(rs.outside_roots()[0].real(), 2 + std::sqrt(3.0), 1e-12);
    EXPECT_LE(rs.max_residual, kRootResidual);
}

TEST(Roots, SplitCountsMatchLR)
{
    for (const auto& j : walks()) {
        for (double x : {0.1, 0.5, 0.9}) {
            auto rs = roots(j, x);
            EXPECT_EQ(static_cast<int>(rs.inside.size()), j.L());
            EXPECT_EQ(static_cast<int>(rs.outside.size()) + rs.zero_roots, j.R());
            EXPECT_LE(rs.max_residual, kRootResidual);
        }
    }
}

TEST(Roots, SymmetricWalksPairInverses)
{
    auto j = rho_binomial_family(3, q(1, 2), q(1, 10));
    auto rs = roots(j, 0.7);
    for (const auto& z : rs.inside_roots()) {
        double best = 1e9;
        for (const auto& w : rs.outside_roots()) best = std::min(best, std::abs(z * w - 1.0));
        EXPECT_LT(best, 1e-9);
    }
}

TEST(Roots, ExplicitSym22Roots)
{
    auto j = uniform_family(2, q(1, 5));
    auto law = sym22_law(j);
    auto ex = sym22_roots(law, 0.6);
    auto rs = roots(j, 0.6);
    for (const auto& z : ex.all()) {
        double best = 1e9;
        for (const auto& w : rs.roots) best = std::min(best, std::abs(z - w));
        EXPECT_LT(best, 1e-9);
    }
    EXPECT_GT(std::abs(ex.z2_as_printed), 1.0);
    EXPECT_THROW(sym22_law(JumpDistribution<Q>(2, 2, {q(1, 10), q(2, 10), q(3, 10), q(1, 10), q(3, 10)})),
                 std::invalid_argument);
}

TEST(Gamma, CentralBinomialSeries)
{
    auto g = gamma_series(bernoulli(), 6, 0, 0);
    const auto& g0 = g.at(0);
    EXPECT_EQ(g0[0], 1);
    EXPECT_EQ(g0[1], 0);
    EXPECT_EQ(g0[2], q(1, 2));
    EXPECT_EQ(g0[3], 0);
    EXPECT_EQ(g0[4], q(3, 8));
}

TEST(Gamma, NumericRoutesAgree)
{
    for (const auto& j : walks()) {
        if (!j.symmetric()) continue;
        for (double x : {0.2, 0.5, 0.8}) {
            auto a = gamma_numeric(j, x, -4, 4, GammaRoute::general);
            auto b = gamma_numeric(j, x, -4, 4, GammaRoute::symmetric);
            for (int d = -4; d <= 4; ++d) EXPECT_NEAR(a.at(d), b.at(d), 1e-11 * std::fabs(a.at(d)) + 1e-14);
        }
    }
}

TEST(Gamma, NumericMatchesSeries)
{
    for (const auto& j : walks()) {
        auto gs = gamma_series(j, 60, -3, 3);
        auto gn = gamma_numeric(j, 0.4, -3, 3);
        for (int d = -3; d <= 3; ++d) EXPECT_NEAR(gn.at(d), gs.at(d).evaluate(0.4), 1e-12);
    }
}

TEST(Matrices, PlusBlockForM2)
{
    JumpDistribution<Q> j(2, 1, {q(1, 8), q(1, 4), q(1, 4), q(3, 8)});
    auto sides = detail::series_sides(j, TargetSet::all(), 2);
    const auto& pp = sides.mx.Pplus;
    EXPECT_EQ(pp(0, 0).coeff(0, 0), j.pi(2));
    EXPECT_EQ(pp(0, 1).coeff(0, 0), 0);
    EXPECT_EQ(pp(1, 0).coeff(0, 0), j.pi(1));
    EXPECT_EQ(pp(1, 1).coeff(0, 0), j.pi(2));
}

TEST(MatrixTheorem, SeriesMatchesOracle)
{
    const int N = 8;
    for (const auto& j : walks()) {
        for (const TargetSet& f : {TargetSet::all(), TargetSet::finite({0})}) {
            auto k = k_lr_series(j, f, N);
            auto kt = ktilde_lr_series(j, f, N);
            for (int i = 0; i < j.M(); ++i) {
                auto t = walk_sojourn_dp(j, i, f, N, SojournKind::plain);
                auto tt = walk_sojourn_dp(j, i, f, N, SojournKind::modified, true);
                for (int n = 0; n <= N; ++n) {
                    ASSERT_EQ(k[static_cast<std::size_t>(i)].slice_n(n), t.row(n));
                    ASSERT_EQ(kt[static_cast<std::size_t>(i)].slice_n(n), tt.row(n));
                }
            }
        }
    }
}

TEST(MatrixTheorem, BernoulliChungFeller)
{
    auto kt = ktilde_lr_series(bernoulli(), TargetSet::all(), 6);
    EXPECT_EQ(kt[0].slice_n(4), (std::vector<Q>{q(3, 8), 0, q(1, 4), 0, q(3, 8)}));
}

TEST(MatrixTheorem, DisplayedIpmFormLosesMass)
{
    // varpi_0 < 1 when r > 0, so the displayed form undercounts
    JumpDistribution<Q> j(1, 1, {q(1, 4), q(1, 2), q(1, 4)});
    auto good = ktilde_lr_series(j, TargetSet::all(), 6);
    auto shown = ktilde_lr_series(j, TargetSet::all(), 6, KtildeForm::as_printed);
    EXPECT_EQ(good[0].coeff(0, 0), shown[0].coeff(0, 0));
    EXPECT_NE(good[0].slice_n(3), shown[0].slice_n(3));
    // with varpi = 1 both forms coincide
    auto b1 = ktilde_lr_series(bernoulli(), TargetSet::all(), 6);
    auto b2 = ktilde_lr_series(bernoulli(), TargetSet::all(), 6, KtildeForm::as_printed);
    EXPECT_EQ(b1[0], b2[0]);
}

TEST(MatrixTheorem, NumericWithinTailBound)
{
    const int N = 50;
    for (const auto& j : walks()) {
        auto k = k_lr(j.as<double>(), TargetSet::all(), 0.5, 0.3);
        auto kt = ktilde_lr(j.as<double>(), TargetSet::all(), 0.5, 0.3);
        const double tail = std::pow(0.5, N + 1) / 0.5 + 1e-14;
        for (int i = 0; i < j.M(); ++i) {
            auto t = walk_sojourn_dp(j, i, TargetSet::all(), N, SojournKind::plain);
            auto tt = walk_sojourn_dp(j, i, TargetSet::all(), N, SojournKind::modified, true);
            EXPECT_NEAR(k[static_cast<std::size_t>(i)], partial_sum(t, N, 0.5, 0.3), tail);
            EXPECT_NEAR(kt[static_cast<std::size_t>(i)], partial_sum(tt, N, 0.5, 0.3), tail);
        }
    }
}

TEST(MatrixTheorem, Bernoulli)
{
    auto k = k_lr(bernoulli().as<double>(), TargetSet::all(), 0.5, 0.5);
    EXPECT_NEAR(k[0], 2.0, 1e-12);
    EXPECT_THROW(k_lr(bernoulli().as<double>(), TargetSet::all(), 1.0, 0.5), std::invalid_argument);
}

TEST(Symmetric22, ExplicitMatchesGeneric)
{
    for (const auto& j : {uniform_family(2, q(1, 5)), binomial_family(2, q(1, 20)),
                          rho_binomial_family(2, q(1, 2), q(1, 6))}) {
        for (auto [x, y] : {std::pair{0.3, 0.6}, std::pair{0.7, 0.2}, std::pair{0.5, 0.5}}) {
            auto ex = symmetric22(j, TargetSet::all(), x, y);
            auto k = k_lr(j.as<double>(), TargetSet::all(), x, y);
            auto kt = ktilde_lr(j.as<double>(), TargetSet::all(), x, y);
            for (std::size_t i = 0; i < 2; ++i) {
                EXPECT_NEAR(ex.k[i], k[i], 1e-9 * std::fabs(k[i]));
                EXPECT_NEAR(ex.ktilde[i], kt[i], 1e-9 * std::fabs(kt[i]));
            }
        }
    }
}

TEST(Families, ValidLaws)
{
    auto b = binomial_family(3, q(1, 100));
    EXPECT_TRUE(b.symmetric());
    EXPECT_EQ(b.pi(1), q(15, 100));
    auto u = uniform_family(3, q(1, 7));
    EXPECT_EQ(u.pi(0), q(1, 7));
    auto r = rho_binomial_family(2, q(1, 3), q(1, 4));
    EXPECT_EQ(r.pi(2), q(1, 4) * q(1, 9));
    EXPECT_THROW(uniform_family(2, q(1, 3)), std::invalid_argument);
}

TEST(Families, RhoBinomialZeroHoldingBound)
{
    // pi_0 = 0 at c = 1/(2((rho+1)^M - 1)); the displayed 1/(2(rho+1)^M - 1) lands elsewhere
    const Rational rho = q(1, 2);
    auto edge = rho_binomial_family(2, rho, q(2, 5));
    EXPECT_EQ(edge.pi(0), 0);
    auto displayed = rho_binomial_family(2, rho, q(2, 7));
    EXPECT_GT(displayed.pi(0), 0);
}
