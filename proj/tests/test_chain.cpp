#include <sojourn/chain.hpp>
#include <sojourn/chain_io.hpp>

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace sojourn;
using Q = Rational;

namespace {

Q r(long n, long d = 1) { return q(n, d); }

JumpDistribution<Q> bernoulli() { return JumpDistribution<Q>(1, 1, {r(1, 2), r(0), r(1, 2)}); }

}  // namespace

TEST(Scalar, ParsesFractionsAndDecimalsExactly)
{
    EXPECT_EQ(scalar_traits<Q>::parse("3/8"), r(3, 8));
    EXPECT_EQ(scalar_traits<Q>::parse("0.125"), r(1, 8));
    EXPECT_EQ(scalar_traits<Q>::parse("2"), r(2));
    EXPECT_EQ(scalar_traits<Q>::format(r(6, 16)), "3/8");
    EXPECT_THROW(scalar_traits<Q>::parse("abc"), std::invalid_argument);
}

TEST(Jump, RejectsBadLaws)
{
    EXPECT_THROW(JumpDistribution<Q>(0, 1, {r(1, 2), r(1, 2)}), std::invalid_argument);
    EXPECT_THROW(JumpDistribution<Q>(1, 1, {r(1, 2), r(1, 2)}), std::invalid_argument);
    EXPECT_THROW(JumpDistribution<Q>(1, 1, {r(1, 2), r(1, 2), r(1, 2)}), std::invalid_argument);
    EXPECT_THROW(JumpDistribution<Q>(1, 1, {r(-1, 2), r(1), r(1, 2)}), std::invalid_argument);
}

TEST(Jump, SupportAndSymmetry)
{
    JumpDistribution<Q> j(2, 1, {r(1, 4), r(1, 4), r(1, 4), r(1, 4)});
    EXPECT_EQ(j.M(), 2);
    EXPECT_EQ(j.pi(-2), r(1, 4));
    EXPECT_EQ(j.pi(2), r(0));
    EXPECT_FALSE(j.symmetric());
    EXPECT_TRUE(bernoulli().symmetric());
    auto d = bernoulli().as<double>();
    EXPECT_DOUBLE_EQ(d.pi(1), 0.5);
}

TEST(FiniteChainTest, RowsMustBeStochastic)
{
    EXPECT_THROW(FiniteChain<Q>({{r(1, 2), r(1, 3)}, {r(0), r(1)}}), std::invalid_argument);
    EXPECT_THROW(FiniteChain<Q>({{r(1)}, {r(1)}}), std::invalid_argument);
    FiniteChain<Q> c({{r(1, 2), r(1, 2)}, {r(1, 3), r(2, 3)}});
    EXPECT_EQ(c.size(), 2u);
    EXPECT_EQ(c.p(1, 1), r(2, 3));
}

TEST(PartitionTest, MustCoverWithoutOverlap)
{
    EXPECT_THROW(Partition(3, {0}, {1}, {}), std::invalid_argument);
    EXPECT_THROW(Partition(3, {0, 1}, {1}, {2}), std::invalid_argument);
    Partition p(3, {1}, {2}, {0});
    EXPECT_TRUE(p.in_minus(0));
    EXPECT_TRUE(p.in_circ(1));
    EXPECT_TRUE(p.in_plus(2));
    EXPECT_TRUE(p.in_dag(1));
    EXPECT_FALSE(p.in_dag(0));
    EXPECT_EQ(p.e_dag().size(), 2u);
}

TEST(Assumptions, ReportsEdgesAcrossTheMiddle)
{
    FiniteChain<Q> c({{r(1, 2), r(0), r(1, 2)}, {r(1, 3), r(1, 3), r(1, 3)}, {r(1, 4), r(1, 4), r(1, 2)}});
    Partition p(3, {1}, {2}, {0});
    auto rep = check_assumptions(c, p);
    ASSERT_EQ(rep.violations.size(), 2u);
    EXPECT_STREQ(rep.violations[0].assumption, "A1");
    EXPECT_STREQ(rep.violations[1].assumption, "A2");
    EXPECT_THROW(require_assumptions(c, p), assumption_error);

    FiniteChain<Q> ok({{r(1, 2), r(1, 2), r(0)}, {r(1, 3), r(1, 3), r(1, 3)}, {r(0), r(1, 4), r(3, 4)}});
    EXPECT_TRUE(check_assumptions(ok, p).ok());
}

TEST(LrPartitionTest, CanonicalClasses)
{
    JumpDistribution<Q> j(2, 2, {r(1, 5), r(1, 5), r(1, 5), r(1, 5), r(1, 5)});
    const auto part = lr_canonical_partition(j);
    EXPECT_EQ(part.classify(-1), StateClass::minus);
    EXPECT_EQ(part.classify(0), StateClass::circ);
    EXPECT_EQ(part.classify(1), StateClass::circ);
    EXPECT_EQ(part.classify(2), StateClass::plus);
}

TEST(Varpi, MeasuresExitFromTheMiddle)
{
    EXPECT_EQ(varpi(bernoulli(), 0), r(1));
    // M=2: varpi_0 = 1 - pi_0 - pi_1
    JumpDistribution<Q> j(2, 2, {r(1, 10), r(2, 10), r(3, 10), r(1, 10), r(3, 10)});
    EXPECT_EQ(varpi(j, 0), r(1) - j.pi(0) - j.pi(1));
    EXPECT_EQ(varpi(j, 1), r(1) - j.pi(0) - j.pi(-1));
}

TEST(WindowTest, TruncationKeepsRowsStochastic)
{
    auto w = materialize_window(bernoulli(), -3, 4);
    EXPECT_EQ(w.chain.size(), 10u);
    EXPECT_EQ(w.chain.p(w.index_of(-3), w.lower_sentinel()), r(1, 2));
    EXPECT_EQ(w.chain.p(w.index_of(4), w.upper_sentinel()), r(1, 2));
    EXPECT_TRUE(w.partition.in_minus(w.lower_sentinel()));
    EXPECT_TRUE(w.partition.in_plus(w.upper_sentinel()));
    EXPECT_TRUE(w.partition.in_circ(w.index_of(0)));
    EXPECT_TRUE(check_assumptions(w.chain, w.partition).ok());
    auto f = w.translate(TargetSet::finite({0, 9}));
    EXPECT_EQ(f.states(), std::set<long>{static_cast<long>(w.index_of(0))});
    EXPECT_THROW(materialize_window(bernoulli(), 0, 1), std::invalid_argument);
}

TEST(WindowTest, HorizonWindowCoversReach)
{
    JumpDistribution<Q> j(1, 2, {r(1, 3), r(1, 3), r(0), r(1, 3)});
    auto w = horizon_window(j, 1, 5);
    EXPECT_LE(w.lo, 1 - 5);
    EXPECT_GE(w.hi, 1 + 10);
}

TEST(TargetSetTest, Describe)
{
    EXPECT_EQ(TargetSet::all().describe(), "all");
    EXPECT_EQ(TargetSet::finite({5, 0, 3}).describe(), "0,3,5");
    EXPECT_TRUE(TargetSet::all().contains(-7));
    EXPECT_FALSE(TargetSet::finite({1}).contains(0));
}

TEST(ChainIo, ParsesFiniteJson)
{
    auto src = parse_chain_text(R"({"type":"finite","P":[["1/2","1/2",0],["1/4","1/2","1/4"],[0,"0.5","0.5"]],
        "E_minus":[0],"E_circ":[1],"E_plus":[2]})");
    ASSERT_FALSE(src.is_lr());
    EXPECT_EQ(src.chain->p(1, 2), r(1, 4));
    EXPECT_TRUE(src.partition->in_plus(2));
    EXPECT_THROW(src.lr(), input_error);
}

TEST(ChainIo, ParsesLrJsonAndInline)
{
    auto a = parse_chain_text(R"({"type":"lr","L":1,"R":1,"pi":["1/2",0,"1/2"]})");
    auto b = parse_lr_inline("L=1,R=1,pi=1/2,0,0.5");
    ASSERT_TRUE(a.is_lr());
    ASSERT_TRUE(b.is_lr());
    EXPECT_EQ(a.lr().probs(), b.lr().probs());
}

TEST(ChainIo, RejectsMalformedInput)
{
    EXPECT_THROW(parse_chain_text("{"), input_error);
    EXPECT_THROW(parse_chain_text(R"({"type":"tree"})"), input_error);
    EXPECT_THROW(parse_chain_text(R"({"type":"lr","L":1,"R":1,"pi":[1,1,1]})"), input_error);
    EXPECT_THROW(parse_lr_inline("L=1,pi=1/2,1/2"), input_error);
    EXPECT_THROW(parse_lr_inline("L=1,R=1,pi=1/2,x,1/2"), input_error);
    EXPECT_THROW(load_chain_file("/nonexistent/chain.json"), input_error);
}

TEST(ChainIo, JsonRoundTrip)
{
    auto j = JumpDistribution<Q>(2, 1, {r(1, 8), r(3, 8), r(1, 4), r(1, 4)});
    auto back = parse_chain_json(to_json(j));
    EXPECT_EQ(back.lr().probs(), j.probs());

    FiniteChain<Q> c({{r(1, 2), r(1, 2)}, {r(1, 3), r(2, 3)}});
    Partition p(2, {0}, {1}, {});
    auto fin = parse_chain_json(to_json(c, p));
    EXPECT_EQ(fin.chain->matrix(), c.matrix());
    EXPECT_EQ(fin.partition->classes(), p.classes());
}
