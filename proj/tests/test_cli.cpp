#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args)
{
    const std::string cmd = std::string(SOJOURN_CLI_PATH) + " " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string sample(const std::string& name) { return std::string(SOJOURN_SAMPLES_DIR) + "/" + name; }

std::vector<std::string> lines(const std::string& s)
{
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

bool has_line(const std::string& s, const std::string& line)
{
    for (const auto& l : lines(s))
        if (l == line) return true;
    return false;
}

const std::string kBernoulli = "--lr \"L=1,R=1,pi=1/2,0,1/2\"";

}  // namespace

TEST(Dist, ModifiedSojournAtFour)
{
    auto r = run("dist " + kBernoulli + " --kind Ttilde --n 4 --F all");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(lines(r.out).front(), "n,m,prob");
    EXPECT_TRUE(has_line(r.out, "4,0,3/8"));
    EXPECT_TRUE(has_line(r.out, "4,2,1/4"));
    EXPECT_TRUE(has_line(r.out, "4,4,3/8"));
}

TEST(Dist, ZeroHorizonIsOneRow)
{
    auto r = run("dist " + kBernoulli + " --n 0");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(lines(r.out), (std::vector<std::string>{"n,m,prob", "0,0,1"}));
    auto f = run("dist " + kBernoulli + " --n 0 --F 3");
    EXPECT_EQ(lines(f.out).back(), "0,0,0");
}

TEST(Dist, BothMethodsAgreeOnFiniteChain)
{
    for (const char* kind : {"T", "Ttilde"}) {
        auto r = run("dist --chain " + sample("chain5.json") + " --start 1 --n 6 --method both --kind " + kind);
        ASSERT_EQ(r.code, 0) << kind;
        auto ls = lines(r.out);
        EXPECT_EQ(ls.front(), "n,m,prob,prob_oracle,abs_diff");
        for (std::size_t k = 1; k < ls.size(); ++k) EXPECT_EQ(ls[k].substr(ls[k].rfind(',') + 1), "0") << ls[k];
    }
}

TEST(Dist, FloatBackendWithinTolerance)
{
    auto r = run("dist --chain " + sample("skew21.json") + " --n 6 --method both --backend float");
    EXPECT_EQ(r.code, 0);
}

TEST(Dist, JsonMirrorsCsv)
{
    auto r = run("dist " + kBernoulli + " --n 2 --format json");
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("\"prob\""), std::string::npos);
    EXPECT_NE(r.out.find("\"m\""), std::string::npos);
}

TEST(ExitCodes, AssumptionViolation)
{
    auto r = run("dist --chain " + sample("violating.json") + " --n 3 --start 1");
    EXPECT_EQ(r.code, 2);
}

TEST(ExitCodes, Usage)
{
    EXPECT_EQ(run("dist --nonsense").code, 64);
    EXPECT_EQ(run("").code, 64);
    EXPECT_EQ(run("dist --lr \"L=1,R=1,pi=1/2,1/2\" --n 2").code, 64);
    EXPECT_EQ(run("dist --chain /nonexistent.json --n 2").code, 64);
    EXPECT_EQ(run("eval " + kBernoulli + " --x 1.5 --y 0.5").code, 64);
    EXPECT_EQ(run("simulate " + kBernoulli + " --n 4 --paths 0").code, 64);
    EXPECT_EQ(run("dist " + kBernoulli + " --kind Tbar --n 2").code, 64);
}

TEST(Eval, BernoulliDiagonal)
{
    auto r = run("eval " + kBernoulli + " --x 0.5 --y 0.5");
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(has_line(r.out, "i=0 K=2"));
}

TEST(Eval, CertifiedPartialSum)
{
    auto r = run("eval " + kBernoulli + " --x 0.3 --y 0.6 --certify 60");
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("certify N=60"), std::string::npos);
    EXPECT_NE(r.out.find(" ok"), std::string::npos);
}

TEST(Eval, ClosedFormsCoverOnlyKnownFamilies)
{
    EXPECT_EQ(run("eval --chain " + sample("uniform22.json") + " --x 0.3 --y 0.6 --formula closed").code, 0);
    EXPECT_EQ(run("eval --chain " + sample("lazy_walk.json") + " --x 0.3 --y 0.6 --formula closed --kind Ttilde").code,
              0);
    EXPECT_EQ(run("eval --chain " + sample("skew21.json") + " --x 0.3 --y 0.6 --formula closed").code, 64);
}

TEST(Eval, TwoPathsAgreeForSym22)
{
    auto a = lines(run("eval --chain " + sample("uniform22.json") + " --x 0.3 --y 0.6").out);
    auto b = lines(run("eval --chain " + sample("uniform22.json") + " --x 0.3 --y 0.6 --formula closed").out);
    ASSERT_EQ(a.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        const double va = std::stod(a[i].substr(a[i].find('=', 3) + 1));
        double vb = 0;
        for (const auto& l : b)
            if (l.rfind("i=" + std::to_string(i) + " K=", 0) == 0) vb = std::stod(l.substr(l.find('=', 3) + 1));
        EXPECT_NEAR(va, vb, 1e-9 * va);
    }
}

TEST(Roots, BernoulliAtHalf)
{
    auto r = run("roots " + kBernoulli + " --x 0.5");
    ASSERT_EQ(r.code, 0);
    auto ls = lines(r.out);
    EXPECT_EQ(ls.front(), "k,re,im,modulus,class,residual");
    EXPECT_NE(r.out.find("0.267949"), std::string::npos);
    EXPECT_NE(r.out.find("3.732050"), std::string::npos);
    EXPECT_NE(r.out.find(",in,"), std::string::npos);
    EXPECT_NE(r.out.find(",out,"), std::string::npos);
}

TEST(Roots, Sym22HasFourRoots)
{
    auto r = run("roots --chain " + sample("uniform22.json") + " --x 0.5");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(lines(r.out).size(), 5u);
}

TEST(Roots, NearCriticalStillClassified)
{
    auto r = run("roots " + kBernoulli + " --x 0.999");
    EXPECT_TRUE(r.code == 0 || r.code == 3);
}

TEST(Simulate, SeedRepeatIsByteIdentical)
{
    const std::string args = "simulate --chain " + sample("chain5.json") + " --start 1 --n 6 --paths 2000 --seed 9";
    auto a = run(args);
    auto b = run(args);
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    auto c = run(args + " --threads 3");
    EXPECT_EQ(a.out, c.out);
}

TEST(Verify, QuickSuitePasses)
{
    auto r = run("verify --suite quick");
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(has_line(r.out, "ALL PASS"));
    int pass = 0;
    for (const auto& l : lines(r.out))
        if (l.rfind("PASS [", 0) == 0) ++pass;
    EXPECT_EQ(pass, 10);
}

TEST(Verify, TamperedOracleFails)
{
    auto r = run("verify --suite quick --tamper-oracle");
    EXPECT_NE(r.code, 0);
    EXPECT_TRUE(has_line(r.out, "FAILURES"));
}

TEST(Determinism, DistOutputStable)
{
    const std::string args = "dist --chain " + sample("chain5.json") + " --start 2 --n 5 --kind Ttilde --F 1,3";
    EXPECT_EQ(run(args).out, run(args).out);
}
