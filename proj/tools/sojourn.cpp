// sojourn: distributions, generating functions, roots, verification, simulation.

#include "sojourn/chain.hpp"
#include "sojourn/chain_io.hpp"
#include "sojourn/closedform.hpp"
#include "sojourn/errors.hpp"
#include "sojourn/genfun.hpp"
#include "sojourn/lrwalk.hpp"
#include "sojourn/oracle.hpp"
#include "sojourn/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <boost/math/distributions/chi_squared.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace sojourn;
using Q = Rational;

namespace {

enum Exit { kOk = 0, kFailed = 1, kAssumption = 2, kNumerical = 3, kUsage = 64 };

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string chain_file;
    std::string lr_inline;
    std::string kind = "T";
    std::string F = "all";
    long start = 0;
    std::string format = "csv";
    std::string out;
};

ChainSource load_source(const Common& c)
{
    if (c.chain_file.empty() == c.lr_inline.empty()) throw usage_error("give exactly one of --chain and --lr");
    return c.chain_file.empty() ? parse_lr_inline(c.lr_inline) : load_chain_file(c.chain_file);
}

SojournKind parse_kind(const std::string& k)
{
    if (k == "T") return SojournKind::plain;
    if (k == "Ttilde") return SojournKind::modified;
    throw usage_error("--kind must be T or Ttilde");
}

TargetSet parse_target(const std::string& text)
{
    if (text == "all") return TargetSet::all();
    std::set<long> states;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = detail::trim(tok);
        try {
            std::size_t used = 0;
            const long v = std::stol(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            states.insert(v);
        } catch (const std::exception&) {
            throw usage_error("--F must be all or a comma list of states, got '" + text + "'");
        }
    }
    if (states.empty()) throw usage_error("--F lists no states");
    return TargetSet::finite(std::move(states));
}

/// A finite chain to run on: the given one, or a window of the walk exact to `horizon`.
template <typename S>
struct Problem {
    FiniteChain<S> chain;
    Partition part;
    std::size_t start;
    TargetSet target;  // chain indices
    std::optional<JumpDistribution<S>> jump;
};

template <typename S>
Problem<S> make_problem(const ChainSource& src, long start, const TargetSet& F, int horizon)
{
    if (src.is_lr()) {
        const JumpDistribution<S> j = src.lr().as<S>();
        const Window<S> w = horizon_window(j, start, horizon + 1);
        return Problem<S>{w.chain, w.partition, w.index_of(start), w.translate(F), j};
    }
    const FiniteChain<Q>& c = *src.chain;
    if (start < 0 || static_cast<std::size_t>(start) >= c.size()) throw usage_error("--start outside the chain");
    if (!F.is_all()) {
        for (long s : F.states())
            if (s < 0 || static_cast<std::size_t>(s) >= c.size()) throw usage_error("--F names a state outside the chain");
    }
    return Problem<S>{c.as<S>(), *src.partition, static_cast<std::size_t>(start), F, std::nullopt};
}

void require_boundary(const ChainSource& src)
{
    if (!src.is_lr()) require_assumptions(*src.chain, *src.partition);
}

struct Output {
    std::ofstream file;
    std::ostream* os = &std::cout;
    explicit Output(const std::string& path)
    {
        if (!path.empty()) {
            file.open(path);
            if (!file) throw usage_error("cannot write " + path);
            os = &file;
        }
    }
};

// ---------------------------------------------------------------------------
// dist

struct DistOptions {
    Common c;
    int n = 10;
    std::string method = "gf";
    std::string backend = "rational";
};

template <typename S>
std::vector<std::vector<S>> gf_table(const ChainSource& src, const DistOptions& o, const TargetSet& F, SojournKind kind)
{
    const bool tilde = kind == SojournKind::modified;
    Series2<S> k;
    if (src.is_lr() && o.c.start >= 0 && o.c.start < src.lr().M()) {
        const JumpDistribution<S> j = src.lr().as<S>();
        const auto ks = tilde ? ktilde_lr_series(j, F, o.n) : k_lr_series(j, F, o.n);
        k = ks.at(static_cast<std::size_t>(o.c.start));
    } else {
        const Problem<S> p = make_problem<S>(src, o.c.start, F, o.n);
        if (tilde) {
            k = ktilde_for(p.chain, p.part, p.target, p.start, SeriesContext<S>(o.n));
        } else {
            k = k_solve(p.chain, p.part, p.target, SeriesContext<S>(o.n)).at(p.start);
        }
    }
    std::vector<std::vector<S>> rows;
    for (int n = 0; n <= o.n; ++n) rows.push_back(k.slice_n(n));
    return rows;
}

template <typename S>
std::vector<std::vector<S>> oracle_table(const ChainSource& src, const DistOptions& o, const TargetSet& F, SojournKind kind)
{
    const Problem<S> p = make_problem<S>(src, o.c.start, F, o.n);
    const auto table = sojourn_dp(p.chain, p.part, p.start, p.target, o.n, kind, kind == SojournKind::modified);
    std::vector<std::vector<S>> rows;
    for (int n = 0; n <= o.n; ++n) rows.push_back(table.row(n));
    return rows;
}

template <typename S>
int dist_run(const ChainSource& src, const DistOptions& o)
{
    const SojournKind kind = parse_kind(o.c.kind);
    const TargetSet F = parse_target(o.c.F);
    if (o.n < 0) throw usage_error("--n must be nonnegative");
    if (o.method != "gf" && o.method != "oracle" && o.method != "both") throw usage_error("--method must be gf, oracle or both");
    if (o.c.format != "csv" && o.c.format != "json") throw usage_error("--format must be csv or json");
    require_boundary(src);

    const bool both = o.method == "both";
    const auto primary = o.method == "oracle" ? oracle_table<S>(src, o, F, kind) : gf_table<S>(src, o, F, kind);
    std::vector<std::vector<S>> second;
    if (both) second = oracle_table<S>(src, o, F, kind);

    const double tol = scalar_traits<S>::exact ? 0.0 : 1e-11;
    double max_diff = 0;
    Output out(o.c.out);
    nlohmann::json rows = nlohmann::json::array();
    if (o.c.format == "csv") *out.os << (both ? "n,m,prob,prob_oracle,abs_diff\n" : "n,m,prob\n");
    for (int n = 0; n <= o.n; ++n) {
        for (int m = 0; m <= n; ++m) {
            const S& v = primary[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)];
            if (o.c.format == "csv") *out.os << n << ',' << m << ',' << scalar_traits<S>::format(v);
            nlohmann::json row{{"n", n}, {"m", m}, {"prob", scalar_traits<S>::format(v)}};
            if (both) {
                const S& w = second[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)];
                const S d = scalar_traits<S>::abs(S(v - w));
                max_diff = std::max(max_diff, scalar_traits<S>::to_double(d));
                if (o.c.format == "csv") *out.os << ',' << scalar_traits<S>::format(w) << ',' << scalar_traits<S>::format(d);
                row["prob_oracle"] = scalar_traits<S>::format(w);
                row["abs_diff"] = scalar_traits<S>::format(d);
            }
            if (o.c.format == "csv") *out.os << '\n';
            rows.push_back(std::move(row));
        }
    }
    if (o.c.format == "json") {
        nlohmann::json doc{{"kind", o.c.kind}, {"start", o.c.start}, {"F", F.describe()}, {"method", o.method},
                           {"backend", scalar_traits<S>::name}, {"rows", rows}};
        if (both) doc["max_abs_diff"] = max_diff;
        *out.os << doc.dump(2) << '\n';
    }
    if (both && max_diff > tol) {
        std::cerr << "max abs diff " << max_diff << " exceeds tolerance " << tol << '\n';
        return kNumerical;
    }
    return kOk;
}

int cmd_dist(const DistOptions& o)
{
    const ChainSource src = load_source(o.c);
    if (o.backend == "rational") return dist_run<Q>(src, o);
    if (o.backend == "float") return dist_run<double>(src, o);
    throw usage_error("--backend must be rational or float");
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
    Common c;
    double x = 0.5, y = 0.5;
    std::string formula = "structural";
    int certify = -1;
};

int cmd_eval(const EvalOptions& o)
{
    const ChainSource src = load_source(o.c);
    const SojournKind kind = parse_kind(o.c.kind);
    const bool tilde = kind == SojournKind::modified;
    const TargetSet F = parse_target(o.c.F);
    if (!(o.x > 0 && o.x < 1 && o.y > 0 && o.y < 1)) throw usage_error("--x and --y must lie in (0,1)");
    require_boundary(src);
    std::cout.precision(17);

    std::vector<std::pair<long, double>> values;  // (start, value)
    if (o.formula == "structural") {
        if (src.is_lr()) {
            const auto jd = src.lr().as<double>();
            const auto v = tilde ? ktilde_lr(jd, F, o.x, o.y) : k_lr(jd, F, o.x, o.y);
            for (std::size_t i = 0; i < v.size(); ++i) values.emplace_back(static_cast<long>(i), v[i]);
        } else {
            const auto chain = src.chain->as<double>();
            const PointContext<double> ctx(o.x, o.y);
            const auto surf = tilde ? ktilde_solve(chain, *src.partition, F, ctx) : k_solve(chain, *src.partition, F, ctx);
            for (std::size_t i = 0; i < chain.size(); ++i)
                if (surf.k[i]) values.emplace_back(static_cast<long>(i), *surf.k[i]);
        }
    } else if (o.formula == "closed") {
        if (!src.is_lr()) throw usage_error("closed formulas exist for (L,R) walks only");
        const auto& j = src.lr();
        if (j.L() == 1 && j.R() == 1) {
            OrdinaryTarget t;
            if (F.is_all()) {
                t = OrdinaryTarget::all;
            } else if (F.states() == std::set<long>{0}) {
                t = OrdinaryTarget::origin;
            } else {
                throw usage_error("closed ordinary-walk formulas take --F all or --F 0");
            }
            const auto w = OrdinaryWalk<Q>::from_jump(j).numeric();
            values.emplace_back(0, tilde ? ktilde0_closed(w, t, o.x, o.y) : k0_closed(w, t, o.x, o.y));
            if (tilde) std::cerr << "displayed K~ form; compare verify's erratum report\n";
        } else if (j.L() == 2 && j.R() == 2 && j.symmetric()) {
            if (!F.is_all()) throw usage_error("explicit (2,2) formulas take --F all");
            const Sym22Result r = symmetric22(j.as<double>(), F, o.x, o.y);
            const auto& v = tilde ? r.ktilde : r.k;
            for (std::size_t i = 0; i < v.size(); ++i) values.emplace_back(static_cast<long>(i), v[i]);
            const auto& p = tilde ? r.ktilde_inverse_as_printed : r.k_inverse_as_printed;
            for (std::size_t i = 0; i < p.size(); ++i)
                std::cout << "i=" << i << " as_printed " << (tilde ? "Ktilde" : "K") << "=" << p[i] << '\n';
        } else {
            throw usage_error("closed formulas cover M = 1 and symmetric (2,2) walks");
        }
    } else {
        throw usage_error("--formula must be structural or closed");
    }

    for (const auto& [i, v] : values) std::cout << "i=" << i << ' ' << (tilde ? "Ktilde" : "K") << '=' << v << '\n';

    if (o.certify >= 0) {
        const int N = o.certify;
        const double mx = std::max(o.x, o.y);
        bool ok = true;
        for (const auto& [i, v] : values) {
            const Problem<Q> p = make_problem<Q>(src, i, F, N);
            const auto table = sojourn_dp(p.chain, p.part, p.start, p.target, N, kind, tilde);
            long double partial = 0;
            for (int n = 0; n <= N; ++n)
                for (int m = 0; m <= n; ++m)
                    partial += static_cast<long double>(table.prob(n, m).get_d()) * std::pow(static_cast<long double>(o.x), m) *
                               std::pow(static_cast<long double>(o.y), n - m);
            const double diff = std::fabs(v - static_cast<double>(partial));
            const double bound = std::pow(mx, N + 1) / (1 - mx) + verify_detail::kRoundoffUnits * std::max(1.0, std::fabs(v));
            ok = ok && diff <= bound;
            std::cout << "i=" << i << " certify N=" << N << " partial=" << static_cast<double>(partial) << " diff=" << diff
                      << " bound=" << bound << (diff <= bound ? " ok" : " EXCEEDED") << '\n';
        }
        if (!ok) return kNumerical;
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// roots

struct RootsOptions {
    Common c;
    double x = 0.5;
};

int cmd_roots(const RootsOptions& o)
{
    const ChainSource src = load_source(o.c);
    if (!src.is_lr()) throw usage_error("roots needs an (L,R) walk");
    if (!(o.x > 0 && o.x < 1)) throw usage_error("--x must lie in (0,1)");
    const RootSet rs = roots(src.lr().as<double>(), o.x);
    std::cout << "k,re,im,modulus,class,residual\n";
    char buf[256];
    for (std::size_t k = 0; k < rs.roots.size(); ++k) {
        const cdouble z = rs.roots[k];
        const bool in = std::find(rs.inside.begin(), rs.inside.end(), k) != rs.inside.end();
        const double res = std::abs(rs.poly.eval(z)) / rs.poly.magnitude(z);
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%s,%.3g\n", k, z.real(), z.imag(), std::abs(z),
                      in ? "in" : "out", res);
        std::cout << buf;
    }
    if (rs.zero_roots > 0) std::cout << "# " << rs.zero_roots << " root(s) at z = 0 deflated\n";
    return kOk;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyCli {
    std::string suite = "quick";
    std::string json_out;
    bool tamper = false;
    unsigned jobs = 0;
    std::uint64_t seed = 0;
};

int cmd_verify(const VerifyCli& v)
{
    VerifyOptions opt;
    if (v.suite == "quick") {
        opt.suite = Suite::quick;
    } else if (v.suite == "full") {
        opt.suite = Suite::full;
    } else {
        throw usage_error("--suite must be quick or full");
    }
    opt.tamper_oracle = v.tamper;
    opt.jobs = v.jobs;
    opt.seed = v.seed;
    const VerifyReport rep = run_verification(opt);
    for (const auto& c : rep.criteria) std::cout << format_line(c) << '\n';
    int mismatches = 0;
    for (const auto& e : rep.errata) mismatches += e.count(Verdict::mismatch);
    std::cout << "erratum report: " << rep.errata.size() << " walks, " << mismatches << " printed-form mismatches\n";
    std::cout << (rep.all_passed() ? "ALL PASS" : "FAILURES") << '\n';
    if (!v.json_out.empty()) {
        std::ofstream f(v.json_out);
        if (!f) throw usage_error("cannot write " + v.json_out);
        f << to_json(rep).dump(2) << '\n';
    }
    return rep.all_passed() ? kOk : kFailed;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
    Common c;
    int n = 10;
    long long paths = 10000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    bool compare = false;
};

int cmd_simulate(const SimulateOptions& o)
{
    const ChainSource src = load_source(o.c);
    const SojournKind kind = parse_kind(o.c.kind);
    const TargetSet F = parse_target(o.c.F);
    if (o.paths < 1) throw usage_error("--paths must be at least 1");
    if (o.n < 0) throw usage_error("--n must be nonnegative");
    require_boundary(src);
    const Problem<Q> p = make_problem<Q>(src, o.c.start, F, o.n);
    const auto chain = p.chain.as<double>();
    const EmpiricalTable emp = monte_carlo(chain, p.part, p.start, p.target, o.n, kind,
                                           static_cast<std::uint64_t>(o.paths), o.seed, o.threads);
    std::optional<SojournTable<Q>> exact;
    if (o.compare) exact = sojourn_dp(p.chain, p.part, p.start, p.target, o.n, kind);

    Output out(o.c.out);
    char buf[128];
    *out.os << (o.compare ? "n,m,count,freq,prob,abs_diff\n" : "n,m,count,freq\n");
    for (int n = 0; n <= o.n; ++n) {
        for (int m = 0; m <= n; ++m) {
            std::snprintf(buf, sizeof buf, "%d,%d,%llu,%.17g", n, m,
                          static_cast<unsigned long long>(emp.counts[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)]),
                          emp.freq(n, m));
            *out.os << buf;
            if (exact) {
                const double pr = exact->prob(n, m).get_d();
                std::snprintf(buf, sizeof buf, ",%.17g,%.17g", pr, std::fabs(pr - emp.freq(n, m)));
                *out.os << buf;
            }
            *out.os << '\n';
        }
    }
    if (exact) {
        // chi-square on the last row, cells with positive exact probability
        double stat = 0, missing = 1;
        int cells = 0;
        for (int m = 0; m <= o.n; ++m) {
            const double pr = exact->prob(o.n, m).get_d();
            if (pr <= 0) continue;
            missing -= pr;
            const double e = pr * static_cast<double>(o.paths);
            const double d = static_cast<double>(emp.counts[static_cast<std::size_t>(o.n)][static_cast<std::size_t>(m)]) - e;
            stat += d * d / e;
            ++cells;
        }
        if (cells >= 2) {
            const boost::math::chi_squared dist(cells - 1);
            const double pval = boost::math::cdf(boost::math::complement(dist, stat));
            std::cerr << "chi-square n=" << o.n << " stat=" << stat << " df=" << cells - 1 << " p-value=" << pval << '\n';
        }
    }
    return kOk;
}

void add_common(CLI::App* sub, Common& c, bool with_output)
{
    sub->add_option("--chain", c.chain_file, "chain JSON file");
    sub->add_option("--lr", c.lr_inline, "inline walk: L=<int>,R=<int>,pi=<c_-L>,...,<c_R>");
    sub->add_option("--kind", c.kind, "T or Ttilde");
    sub->add_option("--F", c.F, "all or a comma list of states");
    sub->add_option("--start", c.start, "start state");
    if (with_output) {
        sub->add_option("--format", c.format, "csv or json");
        sub->add_option("--out", c.out, "output file (default stdout)");
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"sojourn: joint laws of sojourn times for Markov chains through a boundary"};
    app.require_subcommand(1);

    DistOptions dist;
    auto* d = app.add_subcommand("dist", "joint law P{T_n = m, X_n in F} for n up to N");
    add_common(d, dist.c, true);
    d->add_option("--n", dist.n, "horizon N");
    d->add_option("--method", dist.method, "gf, oracle or both");
    d->add_option("--backend", dist.backend, "rational or float");

    EvalOptions ev;
    auto* e = app.add_subcommand("eval", "evaluate K or K~ at (x,y)");
    add_common(e, ev.c, false);
    e->add_option("--x", ev.x, "x in (0,1)");
    e->add_option("--y", ev.y, "y in (0,1)");
    e->add_option("--formula", ev.formula, "structural or closed");
    e->add_option("--certify", ev.certify, "compare with the exact partial sum to order N");

    RootsOptions ro;
    auto* r = app.add_subcommand("roots", "roots of the characteristic polynomial at x");
    add_common(r, ro.c, false);
    r->add_option("--x", ro.x, "x in (0,1)");

    VerifyCli vc;
    auto* v = app.add_subcommand("verify", "run the acceptance suite");
    v->add_option("--suite", vc.suite, "quick or full");
    v->add_option("--json", vc.json_out, "write the JSON report here");
    v->add_option("--jobs", vc.jobs, "worker threads (0: all cores)");
    v->add_option("--seed", vc.seed, "seed for random chains and simulation");
    v->add_flag("--tamper-oracle", vc.tamper, "perturb oracle values (harness check)");

    SimulateOptions so;
    auto* s = app.add_subcommand("simulate", "Monte Carlo estimate of the joint law");
    add_common(s, so.c, true);
    s->add_option("--n", so.n, "horizon N");
    s->add_option("--paths", so.paths, "number of paths");
    s->add_option("--seed", so.seed, "seed");
    s->add_option("--threads", so.threads, "worker threads");
    s->add_flag("--compare", so.compare, "add exact probabilities and a chi-square summary");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& ok) {
        return app.exit(ok);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return kUsage;
    }

    try {
        if (d->parsed()) return cmd_dist(dist);
        if (e->parsed()) return cmd_eval(ev);
        if (r->parsed()) return cmd_roots(ro);
        if (v->parsed()) return cmd_verify(vc);
        if (s->parsed()) return cmd_simulate(so);
    } catch (const usage_error& err) {
        std::cerr << "usage: " << err.what() << '\n';
        return kUsage;
    } catch (const input_error& err) {
        std::cerr << "input: " << err.what() << '\n';
        return kUsage;
    } catch (const assumption_error& err) {
        std::cerr << "assumption violated:\n" << err.what();
        return kAssumption;
    } catch (const numerical_error& err) {
        std::cerr << "numerical: " << err.what() << '\n';
        return kNumerical;
    } catch (const std::invalid_argument& err) {
        std::cerr << "usage: " << err.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
