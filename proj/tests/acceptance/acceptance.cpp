// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "cli.h"
#include "fincascade/credit_loss.h"
#include "fincascade/debtrank.h"
#include "fincascade/generator.h"
#include "fincascade/risk.h"
#include "fincascade/scenarios.h"
#include "fincascade/stats.h"
#include "support.h"

using namespace fincascade;
using namespace testsupport;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and sizes, pinned.
constexpr double kFixtureTol = 1e-15;
constexpr double kFixtureSeconds = 1.0;
constexpr double kClosedFormTol = 1e-9;
constexpr int kClosedFormCases = 100;
constexpr std::size_t kOrderingFirms = 1000;
constexpr std::size_t kOrderingScenarios = 200;
constexpr int kOracleEconomies = 50;
constexpr double kOracleTol = 1e-9;
constexpr double kLinearityTol = 1e-9;
constexpr double kLinearityEpsilon = 1e-14;
constexpr int kMonotonePairs = 100;
constexpr double kLgdTol = 1e-12;
constexpr std::size_t kAggregateScenarios = 1000;
constexpr double kAggregateTol = 1e-9;
constexpr double kResidualSectorShare = 0.01;
constexpr double kWelchP = 1e-15;
constexpr std::size_t kPatternFirms = 10000;
constexpr std::size_t kPatternScenarios = 1000;
constexpr double kPatternRatio = 12.5;
constexpr double kPatternSeconds = 600.0;
constexpr std::size_t kDeterminismScenarios = 200;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

Outcome fixture_exactness() {
    const auto t0 = Clock::now();
    const auto g = load_toy6();
    const auto psi = single_firm_shock(g, "f");
    PropagationConfig off;
    off.enabled = false;
    const auto h_wo = propagate(g, psi, off).h;
    const auto h_w = propagate(g, psi, {}).h;
    const auto out = StressEngine(g).run_scenario(psi, {});
    const double elapsed = seconds_since(t0);

    double err = 0;
    const std::vector<double> expect_wo{1, 1, 1, 1, 1, 0};
    for (std::size_t i = 0; i < 6; ++i) err = std::max({err, std::abs(h_wo[i] - expect_wo[i]), std::abs(h_w[i])});
    const auto b3 = g.bank_index("3"), b4 = g.bank_index("4");
    err = std::max({err, std::abs(out.ledger.di[b3] - 0.25), std::abs(out.ledger.sc[b3] - 0.05),
                    std::abs(out.ledger.sc[b4] - 0.10)});
    return {err <= kFixtureTol && elapsed < kFixtureSeconds,
            fmt("max abs error %.3g, runtime %.4f s", err, elapsed)};
}

Outcome closed_form_amplification() {
    std::mt19937_64 rng(2001);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0, worst_literal = 0;
    for (int rep = 0; rep < kClosedFormCases; ++rep) {
        const std::size_t m = 2 + rep % 6;
        RawEconomy raw;
        raw.firms = {{"1011", true, 100, 60, 10, 20, 5}};
        raw.W = zeros(1, 1);
        raw.e.resize(m);
        for (auto& e : raw.e) e = 50 + 200 * u(rng);
        raw.L = zeros(m, m);
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t l = 0; l < m; ++l)
                if (k != l && u(rng) < 0.6) raw.L[k][l] = 0.3 * u(rng) * raw.e[l];
        const std::size_t k = rep % m;
        raw.B = zeros(1, m);
        raw.B[0][k] = (1e-4 + 1e-2 * u(rng)) * raw.e[k];

        const auto g = build(raw);
        const double ratio = fsri_plus(g, 0, {}) / fsri(g, 0, {});
        double liabilities = 0, assets = 0;
        for (std::size_t j = 0; j < m; ++j) {
            liabilities += raw.L[k][j];
            assets += raw.L[j][k];
        }
        worst = std::max(worst, std::abs(ratio - (1 + liabilities / raw.e[k])));
        worst_literal = std::max(worst_literal, std::abs(ratio - (1 + assets / raw.e[k])));
    }
    return {worst < kClosedFormTol,
            fmt("max |ratio - (1 + sum_j L_kj/e_k)| = %.3g over %g cases (column-sum form: %.3g)", worst,
                kClosedFormCases, worst_literal)};
}

Outcome ordering_properties() {
    GeneratorParams p;
    p.firms = kOrderingFirms;
    const auto g = generate_synthetic_economy(p, 301);
    const auto batch = covid_style_batch(g, synthetic_empirical_table(g, 0.3, 302), kOrderingScenarios, 303);
    const auto result = channel_decomposition(g, batch, {}, RegimeSelection::Both, 0);
    std::size_t violations = 0, pairs = 0;
    for (const auto& l : result.ledgers.scenarios) {
        for (std::size_t k = 0; k < l.banks(); ++k) {
            ++pairs;
            if (l.ib_w[k] < l.ib_wo[k]) ++violations;
            if (l.total_w(k) < l.total_wo(k)) ++violations;
        }
    }
    return {violations == 0 && batch.size() >= 100,
            fmt("%g violations over %g (bank, scenario) pairs", violations, pairs)};
}

Outcome oracle_equivalence() {
    std::mt19937_64 rng(401);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0;
    for (int rep = 0; rep < kOracleEconomies; ++rep) {
        const std::size_t n = 2 + rep % 9;
        const std::size_t m = 1 + rep % 4;
        const auto raw = random_raw(rng, n, m);
        std::vector<double> psi(n);
        for (auto& x : psi) x = u(rng) < 0.4 ? u(rng) : 1.0;
        const auto got = StressEngine(build(raw)).run_scenario(ShockVector(psi), {});
        const auto ref = oracle_pipeline(raw, psi);
        for (std::size_t k = 0; k < m; ++k) {
            worst = std::max({worst, std::abs(got.ledger.di[k] - ref.di[k]), std::abs(got.ledger.sc[k] - ref.sc[k]),
                              std::abs(got.ledger.ib_wo[k] - ref.ib_wo[k]),
                              std::abs(got.ledger.ib_w[k] - ref.ib_w[k])});
        }
    }
    return {worst <= kOracleTol, fmt("max abs deviation %.3g over %g economies", worst, kOracleEconomies)};
}

RawEconomy random_banks(std::mt19937_64& rng, std::size_t m) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RawEconomy raw;
    raw.firms = {{"1011"}};
    raw.W = zeros(1, 1);
    raw.B = zeros(1, m);
    raw.e.resize(m);
    for (auto& e : raw.e) e = 50 + 100 * u(rng);
    raw.L = zeros(m, m);
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t l = 0; l < m; ++l)
            if (k != l && u(rng) < 0.7) raw.L[k][l] = 0.15 * u(rng) * raw.e[l];
    return raw;
}

Outcome debtrank_linearity() {
    std::mt19937_64 rng(501);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DebtRankConfig tight;
    tight.epsilon = kLinearityEpsilon;
    double worst = 0;
    std::size_t clamped = 0, monotone_violations = 0;
    for (int rep = 0; rep < kMonotonePairs; ++rep) {
        const std::size_t m = 2 + rep % 5;
        const auto raw = random_banks(rng, m);
        const auto g = build(raw);
        std::vector<double> seed(m), bigger(m);
        for (std::size_t k = 0; k < m; ++k) {
            seed[k] = 0.2 * u(rng);
            bigger[k] = seed[k] + 0.3 * u(rng);
        }
        const auto base = debtrank(g, seed, tight);
        for (double alpha : {0.1, 0.5}) {
            std::vector<double> scaled(m);
            for (std::size_t k = 0; k < m; ++k) scaled[k] = alpha * seed[k];
            const auto r = debtrank(g, scaled, tight);
            for (std::size_t k = 0; k < m; ++k) worst = std::max(worst, std::abs(r.final[k] - alpha * base.final[k]));
        }
        for (double x : base.final) clamped += x >= 1.0;

        const auto lo = debtrank(g, seed);
        const auto hi = debtrank(g, bigger);
        for (std::size_t k = 0; k < m; ++k) monotone_violations += lo.final[k] > hi.final[k];
    }
    return {worst <= kLinearityTol && clamped == 0 && monotone_violations == 0,
            fmt("max linearity error %.3g (clamped banks %g), monotonicity violations %g over %g pairs", worst, clamped,
                monotone_violations, kMonotonePairs)};
}

Outcome lgd_proportionality() {
    std::mt19937_64 rng(601);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0;
    std::size_t nonzero = 0;
    auto check = [&](EconomyGraph g, const std::vector<double>& psi) {
        const auto chi_wo = default_flags(g, profit_shock(g, psi));
        const auto chi_w = default_flags(g, profit_shock(g, propagate(g, ShockVector(psi), {})));
        const auto full = bank_losses(g, chi_w, chi_wo);
        g.loans.set_lgd(0.5 * g.loans.lgd());
        const auto half = bank_losses(g, chi_w, chi_wo);
        for (std::size_t k = 0; k < full.banks(); ++k) {
            worst = std::max({worst, std::abs(half.di[k] - 0.5 * full.di[k]), std::abs(half.sc[k] - 0.5 * full.sc[k])});
            nonzero += full.di[k] > 0 || full.sc[k] > 0;
        }
    };
    const auto toy6 = load_toy6();
    const auto f = single_firm_shock(toy6, "f").values();
    check(toy6, std::vector<double>(f.begin(), f.end()));
    for (int rep = 0; rep < 100; ++rep) {
        const auto raw = random_raw(rng, 10, 3);
        std::vector<double> psi(10);
        for (auto& x : psi) x = u(rng) < 0.3 ? u(rng) : 1.0;
        check(build(raw), psi);
    }
    return {worst <= kLgdTol && nonzero > 0, fmt("max deviation %.3g, %g nonzero bank ledgers", worst, nonzero)};
}

Outcome aggregate_preservation() {
    const auto g = load_economy(EconomyFiles::in_directory(fs::path(DATA_DIR) / "standin"));
    const auto table = EmpiricalShockTable::load(fs::path(DATA_DIR) / "standin" / "empirical_shocks.csv", g);
    const auto targets = empirical_sector_targets(g, table);
    const auto batch = covid_style_batch(g, table, kAggregateScenarios, 701);

    std::set<std::pair<std::size_t, std::string>> logged;
    std::set<std::string> residual_sectors;
    for (const auto& r : batch.residuals) {
        logged.insert({r.scenario, r.sector});
        residual_sectors.insert(r.sector);
    }
    double worst = 0;
    for (std::size_t s = 0; s < batch.size(); ++s) {
        const auto realized = realized_sector_reductions(g, targets, batch.scenarios[s]);
        for (std::size_t t = 0; t < targets.size(); ++t) {
            if (logged.count({s, targets[t].sector})) continue;
            worst = std::max(worst, std::abs(realized[t] - targets[t].target));
        }
    }
    const double share = static_cast<double>(residual_sectors.size()) / static_cast<double>(targets.size());
    return {worst <= kAggregateTol && share < kResidualSectorShare,
            fmt("max aggregate gap %.3g over %g scenarios x %g sectors", worst, batch.size(), targets.size()) +
                fmt("; residual events %g, sectors affected %g (share %.3g)", batch.residuals.size(),
                    residual_sectors.size(), share)};
}

Outcome statistics() {
    std::vector<double> x(100);
    std::iota(x.begin(), x.end(), 1.0);
    const auto r = risk_measures(x);
    const bool risk_ok = r.el == 50.5 && r.var95 == 95.0 && r.es95 == 98.0;

    std::mt19937_64 rng(801);
    std::normal_distribution<double> n0(0.0, 1.0), n1(1.0, 1.0);
    std::vector<double> a(10000), b(10000);
    for (auto& v : a) v = n0(rng);
    for (auto& v : b) v = n1(rng);
    const double p = welch_test(a, b).p_value;

    std::vector<double> xs, ys, ps;
    for (int i = 1; i <= 10; ++i) {
        xs.push_back(i);
        ys.push_back(2.5 * i - 1.0);
        ps.push_back(0.7 * std::pow(i, 1.8));
    }
    const auto lin = ols_fit(xs, ys);
    const auto pw = ols_fit(xs, ps, true);
    const bool ols_ok = std::abs(lin.slope - 2.5) < 1e-12 && std::abs(lin.r_squared - 1) < 1e-12 &&
                        std::abs(pw.slope - 1.8) < 1e-12 && std::abs(pw.r_squared - 1) < 1e-12;
    return {risk_ok && p < kWelchP && ols_ok,
            fmt("risk (%g, %g, %g), welch p = %.3g", r.el, r.var95, r.es95, p) +
                fmt(", ols slopes %.15g / %.15g", lin.slope, pw.slope)};
}

Outcome loss_patterns() {
    GeneratorParams p;
    p.firms = kPatternFirms;
    p.target_exposure_ratio = kPatternRatio;
    const auto g = generate_synthetic_economy(p, 901);
    const double ratio = exposure_ratio(g).system_ratio;
    const auto table = synthetic_empirical_table(g, 0.3, 902);

    const auto t0 = Clock::now();
    const auto batch = covid_style_batch(g, table, kPatternScenarios, 903);
    const auto result = channel_decomposition(g, batch, {}, RegimeSelection::Both, 0);
    const auto fits = interbank_fits(result.ledgers);
    const auto amp = ib_amplification(amplification_records(result.ledgers), g.bank_count(), batch.size());
    const double elapsed = seconds_since(t0);

    auto el = [&](Channel c) { return risk_measures(system_channel_losses(result.ledgers, Regime::W, c)).el; };
    const double di = el(Channel::DI), sc = el(Channel::DI_SC), ib = el(Channel::DI_SC_IB);
    const bool a = di < sc && sc < ib;
    const bool b = fits.pooled_linear && fits.pooled_linear->slope > 1.0;
    const double above2 = fraction_above(amp.pooled, 2.0);
    const bool c = above2 > 0.0;
    const bool ratio_ok = std::abs(ratio - kPatternRatio) < 0.1 * kPatternRatio;
    return {a && b && c && ratio_ok && elapsed < kPatternSeconds && result.nonconverged() == 0,
            fmt("exposure ratio %.4g; EL %.4f < %.4f < %.4f", ratio, di, sc, ib) +
                fmt("; pooled slope %.4g; amplification mass above 2 %.4g; %.1f s", b ? fits.pooled_linear->slope : 0.0,
                    above2, elapsed)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "fincascade");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome determinism() {
    const auto root = fs::temp_directory_path() / "fincascade_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    const auto cfg = root / "run.json";
    std::ofstream(cfg) << R"({"economy": {"dir": ")" << (fs::path(DATA_DIR) / "standin").string()
                       << R"("}, "scenarios": {"kind": "covid", "count": )" << kDeterminismScenarios
                       << R"(, "seed": 1001}})";
    int codes = 0;
    for (const char* run : {"a", "b"}) {
        const auto workers = std::string(run) == "a" ? "1" : "4";
        codes += run_cli({"stress", "--config", cfg.string(), "--out", (root / run / "stress").string(), "--workers",
                          workers, "--trace"});
        codes += run_cli({"fsri", "--config", cfg.string(), "--out", (root / run / "fsri").string(), "--workers",
                          workers});
        codes += run_cli({"debtrank", "--config", cfg.string(), "--out", (root / run / "debtrank").string()});
    }
    std::size_t files = 0, differ = 0;
    for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
        if (!entry.is_regular_file()) continue;
        ++files;
        const auto twin = root / "b" / fs::relative(entry.path(), root / "a");
        if (!fs::exists(twin) || slurp(entry.path()) != slurp(twin)) ++differ;
    }
    return {codes == 0 && differ == 0 && files > 0,
            fmt("%g files compared, %g differ, exit codes sum %g", files, differ, codes)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"fixture exactness", fixture_exactness},
        {"closed-form amplification", closed_form_amplification},
        {"ordering properties", ordering_properties},
        {"brute-force oracle equivalence", oracle_equivalence},
        {"DebtRank linearity and monotonicity", debtrank_linearity},
        {"LGD proportionality", lgd_proportionality},
        {"scenario aggregate preservation", aggregate_preservation},
        {"statistics correctness", statistics},
        {"qualitative loss patterns", loss_patterns},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failures;
}
