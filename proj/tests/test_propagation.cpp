#include "doctest.h"

#include <random>
#include <sstream>

#include "fincascade/propagation.h"
#include "fincascade/scenarios.h"
#include "support.h"

using namespace fincascade;
using namespace testsupport;

namespace {

RawEconomy chain3() {
    RawEconomy raw;
    raw.firms = {{"1011"}, {"2011"}, {"3011"}};
    raw.W = zeros(3, 3);
    raw.W[0][1] = 10;
    raw.W[1][2] = 10;
    raw.e = {1};
    raw.L = zeros(1, 1);
    raw.B = zeros(3, 1);
    return raw;
}

std::vector<double> random_psi(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> psi(n);
    for (auto& x : psi) x = u(rng) < 0.3 ? u(rng) : 1.0;
    return psi;
}

}  // namespace

TEST_CASE("toy6: failure of f stops every firm, disabled regime keeps psi") {
    const auto g = load_toy6();
    const auto psi = single_firm_shock(g, "f");
    const auto w = propagate(g, psi, {});
    CHECK(w.converged);
    for (double h : w.h) CHECK(h == 0.0);

    PropagationConfig off;
    off.enabled = false;
    const auto wo = propagate(g, psi, off);
    CHECK(wo.h == std::vector<double>{1, 1, 1, 1, 1, 0});
    CHECK(wo.iterations == 0);
}

TEST_CASE("unshocked economy is a fixed point after one sweep") {
    const auto g = load_toy6();
    const auto p = propagate(g, ShockVector::unshocked(6), {});
    CHECK(p.h == std::vector<double>(6, 1.0));
    CHECK(p.iterations == 1);
    CHECK(p.converged);
}

TEST_CASE("essential chain collapses when its head stops") {
    const auto raw = chain3();
    const auto p = propagate(build(raw), ShockVector({0, 1, 1}), {});
    CHECK(p.h == std::vector<double>{0, 0, 0});
}

TEST_CASE("partial shocks on the chain, hand iterated") {
    // a -> b -> c. Shock b to 0.4: a loses demand (u_a = 0.4), c loses supply (d_c = 0.4).
    const auto p = propagate(build(chain3()), ShockVector({1, 0.4, 1}), {});
    CHECK(p.h[0] == doctest::Approx(0.4));
    CHECK(p.h[1] == doctest::Approx(0.4));
    CHECK(p.h[2] == doctest::Approx(0.4));
    CHECK(p.iterations == 2);
}

std::vector<double> first_sweep(const EconomyGraph& g, const ShockVector& psi, double sigma = 0.0) {
    PropagationConfig cfg;
    cfg.sigma = sigma;
    cfg.record_trajectory = true;
    const auto p = propagate(g, psi, cfg);
    REQUIRE(p.trajectory.size() >= 2);
    return p.trajectory[1];
}

TEST_CASE("inputs are pooled by supplier sector") {
    // Two suppliers of the same sector feed firm 2 with weights 30 and 10.
    RawEconomy raw;
    raw.firms = {{"1011"}, {"1011"}, {"2011"}, {"3011"}};
    raw.W = zeros(4, 4);
    raw.W[0][2] = 30;
    raw.W[1][2] = 10;
    raw.e = {1};
    raw.L = zeros(1, 1);
    raw.B = zeros(4, 1);
    const auto g = build(raw);
    const auto h1 = first_sweep(g, ShockVector({1, 0, 1, 1}));
    CHECK(h1[2] == doctest::Approx(0.75));
    CHECK(h1[0] == 1.0);
    // firm 0 sells only to firm 2, so demand and supply keep ratcheting each other down
    CHECK(propagate(g, ShockVector({1, 0, 1, 1}), {}).h[2] < 0.75);
}

TEST_CASE("non-essential inputs bind only through sigma") {
    RawEconomy raw = chain3();
    raw.default_essential = false;
    const auto g = build(raw);
    const ShockVector psi({0.5, 1, 1});
    CHECK(propagate(g, psi, {}).h[1] == 1.0);
    CHECK(first_sweep(g, psi, 1.0)[1] == doctest::Approx(0.5));

    // A firm with one non-essential and one essential input sector.
    RawEconomy mixed;
    mixed.firms = {{"1011"}, {"2011"}, {"3011"}};
    mixed.W = zeros(3, 3);
    mixed.W[0][2] = 10;
    mixed.W[1][2] = 10;
    mixed.essential[{"10", "30"}] = false;
    mixed.e = {1};
    mixed.L = zeros(1, 1);
    mixed.B = zeros(3, 1);
    const auto gm = build(mixed);
    PropagationConfig cfg;
    CHECK(propagate(gm, ShockVector({0.2, 1, 1}), cfg).h[2] == 1.0);
    CHECK(first_sweep(gm, ShockVector({0.2, 1, 1}), 0.5)[2] == doctest::Approx(0.6));
    CHECK(first_sweep(gm, ShockVector({1, 0.2, 1}), 0.5)[2] == doctest::Approx(0.2));
}

TEST_CASE("firms without customers have no demand constraint") {
    RawEconomy raw = chain3();
    const auto p = propagate(build(raw), ShockVector({1, 1, 0}), {});
    // c has no customers; its own shock cuts demand for b, then for a.
    CHECK(p.h == std::vector<double>{0, 0, 0});
    raw.W[1][2] = 0;
    const auto q = propagate(build(raw), ShockVector({1, 1, 0}), {});
    CHECK(q.h == std::vector<double>{1, 1, 0});
}

TEST_CASE("iteration cap flags non-convergence") {
    PropagationConfig cfg;
    cfg.max_iter = 1;
    const auto p = propagate(build(chain3()), ShockVector({0, 1, 1}), cfg);
    CHECK_FALSE(p.converged);
    CHECK(p.iterations == 1);
}

TEST_CASE("bad configurations are rejected") {
    const auto g = build(chain3());
    PropagationConfig cfg;
    cfg.epsilon = 0;
    CHECK_THROWS_AS(propagate(g, ShockVector({1, 1, 1}), cfg), std::invalid_argument);
    CHECK_THROWS_AS(propagate(g, ShockVector({1, 1}), {}), std::invalid_argument);
    CHECK_THROWS_AS(ShockVector({1.2}), std::invalid_argument);
    CHECK_THROWS_AS(ShockVector({-0.1}), std::invalid_argument);
}

TEST_CASE("properties on random economies") {
    std::mt19937_64 rng(21);
    for (int rep = 0; rep < 60; ++rep) {
        const auto raw = random_raw(rng, 10, 2);
        const auto g = build(raw);
        const auto psi = random_psi(rng, 10);
        PropagationConfig cfg;
        cfg.record_trajectory = true;
        const auto p = propagate(g, ShockVector(psi), cfg);

        // reference implementation
        const auto ref = oracle_propagate(raw, psi);
        CHECK(p.iterations == ref.sweeps);
        for (std::size_t i = 0; i < psi.size(); ++i) CHECK(p.h[i] == doctest::Approx(ref.h[i]).epsilon(1e-12));

        // bounds and h <= psi
        for (std::size_t i = 0; i < psi.size(); ++i) {
            CHECK(p.h[i] >= 0.0);
            CHECK(p.h[i] <= psi[i]);
        }
        // trajectory never increases
        for (std::size_t t = 1; t < p.trajectory.size(); ++t)
            for (std::size_t i = 0; i < psi.size(); ++i) CHECK(p.trajectory[t][i] <= p.trajectory[t - 1][i]);

        // monotone in the shock
        auto softer = psi;
        for (auto& x : softer) x = std::min(1.0, x + 0.2 * std::uniform_real_distribution<double>(0, 1)(rng));
        const auto q = propagate(g, ShockVector(softer), {});
        for (std::size_t i = 0; i < psi.size(); ++i) CHECK(p.h[i] <= q.h[i] + 1e-12);

        // a converged profile moves by at most epsilon when propagated again
        const auto again = propagate(g, ShockVector(p.h), {});
        for (std::size_t i = 0; i < psi.size(); ++i) CHECK(p.h[i] - again.h[i] <= 0.01 + 1e-12);
    }
}

TEST_CASE("without supply edges both regimes coincide") {
    std::mt19937_64 rng(5);
    auto raw = random_raw(rng, 8, 2);
    raw.W = zeros(8, 8);
    const auto psi = random_psi(rng, 8);
    CHECK(propagate(build(raw), ShockVector(psi), {}).h == psi);
}

TEST_CASE("adversarial weights keep h in [0, 1]") {
    RawEconomy raw = chain3();
    raw.W[0][1] = 1e300;
    raw.W[1][2] = 1e-300;
    raw.W[2][0] = 1e150;
    const auto p = propagate(build(raw), ShockVector({0.3, 1, 0.9}), {});
    for (double h : p.h) {
        CHECK(h >= 0.0);
        CHECK(h <= 1.0);
    }
}

TEST_CASE("ESRI") {
    SUBCASE("isolated firm with a tenth of total output") {
        RawEconomy raw;
        raw.firms.resize(3);
        raw.firms[0] = {"1011", true, 10, 5, 1, 2, 1};
        raw.firms[1] = {"2011", true, 50, 5, 1, 2, 1};
        raw.firms[2] = {"3011", true, 40, 5, 1, 2, 1};
        raw.W = zeros(3, 3);
        raw.e = {1};
        raw.L = zeros(1, 1);
        raw.B = zeros(3, 1);
        CHECK(compute_esri(build(raw), 0, {}) == doctest::Approx(0.10).epsilon(1e-15));
    }
    SUBCASE("toy6 firm f takes the whole economy down") {
        const auto g = load_toy6();
        CHECK(compute_esri(g, g.firm_index("f"), {}) == doctest::Approx(1.0));
    }
    SUBCASE("firm with zero output and no links") {
        RawEconomy raw;
        raw.firms.resize(2);
        raw.firms[0] = {"1011", false};
        raw.firms[1] = {"2011", true, 50, 5, 1, 2, 1};
        raw.W = zeros(2, 2);
        raw.e = {1};
        raw.L = zeros(1, 1);
        raw.B = zeros(2, 1);
        CHECK(compute_esri(build(raw), 0, {}) == 0.0);
    }
}

TEST_CASE("trajectory dump lists every sweep") {
    const auto g = build(chain3());
    PropagationConfig cfg;
    cfg.record_trajectory = true;
    const auto p = propagate(g, ShockVector({0, 1, 1}), cfg);
    std::ostringstream out;
    write_trajectory_csv(out, g, p);
    const auto text = out.str();
    CHECK(text.rfind("iteration,firm_id,h\n0,f0,0\n0,f1,1\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 3 * static_cast<long>(p.trajectory.size()));
}
