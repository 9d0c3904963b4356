#include "fincascade/generator.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <vector>

#include "fincascade/errors.h"

namespace fincascade {

WeightFamily parse_weight_family(const std::string& text) {
    if (text == "lognormal") return WeightFamily::LogNormal;
    if (text == "pareto") return WeightFamily::Pareto;
    if (text == "exponential") return WeightFamily::Exponential;
    throw std::invalid_argument("unknown weight family '" + text + "'");
}

const char* to_string(WeightFamily family) {
    switch (family) {
        case WeightFamily::LogNormal: return "lognormal";
        case WeightFamily::Pareto: return "pareto";
        case WeightFamily::Exponential: return "exponential";
    }
    return "lognormal";
}

namespace {

void check(const GeneratorParams& p) {
    auto share = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (p.firms < 1) throw InfeasibleParams("need at least one firm");
    if (p.banks < 1) throw InfeasibleParams("need at least one bank");
    if (p.sectors < 1 || p.sectors > 90) throw InfeasibleParams("sector count must lie in [1, 90]");
    if (p.subsectors < 1 || p.subsectors > 99) throw InfeasibleParams("subsector count must lie in [1, 99]");
    if (!(p.mean_degree >= 0.0)) throw InfeasibleParams("mean degree must be >= 0");
    if (!share(p.financials_share) || !share(p.distressed_share) || !share(p.borrower_share) ||
        !share(p.interbank_density) || !share(p.essential_share)) {
        throw InfeasibleParams("shares and densities must lie in [0, 1]");
    }
    if (!(p.loans_to_equity > 0.0)) throw InfeasibleParams("loans_to_equity must be > 0");
    if (!(p.buffer_multiple > 0.0)) throw InfeasibleParams("buffer_multiple must be > 0");
    if (p.banks > 1 && p.borrower_share > 0.0 && !(p.target_exposure_ratio > 0.0)) {
        throw InfeasibleParams("target exposure ratio must be > 0 when firms borrow from banks");
    }
    if (p.unconnected_banks + 2 > p.banks && p.banks > 1 && p.unconnected_banks > 0) {
        throw InfeasibleParams("at least two banks must remain in the interbank market");
    }
}

std::string padded(const char* prefix, std::size_t value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, value);
    return buf;
}

}  // namespace

EconomyGraph generate_synthetic_economy(const GeneratorParams& p, std::uint64_t seed) {
    check(p);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::lognormal_distribution<double> size_law(0.0, 1.2);
    std::lognormal_distribution<double> lognormal_weight(0.0, 1.0);
    std::exponential_distribution<double> exponential_weight(1.0);
    auto edge_weight = [&]() {
        switch (p.weight_family) {
            case WeightFamily::LogNormal: return lognormal_weight(rng);
            case WeightFamily::Pareto: return std::pow(1.0 - unit(rng), -1.0 / 1.5);
            case WeightFamily::Exponential: return exponential_weight(rng) + 1e-6;
        }
        return 1.0;
    };

    const std::size_t n = p.firms;
    const int id_width = static_cast<int>(std::to_string(n).size());

    // Firms: size, sector.
    std::vector<FirmNode> firms(n);
    std::vector<double> size(n);
    std::uniform_int_distribution<std::size_t> pick_sector(0, p.sectors - 1);
    std::uniform_int_distribution<std::size_t> pick_sub(1, p.subsectors);
    for (std::size_t i = 0; i < n; ++i) {
        firms[i].id = padded("f", i + 1, id_width);
        const std::size_t division = 10 + pick_sector(rng);
        firms[i].sector = padded("", division, 2) + padded("", pick_sub(rng), 2);
        size[i] = size_law(rng);
    }

    // Supply network: suppliers picked proportional to firm size.
    std::vector<Edge> edges;
    if (n > 1 && p.mean_degree > 0.0) {
        std::discrete_distribution<std::size_t> pick_supplier(size.begin(), size.end());
        std::poisson_distribution<std::size_t> in_degree(p.mean_degree);
        std::set<std::size_t> chosen;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t wanted = std::min(in_degree(rng), n - 1);
            chosen.clear();
            for (std::size_t attempt = 0; chosen.size() < wanted && attempt < 20 * wanted + 20; ++attempt) {
                const auto i = pick_supplier(rng);
                if (i != j) chosen.insert(i);
            }
            for (auto i : chosen) edges.push_back({i, j, std::sqrt(size[i] * size[j]) * edge_weight()});
        }
    }
    CsrGraph supply_graph(n, std::move(edges));

    // Financial statements.
    std::uniform_real_distribution<double> demand_share(0.3, 1.5);
    std::uniform_real_distribution<double> margin_law(0.03, 0.25);
    std::uniform_real_distribution<double> liabs_share(0.05, 0.3);
    std::lognormal_distribution<double> buffer_law(std::log(p.buffer_multiple), 0.9);
    for (std::size_t i = 0; i < n; ++i) {
        auto& f = firms[i];
        const bool has_statement = unit(rng) < p.financials_share;
        const double sales = supply_graph.out_weight(i);
        const double revenue = sales + size[i] * demand_share(rng);
        const double margin = margin_law(rng);
        const double equity_multiple = buffer_law(rng);
        const double liquidity_multiple = buffer_law(rng);
        const double liabs = revenue * liabs_share(rng);
        const bool distressed = unit(rng) < p.distressed_share;
        if (!has_statement) continue;
        f.financials_present = true;
        f.revenue = revenue;
        f.op_cost = revenue * (1.0 - margin);
        const double profit = f.revenue - f.op_cost;
        f.equity = distressed ? -profit * equity_multiple : profit * equity_multiple;
        f.short_liabs = liabs;
        f.short_assets = liabs + profit * liquidity_multiple;
        f.eligible_for_default = has_positive_buffers(f);
    }

    // Banks and the loan book.
    const std::size_t m = p.banks;
    std::vector<double> bank_size(m);
    for (auto& s : bank_size) s = size_law(rng);
    std::discrete_distribution<std::size_t> pick_bank(bank_size.begin(), bank_size.end());
    std::uniform_real_distribution<double> principal_share(0.05, 0.6);
    std::vector<LoanEntry> loans;
    std::vector<double> bank_loans(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!firms[i].financials_present || unit(rng) >= p.borrower_share) continue;
        const double u = unit(rng);
        const std::size_t lenders = std::min<std::size_t>(m, u < 0.7 ? 1 : (u < 0.92 ? 2 : 3));
        std::set<std::size_t> chosen;
        for (std::size_t attempt = 0; chosen.size() < lenders && attempt < 50; ++attempt) chosen.insert(pick_bank(rng));
        for (auto k : chosen) {
            const double principal = firms[i].revenue * principal_share(rng) / static_cast<double>(chosen.size());
            loans.push_back({i, k, principal});
            bank_loans[k] += principal;
        }
    }

    double total_loans = 0.0;
    for (double b : bank_loans) total_loans += b;
    const double mean_loans = total_loans > 0.0 ? total_loans / static_cast<double>(m) : 1.0;
    std::uniform_real_distribution<double> leverage_scatter(0.6, 1.4);
    std::vector<BankSheet> banks(m);
    for (std::size_t k = 0; k < m; ++k) {
        banks[k].id = std::to_string(k + 1);
        const double book = std::max(bank_loans[k], 0.05 * mean_loans);
        banks[k].tier1_equity = book / (p.loans_to_equity * leverage_scatter(rng));
    }

    // Interbank market among the connected banks, rescaled to the target exposure ratio.
    std::vector<Edge> interbank;
    if (m > 1) {
        const std::size_t connected = m - p.unconnected_banks;
        std::lognormal_distribution<double> exposure_law(0.0, 1.0);
        for (std::size_t k = 0; k < connected; ++k) {
            for (std::size_t l = 0; l < connected; ++l) {
                if (k == l || unit(rng) >= p.interbank_density) continue;
                const double scale = std::sqrt(banks[k].tier1_equity * banks[l].tier1_equity);
                interbank.push_back({k, l, scale * exposure_law(rng)});
            }
        }
        if (interbank.empty()) {
            interbank.push_back({0, 1, std::sqrt(banks[0].tier1_equity * banks[1].tier1_equity)});
        }
        double raw = 0.0;
        for (const auto& e : interbank) raw += e.weight;
        const double wanted = total_loans > 0.0 ? total_loans / p.target_exposure_ratio : raw;
        for (auto& e : interbank) e.weight *= wanted / raw;
    }

    EssentialityTable essentiality(true);
    if (p.essential_share < 1.0) {
        for (std::size_t a = 0; a < p.sectors; ++a) {
            for (std::size_t b = 0; b < p.sectors; ++b) {
                const bool essential = unit(rng) < p.essential_share;
                essentiality.set(padded("", 10 + a, 2), padded("", 10 + b, 2), essential);
            }
        }
    }

    SupplyNetwork supply{std::move(supply_graph), std::move(essentiality)};
    InterbankNetwork interbank_network{CsrGraph(m, std::move(interbank))};
    LoanBook book(n, m, std::move(loans));
    return EconomyGraph(std::move(firms), std::move(supply), std::move(banks), std::move(interbank_network),
                        std::move(book));
}

}  // namespace fincascade
