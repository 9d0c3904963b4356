#include "fincascade/scenarios.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "fincascade/errors.h"
#include "fincascade/io.h"

namespace fincascade {

const char* to_string(BatchKind kind) {
    switch (kind) {
        case BatchKind::SingleFirm: return "single-firm";
        case BatchKind::CovidStyle: return "covid-style";
        case BatchKind::Custom: return "custom";
    }
    return "custom";
}

ShockVector single_firm_shock(const EconomyGraph& g, std::size_t firm) {
    if (firm >= g.firm_count()) throw std::out_of_range("unknown firm index " + std::to_string(firm));
    std::vector<double> psi(g.firm_count(), 1.0);
    psi[firm] = 0.0;
    return ShockVector(std::move(psi));
}

ShockVector single_firm_shock(const EconomyGraph& g, const std::string& firm_id) {
    return single_firm_shock(g, g.firm_index(firm_id));
}

EmpiricalShockTable::EmpiricalShockTable(std::vector<std::optional<double>> reductions)
    : reductions_(std::move(reductions)) {
    for (std::size_t i = 0; i < reductions_.size(); ++i) {
        if (reductions_[i] && !(*reductions_[i] >= 0.0 && *reductions_[i] <= 1.0)) {
            throw std::invalid_argument("empirical reduction of firm " + std::to_string(i) + " outside [0, 1]");
        }
    }
}

EmpiricalShockTable EmpiricalShockTable::load(const std::filesystem::path& path, const EconomyGraph& g) {
    CsvReader csv(path, {"firm_id", "reduction"});
    std::vector<std::optional<double>> values(g.firm_count());
    while (csv.next()) {
        const std::string id(csv.field("firm_id"));
        auto idx = g.find_firm(id);
        if (!idx) throw ReferentialError(path.string() + ": unknown firm id '" + id + "'", id);
        const double value = csv.number("reduction");
        if (!(value >= 0.0 && value <= 1.0)) csv.fail("reduction must lie in [0, 1]");
        values[*idx] = value;
    }
    return EmpiricalShockTable(std::move(values));
}

void EmpiricalShockTable::write(const std::filesystem::path& path, const EconomyGraph& g) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "firm_id,reduction\n";
    for (std::size_t i = 0; i < reductions_.size(); ++i) {
        if (reductions_[i]) out << g.firms[i].id << ',' << format_double(*reductions_[i]) << '\n';
    }
}

std::vector<double> aggregation_weights(const EconomyGraph& g) { return firm_output(g); }

namespace {

double weighted_mean(std::span<const std::size_t> firms, std::span<const double> weights,
                     auto&& value_of) {
    double wsum = 0.0;
    for (auto i : firms) wsum += weights[i];
    double acc = 0.0;
    if (wsum > 0.0) {
        for (auto i : firms) acc += weights[i] * value_of(i);
        return acc / wsum;
    }
    for (auto i : firms) acc += value_of(i);
    return firms.empty() ? 0.0 : acc / static_cast<double>(firms.size());
}

}  // namespace

std::vector<SectorTarget> empirical_sector_targets(const EconomyGraph& g, const EmpiricalShockTable& table) {
    if (table.size() != g.firm_count()) throw std::invalid_argument("empirical table does not match firm count");
    const auto weights = aggregation_weights(g);
    std::map<std::string, SectorTarget> by_sector;
    for (std::size_t i = 0; i < g.firm_count(); ++i) {
        auto& target = by_sector[g.firms[i].nace2()];
        target.sector = g.firms[i].nace2();
        target.firms.push_back(i);
    }
    std::vector<SectorTarget> targets;
    for (auto& [code, target] : by_sector) {
        std::vector<std::size_t> observed;
        for (auto i : target.firms) {
            if (table[i]) observed.push_back(i);
        }
        if (observed.empty()) {
            throw std::invalid_argument("sector '" + code + "' has no empirical shock observations");
        }
        target.target = weighted_mean(observed, weights, [&](std::size_t i) { return *table[i]; });
        targets.push_back(std::move(target));
    }
    return targets;
}

std::vector<double> realized_sector_reductions(const EconomyGraph& g, const std::vector<SectorTarget>& targets,
                                               const ShockVector& psi) {
    const auto weights = aggregation_weights(g);
    std::vector<double> out;
    out.reserve(targets.size());
    for (const auto& target : targets) {
        out.push_back(weighted_mean(target.firms, weights, [&](std::size_t i) { return 1.0 - psi[i]; }));
    }
    return out;
}

namespace {

constexpr int kMaxClipRounds = 10;

/// Rescales `x` (reductions of `firms`) to the weighted mean `target`, clipping at 1.
/// Returns false when the target cannot be met within the clipping budget.
bool rescale_to_target(std::span<const std::size_t> firms, std::span<const double> weights, double target,
                       std::vector<double>& x) {
    double wsum = 0.0;
    for (auto i : firms) wsum += weights[i];
    const bool uniform = !(wsum > 0.0);
    auto w = [&](std::size_t i) { return uniform ? 1.0 : weights[i]; };
    if (uniform) wsum = static_cast<double>(firms.size());

    if (target <= 0.0) {
        for (auto i : firms) x[i] = 0.0;
        return true;
    }
    double current = 0.0;
    for (auto i : firms) current += w(i) * x[i];
    if (!(current > 0.0)) {
        for (auto i : firms) x[i] = target;
        return true;
    }
    const double scale = target * wsum / current;
    for (auto i : firms) x[i] *= scale;

    for (int round = 0; round < kMaxClipRounds; ++round) {
        double excess = 0.0;
        double free_mass = 0.0;
        double free_weight = 0.0;
        for (auto i : firms) {
            if (x[i] > 1.0) {
                excess += w(i) * (x[i] - 1.0);
                x[i] = 1.0;
            } else if (x[i] < 1.0) {
                free_mass += w(i) * x[i];
                free_weight += w(i);
            }
        }
        if (excess <= 0.0) return true;
        if (!(free_weight > 0.0)) return false;
        if (free_mass > 0.0) {
            const double lift = 1.0 + excess / free_mass;
            for (auto i : firms) {
                if (x[i] < 1.0) x[i] *= lift;
            }
        } else {
            const double add = excess / free_weight;
            for (auto i : firms) {
                if (x[i] < 1.0) x[i] += add;
            }
        }
    }
    for (auto i : firms) {
        if (x[i] > 1.0) return false;
    }
    return true;
}

}  // namespace

ShockBatch covid_style_batch(const EconomyGraph& g, const EmpiricalShockTable& table, std::size_t count,
                             std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("scenario count must be >= 1");
    const auto targets = empirical_sector_targets(g, table);
    const auto weights = aggregation_weights(g);

    // Resampling pools: observed reductions per NACE-2 and per NACE-4 code.
    std::map<std::string, std::vector<double>> pool2;
    std::map<std::string, std::vector<double>> pool4;
    for (std::size_t i = 0; i < g.firm_count(); ++i) {
        if (!table[i]) continue;
        pool2[g.firms[i].nace2()].push_back(*table[i]);
        pool4[g.firms[i].sector].push_back(*table[i]);
    }

    ShockBatch batch;
    batch.seed = seed;
    batch.provenance = BatchKind::CovidStyle;
    batch.scenarios.reserve(count);

    std::mt19937_64 rng(seed);
    auto draw = [&](const std::vector<double>& pool) {
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        return pool[pick(rng)];
    };

    std::vector<double> reduction(g.firm_count(), 0.0);
    for (std::size_t s = 0; s < count; ++s) {
        for (const auto& target : targets) {
            const auto& sector_pool = pool2.at(target.sector);
            for (auto i : target.firms) {
                if (table[i]) {
                    reduction[i] = draw(sector_pool);
                } else {
                    auto peers = pool4.find(g.firms[i].sector);
                    reduction[i] = draw(peers != pool4.end() ? peers->second : sector_pool);
                }
            }
            if (!rescale_to_target(target.firms, weights, target.target, reduction)) {
                const double realized =
                    weighted_mean(target.firms, weights, [&](std::size_t i) { return std::min(reduction[i], 1.0); });
                batch.residuals.push_back({s, target.sector, target.target, realized});
            }
        }
        std::vector<double> psi(g.firm_count());
        for (std::size_t i = 0; i < g.firm_count(); ++i) psi[i] = std::clamp(1.0 - reduction[i], 0.0, 1.0);
        batch.scenarios.emplace_back(std::move(psi));
    }
    return batch;
}

EmpiricalShockTable synthetic_empirical_table(const EconomyGraph& g, double coverage, std::uint64_t seed) {
    if (!(coverage > 0.0 && coverage <= 1.0)) throw std::invalid_argument("coverage must lie in (0, 1]");
    std::mt19937_64 rng(seed);
    std::map<std::string, double> sector_mean;
    for (const auto& firm : g.firms) sector_mean.emplace(firm.nace2(), 0.0);
    std::gamma_distribution<double> ga(2.0, 1.0);
    std::gamma_distribution<double> gb(9.0, 1.0);
    for (auto& [code, mean] : sector_mean) {
        const double a = ga(rng);
        mean = a / (a + gb(rng));
    }

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::lognormal_distribution<double> scatter(-0.3, 0.8);
    std::vector<std::optional<double>> values(g.firm_count());
    std::map<std::string, std::size_t> observed;
    for (std::size_t i = 0; i < g.firm_count(); ++i) {
        const double mean = sector_mean[g.firms[i].nace2()];
        // Roughly a third of firms kept their full workforce.
        const double value = unit(rng) < 0.3 ? 0.0 : std::min(1.0, mean * scatter(rng));
        if (unit(rng) < coverage) {
            values[i] = value;
            ++observed[g.firms[i].nace2()];
        }
    }
    for (std::size_t i = 0; i < g.firm_count(); ++i) {
        const auto code = g.firms[i].nace2();
        if (observed[code] == 0) {
            values[i] = std::min(1.0, sector_mean[code]);
            observed[code] = 1;
        }
    }
    return EmpiricalShockTable(std::move(values));
}

std::vector<std::vector<double>> gaussian_bank_seed_batch(const std::vector<std::vector<double>>& reference,
                                                          std::size_t count, std::uint64_t seed) {
    const std::size_t m = reference.size();
    std::vector<double> mu(m);
    std::vector<double> sd(m);
    for (std::size_t k = 0; k < m; ++k) {
        const auto& samples = reference[k];
        if (samples.size() < 2) {
            throw std::invalid_argument("bank " + std::to_string(k) + " needs at least 2 reference samples");
        }
        double mean = 0.0;
        for (double x : samples) mean += x;
        mean /= static_cast<double>(samples.size());
        double ss = 0.0;
        for (double x : samples) ss += (x - mean) * (x - mean);
        const double var = ss / static_cast<double>(samples.size() - 1);
        if (!std::isfinite(mean) || !std::isfinite(var)) {
            throw std::invalid_argument("bank " + std::to_string(k) + " has a degenerate reference distribution");
        }
        mu[k] = mean;
        sd[k] = std::sqrt(var);
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::vector<double>> out(count, std::vector<double>(m, 0.0));
    for (std::size_t d = 0; d < count; ++d) {
        for (std::size_t k = 0; k < m; ++k) {
            if (sd[k] == 0.0) {
                out[d][k] = std::max(mu[k], 0.0);
                continue;
            }
            double x = -1.0;
            for (int attempt = 0; attempt < 100000 && x < 0.0; ++attempt) x = mu[k] + sd[k] * normal(rng);
            out[d][k] = std::max(x, 0.0);
        }
    }
    return out;
}

InterbankNetwork random_interbank_network(std::span<const double> equities, std::uint64_t seed) {
    const std::size_t m = equities.size();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> leverage(0.0, 0.05);
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (i == j) continue;
            double lambda = 0.0;
            while (lambda <= 0.0) lambda = leverage(rng);
            edges.push_back({i, j, lambda * equities[j]});
        }
    }
    return InterbankNetwork{CsrGraph(m, std::move(edges))};
}

void write_batch_csv(std::ostream& out, const EconomyGraph& g, const ShockBatch& batch) {
    out << "scenario_id,firm_id,psi\n";
    for (std::size_t s = 0; s < batch.size(); ++s) {
        const auto& psi = batch.scenarios[s];
        for (std::size_t i = 0; i < psi.size(); ++i) {
            out << s << ',' << g.firms[i].id << ',' << format_double(psi[i]) << '\n';
        }
    }
}

ShockBatch read_batch_csv(const std::filesystem::path& path, const EconomyGraph& g) {
    CsvReader csv(path, {"scenario_id", "firm_id", "psi"});
    std::unordered_map<std::string, std::size_t> scenario_index;
    std::vector<std::vector<double>> rows;
    while (csv.next()) {
        const std::string sid(csv.field("scenario_id"));
        auto [it, inserted] = scenario_index.emplace(sid, rows.size());
        if (inserted) rows.emplace_back(g.firm_count(), 1.0);
        const std::string fid(csv.field("firm_id"));
        auto firm = g.find_firm(fid);
        if (!firm) throw ReferentialError(path.string() + ": unknown firm id '" + fid + "'", fid);
        const double psi = csv.number("psi");
        if (!(psi >= 0.0 && psi <= 1.0)) csv.fail("psi must lie in [0, 1]");
        rows[it->second][*firm] = psi;
    }
    ShockBatch batch;
    batch.provenance = BatchKind::Custom;
    for (auto& r : rows) batch.scenarios.emplace_back(std::move(r));
    return batch;
}

}  // namespace fincascade
