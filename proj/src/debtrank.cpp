#include "fincascade/debtrank.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "fincascade/io.h"

namespace fincascade {

std::vector<double> ContagionResult::clamped_final() const {
    std::vector<double> out(final.size());
    std::transform(final.begin(), final.end(), out.begin(), [](double x) { return std::min(x, 1.0); });
    return out;
}

DebtRankEngine::DebtRankEngine(const EconomyGraph& g) : equity_(g.equities()) {
    for (double e : equity_) {
        if (!(e > 0.0)) throw std::invalid_argument("bank equity must be > 0");
        total_equity_ += e;
    }
    const auto& graph = g.interbank.graph;
    if (graph.nodes() != equity_.size()) throw std::invalid_argument("interbank network does not match bank count");
    offsets_.assign(equity_.size() + 1, 0);
    for (std::size_t borrower = 0; borrower < equity_.size(); ++borrower) {
        for (auto idx : graph.out_edges(borrower)) {
            const auto& edge = graph.edges()[idx];
            if (edge.to == borrower || edge.weight == 0.0) continue;
            exposures_.push_back({edge.to, edge.weight / equity_[edge.to]});
        }
        offsets_[borrower + 1] = exposures_.size();
    }
}

ContagionResult DebtRankEngine::run(std::span<const double> seed, const DebtRankConfig& cfg) const {
    const std::size_t m = equity_.size();
    if (seed.size() != m) throw std::invalid_argument("seed length does not match bank count");
    for (double s : seed) {
        if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("seed losses must be finite and >= 0");
    }
    if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    if (cfg.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");

    ContagionResult result;
    result.initial.assign(seed.begin(), seed.end());
    result.final = result.initial;
    if (cfg.record_trace) result.trace.push_back(result.final);

    auto& loss = result.final;
    std::vector<double> transmitted(m, 0.0);
    std::vector<double> delta(m);
    result.converged = false;
    for (int round = 1; round <= cfg.max_iter; ++round) {
        std::fill(delta.begin(), delta.end(), 0.0);
        for (std::size_t l = 0; l < m; ++l) {
            const double clamped = std::min(loss[l], 1.0);
            const double increment = clamped - transmitted[l];
            transmitted[l] = clamped;
            if (increment <= 0.0) continue;
            for (std::size_t x = offsets_[l]; x < offsets_[l + 1]; ++x) {
                delta[exposures_[x].lender] += exposures_[x].leverage * increment;
            }
        }
        double equity_change = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            loss[k] += delta[k];
            equity_change += equity_[k] * delta[k];
        }
        result.iterations = round;
        if (cfg.record_trace) result.trace.push_back(loss);
        if (equity_change / total_equity_ <= cfg.epsilon) {
            result.converged = true;
            break;
        }
    }

    result.ib_marginal.resize(m);
    for (std::size_t k = 0; k < m; ++k) result.ib_marginal[k] = loss[k] - result.initial[k];
    return result;
}

ContagionResult debtrank(const EconomyGraph& g, std::span<const double> seed, const DebtRankConfig& cfg) {
    return DebtRankEngine(g).run(seed, cfg);
}

double equity_weighted_loss(std::span<const double> equities, std::span<const double> losses) {
    if (equities.size() != losses.size()) throw std::invalid_argument("equity and loss lengths differ");
    double total = 0.0;
    double lost = 0.0;
    for (std::size_t k = 0; k < equities.size(); ++k) {
        total += equities[k];
        lost += equities[k] * std::min(losses[k], 1.0);
    }
    return total > 0.0 ? lost / total : 0.0;
}

std::vector<BankImpact> debtrank_profile(const EconomyGraph& g, const DebtRankConfig& cfg) {
    const DebtRankEngine engine(g);
    const std::size_t m = engine.bank_count();
    std::vector<BankImpact> impacts(m);
    std::vector<double> seed(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        seed[k] = 1.0;
        const auto result = engine.run(seed, cfg);
        seed[k] = 0.0;
        impacts[k].total = equity_weighted_loss(engine.equities(), result.final);
        impacts[k].contagion_only = impacts[k].total - engine.equities()[k] / engine.total_equity();
    }
    return impacts;
}

void write_debtrank_trace_csv(std::ostream& out, const EconomyGraph& g, const ContagionResult& result) {
    out << "iteration,bank_id,loss\n";
    for (std::size_t t = 0; t < result.trace.size(); ++t) {
        for (std::size_t k = 0; k < result.trace[t].size(); ++k) {
            out << t << ',' << g.banks[k].id << ',' << format_double(result.trace[t][k]) << '\n';
        }
    }
}

}  // namespace fincascade
