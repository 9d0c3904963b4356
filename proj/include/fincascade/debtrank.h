#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "fincascade/economy.h"

namespace fincascade {

struct DebtRankConfig {
    /// Stop once the equity-weighted system loss added in a round is <= epsilon.
    double epsilon = 0.01;
    int max_iter = 1000;
    bool record_trace = false;
};

struct ContagionResult {
    /// Seed losses L_k(t1), fractions of equity.
    std::vector<double> initial;
    /// L_k(T), unclamped.
    std::vector<double> final;
    /// final - initial.
    std::vector<double> ib_marginal;
    int iterations = 0;
    bool converged = true;
    /// Loss vector after every round, starting with the seed. Filled only when requested.
    std::vector<std::vector<double>> trace;

    /// min(final_k, 1)
    std::vector<double> clamped_final() const;
};

/// Linearized DebtRank over the interbank leverage matrix Lambda_lk = L_lk / e_k.
///
/// A bank transmits only the increment of its clamped loss since the previous round,
///   L_k(t) = L_k(t-1) + sum_l Lambda_lk (min(L_l(t-1), 1) - min(L_l(t-2), 1)),
/// so a bank at full loss stops spreading. Lambda is derived from the current equities on
/// construction and never cached beyond the engine's lifetime.
class DebtRankEngine {
public:
    explicit DebtRankEngine(const EconomyGraph& g);

    /// Throws std::invalid_argument on negative or non-finite seeds.
    ContagionResult run(std::span<const double> seed, const DebtRankConfig& cfg = {}) const;

    std::size_t bank_count() const { return equity_.size(); }
    std::span<const double> equities() const { return equity_; }
    double total_equity() const { return total_equity_; }

private:
    struct Exposure {
        std::size_t lender = 0;
        double leverage = 0.0;
    };

    std::vector<double> equity_;
    double total_equity_ = 0.0;
    // Lenders exposed to borrower l: exposures_[offsets_[l] .. offsets_[l+1]).
    std::vector<std::size_t> offsets_;
    std::vector<Exposure> exposures_;
};

ContagionResult debtrank(const EconomyGraph& g, std::span<const double> seed, const DebtRankConfig& cfg = {});

/// sum_k e_k min(losses_k, 1) / sum_k e_k
double equity_weighted_loss(std::span<const double> equities, std::span<const double> losses);

struct BankImpact {
    /// Share of system equity lost when the bank fully defaults, own equity included.
    double total = 0.0;
    /// total minus the bank's own equity share.
    double contagion_only = 0.0;
};

std::vector<BankImpact> debtrank_profile(const EconomyGraph& g, const DebtRankConfig& cfg = {});

/// Long-format dump: iteration,bank_id,loss.
void write_debtrank_trace_csv(std::ostream& out, const EconomyGraph& g, const ContagionResult& result);

}  // namespace fincascade
