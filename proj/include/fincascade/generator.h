#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "fincascade/economy.h"

namespace fincascade {

enum class WeightFamily { LogNormal, Pareto, Exponential };

WeightFamily parse_weight_family(const std::string& text);
const char* to_string(WeightFamily family);

struct GeneratorParams {
    std::size_t firms = 1000;
    std::size_t banks = 19;
    /// Mean number of suppliers per firm.
    double mean_degree = 4.0;
    /// Number of NACE-2 divisions, and NACE-4 classes inside each division.
    std::size_t sectors = 20;
    std::size_t subsectors = 3;
    /// Target sum(B) / sum(L).
    double target_exposure_ratio = 12.5;
    WeightFamily weight_family = WeightFamily::LogNormal;
    /// Share of firms with financial statements.
    double financials_share = 0.75;
    /// Share of firms with statements that are excluded from defaulting (non-positive buffers).
    double distressed_share = 0.05;
    /// Share of firms with statements that borrow from banks.
    double borrower_share = 0.5;
    /// Target sum(B) / sum(e).
    double loans_to_equity = 6.0;
    /// Probability of an interbank link per ordered bank pair.
    double interbank_density = 0.4;
    /// Banks left out of the interbank market entirely.
    std::size_t unconnected_banks = 0;
    /// Share of NACE-2 sector pairs whose inputs are essential.
    double essential_share = 0.05;
    /// Scale of firm equity and liquidity buffers relative to yearly profit (log-normal median).
    double buffer_multiple = 3.0;
};

/// Deterministic in (params, seed). The result passes validate_economy. With more than one bank
/// sum(B) / sum(L) equals the target up to rounding; a single bank has no interbank market.
/// Throws InfeasibleParams for inconsistent parameters.
EconomyGraph generate_synthetic_economy(const GeneratorParams& params, std::uint64_t seed);

}  // namespace fincascade
