#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "fincascade/economy.h"
#include "fincascade/propagation.h"

namespace fincascade {

/// Change in yearly profit per firm, dp_i = (1 - h_i)(r_i - c_i).
struct ProfitShock {
    std::vector<double> dp;
    /// 0 marks firms without financial statements; their dp is 0.
    std::vector<std::uint8_t> has_financials;
};

/// chi_i = 1 when firm i defaults on its loans.
struct DefaultFlags {
    std::vector<std::uint8_t> chi;

    std::size_t count() const;
    bool operator[](std::size_t i) const { return chi[i] != 0; }
};

/// Per-bank losses as fractions of tier 1 equity, split by contagion channel.
struct BankLossLedger {
    /// Direct losses from firms defaulting under the initial shock alone.
    std::vector<double> di;
    /// Additional losses from firms that default only after supply-chain contagion.
    std::vector<double> sc;
    /// Interbank contagion losses without / with supply-chain contagion (filled by DebtRank).
    std::vector<double> ib_wo;
    std::vector<double> ib_w;

    std::size_t banks() const { return di.size(); }
    /// min(DI + IB_WO, 1)
    double total_wo(std::size_t k) const;
    /// min(DI + SC + IB_W, 1)
    double total_w(std::size_t k) const;
};

ProfitShock profit_shock(const EconomyGraph& g, std::span<const double> h);
inline ProfitShock profit_shock(const EconomyGraph& g, const ProductionProfile& profile) {
    return profit_shock(g, profile.h);
}

/// chi_i = 1 iff i is eligible and (z_i - dp_i <= 0 or a_i - s_i - dp_i <= 0).
DefaultFlags default_flags(const EconomyGraph& g, const ProfitShock& dp);

/// Sum over defaulted firms of lgd * B_ik / e_k. Unclamped.
std::vector<double> loan_losses(const EconomyGraph& g, const DefaultFlags& chi);

/// DI and SC channels. Requires chi_w >= chi_wo elementwise; throws ContractError naming the firm otherwise.
/// ib_wo / ib_w are zero-filled.
BankLossLedger bank_losses(const EconomyGraph& g, const DefaultFlags& chi_w, const DefaultFlags& chi_wo);

/// Long-format dump rows: scenario_id,firm_id,chi_wo,chi_w,dp (dp from the contagion regime).
void write_defaults_header(std::ostream& out);
void write_defaults_rows(std::ostream& out, std::size_t scenario, const EconomyGraph& g, const DefaultFlags& chi_wo,
                         const DefaultFlags& chi_w, const ProfitShock& dp_w);

}  // namespace fincascade
