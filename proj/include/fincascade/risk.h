#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fincascade/credit_loss.h"
#include "fincascade/debtrank.h"
#include "fincascade/economy.h"
#include "fincascade/propagation.h"
#include "fincascade/scenarios.h"
#include "fincascade/stats.h"

namespace fincascade {

struct StressConfig {
    PropagationConfig propagation;
    DebtRankConfig debtrank;
};

enum class RegimeSelection { W, WO, Both };

RegimeSelection parse_regime(const std::string& text);
const char* to_string(RegimeSelection regime);

/// Everything one end-to-end run of a scenario produces.
struct ScenarioOutcome {
    BankLossLedger ledger;
    int propagation_iterations = 0;
    bool propagation_converged = true;
    bool debtrank_wo_converged = true;
    bool debtrank_w_converged = true;
    std::size_t defaults_wo = 0;
    std::size_t defaults_w = 0;
    /// Output-weighted share of production lost after supply-chain contagion (W regime).
    double output_loss_w = 0.0;

    bool converged() const { return propagation_converged && debtrank_wo_converged && debtrank_w_converged; }
};

/// The three-step pipeline (supply chain -> loan book -> interbank) over one shared economy.
/// Read-only after construction; safe to call from several threads.
class StressEngine {
public:
    explicit StressEngine(const EconomyGraph& g);

    const EconomyGraph& economy() const { return *g_; }

    /// WO: h = psi, seed DI. W: h = propagate(psi), seed DI + SC. Regimes not selected are skipped
    /// (their IB column stays zero; SC stays zero when W is skipped).
    ScenarioOutcome run_scenario(const ShockVector& psi, const StressConfig& cfg,
                                 RegimeSelection regime = RegimeSelection::Both) const;

    struct FirmImpact {
        double fsri = 0.0;
        double fsri_plus = 0.0;
        double esri = 0.0;
        bool converged = true;
    };

    /// Single-firm failure of `firm`, W regime.
    FirmImpact single_firm(std::size_t firm, const StressConfig& cfg) const;

private:
    const EconomyGraph* g_;
    SupplyChainPropagator propagator_;
    DebtRankEngine debtrank_;
    std::vector<double> output_;
};

/// Equity-weighted banking-system loss after supply-chain contagion, before the interbank step.
double fsri(const EconomyGraph& g, std::size_t firm, const PropagationConfig& cfg);
/// As fsri, then DebtRank seeded with DI + SC.
double fsri_plus(const EconomyGraph& g, std::size_t firm, const PropagationConfig& cfg,
                 const DebtRankConfig& dr = {});

struct FirmRiskRecord {
    std::size_t firm = 0;
    double fsri = 0.0;
    double fsri_plus = 0.0;
    double esri = 0.0;
    /// fsri_plus / fsri; nullopt when fsri = 0.
    std::optional<double> amplification;
};

struct FsriProfile {
    /// Sorted by fsri, descending (ties: fsri_plus descending, then firm index).
    std::vector<FirmRiskRecord> records;
    std::vector<std::pair<double, double>> ccdf_fsri;
    std::vector<std::pair<double, double>> ccdf_fsri_plus;
    std::size_t nonconverged = 0;
};

FsriProfile fsri_profile(const EconomyGraph& g, const StressConfig& cfg, unsigned workers = 0);

enum class Channel { DI, DI_SC, DI_SC_IB, IB };
const char* to_string(Channel channel);
inline constexpr Channel kAllChannels[] = {Channel::DI, Channel::DI_SC, Channel::DI_SC_IB, Channel::IB};

enum class Regime { WO, W };
const char* to_string(Regime regime);

/// Per-bank loss of one channel in one regime. Cumulative channels are clamped at 1.
///   WO: DI, DI (+SC = 0), DI + IB_WO, IB_WO      W: DI, DI + SC, DI + SC + IB_W, IB_W
double channel_loss(const BankLossLedger& ledger, std::size_t bank, Regime regime, Channel channel);

/// Ledgers of a scenario batch together with the bank identities they refer to.
struct LedgerSet {
    std::vector<std::string> bank_ids;
    std::vector<double> equities;
    std::vector<BankLossLedger> scenarios;
    RegimeSelection regime = RegimeSelection::Both;
};

struct ChannelSummaryRow {
    /// nullopt for the equity-weighted system level.
    std::optional<std::size_t> bank;
    Regime regime = Regime::W;
    Channel channel = Channel::DI;
    RiskSummary summary;
};

/// EL/VaR/ES per bank, channel and regime, plus the equity-weighted system rows.
std::vector<ChannelSummaryRow> summarize_channels(const LedgerSet& ledgers);

/// Equity-weighted system loss of one channel for every scenario.
std::vector<double> system_channel_losses(const LedgerSet& ledgers, Regime regime, Channel channel);

struct ChannelDecomposition {
    LedgerSet ledgers;
    std::vector<ScenarioOutcome> outcomes;
    std::vector<ChannelSummaryRow> summaries;

    std::size_t nonconverged() const;
};

/// Runs every scenario of the batch through both regimes on `workers` threads (0 = hardware
/// concurrency). Results are ordered by scenario index regardless of scheduling.
ChannelDecomposition channel_decomposition(const EconomyGraph& g, const ShockBatch& batch, const StressConfig& cfg,
                                           RegimeSelection regime = RegimeSelection::Both, unsigned workers = 0);

struct AmplificationRecord {
    std::size_t bank = 0;
    std::size_t scenario = 0;
    double ib_wo = 0.0;
    double ib_w = 0.0;
    /// ib_w / ib_wo; nullopt when ib_wo = 0.
    std::optional<double> ratio;
};

std::vector<AmplificationRecord> amplification_records(const LedgerSet& ledgers);

struct ScenarioSpread {
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    std::size_t banks = 0;
};

struct AmplificationStats {
    /// True when no record has a defined ratio.
    bool empty = true;
    std::size_t defined = 0;
    std::size_t undefined = 0;
    std::vector<std::optional<BoxStats>> per_bank;
    std::vector<std::optional<ScenarioSpread>> per_scenario;
    std::vector<double> pooled;
    std::vector<std::pair<double, double>> pooled_ccdf;
};

AmplificationStats ib_amplification(const std::vector<AmplificationRecord>& records, std::size_t banks,
                                    std::size_t scenarios);

struct BankFit {
    std::size_t bank = 0;
    std::optional<FitResult> fit;
    std::string skipped_reason;
};

struct FitReport {
    /// IB_W on IB_WO over all (bank, scenario) pairs.
    std::optional<FitResult> pooled_linear;
    /// Same on log-transformed pairs with both values positive.
    std::optional<FitResult> pooled_log_log;
    std::vector<BankFit> per_bank;
    /// System-level IB_W over IB_WO ratios of EL, VaR and ES (nullopt when the WO value is 0).
    std::optional<double> el_ratio;
    std::optional<double> var_ratio;
    std::optional<double> es_ratio;
};

FitReport interbank_fits(const LedgerSet& ledgers);

}  // namespace fincascade
