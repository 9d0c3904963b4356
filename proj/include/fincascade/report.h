#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fincascade/debtrank.h"
#include "fincascade/economy.h"
#include "fincascade/risk.h"

namespace fincascade {

using Ccdf = std::vector<std::pair<double, double>>;

/// rank,firm_id,sector,fsri,fsri_plus,amplification,esri  (amplification empty when fsri = 0)
void write_fsri_profile_csv(std::ostream& out, const EconomyGraph& g, const FsriProfile& profile);

/// series,level,survival
void write_ccdf_csv(std::ostream& out, const std::vector<std::pair<std::string, Ccdf>>& series);

/// scenario_id,bank_id,equity,regime,di,sc,ib_wo,ib_w
void write_ledgers_csv(std::ostream& out, const LedgerSet& ledgers);
/// Inverse of write_ledgers_csv. Throws ParseError on inconsistent rows.
LedgerSet read_ledgers_csv(const std::filesystem::path& path);

/// bank,channel,EL,VaR,ES,regime  (bank = "system" for the equity-weighted rows)
void write_risk_summary_csv(std::ostream& out, const LedgerSet& ledgers, const std::vector<ChannelSummaryRow>& rows);

/// scenario_id,bank_id,ib_wo,ib_w,ratio  (ratio empty when ib_wo = 0)
void write_amplification_csv(std::ostream& out, const LedgerSet& ledgers,
                             const std::vector<AmplificationRecord>& records);
/// bank_id,n,q1,median,q3,iqr,whisker_low,whisker_high,min,max,mean,outliers
void write_amplification_banks_csv(std::ostream& out, const LedgerSet& ledgers, const AmplificationStats& stats);
/// scenario_id,banks,median,q1,q3
void write_amplification_scenarios_csv(std::ostream& out, const AmplificationStats& stats);

void write_fits_json(std::ostream& out, const LedgerSet& ledgers, const FitReport& fits,
                     const AmplificationStats& stats);

/// bank_id,equity,total,contagion_only
void write_debtrank_profile_csv(std::ostream& out, const EconomyGraph& g, const std::vector<BankImpact>& impacts);

/// Writes every statistics file derivable from a ledger set into `dir`:
/// risk_summary.csv, amplification*.csv, fits.json and ccdf.csv. Returns the file names written.
std::vector<std::string> write_ledger_reports(const std::filesystem::path& dir, const LedgerSet& ledgers);

}  // namespace fincascade
