#include "fincascade/report.h"

#include <fstream>
#include <map>
#include <ostream>

#include "json.hpp"

#include "fincascade/errors.h"
#include "fincascade/io.h"

namespace fincascade {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string fmt(double v) { return format_double(v); }

std::string fmt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::string bank_label(const LedgerSet& ledgers, const std::optional<std::size_t>& bank) {
    return bank ? ledgers.bank_ids.at(*bank) : std::string("system");
}

ordered_json fit_json(const std::optional<FitResult>& fit) {
    if (!fit) return nullptr;
    return ordered_json{{"slope", fit->slope},         {"intercept", fit->intercept}, {"r_squared", fit->r_squared},
                        {"slope_stderr", fit->slope_stderr}, {"n", fit->n},             {"log_log", fit->log_log}};
}

ordered_json optional_json(const std::optional<double>& v) {
    if (!v) return nullptr;
    return *v;
}

std::ofstream open_report(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

}  // namespace

void write_fsri_profile_csv(std::ostream& out, const EconomyGraph& g, const FsriProfile& profile) {
    out << "rank,firm_id,sector,fsri,fsri_plus,amplification,esri\n";
    std::size_t rank = 0;
    for (const auto& rec : profile.records) {
        const auto& firm = g.firms.at(rec.firm);
        out << ++rank << ',' << firm.id << ',' << firm.sector << ',' << fmt(rec.fsri) << ',' << fmt(rec.fsri_plus)
            << ',' << fmt(rec.amplification) << ',' << fmt(rec.esri) << '\n';
    }
}

void write_ccdf_csv(std::ostream& out, const std::vector<std::pair<std::string, Ccdf>>& series) {
    out << "series,level,survival\n";
    for (const auto& [name, points] : series) {
        for (const auto& [level, survival] : points) out << name << ',' << fmt(level) << ',' << fmt(survival) << '\n';
    }
}

void write_ledgers_csv(std::ostream& out, const LedgerSet& ledgers) {
    out << "scenario_id,bank_id,equity,regime,di,sc,ib_wo,ib_w\n";
    for (std::size_t s = 0; s < ledgers.scenarios.size(); ++s) {
        const auto& ledger = ledgers.scenarios[s];
        for (std::size_t k = 0; k < ledger.banks(); ++k) {
            out << s << ',' << ledgers.bank_ids[k] << ',' << fmt(ledgers.equities[k]) << ','
                << to_string(ledgers.regime) << ',' << fmt(ledger.di[k]) << ',' << fmt(ledger.sc[k]) << ','
                << fmt(ledger.ib_wo[k]) << ',' << fmt(ledger.ib_w[k]) << '\n';
        }
    }
}

LedgerSet read_ledgers_csv(const fs::path& path) {
    CsvReader csv(path, {"scenario_id", "bank_id", "equity", "regime", "di", "sc", "ib_wo", "ib_w"});
    LedgerSet ledgers;
    std::map<std::string, std::size_t> bank_index;
    bool regime_seen = false;
    std::size_t slot = 0;
    while (csv.next()) {
        const double scenario_value = csv.number("scenario_id");
        if (scenario_value < 0 || scenario_value != static_cast<double>(static_cast<std::size_t>(scenario_value))) {
            csv.fail("scenario_id must be a non-negative integer");
        }
        const auto scenario = static_cast<std::size_t>(scenario_value);
        const std::string bank(csv.field("bank_id"));
        const auto regime = parse_regime(std::string(csv.field("regime")));
        if (!regime_seen) {
            ledgers.regime = regime;
            regime_seen = true;
        } else if (regime != ledgers.regime) {
            csv.fail("mixed regimes in one ledger file");
        }

        const bool same = !ledgers.scenarios.empty() && scenario + 1 == ledgers.scenarios.size();
        if (!same) {
            if (scenario != ledgers.scenarios.size()) csv.fail("scenarios must be listed in order starting at 0");
            if (!ledgers.scenarios.empty() && slot != ledgers.bank_ids.size()) {
                csv.fail("scenario " + std::to_string(scenario - 1) + " does not list every bank");
            }
            ledgers.scenarios.emplace_back();
            slot = 0;
        }
        auto& ledger = ledgers.scenarios.back();
        if (scenario == 0) {
            if (bank_index.count(bank)) csv.fail("duplicate bank '" + bank + "'");
            bank_index[bank] = ledgers.bank_ids.size();
            ledgers.bank_ids.push_back(bank);
            ledgers.equities.push_back(csv.number("equity"));
        } else if (slot >= ledgers.bank_ids.size() || ledgers.bank_ids[slot] != bank) {
            csv.fail("bank order differs from scenario 0");
        }
        ledger.di.push_back(csv.number("di"));
        ledger.sc.push_back(csv.number("sc"));
        ledger.ib_wo.push_back(csv.number("ib_wo"));
        ledger.ib_w.push_back(csv.number("ib_w"));
        ++slot;
    }
    if (!ledgers.scenarios.empty() && slot != ledgers.bank_ids.size()) {
        throw ParseError(path.string(), csv.line(), "last scenario does not list every bank");
    }
    return ledgers;
}

void write_risk_summary_csv(std::ostream& out, const LedgerSet& ledgers, const std::vector<ChannelSummaryRow>& rows) {
    out << "bank,channel,EL,VaR,ES,regime\n";
    for (const auto& row : rows) {
        out << bank_label(ledgers, row.bank) << ',' << to_string(row.channel) << ',' << fmt(row.summary.el) << ','
            << fmt(row.summary.var95) << ',' << fmt(row.summary.es95) << ',' << to_string(row.regime) << '\n';
    }
}

void write_amplification_csv(std::ostream& out, const LedgerSet& ledgers,
                             const std::vector<AmplificationRecord>& records) {
    out << "scenario_id,bank_id,ib_wo,ib_w,ratio\n";
    for (const auto& rec : records) {
        out << rec.scenario << ',' << ledgers.bank_ids.at(rec.bank) << ',' << fmt(rec.ib_wo) << ',' << fmt(rec.ib_w)
            << ',' << fmt(rec.ratio) << '\n';
    }
}

void write_amplification_banks_csv(std::ostream& out, const LedgerSet& ledgers, const AmplificationStats& stats) {
    out << "bank_id,n,q1,median,q3,iqr,whisker_low,whisker_high,min,max,mean,outliers\n";
    for (std::size_t k = 0; k < stats.per_bank.size(); ++k) {
        const auto& box = stats.per_bank[k];
        if (!box) continue;
        out << ledgers.bank_ids.at(k) << ',' << box->n << ',' << fmt(box->q1) << ',' << fmt(box->median) << ','
            << fmt(box->q3) << ',' << fmt(box->iqr) << ',' << fmt(box->whisker_low) << ',' << fmt(box->whisker_high)
            << ',' << fmt(box->min) << ',' << fmt(box->max) << ',' << fmt(box->mean) << ',' << box->outliers << '\n';
    }
}

void write_amplification_scenarios_csv(std::ostream& out, const AmplificationStats& stats) {
    out << "scenario_id,banks,median,q1,q3\n";
    for (std::size_t s = 0; s < stats.per_scenario.size(); ++s) {
        const auto& spread = stats.per_scenario[s];
        if (!spread) continue;
        out << s << ',' << spread->banks << ',' << fmt(spread->median) << ',' << fmt(spread->q1) << ','
            << fmt(spread->q3) << '\n';
    }
}

void write_fits_json(std::ostream& out, const LedgerSet& ledgers, const FitReport& fits,
                     const AmplificationStats& stats) {
    ordered_json doc;
    doc["regime"] = to_string(ledgers.regime);
    doc["scenarios"] = ledgers.scenarios.size();
    doc["pooled_linear"] = fit_json(fits.pooled_linear);
    doc["pooled_log_log"] = fit_json(fits.pooled_log_log);
    ordered_json per_bank = ordered_json::array();
    for (const auto& bank_fit : fits.per_bank) {
        ordered_json entry{{"bank_id", ledgers.bank_ids.at(bank_fit.bank)}, {"fit", fit_json(bank_fit.fit)}};
        if (!bank_fit.fit) entry["skipped"] = bank_fit.skipped_reason;
        per_bank.push_back(std::move(entry));
    }
    doc["per_bank"] = std::move(per_bank);
    doc["system_ib_ratios"] = {{"EL", optional_json(fits.el_ratio)},
                               {"VaR", optional_json(fits.var_ratio)},
                               {"ES", optional_json(fits.es_ratio)}};
    doc["amplification"] = {{"empty", stats.empty},
                            {"defined", stats.defined},
                            {"undefined", stats.undefined},
                            {"share_above_2", stats.pooled.empty() ? ordered_json(nullptr)
                                                                   : ordered_json(fraction_above(stats.pooled, 2.0))},
                            {"share_above_3", stats.pooled.empty() ? ordered_json(nullptr)
                                                                   : ordered_json(fraction_above(stats.pooled, 3.0))}};
    out << doc.dump(2) << '\n';
}

void write_debtrank_profile_csv(std::ostream& out, const EconomyGraph& g, const std::vector<BankImpact>& impacts) {
    out << "bank_id,equity,total,contagion_only\n";
    for (std::size_t k = 0; k < impacts.size(); ++k) {
        out << g.banks.at(k).id << ',' << fmt(g.banks[k].tier1_equity) << ',' << fmt(impacts[k].total) << ','
            << fmt(impacts[k].contagion_only) << '\n';
    }
}

std::vector<std::string> write_ledger_reports(const fs::path& dir, const LedgerSet& ledgers) {
    fs::create_directories(dir);
    const auto summaries = summarize_channels(ledgers);
    const auto records = amplification_records(ledgers);
    const auto stats = ib_amplification(records, ledgers.bank_ids.size(), ledgers.scenarios.size());
    const auto fits = interbank_fits(ledgers);

    {
        auto out = open_report(dir / "risk_summary.csv");
        write_risk_summary_csv(out, ledgers, summaries);
    }
    {
        auto out = open_report(dir / "amplification.csv");
        write_amplification_csv(out, ledgers, records);
    }
    {
        auto out = open_report(dir / "amplification_banks.csv");
        write_amplification_banks_csv(out, ledgers, stats);
    }
    {
        auto out = open_report(dir / "amplification_scenarios.csv");
        write_amplification_scenarios_csv(out, stats);
    }
    {
        auto out = open_report(dir / "fits.json");
        write_fits_json(out, ledgers, fits, stats);
    }
    {
        std::vector<std::pair<std::string, Ccdf>> series;
        const Regime regimes[] = {Regime::WO, Regime::W};
        for (auto regime : regimes) {
            if (ledgers.regime == RegimeSelection::W && regime == Regime::WO) continue;
            if (ledgers.regime == RegimeSelection::WO && regime == Regime::W) continue;
            for (auto channel : kAllChannels) {
                series.emplace_back(std::string("system_") + to_string(regime) + "_" + to_string(channel),
                                    ccdf(system_channel_losses(ledgers, regime, channel)));
            }
        }
        if (!stats.empty) series.emplace_back("amplification", stats.pooled_ccdf);
        auto out = open_report(dir / "ccdf.csv");
        write_ccdf_csv(out, series);
    }
    return {"risk_summary.csv", "amplification.csv", "amplification_banks.csv", "amplification_scenarios.csv",
            "fits.json", "ccdf.csv"};
}

}  // namespace fincascade
