#include "fincascade/risk.h"

#include <algorithm>
#include <stdexcept>

#include "fincascade/parallel.h"

namespace fincascade {

RegimeSelection parse_regime(const std::string& text) {
    if (text == "w") return RegimeSelection::W;
    if (text == "wo") return RegimeSelection::WO;
    if (text == "both") return RegimeSelection::Both;
    throw std::invalid_argument("regime must be one of w, wo, both (got '" + text + "')");
}

const char* to_string(RegimeSelection regime) {
    switch (regime) {
        case RegimeSelection::W: return "w";
        case RegimeSelection::WO: return "wo";
        case RegimeSelection::Both: return "both";
    }
    return "both";
}

const char* to_string(Channel channel) {
    switch (channel) {
        case Channel::DI: return "DI";
        case Channel::DI_SC: return "DI+SC";
        case Channel::DI_SC_IB: return "DI+SC+IB";
        case Channel::IB: return "IB";
    }
    return "DI";
}

const char* to_string(Regime regime) { return regime == Regime::W ? "w" : "wo"; }

namespace {

bool runs_w(RegimeSelection r) { return r != RegimeSelection::WO; }
bool runs_wo(RegimeSelection r) { return r != RegimeSelection::W; }

std::vector<Regime> regimes_of(RegimeSelection r) {
    std::vector<Regime> out;
    if (runs_wo(r)) out.push_back(Regime::WO);
    if (runs_w(r)) out.push_back(Regime::W);
    return out;
}

}  // namespace

StressEngine::StressEngine(const EconomyGraph& g)
    : g_(&g), propagator_(g), debtrank_(g), output_(firm_output(g)) {}

ScenarioOutcome StressEngine::run_scenario(const ShockVector& psi, const StressConfig& cfg,
                                           RegimeSelection regime) const {
    const auto& g = *g_;
    if (psi.size() != g.firm_count()) throw std::invalid_argument("shock vector length does not match firm count");

    ScenarioOutcome outcome;
    const auto chi_wo = default_flags(g, profit_shock(g, psi.values()));
    outcome.defaults_wo = chi_wo.count();

    DefaultFlags chi_w = chi_wo;
    if (runs_w(regime)) {
        auto prop = cfg.propagation;
        prop.enabled = true;
        const auto profile = propagator_.run(psi, prop);
        outcome.propagation_iterations = profile.iterations;
        outcome.propagation_converged = profile.converged;
        outcome.output_loss_w = output_loss(output_, profile.h);
        chi_w = default_flags(g, profit_shock(g, profile.h));
    } else {
        outcome.output_loss_w = output_loss(output_, psi.values());
    }
    outcome.defaults_w = chi_w.count();

    outcome.ledger = bank_losses(g, chi_w, chi_wo);
    auto& ledger = outcome.ledger;
    if (runs_wo(regime)) {
        const auto result = debtrank_.run(ledger.di, cfg.debtrank);
        ledger.ib_wo = result.ib_marginal;
        outcome.debtrank_wo_converged = result.converged;
    }
    if (runs_w(regime)) {
        std::vector<double> seed(g.bank_count());
        for (std::size_t k = 0; k < seed.size(); ++k) seed[k] = ledger.di[k] + ledger.sc[k];
        const auto result = debtrank_.run(seed, cfg.debtrank);
        ledger.ib_w = result.ib_marginal;
        outcome.debtrank_w_converged = result.converged;
    }
    return outcome;
}

StressEngine::FirmImpact StressEngine::single_firm(std::size_t firm, const StressConfig& cfg) const {
    const auto& g = *g_;
    auto prop = cfg.propagation;
    prop.enabled = true;
    const auto psi = single_firm_shock(g, firm);
    const auto profile = propagator_.run(psi, prop);
    const auto chi_wo = default_flags(g, profit_shock(g, psi.values()));
    const auto chi_w = default_flags(g, profit_shock(g, profile.h));
    const auto ledger = bank_losses(g, chi_w, chi_wo);

    std::vector<double> initial(g.bank_count());
    for (std::size_t k = 0; k < initial.size(); ++k) initial[k] = ledger.di[k] + ledger.sc[k];
    const auto contagion = debtrank_.run(initial, cfg.debtrank);

    FirmImpact impact;
    impact.fsri = equity_weighted_loss(debtrank_.equities(), initial);
    impact.fsri_plus = equity_weighted_loss(debtrank_.equities(), contagion.final);
    impact.esri = output_loss(output_, profile.h);
    impact.converged = profile.converged && contagion.converged;
    return impact;
}

double fsri(const EconomyGraph& g, std::size_t firm, const PropagationConfig& cfg) {
    return StressEngine(g).single_firm(firm, {cfg, {}}).fsri;
}

double fsri_plus(const EconomyGraph& g, std::size_t firm, const PropagationConfig& cfg, const DebtRankConfig& dr) {
    return StressEngine(g).single_firm(firm, {cfg, dr}).fsri_plus;
}

FsriProfile fsri_profile(const EconomyGraph& g, const StressConfig& cfg, unsigned workers) {
    const StressEngine engine(g);
    FsriProfile profile;
    profile.records.resize(g.firm_count());
    std::vector<std::uint8_t> converged(g.firm_count(), 1);
    parallel_for(g.firm_count(), workers, [&](std::size_t i) {
        const auto impact = engine.single_firm(i, cfg);
        auto& rec = profile.records[i];
        rec.firm = i;
        rec.fsri = impact.fsri;
        rec.fsri_plus = impact.fsri_plus;
        rec.esri = impact.esri;
        if (impact.fsri > 0.0) rec.amplification = impact.fsri_plus / impact.fsri;
        converged[i] = impact.converged;
    });
    profile.nonconverged = static_cast<std::size_t>(std::count(converged.begin(), converged.end(), 0));

    std::vector<double> a(g.firm_count());
    std::vector<double> b(g.firm_count());
    for (std::size_t i = 0; i < g.firm_count(); ++i) {
        a[i] = profile.records[i].fsri;
        b[i] = profile.records[i].fsri_plus;
    }
    profile.ccdf_fsri = ccdf(a);
    profile.ccdf_fsri_plus = ccdf(b);

    std::sort(profile.records.begin(), profile.records.end(), [](const FirmRiskRecord& x, const FirmRiskRecord& y) {
        if (x.fsri != y.fsri) return x.fsri > y.fsri;
        if (x.fsri_plus != y.fsri_plus) return x.fsri_plus > y.fsri_plus;
        return x.firm < y.firm;
    });
    return profile;
}

double channel_loss(const BankLossLedger& ledger, std::size_t k, Regime regime, Channel channel) {
    const bool w = regime == Regime::W;
    const double sc = w ? ledger.sc[k] : 0.0;
    const double ib = w ? ledger.ib_w[k] : ledger.ib_wo[k];
    switch (channel) {
        case Channel::DI: return std::min(ledger.di[k], 1.0);
        case Channel::DI_SC: return std::min(ledger.di[k] + sc, 1.0);
        case Channel::DI_SC_IB: return std::min(ledger.di[k] + sc + ib, 1.0);
        case Channel::IB: return ib;
    }
    return 0.0;
}

std::vector<double> system_channel_losses(const LedgerSet& ledgers, Regime regime, Channel channel) {
    double total_equity = 0.0;
    for (double e : ledgers.equities) total_equity += e;
    std::vector<double> out;
    out.reserve(ledgers.scenarios.size());
    for (const auto& ledger : ledgers.scenarios) {
        double lost = 0.0;
        for (std::size_t k = 0; k < ledgers.equities.size(); ++k) {
            lost += ledgers.equities[k] * channel_loss(ledger, k, regime, channel);
        }
        out.push_back(total_equity > 0.0 ? lost / total_equity : 0.0);
    }
    return out;
}

std::vector<ChannelSummaryRow> summarize_channels(const LedgerSet& ledgers) {
    std::vector<ChannelSummaryRow> rows;
    if (ledgers.scenarios.empty()) return rows;
    const auto regimes = regimes_of(ledgers.regime);
    std::vector<double> samples(ledgers.scenarios.size());
    for (std::size_t k = 0; k < ledgers.equities.size(); ++k) {
        for (auto regime : regimes) {
            for (auto channel : kAllChannels) {
                for (std::size_t s = 0; s < ledgers.scenarios.size(); ++s) {
                    samples[s] = channel_loss(ledgers.scenarios[s], k, regime, channel);
                }
                rows.push_back({k, regime, channel, risk_measures(samples)});
            }
        }
    }
    for (auto regime : regimes) {
        for (auto channel : kAllChannels) {
            rows.push_back({std::nullopt, regime, channel,
                            risk_measures(system_channel_losses(ledgers, regime, channel))});
        }
    }
    return rows;
}

std::size_t ChannelDecomposition::nonconverged() const {
    return static_cast<std::size_t>(
        std::count_if(outcomes.begin(), outcomes.end(), [](const ScenarioOutcome& o) { return !o.converged(); }));
}

ChannelDecomposition channel_decomposition(const EconomyGraph& g, const ShockBatch& batch, const StressConfig& cfg,
                                           RegimeSelection regime, unsigned workers) {
    const StressEngine engine(g);
    ChannelDecomposition result;
    result.outcomes.resize(batch.size());
    parallel_for(batch.size(), workers,
                 [&](std::size_t s) { result.outcomes[s] = engine.run_scenario(batch.scenarios[s], cfg, regime); });

    result.ledgers.regime = regime;
    result.ledgers.equities = g.equities();
    for (const auto& bank : g.banks) result.ledgers.bank_ids.push_back(bank.id);
    result.ledgers.scenarios.reserve(batch.size());
    for (const auto& outcome : result.outcomes) result.ledgers.scenarios.push_back(outcome.ledger);
    result.summaries = summarize_channels(result.ledgers);
    return result;
}

std::vector<AmplificationRecord> amplification_records(const LedgerSet& ledgers) {
    std::vector<AmplificationRecord> records;
    for (std::size_t s = 0; s < ledgers.scenarios.size(); ++s) {
        const auto& ledger = ledgers.scenarios[s];
        for (std::size_t k = 0; k < ledger.banks(); ++k) {
            AmplificationRecord rec{k, s, ledger.ib_wo[k], ledger.ib_w[k], std::nullopt};
            if (rec.ib_wo > 0.0) rec.ratio = rec.ib_w / rec.ib_wo;
            records.push_back(rec);
        }
    }
    return records;
}

AmplificationStats ib_amplification(const std::vector<AmplificationRecord>& records, std::size_t banks,
                                    std::size_t scenarios) {
    AmplificationStats stats;
    std::vector<std::vector<double>> by_bank(banks);
    std::vector<std::vector<double>> by_scenario(scenarios);
    for (const auto& rec : records) {
        if (rec.bank >= banks || rec.scenario >= scenarios) {
            throw std::out_of_range("amplification record outside bank/scenario range");
        }
        if (!rec.ratio) {
            ++stats.undefined;
            continue;
        }
        ++stats.defined;
        by_bank[rec.bank].push_back(*rec.ratio);
        by_scenario[rec.scenario].push_back(*rec.ratio);
        stats.pooled.push_back(*rec.ratio);
    }
    stats.empty = stats.defined == 0;
    stats.per_bank.resize(banks);
    for (std::size_t k = 0; k < banks; ++k) {
        if (!by_bank[k].empty()) stats.per_bank[k] = box_stats(by_bank[k]);
    }
    stats.per_scenario.resize(scenarios);
    for (std::size_t s = 0; s < scenarios; ++s) {
        auto& values = by_scenario[s];
        if (values.empty()) continue;
        std::sort(values.begin(), values.end());
        stats.per_scenario[s] =
            ScenarioSpread{sorted_quantile(values, 0.5), sorted_quantile(values, 0.25), sorted_quantile(values, 0.75),
                           values.size()};
    }
    stats.pooled_ccdf = ccdf(stats.pooled);
    return stats;
}

namespace {

std::optional<FitResult> try_fit(const std::vector<double>& x, const std::vector<double>& y, bool log_log,
                                 std::string* reason = nullptr) {
    try {
        return ols_fit(x, y, log_log);
    } catch (const std::invalid_argument& e) {
        if (reason) *reason = e.what();
        return std::nullopt;
    }
}

std::optional<double> ratio(double num, double den) {
    if (den > 0.0) return num / den;
    return std::nullopt;
}

}  // namespace

FitReport interbank_fits(const LedgerSet& ledgers) {
    FitReport report;
    if (ledgers.regime != RegimeSelection::Both || ledgers.scenarios.empty()) return report;
    const std::size_t m = ledgers.equities.size();

    std::vector<double> x, y, lx, ly;
    std::vector<std::vector<double>> bx(m), by(m);
    for (const auto& ledger : ledgers.scenarios) {
        for (std::size_t k = 0; k < m; ++k) {
            x.push_back(ledger.ib_wo[k]);
            y.push_back(ledger.ib_w[k]);
            bx[k].push_back(ledger.ib_wo[k]);
            by[k].push_back(ledger.ib_w[k]);
            if (ledger.ib_wo[k] > 0.0 && ledger.ib_w[k] > 0.0) {
                lx.push_back(ledger.ib_wo[k]);
                ly.push_back(ledger.ib_w[k]);
            }
        }
    }
    report.pooled_linear = try_fit(x, y, false);
    report.pooled_log_log = try_fit(lx, ly, true);

    for (std::size_t k = 0; k < m; ++k) {
        BankFit bank_fit;
        bank_fit.bank = k;
        const bool any_loss = std::any_of(bx[k].begin(), bx[k].end(), [](double v) { return v > 0.0; }) ||
                              std::any_of(by[k].begin(), by[k].end(), [](double v) { return v > 0.0; });
        if (!any_loss) {
            bank_fit.skipped_reason = "no interbank losses";
        } else {
            bank_fit.fit = try_fit(bx[k], by[k], false, &bank_fit.skipped_reason);
        }
        report.per_bank.push_back(std::move(bank_fit));
    }

    const auto wo = risk_measures(system_channel_losses(ledgers, Regime::WO, Channel::IB));
    const auto w = risk_measures(system_channel_losses(ledgers, Regime::W, Channel::IB));
    report.el_ratio = ratio(w.el, wo.el);
    report.var_ratio = ratio(w.var95, wo.var95);
    report.es_ratio = ratio(w.es95, wo.es95);
    return report;
}

}  // namespace fincascade
