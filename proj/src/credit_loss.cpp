#include "fincascade/credit_loss.h"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "fincascade/errors.h"
#include "fincascade/io.h"

namespace fincascade {

std::size_t DefaultFlags::count() const { return std::accumulate(chi.begin(), chi.end(), std::size_t{0}); }

double BankLossLedger::total_wo(std::size_t k) const { return std::min(di[k] + ib_wo[k], 1.0); }

double BankLossLedger::total_w(std::size_t k) const { return std::min(di[k] + sc[k] + ib_w[k], 1.0); }

ProfitShock profit_shock(const EconomyGraph& g, std::span<const double> h) {
    if (h.size() != g.firm_count()) throw std::invalid_argument("profile length does not match firm count");
    ProfitShock shock;
    shock.dp.assign(g.firm_count(), 0.0);
    shock.has_financials.assign(g.firm_count(), 0);
    for (std::size_t i = 0; i < g.firm_count(); ++i) {
        const auto& firm = g.firms[i];
        if (!firm.financials_present) continue;
        shock.has_financials[i] = 1;
        shock.dp[i] = (1.0 - h[i]) * firm.profit();
    }
    return shock;
}

DefaultFlags default_flags(const EconomyGraph& g, const ProfitShock& dp) {
    if (dp.dp.size() != g.firm_count()) throw std::invalid_argument("profit shock length does not match firm count");
    DefaultFlags flags;
    flags.chi.assign(g.firm_count(), 0);
    for (std::size_t i = 0; i < g.firm_count(); ++i) {
        const auto& firm = g.firms[i];
        if (!firm.financials_present || !firm.eligible_for_default) continue;
        // A loss that exactly exhausts a buffer counts as a default.
        const bool equity_gone = firm.equity - dp.dp[i] <= 0.0;
        const bool liquidity_gone = firm.liquidity() - dp.dp[i] <= 0.0;
        flags.chi[i] = (equity_gone || liquidity_gone) ? 1 : 0;
    }
    return flags;
}

std::vector<double> loan_losses(const EconomyGraph& g, const DefaultFlags& chi) {
    if (chi.chi.size() != g.firm_count()) throw std::invalid_argument("default flags do not match firm count");
    std::vector<double> written_off(g.bank_count(), 0.0);
    for (std::size_t i = 0; i < g.firm_count(); ++i) {
        if (!chi.chi[i]) continue;
        for (const auto& loan : g.loans.loans_of(i)) written_off[loan.bank] += loan.principal;
    }
    std::vector<double> losses(g.bank_count());
    for (std::size_t k = 0; k < g.bank_count(); ++k) {
        losses[k] = g.loans.lgd() * (written_off[k] / g.banks[k].tier1_equity);
    }
    return losses;
}

BankLossLedger bank_losses(const EconomyGraph& g, const DefaultFlags& chi_w, const DefaultFlags& chi_wo) {
    if (chi_w.chi.size() != g.firm_count() || chi_wo.chi.size() != g.firm_count()) {
        throw std::invalid_argument("default flags do not match firm count");
    }
    DefaultFlags added;
    added.chi.assign(g.firm_count(), 0);
    for (std::size_t i = 0; i < g.firm_count(); ++i) {
        if (chi_wo.chi[i] && !chi_w.chi[i]) {
            throw ContractError("firm '" + g.firms[i].id +
                                "' defaults without supply-chain contagion but not with it");
        }
        added.chi[i] = chi_w.chi[i] && !chi_wo.chi[i];
    }
    BankLossLedger ledger;
    ledger.di = loan_losses(g, chi_wo);
    ledger.sc = loan_losses(g, added);
    ledger.ib_wo.assign(g.bank_count(), 0.0);
    ledger.ib_w.assign(g.bank_count(), 0.0);
    return ledger;
}

void write_defaults_header(std::ostream& out) { out << "scenario_id,firm_id,chi_wo,chi_w,dp\n"; }

void write_defaults_rows(std::ostream& out, std::size_t scenario, const EconomyGraph& g, const DefaultFlags& chi_wo,
                         const DefaultFlags& chi_w, const ProfitShock& dp_w) {
    for (std::size_t i = 0; i < g.firm_count(); ++i) {
        out << scenario << ',' << g.firms[i].id << ',' << int(chi_wo.chi[i]) << ',' << int(chi_w.chi[i]) << ',';
        if (dp_w.has_financials[i]) out << format_double(dp_w.dp[i]);
        out << '\n';
    }
}

}  // namespace fincascade
