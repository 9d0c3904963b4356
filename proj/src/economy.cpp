#include "fincascade/economy.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "fincascade/errors.h"

namespace fincascade {

bool has_positive_buffers(const FirmNode& firm) {
    return firm.equity > 0.0 && firm.liquidity() > 0.0 && firm.profit() > 0.0;
}

void EssentialityTable::set(const std::string& supplier_sector, const std::string& buyer_sector, bool essential) {
    entries_[{supplier_sector, buyer_sector}] = essential;
}

bool EssentialityTable::is_essential(const std::string& supplier_sector, const std::string& buyer_sector) const {
    if (entries_.empty()) {
        return default_essential_;
    }
    if (auto it = entries_.find({supplier_sector, buyer_sector}); it != entries_.end()) {
        return it->second;
    }
    if (auto it = entries_.find({supplier_sector.substr(0, 2), buyer_sector.substr(0, 2)}); it != entries_.end()) {
        return it->second;
    }
    return default_essential_;
}

CsrGraph::CsrGraph(std::size_t nodes, std::vector<Edge> edges) : nodes_(nodes), edges_(std::move(edges)) {
    for (const auto& e : edges_) {
        if (e.from >= nodes_ || e.to >= nodes_) {
            throw std::out_of_range("edge endpoint outside node range");
        }
    }
    std::stable_sort(edges_.begin(), edges_.end(),
                     [](const Edge& a, const Edge& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });

    out_offsets_.assign(nodes_ + 1, 0);
    in_offsets_.assign(nodes_ + 1, 0);
    for (const auto& e : edges_) {
        ++out_offsets_[e.from + 1];
        ++in_offsets_[e.to + 1];
    }
    std::partial_sum(out_offsets_.begin(), out_offsets_.end(), out_offsets_.begin());
    std::partial_sum(in_offsets_.begin(), in_offsets_.end(), in_offsets_.begin());

    out_index_.resize(edges_.size());
    in_index_.resize(edges_.size());
    auto out_fill = out_offsets_;
    auto in_fill = in_offsets_;
    for (std::size_t idx = 0; idx < edges_.size(); ++idx) {
        out_index_[out_fill[edges_[idx].from]++] = idx;
        in_index_[in_fill[edges_[idx].to]++] = idx;
    }
}

std::span<const std::size_t> CsrGraph::out_edges(std::size_t node) const {
    return {out_index_.data() + out_offsets_[node], out_offsets_[node + 1] - out_offsets_[node]};
}

std::span<const std::size_t> CsrGraph::in_edges(std::size_t node) const {
    return {in_index_.data() + in_offsets_[node], in_offsets_[node + 1] - in_offsets_[node]};
}

double CsrGraph::out_weight(std::size_t node) const {
    double sum = 0.0;
    for (auto idx : out_edges(node)) sum += edges_[idx].weight;
    return sum;
}

double CsrGraph::in_weight(std::size_t node) const {
    double sum = 0.0;
    for (auto idx : in_edges(node)) sum += edges_[idx].weight;
    return sum;
}

double InterbankNetwork::total() const {
    double sum = 0.0;
    for (const auto& e : graph.edges()) sum += e.weight;
    return sum;
}

LoanBook::LoanBook(std::size_t firms, std::size_t banks, std::vector<LoanEntry> entries, double lgd)
    : banks_(banks), entries_(std::move(entries)), lgd_(lgd) {
    for (const auto& e : entries_) {
        if (e.firm >= firms || e.bank >= banks) {
            throw std::out_of_range("loan entry outside firm/bank range");
        }
    }
    std::stable_sort(entries_.begin(), entries_.end(), [](const LoanEntry& a, const LoanEntry& b) {
        return std::tie(a.firm, a.bank) < std::tie(b.firm, b.bank);
    });
    offsets_.assign(firms + 1, 0);
    for (const auto& e : entries_) ++offsets_[e.firm + 1];
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
}

std::span<const LoanEntry> LoanBook::loans_of(std::size_t firm) const {
    if (offsets_.empty()) return {};
    return {entries_.data() + offsets_[firm], offsets_[firm + 1] - offsets_[firm]};
}

double LoanBook::total() const {
    double sum = 0.0;
    for (const auto& e : entries_) sum += e.principal;
    return sum;
}

std::vector<double> LoanBook::bank_totals() const {
    std::vector<double> totals(banks_, 0.0);
    for (const auto& e : entries_) totals[e.bank] += e.principal;
    return totals;
}

EconomyGraph::EconomyGraph(std::vector<FirmNode> firms_in, SupplyNetwork supply_in, std::vector<BankSheet> banks_in,
                           InterbankNetwork interbank_in, LoanBook loans_in)
    : firms(std::move(firms_in)),
      supply(std::move(supply_in)),
      banks(std::move(banks_in)),
      interbank(std::move(interbank_in)),
      loans(std::move(loans_in)) {
    reindex();
}

void EconomyGraph::reindex() {
    firm_lookup_.clear();
    bank_lookup_.clear();
    for (std::size_t i = 0; i < firms.size(); ++i) firm_lookup_.emplace(firms[i].id, i);
    for (std::size_t k = 0; k < banks.size(); ++k) bank_lookup_.emplace(banks[k].id, k);
}

std::optional<std::size_t> EconomyGraph::find_firm(const std::string& id) const {
    if (auto it = firm_lookup_.find(id); it != firm_lookup_.end()) return it->second;
    return std::nullopt;
}

std::optional<std::size_t> EconomyGraph::find_bank(const std::string& id) const {
    if (auto it = bank_lookup_.find(id); it != bank_lookup_.end()) return it->second;
    return std::nullopt;
}

std::size_t EconomyGraph::firm_index(const std::string& id) const {
    if (auto idx = find_firm(id)) return *idx;
    throw std::out_of_range("unknown firm id '" + id + "'");
}

std::size_t EconomyGraph::bank_index(const std::string& id) const {
    if (auto idx = find_bank(id)) return *idx;
    throw std::out_of_range("unknown bank id '" + id + "'");
}

std::vector<double> EconomyGraph::equities() const {
    std::vector<double> e(banks.size());
    std::transform(banks.begin(), banks.end(), e.begin(), [](const BankSheet& b) { return b.tier1_equity; });
    return e;
}

double EconomyGraph::total_equity() const {
    double sum = 0.0;
    for (const auto& b : banks) sum += b.tier1_equity;
    return sum;
}

std::size_t ValidationReport::count(const std::string& rule) const {
    return static_cast<std::size_t>(
        std::count_if(violations.begin(), violations.end(), [&](const Violation& v) { return v.rule == rule; }));
}

std::string ValidationReport::to_string() const {
    std::ostringstream out;
    for (const auto& v : violations) {
        out << v.entity << ": " << v.rule;
        if (!v.detail.empty()) out << " (" << v.detail << ")";
        out << '\n';
    }
    return out.str();
}

namespace {

bool finite(double x) { return std::isfinite(x); }

void check_edges(const CsrGraph& graph, const std::string& kind, auto&& name_of, bool strictly_positive,
                 std::vector<Violation>& out) {
    const Edge* previous = nullptr;
    for (const auto& e : graph.edges()) {
        const std::string entity = kind + ":" + name_of(e.from) + "->" + name_of(e.to);
        if (e.from == e.to) {
            out.push_back({entity, "self-loop", ""});
        }
        if (!finite(e.weight) || (strictly_positive ? e.weight <= 0.0 : e.weight < 0.0)) {
            out.push_back({entity, strictly_positive ? "nonpositive-weight" : "negative-weight",
                           "weight " + std::to_string(e.weight)});
        }
        if (previous && previous->from == e.from && previous->to == e.to) {
            out.push_back({entity, "duplicate-edge", ""});
        }
        previous = &e;
    }
}

}  // namespace

ValidationReport validate_economy(const EconomyGraph& g) {
    ValidationReport report;
    auto& out = report.violations;

    std::set<std::string> seen;
    for (const auto& f : g.firms) {
        const std::string entity = "firm:" + f.id;
        if (!seen.insert(f.id).second) out.push_back({entity, "duplicate-id", ""});
        if (f.sector.empty()) out.push_back({entity, "empty-sector", ""});
        if (!f.financials_present) {
            if (f.eligible_for_default) out.push_back({entity, "eligible-without-financials", ""});
            continue;
        }
        if (!finite(f.revenue) || !finite(f.op_cost) || !finite(f.equity) || !finite(f.short_assets) ||
            !finite(f.short_liabs)) {
            out.push_back({entity, "non-finite", ""});
            continue;
        }
        if (f.revenue < 0.0 || f.op_cost < 0.0) {
            out.push_back({entity, "negative-flow", "revenue and op_cost must be >= 0"});
        }
        if (f.eligible_for_default && !has_positive_buffers(f)) {
            out.push_back({entity, "eligible-with-nonpositive-buffer", "equity, liquidity and profit must be > 0"});
        }
    }

    seen.clear();
    for (const auto& b : g.banks) {
        const std::string entity = "bank:" + b.id;
        if (!seen.insert(b.id).second) out.push_back({entity, "duplicate-id", ""});
        if (!finite(b.tier1_equity) || b.tier1_equity <= 0.0) {
            out.push_back({entity, "nonpositive-equity", "tier1_equity " + std::to_string(b.tier1_equity)});
        }
    }

    if (g.supply.graph.nodes() != g.firms.size()) {
        out.push_back({"supply", "index-mismatch", "supply network size differs from firm count"});
    } else {
        check_edges(g.supply.graph, "supply", [&](std::size_t i) { return g.firms[i].id; }, true, out);
    }
    if (g.interbank.graph.nodes() != g.banks.size()) {
        out.push_back({"interbank", "index-mismatch", "interbank network size differs from bank count"});
    } else {
        check_edges(g.interbank.graph, "interbank", [&](std::size_t k) { return g.banks[k].id; }, false, out);
    }

    const LoanEntry* previous = nullptr;
    for (const auto& e : g.loans.entries()) {
        if (e.firm >= g.firms.size() || e.bank >= g.banks.size()) {
            out.push_back({"loan", "unknown-reference", ""});
            continue;
        }
        const std::string entity = "loan:" + g.firms[e.firm].id + "->" + g.banks[e.bank].id;
        if (!finite(e.principal) || e.principal < 0.0) {
            out.push_back({entity, "negative-principal", "principal " + std::to_string(e.principal)});
        }
        if (previous && previous->firm == e.firm && previous->bank == e.bank) {
            out.push_back({entity, "duplicate-loan", ""});
        }
        previous = &e;
    }
    if (!(g.loans.lgd() > 0.0 && g.loans.lgd() <= 1.0)) {
        out.push_back({"loans", "lgd-range", "lgd must lie in (0, 1]"});
    }

    if (!g.final_demand.empty()) {
        if (g.final_demand.size() != g.firms.size()) {
            out.push_back({"final_demand", "index-mismatch", ""});
        } else {
            for (std::size_t i = 0; i < g.final_demand.size(); ++i) {
                if (!finite(g.final_demand[i]) || g.final_demand[i] < 0.0) {
                    out.push_back({"firm:" + g.firms[i].id, "negative-final-demand", ""});
                }
            }
        }
    }
    return report;
}

ExposureRatio exposure_ratio(const EconomyGraph& g) {
    const double interbank_total = g.interbank.total();
    if (!(interbank_total > 0.0)) {
        throw DegenerateDenominator("exposure ratio undefined: interbank network carries no exposure");
    }
    ExposureRatio result;
    result.system_ratio = g.loans.total() / interbank_total;

    const auto firm_assets = g.loans.bank_totals();
    std::vector<double> interbank_assets(g.banks.size(), 0.0);
    for (const auto& e : g.interbank.graph.edges()) interbank_assets[e.to] += e.weight;

    result.per_bank.resize(g.banks.size());
    for (std::size_t k = 0; k < g.banks.size(); ++k) {
        if (interbank_assets[k] > 0.0) result.per_bank[k] = firm_assets[k] / interbank_assets[k];
    }
    return result;
}

}  // namespace fincascade
