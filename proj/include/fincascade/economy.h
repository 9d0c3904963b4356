#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fincascade {

/// Sector code assigned to firms that only appear in supply edges.
inline constexpr const char* kUnclassifiedSector = "0000";

struct FirmNode {
    std::string id;
    /// NACE code, 4 digits. The first two characters give the NACE-2 division.
    std::string sector;
    double revenue = 0.0;
    double op_cost = 0.0;
    double equity = 0.0;
    double short_assets = 0.0;
    double short_liabs = 0.0;
    bool financials_present = false;
    bool eligible_for_default = false;

    std::string nace2() const { return sector.substr(0, 2); }
    double profit() const { return revenue - op_cost; }
    double liquidity() const { return short_assets - short_liabs; }
};

/// True when the balance sheet allows the firm to be counted as a loan defaulter:
/// positive equity, positive short-term liquidity and positive net income.
bool has_positive_buffers(const FirmNode& firm);

struct BankSheet {
    std::string id;
    double tier1_equity = 0.0;
};

/// Directed weighted edge between two 0-based node indices.
struct Edge {
    std::size_t from = 0;
    std::size_t to = 0;
    double weight = 0.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Sector-pair table marking which inputs are essential for production.
class EssentialityTable {
public:
    EssentialityTable() = default;
    explicit EssentialityTable(bool default_essential) : default_essential_(default_essential) {}

    void set(const std::string& supplier_sector, const std::string& buyer_sector, bool essential);

    /// Exact pair first, then the NACE-2 prefix pair, then the default.
    bool is_essential(const std::string& supplier_sector, const std::string& buyer_sector) const;

    bool default_essential() const { return default_essential_; }
    const std::map<std::pair<std::string, std::string>, bool>& entries() const { return entries_; }

private:
    bool default_essential_ = true;
    std::map<std::pair<std::string, std::string>, bool> entries_;
};

/// Compressed adjacency for a directed weighted graph, indexed both by source and by target.
class CsrGraph {
public:
    CsrGraph() = default;
    /// Edges are sorted by (from, to). Throws std::out_of_range on indices >= nodes.
    CsrGraph(std::size_t nodes, std::vector<Edge> edges);

    std::size_t nodes() const { return nodes_; }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }

    /// Indices into edges() of edges leaving `node`.
    std::span<const std::size_t> out_edges(std::size_t node) const;
    /// Indices into edges() of edges entering `node`.
    std::span<const std::size_t> in_edges(std::size_t node) const;

    double out_weight(std::size_t node) const;
    double in_weight(std::size_t node) const;

private:
    std::size_t nodes_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::size_t> out_offsets_;
    std::vector<std::size_t> out_index_;
    std::vector<std::size_t> in_offsets_;
    std::vector<std::size_t> in_index_;
};

/// W: edge (i -> j) carries the yearly value of goods sold by supplier i to buyer j.
struct SupplyNetwork {
    CsrGraph graph;
    EssentialityTable essentiality;
};

/// L: edge (k -> l) carries the amount bank k borrowed from bank l.
struct InterbankNetwork {
    CsrGraph graph;

    double total() const;
};

struct LoanEntry {
    std::size_t firm = 0;
    std::size_t bank = 0;
    double principal = 0.0;

    friend bool operator==(const LoanEntry&, const LoanEntry&) = default;
};

/// B: outstanding principal per (firm, bank), grouped by firm.
class LoanBook {
public:
    LoanBook() = default;
    LoanBook(std::size_t firms, std::size_t banks, std::vector<LoanEntry> entries, double lgd = 1.0);

    const std::vector<LoanEntry>& entries() const { return entries_; }
    std::span<const LoanEntry> loans_of(std::size_t firm) const;
    double lgd() const { return lgd_; }
    void set_lgd(double lgd) { lgd_ = lgd; }
    double total() const;
    /// Sum of principals lent by each bank.
    std::vector<double> bank_totals() const;

private:
    std::size_t banks_ = 0;
    std::vector<LoanEntry> entries_;
    std::vector<std::size_t> offsets_;
    double lgd_ = 1.0;
};

/// Complete simulation input: firms with W, banks with L, and the loan book B linking them.
/// Treated as immutable once validated; shared read-only across scenario workers.
class EconomyGraph {
public:
    EconomyGraph() = default;
    EconomyGraph(std::vector<FirmNode> firms, SupplyNetwork supply, std::vector<BankSheet> banks,
                 InterbankNetwork interbank, LoanBook loans);

    std::vector<FirmNode> firms;
    SupplyNetwork supply;
    std::vector<BankSheet> banks;
    InterbankNetwork interbank;
    LoanBook loans;
    /// Optional per-firm final demand; empty means the revenue-based proxy is used.
    std::vector<double> final_demand;

    std::size_t firm_count() const { return firms.size(); }
    std::size_t bank_count() const { return banks.size(); }

    std::optional<std::size_t> find_firm(const std::string& id) const;
    std::optional<std::size_t> find_bank(const std::string& id) const;
    /// Throws std::out_of_range naming the id.
    std::size_t firm_index(const std::string& id) const;
    std::size_t bank_index(const std::string& id) const;

    std::vector<double> equities() const;
    double total_equity() const;

    /// Rebuild id lookups after editing firms/banks in place.
    void reindex();

private:
    std::unordered_map<std::string, std::size_t> firm_lookup_;
    std::unordered_map<std::string, std::size_t> bank_lookup_;
};

struct Violation {
    std::string entity;
    std::string rule;
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    std::size_t count(const std::string& rule) const;
    std::string to_string() const;
};

ValidationReport validate_economy(const EconomyGraph& g);

struct ExposureRatio {
    double system_ratio = 0.0;
    /// Firm-loan assets over interbank assets per bank; nullopt when the bank holds no interbank assets.
    std::vector<std::optional<double>> per_bank;
};

/// Throws DegenerateDenominator when the interbank network is empty.
ExposureRatio exposure_ratio(const EconomyGraph& g);

}  // namespace fincascade
