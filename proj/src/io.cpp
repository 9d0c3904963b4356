#include "fincascade/io.h"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fincascade/errors.h"

namespace fincascade {

namespace fs = std::filesystem;

std::string format_double(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) throw std::runtime_error("format_double failed");
    return std::string(buf.data(), ptr);
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

void split(std::string_view line, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            return;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
}

bool blank(std::string_view s) { return trim(s).empty(); }

}  // namespace

CsvReader::CsvReader(const fs::path& path, const std::vector<std::string>& required_columns)
    : path_(path.string()), in_(std::make_unique<std::ifstream>(path)) {
    if (!*in_) throw IoError("cannot open " + path_);
    // An entirely empty file is a valid file without rows.
    while (std::getline(*in_, line_)) {
        ++line_no_;
        if (line_no_ == 1 && line_.starts_with("\xEF\xBB\xBF")) line_.erase(0, 3);
        if (blank(line_)) continue;
        split(line_, fields_);
        for (std::size_t c = 0; c < fields_.size(); ++c) columns_.emplace(std::string(fields_[c]), c);
        for (const auto& name : required_columns) {
            if (!columns_.contains(name)) fail("missing column '" + name + "'");
        }
        return;
    }
    columns_.clear();
}

bool CsvReader::next() {
    if (columns_.empty()) return false;
    while (std::getline(*in_, line_)) {
        ++line_no_;
        if (blank(line_)) continue;
        split(line_, fields_);
        if (fields_.size() != columns_.size()) {
            fail("expected " + std::to_string(columns_.size()) + " fields, found " + std::to_string(fields_.size()));
        }
        return true;
    }
    return false;
}

bool CsvReader::has_column(const std::string& column) const { return columns_.contains(column); }

std::string_view CsvReader::field(const std::string& column) const {
    auto it = columns_.find(column);
    if (it == columns_.end()) fail("missing column '" + column + "'");
    return fields_[it->second];
}

double CsvReader::number(const std::string& column) const {
    auto value = optional_number(column);
    if (!value) fail("empty value in column '" + column + "'");
    return *value;
}

std::optional<double> CsvReader::optional_number(const std::string& column) const {
    auto text = field(column);
    if (text.empty()) return std::nullopt;
    double value = 0.0;
    const char* first = text.data();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
        fail("invalid number '" + std::string(text) + "' in column '" + column + "'");
    }
    return value;
}

void CsvReader::fail(const std::string& message) const { throw ParseError(path_, line_no_, message); }

EconomyFiles EconomyFiles::in_directory(const fs::path& dir) {
    EconomyFiles files;
    files.firms = dir / "firms.csv";
    files.supply = dir / "supply.csv";
    files.interbank = dir / "interbank.csv";
    files.loans = dir / "loans.csv";
    files.banks = dir / "banks.csv";
    if (fs::exists(dir / "essentiality.csv")) files.essentiality = dir / "essentiality.csv";
    if (fs::exists(dir / "final_demand.csv")) files.final_demand = dir / "final_demand.csv";
    return files;
}

EssentialityTable load_essentiality(const fs::path& path) {
    CsvReader csv(path, {"supplier_sector", "buyer_sector", "essential"});
    EssentialityTable table;
    std::vector<std::tuple<std::string, std::string, bool>> rows;
    bool default_essential = true;
    while (csv.next()) {
        const auto flag = csv.field("essential");
        if (flag != "0" && flag != "1") csv.fail("essential must be 0 or 1");
        std::string supplier(csv.field("supplier_sector"));
        std::string buyer(csv.field("buyer_sector"));
        if (supplier.empty() || buyer.empty()) csv.fail("empty sector code");
        if (supplier == "*" && buyer == "*") {
            default_essential = flag == "1";
        } else {
            rows.emplace_back(std::move(supplier), std::move(buyer), flag == "1");
        }
    }
    table = EssentialityTable(default_essential);
    for (auto& [s, b, e] : rows) table.set(s, b, e);
    return table;
}

EconomyGraph load_economy(const EconomyFiles& files) {
    std::vector<BankSheet> banks;
    std::unordered_map<std::string, std::size_t> bank_ids;
    {
        CsvReader csv(files.banks, {"id", "tier1_equity"});
        while (csv.next()) {
            std::string id(csv.field("id"));
            if (id.empty()) csv.fail("empty bank id");
            if (!bank_ids.emplace(id, banks.size()).second) csv.fail("duplicate bank id '" + id + "'");
            banks.push_back({id, csv.number("tier1_equity")});
        }
    }

    std::vector<FirmNode> firms;
    std::unordered_map<std::string, std::size_t> firm_ids;
    {
        CsvReader csv(files.firms, {"id", "sector", "revenue", "op_cost", "equity", "short_assets", "short_liabs"});
        static const std::array<std::string, 5> numeric = {"revenue", "op_cost", "equity", "short_assets",
                                                           "short_liabs"};
        while (csv.next()) {
            FirmNode firm;
            firm.id = std::string(csv.field("id"));
            if (firm.id.empty()) csv.fail("empty firm id");
            firm.sector = std::string(csv.field("sector"));
            std::array<std::optional<double>, 5> values;
            std::size_t present = 0;
            for (std::size_t c = 0; c < numeric.size(); ++c) {
                values[c] = csv.optional_number(numeric[c]);
                present += values[c].has_value();
            }
            if (present != 0 && present != numeric.size()) {
                csv.fail("financial columns must be either all present or all empty");
            }
            if (present) {
                firm.revenue = *values[0];
                firm.op_cost = *values[1];
                firm.equity = *values[2];
                firm.short_assets = *values[3];
                firm.short_liabs = *values[4];
                firm.financials_present = true;
                firm.eligible_for_default = has_positive_buffers(firm);
            }
            if (!firm_ids.emplace(firm.id, firms.size()).second) csv.fail("duplicate firm id '" + firm.id + "'");
            firms.push_back(std::move(firm));
        }
    }

    std::vector<Edge> supply_edges;
    {
        CsvReader csv(files.supply, {"supplier_id", "buyer_id", "weight"});
        auto resolve = [&](std::string_view id) {
            std::string key(id);
            if (key.empty()) csv.fail("empty firm id");
            auto [it, inserted] = firm_ids.emplace(key, firms.size());
            if (inserted) {
                FirmNode firm;
                firm.id = key;
                firm.sector = kUnclassifiedSector;
                firms.push_back(std::move(firm));
            }
            return it->second;
        };
        while (csv.next()) {
            const auto from = resolve(csv.field("supplier_id"));
            const auto to = resolve(csv.field("buyer_id"));
            supply_edges.push_back({from, to, csv.number("weight")});
        }
    }

    auto lookup_bank = [&](const fs::path& file, const CsvReader& csv, std::string_view id) {
        auto it = bank_ids.find(std::string(id));
        if (it == bank_ids.end()) {
            throw ReferentialError(file.string() + ":" + std::to_string(csv.line()) + ": unknown bank id '" +
                                       std::string(id) + "'",
                                   std::string(id));
        }
        return it->second;
    };

    std::vector<Edge> interbank_edges;
    {
        CsvReader csv(files.interbank, {"borrower_id", "lender_id", "amount"});
        while (csv.next()) {
            const auto borrower = lookup_bank(files.interbank, csv, csv.field("borrower_id"));
            const auto lender = lookup_bank(files.interbank, csv, csv.field("lender_id"));
            interbank_edges.push_back({borrower, lender, csv.number("amount")});
        }
    }

    std::vector<LoanEntry> loans;
    {
        CsvReader csv(files.loans, {"firm_id", "bank_id", "principal"});
        while (csv.next()) {
            const std::string firm_id(csv.field("firm_id"));
            auto it = firm_ids.find(firm_id);
            if (it == firm_ids.end()) {
                throw ReferentialError(files.loans.string() + ":" + std::to_string(csv.line()) +
                                           ": unknown firm id '" + firm_id + "'",
                                       firm_id);
            }
            const auto bank = lookup_bank(files.loans, csv, csv.field("bank_id"));
            loans.push_back({it->second, bank, csv.number("principal")});
        }
    }

    SupplyNetwork supply{CsrGraph(firms.size(), std::move(supply_edges)), {}};
    if (files.essentiality) supply.essentiality = load_essentiality(*files.essentiality);
    InterbankNetwork interbank{CsrGraph(banks.size(), std::move(interbank_edges))};
    LoanBook book(firms.size(), banks.size(), std::move(loans), files.lgd);
    EconomyGraph g(std::move(firms), std::move(supply), std::move(banks), std::move(interbank), std::move(book));

    if (files.final_demand) {
        CsvReader csv(*files.final_demand, {"firm_id", "final_demand"});
        g.final_demand.assign(g.firm_count(), 0.0);
        while (csv.next()) {
            const std::string id(csv.field("firm_id"));
            auto idx = g.find_firm(id);
            if (!idx) throw ReferentialError(files.final_demand->string() + ": unknown firm id '" + id + "'", id);
            g.final_demand[*idx] = csv.number("final_demand");
        }
        // Firms missing from the file fall back to zero final demand.
    }

    const auto report = validate_economy(g);
    if (!report.ok()) {
        const auto& first = report.violations.front();
        throw InvariantError("economy violates " + std::to_string(report.violations.size()) +
                                 " invariant(s):\n" + report.to_string(),
                             first.entity);
    }
    return g;
}

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

}  // namespace

void write_economy(const EconomyGraph& g, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    {
        auto out = open_out(dir / "banks.csv");
        out << "id,tier1_equity\n";
        for (const auto& b : g.banks) out << b.id << ',' << format_double(b.tier1_equity) << '\n';
    }
    {
        auto out = open_out(dir / "firms.csv");
        out << "id,sector,revenue,op_cost,equity,short_assets,short_liabs\n";
        for (const auto& f : g.firms) {
            out << f.id << ',' << f.sector;
            if (f.financials_present) {
                out << ',' << format_double(f.revenue) << ',' << format_double(f.op_cost) << ','
                    << format_double(f.equity) << ',' << format_double(f.short_assets) << ','
                    << format_double(f.short_liabs) << '\n';
            } else {
                out << ",,,,,\n";
            }
        }
    }
    {
        auto out = open_out(dir / "supply.csv");
        out << "supplier_id,buyer_id,weight\n";
        for (const auto& e : g.supply.graph.edges()) {
            out << g.firms[e.from].id << ',' << g.firms[e.to].id << ',' << format_double(e.weight) << '\n';
        }
    }
    {
        auto out = open_out(dir / "interbank.csv");
        out << "borrower_id,lender_id,amount\n";
        for (const auto& e : g.interbank.graph.edges()) {
            out << g.banks[e.from].id << ',' << g.banks[e.to].id << ',' << format_double(e.weight) << '\n';
        }
    }
    {
        auto out = open_out(dir / "loans.csv");
        out << "firm_id,bank_id,principal\n";
        for (const auto& e : g.loans.entries()) {
            out << g.firms[e.firm].id << ',' << g.banks[e.bank].id << ',' << format_double(e.principal) << '\n';
        }
    }
    {
        auto out = open_out(dir / "essentiality.csv");
        out << "supplier_sector,buyer_sector,essential\n";
        out << "*,*," << (g.supply.essentiality.default_essential() ? 1 : 0) << '\n';
        for (const auto& [pair, essential] : g.supply.essentiality.entries()) {
            out << pair.first << ',' << pair.second << ',' << (essential ? 1 : 0) << '\n';
        }
    }
    if (!g.final_demand.empty()) {
        auto out = open_out(dir / "final_demand.csv");
        out << "firm_id,final_demand\n";
        for (std::size_t i = 0; i < g.firm_count(); ++i) {
            out << g.firms[i].id << ',' << format_double(g.final_demand[i]) << '\n';
        }
    }
}

}  // namespace fincascade
