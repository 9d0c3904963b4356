#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fincascade/economy.h"

namespace fincascade {

/// Paths of the per-component CSV files. Empty optional paths are skipped.
struct EconomyFiles {
    std::filesystem::path firms;
    std::filesystem::path supply;
    std::filesystem::path interbank;
    std::filesystem::path loans;
    std::filesystem::path banks;
    std::optional<std::filesystem::path> essentiality;
    std::optional<std::filesystem::path> final_demand;
    double lgd = 1.0;

    /// Standard file names inside `dir`; optional files are picked up when present.
    static EconomyFiles in_directory(const std::filesystem::path& dir);
};

/// Reads and validates an economy. Throws ParseError, ReferentialError, InvariantError or IoError.
EconomyGraph load_economy(const EconomyFiles& files);

/// Writes the standard file set into `dir` (created if missing).
void write_economy(const EconomyGraph& g, const std::filesystem::path& dir);

EssentialityTable load_essentiality(const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Headered CSV reader with name-based column access and line-numbered errors.
class CsvReader {
public:
    /// Throws IoError if the file cannot be opened, ParseError if a required column is missing.
    CsvReader(const std::filesystem::path& path, const std::vector<std::string>& required_columns);

    /// Advances to the next non-empty row. Returns false at end of file.
    bool next();

    std::string_view field(const std::string& column) const;
    bool has_column(const std::string& column) const;
    /// Parses a finite double; throws ParseError on failure.
    double number(const std::string& column) const;
    /// Like number() but empty fields yield nullopt.
    std::optional<double> optional_number(const std::string& column) const;

    std::size_t line() const { return line_no_; }
    [[noreturn]] void fail(const std::string& message) const;

private:
    std::string path_;
    std::unique_ptr<std::istream> in_;
    std::unordered_map<std::string, std::size_t> columns_;
    std::string line_;
    std::vector<std::string_view> fields_;
    std::size_t line_no_ = 0;
};

}  // namespace fincascade
