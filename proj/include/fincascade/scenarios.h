#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fincascade/economy.h"
#include "fincascade/propagation.h"

namespace fincascade {

enum class BatchKind { SingleFirm, CovidStyle, Custom };

const char* to_string(BatchKind kind);

/// A sector whose drawn shocks could not be rescaled to the empirical aggregate within
/// the clipping budget.
struct AggregateResidual {
    std::size_t scenario = 0;
    std::string sector;
    double target = 0.0;
    double realized = 0.0;
};

struct ShockBatch {
    std::vector<ShockVector> scenarios;
    std::uint64_t seed = 0;
    BatchKind provenance = BatchKind::Custom;
    std::vector<AggregateResidual> residuals;

    std::size_t size() const { return scenarios.size(); }
};

/// psi_j = 0, psi_i = 1 otherwise. Throws std::out_of_range for an unknown firm.
ShockVector single_firm_shock(const EconomyGraph& g, std::size_t firm);
ShockVector single_firm_shock(const EconomyGraph& g, const std::string& firm_id);

/// Observed production reduction (1 - remaining level) per firm, where data exists.
class EmpiricalShockTable {
public:
    EmpiricalShockTable() = default;
    /// One entry per firm of the economy; nullopt for firms without data.
    /// Throws std::invalid_argument for values outside [0, 1].
    explicit EmpiricalShockTable(std::vector<std::optional<double>> reductions);

    /// empirical_shocks.csv with columns firm_id,reduction. Unlisted firms have no data.
    static EmpiricalShockTable load(const std::filesystem::path& path, const EconomyGraph& g);
    void write(const std::filesystem::path& path, const EconomyGraph& g) const;

    std::size_t size() const { return reductions_.size(); }
    const std::optional<double>& operator[](std::size_t i) const { return reductions_[i]; }

private:
    std::vector<std::optional<double>> reductions_;
};

struct SectorTarget {
    std::string sector;
    std::vector<std::size_t> firms;
    /// Output-weighted mean reduction over the sector's firms with data.
    double target = 0.0;
};

/// Aggregation weights for sector rescaling: firm output (intermediate sales + final demand).
std::vector<double> aggregation_weights(const EconomyGraph& g);

/// Empirical NACE-2 aggregates, sorted by sector code. Throws std::invalid_argument naming the
/// first sector that has firms but no empirical observation.
std::vector<SectorTarget> empirical_sector_targets(const EconomyGraph& g, const EmpiricalShockTable& table);

/// Weighted NACE-2 aggregate reduction realized by one shock vector, in the order of `targets`.
std::vector<double> realized_sector_reductions(const EconomyGraph& g, const std::vector<SectorTarget>& targets,
                                               const ShockVector& psi);

/// Synthetic firm-level shocks whose NACE-2 output-weighted reduction matches the empirical one.
///
/// Per scenario and sector: firms with data resample the sector's observed reductions with
/// replacement, firms without data draw from their NACE-4 peers (falling back to NACE-2). The
/// draws are rescaled to the sector target; reductions above 1 are clipped and the excess is
/// spread proportionally over the unclipped firms, at most 10 rounds.
ShockBatch covid_style_batch(const EconomyGraph& g, const EmpiricalShockTable& table, std::size_t count,
                             std::uint64_t seed);

/// Stand-in for confidential employment data: per-sector mean reduction drawn from a Beta law,
/// firm values scattered around it, `coverage` share of firms observed (at least one per NACE-2).
EmpiricalShockTable synthetic_empirical_table(const EconomyGraph& g, double coverage, std::uint64_t seed);

/// Per-bank seeds drawn from N(mu_k, sigma_k) truncated below at 0, moments matched to
/// `reference[k]` (the loss samples of bank k). Result is indexed [draw][bank].
std::vector<std::vector<double>> gaussian_bank_seed_batch(const std::vector<std::vector<double>>& reference,
                                                          std::size_t count, std::uint64_t seed);

/// Complete interbank network with Lambda_ij ~ U(0, 0.05) off the diagonal; L_ij = Lambda_ij e_j.
InterbankNetwork random_interbank_network(std::span<const double> equities, std::uint64_t seed);

/// Long-format batch file: scenario_id,firm_id,psi.
void write_batch_csv(std::ostream& out, const EconomyGraph& g, const ShockBatch& batch);
/// Reads a long-format batch. Firms missing from a scenario keep psi = 1.
ShockBatch read_batch_csv(const std::filesystem::path& path, const EconomyGraph& g);

}  // namespace fincascade
