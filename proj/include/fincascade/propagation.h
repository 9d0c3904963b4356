#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "fincascade/economy.h"

namespace fincascade {

/// Remaining production capacity per firm at the moment of the shock: 1 = unshocked, 0 = full stop.
class ShockVector {
public:
    ShockVector() = default;
    /// Throws std::invalid_argument if any entry is outside [0, 1].
    explicit ShockVector(std::vector<double> psi);

    static ShockVector unshocked(std::size_t n) { return ShockVector(std::vector<double>(n, 1.0)); }

    std::size_t size() const { return psi_.size(); }
    double operator[](std::size_t i) const { return psi_[i]; }
    std::span<const double> values() const { return psi_; }

    friend bool operator==(const ShockVector&, const ShockVector&) = default;

private:
    std::vector<double> psi_;
};

struct PropagationConfig {
    double epsilon = 0.01;
    int max_iter = 1000;
    /// false gives the regime without supply-chain contagion: h = psi.
    bool enabled = true;
    /// Weight of the non-essential input mean in downstream capacity, in [0, 1].
    double sigma = 0.0;
    bool record_trajectory = false;
};

struct ProductionProfile {
    std::vector<double> h;
    /// Number of update sweeps performed (0 when contagion is disabled).
    int iterations = 0;
    bool converged = true;
    /// h(t) after every sweep, starting with psi. Filled only when requested.
    std::vector<std::vector<double>> trajectory;
};

/// Precomputed sector-pooled input structure of a supply network. Build once per economy,
/// then run any number of shocks against it (concurrently, the object is read-only).
///
/// Update rule per sweep, for every firm j:
///   alpha_sj = sum_{i in s} W_ij h_i / sum_{i in s} W_ij        (pooled supply from sector s)
///   d_j      = min_{s essential} alpha_sj * ((1 - sigma) + sigma * mean_{s non-essential} alpha_sj)
///   u_j      = sum_k W_jk h_k / sum_k W_jk                      (1 for firms without customers)
///   h_j     <- min(psi_j, d_j, u_j, h_j)
/// Iteration stops once max_j (h_j(t-1) - h_j(t)) <= epsilon.
class SupplyChainPropagator {
public:
    explicit SupplyChainPropagator(const EconomyGraph& g);

    ProductionProfile run(const ShockVector& psi, const PropagationConfig& cfg) const;

    std::size_t firm_count() const { return n_; }

private:
    struct InputGroup {
        std::size_t begin = 0;
        std::size_t end = 0;
        double total = 0.0;
        bool essential = true;
    };

    std::size_t n_ = 0;
    // Input groups of buyer j are groups_[group_offsets_[j] .. group_offsets_[j+1]).
    std::vector<std::size_t> group_offsets_;
    std::vector<InputGroup> groups_;
    std::vector<std::size_t> input_supplier_;
    std::vector<double> input_weight_;
    // Customers of supplier j are sales_*[sales_offsets_[j] .. sales_offsets_[j+1]).
    std::vector<std::size_t> sales_offsets_;
    std::vector<std::size_t> sales_buyer_;
    std::vector<double> sales_weight_;
    std::vector<double> sales_total_;
};

ProductionProfile propagate(const EconomyGraph& g, const ShockVector& psi, const PropagationConfig& cfg);

/// Firm output used for economic impact: intermediate sales plus final demand.
/// Final demand defaults to max(0, revenue - intermediate sales) for firms with financials.
std::vector<double> firm_output(const EconomyGraph& g);

/// Output-weighted share of total production lost under profile h.
double output_loss(std::span<const double> output, std::span<const double> h);

/// Economic systemic risk index of firm i: share of total output lost if i stops producing.
double compute_esri(const EconomyGraph& g, std::size_t firm, const PropagationConfig& cfg);

/// Long-format dump: iteration,firm_id,h.
void write_trajectory_csv(std::ostream& out, const EconomyGraph& g, const ProductionProfile& profile);

}  // namespace fincascade
