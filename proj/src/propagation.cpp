#include "fincascade/propagation.h"

#include <algorithm>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

#include "fincascade/io.h"
#include "fincascade/scenarios.h"

namespace fincascade {

ShockVector::ShockVector(std::vector<double> psi) : psi_(std::move(psi)) {
    for (std::size_t i = 0; i < psi_.size(); ++i) {
        if (!(psi_[i] >= 0.0 && psi_[i] <= 1.0)) {
            throw std::invalid_argument("shock entry " + std::to_string(i) + " outside [0, 1]");
        }
    }
}

SupplyChainPropagator::SupplyChainPropagator(const EconomyGraph& g) : n_(g.firm_count()) {
    const auto& graph = g.supply.graph;
    const auto& edges = graph.edges();
    if (graph.nodes() != n_) throw std::invalid_argument("supply network does not match firm count");

    std::map<std::string, std::size_t> sector_ids;
    std::vector<std::size_t> sector_of(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        sector_of[i] = sector_ids.emplace(g.firms[i].sector, sector_ids.size()).first->second;
    }

    group_offsets_.assign(n_ + 1, 0);
    input_supplier_.reserve(edges.size());
    input_weight_.reserve(edges.size());
    std::vector<std::size_t> inbound;
    for (std::size_t j = 0; j < n_; ++j) {
        auto in = graph.in_edges(j);
        inbound.assign(in.begin(), in.end());
        std::stable_sort(inbound.begin(), inbound.end(), [&](std::size_t a, std::size_t b) {
            return sector_of[edges[a].from] < sector_of[edges[b].from];
        });
        std::size_t pos = 0;
        while (pos < inbound.size()) {
            const auto sector = sector_of[edges[inbound[pos]].from];
            InputGroup group;
            group.begin = input_supplier_.size();
            group.essential =
                g.supply.essentiality.is_essential(g.firms[edges[inbound[pos]].from].sector, g.firms[j].sector);
            while (pos < inbound.size() && sector_of[edges[inbound[pos]].from] == sector) {
                input_supplier_.push_back(edges[inbound[pos]].from);
                input_weight_.push_back(edges[inbound[pos]].weight);
                group.total += edges[inbound[pos]].weight;
                ++pos;
            }
            group.end = input_supplier_.size();
            groups_.push_back(group);
        }
        group_offsets_[j + 1] = groups_.size();
    }

    sales_offsets_.assign(n_ + 1, 0);
    sales_total_.assign(n_, 0.0);
    sales_buyer_.reserve(edges.size());
    sales_weight_.reserve(edges.size());
    for (std::size_t j = 0; j < n_; ++j) {
        for (auto idx : graph.out_edges(j)) {
            sales_buyer_.push_back(edges[idx].to);
            sales_weight_.push_back(edges[idx].weight);
            sales_total_[j] += edges[idx].weight;
        }
        sales_offsets_[j + 1] = sales_buyer_.size();
    }
}

ProductionProfile SupplyChainPropagator::run(const ShockVector& psi, const PropagationConfig& cfg) const {
    if (psi.size() != n_) throw std::invalid_argument("shock vector length does not match firm count");
    if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    if (cfg.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    if (!(cfg.sigma >= 0.0 && cfg.sigma <= 1.0)) throw std::invalid_argument("sigma must lie in [0, 1]");

    ProductionProfile profile;
    profile.h.assign(psi.values().begin(), psi.values().end());
    if (cfg.record_trajectory) profile.trajectory.push_back(profile.h);
    if (!cfg.enabled) return profile;

    std::vector<double> next(n_);
    auto& h = profile.h;
    profile.converged = false;
    for (int sweep = 1; sweep <= cfg.max_iter; ++sweep) {
        double max_drop = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
            double essential_min = 1.0;
            double optional_sum = 0.0;
            std::size_t optional_count = 0;
            for (std::size_t gi = group_offsets_[j]; gi < group_offsets_[j + 1]; ++gi) {
                const auto& group = groups_[gi];
                double available = 0.0;
                for (std::size_t e = group.begin; e < group.end; ++e) {
                    available += input_weight_[e] * h[input_supplier_[e]];
                }
                const double alpha = group.total > 0.0 ? available / group.total : 1.0;
                if (group.essential) {
                    essential_min = std::min(essential_min, alpha);
                } else {
                    optional_sum += alpha;
                    ++optional_count;
                }
            }
            double downstream = essential_min;
            if (optional_count > 0 && cfg.sigma > 0.0) {
                downstream *= (1.0 - cfg.sigma) + cfg.sigma * (optional_sum / static_cast<double>(optional_count));
            }

            double upstream = 1.0;
            if (sales_offsets_[j + 1] > sales_offsets_[j] && sales_total_[j] > 0.0) {
                double demand = 0.0;
                for (std::size_t e = sales_offsets_[j]; e < sales_offsets_[j + 1]; ++e) {
                    demand += sales_weight_[e] * h[sales_buyer_[e]];
                }
                upstream = demand / sales_total_[j];
            }

            const double value = std::clamp(std::min({psi[j], downstream, upstream, h[j]}), 0.0, 1.0);
            next[j] = value;
            max_drop = std::max(max_drop, h[j] - value);
        }
        h.swap(next);
        profile.iterations = sweep;
        if (cfg.record_trajectory) profile.trajectory.push_back(h);
        if (max_drop <= cfg.epsilon) {
            profile.converged = true;
            break;
        }
    }
    return profile;
}

ProductionProfile propagate(const EconomyGraph& g, const ShockVector& psi, const PropagationConfig& cfg) {
    if (!cfg.enabled) {
        if (psi.size() != g.firm_count()) throw std::invalid_argument("shock vector length does not match firm count");
        ProductionProfile profile;
        profile.h.assign(psi.values().begin(), psi.values().end());
        if (cfg.record_trajectory) profile.trajectory.push_back(profile.h);
        return profile;
    }
    return SupplyChainPropagator(g).run(psi, cfg);
}

std::vector<double> firm_output(const EconomyGraph& g) {
    std::vector<double> out(g.firm_count(), 0.0);
    for (std::size_t j = 0; j < g.firm_count(); ++j) {
        const double sales = g.supply.graph.out_weight(j);
        double final_demand = 0.0;
        if (!g.final_demand.empty()) {
            final_demand = g.final_demand[j];
        } else if (g.firms[j].financials_present) {
            final_demand = std::max(0.0, g.firms[j].revenue - sales);
        }
        out[j] = sales + final_demand;
    }
    return out;
}

double output_loss(std::span<const double> output, std::span<const double> h) {
    if (output.size() != h.size()) throw std::invalid_argument("output and profile lengths differ");
    double total = 0.0;
    double lost = 0.0;
    for (std::size_t j = 0; j < output.size(); ++j) {
        total += output[j];
        lost += output[j] * (1.0 - h[j]);
    }
    return total > 0.0 ? lost / total : 0.0;
}

double compute_esri(const EconomyGraph& g, std::size_t firm, const PropagationConfig& cfg) {
    const auto profile = propagate(g, single_firm_shock(g, firm), cfg);
    return output_loss(firm_output(g), profile.h);
}

void write_trajectory_csv(std::ostream& out, const EconomyGraph& g, const ProductionProfile& profile) {
    out << "iteration,firm_id,h\n";
    for (std::size_t t = 0; t < profile.trajectory.size(); ++t) {
        const auto& h = profile.trajectory[t];
        for (std::size_t i = 0; i < h.size(); ++i) {
            out << t << ',' << g.firms[i].id << ',' << format_double(h[i]) << '\n';
        }
    }
}

}  // namespace fincascade
