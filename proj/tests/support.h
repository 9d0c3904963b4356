#pragma once

// Test-side economy description in plain dense matrices, a converter to EconomyGraph, and an
// independent reference implementation of the pipeline that works on the dense form directly.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fincascade/economy.h"
#include "fincascade/io.h"

#ifndef FIXTURE_DIR
#define FIXTURE_DIR "tests/fixtures"
#endif

namespace testsupport {

using Matrix = std::vector<std::vector<double>>;

inline Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, std::vector<double>(cols, 0.0)); }

struct RawFirm {
    std::string sector = "0101";
    bool financials = true;
    double r = 0, c = 0, z = 0, a = 0, s = 0;
};

struct RawEconomy {
    std::vector<RawFirm> firms;
    Matrix W;  // W[i][j]: i sells to j
    std::vector<double> e;
    Matrix L;  // L[k][l]: k borrowed from l
    Matrix B;  // B[i][k]: firm i owes bank k
    double lgd = 1.0;
    bool default_essential = true;
    std::map<std::pair<std::string, std::string>, bool> essential;

    std::size_t n() const { return firms.size(); }
    std::size_t m() const { return e.size(); }
};

inline std::string firm_name(std::size_t i) { return "f" + std::to_string(i); }
inline std::string bank_name(std::size_t k) { return "b" + std::to_string(k); }

inline fincascade::EconomyGraph build(const RawEconomy& raw) {
    using namespace fincascade;
    std::vector<FirmNode> firms;
    for (std::size_t i = 0; i < raw.n(); ++i) {
        const auto& f = raw.firms[i];
        FirmNode node;
        node.id = firm_name(i);
        node.sector = f.sector;
        if (f.financials) {
            node.financials_present = true;
            node.revenue = f.r;
            node.op_cost = f.c;
            node.equity = f.z;
            node.short_assets = f.a;
            node.short_liabs = f.s;
            node.eligible_for_default = has_positive_buffers(node);
        }
        firms.push_back(node);
    }
    std::vector<Edge> supply;
    for (std::size_t i = 0; i < raw.n(); ++i)
        for (std::size_t j = 0; j < raw.n(); ++j)
            if (raw.W[i][j] > 0) supply.push_back({i, j, raw.W[i][j]});
    EssentialityTable table(raw.default_essential);
    for (const auto& [pair, flag] : raw.essential) table.set(pair.first, pair.second, flag);

    std::vector<BankSheet> banks;
    for (std::size_t k = 0; k < raw.m(); ++k) banks.push_back({bank_name(k), raw.e[k]});
    std::vector<Edge> interbank;
    for (std::size_t k = 0; k < raw.m(); ++k)
        for (std::size_t l = 0; l < raw.m(); ++l)
            if (raw.L[k][l] > 0) interbank.push_back({k, l, raw.L[k][l]});
    std::vector<LoanEntry> loans;
    for (std::size_t i = 0; i < raw.n(); ++i)
        for (std::size_t k = 0; k < raw.m(); ++k)
            if (raw.B[i][k] > 0) loans.push_back({i, k, raw.B[i][k]});

    return EconomyGraph(std::move(firms), SupplyNetwork{CsrGraph(raw.n(), std::move(supply)), std::move(table)},
                        std::move(banks), InterbankNetwork{CsrGraph(raw.m(), std::move(interbank))},
                        LoanBook(raw.n(), raw.m(), std::move(loans), raw.lgd));
}

/// Small random economy: a few sectors, sparse supply links, some firms without statements,
/// some with non-positive buffers, random interbank market.
inline RawEconomy random_raw(std::mt19937_64& rng, std::size_t n, std::size_t m) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RawEconomy raw;
    raw.firms.resize(n);
    raw.W = zeros(n, n);
    raw.B = zeros(n, m);
    raw.L = zeros(m, m);
    const char* sectors[] = {"1011", "1012", "2011", "4711"};
    for (auto& f : raw.firms) {
        f.sector = sectors[static_cast<std::size_t>(u(rng) * 4) % 4];
        f.financials = u(rng) < 0.85;
        f.r = 50 + 100 * u(rng);
        f.c = f.r * (0.6 + 0.35 * u(rng));
        const double profit = f.r - f.c;
        f.z = profit * (u(rng) < 0.1 ? -0.5 : 0.2 + 1.6 * u(rng));
        f.s = 10 * u(rng);
        f.a = f.s + profit * (0.2 + 1.6 * u(rng));
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && u(rng) < 0.3) raw.W[i][j] = 1 + 20 * u(rng);
    raw.e.resize(m);
    for (auto& e : raw.e) e = 50 + 200 * u(rng);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < m; ++k)
            if (u(rng) < 0.4) raw.B[i][k] = 60 * u(rng);
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t l = 0; l < m; ++l)
            if (k != l && u(rng) < 0.6) raw.L[k][l] = 80 * u(rng);
    raw.default_essential = u(rng) < 0.7;
    if (u(rng) < 0.5) raw.essential[{"10", "20"}] = !raw.default_essential;
    return raw;
}

// ---- reference implementation -------------------------------------------------------------

inline bool oracle_essential(const RawEconomy& raw, const std::string& from, const std::string& to) {
    if (auto it = raw.essential.find({from, to}); it != raw.essential.end()) return it->second;
    if (auto it = raw.essential.find({from.substr(0, 2), to.substr(0, 2)}); it != raw.essential.end()) return it->second;
    return raw.default_essential;
}

struct OracleProfile {
    std::vector<double> h;
    int sweeps = 0;
};

/// Jacobi iteration of the production update, written against the dense W.
inline OracleProfile oracle_propagate(const RawEconomy& raw, const std::vector<double>& psi, bool enabled = true,
                                      double eps = 0.01, int max_iter = 1000, double sigma = 0.0) {
    const std::size_t n = raw.n();
    OracleProfile out{psi, 0};
    if (!enabled) return out;
    for (int t = 1; t <= max_iter; ++t) {
        std::vector<double> next(n);
        double worst = 0;
        for (std::size_t j = 0; j < n; ++j) {
            std::map<std::string, std::pair<double, double>> pooled;  // sector -> (available, total)
            for (std::size_t i = 0; i < n; ++i) {
                if (raw.W[i][j] <= 0) continue;
                auto& p = pooled[raw.firms[i].sector];
                p.first += raw.W[i][j] * out.h[i];
                p.second += raw.W[i][j];
            }
            double d = 1, soft = 0;
            int soft_n = 0;
            for (const auto& [sector, p] : pooled) {
                const double alpha = p.first / p.second;
                if (oracle_essential(raw, sector, raw.firms[j].sector)) {
                    d = std::min(d, alpha);
                } else {
                    soft += alpha;
                    ++soft_n;
                }
            }
            if (soft_n > 0) d *= (1 - sigma) + sigma * soft / soft_n;
            double sold = 0, demanded = 0;
            for (std::size_t k = 0; k < n; ++k) {
                sold += raw.W[j][k];
                demanded += raw.W[j][k] * out.h[k];
            }
            const double up = sold > 0 ? demanded / sold : 1.0;
            next[j] = std::max(0.0, std::min({psi[j], d, up, out.h[j]}));
            worst = std::max(worst, out.h[j] - next[j]);
        }
        out.h = next;
        out.sweeps = t;
        if (worst <= eps) break;
    }
    return out;
}

inline std::vector<int> oracle_defaults(const RawEconomy& raw, const std::vector<double>& h) {
    std::vector<int> chi(raw.n(), 0);
    for (std::size_t i = 0; i < raw.n(); ++i) {
        const auto& f = raw.firms[i];
        if (!f.financials) continue;
        const double profit = f.r - f.c;
        if (f.z <= 0 || f.a - f.s <= 0 || profit <= 0) continue;
        const double dp = (1 - h[i]) * profit;
        chi[i] = (f.z - dp <= 0 || f.a - f.s - dp <= 0) ? 1 : 0;
    }
    return chi;
}

/// sum_i chi_i B_ik / e_k, times lgd.
inline std::vector<double> oracle_loan_loss(const RawEconomy& raw, const std::vector<int>& chi) {
    std::vector<double> loss(raw.m(), 0.0);
    for (std::size_t k = 0; k < raw.m(); ++k) {
        double sum = 0;
        for (std::size_t i = 0; i < raw.n(); ++i) sum += chi[i] * raw.B[i][k];
        loss[k] = raw.lgd * sum / raw.e[k];
    }
    return loss;
}

struct OracleContagion {
    std::vector<double> final;
    int rounds = 0;
};

/// Explicit matrix iteration L(t) = seed + Lambda^T min(L(t-1), 1) with Lambda_lk = L_lk / e_k.
inline OracleContagion oracle_debtrank(const RawEconomy& raw, const std::vector<double>& seed, double eps = 0.01,
                                       int max_iter = 1000) {
    const std::size_t m = raw.m();
    Matrix lambda = zeros(m, m);
    for (std::size_t l = 0; l < m; ++l)
        for (std::size_t k = 0; k < m; ++k) lambda[l][k] = raw.L[l][k] / raw.e[k];
    double total_e = 0;
    for (double e : raw.e) total_e += e;

    OracleContagion out{seed, 0};
    for (int t = 1; t <= max_iter; ++t) {
        std::vector<double> next(m);
        double change = 0;
        for (std::size_t k = 0; k < m; ++k) {
            next[k] = seed[k];
            for (std::size_t l = 0; l < m; ++l) next[k] += lambda[l][k] * std::min(out.final[l], 1.0);
            change += raw.e[k] * (next[k] - out.final[k]);
        }
        out.final = next;
        out.rounds = t;
        if (change / total_e <= eps) break;
    }
    return out;
}

struct OracleLedger {
    std::vector<double> di, sc, ib_wo, ib_w;
};

/// The whole three-step pipeline for one shock, both regimes.
inline OracleLedger oracle_pipeline(const RawEconomy& raw, const std::vector<double>& psi) {
    const auto chi_wo = oracle_defaults(raw, psi);
    const auto chi_w = oracle_defaults(raw, oracle_propagate(raw, psi).h);
    std::vector<int> added(raw.n());
    for (std::size_t i = 0; i < raw.n(); ++i) added[i] = chi_w[i] - chi_wo[i];
    OracleLedger out;
    out.di = oracle_loan_loss(raw, chi_wo);
    out.sc = oracle_loan_loss(raw, added);
    std::vector<double> seed_w(raw.m());
    for (std::size_t k = 0; k < raw.m(); ++k) seed_w[k] = out.di[k] + out.sc[k];
    const auto wo = oracle_debtrank(raw, out.di);
    const auto w = oracle_debtrank(raw, seed_w);
    for (std::size_t k = 0; k < raw.m(); ++k) {
        out.ib_wo.push_back(wo.final[k] - out.di[k]);
        out.ib_w.push_back(w.final[k] - seed_w[k]);
    }
    return out;
}

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(FIXTURE_DIR) / name; }

inline fincascade::EconomyGraph load_toy6() {
    return fincascade::load_economy(fincascade::EconomyFiles::in_directory(fixture("toy6")));
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("fincascade_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testsupport
