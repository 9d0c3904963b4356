#include "cli.h"

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fincascade/errors.h"
#include "fincascade/generator.h"
#include "fincascade/io.h"
#include "fincascade/report.h"
#include "fincascade/risk.h"
#include "fincascade/scenarios.h"

#ifndef FINCASCADE_VERSION
#define FINCASCADE_VERSION "0.0.0"
#endif

namespace fincascade::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

/// Everything a run needs. Defaults, then the --config file, then command-line flags.
struct RunConfig {
    std::optional<fs::path> economy_dir;
    std::optional<GeneratorParams> synthetic;
    std::uint64_t economy_seed = 1;
    double lgd = 1.0;
    std::optional<fs::path> essentiality;

    std::string scenario_kind = "covid";
    std::size_t scenario_count = 1000;
    std::uint64_t scenario_seed = 1;
    std::optional<fs::path> empirical;
    double coverage = 0.3;
    std::optional<fs::path> batch_file;

    StressConfig stress;
    RegimeSelection regime = RegimeSelection::Both;
    unsigned workers = 0;
    fs::path out = "out";
    bool trace = false;
    std::size_t trace_scenarios = 1;
    std::optional<fs::path> ledgers;
};

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

fs::path resolve(const fs::path& base, const std::string& text) {
    fs::path p(text);
    return p.is_absolute() || base.empty() ? p : base / p;
}

template <typename T>
void take(const ordered_json& node, const char* key, T& target) {
    if (node.contains(key)) target = node.at(key).get<T>();
}

GeneratorParams generator_params(const ordered_json& node) {
    GeneratorParams p;
    take(node, "firms", p.firms);
    take(node, "banks", p.banks);
    take(node, "mean_degree", p.mean_degree);
    take(node, "sectors", p.sectors);
    take(node, "subsectors", p.subsectors);
    take(node, "target_exposure_ratio", p.target_exposure_ratio);
    if (node.contains("weight_family")) p.weight_family = parse_weight_family(node.at("weight_family").get<std::string>());
    take(node, "financials_share", p.financials_share);
    take(node, "distressed_share", p.distressed_share);
    take(node, "borrower_share", p.borrower_share);
    take(node, "loans_to_equity", p.loans_to_equity);
    take(node, "interbank_density", p.interbank_density);
    take(node, "unconnected_banks", p.unconnected_banks);
    take(node, "essential_share", p.essential_share);
    take(node, "buffer_multiple", p.buffer_multiple);
    return p;
}

ordered_json to_json(const GeneratorParams& p) {
    return {{"firms", p.firms},
            {"banks", p.banks},
            {"mean_degree", p.mean_degree},
            {"sectors", p.sectors},
            {"subsectors", p.subsectors},
            {"target_exposure_ratio", p.target_exposure_ratio},
            {"weight_family", to_string(p.weight_family)},
            {"financials_share", p.financials_share},
            {"distressed_share", p.distressed_share},
            {"borrower_share", p.borrower_share},
            {"loans_to_equity", p.loans_to_equity},
            {"interbank_density", p.interbank_density},
            {"unconnected_banks", p.unconnected_banks},
            {"essential_share", p.essential_share},
            {"buffer_multiple", p.buffer_multiple}};
}

void load_config_file(const fs::path& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    ordered_json doc;
    try {
        doc = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string(), 0, e.what());
    }
    const fs::path base = path.parent_path();
    try {
        if (doc.contains("economy")) {
            const auto& e = doc["economy"];
            if (e.contains("dir")) cfg.economy_dir = resolve(base, e["dir"].get<std::string>());
            if (e.contains("synthetic")) cfg.synthetic = generator_params(e["synthetic"]);
            take(e, "seed", cfg.economy_seed);
            take(e, "lgd", cfg.lgd);
            if (e.contains("essentiality")) cfg.essentiality = resolve(base, e["essentiality"].get<std::string>());
        }
        if (doc.contains("scenarios")) {
            const auto& s = doc["scenarios"];
            take(s, "kind", cfg.scenario_kind);
            take(s, "count", cfg.scenario_count);
            take(s, "seed", cfg.scenario_seed);
            take(s, "coverage", cfg.coverage);
            if (s.contains("empirical")) cfg.empirical = resolve(base, s["empirical"].get<std::string>());
            if (s.contains("file")) cfg.batch_file = resolve(base, s["file"].get<std::string>());
        }
        if (doc.contains("propagation")) {
            const auto& p = doc["propagation"];
            take(p, "epsilon", cfg.stress.propagation.epsilon);
            take(p, "max_iter", cfg.stress.propagation.max_iter);
            take(p, "sigma", cfg.stress.propagation.sigma);
            if (p.contains("essentiality")) cfg.essentiality = resolve(base, p["essentiality"].get<std::string>());
        }
        if (doc.contains("debtrank")) {
            const auto& d = doc["debtrank"];
            take(d, "epsilon", cfg.stress.debtrank.epsilon);
            take(d, "max_iter", cfg.stress.debtrank.max_iter);
        }
        if (doc.contains("regime")) cfg.regime = parse_regime(doc["regime"].get<std::string>());
        take(doc, "workers", cfg.workers);
        if (doc.contains("out")) cfg.out = resolve(base, doc["out"].get<std::string>());
        take(doc, "trace", cfg.trace);
        take(doc, "trace_scenarios", cfg.trace_scenarios);
        if (doc.contains("ledgers")) cfg.ledgers = resolve(base, doc["ledgers"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string(), 0, e.what());
    }
}

/// Config echo for the manifest. The worker count is left out: results do not depend on it.
ordered_json echo(const RunConfig& cfg, const std::string& command) {
    ordered_json doc;
    doc["command"] = command;
    ordered_json economy;
    if (cfg.economy_dir) economy["dir"] = cfg.economy_dir->generic_string();
    if (cfg.synthetic) {
        economy["synthetic"] = to_json(*cfg.synthetic);
        economy["seed"] = cfg.economy_seed;
    }
    economy["lgd"] = cfg.lgd;
    if (cfg.essentiality) economy["essentiality"] = cfg.essentiality->generic_string();
    doc["economy"] = economy;
    if (command == "stress") {
        ordered_json s{{"kind", cfg.scenario_kind}};
        if (cfg.scenario_kind == "covid") {
            s["count"] = cfg.scenario_count;
            s["seed"] = cfg.scenario_seed;
            if (cfg.empirical) {
                s["empirical"] = cfg.empirical->generic_string();
            } else {
                s["coverage"] = cfg.coverage;
            }
        }
        if (cfg.batch_file) s["file"] = cfg.batch_file->generic_string();
        doc["scenarios"] = s;
    }
    if (command == "generate") doc["scenarios"] = {{"coverage", cfg.coverage}, {"seed", cfg.scenario_seed}};
    doc["propagation"] = {{"epsilon", cfg.stress.propagation.epsilon},
                          {"max_iter", cfg.stress.propagation.max_iter},
                          {"sigma", cfg.stress.propagation.sigma}};
    doc["debtrank"] = {{"epsilon", cfg.stress.debtrank.epsilon}, {"max_iter", cfg.stress.debtrank.max_iter}};
    doc["regime"] = to_string(cfg.regime);
    doc["trace"] = cfg.trace;
    if (cfg.ledgers) doc["ledgers"] = cfg.ledgers->generic_string();
    return doc;
}

/// Collects what a run produced; written last, or on failure with status "failed".
struct Manifest {
    ordered_json config;
    ordered_json seeds = ordered_json::object();
    std::vector<std::string> files;
    ordered_json extra = ordered_json::object();

    void write(const fs::path& dir, const std::string& status, const std::string& error = {}) const {
        ordered_json doc;
        doc["tool"] = "fincascade";
        doc["version"] = FINCASCADE_VERSION;
        doc["status"] = status;
        if (!error.empty()) doc["error"] = error;
        doc["config"] = config;
        doc["seeds"] = seeds;
        doc["files"] = files;
        for (const auto& [key, value] : extra.items()) doc[key] = value;
        std::error_code ec;
        fs::create_directories(dir, ec);
        std::ofstream out(dir / "manifest.json", std::ios::binary);
        if (out) out << doc.dump(2) << '\n';
    }
};

std::ofstream open_out(const fs::path& dir, const std::string& name, Manifest& manifest) {
    fs::create_directories(dir);
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    manifest.files.push_back(name);
    return out;
}

EconomyGraph obtain_economy(const RunConfig& cfg, Manifest& manifest) {
    if (cfg.economy_dir) {
        auto files = EconomyFiles::in_directory(*cfg.economy_dir);
        files.lgd = cfg.lgd;
        if (cfg.essentiality) files.essentiality = cfg.essentiality;
        return load_economy(files);
    }
    if (cfg.synthetic) {
        manifest.seeds["economy"] = cfg.economy_seed;
        auto g = generate_synthetic_economy(*cfg.synthetic, cfg.economy_seed);
        g.loans.set_lgd(cfg.lgd);
        if (cfg.essentiality) g.supply.essentiality = load_essentiality(*cfg.essentiality);
        return g;
    }
    throw UsageError("no economy given: pass --economy DIR or a config with economy.dir / economy.synthetic");
}

ordered_json economy_summary(const EconomyGraph& g) {
    ordered_json doc{{"firms", g.firm_count()},
                     {"banks", g.bank_count()},
                     {"supply_edges", g.supply.graph.edge_count()},
                     {"interbank_edges", g.interbank.graph.edge_count()},
                     {"loans", g.loans.entries().size()}};
    try {
        doc["exposure_ratio"] = exposure_ratio(g).system_ratio;
    } catch (const DegenerateDenominator&) {
        doc["exposure_ratio"] = nullptr;
    }
    return doc;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
    if (!cfg.economy_dir) throw UsageError("validate needs --economy DIR");
    Manifest manifest;
    const auto g = obtain_economy(cfg, manifest);
    out << "ok: " << economy_summary(g).dump() << '\n';
    return kOk;
}

int cmd_generate(const RunConfig& cfg, std::ostream& out, Manifest& manifest) {
    const auto params = cfg.synthetic.value_or(GeneratorParams{});
    RunConfig effective = cfg;
    effective.synthetic = params;
    effective.economy_dir.reset();
    manifest.config = echo(effective, "generate");
    manifest.seeds["economy"] = cfg.economy_seed;
    manifest.seeds["empirical"] = cfg.scenario_seed;

    const auto g = generate_synthetic_economy(params, cfg.economy_seed);
    write_economy(g, cfg.out);
    for (const char* name : {"banks.csv", "firms.csv", "supply.csv", "interbank.csv", "loans.csv", "essentiality.csv"}) {
        manifest.files.push_back(name);
    }
    const auto table = synthetic_empirical_table(g, cfg.coverage, cfg.scenario_seed);
    table.write(cfg.out / "empirical_shocks.csv", g);
    manifest.files.push_back("empirical_shocks.csv");
    manifest.extra["economy"] = economy_summary(g);
    out << "generated " << g.firm_count() << " firms, " << g.bank_count() << " banks in " << cfg.out.string() << '\n';
    return kOk;
}

int cmd_fsri(const RunConfig& cfg, std::ostream& out, Manifest& manifest) {
    manifest.config = echo(cfg, "fsri");
    const auto g = obtain_economy(cfg, manifest);
    const auto profile = fsri_profile(g, cfg.stress, cfg.workers);
    {
        auto file = open_out(cfg.out, "fsri_profile.csv", manifest);
        write_fsri_profile_csv(file, g, profile);
    }
    {
        auto file = open_out(cfg.out, "ccdf.csv", manifest);
        write_ccdf_csv(file, {{"fsri", profile.ccdf_fsri}, {"fsri_plus", profile.ccdf_fsri_plus}});
    }
    manifest.extra["nonconverged_firms"] = profile.nonconverged;
    out << "fsri: " << profile.records.size() << " firms, " << profile.nonconverged << " not converged\n";
    return profile.nonconverged == 0 ? kOk : kConvergence;
}

ShockBatch build_batch(const RunConfig& cfg, const EconomyGraph& g, Manifest& manifest, std::ostream& err) {
    if (cfg.scenario_kind == "file") {
        if (!cfg.batch_file) throw UsageError("scenario kind 'file' needs scenarios.file");
        return read_batch_csv(*cfg.batch_file, g);
    }
    if (cfg.scenario_kind == "single_firm") {
        ShockBatch batch;
        batch.provenance = BatchKind::SingleFirm;
        for (std::size_t i = 0; i < g.firm_count(); ++i) batch.scenarios.push_back(single_firm_shock(g, i));
        return batch;
    }
    if (cfg.scenario_kind != "covid") throw UsageError("unknown scenario kind '" + cfg.scenario_kind + "'");

    EmpiricalShockTable table;
    if (cfg.empirical) {
        table = EmpiricalShockTable::load(*cfg.empirical, g);
    } else {
        manifest.seeds["empirical"] = cfg.scenario_seed;
        table = synthetic_empirical_table(g, cfg.coverage, cfg.scenario_seed);
    }
    manifest.seeds["scenarios"] = cfg.scenario_seed;
    auto batch = covid_style_batch(g, table, cfg.scenario_count, cfg.scenario_seed);
    const auto sectors = empirical_sector_targets(g, table).size();
    if (!batch.residuals.empty()) {
        err << "warning: " << batch.residuals.size() << " of " << sectors * batch.size()
            << " sector aggregates could not be matched after clipping (see residuals.csv)\n";
    }
    return batch;
}

void write_traces(const RunConfig& cfg, const EconomyGraph& g, const ShockBatch& batch, Manifest& manifest) {
    const std::size_t count = std::min(cfg.trace_scenarios, batch.size());
    auto prop = cfg.stress.propagation;
    prop.record_trajectory = true;
    auto dr = cfg.stress.debtrank;
    dr.record_trace = true;
    for (std::size_t s = 0; s < count; ++s) {
        const auto profile = propagate(g, batch.scenarios[s], prop);
        {
            auto file = open_out(cfg.out, "trace/propagation_" + std::to_string(s) + ".csv", manifest);
            write_trajectory_csv(file, g, profile);
        }
        const auto chi_wo = default_flags(g, profit_shock(g, batch.scenarios[s].values()));
        const auto chi_w = default_flags(g, profit_shock(g, profile.h));
        const auto ledger = bank_losses(g, chi_w, chi_wo);
        std::vector<double> seed_w(g.bank_count());
        for (std::size_t k = 0; k < seed_w.size(); ++k) seed_w[k] = ledger.di[k] + ledger.sc[k];
        {
            auto file = open_out(cfg.out, "trace/debtrank_wo_" + std::to_string(s) + ".csv", manifest);
            write_debtrank_trace_csv(file, g, debtrank(g, ledger.di, dr));
        }
        {
            auto file = open_out(cfg.out, "trace/debtrank_w_" + std::to_string(s) + ".csv", manifest);
            write_debtrank_trace_csv(file, g, debtrank(g, seed_w, dr));
        }
    }
}

int cmd_stress(RunConfig cfg, std::ostream& out, std::ostream& err, Manifest& manifest) {
    if (cfg.scenario_kind == "covid" && !cfg.empirical && cfg.economy_dir &&
        fs::exists(*cfg.economy_dir / "empirical_shocks.csv")) {
        cfg.empirical = *cfg.economy_dir / "empirical_shocks.csv";
    }
    manifest.config = echo(cfg, "stress");
    const auto g = obtain_economy(cfg, manifest);
    const auto batch = build_batch(cfg, g, manifest, err);
    fs::create_directories(cfg.out);
    if (cfg.trace) fs::create_directories(cfg.out / "trace");

    const auto result = channel_decomposition(g, batch, cfg.stress, cfg.regime, cfg.workers);
    {
        auto file = open_out(cfg.out, "ledgers.csv", manifest);
        write_ledgers_csv(file, result.ledgers);
    }
    for (const auto& name : write_ledger_reports(cfg.out, result.ledgers)) manifest.files.push_back(name);
    {
        auto file = open_out(cfg.out, "residuals.csv", manifest);
        file << "scenario_id,sector,target,realized\n";
        for (const auto& r : batch.residuals) {
            file << r.scenario << ',' << r.sector << ',' << format_double(r.target) << ','
                 << format_double(r.realized) << '\n';
        }
    }
    if (cfg.trace) write_traces(cfg, g, batch, manifest);

    ordered_json flags = ordered_json::array();
    for (std::size_t s = 0; s < result.outcomes.size(); ++s) {
        const auto& o = result.outcomes[s];
        flags.push_back({{"scenario_id", s},
                         {"propagation", o.propagation_converged},
                         {"propagation_iterations", o.propagation_iterations},
                         {"debtrank_wo", o.debtrank_wo_converged},
                         {"debtrank_w", o.debtrank_w_converged},
                         {"defaults_wo", o.defaults_wo},
                         {"defaults_w", o.defaults_w}});
    }
    manifest.extra["batch"] = {{"kind", to_string(batch.provenance)},
                               {"scenarios", batch.size()},
                               {"aggregate_residuals", batch.residuals.size()}};
    manifest.extra["convergence"] = std::move(flags);
    const auto nonconverged = result.nonconverged();
    out << "stress: " << batch.size() << " scenarios, " << nonconverged << " not converged\n";
    return nonconverged == 0 ? kOk : kConvergence;
}

int cmd_debtrank(const RunConfig& cfg, std::ostream& out, Manifest& manifest) {
    manifest.config = echo(cfg, "debtrank");
    const auto g = obtain_economy(cfg, manifest);
    const auto impacts = debtrank_profile(g, cfg.stress.debtrank);
    {
        auto file = open_out(cfg.out, "debtrank_profile.csv", manifest);
        write_debtrank_profile_csv(file, g, impacts);
    }
    bool converged = true;
    auto dr = cfg.stress.debtrank;
    dr.record_trace = cfg.trace;
    for (std::size_t k = 0; k < g.bank_count(); ++k) {
        std::vector<double> seed(g.bank_count(), 0.0);
        seed[k] = 1.0;
        const auto result = debtrank(g, seed, dr);
        converged = converged && result.converged;
        if (cfg.trace) {
            auto file = open_out(cfg.out, "trace/debtrank_bank_" + g.banks[k].id + ".csv", manifest);
            write_debtrank_trace_csv(file, g, result);
        }
    }
    manifest.extra["converged"] = converged;
    out << "debtrank: " << g.bank_count() << " banks\n";
    return converged ? kOk : kConvergence;
}

int cmd_report(const RunConfig& cfg, std::ostream& out, Manifest& manifest) {
    manifest.config = echo(cfg, "report");
    const fs::path path = cfg.ledgers.value_or(cfg.out / "ledgers.csv");
    const auto ledgers = read_ledgers_csv(path);
    for (const auto& name : write_ledger_reports(cfg.out, ledgers)) manifest.files.push_back(name);
    out << "report: " << ledgers.scenarios.size() << " scenarios, " << ledgers.bank_ids.size() << " banks\n";
    return kOk;
}

void structured_error(std::ostream& err, const char* kind, const std::string& message) {
    err << ordered_json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Supply-chain and interbank contagion stress testing", "fincascade"};
    app.require_subcommand(1);
    app.set_version_flag("--version", FINCASCADE_VERSION);

    std::string config_path, economy_dir, out_dir, regime, ledgers_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    bool trace = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration");
        sub->add_option("--economy", economy_dir, "Directory with the economy CSV files");
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_option("--workers", workers, "Worker threads (0 = all cores)");
        sub->add_option("--seed", seed, "Scenario seed (economy seed for generate)");
        sub->add_option("--regime", regime, "w, wo or both")->check(CLI::IsMember({"w", "wo", "both"}));
        sub->add_flag("--trace", trace, "Dump iteration traces");
    };
    auto* validate = app.add_subcommand("validate", "Load and validate an economy");
    auto* generate = app.add_subcommand("generate", "Write a synthetic economy and empirical shock table");
    auto* fsri_cmd = app.add_subcommand("fsri", "Single-firm FSRI / FSRI+ / ESRI sweep");
    auto* stress = app.add_subcommand("stress", "Scenario batch through both regimes");
    auto* debtrank_cmd = app.add_subcommand("debtrank", "Interbank DebtRank of each bank's default");
    auto* report = app.add_subcommand("report", "Recompute statistics from a ledgers.csv");
    for (auto* sub : {validate, generate, fsri_cmd, stress, debtrank_cmd, report}) add_common(sub);
    report->add_option("--ledgers", ledgers_path, "Ledger file (default OUT/ledgers.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kValidation;
    }

    const auto* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    RunConfig cfg;
    Manifest manifest;
    try {
        if (!config_path.empty()) load_config_file(config_path, cfg);
        if (!economy_dir.empty()) {
            cfg.economy_dir = economy_dir;
            cfg.synthetic.reset();
        }
        if (!out_dir.empty()) cfg.out = out_dir;
        if (workers) cfg.workers = *workers;
        if (seed) (command == "generate" ? cfg.economy_seed : cfg.scenario_seed) = *seed;
        if (!regime.empty()) cfg.regime = parse_regime(regime);
        if (trace) cfg.trace = true;
        if (!ledgers_path.empty()) cfg.ledgers = ledgers_path;
    } catch (const IoError& e) {
        structured_error(err, "io", e.what());
        return kIo;
    } catch (const std::exception& e) {
        structured_error(err, "config", e.what());
        return kValidation;
    }

    const bool writes_manifest = command != "validate";
    auto fail = [&](const char* kind, const std::string& message, int code) {
        structured_error(err, kind, message);
        if (writes_manifest) {
            if (manifest.config.is_null()) manifest.config = echo(cfg, command);
            manifest.write(cfg.out, "failed", message);
        }
        return code;
    };
    try {
        int code = kOk;
        if (command == "validate") return cmd_validate(cfg, out);
        if (command == "generate") code = cmd_generate(cfg, out, manifest);
        if (command == "fsri") code = cmd_fsri(cfg, out, manifest);
        if (command == "stress") code = cmd_stress(cfg, out, err, manifest);
        if (command == "debtrank") code = cmd_debtrank(cfg, out, manifest);
        if (command == "report") code = cmd_report(cfg, out, manifest);
        manifest.write(cfg.out, code == kOk ? "ok" : "nonconverged");
        return code;
    } catch (const IoError& e) {
        return fail("io", e.what(), kIo);
    } catch (const ParseError& e) {
        return fail("parse", e.what(), kValidation);
    } catch (const ReferentialError& e) {
        return fail("reference", e.what(), kValidation);
    } catch (const InvariantError& e) {
        return fail("validation", e.what(), kValidation);
    } catch (const fs::filesystem_error& e) {
        return fail("io", e.what(), kIo);
    } catch (const std::exception& e) {
        return fail("error", e.what(), kValidation);
    }
}

}  // namespace fincascade::cli
