// aufair command-line front end: mine, train, experiment, baseline, render.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "aufair/baselines.hpp"
#include "aufair/blackbox.hpp"
#include "aufair/dataio.hpp"
#include "aufair/driver.hpp"
#include "aufair/error.hpp"
#include "aufair/harness.hpp"
#include "aufair/hybrid.hpp"
#include "aufair/rulemine.hpp"

namespace fs = std::filesystem;
using namespace aufair;

namespace {

// Optional overrides for RunConfig; unset flags leave the config file (or
// defaults) alone.
struct RunFlags {
    std::optional<std::size_t> population, batch, query_interval, max_len, max_pool, post_budget, bootstraps;
    std::optional<double> minsupp, min_precision, budget_fraction;
    std::optional<std::size_t> budget_count;
    std::optional<std::string> bias_metric;
    bool no_smoothing = false;

    void attach(CLI::App* app, bool with_budget) {
        app->add_option("--population", population, "population size N (even)");
        app->add_option("--batch", batch, "labels per acquisition round");
        app->add_option("--query-interval", query_interval, "generations between acquisitions");
        app->add_option("--minsupp", minsupp, "minimum rule support");
        app->add_option("--max-len", max_len, "maximum conditions per rule");
        app->add_option("--min-precision", min_precision, "minimum rule precision against h");
        app->add_option("--max-pool", max_pool, "rules kept per candidate pool");
        app->add_option("--post-budget-generations", post_budget, "generations after the budget is spent");
        app->add_option("--bootstraps", bootstraps, "bootstrap samples per acquisition");
        app->add_option("--bias-metric", bias_metric, "equal_opportunity or demographic_parity")
            ->check(CLI::IsMember({"equal_opportunity", "demographic_parity"}));
        app->add_flag("--no-smoothing", no_smoothing, "raw group rates in training fitness");
        if (with_budget) {
            app->add_option("--budget", budget_fraction, "label budget as a fraction of the rows");
            app->add_option("--budget-count", budget_count, "label budget as a row count");
        }
    }

    void apply(RunConfig& c) const {
        if (population) c.population = *population;
        if (batch) c.batch = *batch;
        if (query_interval) c.query_interval = *query_interval;
        if (max_len) c.mining.max_len = *max_len;
        if (max_pool) c.mining.max_pool = *max_pool;
        if (post_budget) c.post_budget_generations = *post_budget;
        if (bootstraps) c.query.bootstraps = *bootstraps;
        if (minsupp) c.mining.minsupp = *minsupp;
        if (min_precision) c.mining.min_precision = *min_precision;
        if (budget_fraction) c.budget_fraction = *budget_fraction;
        if (budget_count) c.budget_count = *budget_count;
        if (bias_metric)
            c.bias_metric =
                *bias_metric == "equal_opportunity" ? BiasMetric::EqualOpportunity : BiasMetric::DemographicParity;
        if (no_smoothing) c.smoothing = false;
    }
};

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigurationError(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
    }
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    out << text;
}

struct DataArgs {
    std::string data, schema, model, save_model;
    double lambda = 0.01;

    void attach(CLI::App* app) {
        app->add_option("--data", data, "CSV data file")->required();
        app->add_option("--schema", schema, "schema JSON")->required();
        app->add_option("--model", model, "decision-maker JSON (else the schema's black-box column, else trained)");
        app->add_option("--lambda", lambda, "L1 strength when a decision maker has to be trained");
        app->add_option("--save-model", save_model, "write the decision maker used");
    }
};

struct Loaded {
    Table table;
    std::optional<DecisionMaker> dm;
    std::vector<std::uint8_t> h;
};

Loaded load_with_h(const DataArgs& args) {
    Loaded l{load_dataset(args.data, DatasetSchema::load(args.schema)), std::nullopt, {}};
    if (l.table.rejected_rows) spdlog::warn("{} malformed rows skipped", l.table.rejected_rows);
    if (!args.model.empty()) {
        l.dm = DecisionMaker::from_json(read_json(args.model));
    } else if (l.table.blackbox_label) {
        l.h = *l.table.blackbox_label;
    } else {
        spdlog::info("training an L1 logistic decision maker (lambda {})", args.lambda);
        L1LogisticOptions opt;
        opt.lambda = args.lambda;
        l.dm = train_l1_logistic(l.table, opt);
    }
    if (l.dm) {
        l.h = l.dm->predict_all(l.table);
        if (!args.save_model.empty()) write_text(args.save_model, l.dm->to_json().dump(2) + "\n");
    }
    return l;
}

int cmd_mine(const DataArgs& data, const RunFlags& flags, std::size_t max_bins, const std::string& out) {
    const auto l = load_with_h(data);
    RunConfig rc;
    flags.apply(rc);
    DiscretizeOptions dopt;
    dopt.max_bins = max_bins;
    const auto bin = discretize(l.table, dopt, l.h);
    const auto pools = induce_candidates(bin, rc.mining);
    const auto text = pools.to_json(bin.vocabulary()).dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text(out, text);
    }
    spdlog::info("{} positive and {} negative candidate rules", pools.positive.size(), pools.negative.size());
    return 0;
}

int cmd_train(const DataArgs& data, const RunFlags& flags, const std::string& config, std::uint64_t seed,
              std::size_t max_bins, const fs::path& out) {
    const auto l = load_with_h(data);
    if (!l.table.label) throw SchemaError("training needs a label column for the oracle");
    RunConfig rc = config.empty() ? RunConfig{} : RunConfig::from_json(read_json(config));
    flags.apply(rc);
    rc.seed = seed;
    DiscretizeOptions dopt;
    dopt.max_bins = max_bins;
    const auto bin = discretize(l.table, dopt, l.h);
    const LabelOracle oracle(bin.true_label());
    CandidatePools pools;
    std::string telemetry;
    const auto result = run(bin, oracle, rc, &pools, [&](const GenerationTelemetry& t) {
        telemetry += t.to_json().dump() + "\n";
    });

    nlohmann::json frontier = nlohmann::json::array();
    std::string rules;
    for (std::size_t k = 0; k < result.frontier.size(); ++k) {
        const auto& s = result.frontier[k];
        auto doc = solution_to_json(s, pools, bin.vocabulary());
        doc["id"] = k;
        doc["train_error"] = s.objectives->error;
        doc["train_bias"] = s.objectives->bias;
        frontier.push_back(std::move(doc));
        rules += fmt::format("# solution {} (error {:.4f}, bias {:.4f})\n{}\n", k, s.objectives->error,
                             s.objectives->bias, render(s, pools, bin.vocabulary()));
    }
    fs::create_directories(out);
    write_text(out / "frontier.json", frontier.dump(2) + "\n");
    write_text(out / "rules.txt", rules);
    write_text(out / "telemetry.jsonl", telemetry);
    write_text(out / "acquisitions.csv", result.state.log_csv());
    write_text(out / "run_config.json", rc.to_json().dump(2) + "\n");
    spdlog::info("{} generations, {} labels, {} frontier solutions -> {}", result.telemetry.size(),
                 result.state.used(), result.frontier.size(), out.string());
    return 0;
}

int cmd_experiment(const std::string& config, std::uint64_t seed, const RunFlags& flags, const fs::path& out) {
    auto cfg = ExperimentConfig::load(config);
    cfg.seed = seed;
    flags.apply(cfg.run);
    const auto report = run_experiment(cfg, [](const std::string& msg) { spdlog::info("{}", msg); });
    export_frontier(report, out);
    for (const auto& a : report.aggregates)
        spdlog::info("budget {}%: test hypervolume {:.4f} +- {:.4f} over {} folds", budget_label(a.fraction),
                     a.hypervolume_mean, a.hypervolume_std, a.folds);
    for (const auto& f : report.folds)
        if (!f.valid) spdlog::error("fold {} invalid: {}", f.fold, f.error);
    return 0;
}

int cmd_baseline(const DataArgs& data, std::uint64_t seed, const std::string& out) {
    const auto l = load_with_h(data);
    if (!l.table.label) throw SchemaError("baselines need a label column");
    const auto& y = *l.table.label;
    const auto& z = l.table.protected_attr;
    std::vector<std::size_t> all(l.table.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    auto point = [&](const std::vector<std::uint8_t>& pred) {
        const auto p = evaluate_objectives(pred, y, z, all, BiasMetric::EqualOpportunity, false);
        return nlohmann::json{{"error", p.error}, {"bias", p.bias}};
    };
    nlohmann::json doc;
    doc["h"] = point(l.h);
    if (l.dm) {
        doc["h_flip0"] = point(l.dm->flip_protected(0).predict_all(l.table));
        doc["h_flip1"] = point(l.dm->flip_protected(1).predict_all(l.table));
    }
    const auto policy = fit_eop(l.h, y, z);
    Rng rng(seed);
    doc["eop"] = {{"policy", policy.to_json()}, {"sampled", point(apply_eop(policy, l.h, z, rng))}};
    const auto expected = expected_eop_objectives(policy, l.h, y, z);
    doc["eop"]["expected"] = {{"error", expected.error}, {"bias", expected.bias}};
    const auto text = doc.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text(out, text);
    }
    return 0;
}

int cmd_render(const std::string& path, std::optional<std::size_t> index) {
    const auto doc = read_json(path);
    if (doc.is_array()) {
        for (std::size_t k = 0; k < doc.size(); ++k) {
            if (index && *index != k) continue;
            std::cout << render_json(doc[k]);
            if (!index && k + 1 < doc.size()) std::cout << "\n";
        }
    } else {
        std::cout << render_json(doc);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_st("aufair"));
    spdlog::set_pattern("%^%l%$: %v");

    CLI::App app{"Fairness-aware hybrid rule sets over a fixed decision maker"};
    app.require_subcommand(1);

    RunFlags mine_flags, train_flags, exp_flags;
    DataArgs mine_data, train_data, base_data;
    std::string out, config;
    std::size_t max_bins = 5;
    std::uint64_t seed = 0;
    std::optional<std::size_t> render_index;

    auto* mine = app.add_subcommand("mine", "emit candidate rule pools as JSON");
    mine_data.attach(mine);
    mine_flags.attach(mine, false);
    mine->add_option("--max-bins", max_bins, "quantile bins per numeric feature");
    mine->add_option("-o,--out", out, "output file (stdout when omitted)");

    auto* train = app.add_subcommand("train", "single budgeted run over a whole data file");
    train_data.attach(train);
    train_flags.attach(train, true);
    train->add_option("--config", config, "RunConfig JSON");
    train->add_option("--seed", seed, "random seed")->required();
    train->add_option("--max-bins", max_bins, "quantile bins per numeric feature");
    train->add_option("-o,--out", out, "output directory")->required();

    auto* exp = app.add_subcommand("experiment", "cross-validated protocol with baselines and exports");
    exp->add_option("--config", config, "experiment JSON")->required()->check(CLI::ExistingFile);
    exp->add_option("--seed", seed, "random seed")->required();
    exp_flags.attach(exp, false);
    exp->add_option("-o,--out", out, "output directory")->required();

    auto* base = app.add_subcommand("baseline", "decision maker, protected flips and EOP on one file");
    base_data.attach(base);
    base->add_option("--seed", seed, "seed for the sampled EOP output");
    base->add_option("-o,--out", out, "output file (stdout when omitted)");

    auto* rend = app.add_subcommand("render", "pretty-print solution JSON");
    rend->add_option("solution", config, "solution JSON (object or array)")->required();
    rend->add_option("--index", render_index, "only this element of an array");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*mine) return cmd_mine(mine_data, mine_flags, max_bins, out);
        if (*train) return cmd_train(train_data, train_flags, config, seed, max_bins, out);
        if (*exp) return cmd_experiment(config, seed, exp_flags, out);
        if (*base) return cmd_baseline(base_data, seed, out);
        if (*rend) return cmd_render(config, render_index);
    } catch (const ConfigurationError& e) {
        spdlog::error("{}", e.what());
        return 2;
    } catch (const DataError& e) {
        spdlog::error("{}", e.what());
        return 3;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
