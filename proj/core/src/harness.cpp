#include "aufair/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "aufair/blackbox.hpp"
#include "aufair/error.hpp"
#include "aufair/hybrid.hpp"
#include "aufair/rulemine.hpp"

namespace aufair {

namespace {

const std::set<std::string> kExperimentKeys{"dataset", "schema",  "folds",     "seed",
                                            "budgets", "train_ratio", "lambdas", "max_bins",
                                            "negation_min_frequency", "only_folds"};

nlohmann::json point_json(const ObjectivePoint& p) { return {{"error", p.error}, {"bias", p.bias}}; }

nlohmann::json optional_point(const std::optional<ObjectivePoint>& p) {
    return p ? point_json(*p) : nlohmann::json();
}

} // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) throw ConfigurationError("experiment configuration must be a JSON object");
    ExperimentConfig c;
    nlohmann::json run_doc = nlohmann::json::object();
    for (const auto& [key, value] : doc.items())
        if (!kExperimentKeys.contains(key)) run_doc[key] = value;
    if (run_doc.contains("budget_fraction") || run_doc.contains("budget_count"))
        throw ConfigurationError("experiment budgets are set with the 'budgets' list");
    c.run = RunConfig::from_json(run_doc);
    try {
        auto resolve = [&](const char* key) {
            std::filesystem::path p = doc.at(key).get<std::string>();
            return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
        };
        if (!doc.contains("dataset") || !doc.contains("schema"))
            throw ConfigurationError("experiment configuration needs 'dataset' and 'schema'");
        c.dataset = resolve("dataset");
        c.schema = resolve("schema");
        if (doc.contains("folds")) c.folds = doc["folds"].get<std::size_t>();
        if (doc.contains("seed") && !doc["seed"].is_null()) c.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("budgets")) c.budgets = doc["budgets"].get<std::vector<double>>();
        if (doc.contains("train_ratio")) c.train_ratio = doc["train_ratio"].get<double>();
        if (doc.contains("lambdas")) c.lambdas = doc["lambdas"].get<std::vector<double>>();
        if (doc.contains("max_bins")) c.discretize.max_bins = doc["max_bins"].get<std::size_t>();
        if (doc.contains("negation_min_frequency"))
            c.discretize.negation_min_frequency = doc["negation_min_frequency"].get<double>();
        if (doc.contains("only_folds")) c.only_folds = doc["only_folds"].get<std::vector<std::size_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigurationError(fmt::format("bad experiment configuration: {}", e.what()));
    }
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open configuration '{}'", path.string()));
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigurationError(fmt::format("configuration '{}' is not valid JSON: {}", path.string(), e.what()));
    }
    return from_json(doc, path.parent_path());
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json doc = run.to_json();
    doc.erase("budget_fraction");
    doc.erase("budget_count");
    doc["dataset"] = dataset.string();
    doc["schema"] = schema.string();
    doc["folds"] = folds;
    doc["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json();
    doc["budgets"] = budgets;
    doc["train_ratio"] = train_ratio;
    doc["lambdas"] = lambdas;
    doc["max_bins"] = discretize.max_bins;
    doc["negation_min_frequency"] = discretize.negation_min_frequency;
    doc["only_folds"] = only_folds;
    return doc;
}

void ExperimentConfig::validate() const {
    if (!seed) throw ConfigurationError("an experiment needs an explicit seed");
    if (folds < 2) throw ConfigurationError("at least two folds are required");
    if (budgets.empty()) throw ConfigurationError("no budgets given");
    for (double b : budgets)
        if (!(b > 0.0 && b <= 1.0)) throw ConfigurationError(fmt::format("budget fraction {} outside (0, 1]", b));
    if (!(train_ratio > 0.0 && train_ratio < 1.0)) throw ConfigurationError("train_ratio must lie in (0, 1)");
    if (lambdas.empty()) throw ConfigurationError("lambda grid is empty");
    for (auto f : only_folds)
        if (f >= folds) throw ConfigurationError(fmt::format("fold {} does not exist", f));
    if (discretize.max_bins < 2) throw ConfigurationError("max_bins must be at least 2");
}

std::string budget_label(double fraction) { return fmt::format("{:g}", fraction * 100.0); }

std::vector<double> attainment_curve(std::span<const ObjectivePoint> points, std::span<const double> grid) {
    std::vector<double> out;
    for (double e : grid) {
        double best = 1.0;
        for (const auto& p : points)
            if (p.error <= e + 1e-12) best = std::min(best, p.bias);
        out.push_back(best);
    }
    return out;
}

namespace {

std::vector<double> default_error_grid() {
    std::vector<double> g;
    for (int k = 0; k <= 50; ++k) g.push_back(k / 100.0);
    return g;
}

void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
    mean = 0.0;
    sd = 0.0;
    if (xs.empty()) return;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    if (xs.size() < 2) return;
    for (double x : xs) sd += (x - mean) * (x - mean);
    sd = std::sqrt(sd / static_cast<double>(xs.size() - 1));  // sample standard deviation
}

} // namespace

std::vector<BudgetAggregate> aggregate(const ExperimentReport& report) {
    std::vector<BudgetAggregate> out;
    const auto grid = default_error_grid();
    for (std::size_t b = 0; b < report.config.budgets.size(); ++b) {
        BudgetAggregate agg;
        agg.fraction = report.config.budgets[b];
        agg.error_grid = grid;
        std::vector<double> hv;
        std::vector<std::vector<double>> curves;
        double eop_err = 0.0, eop_bias = 0.0;
        std::size_t eop_n = 0;
        for (const auto& fold : report.folds) {
            if (!fold.valid || b >= fold.budgets.size()) continue;
            const auto& o = fold.budgets[b];
            hv.push_back(o.hypervolume);
            std::vector<ObjectivePoint> pts;
            for (const auto& e : o.frontier) pts.push_back(e.test);
            curves.push_back(attainment_curve(pts, grid));
            if (o.eop_test) {
                eop_err += o.eop_test->error;
                eop_bias += o.eop_test->bias;
                ++eop_n;
            }
        }
        agg.folds = hv.size();
        mean_std(hv, agg.hypervolume_mean, agg.hypervolume_std);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            std::vector<double> col;
            for (const auto& c : curves) col.push_back(c[k]);
            double m, s;
            mean_std(col, m, s);
            agg.curve_mean.push_back(m);
            agg.curve_std.push_back(s);
        }
        if (eop_n) agg.eop_mean = ObjectivePoint{eop_err / eop_n, eop_bias / eop_n};
        out.push_back(std::move(agg));
    }
    return out;
}

namespace {

FoldReport run_fold(const ExperimentConfig& config, const Table& table, const Fold& split, std::size_t fold_index,
                    const ProgressSink& progress) {
    const std::uint64_t seed = *config.seed;
    FoldReport report;
    report.fold = fold_index;
    auto say = [&](const std::string& msg) {
        if (progress) progress(fmt::format("fold {}: {}", fold_index, msg));
    };

    const auto tv = train_val_split(split.train, config.train_ratio, derive_seed(seed, 1 + fold_index));
    const Table train = table.subset(tv.train);
    const Table validation = table.subset(tv.validation);
    const Table test = table.subset(split.test);
    report.train_rows = train.rows();
    report.validation_rows = validation.rows();
    report.test_rows = test.rows();

    // Decision maker: a recorded column when the schema has one, otherwise
    // an L1 logistic model tuned on validation.
    std::vector<std::uint8_t> h_train, h_val, h_test;
    if (table.blackbox_label) {
        h_train = *train.blackbox_label;
        h_val = *validation.blackbox_label;
        h_test = *test.blackbox_label;
    } else {
        LambdaSelection sel;
        const DecisionMaker dm = select_l1_logistic(train, validation, config.lambdas, &sel);
        report.lambda = sel.lambda;
        h_train = dm.predict_all(train);
        h_val = dm.predict_all(validation);
        h_test = dm.predict_all(test);
        const auto& y = *test.label;
        std::vector<std::size_t> all(test.rows());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        report.h0_test = evaluate_objectives(dm.flip_protected(0).predict_all(test), y, test.protected_attr, all,
                                             config.run.bias_metric, false);
        report.h1_test = evaluate_objectives(dm.flip_protected(1).predict_all(test), y, test.protected_attr, all,
                                             config.run.bias_metric, false);
    }
    say(report.lambda ? fmt::format("decision maker trained (lambda {})", *report.lambda) : "decision maker loaded");

    auto vocab = std::make_shared<const Vocabulary>(fit_vocabulary(train, config.discretize));
    const BinarizedDataset train_bin = binarize(train, vocab, h_train);
    const BinarizedDataset val_bin = binarize(validation, vocab, h_val);
    const BinarizedDataset test_bin = binarize(test, vocab, h_test);
    {
        std::vector<std::size_t> all(test.rows());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        report.h_test =
            evaluate_objectives(h_test, test_bin.true_label(), test_bin.protected_attr(), all, config.run.bias_metric, false);
    }

    const CandidatePools pools = induce_candidates(train_bin, config.run.mining);
    report.positive_pool = pools.positive.size();
    report.negative_pool = pools.negative.size();
    say(fmt::format("{} positive / {} negative candidate rules", pools.positive.size(), pools.negative.size()));

    const LabelOracle oracle(train_bin.true_label());
    const CoverageIndex test_index(pools, test_bin);

    for (std::size_t b = 0; b < config.budgets.size(); ++b) {
        BudgetOutcome out;
        out.fraction = config.budgets[b];
        RunConfig rc = config.run;
        rc.budget_count.reset();
        rc.budget_fraction = out.fraction;
        rc.seed = derive_seed(derive_seed(seed, 100 + fold_index), b);
        out.seed = rc.seed;
        const RunResult result = run(train_bin, pools, oracle, rc);
        out.budget = result.budget;
        out.batch = result.batch;
        out.generations = result.telemetry.size();
        out.frontier_size = result.frontier.size();

        const auto selected = select_frontier_on_validation(result.frontier, pools, val_bin, rc.bias_metric);
        std::vector<ObjectivePoint> test_points;
        for (auto k : selected.indices) {
            const Solution& s = result.frontier[k];
            FrontierEntry e;
            e.id = k;
            e.train = *s.objectives;
            e.validation = selected.points[k];
            e.test = evaluate_on(s, test_index, test_bin, rc.bias_metric, false);
            e.coverage = coverage(s, test_index);
            e.rules = s.rule_count();
            e.solution = solution_to_json(s, pools, *vocab);
            e.rendered = render(s, pools, *vocab);
            test_points.push_back(e.test);
            out.frontier.push_back(std::move(e));
        }
        out.hypervolume = hypervolume(test_points);

        // EOP sees exactly the labels the run acquired.
        try {
            std::vector<std::size_t> q(result.state.acquired().begin(), result.state.acquired().end());
            std::sort(q.begin(), q.end());
            out.eop = fit_eop(h_train, train_bin.true_label(), train_bin.protected_attr(), q);
            out.eop_test = expected_eop_objectives(*out.eop, h_test, test_bin.true_label(), test_bin.protected_attr());
        } catch (const DataError& e) {
            out.eop_error = e.what();
        }
        say(fmt::format("budget {}%: |Q|={} generations={} |F*|={} selected={} test HV={:.4f}",
                        budget_label(out.fraction), result.state.used(), out.generations, out.frontier_size,
                        out.frontier.size(), out.hypervolume));
        report.budgets.push_back(std::move(out));
    }
    return report;
}

} // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, const ProgressSink& progress) {
    config.validate();
    ExperimentReport report;
    report.config = config;
    const DatasetSchema schema = DatasetSchema::load(config.schema);
    const Table table = load_dataset(config.dataset, schema);
    if (!table.label) throw SchemaError("experiments need a label column");
    config.run.validate(table.rows());
    report.dataset_sha256 = sha256_file(config.dataset);
    report.rows = table.rows();
    report.rejected_rows = table.rejected_rows;

    const auto splits = kfold_split(table.rows(), config.folds, derive_seed(*config.seed, 0));
    for (std::size_t f = 0; f < config.folds; ++f) {
        if (!config.only_folds.empty() &&
            std::find(config.only_folds.begin(), config.only_folds.end(), f) == config.only_folds.end())
            continue;
        try {
            report.folds.push_back(run_fold(config, table, splits[f], f, progress));
        } catch (const Error& e) {
            FoldReport failed;
            failed.fold = f;
            failed.valid = false;
            failed.error = e.what();
            if (progress) progress(fmt::format("fold {} failed: {}", f, e.what()));
            report.folds.push_back(std::move(failed));
        }
    }
    report.aggregates = aggregate(report);
    return report;
}

nlohmann::json ExperimentReport::summary() const {
    nlohmann::json doc;
    doc["manifest"] = {{"config", config.to_json()},
                       {"dataset_sha256", dataset_sha256},
                       {"rows", rows},
                       {"rejected_rows", rejected_rows},
                       {"validation_labels_charged", false},
                       {"budget_base", "training split"}};
    nlohmann::json folds_doc = nlohmann::json::array();
    for (const auto& f : folds) {
        nlohmann::json fd{{"fold", f.fold}, {"valid", f.valid}};
        if (!f.valid) {
            fd["error"] = f.error;
            folds_doc.push_back(std::move(fd));
            continue;
        }
        fd["rows"] = {{"train", f.train_rows}, {"validation", f.validation_rows}, {"test", f.test_rows}};
        fd["lambda"] = f.lambda ? nlohmann::json(*f.lambda) : nlohmann::json();
        fd["pools"] = {{"positive", f.positive_pool}, {"negative", f.negative_pool}};
        fd["baselines"] = {{"h", point_json(f.h_test)}, {"h_flip0", optional_point(f.h0_test)},
                           {"h_flip1", optional_point(f.h1_test)}};
        nlohmann::json budgets_doc = nlohmann::json::array();
        for (const auto& b : f.budgets) {
            nlohmann::json bd{{"fraction", b.fraction},           {"budget", b.budget},
                              {"batch", b.batch},                 {"generations", b.generations},
                              {"seed", b.seed},                   {"frontier_size", b.frontier_size},
                              {"selected", b.frontier.size()},    {"test_hypervolume", b.hypervolume}};
            bd["eop"] = {{"policy", b.eop ? b.eop->to_json() : nlohmann::json()},
                         {"test", optional_point(b.eop_test)}};
            if (!b.eop_error.empty()) bd["eop"]["error"] = b.eop_error;
            budgets_doc.push_back(std::move(bd));
        }
        fd["budgets"] = std::move(budgets_doc);
        folds_doc.push_back(std::move(fd));
    }
    doc["folds"] = std::move(folds_doc);
    nlohmann::json agg_doc = nlohmann::json::array();
    for (const auto& a : aggregates) {
        agg_doc.push_back({{"fraction", a.fraction},
                           {"folds", a.folds},
                           {"test_hypervolume_mean", a.hypervolume_mean},
                           {"test_hypervolume_std", a.hypervolume_std},
                           {"error_grid", a.error_grid},
                           {"bias_curve_mean", a.curve_mean},
                           {"bias_curve_std", a.curve_std},
                           {"eop_mean", optional_point(a.eop_mean)}});
    }
    doc["aggregates"] = std::move(agg_doc);
    return doc;
}

std::string frontier_csv(const ExperimentReport& report, std::size_t budget_index) {
    std::string out = "fold,solution_id,train_err,train_bias,val_err,val_bias,test_err,test_bias,coverage,n_rules\n";
    for (const auto& f : report.folds) {
        if (!f.valid || budget_index >= f.budgets.size()) continue;
        for (const auto& e : f.budgets[budget_index].frontier)
            out += fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{}\n", f.fold, e.id,
                               e.train.error, e.train.bias, e.validation.error, e.validation.bias, e.test.error,
                               e.test.bias, e.coverage, e.rules);
    }
    return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    out << content;
    if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

} // namespace

void export_frontier(const ExperimentReport& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
    for (std::size_t b = 0; b < report.config.budgets.size(); ++b) {
        const auto label = budget_label(report.config.budgets[b]);
        write_file(dir / fmt::format("frontier_b{}.csv", label), frontier_csv(report, b));
        std::string rules;
        for (const auto& f : report.folds) {
            if (!f.valid || b >= f.budgets.size()) continue;
            for (const auto& e : f.budgets[b].frontier)
                rules += fmt::format("# fold {} solution {} (test error {:.4f}, bias {:.4f})\n{}\n", f.fold, e.id,
                                     e.test.error, e.test.bias, e.rendered);
        }
        write_file(dir / fmt::format("rules_b{}.txt", label), rules);
    }
    write_file(dir / "summary.json", report.summary().dump(2) + "\n");
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

} // namespace aufair
