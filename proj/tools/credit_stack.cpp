// credit-stack: command-line front end for the credit library.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "credit/blend.hpp"
#include "credit/cv_stack.hpp"
#include "credit/error.hpp"
#include "credit/features.hpp"
#include "credit/gbdt.hpp"
#include "credit/ingest.hpp"
#include "credit/metric.hpp"
#include "credit/pipeline.hpp"
#include "credit/report.hpp"
#include "credit/synth.hpp"

namespace fs = std::filesystem;
using namespace credit;

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    int threads = 1;
    bool quiet = false;
};

int exit_code(ErrorCategory c) {
    switch (c) {
    case ErrorCategory::Config: return 2;
    case ErrorCategory::Data: return 3;
    case ErrorCategory::Training: return 4;
    }
    return 3;
}

void say(const Globals& g, const std::string& line) {
    if (!g.quiet) std::cout << line << '\n';
}

// Labels aligned to the matrix row order.
std::vector<int> aligned_labels(const FeatureMatrix& m, const fs::path& labels_path) {
    const LabelMap labels = load_labels(labels_path);
    std::vector<int> out;
    out.reserve(m.rows());
    for (const auto& id : m.customer_ids) {
        auto it = labels.find(id);
        if (it == labels.end()) throw Error(ErrorCode::MissingLabel, "no label for customer '" + id + "'");
        out.push_back(it->second);
    }
    return out;
}

TrainConfig load_train_config(const std::string& path, const Globals& g) {
    TrainConfig c = path.empty() ? TrainConfig{} : train_config_from_json(read_json(path));
    if (g.seed) c.seed = *g.seed;
    c.threads = g.threads;
    return c;
}

std::string metric_line(const std::string& label, const MetricReport& r) {
    return label + ": M=" + format_g17(r.M) + " G=" + format_g17(r.G) + " D=" + format_g17(r.D);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Credit-default prediction: ingest, features, boosting, stacking, blending, evaluation"};
    app.require_subcommand(1);
    Globals g;
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "Override every seed in the command's configuration");
    app.add_option("--threads", g.threads, "Worker threads (outputs never depend on this)")->check(CLI::PositiveNumber);
    app.add_flag("--quiet", g.quiet, "Suppress progress output");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic statement dataset");
    std::string synth_config;
    std::string out_data;
    std::string out_labels;
    std::string out_schema;
    synth->add_option("--config", synth_config, "SynthConfig JSON (defaults when omitted)");
    synth->add_option("--out-data", out_data, "Statement CSV")->required();
    synth->add_option("--out-labels", out_labels, "Label CSV")->required();
    synth->add_option("--out-schema", out_schema, "Schema JSON for the generated columns");

    // prep
    auto* prep = app.add_subcommand("prep", "Parse, mask outliers, denoise, and compact a statement CSV");
    std::string prep_input;
    std::string prep_schema;
    double precision = 0.01;
    std::vector<std::string> prep_columns;
    std::string prep_out;
    prep->add_option("--input", prep_input)->required();
    prep->add_option("--schema", prep_schema)->required();
    prep->add_option("--precision", precision, "Rounding step");
    prep->add_option("--columns", prep_columns, "Continuous columns to round (default: all)");
    prep->add_option("--out", prep_out, "Cleaned CSV")->required();

    // features
    auto* feat = app.add_subcommand("features", "Aggregate statements into a per-customer feature matrix");
    std::string feat_input;
    std::string feat_schema;
    std::string feat_spec;
    std::optional<int> feat_window;
    std::string feat_encode;
    std::string vocab_in;
    std::string vocab_out;
    std::string feat_out;
    feat->add_option("--input", feat_input, "Cleaned statement CSV")->required();
    feat->add_option("--schema", feat_schema)->required();
    feat->add_option("--spec", feat_spec, "AggregationSpec JSON (full spec when omitted)");
    feat->add_option("--window", feat_window, "Keep only the k most recent statements");
    feat->add_option("--encode", feat_encode, "Categorical encoding")->check(CLI::IsMember({"none", "ordinal", "one-hot"}));
    feat->add_option("--vocab-in", vocab_in, "Reuse a training vocabulary for one-hot columns");
    feat->add_option("--vocab-out", vocab_out, "Write the fitted vocabulary");
    feat->add_option("--out", feat_out, "CSFM matrix")->required();

    // train
    auto* trn = app.add_subcommand("train", "Train one boosted model");
    std::string trn_features;
    std::string trn_labels;
    std::string trn_config;
    std::string trn_model;
    std::string trn_valid_features;
    std::string trn_valid_labels;
    trn->add_option("--features", trn_features)->required();
    trn->add_option("--labels", trn_labels)->required();
    trn->add_option("--config", trn_config, "TrainConfig JSON");
    trn->add_option("--model-out", trn_model)->required();
    trn->add_option("--valid-features", trn_valid_features, "Holdout matrix for early stopping");
    trn->add_option("--valid-labels", trn_valid_labels);

    // stack
    auto* stk = app.add_subcommand("stack", "Out-of-fold base training plus a stacked meta model");
    std::string stk_features;
    std::string stk_labels;
    int stk_folds = 5;
    std::string stk_base;
    std::string stk_meta;
    std::string stk_out;
    stk->add_option("--features", stk_features)->required();
    stk->add_option("--labels", stk_labels)->required();
    stk->add_option("--folds", stk_folds)->check(CLI::Range(2, 1000));
    stk->add_option("--base-config", stk_base);
    stk->add_option("--meta-config", stk_meta);
    stk->add_option("--out", stk_out, "Output directory")->required();

    // blend
    auto* bld = app.add_subcommand("blend", "Search convex blend weights");
    std::vector<std::string> bld_preds;
    std::string bld_labels;
    double bld_step = 0.01;
    std::string bld_out;
    bld->add_option("--pred", bld_preds, "Member prediction CSV (repeat)")->required();
    bld->add_option("--labels", bld_labels)->required();
    bld->add_option("--step", bld_step);
    bld->add_option("--out", bld_out, "EnsembleSpec JSON")->required();

    // eval
    auto* evl = app.add_subcommand("eval", "Score predictions with the composite metric");
    std::string evl_pred;
    std::string evl_labels;
    std::string evl_out;
    evl->add_option("--pred", evl_pred)->required();
    evl->add_option("--labels", evl_labels)->required();
    evl->add_option("--report,--out", evl_out, "MetricReport JSON");

    // importance
    auto* imp = app.add_subcommand("importance", "Per-fold importance report and box plot");
    std::vector<std::string> imp_models;
    std::string imp_kind = "total_gain";
    std::size_t imp_top = 20;
    std::string imp_out;
    imp->add_option("--model", imp_models, "Fold model JSON (repeat, at least two)")->required();
    imp->add_option("--kind", imp_kind)->check(CLI::IsMember({"average_gain", "total_gain"}));
    imp->add_option("--top-n", imp_top);
    imp->add_option("--out", imp_out, "Output directory")->required();

    // run
    auto* run = app.add_subcommand("run", "Run the full pipeline from one configuration file");
    std::string run_config;
    std::string run_out;
    run->add_option("--config", run_config)->required();
    run->add_option("--out", run_out, "Override output_dir");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    if (*seed_opt) g.seed = seed_value;

    try {
        if (*synth) {
            SynthConfig c = synth_config.empty() ? SynthConfig{} : synth_config_from_json(read_json(synth_config));
            if (g.seed) c.seed = *g.seed;
            const SynthData d = generate(c);
            write_file(out_data, table_to_csv(d.table));
            write_file(out_labels, labels_to_csv(d.customers, d.labels));
            if (!out_schema.empty()) write_file(out_schema, dump_json(schema_to_json(synth_schema(c))));
            say(g, "synth: " + std::to_string(d.customers.size()) + " customers, " + std::to_string(d.table.rows()) +
                       " statements, " + std::to_string(std::count(d.labels.begin(), d.labels.end(), 1)) + " positives");
        } else if (*prep) {
            const Schema schema = load_schema(prep_schema);
            const MaskResult masked = mask_outliers(parse_csv(prep_input, schema), schema);
            const StatementTable clean = compact_types(denoise_round(masked.table, precision, prep_columns), schema);
            write_file(prep_out, table_to_csv(clean));
            say(g, "prep: " + std::to_string(clean.rows()) + " statements, " + std::to_string(clean.customers().size()) +
                       " customers");
        } else if (*feat) {
            const Schema schema = load_schema(feat_schema);
            AggregationSpec spec = feat_spec.empty() ? AggregationSpec::full() : aggregation_spec_from_json(read_json(feat_spec));
            if (feat_window) spec.recent_window = *feat_window;
            if (feat_encode == "none") spec.encoding = Encoding::None;
            if (feat_encode == "ordinal") spec.encoding = Encoding::Ordinal;
            if (feat_encode == "one-hot") spec.encoding = Encoding::OneHot;
            spec.validate();
            std::optional<CategoricalVocabulary> vocab;
            if (!vocab_in.empty()) vocab = vocabulary_from_json(read_json(vocab_in));
            BuildOptions options;
            if (vocab) {
                options.vocabulary = &*vocab;
                options.fit_vocabulary = false;
            }
            const BuiltMatrix built = build_matrix(parse_csv(feat_input, schema), spec, options);
            save_matrix(feat_out, built.matrix);
            if (!vocab_out.empty()) write_file(vocab_out, dump_json(to_json(built.vocabulary)));
            say(g, "features: " + std::to_string(built.matrix.rows()) + " x " + std::to_string(built.matrix.cols()));
        } else if (*trn) {
            const FeatureMatrix m = load_matrix(trn_features);
            const std::vector<int> labels = aligned_labels(m, trn_labels);
            const TrainConfig c = load_train_config(trn_config, g);
            std::optional<FeatureMatrix> vm;
            std::vector<int> vl;
            std::optional<Holdout> holdout;
            if (!trn_valid_features.empty()) {
                if (trn_valid_labels.empty()) throw Error(ErrorCode::InvalidConfig, "--valid-features needs --valid-labels");
                vm = load_matrix(trn_valid_features);
                vl = aligned_labels(*vm, trn_valid_labels);
                holdout.emplace(Holdout{*vm, vl});
            }
            const BoostedModel model = train(m, labels, c, holdout);
            save_model(trn_model, model);
            say(g, metric_line("train", amex_metric(labels, predict(model, m))) + " trees=" +
                       std::to_string(model.trees.size()));
        } else if (*stk) {
            const FeatureMatrix m = load_matrix(stk_features);
            const std::vector<int> labels = aligned_labels(m, stk_labels);
            const std::uint64_t seed = g.seed.value_or(0);
            const TrainConfig base = load_train_config(stk_base, g);
            const TrainConfig meta = load_train_config(stk_meta, g);
            const fs::path dir(stk_out);
            const FoldPlan plan = make_folds(labels, stk_folds, seed);
            write_file(dir / "folds.csv", fold_plan_to_csv(plan));
            const OofResult base_fit = train_oof(m, labels, plan, base);
            for (std::size_t f = 0; f < base_fit.models.size(); ++f) {
                save_model(dir / ("base_fold_" + std::to_string(f) + ".model.json"), base_fit.models[f]);
            }
            write_file(dir / "base_oof.csv", predictions_to_csv(m.customer_ids, base_fit.oof.prediction));
            const std::vector<std::vector<double>> meta_cols{base_fit.oof.prediction};
            const FeatureMatrix augmented = append_meta(m, meta_cols);
            save_matrix(dir / "augmented.csfm", augmented);
            const OofResult meta_fit = train_meta(augmented, labels, plan, meta);
            for (std::size_t f = 0; f < meta_fit.models.size(); ++f) {
                save_model(dir / ("meta_fold_" + std::to_string(f) + ".model.json"), meta_fit.models[f]);
            }
            write_file(dir / "meta_oof.csv", predictions_to_csv(m.customer_ids, meta_fit.oof.prediction));
            Json metrics;
            metrics["base_oof"] = to_json(amex_metric(labels, base_fit.oof.prediction));
            metrics["meta_oof"] = to_json(amex_metric(labels, meta_fit.oof.prediction));
            write_file(dir / "metrics.json", dump_json(metrics));
            say(g, metric_line("base oof", amex_metric(labels, base_fit.oof.prediction)));
            say(g, metric_line("meta oof", amex_metric(labels, meta_fit.oof.prediction)));
        } else if (*bld) {
            const LabelMap label_map = load_labels(bld_labels);
            std::vector<std::vector<double>> preds;
            std::vector<std::string> names;
            std::vector<std::string> ids;
            for (const auto& path : bld_preds) {
                const auto rows = read_predictions(path);
                std::vector<std::string> these;
                std::vector<double> p;
                for (const auto& [id, v] : rows) {
                    these.push_back(id);
                    p.push_back(v);
                }
                if (ids.empty()) ids = these;
                if (these != ids) throw Error(ErrorCode::LengthMismatch, path + ": customer order differs from the first file");
                preds.push_back(std::move(p));
                names.push_back(fs::path(path).stem().string());
            }
            std::vector<int> labels;
            for (const auto& id : ids) {
                auto it = label_map.find(id);
                if (it == label_map.end()) throw Error(ErrorCode::MissingLabel, "no label for customer '" + id + "'");
                labels.push_back(it->second);
            }
            BlendSearchOptions options;
            options.step = bld_step;
            options.threads = g.threads;
            const BlendResult r = optimize_weights(preds, labels, names, options);
            write_file(bld_out, dump_json(to_json(r.spec)));
            say(g, "blend: M=" + format_g17(r.M) + " after " + std::to_string(r.evaluations) + " evaluations");
        } else if (*evl) {
            const LabelMap label_map = load_labels(evl_labels);
            std::vector<int> labels;
            std::vector<double> preds;
            for (const auto& [id, v] : read_predictions(evl_pred)) {
                auto it = label_map.find(id);
                if (it == label_map.end()) throw Error(ErrorCode::MissingLabel, "no label for customer '" + id + "'");
                labels.push_back(it->second);
                preds.push_back(v);
            }
            const MetricReport r = amex_metric(labels, preds);
            if (!evl_out.empty()) write_file(evl_out, dump_json(to_json(r)));
            say(g, metric_line("eval", r));
        } else if (*imp) {
            std::vector<BoostedModel> models;
            for (const auto& path : imp_models) models.push_back(load_model(path));
            const ImportanceReport report = build_importance_report(models, importance_kind_from(imp_kind));
            const fs::path dir(imp_out);
            write_file(dir / "importance.json", dump_json(to_json(report)));
            write_file(dir / "importance.csv", summary_to_csv(report));
            write_file(dir / "importance.svg", render_box_plot(report, imp_top));
            say(g, "importance: " + std::to_string(report.columns.size()) + " columns over " +
                       std::to_string(models.size()) + " folds");
        } else if (*run) {
            PipelineConfig c = load_pipeline_config(run_config);
            if (g.seed) c.seed = *g.seed;
            if (!run_out.empty()) c.output_dir = run_out;
            c.threads = g.threads;
            const PipelineResult r = run_pipeline(c);
            for (const auto& m : r.members) say(g, metric_line(m.name + " holdout", m.holdout));
            say(g, metric_line("ensemble holdout", r.ensemble_holdout));
            say(g, "run: " + std::to_string(r.files.size() + 1) + " files in " + r.run_dir.string());
        }
    } catch (const Error& e) {
        std::cerr << "credit-stack: " << e.what() << '\n';
        return exit_code(e.category());
    } catch (const std::exception& e) {
        std::cerr << "credit-stack: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
