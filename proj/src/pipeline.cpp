#include "credit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "credit/blend.hpp"
#include "credit/cv_stack.hpp"
#include "credit/error.hpp"
#include "credit/ingest.hpp"
#include "credit/report.hpp"

namespace credit {

namespace {

constexpr std::uint64_t kSplitStream = 0x5DEECE66DULL;

bool valid_member_name(const std::string& name) {
    if (name.empty() || name == "ensemble") return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    });
}

class RunWriter {
public:
    explicit RunWriter(std::filesystem::path root) : root_(std::move(root)) {}

    void write(const std::string& rel, std::string_view bytes) {
        write_file(root_ / rel, bytes);
        files_[rel] = {bytes.size(), sha256_hex(bytes)};
    }
    void write_json(const std::string& rel, const Json& doc) { write(rel, dump_json(doc)); }

    /// path -> (size, digest), sorted by path.
    const std::map<std::string, std::pair<std::size_t, std::string>>& files() const { return files_; }
    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path root_;
    std::map<std::string, std::pair<std::size_t, std::string>> files_;
};

template <class Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.code(), std::string("stage ") + name + ": " + e.detail());
    } catch (const std::exception& e) {
        throw Error(ErrorCode::Io, std::string("stage ") + name + ": " + e.what());
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

// Stratified: each class is shuffled on its own and the first
// ceil(fraction * count) of it goes to the holdout.
std::vector<bool> holdout_mask(const std::vector<int>& target, double fraction, std::uint64_t seed) {
    std::vector<bool> mask(target.size(), false);
    Rng rng(seed ^ kSplitStream);
    for (int cls : {1, 0}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < target.size(); ++i) {
            if (target[i] == cls) idx.push_back(i);
        }
        rng.shuffle(idx);
        const auto take = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(idx.size()) - 1e-9));
        for (std::size_t i = 0; i < take && i < idx.size(); ++i) mask[idx[i]] = true;
    }
    return mask;
}

Json metrics_doc(const MetricReport& oof, const MetricReport& holdout) {
    Json doc;
    doc["oof"] = to_json(oof);
    doc["holdout"] = to_json(holdout);
    return doc;
}

} // namespace

void PipelineConfig::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
    if (data.empty() || labels.empty() || schema.empty() || output_dir.empty()) {
        fail("data, labels, schema, and output_dir are required");
    }
    if (!(precision > 0.0)) throw Error(ErrorCode::NonPositivePrecision, "precision must be > 0");
    if (folds < 2) fail("folds must be >= 2");
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) fail("holdout_fraction must be in (0, 1)");
    if (!(blend_step > 0.0 && blend_step <= 1.0)) fail("blend_step must be in (0, 1]");
    if (threads < 1) fail("threads must be >= 1");
    if (reports.top_n < 1) fail("reports.top_n must be >= 1");
    features.validate();
    if (members.empty()) fail("at least one member is required");
    std::set<std::string> seen;
    for (const auto& m : members) {
        if (!valid_member_name(m.name)) fail("member name '" + m.name + "' must be [A-Za-z0-9_-]+ and not 'ensemble'");
        if (m.features) m.features->validate();
        m.learner.validate();
        for (const auto& src : m.meta_from) {
            if (!seen.count(src)) fail("member '" + m.name + "' stacks on '" + src + "', which is not an earlier member");
        }
        if (!seen.insert(m.name).second) fail("duplicate member name '" + m.name + "'");
    }
}

PipelineConfig pipeline_config_from_json(const Json& doc, const std::filesystem::path& base_dir) {
    PipelineConfig c;
    try {
        c.data = resolve(base_dir, doc.at("data").get<std::string>());
        c.labels = resolve(base_dir, doc.at("labels").get<std::string>());
        c.schema = resolve(base_dir, doc.at("schema").get<std::string>());
        c.output_dir = resolve(base_dir, doc.at("output_dir").get<std::string>());
        c.precision = doc.value("precision", c.precision);
        if (doc.contains("denoise_columns")) c.denoise_columns = doc["denoise_columns"].get<std::vector<std::string>>();
        c.folds = doc.value("folds", c.folds);
        c.seed = doc.value("seed", c.seed);
        c.holdout_fraction = doc.value("holdout_fraction", c.holdout_fraction);
        c.blend_step = doc.value("blend_step", c.blend_step);
        c.threads = doc.value("threads", c.threads);
        if (doc.contains("features")) c.features = aggregation_spec_from_json(doc["features"]);
        for (const auto& m : doc.at("members")) {
            MemberConfig member;
            member.name = m.at("name").get<std::string>();
            if (m.contains("features")) member.features = aggregation_spec_from_json(m["features"]);
            if (m.contains("learner")) member.learner = train_config_from_json(m["learner"]);
            if (m.contains("meta_from")) member.meta_from = m["meta_from"].get<std::vector<std::string>>();
            const std::string test_path = m.value("test_path", std::string("fold_mean"));
            if (test_path != "fold_mean" && test_path != "refit") {
                throw Error(ErrorCode::InvalidConfig, "test_path must be fold_mean or refit");
            }
            member.refit = test_path == "refit";
            c.members.push_back(std::move(member));
        }
        if (doc.contains("reports")) {
            const auto& r = doc["reports"];
            c.reports.importance = r.value("importance", c.reports.importance);
            if (r.contains("kind")) c.reports.kind = importance_kind_from(r["kind"].get<std::string>());
            c.reports.top_n = r.value("top_n", c.reports.top_n);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("pipeline config: ") + e.what());
    }
    c.validate();
    return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    return pipeline_config_from_json(read_json(path), path.parent_path());
}

Json to_json(const PipelineConfig& c) {
    Json doc;
    doc["data"] = c.data.generic_string();
    doc["labels"] = c.labels.generic_string();
    doc["schema"] = c.schema.generic_string();
    doc["precision"] = c.precision;
    doc["denoise_columns"] = c.denoise_columns;
    doc["folds"] = c.folds;
    doc["seed"] = c.seed;
    doc["holdout_fraction"] = c.holdout_fraction;
    doc["blend_step"] = c.blend_step;
    doc["features"] = to_json(c.features);
    doc["members"] = Json::array();
    for (const auto& m : c.members) {
        Json j;
        j["name"] = m.name;
        if (m.features) j["features"] = to_json(*m.features);
        Json learner = to_json(m.learner);
        learner.erase("threads");
        j["learner"] = std::move(learner);
        j["meta_from"] = m.meta_from;
        j["test_path"] = m.refit ? "refit" : "fold_mean";
        doc["members"].push_back(std::move(j));
    }
    doc["reports"]["importance"] = c.reports.importance;
    doc["reports"]["kind"] = to_string(c.reports.kind);
    doc["reports"]["top_n"] = c.reports.top_n;
    return doc;
}

std::string predictions_to_csv(const std::vector<std::string>& customers, const std::vector<double>& probabilities) {
    if (customers.size() != probabilities.size()) {
        throw Error(ErrorCode::LengthMismatch, "one probability per customer required");
    }
    std::string out = "customer_id,probability\n";
    for (std::size_t i = 0; i < customers.size(); ++i) {
        out += customers[i] + "," + format_g17(probabilities[i]) + "\n";
    }
    return out;
}

std::vector<std::pair<std::string, double>> read_predictions(const std::filesystem::path& path) {
    const CsvFile csv = read_csv(path);
    if (csv.header.size() != 2) throw Error(ErrorCode::InvalidData, path.string() + ": expected customer_id,probability");
    std::vector<std::pair<std::string, double>> out;
    for (const auto& row : csv.rows) {
        double p = 0.0;
        if (row.size() != 2 || !parse_double(row[1], p) || !std::isfinite(p)) {
            throw Error(ErrorCode::InvalidData, path.string() + ": bad prediction row for '" +
                                                    (row.empty() ? std::string() : row[0]) + "'");
        }
        out.emplace_back(row[0], p);
    }
    return out;
}

PipelineResult run_pipeline(const PipelineConfig& config) {
    config.validate();
    RunWriter out(config.output_dir);
    PipelineResult result;
    result.run_dir = config.output_dir;

    out.write_json("config.json", to_json(config));

    // Prep: mask -> denoise -> compact, then attach labels.
    const LabeledTable labeled = stage("prep", [&] {
        const Schema schema = load_schema(config.schema);
        const StatementTable raw = parse_csv(config.data, schema);
        MaskResult masked = mask_outliers(raw, schema);
        const StatementTable rounded = denoise_round(masked.table, config.precision, config.denoise_columns);
        const StatementTable compact = compact_types(rounded, schema);
        LabeledTable joined = join_labels(compact, load_labels(config.labels));

        Json summary;
        summary["statements"] = compact.rows();
        summary["customers"] = joined.customers.size();
        summary["positives"] = std::count(joined.target.begin(), joined.target.end(), 1);
        summary["unmatched_labels"] = joined.unmatched_labels;
        Json masked_counts = Json::object();
        for (std::size_t c = 0; c < schema.size(); ++c) {
            if (masked.masked[c] > 0) masked_counts[schema[c].name] = masked.masked[c];
        }
        summary["masked"] = std::move(masked_counts);
        Json storage = Json::object();
        for (std::size_t c = 0; c < schema.size(); ++c) storage[schema[c].name] = compact.columns[c].storage_name();
        summary["storage"] = std::move(storage);
        out.write_json("prep/summary.json", summary);
        out.write("prep/clean.csv", table_to_csv(compact));
        return joined;
    });

    // Holdout split and fold plan over the training customers.
    std::vector<std::size_t> train_pos;
    std::vector<std::size_t> holdout_pos;
    const auto split = stage("split", [&] {
        const auto mask = holdout_mask(labeled.target, config.holdout_fraction, config.seed);
        std::string csv = "customer_id,set\n";
        for (std::size_t i = 0; i < mask.size(); ++i) {
            (mask[i] ? holdout_pos : train_pos).push_back(i);
            csv += labeled.customers[i] + (mask[i] ? ",holdout\n" : ",train\n");
        }
        out.write("split.csv", csv);
        LabeledTable train = select_customers(labeled, train_pos);
        LabeledTable holdout = select_customers(labeled, holdout_pos);
        if (std::count(holdout.target.begin(), holdout.target.end(), 1) == 0) {
            throw Error(ErrorCode::NoPositives, "holdout split has no positive customers");
        }
        FoldPlan plan = make_folds(train.target, config.folds, config.seed);
        out.write("folds.csv", fold_plan_to_csv(plan));
        return std::make_tuple(std::move(train), std::move(holdout), std::move(plan));
    });
    const LabeledTable& train = std::get<0>(split);
    const LabeledTable& holdout = std::get<1>(split);
    const FoldPlan& plan = std::get<2>(split);

    std::map<std::string, std::vector<double>> oof_by_member;
    std::map<std::string, std::vector<double>> holdout_by_member;
    std::map<std::string, std::vector<BoostedModel>> models_by_member;

    for (const auto& member : config.members) {
        const std::string dir = "members/" + member.name + "/";
        const std::string stage_name = "member " + member.name;

        auto [train_matrix, holdout_matrix] = stage((stage_name + " features").c_str(), [&] {
            const AggregationSpec& spec = member.features ? *member.features : config.features;
            BuiltMatrix tr = build_matrix(train, spec);
            BuildOptions reuse;
            reuse.vocabulary = &tr.vocabulary;
            reuse.fit_vocabulary = false;
            BuiltMatrix ho = build_matrix(holdout, spec, reuse);
            if (!member.meta_from.empty()) {
                std::vector<std::vector<double>> tr_meta;
                std::vector<std::vector<double>> ho_meta;
                for (const auto& src : member.meta_from) {
                    tr_meta.push_back(oof_by_member.at(src));
                    ho_meta.push_back(holdout_by_member.at(src));
                }
                tr.matrix = append_meta(tr.matrix, tr_meta);
                ho.matrix = append_meta(ho.matrix, ho_meta);
            }
            out.write_json(dir + "vocabulary.json", to_json(tr.vocabulary));
            out.write(dir + "features_train.csfm", serialize_matrix(tr.matrix));
            out.write(dir + "features_holdout.csfm", serialize_matrix(ho.matrix));
            return std::make_pair(std::move(tr.matrix), std::move(ho.matrix));
        });

        stage((stage_name + " training").c_str(), [&] {
            TrainConfig learner = member.learner;
            learner.seed = member.learner.seed + config.seed;
            learner.threads = config.threads;
            OofResult fitted = member.meta_from.empty() ? train_oof(train_matrix, train.target, plan, learner)
                                                        : train_meta(train_matrix, train.target, plan, learner);
            std::vector<double> ho_pred;
            if (member.refit) {
                const BoostedModel full = credit::train(train_matrix, train.target, learner);
                out.write_json(dir + "refit.model.json", model_to_json(full));
                ho_pred = predict(full, holdout_matrix);
            } else {
                ho_pred = predict_with_fold_models(fitted.models, holdout_matrix);
            }
            for (std::size_t f = 0; f < fitted.models.size(); ++f) {
                out.write_json(dir + "fold_" + std::to_string(f) + ".model.json", model_to_json(fitted.models[f]));
            }
            out.write(dir + "oof.csv", predictions_to_csv(train.customers, fitted.oof.prediction));
            out.write(dir + "holdout.csv", predictions_to_csv(holdout.customers, ho_pred));

            MemberResult mr;
            mr.name = member.name;
            mr.oof = amex_metric(train.target, fitted.oof.prediction);
            mr.holdout = amex_metric(holdout.target, ho_pred);
            out.write_json(dir + "metrics.json", metrics_doc(mr.oof, mr.holdout));
            result.members.push_back(mr);

            oof_by_member[member.name] = std::move(fitted.oof.prediction);
            holdout_by_member[member.name] = std::move(ho_pred);
            models_by_member[member.name] = std::move(fitted.models);
            return 0;
        });
    }

    // Blend weights are searched on out-of-fold predictions only.
    stage("blend", [&] {
        std::vector<std::string> names;
        std::vector<std::vector<double>> oof_preds;
        std::vector<std::vector<double>> ho_preds;
        for (const auto& m : config.members) {
            names.push_back(m.name);
            oof_preds.push_back(oof_by_member.at(m.name));
            ho_preds.push_back(holdout_by_member.at(m.name));
        }
        EnsembleSpec spec;
        if (names.size() >= 2) {
            BlendSearchOptions options;
            options.step = config.blend_step;
            options.threads = config.threads;
            spec = optimize_weights(oof_preds, train.target, names, options).spec;
        } else {
            spec.member_names = names;
            spec.weights = {1.0};
        }
        const auto ens_oof = blend(oof_preds, spec.weights);
        const auto ens_ho = blend(ho_preds, spec.weights);
        result.weights = spec.weights;
        result.ensemble_oof = amex_metric(train.target, ens_oof);
        result.ensemble_holdout = amex_metric(holdout.target, ens_ho);
        out.write_json("ensemble/spec.json", to_json(spec));
        out.write("ensemble/oof.csv", predictions_to_csv(train.customers, ens_oof));
        out.write("ensemble/holdout.csv", predictions_to_csv(holdout.customers, ens_ho));
        out.write_json("ensemble/metrics.json", metrics_doc(result.ensemble_oof, result.ensemble_holdout));
        return 0;
    });

    stage("reports", [&] {
        Json summary;
        summary["members"] = Json::object();
        for (const auto& m : result.members) summary["members"][m.name] = metrics_doc(m.oof, m.holdout);
        summary["ensemble"] = metrics_doc(result.ensemble_oof, result.ensemble_holdout);
        summary["weights"] = Json::object();
        for (std::size_t i = 0; i < config.members.size(); ++i) {
            summary["weights"][config.members[i].name] = result.weights[i];
        }
        out.write_json("reports/metrics.json", summary);
        if (config.reports.importance) {
            for (const auto& m : config.members) {
                const auto& models = models_by_member.at(m.name);
                const ImportanceReport report = build_importance_report(models, config.reports.kind);
                const std::string stem = "reports/" + m.name + "_importance";
                out.write_json(stem + ".json", to_json(report));
                out.write(stem + ".csv", summary_to_csv(report));
                if (!report.columns.empty()) out.write(stem + ".svg", render_box_plot(report, config.reports.top_n));
            }
        }
        return 0;
    });

    stage("manifest", [&] {
        Json manifest;
        manifest["files"] = Json::array();
        for (const auto& [rel, info] : out.files()) {
            Json entry;
            entry["path"] = rel;
            entry["bytes"] = info.first;
            entry["sha256"] = info.second;
            manifest["files"].push_back(std::move(entry));
            result.files.push_back(rel);
        }
        write_file(out.root() / "manifest.json", dump_json(manifest));
        return 0;
    });
    return result;
}

} // namespace credit
