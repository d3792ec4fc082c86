#include "tsens/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tsens {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[noreturn]] void config_error(const std::string& field, const std::string& message) {
    throw TsError("config field " + field + ": " + message);
}

const json& require(const json& j, const std::string& key, const std::string& path) {
    const auto it = j.find(key);
    if (it == j.end()) config_error(path + key, "missing");
    return *it;
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) config_error(path, "expected a number");
    return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) config_error(path, "expected an integer");
    return j.get<int>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) config_error(path, "expected a string");
    return j.get<std::string>();
}

TransformSpec parse_transform(const json& j, const std::string& path) {
    TransformSpec spec;
    const std::string kind = as_string(require(j, "kind", path + "."), path + ".kind");
    if (kind == "log10") {
        spec.kind = TransformKind::Log10;
    } else if (kind == "linear-rescale") {
        spec.kind = TransformKind::LinearRescale;
        spec.src_min = as_number(require(j, "src_min", path + "."), path + ".src_min");
        spec.src_max = as_number(require(j, "src_max", path + "."), path + ".src_max");
        spec.dst_min = as_number(require(j, "dst_min", path + "."), path + ".dst_min");
        spec.dst_max = as_number(require(j, "dst_max", path + "."), path + ".dst_max");
    } else {
        config_error(path + ".kind", "unknown transform '" + kind + "'");
    }
    spec.validate();
    return spec;
}

std::vector<TransformSpec> parse_transforms(const json& j, const std::string& path) {
    if (!j.is_array()) config_error(path, "expected an array");
    std::vector<TransformSpec> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(parse_transform(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

TrainerSpec parse_trainer(const json& j, const std::string& path, int default_epochs) {
    TrainerSpec spec;
    spec.kind = kind_from_name(as_string(require(j, "kind", path + "."), path + ".kind"));
    spec.max_epochs = default_epochs;
    for (const auto& [key, value] : j.items()) {
        if (key == "kind") continue;
        const std::string field = path + "." + key;
        auto& hp = spec.hyper;
        if (key == "epochs" || key == "max_epochs") spec.max_epochs = as_int(value, field);
        else if (key == "loss_floor") spec.loss_floor = as_number(value, field);
        else if (key == "stagnation_window") spec.stagnation_window = as_int(value, field);
        else if (key == "learning_rate") hp.learning_rate = as_number(value, field);
        else if (key == "momentum") hp.momentum = as_number(value, field);
        else if (key == "rprop_delta0") hp.rprop_delta0 = as_number(value, field);
        else if (key == "rprop_eta_plus") hp.rprop_eta_plus = as_number(value, field);
        else if (key == "rprop_eta_minus") hp.rprop_eta_minus = as_number(value, field);
        else if (key == "rprop_delta_min") hp.rprop_delta_min = as_number(value, field);
        else if (key == "rprop_delta_max") hp.rprop_delta_max = as_number(value, field);
        else if (key == "scg_sigma") hp.scg_sigma = as_number(value, field);
        else if (key == "scg_lambda0") hp.scg_lambda0 = as_number(value, field);
        else if (key == "lm_mu0") hp.lm_mu0 = as_number(value, field);
        else if (key == "lm_mu_factor") hp.lm_mu_factor = as_number(value, field);
        else if (key == "lm_mu_max") hp.lm_mu_max = as_number(value, field);
        else if (key == "ls_armijo_c") hp.ls_armijo_c = as_number(value, field);
        else if (key == "ls_backtrack") hp.ls_backtrack = as_number(value, field);
        else if (key == "ls_max_backtracks") hp.ls_max_backtracks = as_int(value, field);
        else if (key == "pso_particles") hp.pso_particles = as_int(value, field);
        else if (key == "pso_a") hp.pso_a = as_number(value, field);
        else if (key == "pso_b") hp.pso_b = as_number(value, field);
        else if (key == "pso_pos_lo") hp.pso_pos_lo = as_number(value, field);
        else if (key == "pso_pos_hi") hp.pso_pos_hi = as_number(value, field);
        else if (key == "pso_vel_lo") hp.pso_vel_lo = as_number(value, field);
        else if (key == "pso_vel_hi") hp.pso_vel_hi = as_number(value, field);
        else if (key == "pso_vmax") hp.pso_vmax = as_number(value, field);
        else config_error(field, "unknown trainer option");
    }
    spec.validate();
    return spec;
}

json transform_to_json(const TransformSpec& t) {
    if (t.kind == TransformKind::Log10) return json{{"kind", "log10"}};
    return json{{"kind", "linear-rescale"}, {"src_min", t.src_min}, {"src_max", t.src_max},
                {"dst_min", t.dst_min},     {"dst_max", t.dst_max}};
}

json triple_to_json(const ErrorTriple& e) {
    return json{{"mae", e.mae}, {"mse", e.mse}, {"mape", e.mape}};
}

ErrorTriple triple_from_json(const json& j) {
    return ErrorTriple{j.at("mae").get<double>(), j.at("mse").get<double>(),
                       j.at("mape").get<double>()};
}

} // namespace

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TsError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw TsError("config " + path + " is not valid JSON: " + e.what());
    }

    ExperimentConfig cfg;
    cfg.config_path = path;

    const fs::path base = fs::path(path).parent_path();
    cfg.dataset = (base / as_string(require(j, "dataset", ""), "dataset")).string();

    if (j.contains("transforms")) cfg.transforms = parse_transforms(j["transforms"], "transforms");

    const json& split = require(j, "split", "");
    cfg.split.train_len = as_int(require(split, "train", "split."), "split.train");
    cfg.split.validation_len = as_int(require(split, "validation", "split."), "split.validation");
    cfg.split.test_len = as_int(require(split, "test", "split."), "split.test");

    const json& network = require(j, "network", "");
    if (network.contains("sann") && network["sann"].get<bool>()) {
        cfg.sann = true;
        const int s = as_int(require(network, "s", "network."), "network.s");
        const int h = as_int(require(network, "h", "network."), "network.h");
        cfg.network = NetworkConfig(s, h, s);
    } else {
        cfg.network = NetworkConfig(as_int(require(network, "p", "network."), "network.p"),
                                    as_int(require(network, "h", "network."), "network.h"),
                                    as_int(require(network, "q", "network."), "network.q"));
    }

    const int epochs = j.contains("epochs") ? as_int(j["epochs"], "epochs") : 2000;
    const json& trainers = require(j, "trainers", "");
    if (!trainers.is_array() || trainers.empty()) config_error("trainers", "expected a non-empty array");
    for (std::size_t i = 0; i < trainers.size(); ++i)
        cfg.trainers.push_back(
            parse_trainer(trainers[i], "trainers[" + std::to_string(i) + "]", epochs));

    if (j.contains("restarts")) cfg.restarts = as_int(j["restarts"], "restarts");
    if (cfg.restarts < 1) config_error("restarts", "must be >= 1");
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("warm_start")) cfg.warm_start = j["warm_start"].get<bool>();
    if (j.contains("threads")) cfg.threads = as_int(j["threads"], "threads");

    if (j.contains("baseline") && !j["baseline"].is_null()) {
        const json& b = j["baseline"];
        const std::string kind = as_string(require(b, "kind", "baseline."), "baseline.kind");
        if (kind == "none") {
            cfg.baseline.kind = BaselineConfig::Kind::None;
        } else if (kind == "ar") {
            cfg.baseline.kind = BaselineConfig::Kind::Ar;
            cfg.baseline.order = as_int(require(b, "order", "baseline."), "baseline.order");
        } else if (kind == "sarima") {
            cfg.baseline.kind = BaselineConfig::Kind::Sarima;
            cfg.baseline.season = as_int(require(b, "season", "baseline."), "baseline.season");
        } else {
            config_error("baseline.kind", "expected 'ar', 'sarima', or 'none'");
        }
        if (b.contains("transforms"))
            cfg.baseline.transforms = parse_transforms(b["transforms"], "baseline.transforms");
    }

    if (j.contains("loss_floor")) {
        if (j["loss_floor"].is_string()) {
            if (j["loss_floor"].get<std::string>() != "auto")
                config_error("loss_floor", "expected a number or 'auto'");
            cfg.auto_loss_floor = true;
        } else {
            cfg.loss_floor = as_number(j["loss_floor"], "loss_floor");
        }
    }

    if (j.contains("report")) {
        const json& r = j["report"];
        if (r.contains("scale")) {
            const json& scale = r["scale"];
            if (scale.is_string()) {
                if (scale == "working") cfg.report.depth = static_cast<int>(cfg.transforms.size());
                else if (scale == "original") cfg.report.depth = 0;
                else config_error("report.scale", "expected 'working', 'original', or a chain depth");
            } else {
                cfg.report.depth = as_int(scale, "report.scale");
                if (cfg.report.depth < 0 || cfg.report.depth > static_cast<int>(cfg.transforms.size()))
                    config_error("report.scale", "depth outside the transform chain");
            }
        }
        if (r.contains("mse_display_factor"))
            cfg.report.mse_display_factor = as_number(r["mse_display_factor"], "report.mse_display_factor");
    }
    if (cfg.report.depth < 0) cfg.report.depth = static_cast<int>(cfg.transforms.size());

    cfg.out_dir = j.contains("out_dir") ? as_string(j["out_dir"], "out_dir")
                                        : (fs::path("out") / fs::path(cfg.dataset).stem()).string();
    return cfg;
}

namespace {

/// Original-scale values mapped through the first `depth` chain entries.
std::vector<double> to_depth(std::span<const double> original,
                             const std::vector<TransformSpec>& chain, int depth) {
    std::vector<double> out(original.begin(), original.end());
    for (int i = 0; i < depth; ++i)
        for (double& v : out) v = chain[i].apply(v);
    return out;
}

} // namespace

std::string ReportConfig::label(int chain_length) const {
    if (depth == 0) return "original";
    if (depth == chain_length) return "working";
    return "chain-depth-" + std::to_string(depth);
}

ErrorTriple RunReport::reported_combined() const {
    const int depth = config.report.depth;
    if (depth == static_cast<int>(config.transforms.size())) return ensemble.combined_test_errors;
    if (depth == 0) return ensemble.combined_test_errors_original;
    return metrics(to_depth(ensemble.test_actuals_original, config.transforms, depth),
                   to_depth(ensemble.combined_forecast_original, config.transforms, depth));
}

ErrorTriple RunReport::reported_member(std::size_t i) const {
    const int depth = config.report.depth;
    if (depth == static_cast<int>(config.transforms.size())) return ensemble.member_test_errors[i];
    if (depth == 0) return ensemble.member_test_errors_original[i];
    return metrics(to_depth(ensemble.test_actuals_original, config.transforms, depth),
                   to_depth(ensemble.member_forecasts_original[i], config.transforms, depth));
}

std::optional<ErrorTriple> RunReport::reported_baseline() const {
    if (!baseline) return std::nullopt;
    const int depth = config.report.depth;
    if (depth == 0) return baseline->test_errors_original;
    // the baseline's own chain may differ; route through the original scale
    return metrics(to_depth(ensemble.test_actuals_original, config.transforms, depth),
                   to_depth(baseline->forecast_original, config.transforms, depth));
}

double derive_loss_floor(std::span<const double> insample_working, const NetworkConfig& network,
                         bool sann) {
    double noise_variance = 0.0;
    if (!sann) {
        ARModel reference = fit_ar(insample_working, network.p);
        const int rows = static_cast<int>(insample_working.size()) - network.p;
        const int dof = rows - (network.p + 1);
        noise_variance = reference.resid_variance * rows / std::max(dof, 1);
    } else {
        // A seasonal network forecasts a whole block from the previous one,
        // so its per-target noise level is the 1..q-step-ahead forecast error
        // variance of the seasonal reference model, averaged over the block:
        // sigma^2 * (1 + (h-1)(1+theta)^2) for h <= s, averaged over h.
        const int s = network.p;
        const SarimaModel reference = fit_sarima_ma(insample_working, s);
        const double psi = 1.0 + reference.theta1;
        noise_variance = reference.resid_variance *
                         (1.0 + 0.5 * (network.q - 1) * psi * psi);
    }
    const int n_patterns =
        static_cast<int>(insample_working.size()) - network.p - network.q + 1;
    return 0.5 * n_patterns * network.q * noise_variance;
}

RunReport run_experiment(const ExperimentConfig& config) {
    const auto t_start = std::chrono::steady_clock::now();

    TimeSeries raw = load_csv(config.dataset);
    const std::size_t n = raw.size();
    if (config.split.train_len + config.split.validation_len + config.split.test_len != n)
        throw TsError("config fields split.train, split.validation, split.test sum to " +
                      std::to_string(config.split.train_len + config.split.validation_len +
                                     config.split.test_len) +
                      " but dataset '" + raw.name + "' has " + std::to_string(n) + " observations");

    TimeSeries working = raw;
    for (const auto& t : config.transforms) working = apply_transform(working, t);

    RunReport report;
    report.config = config;
    report.dataset_name = raw.name;
    report.dataset_size = n;

    std::vector<TrainerSpec> trainers = config.trainers;
    double floor = config.loss_floor;
    if (config.auto_loss_floor) {
        const std::span<const double> insample{working.values.data(),
                                               config.split.train_len + config.split.validation_len};
        floor = derive_loss_floor(insample, config.network, config.sann);
    }
    if (!std::isnan(floor)) {
        for (auto& t : trainers) t.loss_floor = floor;
        report.resolved_loss_floor = floor;
        report.config.trainers = trainers;
    }

    EnsembleOptions options;
    options.warm_start = config.warm_start;
    options.threads = config.threads;
    report.ensemble = run_ensemble(working, config.split, config.network, trainers,
                                   config.restarts, config.seed, options);
    report.ensemble_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    if (config.baseline.kind != BaselineConfig::Kind::None) {
        const auto t_baseline = std::chrono::steady_clock::now();
        TimeSeries bl = raw;
        for (const auto& t : config.baseline.transforms) bl = apply_transform(bl, t);
        const std::size_t insample_len = config.split.train_len + config.split.validation_len;
        const std::span<const double> insample{bl.values.data(), insample_len};
        const int horizon = static_cast<int>(config.split.test_len);

        BaselineReport baseline;
        if (config.baseline.kind == BaselineConfig::Kind::Ar) {
            baseline.kind = "ar";
            baseline.ar = fit_ar(insample, config.baseline.order);
            baseline.forecast = forecast_ar(*baseline.ar, bl.values, horizon);
        } else {
            baseline.kind = "sarima";
            baseline.sarima = fit_sarima_ma(insample, config.baseline.season);
            baseline.forecast = forecast_sarima(*baseline.sarima, bl.values, horizon);
        }
        const std::span<const double> test_actuals{bl.values.data() + insample_len,
                                                   config.split.test_len};
        baseline.test_errors = metrics(test_actuals, baseline.forecast);
        baseline.forecast_original = invert_values(baseline.forecast, bl.transform_log);
        const std::vector<double> test_original = invert_values(test_actuals, bl.transform_log);
        baseline.test_errors_original = metrics(test_original, baseline.forecast_original);
        report.baseline = std::move(baseline);
        report.baseline_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_baseline).count();
    }

    report.total_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw TsError("cannot write " + tmp.string());
        out << content;
        if (!out) throw TsError("write failure on " + tmp.string());
    }
    fs::rename(tmp, target);
}

void emit_forecast_diagram_data(const EnsembleResult& result, const std::string& path) {
    std::ostringstream os;
    os << "index,actual,combined";
    for (const auto& eval : result.evaluations) os << "," << eval.name;
    os << "\n";
    for (std::size_t t = 0; t < result.combined_forecast_original.size(); ++t) {
        os << t << "," << fmt17(result.test_actuals_original[t]) << ","
           << fmt17(result.combined_forecast_original[t]);
        for (const auto& member : result.member_forecasts_original) os << "," << fmt17(member[t]);
        os << "\n";
    }
    write_file_atomic(path, os.str());
}

namespace {

json report_to_json(const RunReport& report) {
    const ExperimentConfig& cfg = report.config;
    json j;
    j["dataset"] = {{"name", report.dataset_name},
                    {"path", cfg.dataset},
                    {"size", report.dataset_size}};

    json transforms = json::array();
    for (const auto& t : cfg.transforms) transforms.push_back(transform_to_json(t));
    json trainer_cfg = json::array();
    for (const auto& t : cfg.trainers)
        trainer_cfg.push_back(json{{"kind", std::string(kind_name(t.kind))},
                                   {"epochs", t.max_epochs},
                                   {"loss_floor", t.loss_floor},
                                   {"stagnation_window", t.stagnation_window}});
    j["config"] = {{"transforms", transforms},
                   {"split",
                    {{"train", cfg.split.train_len},
                     {"validation", cfg.split.validation_len},
                     {"test", cfg.split.test_len}}},
                   {"network", {{"p", cfg.network.p}, {"h", cfg.network.h}, {"q", cfg.network.q},
                                {"sann", cfg.sann}}},
                   {"trainers", trainer_cfg},
                   {"restarts", cfg.restarts},
                   {"seed", cfg.seed},
                   {"warm_start", cfg.warm_start},
                   {"loss_floor", report.resolved_loss_floor}};
    j["report_scale"] = cfg.report.label(static_cast<int>(cfg.transforms.size()));
    j["report_depth"] = cfg.report.depth;
    j["mse_display_factor"] = cfg.report.mse_display_factor;

    const EnsembleResult& ens = report.ensemble;
    json trainers = json::array();
    for (std::size_t i = 0; i < ens.evaluations.size(); ++i) {
        const auto& eval = ens.evaluations[i];
        trainers.push_back(json{{"name", eval.name},
                                {"validation_working", triple_to_json(eval.validation_errors)},
                                {"g", eval.g},
                                {"weight", eval.w},
                                {"selected_restart", eval.selected_restart},
                                {"retrain_selected_restart", eval.retrain_selected_restart},
                                {"retrain_final_loss", eval.retrain_final_loss},
                                {"test_working", triple_to_json(ens.member_test_errors[i])},
                                {"test_original", triple_to_json(ens.member_test_errors_original[i])},
                                {"test_reported", triple_to_json(report.reported_member(i))}});
    }
    j["trainers"] = trainers;
    j["combined"] = {{"test_working", triple_to_json(ens.combined_test_errors)},
                     {"test_original", triple_to_json(ens.combined_test_errors_original)},
                     {"test_reported", triple_to_json(report.reported_combined())}};

    json forecasts;
    forecasts["actual_working"] = ens.test_actuals;
    forecasts["combined_working"] = ens.combined_forecast;
    forecasts["actual_original"] = ens.test_actuals_original;
    forecasts["combined_original"] = ens.combined_forecast_original;
    json members, members_original;
    for (std::size_t i = 0; i < ens.evaluations.size(); ++i) {
        members[ens.evaluations[i].name] = ens.member_forecasts[i];
        members_original[ens.evaluations[i].name] = ens.member_forecasts_original[i];
    }
    forecasts["members_working"] = members;
    forecasts["members_original"] = members_original;
    j["forecasts"] = forecasts;

    if (report.baseline) {
        const auto& b = *report.baseline;
        json bj{{"kind", b.kind},
                {"test_working", triple_to_json(b.test_errors)},
                {"test_original", triple_to_json(b.test_errors_original)},
                {"test_reported", triple_to_json(*report.reported_baseline())},
                {"forecast_working", b.forecast},
                {"forecast_original", b.forecast_original}};
        if (b.ar) {
            bj["order"] = b.ar->p;
            bj["intercept"] = b.ar->intercept;
            bj["phi"] = b.ar->phi;
            bj["resid_variance"] = b.ar->resid_variance;
        }
        if (b.sarima) {
            bj["season"] = b.sarima->s;
            bj["theta1"] = b.sarima->theta1;
            bj["Theta1"] = b.sarima->Theta1;
            bj["resid_variance"] = b.sarima->resid_variance;
        }
        j["baseline"] = bj;
    } else {
        j["baseline"] = nullptr;
    }

    j["warnings"] = ens.warnings;
    j["timings"] = {{"ensemble_seconds", report.ensemble_seconds},
                    {"baseline_seconds", report.baseline_seconds},
                    {"total_seconds", report.total_seconds}};
    return j;
}

std::string errors_csv(const RunReport& report) {
    std::ostringstream os;
    os << "entity,scale,split,mae,mse,mape,g,weight\n";
    const EnsembleResult& ens = report.ensemble;
    auto row = [&](const std::string& entity, const char* scale, const char* split,
                   const ErrorTriple& e, const double* g, const double* w) {
        os << entity << "," << scale << "," << split << "," << fmt17(e.mae) << "," << fmt17(e.mse)
           << "," << fmt17(e.mape) << "," << (g ? fmt17(*g) : "") << "," << (w ? fmt17(*w) : "")
           << "\n";
    };
    for (std::size_t i = 0; i < ens.evaluations.size(); ++i) {
        const auto& eval = ens.evaluations[i];
        row(eval.name, "working", "validation", eval.validation_errors, &eval.g, &eval.w);
        row(eval.name, "working", "test", ens.member_test_errors[i], nullptr, nullptr);
        row(eval.name, "original", "test", ens.member_test_errors_original[i], nullptr, nullptr);
    }
    row("ensemble", "working", "test", ens.combined_test_errors, nullptr, nullptr);
    row("ensemble", "original", "test", ens.combined_test_errors_original, nullptr, nullptr);
    if (report.baseline) {
        row("baseline_" + report.baseline->kind, "working", "test", report.baseline->test_errors,
            nullptr, nullptr);
        row("baseline_" + report.baseline->kind, "original", "test",
            report.baseline->test_errors_original, nullptr, nullptr);
    }
    return os.str();
}

std::string trainer_mape_csv(const RunReport& report) {
    std::ostringstream os;
    os << "trainer,test_mape\n";
    for (std::size_t i = 0; i < report.ensemble.evaluations.size(); ++i)
        os << report.ensemble.evaluations[i].name << "," << fmt17(report.reported_member(i).mape)
           << "\n";
    return os.str();
}

std::string report_txt(const RunReport& report) {
    const ExperimentConfig& cfg = report.config;
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(6);
    os << "dataset: " << report.dataset_name << " (" << report.dataset_size << " observations)\n";
    os << "split: train " << cfg.split.train_len << " / validation " << cfg.split.validation_len
       << " / test " << cfg.split.test_len << "\n";
    os << "network: (" << cfg.network.p << ", " << cfg.network.h << ", " << cfg.network.q << ")"
       << (cfg.sann ? " seasonal" : "") << ", D=" << cfg.network.dim() << "\n";
    os << "transforms:";
    if (cfg.transforms.empty()) os << " none";
    for (const auto& t : cfg.transforms) os << " " << t.describe();
    os << "\n";
    os << "restarts: " << cfg.restarts << "   seed: " << cfg.seed
       << "   warm_start: " << (cfg.warm_start ? "yes" : "no") << "\n";
    if (report.resolved_loss_floor > 0.0)
        os << "loss floor: " << report.resolved_loss_floor << "\n";
    os << "reporting scale: "
       << cfg.report.label(static_cast<int>(cfg.transforms.size())) << "\n\n";

    const EnsembleResult& ens = report.ensemble;
    os << "trainer            val MAE      val MSE      val MAPE     g          weight\n";
    for (const auto& eval : ens.evaluations) {
        os << eval.name;
        for (std::size_t pad = eval.name.size(); pad < 19; ++pad) os << ' ';
        os << eval.validation_errors.mae << "   " << eval.validation_errors.mse << "   "
           << eval.validation_errors.mape << "   " << eval.g << "   " << eval.w << "\n";
    }
    os << "\ntest errors (reporting scale):\n";
    os << "trainer            MAE          MSE          MAPE\n";
    for (std::size_t i = 0; i < ens.evaluations.size(); ++i) {
        const ErrorTriple e = report.reported_member(i);
        os << ens.evaluations[i].name;
        for (std::size_t pad = ens.evaluations[i].name.size(); pad < 19; ++pad) os << ' ';
        os << e.mae << "   " << e.mse << "   " << e.mape << "\n";
    }
    const ErrorTriple combined = report.reported_combined();
    os << "ensemble           " << combined.mae << "   " << combined.mse << "   " << combined.mape
       << "\n";
    if (const auto b = report.reported_baseline()) {
        os << "baseline (" << report.baseline->kind << ")      " << b->mae << "   " << b->mse
           << "   " << b->mape << "\n";
    }
    if (!ens.warnings.empty()) {
        os << "\nwarnings:\n";
        for (const auto& w : ens.warnings) os << "  - " << w << "\n";
    }
    os << "\ntimings: ensemble " << report.ensemble_seconds << "s, baseline "
       << report.baseline_seconds << "s, total " << report.total_seconds << "s\n";
    return os.str();
}

} // namespace

void write_report_files(const RunReport& report) {
    const fs::path dir(report.config.out_dir);
    write_file_atomic((dir / "report.json").string(), report_to_json(report).dump(2) + "\n");
    write_file_atomic((dir / "report.txt").string(), report_txt(report));
    write_file_atomic((dir / "errors.csv").string(), errors_csv(report));
    write_file_atomic((dir / "trainer_mape.csv").string(), trainer_mape_csv(report));
    emit_forecast_diagram_data(report.ensemble, (dir / "forecasts.csv").string());
}

std::string compare_table(const std::vector<std::string>& report_paths,
                          const std::string& out_path, bool per_trainer) {
    if (report_paths.empty()) throw TsError("compare: need at least one report");

    struct Entry {
        std::string dataset;
        double factor;
        std::optional<ErrorTriple> arima;
        ErrorTriple ensemble;
        std::vector<std::pair<std::string, ErrorTriple>> trainers;
    };
    std::vector<Entry> entries;
    std::vector<std::string> trainer_columns;
    for (const auto& path : report_paths) {
        std::ifstream in(path);
        if (!in) throw TsError("compare: cannot open report " + path);
        json j;
        in >> j;
        Entry entry;
        entry.dataset = j.at("dataset").at("name").get<std::string>();
        entry.factor = j.at("mse_display_factor").get<double>();
        const char* field = "test_reported";
        entry.ensemble = triple_from_json(j.at("combined").at(field));
        if (!j.at("baseline").is_null())
            entry.arima = triple_from_json(j.at("baseline").at(field));
        for (const auto& t : j.at("trainers")) {
            const std::string name = t.at("name").get<std::string>();
            entry.trainers.emplace_back(name, triple_from_json(t.at(field)));
            if (per_trainer &&
                std::find(trainer_columns.begin(), trainer_columns.end(), name) ==
                    trainer_columns.end())
                trainer_columns.push_back(name);
        }
        entries.push_back(std::move(entry));
    }

    std::ostringstream os;
    os << "dataset,metric,arima,ensemble";
    for (const auto& name : trainer_columns) os << "," << name;
    os << "\n";
    for (const auto& entry : entries) {
        auto emit = [&](const char* metric, auto pick, double factor) {
            os << entry.dataset << "," << metric << ",";
            if (entry.arima) os << fmt17(pick(*entry.arima) * factor);
            os << "," << fmt17(pick(entry.ensemble) * factor);
            for (const auto& name : trainer_columns) {
                os << ",";
                for (const auto& [tname, e] : entry.trainers)
                    if (tname == name) os << fmt17(pick(e) * factor);
            }
            os << "\n";
        };
        emit("MSE", [](const ErrorTriple& e) { return e.mse; }, entry.factor);
        emit("MAPE", [](const ErrorTriple& e) { return e.mape; }, 1.0);
    }
    const std::string table = os.str();
    if (!out_path.empty()) write_file_atomic(out_path, table);
    return table;
}

} // namespace tsens
