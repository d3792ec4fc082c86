#include "tsens/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <thread>

namespace tsens {

namespace {

constexpr std::uint64_t kPhaseTrain = 0;    // step 4: fit on the training set
constexpr std::uint64_t kPhaseRetrain = 1;  // step 6: fit on training+validation

struct JobResult {
    std::optional<TrainedModel> model;
    std::string error;
};

/// Runs `count` independent jobs on a small worker pool; results land in
/// per-job slots so the schedule cannot affect the outcome.
void run_jobs(int count, int threads, const std::function<void(int)>& job) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) job(i);
        });
    for (auto& t : pool) t.join();
}

std::vector<double> forecast_span(const NetworkConfig& config, std::span<const double> params,
                                  std::span<const double> history_with_span, int horizon) {
    if (config.q == 1) return forecast_one_step(config, params, history_with_span, horizon);
    // SANN: history must end where the forecast span begins.
    return forecast_seasonal(
        config, params, history_with_span.first(history_with_span.size() - horizon), horizon);
}

std::string trainer_label(const std::vector<TrainerSpec>& specs, int index) {
    const std::string base{kind_name(specs[index].kind)};
    int occurrence = 0;
    for (int i = 0; i < index; ++i)
        if (specs[i].kind == specs[index].kind) ++occurrence;
    return occurrence == 0 ? base : base + "#" + std::to_string(occurrence + 1);
}

} // namespace

std::pair<double, double> compute_weight(const ErrorTriple& validation_errors) {
    if (validation_errors.mae < 0 || validation_errors.mse < 0 || validation_errors.mape < 0)
        throw TsError("compute_weight: errors must be nonnegative");
    constexpr double kClamp = 50.0;
    const double denom = validation_errors.sum();
    double g = denom > 0.0 ? 1.0 / denom : kClamp;
    g = std::min(g, kClamp);
    return {g, std::exp(g)};
}

std::vector<double> combine(std::span<const double> weights,
                            const std::vector<std::vector<double>>& forecasts) {
    if (forecasts.empty() || weights.size() != forecasts.size())
        throw TsError("combine: need k >= 1 forecasts with matching weights");
    const std::size_t len = forecasts.front().size();
    double total = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw TsError("combine: weights must be positive");
        total += w;
    }
    for (const auto& f : forecasts)
        if (f.size() != len) throw TsError("combine: forecast length mismatch");
    if (forecasts.size() == 1) return forecasts.front(); // k=1: D = D_1 exactly

    std::vector<double> out(len, 0.0);
    for (std::size_t i = 0; i < forecasts.size(); ++i)
        for (std::size_t t = 0; t < len; ++t) out[t] += weights[i] * forecasts[i][t];
    for (double& v : out) v /= total;
    return out;
}

EnsembleResult run_ensemble(const TimeSeries& series, const SplitSpec& split_spec,
                            const NetworkConfig& config,
                            const std::vector<TrainerSpec>& trainer_specs, int restarts,
                            std::uint64_t master_seed, const EnsembleOptions& options) {
    if (trainer_specs.empty()) throw TsError("run_ensemble: need at least one trainer");
    if (restarts < 1) throw TsError("run_ensemble: restarts must be >= 1");

    EnsembleResult result;
    result.master_seed = master_seed;
    result.restarts = restarts;
    if (trainer_specs.size() % 2 == 0)
        result.warnings.push_back("ensemble has an even number of trainers (an odd number is preferred)");

    const auto segments = split(series, split_spec);
    const TimeSeries& train_series = segments[0];
    const TimeSeries& validation_series = segments[1];
    const TimeSeries& test_series = segments[2];

    std::vector<double> insample = train_series.values;
    insample.insert(insample.end(), validation_series.values.begin(),
                    validation_series.values.end());
    std::vector<double> full = insample;
    full.insert(full.end(), test_series.values.begin(), test_series.values.end());

    const PatternSet train_patterns = window(std::span<const double>(train_series.values),
                                             config.p, config.q);
    const PatternSet insample_patterns = window(std::span<const double>(insample), config.p,
                                                config.q);

    const int k = static_cast<int>(trainer_specs.size());
    const int val_len = static_cast<int>(split_spec.validation_len);
    const int test_len = static_cast<int>(split_spec.test_len);

    // ---- step 4: k x restarts trainings on the training set --------------
    std::vector<JobResult> phase_a(static_cast<std::size_t>(k) * restarts);
    run_jobs(k * restarts, options.threads, [&](int idx) {
        const int trainer = idx / restarts;
        const int restart = idx % restarts;
        const std::uint64_t seed = job_seed(master_seed, kPhaseTrain,
                                            kind_id(trainer_specs[trainer].kind), restart);
        try {
            phase_a[idx].model = train(trainer_specs[trainer], config, train_patterns, seed);
        } catch (const std::exception& e) {
            phase_a[idx].error = e.what();
        }
    });

    struct Candidate {
        int trainer;
        ErrorTriple validation_errors;
        int restart;
        std::vector<double> params;
    };
    std::vector<std::optional<Candidate>> selected(k);
    for (int t = 0; t < k; ++t) {
        for (int r = 0; r < restarts; ++r) {
            JobResult& job = phase_a[static_cast<std::size_t>(t) * restarts + r];
            if (!job.model) continue;
            std::vector<double> val_forecast;
            try {
                val_forecast = forecast_span(config, job.model->params, insample, val_len);
            } catch (const std::exception& e) {
                job.error = e.what();
                continue;
            }
            const ErrorTriple errors = metrics(validation_series.values, val_forecast);
            if (!std::isfinite(errors.sum())) continue;
            if (!selected[t] || errors.sum() < selected[t]->validation_errors.sum())
                selected[t] = Candidate{t, errors, r, job.model->params};
        }
        if (!selected[t]) {
            std::string detail;
            for (int r = 0; r < restarts && detail.empty(); ++r)
                detail = phase_a[static_cast<std::size_t>(t) * restarts + r].error;
            result.warnings.push_back("trainer " + trainer_label(trainer_specs, t) +
                                      " dropped: every restart failed (" + detail + ")");
        }
    }
    phase_a.clear();

    std::vector<int> survivors;
    for (int t = 0; t < k; ++t)
        if (selected[t]) survivors.push_back(t);
    if (survivors.empty()) throw TsError("run_ensemble: every trainer failed");

    // ---- step 5: Eq.-(5)-style weights from validation errors ------------
    for (int t : survivors) {
        TrainerEvaluation eval;
        eval.name = trainer_label(trainer_specs, t);
        eval.spec = trainer_specs[t];
        eval.validation_errors = selected[t]->validation_errors;
        std::tie(eval.g, eval.w) = compute_weight(eval.validation_errors);
        eval.selected_restart = selected[t]->restart;
        result.evaluations.push_back(std::move(eval));
    }

    // ---- step 6: retrain each surviving trainer on training+validation ---
    const int ks = static_cast<int>(survivors.size());
    std::vector<JobResult> phase_b(static_cast<std::size_t>(ks) * restarts);
    run_jobs(ks * restarts, options.threads, [&](int idx) {
        const int si = idx / restarts;
        const int restart = idx % restarts;
        const int t = survivors[si];
        const std::uint64_t seed = job_seed(master_seed, kPhaseRetrain,
                                            kind_id(trainer_specs[t].kind), restart);
        const std::vector<double>* warm =
            (options.warm_start && restart == 0) ? &selected[t]->params : nullptr;
        try {
            phase_b[idx].model = train(trainer_specs[t], config, insample_patterns, seed, warm);
        } catch (const std::exception& e) {
            phase_b[idx].error = e.what();
        }
    });

    std::vector<double> weights;
    std::vector<TrainerEvaluation> kept;
    for (int si = 0; si < ks; ++si) {
        const TrainedModel* best = nullptr;
        int best_restart = -1;
        for (int r = 0; r < restarts; ++r) {
            const JobResult& job = phase_b[static_cast<std::size_t>(si) * restarts + r];
            if (!job.model) continue;
            if (!best || job.model->final_loss < best->final_loss) {
                best = &*job.model;
                best_restart = r;
            }
        }
        TrainerEvaluation eval = result.evaluations[si];
        if (!best) {
            std::string detail;
            for (int r = 0; r < restarts && detail.empty(); ++r)
                detail = phase_b[static_cast<std::size_t>(si) * restarts + r].error;
            result.warnings.push_back("trainer " + eval.name +
                                      " dropped at retraining: every restart failed (" + detail + ")");
            continue;
        }
        eval.retrain_selected_restart = best_restart;
        eval.retrain_final_loss = best->final_loss;

        // ---- step 7: forecast the test span -------------------------------
        result.member_forecasts.push_back(forecast_span(config, best->params, full, test_len));
        weights.push_back(eval.w);
        kept.push_back(std::move(eval));
    }
    if (kept.empty()) throw TsError("run_ensemble: every trainer failed at retraining");
    result.evaluations = std::move(kept);

    // ---- step 8: weighted combination and error reports -------------------
    result.combined_forecast = combine(weights, result.member_forecasts);
    result.test_actuals = test_series.values;
    for (const auto& forecast : result.member_forecasts)
        result.member_test_errors.push_back(metrics(result.test_actuals, forecast));
    result.combined_test_errors = metrics(result.test_actuals, result.combined_forecast);

    const std::span<const TransformSpec> chain{series.transform_log};
    result.test_actuals_original = invert_values(result.test_actuals, chain);
    result.combined_forecast_original = invert_values(result.combined_forecast, chain);
    for (const auto& forecast : result.member_forecasts) {
        result.member_forecasts_original.push_back(invert_values(forecast, chain));
        result.member_test_errors_original.push_back(
            metrics(result.test_actuals_original, result.member_forecasts_original.back()));
    }
    result.combined_test_errors_original =
        metrics(result.test_actuals_original, result.combined_forecast_original);
    return result;
}

} // namespace tsens
