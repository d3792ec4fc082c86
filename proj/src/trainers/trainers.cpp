#include "tsens/trainers.hpp"

#include <array>
#include <cmath>

#include "minimize_impl.hpp"

namespace tsens {

namespace {

struct KindEntry {
    TrainerKind kind;
    std::string_view name;
};

constexpr std::array<KindEntry, 8> kKinds{{
    {TrainerKind::GdMomentum, "GD_MOMENTUM"},
    {TrainerKind::Rprop, "RPROP"},
    {TrainerKind::Scg, "SCG"},
    {TrainerKind::Lm, "LM"},
    {TrainerKind::Oss, "OSS"},
    {TrainerKind::Bfgs, "BFGS"},
    {TrainerKind::PsoTrelea1, "PSO_TRELEA1"},
    {TrainerKind::PsoTrelea2, "PSO_TRELEA2"},
}};

detail::MinimizeResult dispatch(const TrainerSpec& spec, const Objective& obj,
                                std::vector<double> x0, Rng& rng,
                                const IterationObserver& observer) {
    switch (spec.kind) {
    case TrainerKind::GdMomentum:
        return detail::run_gd_momentum(spec, obj, std::move(x0), observer);
    case TrainerKind::Rprop:
        return detail::run_rprop(spec, obj, std::move(x0), observer);
    case TrainerKind::Scg:
        return detail::run_scg(spec, obj, std::move(x0), observer);
    case TrainerKind::Lm:
        return detail::run_lm(spec, obj, std::move(x0), observer);
    case TrainerKind::Oss:
        return detail::run_quasi_newton(spec, obj, std::move(x0), observer, true);
    case TrainerKind::Bfgs:
        return detail::run_quasi_newton(spec, obj, std::move(x0), observer, false);
    case TrainerKind::PsoTrelea1:
    case TrainerKind::PsoTrelea2:
        return detail::run_pso(spec, obj, std::move(x0), rng, observer);
    }
    throw TsError("unknown trainer kind");
}

TrainedModel train_checked(const TrainerSpec& spec, TrainerKind expected,
                           const NetworkConfig& config, const PatternSet& patterns,
                           std::uint64_t seed) {
    if (spec.kind != expected)
        throw TsError(std::string("trainer spec kind is ") + std::string(kind_name(spec.kind)) +
                      ", expected " + std::string(kind_name(expected)));
    return train(spec, config, patterns, seed);
}

} // namespace

int kind_id(TrainerKind kind) { return static_cast<int>(kind); }

std::string_view kind_name(TrainerKind kind) {
    for (const auto& e : kKinds)
        if (e.kind == kind) return e.name;
    return "?";
}

TrainerKind kind_from_name(std::string_view name) {
    for (const auto& e : kKinds)
        if (e.name == name) return e.kind;
    throw TsError("unknown trainer kind: '" + std::string(name) + "'");
}

double TrainerSpec::pso_a() const {
    if (!std::isnan(hyper.pso_a)) return hyper.pso_a;
    return kind == TrainerKind::PsoTrelea2 ? 0.729 : 0.6;
}

double TrainerSpec::pso_b() const {
    if (!std::isnan(hyper.pso_b)) return hyper.pso_b;
    return kind == TrainerKind::PsoTrelea2 ? 1.494 : 1.7;
}

void TrainerSpec::validate() const {
    if (max_epochs < 1) throw TsError("max_epochs must be >= 1");
    if (stagnation_window < 0) throw TsError("stagnation_window must be >= 0");
    const auto& hp = hyper;
    switch (kind) {
    case TrainerKind::GdMomentum:
        if (!(hp.learning_rate > 0.0)) throw TsError("learning_rate must be > 0");
        if (!(hp.momentum >= 0.0 && hp.momentum < 1.0)) throw TsError("momentum must be in [0, 1)");
        break;
    case TrainerKind::Rprop:
        if (!(hp.rprop_eta_plus > 1.0)) throw TsError("rprop_eta_plus must be > 1");
        if (!(hp.rprop_eta_minus > 0.0 && hp.rprop_eta_minus < 1.0))
            throw TsError("rprop_eta_minus must be in (0, 1)");
        if (!(hp.rprop_delta0 > 0.0)) throw TsError("rprop_delta0 must be > 0");
        if (!(hp.rprop_delta_min >= 0.0) || !(hp.rprop_delta_max >= hp.rprop_delta_min))
            throw TsError("rprop step bounds must satisfy 0 <= delta_min <= delta_max");
        break;
    case TrainerKind::Scg:
        if (!(hp.scg_sigma > 0.0) || !(hp.scg_lambda0 > 0.0))
            throw TsError("scg_sigma and scg_lambda0 must be > 0");
        break;
    case TrainerKind::Lm:
        if (!(hp.lm_mu0 > 0.0) || !(hp.lm_mu_factor > 1.0) || !(hp.lm_mu_max > hp.lm_mu0))
            throw TsError("LM requires mu0 > 0, mu_factor > 1, mu_max > mu0");
        break;
    case TrainerKind::Oss:
    case TrainerKind::Bfgs:
        if (!(hp.ls_armijo_c > 0.0 && hp.ls_armijo_c < 1.0))
            throw TsError("ls_armijo_c must be in (0, 1)");
        if (!(hp.ls_backtrack > 0.0 && hp.ls_backtrack < 1.0))
            throw TsError("ls_backtrack must be in (0, 1)");
        if (hp.ls_max_backtracks < 1) throw TsError("ls_max_backtracks must be >= 1");
        break;
    case TrainerKind::PsoTrelea1:
    case TrainerKind::PsoTrelea2:
        if (hp.pso_particles < 1) throw TsError("pso_particles must be >= 1");
        if (!(hp.pso_vmax > 0.0)) throw TsError("pso_vmax must be > 0");
        if (!(hp.pso_pos_hi > hp.pso_pos_lo) || !(hp.pso_vel_hi > hp.pso_vel_lo))
            throw TsError("PSO init ranges must be non-degenerate");
        break;
    }
}

std::string_view stop_reason_name(StopReason reason) {
    switch (reason) {
    case StopReason::Budget: return "budget";
    case StopReason::LossFloor: return "loss_floor";
    case StopReason::Stagnation: return "stagnation";
    case StopReason::Converged: return "converged";
    }
    return "?";
}

TrainedModel train(const TrainerSpec& spec, const NetworkConfig& config,
                   const PatternSet& patterns, std::uint64_t seed,
                   const std::vector<double>* warm_start) {
    spec.validate();
    Rng rng(seed);
    std::vector<double> x0 = warm_start ? *warm_start : init_params(config, rng);
    if (warm_start && static_cast<int>(warm_start->size()) != config.dim())
        throw TsError("warm-start parameter vector has the wrong length");

    MlpObjective objective(config, patterns);
    detail::MinimizeResult res = dispatch(spec, objective, std::move(x0), rng, {});

    TrainedModel model{config, std::move(res.best), spec, std::move(res.trace), res.best_loss};
    return model;
}

std::vector<double> surrogate_minimize(const TrainerSpec& spec, const Objective& objective,
                                       std::uint64_t seed, std::span<const double> x0,
                                       TrainingTrace* trace_out,
                                       const IterationObserver& observer) {
    spec.validate();
    Rng rng(seed);
    std::vector<double> start;
    if (x0.empty()) {
        start.resize(objective.dim());
        for (double& v : start) v = rng.uniform(-0.5, 0.5);
    } else {
        if (static_cast<int>(x0.size()) != objective.dim())
            throw TsError("surrogate_minimize: x0 has the wrong length");
        start.assign(x0.begin(), x0.end());
    }
    detail::MinimizeResult res = dispatch(spec, objective, std::move(start), rng, observer);
    if (trace_out) *trace_out = std::move(res.trace);
    return std::move(res.best);
}

TrainedModel rprop_train(const NetworkConfig& config, const PatternSet& patterns,
                         const TrainerSpec& spec, std::uint64_t seed) {
    return train_checked(spec, TrainerKind::Rprop, config, patterns, seed);
}
TrainedModel scg_train(const NetworkConfig& config, const PatternSet& patterns,
                       const TrainerSpec& spec, std::uint64_t seed) {
    return train_checked(spec, TrainerKind::Scg, config, patterns, seed);
}
TrainedModel lm_train(const NetworkConfig& config, const PatternSet& patterns,
                      const TrainerSpec& spec, std::uint64_t seed) {
    return train_checked(spec, TrainerKind::Lm, config, patterns, seed);
}
TrainedModel bfgs_train(const NetworkConfig& config, const PatternSet& patterns,
                        const TrainerSpec& spec, std::uint64_t seed) {
    return train_checked(spec, TrainerKind::Bfgs, config, patterns, seed);
}
TrainedModel oss_train(const NetworkConfig& config, const PatternSet& patterns,
                       const TrainerSpec& spec, std::uint64_t seed) {
    return train_checked(spec, TrainerKind::Oss, config, patterns, seed);
}
TrainedModel pso_train(const NetworkConfig& config, const PatternSet& patterns,
                       const TrainerSpec& spec, std::uint64_t seed) {
    if (spec.kind != TrainerKind::PsoTrelea1 && spec.kind != TrainerKind::PsoTrelea2)
        throw TsError("pso_train requires a PSO trainer spec");
    return train(spec, config, patterns, seed);
}

} // namespace tsens
