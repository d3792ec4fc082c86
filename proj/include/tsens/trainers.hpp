#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tsens/common.hpp"
#include "tsens/mlp.hpp"
#include "tsens/objective.hpp"

namespace tsens {

enum class TrainerKind {
    GdMomentum = 0,
    Rprop = 1,
    Scg = 2,
    Lm = 3,
    Oss = 4,
    Bfgs = 5,
    PsoTrelea1 = 6,
    PsoTrelea2 = 7,
};

int kind_id(TrainerKind kind);
std::string_view kind_name(TrainerKind kind);
TrainerKind kind_from_name(std::string_view name);

/// Per-kind hyperparameters with their documented defaults. Only the fields
/// of the selected kind matter; config files override them by key name.
struct TrainerHyper {
    // GD_MOMENTUM (Eq.-style full-batch gradient descent with momentum)
    double learning_rate = 1e-4; // eta > 0
    double momentum = 0.9;       // 0 <= alpha < 1

    // RPROP (sign-based adaptive steps)
    double rprop_delta0 = 0.07;
    double rprop_eta_plus = 1.2;
    double rprop_eta_minus = 0.5;
    double rprop_delta_min = 1e-6;
    double rprop_delta_max = 50.0;

    // SCG (Moller)
    double scg_sigma = 5e-5;
    double scg_lambda0 = 5e-7;

    // LM
    double lm_mu0 = 1e-3;
    double lm_mu_factor = 10.0;
    double lm_mu_max = 1e10;

    // BFGS / OSS backtracking line search
    double ls_armijo_c = 1e-4;
    double ls_backtrack = 0.5;
    int ls_max_backtracks = 40;

    // PSO (deterministic Trelea updates); a/b default per kind when NaN
    int pso_particles = 27;
    double pso_a = std::numeric_limits<double>::quiet_NaN();
    double pso_b = std::numeric_limits<double>::quiet_NaN();
    double pso_pos_lo = -1.0;
    double pso_pos_hi = 1.0;
    double pso_vel_lo = -0.5;
    double pso_vel_hi = 0.5;
    double pso_vmax = 4.0;
};

struct TrainerSpec {
    TrainerKind kind = TrainerKind::Rprop;
    TrainerHyper hyper;
    int max_epochs = 2000;
    double loss_floor = 0.0;
    /// Stop when the best loss improves by < 1e-12 over this many epochs;
    /// 0 disables the check.
    int stagnation_window = 200;

    void validate() const;
    /// pso_a / pso_b with the per-kind Trelea defaults filled in.
    double pso_a() const;
    double pso_b() const;
};

enum class StopReason { Budget, LossFloor, Stagnation, Converged };
std::string_view stop_reason_name(StopReason reason);

struct TrainingTrace {
    double initial_loss = 0.0;
    std::vector<double> epoch_loss; // loss after each executed epoch
    StopReason reason = StopReason::Budget;

    int epochs() const { return static_cast<int>(epoch_loss.size()); }
};

struct TrainedModel {
    NetworkConfig config;
    std::vector<double> params;
    TrainerSpec trainer;
    TrainingTrace trace;
    double final_loss = 0.0;
};

/// Thrown when a trainer encounters a non-finite loss or gradient.
struct TrainerFailure : TsError {
    TrainerFailure(const std::string& msg, int epoch_) : TsError(msg), epoch(epoch_) {}
    int epoch;
};

/// Called after every epoch with the current iterate; used by tests to watch
/// directions and trajectories.
using IterationObserver = std::function<void(int epoch, std::span<const double> w, double loss)>;

/// Eq.-style momentum update: delta <- -eta*grad + alpha*delta, w <- w + delta.
void gd_momentum_step(std::span<double> params, std::span<const double> grad,
                      std::span<double> delta, double eta, double alpha);

/// Deterministic Trelea-style swarm.
struct Swarm {
    int particles = 0;
    int dim = 0;
    std::vector<double> positions;      // N*D row-major
    std::vector<double> velocities;     // N*D
    std::vector<double> best_positions; // N*D
    std::vector<double> best_fitness;   // N
    std::vector<double> global_best;    // D
    double global_best_fitness = 0.0;
};

Swarm init_swarm(const TrainerSpec& spec, std::span<const double> particle0, Rng& rng,
                 const Objective& objective);

/// One synchronous generation: v <- a*v + b*(p_d - x) with p_d the midpoint of
/// personal and global best, |v| clamped to vmax, x <- x + v; then fitness,
/// personal bests, and the global best are refreshed.
void pso_step(Swarm& swarm, double a, double b, double vmax, const Objective& objective);

/// Trains with the algorithm selected by spec.kind and returns the best
/// parameters encountered. Deterministic given the seed.
TrainedModel train(const TrainerSpec& spec, const NetworkConfig& config,
                   const PatternSet& patterns, std::uint64_t seed,
                   const std::vector<double>* warm_start = nullptr);

/// Same algorithm bodies applied to an arbitrary objective. Starts from x0
/// when given, otherwise from a seeded uniform [-0.5, 0.5] draw.
std::vector<double> surrogate_minimize(const TrainerSpec& spec, const Objective& objective,
                                       std::uint64_t seed,
                                       std::span<const double> x0 = {},
                                       TrainingTrace* trace_out = nullptr,
                                       const IterationObserver& observer = {});

/// Per-kind entry points (thin wrappers over train()).
TrainedModel rprop_train(const NetworkConfig& config, const PatternSet& patterns,
                         const TrainerSpec& spec, std::uint64_t seed);
TrainedModel scg_train(const NetworkConfig& config, const PatternSet& patterns,
                       const TrainerSpec& spec, std::uint64_t seed);
TrainedModel lm_train(const NetworkConfig& config, const PatternSet& patterns,
                      const TrainerSpec& spec, std::uint64_t seed);
TrainedModel bfgs_train(const NetworkConfig& config, const PatternSet& patterns,
                        const TrainerSpec& spec, std::uint64_t seed);
TrainedModel oss_train(const NetworkConfig& config, const PatternSet& patterns,
                       const TrainerSpec& spec, std::uint64_t seed);
TrainedModel pso_train(const NetworkConfig& config, const PatternSet& patterns,
                       const TrainerSpec& spec, std::uint64_t seed);

} // namespace tsens
