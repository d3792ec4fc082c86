#include <cmath>

#include "minimize_impl.hpp"

// Deterministic Trelea-style particle swarm: v <- a*v + b*(p_d - x) with p_d
// the midpoint of the personal and global best, then x <- x + v. Particle 0
// starts at the standard initialization vector so the loss-floor contract and
// warm starts behave like the other trainers; the rest of the swarm draws
// positions on [-1, 1] and velocities on [-0.5, 0.5].

namespace tsens {

Swarm init_swarm(const TrainerSpec& spec, std::span<const double> particle0, Rng& rng,
                 const Objective& objective) {
    const int N = spec.hyper.pso_particles;
    const int D = objective.dim();
    Swarm swarm;
    swarm.particles = N;
    swarm.dim = D;
    swarm.positions.resize(static_cast<std::size_t>(N) * D);
    swarm.velocities.resize(static_cast<std::size_t>(N) * D);

    for (int i = 0; i < D; ++i) swarm.positions[i] = particle0[i];
    for (int n = 1; n < N; ++n)
        for (int i = 0; i < D; ++i)
            swarm.positions[static_cast<std::size_t>(n) * D + i] =
                rng.uniform(spec.hyper.pso_pos_lo, spec.hyper.pso_pos_hi);
    for (int n = 0; n < N; ++n)
        for (int i = 0; i < D; ++i)
            swarm.velocities[static_cast<std::size_t>(n) * D + i] =
                rng.uniform(spec.hyper.pso_vel_lo, spec.hyper.pso_vel_hi);

    swarm.best_positions = swarm.positions;
    swarm.best_fitness.resize(N);
    int best = 0;
    for (int n = 0; n < N; ++n) {
        const std::span<const double> x{swarm.positions.data() + static_cast<std::size_t>(n) * D,
                                        static_cast<std::size_t>(D)};
        swarm.best_fitness[n] = objective.loss(x);
        if (swarm.best_fitness[n] < swarm.best_fitness[best]) best = n;
    }
    swarm.global_best.assign(
        swarm.positions.begin() + static_cast<std::size_t>(best) * D,
        swarm.positions.begin() + static_cast<std::size_t>(best) * D + D);
    swarm.global_best_fitness = swarm.best_fitness[best];
    return swarm;
}

void pso_step(Swarm& swarm, double a, double b, double vmax, const Objective& objective) {
    const int N = swarm.particles;
    const int D = swarm.dim;
    for (int n = 0; n < N; ++n) {
        double* x = swarm.positions.data() + static_cast<std::size_t>(n) * D;
        double* v = swarm.velocities.data() + static_cast<std::size_t>(n) * D;
        const double* pbest = swarm.best_positions.data() + static_cast<std::size_t>(n) * D;
        for (int i = 0; i < D; ++i) {
            const double attractor = 0.5 * (pbest[i] + swarm.global_best[i]);
            double vel = a * v[i] + b * (attractor - x[i]);
            if (vel > vmax) vel = vmax;
            if (vel < -vmax) vel = -vmax;
            v[i] = vel;
            x[i] += vel;
        }
    }
    for (int n = 0; n < N; ++n) {
        const std::span<const double> x{swarm.positions.data() + static_cast<std::size_t>(n) * D,
                                        static_cast<std::size_t>(D)};
        const double fitness = objective.loss(x);
        if (std::isnan(fitness)) throw TsError("PSO: non-finite fitness");
        if (fitness < swarm.best_fitness[n]) {
            swarm.best_fitness[n] = fitness;
            std::copy(x.begin(), x.end(),
                      swarm.best_positions.begin() + static_cast<std::size_t>(n) * D);
        }
    }
    for (int n = 0; n < N; ++n) {
        if (swarm.best_fitness[n] < swarm.global_best_fitness) {
            swarm.global_best_fitness = swarm.best_fitness[n];
            swarm.global_best.assign(
                swarm.best_positions.begin() + static_cast<std::size_t>(n) * D,
                swarm.best_positions.begin() + static_cast<std::size_t>(n) * D + D);
        }
    }
}

} // namespace tsens

namespace tsens::detail {

MinimizeResult run_pso(const TrainerSpec& spec, const Objective& obj, std::vector<double> x0,
                       Rng& rng, const IterationObserver& observer) {
    Swarm swarm = init_swarm(spec, x0, rng, obj);
    if (!std::isfinite(swarm.global_best_fitness))
        throw TrainerFailure("PSO: non-finite fitness in the initial swarm", 0);

    Loop loop(spec, swarm.global_best, swarm.global_best_fitness, observer);
    const double a = spec.pso_a();
    const double b = spec.pso_b();
    while (!loop.stopped()) {
        try {
            pso_step(swarm, a, b, spec.hyper.pso_vmax, obj);
        } catch (const TsError& e) {
            throw TrainerFailure(std::string(e.what()) + " at epoch " +
                                     std::to_string(loop.epoch() + 1),
                                 loop.epoch() + 1);
        }
        if (!loop.epoch_done(swarm.global_best, swarm.global_best_fitness)) break;
    }
    return std::move(loop).result();
}

} // namespace tsens::detail
