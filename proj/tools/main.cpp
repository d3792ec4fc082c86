#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "tsens/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"time-series forecasting with a multi-optimizer MLP ensemble"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int restarts = 0;
    int epochs = 0;
    int threads = -1;
    bool seed_set = false, restarts_set = false, epochs_set = false;

    auto* run = app.add_subcommand("run", "execute an experiment config");
    run->add_option("config", config_path, "experiment config (JSON)")->required();
    run->add_option("--seed", seed, "override the master seed")->trigger_on_parse()
        ->each([&](const std::string&) { seed_set = true; });
    run->add_option("--restarts", restarts, "override the restart count")->trigger_on_parse()
        ->each([&](const std::string&) { restarts_set = true; });
    run->add_option("--epochs", epochs, "override the epoch budget of every trainer")
        ->trigger_on_parse()->each([&](const std::string&) { epochs_set = true; });
    run->add_option("--out-dir", out_dir, "override the output directory");
    run->add_option("--threads", threads, "worker threads (0 = all cores)");

    std::vector<std::string> report_paths;
    std::string table_path = "compare.csv";
    bool per_trainer = false;
    auto* compare = app.add_subcommand("compare", "tabulate saved run reports");
    compare->add_option("reports", report_paths, "report.json files")->required();
    compare->add_option("--out", table_path, "output table file");
    compare->add_flag("--trainers", per_trainer, "include per-trainer columns");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            tsens::ExperimentConfig cfg = tsens::load_config(config_path);
            if (seed_set) cfg.seed = seed;
            if (restarts_set) cfg.restarts = restarts;
            if (epochs_set)
                for (auto& t : cfg.trainers) t.max_epochs = epochs;
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            if (threads >= 0) cfg.threads = threads;

            const tsens::RunReport report = tsens::run_experiment(cfg);
            tsens::write_report_files(report);
            std::cout << "wrote " << cfg.out_dir << "/report.txt (and report.json, errors.csv, "
                      << "forecasts.csv, trainer_mape.csv)\n";
            const tsens::ErrorTriple combined = report.reported_combined();
            std::cout << "ensemble test MSE " << combined.mse << ", MAPE " << combined.mape
                      << "%\n";
        } else if (compare->parsed()) {
            std::cout << tsens::compare_table(report_paths, table_path, per_trainer);
            std::cout << "wrote " << table_path << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
