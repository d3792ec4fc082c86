#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "tsens/common.hpp"
#include "tsens/experiment.hpp"

using namespace tsens;
namespace fs = std::filesystem;

namespace {

const std::string kSource = TSENS_SOURCE_DIR;

/// A scaled-down lynx config (tiny budgets) for fast pipeline runs.
std::string write_mini_config(const std::string& name, std::uint64_t seed) {
    const fs::path dir = fs::temp_directory_path() / "tsens_cfg";
    fs::create_directories(dir);
    std::ostringstream os;
    os << R"({
  "dataset": ")" << kSource << R"(/data/lynx.csv",
  "transforms": [ { "kind": "log10" } ],
  "split": { "train": 80, "validation": 20, "test": 14 },
  "network": { "p": 7, "h": 5, "q": 1 },
  "trainers": [ { "kind": "RPROP" }, { "kind": "LM" }, { "kind": "SCG" } ],
  "restarts": 2,
  "epochs": 40,
  "seed": )" << seed << R"(,
  "baseline": { "kind": "ar", "order": 12, "transforms": [ { "kind": "log10" } ] },
  "report": { "scale": "working", "mse_display_factor": 1.0 },
  "out_dir": ")" << (dir / name / "out").string() << R"("
})";
    const fs::path path = dir / (name + ".json");
    std::ofstream out(path);
    out << os.str();
    return path.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (!line.empty() && line.back() == ',') fields.push_back("");
        rows.push_back(std::move(fields));
    }
    return rows;
}

} // namespace

TEST_CASE("bundled configs load and echo the documented protocol") {
    const ExperimentConfig lynx = load_config(kSource + "/configs/lynx.json");
    CHECK(lynx.split.train_len == 80);
    CHECK(lynx.split.validation_len == 20);
    CHECK(lynx.split.test_len == 14);
    CHECK(lynx.network == NetworkConfig(7, 5, 1));
    CHECK(lynx.trainers.size() == 7);
    CHECK(lynx.restarts == 50);
    for (const auto& t : lynx.trainers) CHECK(t.max_epochs == 2000);
    CHECK(lynx.baseline.kind == BaselineConfig::Kind::Ar);
    CHECK(lynx.report.depth == 1); // log10 view of the log10+rescale chain
    CHECK(lynx.auto_loss_floor);

    const ExperimentConfig airline = load_config(kSource + "/configs/airline.json");
    CHECK(airline.sann);
    CHECK(airline.network == NetworkConfig(12, 4, 12));
    CHECK(airline.split.train_len == 120);
    CHECK(airline.baseline.kind == BaselineConfig::Kind::Sarima);
    CHECK(airline.report.mse_display_factor == doctest::Approx(1e-4));
}

TEST_CASE("config validation names the offending fields") {
    const fs::path dir = fs::temp_directory_path() / "tsens_cfg";
    fs::create_directories(dir);

    {
        std::ofstream out(dir / "bad_split.json");
        out << R"({"dataset": ")" << kSource << R"(/data/lynx.csv",
             "split": {"train": 80, "validation": 20, "test": 13},
             "network": {"p": 2, "h": 2, "q": 1},
             "trainers": [{"kind": "RPROP"}]})";
    }
    const ExperimentConfig bad = load_config((dir / "bad_split.json").string());
    CHECK_THROWS_WITH_AS(run_experiment(bad), doctest::Contains("split.train"), TsError);

    {
        std::ofstream out(dir / "bad_kind.json");
        out << R"({"dataset": "x.csv", "split": {"train": 1, "validation": 1, "test": 1},
             "network": {"p": 1, "h": 1, "q": 1},
             "trainers": [{"kind": "NOPE"}]})";
    }
    CHECK_THROWS_WITH_AS(load_config((dir / "bad_kind.json").string()),
                         doctest::Contains("NOPE"), TsError);

    {
        std::ofstream out(dir / "bad_option.json");
        out << R"({"dataset": "x.csv", "split": {"train": 1, "validation": 1, "test": 1},
             "network": {"p": 1, "h": 1, "q": 1},
             "trainers": [{"kind": "RPROP", "learning_rte": 0.1}]})";
    }
    CHECK_THROWS_WITH_AS(load_config((dir / "bad_option.json").string()),
                         doctest::Contains("trainers[0].learning_rte"), TsError);
}

TEST_CASE("run_experiment emits the documented files with coherent contents") {
    const std::string cfg_path = write_mini_config("emit", 7);
    const ExperimentConfig cfg = load_config(cfg_path);
    const RunReport report = run_experiment(cfg);
    write_report_files(report);

    const fs::path out(cfg.out_dir);
    for (const char* name :
         {"report.txt", "report.json", "errors.csv", "forecasts.csv", "trainer_mape.csv"})
        CHECK(fs::exists(out / name));

    // forecast diagram structure: header + one row per test point,
    // 3 + k columns
    const auto rows = parse_csv(slurp((out / "forecasts.csv").string()));
    REQUIRE(rows.size() == 1 + 14);
    const std::size_t k = report.ensemble.evaluations.size();
    for (const auto& row : rows) CHECK(row.size() == 3 + k);
    CHECK(rows[0][0] == "index");
    CHECK(rows[0][1] == "actual");
    CHECK(rows[0][2] == "combined");

    // parse-back reproduces the combined forecast bit-exactly (17 digits)
    for (std::size_t t = 0; t < 14; ++t)
        CHECK(std::strtod(rows[1 + t][2].c_str(), nullptr) ==
              report.ensemble.combined_forecast_original[t]);

    // every reported metric is recomputable from forecasts.csv
    std::vector<double> actual(14), combined(14);
    for (std::size_t t = 0; t < 14; ++t) {
        actual[t] = std::strtod(rows[1 + t][1].c_str(), nullptr);
        combined[t] = std::strtod(rows[1 + t][2].c_str(), nullptr);
    }
    const ErrorTriple recomputed = metrics(actual, combined);
    CHECK(std::abs(recomputed.mse - report.ensemble.combined_test_errors_original.mse) <= 1e-9);
    CHECK(std::abs(recomputed.mape - report.ensemble.combined_test_errors_original.mape) <= 1e-9);

    // member columns too
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<double> member(14);
        for (std::size_t t = 0; t < 14; ++t)
            member[t] = std::strtod(rows[1 + t][3 + i].c_str(), nullptr);
        const ErrorTriple e = metrics(actual, member);
        CHECK(std::abs(e.mse - report.ensemble.member_test_errors_original[i].mse) <= 1e-9);
    }

    // trainer_mape.csv carries the reporting-scale test MAPE per trainer
    const auto mape_rows = parse_csv(slurp((out / "trainer_mape.csv").string()));
    REQUIRE(mape_rows.size() == 1 + k);
    for (std::size_t i = 0; i < k; ++i)
        CHECK(std::strtod(mape_rows[1 + i][1].c_str(), nullptr) ==
              doctest::Approx(report.reported_member(i).mape).epsilon(1e-15));
}

TEST_CASE("same config and seed give byte-identical CSV outputs") {
    const std::string cfg_path = write_mini_config("det", 11);
    ExperimentConfig cfg_a = load_config(cfg_path);
    cfg_a.out_dir += "_a";
    ExperimentConfig cfg_b = load_config(cfg_path);
    cfg_b.out_dir += "_b";

    write_report_files(run_experiment(cfg_a));
    write_report_files(run_experiment(cfg_b));
    for (const char* name : {"errors.csv", "forecasts.csv", "trainer_mape.csv"})
        CHECK(slurp((fs::path(cfg_a.out_dir) / name).string()) ==
              slurp((fs::path(cfg_b.out_dir) / name).string()));
}

TEST_CASE("compare builds a dataset x metric table with the scale conventions") {
    const std::string cfg_path = write_mini_config("cmp", 3);
    ExperimentConfig cfg = load_config(cfg_path);
    const RunReport report = run_experiment(cfg);
    write_report_files(report);
    const std::string report_json = (fs::path(cfg.out_dir) / "report.json").string();

    const fs::path table_path = fs::temp_directory_path() / "tsens_cfg" / "compare.csv";
    const std::string table = compare_table({report_json, report_json}, table_path.string());
    const auto rows = parse_csv(table);
    REQUIRE(rows.size() == 1 + 4); // header + 2 datasets x {MSE, MAPE}
    CHECK(rows[0][0] == "dataset");
    CHECK(rows[1][1] == "MSE");
    CHECK(rows[2][1] == "MAPE");
    CHECK(fs::exists(table_path));

    // values match the report at the working scale (lynx convention)
    CHECK(std::strtod(rows[1][3].c_str(), nullptr) ==
          doctest::Approx(report.ensemble.combined_test_errors.mse).epsilon(1e-15));
    CHECK(std::strtod(rows[1][2].c_str(), nullptr) ==
          doctest::Approx(report.baseline->test_errors.mse).epsilon(1e-15));

    // the MSE display factor rescales MSE rows only
    const fs::path scaled_cfg = fs::temp_directory_path() / "tsens_cfg" / "scaled.json";
    {
        std::ifstream in(report_json);
        nlohmann::json j;
        in >> j;
        j["mse_display_factor"] = 1e-4;
        std::ofstream out(scaled_cfg);
        out << j.dump();
    }
    const auto scaled_rows = parse_csv(compare_table({scaled_cfg.string()}, ""));
    CHECK(std::strtod(scaled_rows[1][3].c_str(), nullptr) ==
          doctest::Approx(report.ensemble.combined_test_errors.mse * 1e-4).epsilon(1e-12));
    CHECK(std::strtod(scaled_rows[2][3].c_str(), nullptr) ==
          doctest::Approx(report.ensemble.combined_test_errors.mape).epsilon(1e-12));
}

TEST_CASE("the installed CLI runs end to end") {
    const std::string cfg_path = write_mini_config("cli", 5);
    const fs::path out_dir = fs::temp_directory_path() / "tsens_cfg" / "cli_out";
    std::ostringstream cmd;
    cmd << TSENS_CLI_PATH << " run " << cfg_path << " --restarts 1 --epochs 10 --out-dir "
        << out_dir.string() << " > /dev/null 2>&1";
    CHECK(std::system(cmd.str().c_str()) == 0);
    CHECK(fs::exists(out_dir / "report.json"));

    std::ostringstream cmp;
    cmp << TSENS_CLI_PATH << " compare " << (out_dir / "report.json").string() << " --out "
        << (out_dir / "table.csv").string() << " > /dev/null 2>&1";
    CHECK(std::system(cmp.str().c_str()) == 0);
    CHECK(fs::exists(out_dir / "table.csv"));

    // bad config exits nonzero
    std::ostringstream bad;
    bad << TSENS_CLI_PATH << " run /nonexistent.json > /dev/null 2>&1";
    CHECK(std::system(bad.str().c_str()) != 0);
}
