#include <gtest/gtest.h>

#include "oracles.hpp"

#include "tde/cli.hpp"
#include "tde/config.hpp"
#include "tde/experiments.hpp"
#include "tde/random.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace tde;
namespace fs = std::filesystem;

namespace {

class CliTest: public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("tde_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    int run(std::vector<std::string> args) {
        args.insert(args.begin(), "tde");
        out_.str("");
        err_.str("");
        return cli::run(args, out_, err_);
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
    std::ostringstream out_, err_;
};

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream is(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(is, line)) {
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cols.push_back(cell);
        rows.push_back(cols);
    }
    return rows;
}

nlohmann::json read_json(const fs::path& p) {
    std::ifstream is(p);
    return nlohmann::json::parse(is);
}

} // namespace

TEST(config, json_round_trip) {
    ExperimentConfig c;
    c.experiment = "sweep";
    c.seed = 42;
    c.nominal.tau_fac = 0.02;
    c.delta_ts = {1e-3, 3e-3};
    c.texture.vy = 50;
    c.mismatch_old.sigmas["i_leak"] = 0.3;
    const auto back = config_from_json(to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));
    EXPECT_EQ(back.nominal, c.nominal);
    EXPECT_EQ(back.texture, c.texture);
}

TEST(config, strict_parsing) {
    auto j = to_json(ExperimentConfig{});
    j["nominal"]["tau"] = 1;
    EXPECT_THROW(config_from_json(j), ConfigError);
    j = to_json(ExperimentConfig{});
    j["seed"] = "one";
    EXPECT_THROW(config_from_json(j), ConfigError);
    j = to_json(ExperimentConfig{});
    j["experiment"] = "nope";
    EXPECT_THROW(config_from_json(j), ConfigError);
    j = to_json(ExperimentConfig{});
    j["texture"]["velocity"] = {0, 0};
    EXPECT_THROW(config_from_json(j), ConfigError);
    EXPECT_NO_THROW(config_from_json(nlohmann::json::object()));
}

TEST(config, dotted_overrides) {
    auto j = to_json(ExperimentConfig{});
    apply_override(j, "nominal.tau_fac", "0.02");
    apply_override(j, "texture.velocity.1", "-50");
    apply_override(j, "events.format", "csv");
    apply_override(j, "delta_ts", "[0.001, 0.004]");
    const auto c = config_from_json(j);
    EXPECT_EQ(c.nominal.tau_fac, 0.02);
    EXPECT_EQ(c.texture.vy, -50);
    EXPECT_EQ(c.events.format, "csv");
    EXPECT_EQ(c.delta_ts, (std::vector<double>{0.001, 0.004}));
    EXPECT_THROW(apply_override(j, "nominal.nope", "1"), ConfigError);
    EXPECT_THROW(apply_override(j, "texture.velocity.7", "1"), ConfigError);
}

TEST_F(CliTest, exit_codes) {
    EXPECT_EQ(run({}), cli::kConfigError);
    EXPECT_EQ(run({"bogus"}), cli::kConfigError);
    EXPECT_EQ(run({"step", "--out", path("a"), "--nominal.nope", "1"}), cli::kConfigError);
    EXPECT_NE(err_.str().find("nope"), std::string::npos);
    EXPECT_EQ(run({"step", "--out", path("a"), "--nominal.tau_fac", "-1"}), cli::kConfigError);
    EXPECT_EQ(run({"step", "--out", path("a"), "--variant", "both"}), cli::kConfigError);
    EXPECT_EQ(run({"step", "--config", path("missing.json")}), cli::kConfigError);
    EXPECT_EQ(run({"optical-flow", "--out", path("a"), "--events.input", path("missing.evt")}), cli::kRuntimeError);
    EXPECT_EQ(run({"step", "--help"}), cli::kSuccess);
    EXPECT_EQ(run({"step", "--out", path("a")}), cli::kSuccess);
}

TEST_F(CliTest, config_file_then_overrides) {
    auto j = to_json(ExperimentConfig{});
    j["step"]["delta_t"] = 0.002;
    j["out"] = path("from_file");
    std::ofstream(path("c.json")) << j.dump();
    ASSERT_EQ(run({"step", "--config", path("c.json"), "--step.tail=0.03"}), cli::kSuccess) << err_.str();
    const auto summary = read_json(dir_ / "from_file" / "step_summary.json");
    EXPECT_EQ(summary["delta_t_s"].get<double>(), 0.002);
    EXPECT_EQ(summary["spike_count"].get<std::size_t>(), 5u);
}

TEST_F(CliTest, step_outputs_reparse_exactly) {
    ASSERT_EQ(run({"step", "--out", path("s")}), cli::kSuccess) << err_.str();
    const auto r = run_step(TdeParams{}, TdeVariant::NewDualDpi, 12e-3, 50e-3);
    const auto spikes = read_csv(dir_ / "s" / "step_spikes.csv");
    ASSERT_EQ(spikes.size(), r.spikes.size() + 1);
    EXPECT_EQ(spikes[0][0], "spike_time_s");
    for (std::size_t k = 0; k < r.spikes.size(); ++k) EXPECT_EQ(std::strtod(spikes[k + 1][0].c_str(), nullptr), r.spikes[k]);

    const auto trace = read_csv(dir_ / "s" / "step_trace.csv");
    ASSERT_EQ(trace.size(), r.trace.size() + 1);
    for (std::size_t k = 0; k < r.trace.size(); ++k) {
        EXPECT_EQ(std::strtod(trace[k + 1][0].c_str(), nullptr), r.trace[k].t);
        EXPECT_EQ(std::strtod(trace[k + 1][3].c_str(), nullptr), r.trace[k].v_mem);
    }
    const auto summary = read_json(dir_ / "s" / "step_summary.json");
    EXPECT_GE(summary["spike_count"].get<std::size_t>(), 1u);
}

TEST_F(CliTest, step_far_beyond_tau_fac_is_silent) {
    ASSERT_EQ(run({"step", "--out", path("s"), "--step.delta_t", "0.1"}), cli::kSuccess);
    EXPECT_EQ(read_json(dir_ / "s" / "step_summary.json")["spike_count"].get<std::size_t>(), 0u);
}

TEST_F(CliTest, sweep_is_monotone) {
    ASSERT_EQ(run({"sweep", "--out", path("w")}), cli::kSuccess) << err_.str();
    const auto rows = read_csv(dir_ / "w" / "sweep.csv");
    ASSERT_EQ(rows.size(), 1 + 2 * 6u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"variant", "delta_t_s", "charge", "spike_count"}));
    for (std::size_t i = 2; i < rows.size(); ++i) {
        if (rows[i][0] != rows[i - 1][0]) continue;
        EXPECT_LT(std::stod(rows[i][2]), std::stod(rows[i - 1][2]));
        EXPECT_LE(std::stoul(rows[i][3]), std::stoul(rows[i - 1][3]));
    }
}

TEST_F(CliTest, sweep_agrees_with_euler_oracle) {
    const TdeParams p;
    const std::vector<double> grid{1e-3, 2e-3, 5e-3, 10e-3, 20e-3, 50e-3};
    const auto rows = run_sweep(p, grid, 50e-3);
    for (const auto& row: rows) {
        const std::vector<double> fac{0.0}, trg{row.delta_t};
        const double h = std::min(p.tau_fac, p.tau_trg) / 10'000;
        const auto ref = oracle::euler_simulate_extrapolated(p, row.variant, fac, trg, row.delta_t + 50e-3, h);
        EXPECT_EQ(row.spike_count, ref.size()) << row.delta_t;
    }
}

TEST_F(CliTest, reruns_are_byte_identical_across_threads) {
    for (const char* cmd: {"montecarlo", "optical-flow"}) {
        ASSERT_EQ(run({cmd, "--out", path("one"), "--threads", "1", "--n_trials", "300", "--texture.duration", "0.5"}),
                  cli::kSuccess) << err_.str();
        ASSERT_EQ(run({cmd, "--out", path("four"), "--threads", "4", "--n_trials", "300", "--texture.duration", "0.5"}),
                  cli::kSuccess) << err_.str();
        for (const auto& entry: fs::directory_iterator(dir_ / "one")) {
            EXPECT_EQ(slurp(entry.path()), slurp(dir_ / "four" / entry.path().filename())) << entry.path();
        }
        fs::remove_all(dir_ / "one");
        fs::remove_all(dir_ / "four");
    }
}

TEST_F(CliTest, seed_changes_outputs) {
    ASSERT_EQ(run({"gen-events", "--out", path("a"), "--seed", "1"}), cli::kSuccess);
    ASSERT_EQ(run({"gen-events", "--out", path("b"), "--seed", "2"}), cli::kSuccess);
    EXPECT_NE(slurp(dir_ / "a" / "events.evt"), slurp(dir_ / "b" / "events.evt"));
}

TEST_F(CliTest, gen_events_without_jitter_is_the_ideal_stream) {
    ASSERT_EQ(run({"gen-events", "--out", path("g"), "--texture.jitter_sigma", "0"}), cli::kSuccess);
    ExperimentConfig c;
    c.texture.jitter_sigma = 0;
    TextureConfig t = c.texture;
    t.seed = derive_seed(c.seed, "stimulus");
    const auto ideal = generate_texture_events(t);
    EXPECT_EQ(read_events(dir_ / "g" / "events.evt"), ideal);
    // Pure vertical motion: the count has a closed form.
    EXPECT_EQ(ideal.size(), oracle::vertical_crossing_count(draw_features(t), t));
}

TEST_F(CliTest, gen_events_formats_agree) {
    ASSERT_EQ(run({"gen-events", "--out", path("g")}), cli::kSuccess);
    ASSERT_EQ(run({"gen-events", "--out", path("g"), "--events.format", "csv"}), cli::kSuccess);
    const auto bin = read_events(dir_ / "g" / "events.evt");
    EXPECT_EQ(read_events(dir_ / "g" / "events.csv"), bin);
    EXPECT_EQ(fs::file_size(dir_ / "g" / "events.evt"), 4 + bin.size() * kEvtRecordSize);
    EXPECT_EQ(run({"gen-events", "--out", path("g"), "--events.format", "txt"}), cli::kConfigError);
}

TEST_F(CliTest, optical_flow_reads_generated_events) {
    ASSERT_EQ(run({"gen-events", "--out", path("g")}), cli::kSuccess);
    ASSERT_EQ(run({"optical-flow", "--out", path("direct")}), cli::kSuccess);
    ASSERT_EQ(run({"optical-flow", "--out", path("file"), "--events.input", path("g/events.evt")}), cli::kSuccess);
    EXPECT_EQ(slurp(dir_ / "direct" / "raster.csv"), slurp(dir_ / "file" / "raster.csv"));

    const auto f = read_json(dir_ / "direct" / "fractions.json");
    double sum = 0;
    for (const char* o: {"up", "down", "left", "right"}) sum += f["fractions"][o].get<double>();
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_GT(f["fractions"]["up"].get<double>(), f["fractions"]["down"].get<double>());
    EXPECT_EQ(f["n_events"].get<std::size_t>(), read_events(dir_ / "g" / "events.evt").size());

    const auto net = network_from_json(read_json(dir_ / "direct" / "network.json"));
    EXPECT_EQ(net.units.size(), 100u);
}

TEST_F(CliTest, montecarlo_summary) {
    ASSERT_EQ(run({"montecarlo", "--out", path("m"), "--n_trials", "500"}), cli::kSuccess) << err_.str();
    const auto s = read_json(dir_ / "m" / "mc_summary.json");
    EXPECT_EQ(s["old"]["n_trials"].get<std::size_t>(), 500u);
    const double red = s["cv_reduction_percent"].get<double>();
    EXPECT_GT(red, 0);
    EXPECT_LT(red, 100);
    EXPECT_EQ(read_csv(dir_ / "m" / "mc_old.csv").size(), 1 + 500 * 6u);
}
