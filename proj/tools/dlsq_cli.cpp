// dlsq: toy experiments, synthetic lane scenes, training and verification.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dlsq/config.hpp"
#include "dlsq/io.hpp"
#include "dlsq/lane_model.hpp"
#include "dlsq/lane_scene.hpp"
#include "dlsq/toy_lab.hpp"
#include "dlsq/verify.hpp"

namespace fs = std::filesystem;
using namespace dlsq;

namespace {

enum Exit { kOk = 0, kConfig = 1, kNumeric = 2, kTolerance = 3 };

fs::path output_dir(const ExperimentConfig& cfg, const std::string& flag, const std::string& sub) {
    return flag.empty() ? resolve_output_dir(cfg.output_dir / sub) : resolve_output_dir(flag);
}

int cmd_toy(const std::string& config_path, const std::string& mode, const std::string& out_flag) {
    ExperimentConfig cfg = load_config(config_path);
    if (!mode.empty()) cfg.toy.mode = parse_toy_mode(mode);
    const ToyConfig toy = cfg.toy.to_toy_config();
    const fs::path out = output_dir(cfg, out_flag, "toy_" + std::string(to_string(toy.mode)));

    const Trajectory traj = run_toy(toy);
    std::ostringstream csv;
    write_trajectory_csv(csv, traj);
    for (const auto& rec : traj.records) {
        if (rec.step % cfg.toy.frame_every != 0 && rec.step != toy.steps) continue;
        char name[32];
        std::snprintf(name, sizeof name, "step_%04zu.svg", rec.step);
        write_file_atomic(out / "frames" / name, render_toy_frame_svg(rec, toy.target, traj));
    }
    write_file_atomic(out / "trajectory.csv", csv.str());
    std::cout << "toy " << to_string(toy.mode) << ": " << traj.records.size() << " records, final loss "
              << format_double(traj.records.back().loss) << " -> " << out.string() << "\n";
    return kOk;
}

std::string scene_row(const char* split, const lane::SyntheticScene& s) {
    std::ostringstream row;
    char sum[24];
    std::snprintf(sum, sizeof sum, "%016llx", static_cast<unsigned long long>(lane::image_checksum(s)));
    row << split << ',' << s.seed << ',' << sum;
    for (const auto& c : s.gt_curves) {
        for (std::size_t j = 0; j < 3; ++j) row << ',' << format_double(c[j]);
    }
    return row.str();
}

int cmd_gen_scenes(const std::string& config_path, const std::string& out_flag) {
    const ExperimentConfig cfg = load_config(config_path);
    const fs::path out = output_dir(cfg, out_flag, "scenes");
    const auto& ss = cfg.scenes;
    lane::SceneConfig distractor = ss.scene;
    distractor.distractor_prob = 1.0;

    struct Split {
        const char* name;
        std::uint64_t first;
        std::size_t count;
        const lane::SceneConfig* scene;
    };
    const Split splits[] = {{"train", ss.first_seed, ss.train, &ss.scene},
                            {"val", ss.val_seed(), ss.val, &ss.scene},
                            {"distractor", ss.distractor_first_seed, ss.distractor_count, &distractor}};
    std::ostringstream index;
    index << "split,seed,checksum";
    for (std::size_t k = 0; k < ss.scene.curves; ++k) index << ",c0_" << k << ",c1_" << k << ",c2_" << k;
    index << '\n';
    for (const auto& split : splits) {
        for (std::size_t i = 0; i < split.count; ++i) {
            const lane::SyntheticScene s = lane::generate_scene(split.first + i, *split.scene);
            std::ostringstream bin;
            lane::write_scene(bin, s);
            char name[40];
            std::snprintf(name, sizeof name, "scene_%06llu.lsim", static_cast<unsigned long long>(s.seed));
            write_file_atomic(out / split.name / name, bin.str());
            index << scene_row(split.name, s) << '\n';
        }
    }
    write_file_atomic(out / "scenes.csv", index.str());
    std::cout << "wrote " << ss.train << " train, " << ss.val << " val, " << ss.distractor_count
              << " distractor scenes -> " << out.string() << "\n";
    return kOk;
}

struct SceneSets {
    std::vector<lane::SyntheticScene> train;
    std::vector<lane::SyntheticScene> val;
    std::vector<lane::SyntheticScene> distractor;
};

SceneSets make_sets(const ExperimentConfig& cfg) {
    const auto& ss = cfg.scenes;
    lane::SceneConfig distractor = ss.scene;
    distractor.distractor_prob = 1.0;
    return {lane::generate_scenes(ss.first_seed, ss.train, ss.scene),
            lane::generate_scenes(ss.val_seed(), ss.val, ss.scene),
            lane::generate_scenes(ss.distractor_first_seed, ss.distractor_count, distractor)};
}

int cmd_train(const std::string& config_path, const std::string& regime_name, const std::string& out_flag) {
    const ExperimentConfig cfg = load_config(config_path);
    const lane::Regime regime = lane::parse_regime(regime_name);
    const lane::TrainConfig tc = cfg.train.for_regime(regime);
    const fs::path out = output_dir(cfg, out_flag, lane::to_string(regime));
    const SceneSets sets = make_sets(cfg);

    const lane::TrainReport report = lane::train(regime, sets.train, sets.val, tc);
    std::ostringstream csv;
    lane::write_report_csv(csv, report);
    std::ostringstream params;
    lane::write_params(params, report.params);
    std::ostringstream meta;
    meta << "regime " << lane::to_string(regime) << "\n"
         << "optimizer " << lane::to_string(tc.optimizer) << "\n"
         << "lr " << format_double(tc.lr) << "\n"
         << "epochs " << tc.epochs << "\n"
         << "batch_size " << tc.batch_size << "\n"
         << "seed " << tc.seed << "\n"
         << "train_scenes " << sets.train.size() << "\n"
         << "val_scenes " << sets.val.size() << "\n"
         << "skipped_degenerate " << report.skipped_degenerate << "\n"
         << "note " << (tc.optimizer == lane::Optimizer::gd
                            ? "plain gradient descent with a fixed step"
                            : "Adam; plain gradient descent converges too slowly on the correlated neighbor features")
         << "\n";
    write_file_atomic(out / "report.csv", csv.str());
    write_file_atomic(out / "params.txt", params.str());
    write_file_atomic(out / "meta.txt", meta.str());
    const auto& last = report.epochs.back();
    std::cout << lane::to_string(regime) << ": " << report.epochs.size() << " epochs, train_loss "
              << format_double(last.train_loss) << ", val_error " << format_double(last.val_error) << ", "
              << report.wall_clock_seconds << " s -> " << out.string() << "\n";
    return kOk;
}

int cmd_eval(const std::string& config_path, const std::string& report_flag) {
    const ExperimentConfig cfg = load_config(config_path);
    const SceneSets sets = make_sets(cfg);
    std::ostringstream csv;
    csv << "regime,mode,val_error,curves,degenerate,distractor_share\n";
    double errors[2] = {-1.0, -1.0};
    for (const lane::Regime regime : {lane::Regime::end_to_end, lane::Regime::cross_entropy}) {
        const fs::path params_path = resolve_output_dir(cfg.output_dir / lane::to_string(regime) / "params.txt");
        std::ifstream in(params_path);
        if (!in) {
            std::cerr << "no trained parameters at " << params_path.string() << " (run train --regime "
                      << lane::to_string(regime) << " first)\n";
            return kConfig;
        }
        const lane::WeightGenerator gen = lane::read_params(in);
        const lane::EvalMode mode =
            regime == lane::Regime::end_to_end ? lane::EvalMode::end_to_end : lane::EvalMode::two_step;
        const lane::EvalResult res = lane::evaluate(gen, sets.val, mode, cfg.eval);
        double share = 0.0;
        for (const auto& s : sets.distractor) share += lane::weight_share(gen, s, s.distractor_mask);
        share /= static_cast<double>(sets.distractor.size());
        errors[regime == lane::Regime::end_to_end ? 0 : 1] = res.mean_error;
        csv << lane::to_string(regime) << ',' << lane::to_string(mode) << ',' << format_double(res.mean_error) << ','
            << res.curves << ',' << res.degenerate << ',' << format_double(share) << '\n';
        std::cout << lane::to_string(regime) << " (" << lane::to_string(mode) << "): val_error "
                  << format_double(res.mean_error) << ", degenerate " << res.degenerate << "/" << res.curves
                  << ", distractor weight share " << format_double(share) << "\n";
    }
    const fs::path report = report_flag.empty() ? resolve_output_dir(cfg.output_dir / "eval_report.csv")
                                                : resolve_output_dir(report_flag);
    write_file_atomic(report, csv.str());
    std::cout << "end2end <= xent: " << (errors[0] <= errors[1] ? "yes" : "no") << " -> " << report.string()
              << "\n";
    return kOk;
}

int cmd_check(const std::string& suite, std::size_t count, std::uint64_t seed) {
    verify::SuiteResult res;
    if (suite == "oracle") res = verify::oracle_suite(count ? count : 1000, seed);
    else if (suite == "grads") res = verify::gradient_suite(count ? count : 500, seed);
    else res = verify::loss_suite(count ? count : 1000, seed);
    std::cout << res.name << ": " << res.cases << " cases, " << res.failures << " failures, worst "
              << format_double(res.worst) << ", " << res.seconds << " s\n";
    return res.passed() ? kOk : kTolerance;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Differentiable least-squares fitting: experiments and checks"};
    app.require_subcommand(1);

    std::string config, mode, out, regime, report, suite;
    std::size_t count = 0;
    std::uint64_t seed = 1;

    auto* toy = app.add_subcommand("toy", "Run the toy line-fitting experiment");
    toy->add_option("config", config, "Config file")->required();
    toy->add_option("--mode", mode, "coords, weights or both (overrides the config)");
    toy->add_option("--out", out, "Output directory");

    auto* gen = app.add_subcommand("gen-scenes", "Generate the synthetic lane scene sets");
    gen->add_option("config", config, "Config file")->required();
    gen->add_option("--out", out, "Output directory");

    auto* train = app.add_subcommand("train", "Train the weight generator");
    train->add_option("config", config, "Config file")->required();
    train->add_option("--regime", regime, "end2end or xent")->required()->check(CLI::IsMember({"end2end", "xent"}));
    train->add_option("--out", out, "Output directory");

    auto* eval = app.add_subcommand("eval", "Evaluate both trained generators on the validation scenes");
    eval->add_option("config", config, "Config file")->required();
    eval->add_option("--report", report, "Report CSV path");

    auto* check = app.add_subcommand("check", "Run a verification suite");
    check->add_option("--suite", suite, "grads, losses or oracle")
        ->required()
        ->check(CLI::IsMember({"grads", "losses", "oracle"}));
    check->add_option("--count", count, "Number of random cases (suite default when 0)");
    check->add_option("--seed", seed, "Seed for the random cases");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        if (*toy) return cmd_toy(config, mode, out);
        if (*gen) return cmd_gen_scenes(config, out);
        if (*train) return cmd_train(config, regime, out);
        if (*eval) return cmd_eval(config, report);
        return cmd_check(suite, count, seed);
    } catch (const ToyRunFailed& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumeric;
    } catch (const DegenerateSystem& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumeric;
    } catch (const DivergedState& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumeric;
    } catch (const NearInfinityPoint& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumeric;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    }
}
