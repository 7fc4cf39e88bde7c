#include "peco/cli.hpp"

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "peco/artifacts.hpp"
#include "peco/config.hpp"
#include "peco/errors.hpp"
#include "peco/format.hpp"
#include "peco/gradcheck.hpp"
#include "peco/trainer.hpp"
#include "peco/workload.hpp"

namespace peco::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

config::ExperimentConfig resolve_config(const Invocation& inv) {
    config::ExperimentConfig cfg = inv.config_path.empty()
                                       ? config::default_config()
                                       : config::load_config(inv.config_path);
    if (inv.seed) config::apply_seed_override(cfg, *inv.seed);
    if (inv.mode) cfg.train.mode = config::mode_from_string(*inv.mode);
    cfg.validate();
    return cfg;
}

void prepare_out_dir(const fs::path& dir) {
    if (dir.empty()) throw InvalidArgument("output directory is required (--out)");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

void emit_resolved_config(const fs::path& out_dir, const std::string& text,
                          std::vector<std::string>& artifacts) {
    artifacts::write_text(out_dir / "resolved_config.ini", text);
    artifacts.push_back("resolved_config.ini");
}

int cmd_gen_trace(const Invocation& inv) {
    const config::ExperimentConfig cfg = resolve_config(inv);
    const workload::WorkloadTrace trace =
        workload::generate(cfg.trace, cfg.congestion, cfg.mobility);
    workload::save_trace(trace, inv.out_dir / "trace.txt");
    std::cout << "gen-trace: horizon=" << trace.horizon << " locations=" << trace.n_locations()
              << " arrivals=" << trace.arrivals.size() << "\n";

    artifacts::Manifest m;
    m.subcommand = "gen-trace";
    m.config_text = config::echo_config(cfg);
    m.artifacts = {"trace.txt"};
    emit_resolved_config(inv.out_dir, m.config_text, m.artifacts);
    artifacts::write_manifest(inv.out_dir, m);
    return 0;
}

int cmd_pretrain(const Invocation& inv) {
    const config::ExperimentConfig cfg = resolve_config(inv);
    std::cout << "pretrain: epochs=" << cfg.forecast.train_epochs << "\n";
    const forecaster::PretrainResult pre = trainer::pretrain_forecaster(cfg);
    forecaster::save_forecaster(pre.net, cfg.forecast, inv.out_dir / "forecaster.json");
    forecaster::save_loss_curve(pre.curve, inv.out_dir / "forecaster_loss.csv");

    json summary;
    summary["format"] = "peco-pretrain-summary";
    summary["version"] = 1;
    summary["val_mse"] = pre.final_val_mse;
    summary["persistence_val_mse"] = pre.persistence_val_mse;
    summary["improvement"] =
        pre.persistence_val_mse > 0.0 ? 1.0 - pre.final_val_mse / pre.persistence_val_mse : 0.0;
    artifacts::write_text(inv.out_dir / "pretrain_summary.json", summary.dump(2) + "\n");
    std::cout << "pretrain: val_mse=" << fmt_double(pre.final_val_mse)
              << " persistence=" << fmt_double(pre.persistence_val_mse) << "\n";

    artifacts::Manifest m;
    m.subcommand = "pretrain";
    m.config_text = config::echo_config(cfg);
    m.artifacts = {"forecaster.json", "forecaster_loss.csv", "pretrain_summary.json"};
    emit_resolved_config(inv.out_dir, m.config_text, m.artifacts);
    artifacts::write_manifest(inv.out_dir, m);
    return 0;
}

int cmd_train(const Invocation& inv) {
    const config::ExperimentConfig cfg = resolve_config(inv);
    const bool hybrid = cfg.train.mode == config::Mode::hybrid;
    std::cout << "train: mode=" << config::to_string(cfg.train.mode)
              << " episodes=" << cfg.train.episodes << " steps=" << cfg.train.steps_per_episode
              << "\n";

    trainer::TrainedArtifacts result =
        hybrid ? trainer::train_hybrid(cfg) : trainer::train_baseline(cfg);

    trainer::write_metrics_csv(result.report, inv.out_dir / "training_metrics.csv");
    result.agent.save(inv.out_dir / "agent.json",
                      std::uint64_t(cfg.train.episodes) * cfg.train.steps_per_episode);
    trainer::write_evaluation_json(result.report.eval, inv.out_dir / "evaluation.json");

    artifacts::Manifest m;
    m.subcommand = "train";
    m.mode = config::to_string(cfg.train.mode);
    m.config_text = config::echo_config(cfg);
    m.artifacts = {"training_metrics.csv", "agent.json", "evaluation.json"};
    if (hybrid) {
        forecaster::save_forecaster(*result.forecaster_net, cfg.forecast,
                                    inv.out_dir / "forecaster.json");
        forecaster::save_loss_curve(result.report.forecaster_curve,
                                    inv.out_dir / "forecaster_loss.csv");
        m.artifacts.push_back("forecaster.json");
        m.artifacts.push_back("forecaster_loss.csv");
    }
    emit_resolved_config(inv.out_dir, m.config_text, m.artifacts);
    artifacts::write_manifest(inv.out_dir, m);

    const auto& rows = result.report.episodes;
    std::cout << "train: first episode reward=" << fmt_double(rows.front().reward)
              << " last=" << fmt_double(rows.back().reward) << "\n";
    std::cout << "train: eval total_reward mean=" << fmt_double(result.report.eval.mean.total_reward)
              << "\n";
    return 0;
}

int cmd_evaluate(const Invocation& inv) {
    const config::ExperimentConfig cfg = resolve_config(inv);
    if (inv.checkpoint.empty())
        throw InvalidArgument("evaluate: --checkpoint is required");
    const bool hybrid = cfg.train.mode == config::Mode::hybrid;
    if (hybrid && inv.forecaster_path.empty())
        throw InvalidArgument("evaluate: hybrid mode requires --forecaster");

    const agent::DdqnAgent loaded = agent::DdqnAgent::load(inv.checkpoint);
    std::optional<nn::Network> fore;
    if (hybrid) fore = forecaster::load_forecaster(inv.forecaster_path, cfg.forecast);

    const trainer::EvalSummary summary = trainer::evaluate(
        loaded, fore ? &*fore : nullptr, cfg, cfg.train.mode, cfg.train.eval_seeds);
    trainer::write_evaluation_json(summary, inv.out_dir / "evaluation.json");
    std::cout << "evaluate: seeds=" << summary.seeds.size()
              << " total_reward mean=" << fmt_double(summary.mean.total_reward) << "\n";

    artifacts::Manifest m;
    m.subcommand = "evaluate";
    m.mode = config::to_string(cfg.train.mode);
    m.config_text = config::echo_config(cfg);
    m.artifacts = {"evaluation.json"};
    m.inputs.emplace_back("checkpoint", fs::absolute(inv.checkpoint).string());
    if (hybrid)
        m.inputs.emplace_back("forecaster", fs::absolute(inv.forecaster_path).string());
    emit_resolved_config(inv.out_dir, m.config_text, m.artifacts);
    artifacts::write_manifest(inv.out_dir, m);
    return 0;
}

int cmd_compare(const Invocation& inv) {
    if (inv.baseline_eval.empty() || inv.hybrid_eval.empty())
        throw InvalidArgument("compare: both --baseline and --hybrid evaluation files are required");
    if (!fs::exists(inv.baseline_eval))
        throw IoError("compare: missing baseline evaluation " + inv.baseline_eval.string());
    if (!fs::exists(inv.hybrid_eval))
        throw IoError("compare: missing hybrid evaluation " + inv.hybrid_eval.string());

    const trainer::EvalSummary base = trainer::read_evaluation_json(inv.baseline_eval);
    const trainer::EvalSummary hyb = trainer::read_evaluation_json(inv.hybrid_eval);
    const trainer::ComparisonSummary cmp = trainer::compare(base, hyb);
    const std::string table = trainer::comparison_table(cmp);
    artifacts::write_text(inv.out_dir / "comparison.txt", table);
    std::cout << table;

    artifacts::Manifest m;
    m.subcommand = "compare";
    m.config_text = "";
    m.artifacts = {"comparison.txt"};
    m.inputs.emplace_back("baseline", fs::absolute(inv.baseline_eval).string());
    m.inputs.emplace_back("hybrid", fs::absolute(inv.hybrid_eval).string());
    artifacts::write_manifest(inv.out_dir, m);
    return 0;
}

int cmd_gradcheck(const Invocation& inv) {
    struct Case {
        const char* name;
        nn::Network net;
        Tensor input;
    };
    Rng rng(20240601);
    auto random_tensor = [&](std::vector<std::size_t> shape) {
        Tensor t = Tensor::zeros(std::move(shape));
        for (double& v : t.data) v = rng.uniform(-1.0, 1.0);
        return t;
    };

    std::vector<Case> cases;
    {
        nn::Network net({nn::LayerSpec::Dense(6, 8), nn::LayerSpec::Act(nn::Activation::tanh),
                         nn::LayerSpec::Dense(8, 3)});
        net.init_params(1);
        cases.push_back({"dense", std::move(net), random_tensor({4, 6})});
    }
    {
        nn::Network net({nn::LayerSpec::Conv1d(2, 3, 3), nn::LayerSpec::Act(nn::Activation::relu)});
        net.init_params(2);
        cases.push_back({"conv1d", std::move(net), random_tensor({3, 2, 9})});
    }
    {
        nn::Network net({nn::LayerSpec::Lstm(3, 5)});
        net.init_params(3);
        cases.push_back({"lstm", std::move(net), random_tensor({2, 3, 7})});
    }
    {
        forecaster::ForecastConfig fc;
        fc.input_channels = 3;
        fc.conv_channels = 4;
        fc.kernel_width = 3;
        fc.lstm_hidden = 6;
        fc.history_window = 10;
        fc.horizon = 2;
        fc.seed = 4;
        cases.push_back({"cnn-lstm-stack", forecaster::build_network(fc), random_tensor({2, 3, 10})});
    }

    std::string out;
    bool all_pass = true;
    for (auto& c : cases) {
        const nn::GradCheckReport rep = nn::gradient_check(c.net, c.input, 1e-4);
        all_pass = all_pass && rep.pass;
        out += std::string(rep.pass ? "[PASS] " : "[FAIL] ") + c.name +
               " max_rel_error=" + fmt_double(rep.max_rel_error) +
               " params=" + std::to_string(rep.param_count) + "\n";
    }
    std::cout << out;
    artifacts::write_text(inv.out_dir / "gradcheck.txt", out);

    artifacts::Manifest m;
    m.subcommand = "gradcheck";
    m.config_text = "";
    m.artifacts = {"gradcheck.txt"};
    artifacts::write_manifest(inv.out_dir, m);
    return all_pass ? 0 : 1;
}

} // namespace

int run(const Invocation& inv) {
    try {
        prepare_out_dir(inv.out_dir);
        if (inv.subcommand == "gen-trace") return cmd_gen_trace(inv);
        if (inv.subcommand == "pretrain") return cmd_pretrain(inv);
        if (inv.subcommand == "train") return cmd_train(inv);
        if (inv.subcommand == "evaluate") return cmd_evaluate(inv);
        if (inv.subcommand == "compare") return cmd_compare(inv);
        if (inv.subcommand == "gradcheck") return cmd_gradcheck(inv);
        throw InvalidArgument("unknown subcommand '" + inv.subcommand + "'");
    } catch (const std::exception& e) {
        json err;
        err["error"]["type"] = typeid(e).name();
        err["error"]["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    }
}

int main_entry(int argc, char** argv) {
    CLI::App app{"peco: proactive edge-cloud orchestration experiments"};
    app.require_subcommand(1);

    Invocation inv;
    std::string seed_str;
    std::string mode_str;

    auto add_common = [&](CLI::App* sub, bool with_config = true) {
        sub->add_option("--out", inv.out_dir, "output directory")->required();
        if (with_config) sub->add_option("--config", inv.config_path, "experiment config file");
        sub->add_option("--seed", seed_str, "override every configured seed stream");
        return sub;
    };

    auto* gen = add_common(app.add_subcommand("gen-trace", "generate the composite workload trace"));
    auto* pre = add_common(app.add_subcommand("pretrain", "pre-train the CNN-LSTM forecaster"));
    auto* train = add_common(app.add_subcommand("train", "run the full training loop"));
    train->add_option("--mode", mode_str, "baseline or hybrid (overrides config)");
    auto* eval = add_common(app.add_subcommand("evaluate", "evaluate a trained agent"));
    eval->add_option("--mode", mode_str, "baseline or hybrid (overrides config)");
    eval->add_option("--checkpoint", inv.checkpoint, "agent checkpoint")->required();
    eval->add_option("--forecaster", inv.forecaster_path, "forecaster checkpoint (hybrid)");
    auto* cmp = app.add_subcommand("compare", "baseline-vs-hybrid comparison table");
    cmp->add_option("--out", inv.out_dir, "output directory")->required();
    cmp->add_option("--baseline", inv.baseline_eval, "baseline evaluation.json")->required();
    cmp->add_option("--hybrid", inv.hybrid_eval, "hybrid evaluation.json")->required();
    auto* grad = app.add_subcommand("gradcheck", "finite-difference gradient check report");
    grad->add_option("--out", inv.out_dir, "output directory")->required();

    (void)gen;
    (void)pre;

    CLI11_PARSE(app, argc, argv);

    inv.subcommand = app.get_subcommands().front()->get_name();
    if (!seed_str.empty()) inv.seed = parse_u64(seed_str, "--seed");
    if (!mode_str.empty()) inv.mode = mode_str;
    return run(inv);
}

} // namespace peco::cli
