#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "augmae/config.hpp"
#include "augmae/eval.hpp"
#include "augmae/graph.hpp"
#include "augmae/losses.hpp"
#include "augmae/model.hpp"
#include "augmae/rng.hpp"
#include "augmae/theory.hpp"
#include "augmae/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "augmae 1.0.0";

constexpr int kExitOk = 0;
constexpr int kExitVerificationFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeAbort = 3;

struct Overrides {
    std::optional<std::string> config_path;
    std::vector<std::pair<std::string, std::string>> kv;
};

void add_common_flags(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--config", ov.config_path, "key=value config file");
    auto opt = [cmd, &ov](const std::string& flag, const std::string& key) {
        cmd->add_option_function<std::string>(
            flag, [&ov, key](const std::string& v) { ov.kv.emplace_back(key, v); });
    };
    opt("--seed", "seed");
    opt("--epochs", "epochs");
    opt("--lambda1", "lambda1");
    opt("--lambda2", "lambda2");
    opt("--gamma", "gamma");
    opt("--tau", "tau");
    opt("--alpha0", "alpha0");
    opt("--alphaT", "alphaT");
    opt("--eta", "eta");
    opt("--mask-ratio", "mask_ratio");
    opt("--d-hidden", "d_hidden");
    opt("--d-out", "d_out");
}

augmae::RunConfig resolve_config(const Overrides& ov) {
    augmae::RunConfig cfg =
        ov.config_path ? augmae::RunConfig::from_file(*ov.config_path) : augmae::RunConfig{};
    for (const auto& [k, v] : ov.kv) cfg.apply(k, v);
    return cfg;
}

void echo_run_info(const augmae::RunConfig& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::ofstream f(out_dir + "/run_info.txt");
    f << "version=" << kVersion << "\n" << cfg.to_string();
}

augmae::Graph load_data_dir(const std::string& dir) {
    std::optional<std::string> labels;
    if (fs::exists(dir + "/labels.csv")) labels = dir + "/labels.csv";
    return augmae::load_graph(dir + "/edges.txt", dir + "/features.csv", labels);
}

int cmd_gen_data(const augmae::RunConfig& cfg, const std::string& out_dir, bool overwrite) {
    fs::create_directories(out_dir);
    for (const char* name : {"edges.txt", "features.csv", "labels.csv"})
        if (!overwrite && fs::exists(out_dir + "/" + name)) {
            std::cerr << "gen-data: " << out_dir << "/" << name
                      << " exists; pass --overwrite to replace\n";
            return kExitConfigError;
        }
    augmae::Graph g = augmae::generate_sbm(cfg.sbm_spec());
    augmae::save_graph(g, out_dir + "/edges.txt", out_dir + "/features.csv",
                       out_dir + "/labels.csv");
    echo_run_info(cfg, out_dir);
    std::cout << "gen-data: wrote " << g.n << " nodes to " << out_dir << "\n";
    return kExitOk;
}

int cmd_train(const augmae::RunConfig& cfg, const std::string& data_dir,
              const std::string& out_dir) {
    augmae::Graph g = load_data_dir(data_dir);
    augmae::ModelConfig mc = cfg.model_config();
    mc.d_in = g.d;
    augmae::Trainer trainer(g, mc, cfg.train_config());
    trainer.fit();
    fs::create_directories(out_dir);
    trainer.save_checkpoint(out_dir + "/checkpoint.txt");
    augmae::save_model(trainer.model(), out_dir + "/model.txt");
    augmae::export_history_csv(trainer.history(), out_dir + "/history.csv");
    echo_run_info(cfg, out_dir);
    double final_sce = trainer.history().empty() ? 0.0 : trainer.history().back().l_sce;
    std::cout << "train: " << trainer.epoch() << " epochs, final l_sce=" << final_sce << "\n";
    return kExitOk;
}

int cmd_eval(const augmae::RunConfig& cfg, const std::string& checkpoint,
             const std::string& data_dir, const std::string& out_dir) {
    augmae::Graph g = load_data_dir(data_dir);
    augmae::Model model = augmae::load_model(checkpoint);
    augmae::ad::Tensor a_norm = augmae::sym_normalize(g);
    augmae::ad::Tape tape;
    augmae::ad::Tensor z = model.encode(tape, a_norm, g.feature_tensor());
    fs::create_directories(out_dir);
    augmae::save_embeddings(z.values(), g.n, model.cfg.d_out, out_dir + "/embeddings.csv");

    json diag;
    diag["version"] = kVersion;
    diag["uniformity"] = augmae::uniformity_value(z.values(), g.n, model.cfg.d_out,
                                                  cfg.t_uniformity, cfg.uniformity_pair_cap,
                                                  cfg.seed);
    if (g.has_labels()) {
        auto align = augmae::eval::supervised_alignment(z.values(), g.n, model.cfg.d_out,
                                                        g.labels, cfg.align_pair_cap, cfg.seed);
        diag["alignment_mean"] = align.mean_distance;
        diag["alignment_histogram"] = align.histogram;
        auto probe = augmae::eval::linear_probe(z.values(), g.n, model.cfg.d_out, g.labels,
                                                cfg.probe_train_fraction, cfg.seed,
                                                cfg.probe_iterations, cfg.probe_lr);
        diag["probe_accuracy"] = probe.accuracy;
    } else {
        diag["alignment_mean"] = nullptr;
        diag["alignment_histogram"] = json::array();
        diag["probe_accuracy"] = nullptr;
    }
    if (model.cfg.d_out == 2) {
        auto density = augmae::eval::export_sphere_density(z.values(), g.n, cfg.density_bins,
                                                           cfg.kde_bandwidth);
        augmae::eval::write_density_csv(density, out_dir + "/density.csv");
        diag["kde_max_min_ratio"] = density.kde_max_min_ratio;
    }
    std::ofstream f(out_dir + "/diagnostics.json");
    f << diag.dump(2) << "\n";
    echo_run_info(cfg, out_dir);
    std::cout << "eval: wrote diagnostics to " << out_dir << "\n";
    return kExitOk;
}

int cmd_verify_bounds(const augmae::RunConfig& cfg, const std::string& out_dir, bool poison_ac) {
    using namespace augmae::theory;
    json report;
    report["version"] = kVersion;
    report["instances"] = cfg.vb_instances;
    int violations = 0;
    json failing = json::array();
    const double gammas[] = {1.0, 2.0, 3.0};

    struct Stat {
        long pass = 0;
        double min_slack = std::numeric_limits<double>::infinity();
        double max_violation = 0.0;
    };
    Stat s42, s44, s45;
    double max_trace_err = 0.0;

    for (int i = 0; i < cfg.vb_instances; ++i) {
        uint64_t inst_seed = augmae::derive_seed(cfg.seed, i, 0xb0);
        BoundInstance inst = random_instance(inst_seed);
        if (poison_ac && inst.n_contexts >= 2)
            inst.a_context[1] += 0.1;  // asymmetric fault injection

        bool inst_ok = true;
        // structural invariants
        double mass = inst.total_mass();
        double ac_mass = 0.0, asym = 0.0;
        for (int a = 0; a < inst.n_contexts; ++a)
            for (int b = 0; b < inst.n_contexts; ++b) {
                ac_mass += inst.a_context[static_cast<size_t>(a) * inst.n_contexts + b];
                asym += std::abs(inst.a_context[static_cast<size_t>(a) * inst.n_contexts + b] -
                                 inst.a_context[static_cast<size_t>(b) * inst.n_contexts + a]);
            }
        if (std::abs(mass - 1.0) > 1e-9 || std::abs(ac_mass - 1.0) > 1e-9 || asym > 1e-12)
            inst_ok = false;

        auto [direct, trace] = pretext_trace_identity(inst);
        max_trace_err = std::max(max_trace_err, std::abs(direct - trace));
        if (std::abs(direct - trace) > 1e-12) inst_ok = false;

        double gamma = gammas[i % 3];
        double eps = inst.measured_epsilon();
        BoundReport r42 = verify_theorem_4_2(inst, gamma, eps);
        BoundReport r44 = verify_theorem_4_4(inst);
        BoundReport r45 = verify_theorem_4_5(inst, gamma, eps);
        for (auto [rep, stat] : {std::pair{&r42, &s42}, {&r44, &s44}, {&r45, &s45}}) {
            if (rep->pass)
                ++stat->pass;
            else {
                inst_ok = false;
                stat->max_violation = std::max(stat->max_violation, -rep->slack);
            }
            stat->min_slack = std::min(stat->min_slack, rep->slack);
        }
        if (!inst_ok) {
            ++violations;
            if (failing.size() < 32) failing.push_back(inst_seed);
        }
    }

    double adv_min_slack = adversarial_search_4_4(augmae::derive_seed(cfg.seed, 0xad5e, 0),
                                                  cfg.vb_restarts);
    if (adv_min_slack < -1e-9) ++violations;

    auto stat_json = [](const Stat& s, long total) {
        return json{{"pass", s.pass},
                    {"total", total},
                    {"min_slack", s.min_slack},
                    {"max_violation", s.max_violation}};
    };
    report["theorem_4_2"] = stat_json(s42, cfg.vb_instances);
    report["theorem_4_4"] = stat_json(s44, cfg.vb_instances);
    report["theorem_4_5"] = stat_json(s45, cfg.vb_instances);
    report["trace_identity_max_error"] = max_trace_err;
    report["adversarial_min_slack"] = adv_min_slack;
    report["adversarial_restarts"] = cfg.vb_restarts;
    report["violations"] = violations;
    report["failing_instance_seeds"] = failing;

    fs::create_directories(out_dir);
    std::ofstream f(out_dir + "/bound_report.json");
    f << report.dump(2) << "\n";
    echo_run_info(cfg, out_dir);
    std::cout << "verify-bounds: " << violations << " violation(s); report in " << out_dir
              << "\n";
    return violations == 0 ? kExitOk : kExitVerificationFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AUG-MAE graph masked autoencoder with bound verification"};
    app.require_subcommand(1);

    Overrides ov_gen, ov_train, ov_eval, ov_verify;
    std::string out_dir = "out";
    std::string data_dir, checkpoint;
    bool overwrite = false, poison_ac = false;

    auto* gen = app.add_subcommand("gen-data", "generate a synthetic SBM dataset");
    add_common_flags(gen, ov_gen);
    gen->add_option("--out", out_dir, "output directory");
    gen->add_flag("--overwrite", overwrite, "replace existing files");

    auto* train = app.add_subcommand("train", "train the model");
    add_common_flags(train, ov_train);
    train->add_option("--data", data_dir, "data directory")->required();
    train->add_option("--out", out_dir, "output directory");

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    add_common_flags(eval, ov_eval);
    eval->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
    eval->add_option("--data", data_dir, "data directory")->required();
    eval->add_option("--out", out_dir, "output directory");

    auto* verify = app.add_subcommand("verify-bounds", "certify the theorem bound chain");
    add_common_flags(verify, ov_verify);
    verify->add_option("--out", out_dir, "output directory");
    verify->add_flag("--poison-ac", poison_ac, "fault injection: perturb A_C asymmetrically");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_data(resolve_config(ov_gen), out_dir, overwrite);
        if (train->parsed()) return cmd_train(resolve_config(ov_train), data_dir, out_dir);
        if (eval->parsed())
            return cmd_eval(resolve_config(ov_eval), checkpoint, data_dir, out_dir);
        if (verify->parsed())
            return cmd_verify_bounds(resolve_config(ov_verify), out_dir, poison_ac);
    } catch (const augmae::TrainAbort& e) {
        std::cerr << "runtime abort: " << e.what() << "\n";
        return kExitRuntimeAbort;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::string what = e.what();
        if (what.rfind("config", 0) == 0) {
            std::cerr << "config error: " << what << "\n";
            return kExitConfigError;
        }
        std::cerr << "error: " << what << "\n";
        return kExitRuntimeAbort;
    }
    return kExitOk;
}
