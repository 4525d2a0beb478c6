// clusterfit: simulation laboratory for nonparametric mean-function
// regression on clustered repeated-measurements data.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "clusterfit/funclass.hpp"
#include "clusterfit/harness.hpp"
#include "clusterfit/serialize.hpp"

namespace {

int run_config_command(const std::string& config, const std::string& out, int workers) {
    auto files = clusterfit::harness::run_config(config, out, workers);
    for (const auto& f : files) std::cout << f << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"clusterfit: rate and phase-transition experiments for pooled regression on repeated measurements"};
    app.require_subcommand(1);

    std::string config, out = ".";
    int workers = 1;

    auto add_common = [&](CLI::App* cmd, bool config_required = true) {
        auto* opt = cmd->add_option("--config", config, "JSON config file");
        if (config_required) opt->required();
        cmd->add_option("--out", out, "output directory");
        cmd->add_option("--workers", workers, "worker threads");
    };

    auto* generate = app.add_subcommand("generate", "draw a dataset and write csv + sidecar");
    add_common(generate);
    auto* fit = app.add_subcommand("fit", "fit one estimator to a dataset on disk");
    add_common(fit, false);
    auto* rate = app.add_subcommand("rate-sweep", "mspe across an (n, m) grid with slope fit");
    add_common(rate);
    auto* phase = app.add_subcommand("phase-scan", "mspe across m at fixed n with plateau detection");
    add_common(phase);
    auto* bench = app.add_subcommand("approx-bench", "noiseless approximation error across network sizes");
    add_common(bench);
    auto* gamma = app.add_subcommand("gamma", "smoothness-dimension ratio of a composition tree");
    add_common(gamma);

    // direct flags for `fit`, bypassing the config file
    std::string fit_data, fit_estimator = "spline", fit_model_out = "model.txt",
                fit_report_out = "report.csv", fit_optimizer = "adam";
    int fit_k = 0, fit_order = 3, fit_depth = 3, fit_width = 3, fit_epochs = 2000, fit_batch = 64,
        fit_restarts = 1, fit_patience = 200;
    double fit_box = 0.0, fit_beta = 1.0, fit_lr = 1e-3;
    unsigned long long fit_seed = 1;
    fit->add_option("--data", fit_data, "dataset csv path");
    fit->add_option("--estimator", fit_estimator, "spline | mlp");
    fit->add_option("--k", fit_k, "spline resolution");
    fit->add_option("--order", fit_order, "spline order");
    fit->add_option("--box-bound", fit_box, "spline coefficient box (0 = log n)");
    fit->add_option("--depth", fit_depth, "mlp depth");
    fit->add_option("--width", fit_width, "mlp width");
    fit->add_option("--beta", fit_beta, "mlp output truncation");
    fit->add_option("--optimizer", fit_optimizer, "adam | gd");
    fit->add_option("--learning-rate", fit_lr, "optimizer step size");
    fit->add_option("--epochs", fit_epochs, "training epochs");
    fit->add_option("--batch", fit_batch, "minibatch size");
    fit->add_option("--restarts", fit_restarts, "independent restarts");
    fit->add_option("--patience", fit_patience, "early-stop patience (0 = off)");
    fit->add_option("--seed", fit_seed, "training seed");
    fit->add_option("--model-out", fit_model_out, "model output path");
    fit->add_option("--report-out", fit_report_out, "report csv output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit->parsed() && config.empty()) {
            if (fit_data.empty()) {
                std::cerr << "fit: provide --config or --data\n";
                return 2;
            }
            clusterfit::serialize::json block;
            block["data"] = fit_data;
            block["name"] = "fit";
            clusterfit::serialize::json est;
            est["kind"] = fit_estimator;
            est["order"] = fit_order;
            est["box_bound"] = fit_box;
            est["beta"] = fit_beta;
            est["optimizer"] = fit_optimizer;
            est["learning_rate"] = fit_lr;
            est["epochs"] = fit_epochs;
            est["batch_size"] = fit_batch;
            est["restarts"] = fit_restarts;
            est["patience"] = fit_patience;
            block["estimator"] = est;
            block["seed"] = fit_seed;
            if (fit_k > 0) block["k"] = fit_k;
            block["depth"] = fit_depth;
            block["width"] = fit_width;
            clusterfit::serialize::json cfg;
            cfg["fit"] = block;
            std::string tmp = out + "/.fit_config.json";
            clusterfit::serialize::write_file(tmp, cfg.dump());
            auto files = clusterfit::harness::run_config(tmp, out, workers);
            std::remove(tmp.c_str());
            // honor the explicit output names
            for (const auto& f : files) {
                if (f.size() > 10 && f.substr(f.size() - 10) == "_model.txt") {
                    clusterfit::serialize::write_file(fit_model_out, clusterfit::serialize::read_file(f));
                    std::cout << fit_model_out << '\n';
                } else if (f.size() > 11 && f.substr(f.size() - 11) == "_report.csv") {
                    clusterfit::serialize::write_file(fit_report_out, clusterfit::serialize::read_file(f));
                    std::cout << fit_report_out << '\n';
                }
            }
            return 0;
        }
        if (gamma->parsed()) {
            // also echo the gamma table to stdout
            auto files = clusterfit::harness::run_config(config, out, workers);
            for (const auto& f : files) {
                if (f.size() > 4 && f.substr(f.size() - 4) == ".csv")
                    std::cout << clusterfit::serialize::read_file(f);
            }
            return 0;
        }
        return run_config_command(config, out, workers);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
