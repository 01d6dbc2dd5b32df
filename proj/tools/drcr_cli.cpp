// drcr command-line front end. Talks to the library only through drcr.h.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "drcr/drcr.h"

namespace {

enum Exit { ok = 0, internal = 1, invalid = 2, solver = 3, io = 4 };

int exit_for(drcr_status s) {
    switch (s) {
        case DRCR_OK: return ok;
        case DRCR_ERR_INVALID: return invalid;
        case DRCR_ERR_SOLVER: return solver;
        case DRCR_ERR_IO:
        case DRCR_ERR_PARSE: return io;
        default: return internal;
    }
}

int report(drcr_status s) {
    if (s != DRCR_OK) std::fprintf(stderr, "drcr: %s\n", drcr_last_error());
    return exit_for(s);
}

struct Common {
    double delta = -1;
    std::string schedule;
    double gamma = 0;
    double multiplier = 1;
    double grad_cap = 0;
    std::string dist = "gaussian";
    double sigma = 0.2;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    std::string methods;
    std::string out;
    std::size_t threads = 0;
    std::string linear_loss = "absolute";
};

drcr_dist to_dist(const std::string& s) { return s == "t10" ? DRCR_DIST_T10 : DRCR_DIST_GAUSSIAN; }

drcr_linear_loss to_loss(const std::string& s) {
    return s == "squared" ? DRCR_LINEAR_SQUARED : DRCR_LINEAR_ABSOLUTE;
}

// Resolves --schedule/--delta: a bare --delta means a fixed radius.
drcr_schedule to_schedule(const Common& c) {
    if (c.schedule.empty()) return c.delta >= 0 ? DRCR_SCHEDULE_FIXED : DRCR_SCHEDULE_EXPERIMENTAL;
    if (c.schedule == "theoretical") return DRCR_SCHEDULE_THEORETICAL;
    if (c.schedule == "fixed") return DRCR_SCHEDULE_FIXED;
    return DRCR_SCHEDULE_EXPERIMENTAL;
}

void radius_flags(CLI::App* app, Common& c) {
    app->add_option("--delta", c.delta, "Wasserstein radius (implies --schedule fixed)")->check(CLI::NonNegativeNumber);
    app->add_option("--schedule", c.schedule, "radius schedule")
        ->check(CLI::IsMember({"experimental", "theoretical", "fixed"}));
    app->add_option("--gamma", c.gamma, "tail exponent for the theoretical schedule")->check(CLI::PositiveNumber);
    app->add_option("--multiplier", c.multiplier, "leading constant of the theoretical schedule")
        ->check(CLI::PositiveNumber);
    app->add_option("--grad-cap", c.grad_cap, "bound on |xi| (default ln n)")->check(CLI::PositiveNumber);
}

void run_flags(CLI::App* app, Common& c) {
    app->add_option("--methods", c.methods, "comma separated: drcr,lse(c),kernel,linear");
    app->add_option("--reps", c.reps, "replications")->check(CLI::PositiveNumber);
    app->add_option("--seed", c.seed, "base seed");
    app->add_option("--threads", c.threads, "worker threads (0 = all cores)");
    app->add_option("--linear-loss", c.linear_loss, "loss for the linear baseline")
        ->check(CLI::IsMember({"absolute", "squared"}));
}

// Config keys become flags inserted ahead of the user's own, so the user's win
// under the take-last policy.
std::vector<std::string> config_tokens(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CLI::FileError::Missing(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw CLI::ConversionError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config: expected a JSON object");
    std::vector<std::string> out;
    for (const auto& [key, v] : j.items()) {
        const std::string flag = "--" + key;
        if (v.is_boolean()) {
            if (v.get<bool>()) out.push_back(flag);
        } else if (v.is_array()) {
            std::string joined;
            for (const auto& e : v) {
                if (!joined.empty()) joined += ',';
                joined += e.is_string() ? e.get<std::string>() : e.dump();
            }
            out.push_back(flag);
            out.push_back(joined);
        } else if (v.is_string()) {
            out.push_back(flag);
            out.push_back(v.get<std::string>());
        } else if (v.is_number()) {
            out.push_back(flag);
            out.push_back(v.dump());
        } else {
            throw CLI::ConversionError("config: unsupported value for '" + key + "'");
        }
    }
    return out;
}

std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string path;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (path.empty()) return rest;
    std::vector<std::string> out;
    // insert right after the subcommand name
    std::size_t at = 0;
    while (at < rest.size() && rest[at].rfind("-", 0) == 0) ++at;
    for (std::size_t i = 0; i <= at && i < rest.size(); ++i) out.push_back(rest[i]);
    for (auto& t : config_tokens(path)) out.push_back(std::move(t));
    for (std::size_t i = at + 1; i < rest.size(); ++i) out.push_back(rest[i]);
    return out;
}

struct Handles {
    drcr_dataset* ds = nullptr;
    drcr_model* model = nullptr;
    ~Handles() {
        drcr_model_free(model);
        drcr_dataset_free(ds);
    }
};

int cmd_fit(const Common& c, const std::string& data, const std::string& method, double lse_c, bool verbose) {
    Handles h;
    if (auto s = drcr_dataset_read_csv(data.c_str(), &h.ds)) return report(s);
    drcr_status s = DRCR_OK;
    if (method == "drcr") {
        drcr_fit_options o;
        drcr_fit_options_init(&o);
        o.schedule = to_schedule(c);
        o.delta = c.delta;
        o.gamma = c.gamma;
        o.multiplier = c.multiplier;
        o.grad_cap = c.grad_cap;
        o.log_diagnostics = verbose ? 1 : 0;
        s = drcr_fit(h.ds, &o, &h.model);
    } else if (method == "lse") {
        s = drcr_fit_lse(h.ds, lse_c, &h.model);
    } else {
        s = drcr_fit_linear(h.ds, to_loss(c.linear_loss), &h.model);
    }
    if (s) return report(s);
    if (auto e = drcr_model_save(h.model, c.out.c_str())) return report(e);
    std::printf("method=%s n=%zu d=%zu pieces=%zu objective=%.17g delta=%.17g grad_sup=%.17g\n", method.c_str(),
                drcr_dataset_n(h.ds), drcr_dataset_d(h.ds), drcr_model_pieces(h.model),
                drcr_model_objective(h.model), drcr_model_delta(h.model), drcr_model_gradient_sup_norm(h.model));
    return ok;
}

int cmd_predict(const std::string& model_path, const std::string& data, const std::string& out) {
    Handles h;
    if (auto s = drcr_model_load(model_path.c_str(), &h.model)) return report(s);
    if (auto s = drcr_dataset_read_csv(data.c_str(), &h.ds)) return report(s);
    const std::size_t n = drcr_dataset_n(h.ds), d = drcr_dataset_d(h.ds);
    std::vector<double> x(d), pred(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (auto s = drcr_dataset_row(h.ds, i, x.data(), &y[i])) return report(s);
        if (auto s = drcr_model_predict(h.model, x.data(), d, &pred[i])) return report(s);
    }
    std::FILE* f = out.empty() || out == "-" ? stdout : std::fopen(out.c_str(), "wb");
    if (!f) {
        std::fprintf(stderr, "drcr: cannot write '%s'\n", out.c_str());
        return io;
    }
    std::fprintf(f, "prediction,y\n");
    double l1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::fprintf(f, "%.17g,%.17g\n", pred[i], y[i]);
        l1 += std::abs(pred[i] - y[i]);
    }
    const bool failed = f != stdout ? std::fclose(f) != 0 : std::fflush(f) != 0;
    if (failed) {
        std::fprintf(stderr, "drcr: failed writing '%s'\n", out.c_str());
        return io;
    }
    std::fprintf(stderr, "n=%zu mean_abs_error=%.17g\n", n, l1 / static_cast<double>(n));
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributionally robust convex regression"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.set_version_flag("--version", std::string(drcr_version()));
    std::string config_help;
    app.add_option("--config", config_help, "JSON file of flag values; command-line flags win");

    Common c;
    bool verbose = false;

    auto* fit = app.add_subcommand("fit", "fit a model on a dataset CSV (x1..xd,y)");
    std::string fit_data, fit_method = "drcr";
    double lse_c = 10.0;
    fit->add_option("--data", fit_data, "training CSV")->required();
    fit->add_option("--method", fit_method, "estimator")->check(CLI::IsMember({"drcr", "lse", "linear"}));
    fit->add_option("--lse-c", lse_c, "gradient cap for --method lse")->check(CLI::PositiveNumber);
    fit->add_option("--out", c.out, "model JSON")->required();
    fit->add_option("--linear-loss", c.linear_loss, "loss for --method linear")
        ->check(CLI::IsMember({"absolute", "squared"}));
    fit->add_flag("--verbose", verbose, "solver diagnostics on stderr");
    radius_flags(fit, c);

    auto* pred = app.add_subcommand("predict", "evaluate a saved model on a dataset CSV");
    std::string model_path, pred_data;
    pred->add_option("--model", model_path, "model JSON")->required();
    pred->add_option("--data", pred_data, "dataset CSV")->required();
    pred->add_option("--out", c.out, "predictions CSV (default stdout)");

    auto* bench = app.add_subcommand("benchmark", "synthetic benchmark matrix");
    std::vector<std::size_t> n_list{50, 100, 150, 200, 250, 300, 350};
    std::size_t d = 5;
    c.methods = "drcr,lse(0.8),lse(10),kernel";
    c.reps = 1;
    c.out = "results";
    bool quiet = false;
    bench->add_option("--n", n_list, "sample sizes, ascending")->delimiter(',')->expected(1, -1);
    bench->add_option("--d", d, "dimension")->check(CLI::PositiveNumber);
    bench->add_option("--dist", c.dist, "covariate distribution")->check(CLI::IsMember({"gaussian", "t10"}));
    bench->add_option("--sigma", c.sigma, "noise sd")->check(CLI::NonNegativeNumber);
    bench->add_option("--out", c.out, "output directory");
    bench->add_flag("--quiet", quiet, "no summary table");
    run_flags(bench, c);
    radius_flags(bench, c);

    auto* real = app.add_subcommand("real-data", "train/test pipeline on a CSV table");
    std::string real_data, covariates = "so2,nox,co2,nox_rate", response = "heat_input";
    std::size_t train_rows = 400;
    bool no_log = false, raw_response = false;
    std::string real_methods = "drcr,lse(10),linear";
    std::size_t real_reps = 10;
    real->add_option("--data", real_data, "input CSV")->required();
    real->add_option("--covariates", covariates, "comma separated covariate columns");
    real->add_option("--response", response, "response column");
    real->add_option("--train-rows", train_rows, "rows in each training split")->check(CLI::PositiveNumber);
    real->add_flag("--no-log", no_log, "skip the log transform of covariates");
    real->add_flag("--raw-response", raw_response, "do not standardize the response");
    real->add_option("--out", c.out, "output directory");
    real->add_flag("--quiet", quiet, "no summary table");
    real->add_option("--methods", real_methods, "comma separated: drcr,lse(c),kernel,linear");
    real->add_option("--reps", real_reps, "replications")->check(CLI::PositiveNumber);
    real->add_option("--seed", c.seed, "split seed");
    real->add_option("--threads", c.threads, "worker threads (0 = all cores)");
    real->add_option("--linear-loss", c.linear_loss, "loss for the linear baseline")
        ->check(CLI::IsMember({"absolute", "squared"}));
    radius_flags(real, c);

    auto* gen = app.add_subcommand("gen-data", "write a synthetic dataset CSV");
    std::size_t gen_n = 100, gen_d = 5;
    bool air = false;
    gen->add_option("--n", gen_n, "rows")->check(CLI::PositiveNumber);
    gen->add_option("--d", gen_d, "dimension")->check(CLI::PositiveNumber);
    gen->add_option("--dist", c.dist, "covariate distribution")->check(CLI::IsMember({"gaussian", "t10"}));
    gen->add_option("--sigma", c.sigma, "noise sd")->check(CLI::NonNegativeNumber);
    gen->add_option("--seed", c.seed, "seed");
    gen->add_option("--out", c.out, "output CSV")->required();
    gen->add_flag("--air-market", air, "emissions-style table (so2,nox,co2,nox_rate,heat_input)");

    try {
        auto args = expand_config(argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return invalid;
    }

    if (*fit) return cmd_fit(c, fit_data, fit_method, lse_c, verbose);
    if (*pred) return cmd_predict(model_path, pred_data, c.out);

    if (*gen) {
        if (air) return report(drcr_write_air_market_csv(c.out.c_str(), gen_n, c.seed));
        drcr_synthetic_spec s;
        drcr_synthetic_spec_init(&s);
        s.n = gen_n;
        s.d = gen_d;
        s.dist = to_dist(c.dist);
        s.sigma = c.sigma;
        s.seed = c.seed;
        Handles h;
        if (auto e = drcr_generate_synthetic(&s, &h.ds)) return report(e);
        return report(drcr_dataset_write_csv(h.ds, c.out.c_str()));
    }

    std::size_t failed = 0;
    drcr_status s = DRCR_OK;
    if (*bench) {
        drcr_benchmark_spec b;
        drcr_benchmark_spec_init(&b);
        b.methods = c.methods.c_str();
        b.d = d;
        b.n_list = n_list.data();
        b.n_count = n_list.size();
        b.dist = to_dist(c.dist);
        b.sigma = c.sigma;
        b.replications = c.reps;
        b.seed = c.seed;
        b.schedule = to_schedule(c);
        b.delta = c.delta;
        b.gamma = c.gamma;
        b.multiplier = c.multiplier;
        b.grad_cap = c.grad_cap;
        b.linear_loss = to_loss(c.linear_loss);
        b.threads = c.threads;
        b.out_dir = c.out.c_str();
        b.print_summary = quiet ? 0 : 1;
        s = drcr_run_benchmark(&b, &failed);
    } else {
        drcr_real_data_spec r;
        drcr_real_data_spec_init(&r);
        r.csv_path = real_data.c_str();
        r.covariates = covariates.c_str();
        r.response = response.c_str();
        r.log_covariates = no_log ? 0 : 1;
        r.standardize_response = raw_response ? 0 : 1;
        r.methods = real_methods.c_str();
        r.train_rows = train_rows;
        r.replications = real_reps;
        r.seed = c.seed;
        r.schedule = to_schedule(c);
        r.delta = c.delta;
        r.gamma = c.gamma;
        r.multiplier = c.multiplier;
        r.grad_cap = c.grad_cap;
        r.linear_loss = to_loss(c.linear_loss);
        r.threads = c.threads;
        r.out_dir = c.out.c_str();
        r.print_summary = quiet ? 0 : 1;
        s = drcr_run_real_data(&r, &failed);
    }
    if (s) return report(s);
    if (failed) {
        std::fprintf(stderr, "drcr: %zu run(s) failed; see failures.csv\n", failed);
        return solver;
    }
    return ok;
}
