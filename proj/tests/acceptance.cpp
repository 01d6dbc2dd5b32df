// Acceptance run: one PASS/FAIL line per criterion.
//   acceptance [criterion numbers...]   (default: all)
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "drcr/baselines.hpp"
#include "drcr/bench.hpp"
#include "drcr/data.hpp"
#include "drcr/fit.hpp"
#include "drcr/lp.hpp"
#include "lp_oracle.hpp"
#include "random_lp.hpp"

using namespace drcr;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Dataset abs_data(std::mt19937_64& gen, std::size_t n, std::size_t d, double sigma) {
    std::normal_distribution<double> z;
    std::vector<double> xs(n * d), ys(n);
    for (auto& v : xs) v = z(gen);
    for (std::size_t i = 0; i < n; ++i) {
        double f = 0;
        for (std::size_t k = 0; k < d; ++k) f += std::abs(xs[i * d + k]);
        ys[i] = f + sigma * z(gen);
    }
    return Dataset(d, xs, ys);
}

FitConfig fixed(double delta) {
    FitConfig cfg;
    cfg.delta = delta;
    return cfg;
}

// Strong duality against the brute-force worst-case search.
Outcome duality() {
    std::mt19937_64 gen(101);
    std::uniform_int_distribution<std::size_t> pick_n(2, 5), pick_d(1, 2);
    std::uniform_real_distribution<double> pick_delta(0.01, 0.5);
    double worst_excess = -INFINITY, worst_gap = 0;
    bool monotone = true;
    for (int t = 0; t < 25; ++t) {
        const auto n = pick_n(gen), d = pick_d(gen);
        const auto ds = abs_data(gen, n, d, 0.5);
        const double delta = pick_delta(gen);
        const auto model = fit_drcr(ds, fixed(delta));
        const double dual = dual_objective(model, ds, delta);
        double prev_gap = INFINITY;
        for (std::size_t res : {4, 16, 64, 256}) {
            const double o = worst_case_loss_oracle(model, ds, delta, res);
            worst_excess = std::max(worst_excess, o - dual);
            const double gap = dual - o;
            if (gap > prev_gap + 1e-12) monotone = false;
            prev_gap = gap;
        }
        worst_gap = std::max(worst_gap, prev_gap / std::max(dual, 1e-12));
    }
    return {worst_excess <= 1e-6 && monotone && worst_gap <= 0.05,
            "max(oracle-dual)=" + fmt("%.2e", worst_excess) + " final relative gap=" + fmt("%.2e", worst_gap) +
                (monotone ? " monotone" : " NOT monotone")};
}

Outcome lp_correctness() {
    std::mt19937_64 rng(202);
    int optimal = 0, bad = 0;
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
        const auto lp = testgen::random_lp(rng, t % 5 != 0);
        const auto expect = oracle::vertex_enumeration(lp);
        const auto sol = lp::solve_lp(lp);
        if (!expect) {
            if (sol.status != lp::Status::infeasible) ++bad;
            continue;
        }
        if (sol.status != lp::Status::optimal) {
            ++bad;
            continue;
        }
        ++optimal;
        const double err = std::abs(sol.objective_value - *expect);
        worst = std::max(worst, err);
        const auto res = lp::certify(lp, sol);
        if (err > 1e-7 || res.primal_infeasibility > 1e-8 || res.dual_infeasibility > 1e-8 || res.relative_gap > 1e-7)
            ++bad;
    }
    return {bad == 0, std::to_string(optimal) + " optimal, max |obj - oracle|=" + fmt("%.2e", worst) +
                          ", mismatches=" + std::to_string(bad)};
}

Outcome interpolation() {
    std::mt19937_64 gen(303);
    std::uniform_int_distribution<std::size_t> pick_n(2, 40), pick_d(1, 3);
    double worst = 0;
    for (int t = 0; t < 30; ++t) {
        const auto ds = abs_data(gen, pick_n(gen), pick_d(gen), 0.3);
        const auto f = fit_drcr_detailed(ds, fixed(0.01 * t));
        for (std::size_t j = 0; j < ds.n(); ++j) worst = std::max(worst, std::abs(predict(f.model, ds.x(j)) - f.g[j]));
    }
    return {worst <= 1e-9, "max |f(X_j) - g_j|=" + fmt("%.2e", worst)};
}

Outcome median_property() {
    std::mt19937_64 gen(404);
    std::uniform_int_distribution<std::size_t> pick_n(2, 40), pick_d(1, 3);
    int bad = 0;
    for (int t = 0; t < 50; ++t) {
        const auto ds = abs_data(gen, pick_n(gen), pick_d(gen), 0.4);
        const auto m = fit_drcr(ds, fixed(0.02 * (t % 10)));
        std::size_t above = 0, below = 0;
        for (std::size_t j = 0; j < ds.n(); ++j) {
            const double r = ds.y(j) - predict(m, ds.x(j));
            above += r >= -1e-7;
            below += r <= 1e-7;
        }
        const std::size_t half = (ds.n() + 1) / 2;
        if (above < half || below < half) ++bad;
    }
    return {bad == 0, std::to_string(50 - bad) + "/50 fits satisfy both counts"};
}

Outcome penalty_monotone() {
    std::mt19937_64 gen(505);
    double worst_rise = 0;
    for (int t = 0; t < 10; ++t) {
        const auto ds = abs_data(gen, 15 + 2 * t, 1 + t % 3, 0.3);
        double prev = INFINITY;
        for (double delta : {0.0, 0.05, 0.5, 5.0}) {
            const double s = gradient_sup_norm(fit_drcr(ds, fixed(delta)));
            if (std::isfinite(prev)) worst_rise = std::max(worst_rise, s - prev);
            prev = s;
        }
    }
    return {worst_rise <= 1e-7, "largest increase=" + fmt("%.2e", worst_rise)};
}

Outcome row_generation() {
    std::mt19937_64 gen(606);
    double worst = 0;
    int sparse = 0;
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 15 + (45 * t) / 19, d = 1 + t % 3;
        const auto ds = abs_data(gen, n, d, 0.2);
        FitConfig full = fixed(0.05), lazy = fixed(0.05);
        full.row_generation = false;
        lazy.row_generation = true;
        const auto a = fit_drcr_detailed(ds, full);
        const auto b = fit_drcr_detailed(ds, lazy);
        worst = std::max(worst, std::abs(a.objective - b.objective) / std::max(1.0, std::abs(a.objective)));
        if (static_cast<double>(b.convexity_rows) < 0.4 * static_cast<double>(n * (n - 1))) ++sparse;
    }
    return {worst <= 1e-7 && sparse >= 10, "max relative objective difference=" + fmt("%.2e", worst) +
                                                ", lazy under 40% of rows on " + std::to_string(sparse) + "/20"};
}

Outcome noiseless_recovery() {
    data::SyntheticSpec s;
    s.n = 20;
    s.d = 1;
    s.noise_sigma = 0.0;
    s.seed = 707;
    const auto ds = data::generate_synthetic(s);
    const auto m = fit_drcr(ds, fixed(0.0));
    const double l1 = empirical_l1(predict_all(m, ds), ds.ys());
    return {l1 <= 1e-8, "training l1=" + fmt("%.2e", l1)};
}

bench::ExperimentSpec trend_spec(const fs::path& out) {
    bench::ExperimentSpec s;
    s.methods = bench::parse_methods("drcr,lse(0.8)");
    s.d = 5;
    s.n_list = {50, 200};
    s.dist = data::CovariateDist::gaussian;
    s.noise_sigma = 0.2;
    s.replications = 20;
    s.base_seed = 0;
    s.out_dir = out;
    return s;
}

Outcome trend(const fs::path& out) {
    const auto t = bench::run_benchmark(trend_spec(out));
    bench::emit(t, out);
    const auto *d50 = t.find("drcr", 50), *d200 = t.find("drcr", 200), *l200 = t.find("lse(0.8)", 200);
    std::string detail = "drcr n=50 " + fmt("%.4f", d50->mean_l1) + ", n=200 " + fmt("%.4f", d200->mean_l1) +
                         "; lse(0.8) n=200 " + fmt("%.4f", l200->mean_l1);
    for (const auto& [m, s] : bench::loglog_slopes(t)) detail += "; slope " + m + " " + fmt("%.3f", s);
    const bool ok = t.failures.empty() && d200->mean_l1 < d50->mean_l1 && d200->mean_l1 <= l200->mean_l1;
    if (!t.failures.empty()) detail += "; " + std::to_string(t.failures.size()) + " failed runs";
    return {ok, detail};
}

double naive_loo(const Dataset& ds, double h) {
    double total = 0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        std::vector<std::size_t> keep;
        for (std::size_t j = 0; j < ds.n(); ++j)
            if (j != i) keep.push_back(j);
        const auto rest = ds.subset(keep);
        const double r = ds.y(i) - kernel_predict(KernelModel{&rest, h}, ds.x(i));
        total += r * r;
    }
    return total;
}

Outcome kernel_cv() {
    std::mt19937_64 gen(909);
    int mismatches = 0, argmin_bad = 0;
    for (std::size_t n : {5, 12, 20, 30}) {
        const std::size_t d = 1 + n % 3;
        const auto ds = abs_data(gen, n, d, 0.3);
        const double base = std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(d) + 4.0));
        const auto choice = select_bandwidth(ds);
        for (std::size_t j = 0; j < 100; ++j)
            if (choice.criterion[j] != naive_loo(ds, static_cast<double>(j + 1) / 100.0 * base)) ++mismatches;
        const auto best = std::min_element(choice.criterion.begin(), choice.criterion.end());
        if (choice.C != static_cast<double>(best - choice.criterion.begin() + 1) / 100.0) ++argmin_bad;
    }
    return {mismatches == 0 && argmin_bad == 0,
            std::to_string(mismatches) + " criterion mismatches, " + std::to_string(argmin_bad) + " argmin errors"};
}

Outcome real_data(const fs::path& out) {
    bench::RealDataSpec s;
    s.methods = bench::parse_methods("drcr,linear");
    s.plan = data::PreprocessPlan::make({"so2", "nox", "co2", "nox_rate"}, "heat_input");
    s.train_rows = 400;
    s.replications = 10;
    const auto t = bench::run_real_data(fs::path(DRCR_DATA_DIR) / "air_market_synthetic.csv", s);
    bench::emit(t, out);
    const auto& drcr = t.rows[0];
    const auto& lr = t.rows[1];
    return {t.failures.empty() && drcr.test_l1 <= lr.test_l1,
            "test l1 drcr " + fmt("%.4f", drcr.test_l1) + " vs linear " + fmt("%.4f", lr.test_l1)};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

Outcome determinism(const fs::path& first, const fs::path& second) {
    if (!fs::exists(first / "results.csv")) trend(first);
    trend(second);
    int differ = 0, files = 0;
    for (const auto& e : fs::directory_iterator(first)) {
        ++files;
        if (slurp(e.path()) != slurp(second / e.path().filename())) ++differ;
    }
    return {files >= 4 && differ == 0, std::to_string(files) + " files compared, " + std::to_string(differ) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    const fs::path root = fs::temp_directory_path() / "drcr_acceptance";
    fs::remove_all(root);

    struct Criterion {
        int id;
        const char* name;
        double budget;  // seconds, 0 = none
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all = {
        {1, "strong duality", 10, duality},
        {2, "LP solver correctness", 5, lp_correctness},
        {3, "interpolation identity", 0, interpolation},
        {4, "median property", 0, median_property},
        {5, "penalty monotonicity", 0, penalty_monotone},
        {6, "row-generation equivalence", 0, row_generation},
        {7, "noiseless recovery", 0, noiseless_recovery},
        {8, "convergence trend", 900, [&] { return trend(root / "trend_a"); }},
        {9, "kernel CV", 0, kernel_cv},
        {10, "real-data pipeline", 0, [&] { return real_data(root / "real"); }},
        {11, "determinism", 0, [&] { return determinism(root / "trend_a", root / "trend_b"); }},
    };

    int failed = 0;
    for (const auto& c : all) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto started = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        if (c.budget > 0 && secs > c.budget) {
            o.pass = false;
            o.detail += "; over the " + fmt("%.0f", c.budget) + " s budget";
        }
        failed += !o.pass;
        std::printf("criterion %2d %s: %s  %s (%.1f s)\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(),
                    secs);
        std::fflush(stdout);
    }
    fs::remove_all(root);
    return failed == 0 ? 0 : 1;
}
