#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "drcr/bench.hpp"
#include "drcr/error.hpp"

using namespace drcr;
using namespace drcr::bench;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::size_t data_lines(const fs::path& p) {
    std::istringstream in(slurp(p));
    std::string line;
    std::size_t k = 0;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') ++k;
    return k - 1;  // header
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("drcr_test_bench_" + name);
    fs::remove_all(p);
    return p;
}

ExperimentSpec small_spec() {
    ExperimentSpec s;
    s.methods = parse_methods("drcr,lse(0.8),kernel,linear");
    s.d = 2;
    s.n_list = {12, 20};
    s.replications = 3;
    s.base_seed = 17;
    s.threads = 1;
    return s;
}

Dataset replication_data(const ExperimentSpec& spec, std::size_t r, std::size_t n) {
    data::SyntheticSpec ss;
    ss.n = n;
    ss.d = spec.d;
    ss.covariate_dist = spec.dist;
    ss.noise_sigma = spec.noise_sigma;
    ss.seed = spec.base_seed;
    ss.stream_a = r;
    ss.stream_b = n;
    return data::generate_synthetic(ss);
}

}  // namespace

TEST_CASE("method names") {
    CHECK(parse_method("drcr").name() == "drcr");
    CHECK(parse_method("lse(0.8)") == Method{MethodKind::lse, 0.8});
    CHECK(parse_method("lse:10") == Method{MethodKind::lse, 10.0});
    CHECK(parse_method("lse=2.5").c == 2.5);
    CHECK(parse_method("lse").c == 10.0);
    CHECK(parse_method("lr").kind == MethodKind::linear);
    CHECK(parse_method("lse(0.8)").name() == "lse(0.8)");
    const auto all = parse_methods("drcr, lse(0.8),lse(10),kernel");
    REQUIRE(all.size() == 4);
    CHECK(all[2].c == 10.0);
    CHECK_THROWS_AS(parse_method("svm"), InvalidArgument);
    CHECK_THROWS_AS(parse_method("lse(-1)"), InvalidArgument);
    CHECK_THROWS_AS(parse_method("lse(abc)"), InvalidArgument);
    CHECK_THROWS_AS(parse_methods(""), InvalidArgument);
    CHECK_THROWS_AS(parse_methods(" , "), InvalidArgument);
}

TEST_CASE("spec validation") {
    auto s = small_spec();
    s.methods.clear();
    CHECK_THROWS_AS(run_benchmark(s), InvalidArgument);
    s = small_spec();
    s.n_list = {20, 12};
    CHECK_THROWS_AS(run_benchmark(s), InvalidArgument);
    s = small_spec();
    s.n_list = {};
    CHECK_THROWS_AS(run_benchmark(s), InvalidArgument);
    s = small_spec();
    s.replications = 0;
    CHECK_THROWS_AS(run_benchmark(s), InvalidArgument);
    s = small_spec();
    s.schedule.kind = ScheduleKind::theoretical;
    CHECK_THROWS_AS(run_benchmark(s), InvalidArgument);
}

TEST_CASE("cells aggregate every replication and match a direct recomputation") {
    const auto spec = small_spec();
    const auto t = run_benchmark(spec);
    REQUIRE(t.cells.size() == 8);
    CHECK(t.failures.empty());
    std::size_t runs = 0;
    for (const auto& c : t.cells) runs += c.runs;
    CHECK(runs == spec.replications * spec.methods.size() * spec.n_list.size());
    CHECK(t.cells[0].method == "drcr");
    CHECK(t.cells[0].n == 12);
    CHECK(t.cells[1].n == 20);
    CHECK(t.cells[2].method == "lse(0.8)");

    // drcr at n = 20 recomputed from scratch
    std::vector<double> l1, l2;
    for (std::size_t r = 0; r < 3; ++r) {
        const auto ds = replication_data(spec, r, 20);
        FitConfig cfg;
        const auto m = fit_drcr(ds, cfg);
        std::vector<double> truth(ds.n());
        for (std::size_t i = 0; i < ds.n(); ++i) truth[i] = data::f_star(ds.x(i));
        const auto p = predict_all(m, ds);
        l1.push_back(empirical_l1(p, truth));
        l2.push_back(empirical_l2(p, truth));
    }
    const double mean = (l1[0] + l1[1] + l1[2]) / 3;
    double ss = 0;
    for (double v : l1) ss += (v - mean) * (v - mean);
    const auto* cell = t.find("drcr", 20);
    REQUIRE(cell != nullptr);
    CHECK(cell->mean_l1 == doctest::Approx(mean).epsilon(1e-15));
    CHECK(cell->se_l1 == doctest::Approx(std::sqrt(ss / 2) / std::sqrt(3.0)).epsilon(1e-12));
    CHECK(cell->mean_l2 == doctest::Approx((l2[0] + l2[1] + l2[2]) / 3).epsilon(1e-15));
    CHECK(t.find("drcr", 99) == nullptr);
}

TEST_CASE("results do not depend on the thread count") {
    auto a = small_spec(), b = small_spec();
    b.threads = 3;
    std::ostringstream x, y;
    write_results_csv(x, run_benchmark(a));
    write_results_csv(y, run_benchmark(b));
    CHECK(x.str() == y.str());
}

TEST_CASE("noiseless data: drcr beats the constant-median fit") {
    ExperimentSpec s;
    s.methods = parse_methods("drcr");
    s.d = 5;
    s.n_list = {50};
    s.noise_sigma = 0.0;
    s.base_seed = 3;
    const auto t = run_benchmark(s);
    const auto ds = replication_data(s, 0, 50);
    auto ys = ds.ys();
    std::nth_element(ys.begin(), ys.begin() + 25, ys.end());
    const double med = ys[25];
    double l1 = 0;
    for (std::size_t i = 0; i < ds.n(); ++i) l1 += std::abs(med - data::f_star(ds.x(i)));
    l1 /= 50;
    CHECK(t.cells[0].mean_l1 <= l1);
}

TEST_CASE("emit writes stable files and round-trips") {
    const auto spec = small_spec();
    const auto t = run_benchmark(spec);
    const auto dir = scratch("emit");
    const auto files = emit(t, dir);
    CHECK(files.size() == 4);
    CHECK(!fs::exists(dir / "failures.csv"));
    CHECK(data_lines(dir / "plot_l1.csv") == spec.methods.size() * spec.n_list.size());
    CHECK(data_lines(dir / "plot_l2.csv") == spec.methods.size() * spec.n_list.size());
    CHECK(data_lines(dir / "slopes.csv") == 2 * spec.methods.size());

    std::ifstream in(dir / "results.csv");
    const auto back = read_results_csv(in);
    REQUIRE(back.cells.size() == t.cells.size());
    CHECK(back.provenance == t.provenance);
    for (std::size_t i = 0; i < t.cells.size(); ++i) {
        CHECK(back.cells[i].method == t.cells[i].method);
        CHECK(back.cells[i].dist == t.cells[i].dist);
        CHECK(back.cells[i].n == t.cells[i].n);
        CHECK(back.cells[i].runs == t.cells[i].runs);
        CHECK(back.cells[i].failures == t.cells[i].failures);
        CHECK(back.cells[i].mean_l1 == t.cells[i].mean_l1);
        CHECK(back.cells[i].se_l1 == t.cells[i].se_l1);
        CHECK(back.cells[i].mean_l2 == t.cells[i].mean_l2);
        CHECK(back.cells[i].se_l2 == t.cells[i].se_l2);
    }

    const auto first = slurp(dir / "results.csv");
    emit(run_benchmark(spec), dir);
    CHECK(slurp(dir / "results.csv") == first);
    // timings never reach the files
    CHECK(first.find("seconds") == std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("failures are listed and excluded") {
    ResultTable t;
    t.provenance = "manual";
    t.cells.push_back({"drcr", 10, "gaussian", 1, 1, 0.5, 0.0, 0.6, 0.0, 0.0});
    t.failures.push_back({"drcr", 10, 1, "solver: iteration limit, \"quoted\""});
    const auto dir = scratch("fail");
    const auto files = emit(t, dir);
    CHECK(files.size() == 5);
    const auto text = slurp(dir / "failures.csv");
    CHECK(text.find("drcr,10,1,\"solver: iteration limit, \"\"quoted\"\"\"") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("emit errors") {
    ResultTable empty;
    CHECK_THROWS_AS(emit(empty, scratch("empty")), InvalidArgument);
    const auto blocker = scratch("blocker");
    std::ofstream(blocker) << "x";
    ResultTable t;
    t.cells.push_back({"drcr", 10, "gaussian", 1, 0, 0.5, 0.0, 0.6, 0.0, 0.0});
    CHECK_THROWS_AS(emit(t, blocker / "sub"), IoError);
    fs::remove(blocker);

    std::istringstream bad("method,dist\n");
    CHECK_THROWS_AS(read_results_csv(bad), ParseError);
}

TEST_CASE("log-log slopes") {
    ResultTable t;
    // mean = 2 n^-0.5 exactly on a log scale
    for (std::size_t n : {16, 64, 256})
        t.cells.push_back({"m", n, "gaussian", 1, 0, 2 / std::sqrt(static_cast<double>(n)), 0, 1.0, 0, 0});
    const auto s = loglog_slopes(t);
    REQUIRE(s.size() == 1);
    CHECK(s[0].first == "m");
    CHECK(s[0].second == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(loglog_slopes(t, true)[0].second == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("real-data pipeline") {
    const auto table = data::air_market_like(90, 5);
    RealDataSpec s;
    s.methods = parse_methods("drcr,lse(10),linear,kernel");
    s.plan = data::PreprocessPlan::make({"so2", "nox", "co2", "nox_rate"}, "heat_input");
    s.train_rows = 60;
    s.replications = 2;
    s.threads = 1;
    const auto t = run_real_data(table, s);
    REQUIRE(t.rows.size() == 4);
    for (const auto& r : t.rows) {
        CHECK(r.runs == 2);
        CHECK(std::isfinite(r.test_l1));
    }
    // drcr train loss recomputed
    double tr = 0;
    for (std::size_t r = 0; r < 2; ++r) {
        const auto p = data::preprocess(table, s.plan, data::random_split(90, 60, 0, r));
        tr += empirical_l1(predict_all(fit_drcr(p.train, {}), p.train), p.train.ys());
    }
    CHECK(t.rows[0].train_l1 == doctest::Approx(tr / 2).epsilon(1e-14));

    const auto dir = scratch("real");
    emit(t, dir);
    CHECK(data_lines(dir / "real_data.csv") == 4);
    fs::remove_all(dir);

    s.train_rows = 90;
    CHECK_THROWS_AS(run_real_data(table, s), InvalidArgument);
}

TEST_CASE("real-data: constant response gives zero training loss") {
    auto table = data::air_market_like(40, 2);
    for (auto& row : table.rows) row[4] = 7.5;
    RealDataSpec s;
    s.methods = parse_methods("drcr,lse(10),linear,kernel");
    s.plan = data::PreprocessPlan::make({"so2", "nox", "co2", "nox_rate"}, "heat_input");
    s.train_rows = 30;
    s.replications = 2;
    for (bool standardize : {true, false}) {
        s.plan.response.standardize = standardize;
        const auto t = run_real_data(table, s);
        for (const auto& r : t.rows) CHECK(std::abs(r.train_l1) <= 1e-9);
    }
}

TEST_CASE("real-data: bad rows are input errors") {
    auto table = data::air_market_like(40, 2);
    table.rows[3][0] = -1.0;
    RealDataSpec s;
    s.methods = parse_methods("linear");
    s.plan = data::PreprocessPlan::make({"so2", "nox", "co2", "nox_rate"}, "heat_input");
    s.train_rows = 30;
    CHECK_THROWS_AS(run_real_data(table, s), ParseError);
    CHECK_THROWS_AS(run_real_data(fs::path("/nonexistent/x.csv"), s), IoError);
}
