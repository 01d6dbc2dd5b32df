#pragma once

// Experiment harness: synthetic benchmark matrices, the train/test pipeline
// on CSV data, and deterministic CSV emission.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "drcr/baselines.hpp"
#include "drcr/data.hpp"
#include "drcr/fit.hpp"

namespace drcr::bench {

enum class MethodKind { drcr, lse, kernel, linear };

struct Method {
    MethodKind kind = MethodKind::drcr;
    double c = 0.0;  ///< LSE cap

    std::string name() const;  ///< "drcr", "lse(0.8)", "kernel", "linear"
    friend bool operator==(const Method&, const Method&) = default;
};

Method parse_method(const std::string& s);
/// Comma separated, e.g. "drcr,lse(0.8),lse(10),kernel".
std::vector<Method> parse_methods(const std::string& s);

struct ExperimentSpec {
    std::vector<Method> methods;
    std::size_t d = 5;
    std::vector<std::size_t> n_list;
    data::CovariateDist dist = data::CovariateDist::gaussian;
    double noise_sigma = 0.2;
    std::size_t replications = 1;
    std::uint64_t base_seed = 0;
    RadiusSchedule schedule;
    std::optional<double> grad_cap;
    LinearLoss linear_loss = LinearLoss::absolute;
    std::size_t threads = 0;  ///< 0 = hardware concurrency
    std::filesystem::path out_dir;

    void validate() const;
};

struct Cell {
    std::string method;
    std::size_t n = 0;
    std::string dist;
    std::size_t runs = 0;      ///< successful replications
    std::size_t failures = 0;  ///< flagged, excluded from the means
    double mean_l1 = 0.0;
    double se_l1 = 0.0;
    double mean_l2 = 0.0;
    double se_l2 = 0.0;
    double seconds = 0.0;  ///< wall clock, never written to files
};

struct Failure {
    std::string method;
    std::size_t n = 0;
    std::size_t replication = 0;
    std::string message;
};

struct ResultTable {
    std::vector<Cell> cells;  ///< methods in spec order, then n ascending
    std::vector<Failure> failures;
    std::string provenance;

    const Cell* find(const std::string& method, std::size_t n) const;
};

/// Fits every method on dataset (base_seed, r, n) for every replication r
/// and n, and scores l1/l2 of the fit against f_star on the training
/// covariates. Results do not depend on the thread count.
ResultTable run_benchmark(const ExperimentSpec& spec);

struct RealDataSpec {
    std::vector<Method> methods;  ///< default drcr, lse(10), linear
    data::PreprocessPlan plan;
    std::size_t train_rows = 400;
    std::size_t replications = 10;
    std::uint64_t base_seed = 0;
    RadiusSchedule schedule;
    std::optional<double> grad_cap;
    LinearLoss linear_loss = LinearLoss::absolute;
    std::size_t threads = 0;

    void validate() const;
};

struct RealDataRow {
    std::string method;
    std::size_t runs = 0;
    std::size_t failures = 0;
    double train_l1 = 0.0;
    double train_se = 0.0;
    double test_l1 = 0.0;
    double test_se = 0.0;
};

struct RealDataTable {
    std::vector<RealDataRow> rows;
    std::vector<Failure> failures;
    std::string provenance;
};

RealDataTable run_real_data(const data::Table& table, const RealDataSpec& spec);
RealDataTable run_real_data(const std::filesystem::path& csv, const RealDataSpec& spec);

/// Least-squares slope of log(mean l1) against log n per method (needs two
/// or more n values with positive means).
std::vector<std::pair<std::string, double>> loglog_slopes(const ResultTable& t, bool l2 = false);

/// Writes results.csv, plot_l1.csv, plot_l2.csv, slopes.csv and, when any
/// run failed, failures.csv into `dir`. Returns the paths written.
std::vector<std::filesystem::path> emit(const ResultTable& t, const std::filesystem::path& dir);
std::vector<std::filesystem::path> emit(const RealDataTable& t, const std::filesystem::path& dir);

void write_results_csv(std::ostream& os, const ResultTable& t);
ResultTable read_results_csv(std::istream& is);

}  // namespace drcr::bench
