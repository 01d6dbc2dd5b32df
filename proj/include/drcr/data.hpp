#pragma once

// Synthetic data generation, CSV ingestion and train/test preprocessing.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "drcr/model.hpp"

namespace drcr::data {

enum class CovariateDist { gaussian, student_t10 };

const char* to_string(CovariateDist d) noexcept;
CovariateDist parse_dist(const std::string& s);  ///< "gaussian" | "t10"

struct SyntheticSpec {
    std::size_t n = 100;
    std::size_t d = 5;
    CovariateDist covariate_dist = CovariateDist::gaussian;
    double noise_sigma = 0.2;
    std::uint64_t seed = 0;
    /// Extra stream coordinates; the benchmark passes (replication, n).
    std::uint64_t stream_a = 0;
    std::uint64_t stream_b = 0;

    void validate() const;
};

/// Ground truth of the synthetic experiments: sum_k |x_k|.
double f_star(std::span<const double> x);

/// Y_i = f_star(X_i) + sigma * Z_i. Bit-identical for identical specs.
Dataset generate_synthetic(const SyntheticSpec& spec);

struct ColumnTransform {
    std::string name;
    bool log = false;
    bool standardize = true;
    double mean = 0.0;  ///< fitted on training rows (after the log)
    double sd = 1.0;
};

/// Column roles and per-column transforms. `fit` fills mean/sd from the
/// training rows only.
struct PreprocessPlan {
    std::vector<ColumnTransform> covariates;
    ColumnTransform response;

    /// Template with log on every covariate and standardization everywhere.
    static PreprocessPlan make(std::vector<std::string> covariates, std::string response,
                               bool log_covariates = true, bool standardize_response = true);
};

/// Header + numeric rows, columns addressed by name.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::size_t column(const std::string& name) const;
};

Table read_csv(std::istream& in);
/// One RFC-4180 record (quotes, doubled quotes) split into raw fields.
std::vector<std::string> split_csv_record(const std::string& line, std::size_t line_no);
Table read_csv_file(const std::filesystem::path& path);

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Seeded permutation of 0..rows-1; the first `train_rows` go to train.
Split random_split(std::size_t rows, std::size_t train_rows, std::uint64_t seed, std::uint64_t replication);

struct Prepared {
    Dataset train;
    Dataset test;
    PreprocessPlan plan;  ///< fitted
};

/// Applies the log transforms, fits standardization on the train rows and
/// applies it to both splits. Throws ParseError with the 1-based data row
/// of the first non-positive value in a log column.
Prepared preprocess(const Table& table, const PreprocessPlan& plan_template, const Split& split);

/// Reads `path` and runs `preprocess` on a seeded split.
Prepared load_and_preprocess(const std::filesystem::path& path, const PreprocessPlan& plan_template,
                             std::size_t train_rows, std::uint64_t seed, std::uint64_t replication = 0);

/// Applies an already fitted plan to raw rows (no refitting).
std::vector<double> apply_plan(const PreprocessPlan& plan, const Table& table, std::size_t row, double* response);

/// Writes `# <tag>` then a header (x1..xd,y) then rows with 17 digits.
void write_dataset_csv(std::ostream& os, const Dataset& data);
Dataset read_dataset_csv(std::istream& in);

/// Stand-in for the air-market emission data: 4 strictly positive covariates
/// (log-normal) and a response that is convex in their logs plus noise.
/// Columns: so2,nox,co2,nox_rate,heat_input.
Table air_market_like(std::size_t rows, std::uint64_t seed);
void write_table_csv(std::ostream& os, const Table& t);

}  // namespace drcr::data
