#include "drcr/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "drcr/error.hpp"
#include "drcr/rng.hpp"

namespace drcr::data {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::vector<std::string> split_csv_record(const std::string& line, std::size_t line_no) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    if (quoted) throw ParseError("csv: unterminated quote", line_no);
    out.push_back(std::move(field));
    return out;
}

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

double parse_number(const std::string& raw, std::size_t line_no, const std::string& column) {
    const auto s = trim(raw);
    if (s.empty()) throw ParseError("csv: missing value in column '" + column + "'", line_no);
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || !std::isfinite(v))
        throw ParseError("csv: '" + s + "' in column '" + column + "' is not a finite number", line_no);
    return v;
}

}  // namespace

const char* to_string(CovariateDist d) noexcept {
    return d == CovariateDist::gaussian ? "gaussian" : "t10";
}

CovariateDist parse_dist(const std::string& s) {
    if (s == "gaussian") return CovariateDist::gaussian;
    if (s == "t10" || s == "student_t10") return CovariateDist::student_t10;
    detail::invalid("unknown covariate distribution '" + s + "' (expected gaussian or t10)");
}

void SyntheticSpec::validate() const {
    detail::require(n >= 2, "synthetic: n must be >= 2");
    detail::require(d >= 1, "synthetic: d must be >= 1");
    detail::require(noise_sigma >= 0 && std::isfinite(noise_sigma), "synthetic: sigma must be >= 0");
}

double f_star(std::span<const double> x) {
    double s = 0;
    for (double v : x) s += std::abs(v);
    return s;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    auto cov = rng::Stream::derive(spec.seed, spec.stream_a, spec.stream_b, "covariates");
    auto noise = rng::Stream::derive(spec.seed, spec.stream_a, spec.stream_b, "noise");
    std::vector<double> xs(spec.n * spec.d), ys(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        for (std::size_t k = 0; k < spec.d; ++k)
            xs[i * spec.d + k] = spec.covariate_dist == CovariateDist::gaussian ? cov.normal() : cov.student_t(10);
        ys[i] = f_star(std::span<const double>(xs.data() + i * spec.d, spec.d));
        if (spec.noise_sigma > 0) ys[i] += spec.noise_sigma * noise.normal();
    }
    std::ostringstream tag;
    tag << "synthetic:" << to_string(spec.covariate_dist) << ":n=" << spec.n << ":d=" << spec.d
        << ":sigma=" << spec.noise_sigma << ":seed=" << spec.seed << ":stream=" << spec.stream_a << '/'
        << spec.stream_b;
    return Dataset(spec.d, std::move(xs), std::move(ys), tag.str());
}

PreprocessPlan PreprocessPlan::make(std::vector<std::string> covariates, std::string response,
                                    bool log_covariates, bool standardize_response) {
    PreprocessPlan p;
    for (auto& c : covariates) p.covariates.push_back({std::move(c), log_covariates, true, 0.0, 1.0});
    p.response = {std::move(response), false, standardize_response, 0.0, 1.0};
    return p;
}

std::size_t Table::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError("csv: no column named '" + name + "'", 1);
    return static_cast<std::size_t>(it - header.begin());
}

Table read_csv(std::istream& in) {
    Table t;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_csv_record(line, line_no);
        if (!have_header) {
            for (auto& f : fields) t.header.push_back(trim(f));
            have_header = true;
            continue;
        }
        if (fields.size() != t.header.size())
            throw ParseError("csv: expected " + std::to_string(t.header.size()) + " fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        std::vector<double> row(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) row[c] = parse_number(fields[c], line_no, t.header[c]);
        t.rows.push_back(std::move(row));
    }
    if (!have_header) throw ParseError("csv: missing header row", line_no);
    return t;
}

Table read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return read_csv(in);
}

Split random_split(std::size_t rows, std::size_t train_rows, std::uint64_t seed, std::uint64_t replication) {
    detail::require(train_rows >= 1 && train_rows < rows, "split: need 1 <= train_rows < rows");
    std::vector<std::size_t> perm(rows);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    auto s = rng::Stream::derive(seed, replication, rows, "split");
    for (std::size_t i = rows - 1; i > 0; --i) std::swap(perm[i], perm[s.below(i + 1)]);
    Split out;
    out.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(train_rows));
    out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(train_rows), perm.end());
    return out;
}

namespace {

double raw_value(const Table& t, std::size_t row, std::size_t col, const ColumnTransform& c) {
    const double v = t.rows[row][col];
    if (!c.log) return v;
    if (!(v > 0))
        throw ParseError("preprocess: non-positive value " + fmt17(v) + " in log column '" + c.name +
                             "' at data row " + std::to_string(row + 1),
                         row + 2);
    return std::log(v);
}

void fit_column(const Table& t, std::size_t col, ColumnTransform& c, std::span<const std::size_t> rows) {
    if (!c.standardize) {
        c.mean = 0;
        c.sd = 1;
        return;
    }
    double mean = 0;
    for (auto r : rows) mean += raw_value(t, r, col, c);
    mean /= static_cast<double>(rows.size());
    double ss = 0;
    for (auto r : rows) {
        const double dv = raw_value(t, r, col, c) - mean;
        ss += dv * dv;
    }
    const double sd = std::sqrt(ss / static_cast<double>(rows.size()));
    c.mean = mean;
    // a constant column is centred but left unscaled
    c.sd = sd > 0 ? sd : 1.0;
}

}  // namespace

std::vector<double> apply_plan(const PreprocessPlan& plan, const Table& table, std::size_t row, double* response) {
    std::vector<double> x(plan.covariates.size());
    for (std::size_t k = 0; k < plan.covariates.size(); ++k) {
        const auto& c = plan.covariates[k];
        x[k] = (raw_value(table, row, table.column(c.name), c) - c.mean) / c.sd;
    }
    if (response) {
        const auto& c = plan.response;
        *response = (raw_value(table, row, table.column(c.name), c) - c.mean) / c.sd;
    }
    return x;
}

Prepared preprocess(const Table& table, const PreprocessPlan& plan_template, const Split& split) {
    detail::require(!plan_template.covariates.empty(), "preprocess: no covariate columns");
    detail::require(!split.train.empty() && !split.test.empty(), "preprocess: empty split");
    PreprocessPlan plan = plan_template;
    // check every log column over all rows first so errors name the row
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        for (const auto& c : plan.covariates) raw_value(table, r, table.column(c.name), c);
        raw_value(table, r, table.column(plan.response.name), plan.response);
    }
    for (auto& c : plan.covariates) fit_column(table, table.column(c.name), c, split.train);
    fit_column(table, table.column(plan.response.name), plan.response, split.train);

    auto build = [&](std::span<const std::size_t> rows, const char* which) {
        std::vector<double> xs, ys;
        for (auto r : rows) {
            double y = 0;
            auto x = apply_plan(plan, table, r, &y);
            xs.insert(xs.end(), x.begin(), x.end());
            ys.push_back(y);
        }
        return Dataset(plan.covariates.size(), std::move(xs), std::move(ys), which);
    };
    return {build(split.train, "csv:train"), build(split.test, "csv:test"), plan};
}

Prepared load_and_preprocess(const std::filesystem::path& path, const PreprocessPlan& plan_template,
                             std::size_t train_rows, std::uint64_t seed, std::uint64_t replication) {
    const auto table = read_csv_file(path);
    return preprocess(table, plan_template, random_split(table.rows.size(), train_rows, seed, replication));
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
    os << "# " << data.tag() << '\n';
    for (std::size_t k = 0; k < data.d(); ++k) os << 'x' << (k + 1) << ',';
    os << "y\n";
    for (std::size_t i = 0; i < data.n(); ++i) {
        for (double v : data.x(i)) os << fmt17(v) << ',';
        os << fmt17(data.y(i)) << '\n';
    }
}

Dataset read_dataset_csv(std::istream& in) {
    std::string tag;
    if (in.peek() == '#') {
        std::getline(in, tag);
        tag = trim(tag.substr(1));
    }
    const auto t = read_csv(in);
    const auto y = t.column("y");
    detail::require(t.header.size() >= 2, "dataset csv: need at least one covariate and y");
    detail::require(!t.rows.empty(), "dataset csv: no rows");
    std::vector<double> xs, ys;
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            if (c != y) xs.push_back(row[c]);
        ys.push_back(row[y]);
    }
    return Dataset(t.header.size() - 1, std::move(xs), std::move(ys), tag);
}

Table air_market_like(std::size_t rows, std::uint64_t seed) {
    Table t;
    t.header = {"so2", "nox", "co2", "nox_rate", "heat_input"};
    auto s = rng::Stream::derive(seed, rows, 0, "air-market");
    for (std::size_t i = 0; i < rows; ++i) {
        double z[4];
        for (double& v : z) v = s.normal();
        // convex in the log covariates, with a kink and a quadratic part
        const double signal = 1.2 * z[2] + 0.5 * std::abs(z[0] - 0.3) + 0.35 * z[1] * z[1] +
                              0.6 * std::max(0.0, z[3]);
        const double y = 5.0 + signal + 0.1 * s.normal();
        t.rows.push_back({std::exp(0.8 * z[0] - 1.0), std::exp(0.6 * z[1] + 1.0), std::exp(0.5 * z[2] + 4.0),
                          std::exp(0.3 * z[3] - 2.0), y});
    }
    return t;
}

void write_table_csv(std::ostream& os, const Table& t) {
    for (std::size_t c = 0; c < t.header.size(); ++c) os << (c ? "," : "") << t.header[c];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << fmt17(row[c]);
        os << '\n';
    }
}

}  // namespace drcr::data
