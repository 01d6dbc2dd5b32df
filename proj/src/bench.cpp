#include "drcr/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "drcr/error.hpp"

namespace drcr::bench {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

// Runs job(0..count-1) on up to `threads` workers. Each job writes only its
// own slot, so the outcome does not depend on scheduling.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& job) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) job(i);
        });
    for (auto& th : pool) th.join();
}

struct Stats {
    double mean = 0.0;
    double se = 0.0;
};

Stats summarize(const std::vector<double>& v) {
    Stats s;
    if (v.empty()) return s;
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.se = std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
    }
    return s;
}

// Predictions of `method` fitted on `train`, evaluated at the rows of each
// dataset in `at`.
std::vector<std::vector<double>> fit_and_predict(const Method& method, const Dataset& train,
                                                 const std::vector<const Dataset*>& at, const RadiusSchedule& schedule,
                                                 std::optional<double> grad_cap, LinearLoss linear_loss) {
    std::vector<std::vector<double>> out;
    if (method.kind == MethodKind::kernel) {
        const auto bw = select_bandwidth(train);
        const KernelModel km{&train, bw.h};
        for (const auto* ds : at) {
            std::vector<double> p(ds->n());
            for (std::size_t i = 0; i < ds->n(); ++i) p[i] = kernel_predict(km, ds->x(i));
            out.push_back(std::move(p));
        }
        return out;
    }
    std::optional<MaxAffineModel> model;
    switch (method.kind) {
        case MethodKind::drcr: {
            FitConfig cfg;
            cfg.schedule = schedule;
            cfg.grad_cap = grad_cap;
            model = fit_drcr(train, cfg);
            break;
        }
        case MethodKind::lse: {
            LseConfig cfg;
            cfg.c = method.c;
            model = fit_convex_lse(train, cfg);
            break;
        }
        case MethodKind::linear: model = fit_linear(train, linear_loss); break;
        case MethodKind::kernel: break;
    }
    for (const auto* ds : at) out.push_back(predict_all(*model, *ds));
    return out;
}

std::string methods_string(const std::vector<Method>& m) {
    std::string s;
    for (const auto& x : m) s += (s.empty() ? "" : ";") + x.name();
    return s;
}

std::string schedule_string(const RadiusSchedule& s) {
    std::string out = to_string(s.kind);
    if (s.kind == ScheduleKind::theoretical)
        out += "(gamma=" + fmt_short(s.gamma.value_or(0)) + ",multiplier=" + fmt_short(s.multiplier) + ")";
    if (s.kind == ScheduleKind::explicit_value) out += "(" + fmt_short(s.value) + ")";
    return out;
}

void open_out(std::ofstream& f, const std::filesystem::path& p) {
    f.open(p, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write '" + p.string() + "'");
}

void make_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw IoError("cannot create output directory '" + dir.string() + "'");
}

void close_out(std::ofstream& f, const std::filesystem::path& p) {
    f.close();
    if (!f) throw IoError("failed writing '" + p.string() + "'");
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

}  // namespace

std::string Method::name() const {
    switch (kind) {
        case MethodKind::drcr: return "drcr";
        case MethodKind::lse: return "lse(" + fmt_short(c) + ")";
        case MethodKind::kernel: return "kernel";
        case MethodKind::linear: return "linear";
    }
    return "?";
}

Method parse_method(const std::string& raw) {
    std::string s;
    for (char ch : raw)
        if (ch != ' ') s += ch;
    if (s == "drcr") return {MethodKind::drcr, 0.0};
    if (s == "kernel") return {MethodKind::kernel, 0.0};
    if (s == "linear" || s == "lr") return {MethodKind::linear, 0.0};
    if (s.rfind("lse", 0) == 0) {
        std::string arg = s.substr(3);
        if (!arg.empty() && (arg.front() == '(' || arg.front() == ':' || arg.front() == '=')) {
            if (arg.front() == '(') {
                if (arg.back() != ')') detail::invalid("bad method '" + raw + "'");
                arg = arg.substr(1, arg.size() - 2);
            } else {
                arg = arg.substr(1);
            }
            std::size_t used = 0;
            double c = 0;
            try {
                c = std::stod(arg, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != arg.size() || !(c > 0) || !std::isfinite(c))
                detail::invalid("bad LSE cap in '" + raw + "'");
            return {MethodKind::lse, c};
        }
        if (arg.empty()) return {MethodKind::lse, 10.0};
    }
    detail::invalid("unknown method '" + raw + "' (expected drcr, lse(c), kernel or linear)");
}

std::vector<Method> parse_methods(const std::string& s) {
    std::vector<Method> out;
    std::string cur;
    int depth = 0;
    for (char ch : s + ",") {
        if (ch == '(') ++depth;
        if (ch == ')') --depth;
        if (ch == ',' && depth == 0) {
            if (!cur.empty()) out.push_back(parse_method(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    detail::require(!out.empty(), "no methods given");
    return out;
}

void ExperimentSpec::validate() const {
    detail::require(!methods.empty(), "benchmark: method list is empty");
    detail::require(d >= 1, "benchmark: d must be >= 1");
    detail::require(!n_list.empty(), "benchmark: n list is empty");
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        detail::require(n_list[i] >= 2, "benchmark: every n must be >= 2");
        if (i) detail::require(n_list[i] > n_list[i - 1], "benchmark: n list must be strictly ascending");
    }
    for (const auto& m : methods)
        if (m.kind == MethodKind::kernel) detail::require(n_list.front() >= 3, "benchmark: kernel needs n >= 3");
    detail::require(replications >= 1, "benchmark: replications must be >= 1");
    detail::require(noise_sigma >= 0 && std::isfinite(noise_sigma), "benchmark: sigma must be >= 0");
    if (grad_cap) detail::require(*grad_cap > 0, "benchmark: grad_cap must be > 0");
    // surfaces a missing gamma before any work starts
    resolve_radius(n_list.front(), d, schedule);
}

const Cell* ResultTable::find(const std::string& method, std::size_t n) const {
    for (const auto& c : cells)
        if (c.method == method && c.n == n) return &c;
    return nullptr;
}

ResultTable run_benchmark(const ExperimentSpec& spec) {
    spec.validate();
    const auto M = spec.methods.size(), N = spec.n_list.size(), R = spec.replications;
    struct Slot {
        bool ok = false;
        double l1 = 0, l2 = 0, seconds = 0;
        std::string message;
    };
    std::vector<Slot> slots(M * N * R);
    parallel_for(slots.size(), spec.threads, [&](std::size_t job) {
        // largest n first keeps the tail of the schedule short
        const std::size_t ni = N - 1 - job / (M * R);
        const std::size_t mi = (job / R) % M, r = job % R;
        auto& slot = slots[(mi * N + ni) * R + r];
        const auto started = std::chrono::steady_clock::now();
        try {
            data::SyntheticSpec ss;
            ss.n = spec.n_list[ni];
            ss.d = spec.d;
            ss.covariate_dist = spec.dist;
            ss.noise_sigma = spec.noise_sigma;
            ss.seed = spec.base_seed;
            ss.stream_a = r;
            ss.stream_b = ss.n;
            const auto train = data::generate_synthetic(ss);
            const auto pred = fit_and_predict(spec.methods[mi], train, {&train}, spec.schedule, spec.grad_cap,
                                              spec.linear_loss)[0];
            std::vector<double> truth(train.n());
            for (std::size_t i = 0; i < train.n(); ++i) truth[i] = data::f_star(train.x(i));
            const auto rep = loss_report(pred, truth);
            slot.l1 = rep.l1;
            slot.l2 = rep.l2;
            slot.ok = true;
        } catch (const std::exception& e) {
            slot.message = e.what();
        }
        slot.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    });

    ResultTable t;
    std::ostringstream prov;
    prov << "drcr benchmark methods=" << methods_string(spec.methods) << " d=" << spec.d
         << " dist=" << data::to_string(spec.dist) << " sigma=" << fmt_short(spec.noise_sigma)
         << " replications=" << R << " seed=" << spec.base_seed << " schedule=" << schedule_string(spec.schedule)
         << " grad_cap=" << (spec.grad_cap ? fmt_short(*spec.grad_cap) : std::string("log(n)"));
    t.provenance = prov.str();
    for (std::size_t mi = 0; mi < M; ++mi)
        for (std::size_t ni = 0; ni < N; ++ni) {
            Cell c;
            c.method = spec.methods[mi].name();
            c.n = spec.n_list[ni];
            c.dist = data::to_string(spec.dist);
            std::vector<double> l1, l2;
            for (std::size_t r = 0; r < R; ++r) {
                const auto& s = slots[(mi * N + ni) * R + r];
                c.seconds += s.seconds;
                if (s.ok) {
                    l1.push_back(s.l1);
                    l2.push_back(s.l2);
                } else {
                    ++c.failures;
                    t.failures.push_back({c.method, c.n, r, s.message});
                }
            }
            c.runs = l1.size();
            const auto s1 = summarize(l1), s2 = summarize(l2);
            c.mean_l1 = s1.mean;
            c.se_l1 = s1.se;
            c.mean_l2 = s2.mean;
            c.se_l2 = s2.se;
            t.cells.push_back(std::move(c));
        }
    return t;
}

void RealDataSpec::validate() const {
    detail::require(!methods.empty(), "real-data: method list is empty");
    detail::require(replications >= 1, "real-data: replications must be >= 1");
    detail::require(train_rows >= 2, "real-data: train_rows must be >= 2");
    detail::require(!plan.covariates.empty(), "real-data: no covariate columns");
    if (grad_cap) detail::require(*grad_cap > 0, "real-data: grad_cap must be > 0");
}

RealDataTable run_real_data(const data::Table& table, const RealDataSpec& spec) {
    spec.validate();
    detail::require(spec.train_rows < table.rows.size(), "real-data: train_rows must be below the row count");
    const auto M = spec.methods.size(), R = spec.replications;
    struct Slot {
        bool ok = false;
        double train = 0, test = 0;
        std::string message;
    };
    std::vector<Slot> slots(M * R);
    // preprocessing errors (bad rows) are input errors, not per-run failures
    std::vector<data::Prepared> prepared;
    for (std::size_t r = 0; r < R; ++r)
        prepared.push_back(data::preprocess(
            table, spec.plan, data::random_split(table.rows.size(), spec.train_rows, spec.base_seed, r)));
    parallel_for(slots.size(), spec.threads, [&](std::size_t job) {
        const std::size_t mi = job / R, r = job % R;
        auto& slot = slots[job];
        try {
            const auto& p = prepared[r];
            const auto pred = fit_and_predict(spec.methods[mi], p.train, {&p.train, &p.test}, spec.schedule,
                                              spec.grad_cap, spec.linear_loss);
            slot.train = empirical_l1(pred[0], p.train.ys());
            slot.test = empirical_l1(pred[1], p.test.ys());
            slot.ok = true;
        } catch (const std::exception& e) {
            slot.message = e.what();
        }
    });

    RealDataTable t;
    std::ostringstream prov;
    prov << "drcr real-data methods=" << methods_string(spec.methods) << " rows=" << table.rows.size()
         << " train_rows=" << spec.train_rows << " replications=" << R << " seed=" << spec.base_seed
         << " schedule=" << schedule_string(spec.schedule) << " response_standardized="
         << (spec.plan.response.standardize ? "yes" : "no");
    t.provenance = prov.str();
    for (std::size_t mi = 0; mi < M; ++mi) {
        RealDataRow row;
        row.method = spec.methods[mi].name();
        std::vector<double> tr, te;
        for (std::size_t r = 0; r < R; ++r) {
            const auto& s = slots[mi * R + r];
            if (s.ok) {
                tr.push_back(s.train);
                te.push_back(s.test);
            } else {
                ++row.failures;
                t.failures.push_back({row.method, spec.train_rows, r, s.message});
            }
        }
        row.runs = tr.size();
        const auto a = summarize(tr), b = summarize(te);
        row.train_l1 = a.mean;
        row.train_se = a.se;
        row.test_l1 = b.mean;
        row.test_se = b.se;
        t.rows.push_back(std::move(row));
    }
    return t;
}

RealDataTable run_real_data(const std::filesystem::path& csv, const RealDataSpec& spec) {
    return run_real_data(data::read_csv_file(csv), spec);
}

std::vector<std::pair<std::string, double>> loglog_slopes(const ResultTable& t, bool l2) {
    std::vector<std::pair<std::string, double>> out;
    std::vector<std::string> order;
    for (const auto& c : t.cells)
        if (std::find(order.begin(), order.end(), c.method) == order.end()) order.push_back(c.method);
    for (const auto& m : order) {
        std::vector<double> xs, ys;
        for (const auto& c : t.cells) {
            const double v = l2 ? c.mean_l2 : c.mean_l1;
            if (c.method == m && c.runs > 0 && v > 0) {
                xs.push_back(std::log(static_cast<double>(c.n)));
                ys.push_back(std::log(v));
            }
        }
        if (xs.size() < 2) continue;
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i];
            my += ys[i];
        }
        mx /= static_cast<double>(xs.size());
        my /= static_cast<double>(xs.size());
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
        }
        out.emplace_back(m, sxy / sxx);
    }
    return out;
}

void write_results_csv(std::ostream& os, const ResultTable& t) {
    os << "# " << t.provenance << '\n';
    os << "method,dist,n,runs,failures,mean_l1,se_l1,mean_l2,se_l2\n";
    for (const auto& c : t.cells)
        os << csv_quote(c.method) << ',' << c.dist << ',' << c.n << ',' << c.runs << ',' << c.failures << ','
           << fmt17(c.mean_l1) << ',' << fmt17(c.se_l1) << ',' << fmt17(c.mean_l2) << ',' << fmt17(c.se_l2)
           << '\n';
}

ResultTable read_results_csv(std::istream& is) {
    ResultTable t;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    auto num = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size()) throw ParseError("results: bad number '" + s + "'", line_no);
        return v;
    };
    auto count = [&](const std::string& s) {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size()) throw ParseError("results: bad count '" + s + "'", line_no);
        return static_cast<std::size_t>(v);
    };
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (t.provenance.empty()) t.provenance = line.size() > 2 ? line.substr(2) : "";
            continue;
        }
        const auto f = data::split_csv_record(line, line_no);
        if (!header) {
            if (f.size() != 9 || f[0] != "method") throw ParseError("results: unexpected header", line_no);
            header = true;
            continue;
        }
        if (f.size() != 9) throw ParseError("results: expected 9 fields", line_no);
        Cell c;
        c.method = f[0];
        c.dist = f[1];
        c.n = count(f[2]);
        c.runs = count(f[3]);
        c.failures = count(f[4]);
        c.mean_l1 = num(f[5]);
        c.se_l1 = num(f[6]);
        c.mean_l2 = num(f[7]);
        c.se_l2 = num(f[8]);
        t.cells.push_back(std::move(c));
    }
    if (!header) throw ParseError("results: missing header", line_no);
    return t;
}

std::vector<std::filesystem::path> emit(const ResultTable& t, const std::filesystem::path& dir) {
    detail::require(!t.cells.empty(), "emit: result table is empty");
    make_dir(dir);
    std::vector<std::filesystem::path> written;
    std::ofstream f;

    auto path = dir / "results.csv";
    open_out(f, path);
    write_results_csv(f, t);
    close_out(f, path);
    written.push_back(path);

    for (const bool l2 : {false, true}) {
        path = dir / (l2 ? "plot_l2.csv" : "plot_l1.csv");
        open_out(f, path);
        f << "# " << t.provenance << '\n' << "method,n,mean,stderr\n";
        for (const auto& c : t.cells)
            f << csv_quote(c.method) << ',' << c.n << ',' << fmt17(l2 ? c.mean_l2 : c.mean_l1) << ','
              << fmt17(l2 ? c.se_l2 : c.se_l1) << '\n';
        close_out(f, path);
        written.push_back(path);
    }

    path = dir / "slopes.csv";
    open_out(f, path);
    f << "# least-squares slope of log(mean loss) against log(n)\nmethod,metric,slope\n";
    for (const bool l2 : {false, true})
        for (const auto& [m, s] : loglog_slopes(t, l2))
            f << csv_quote(m) << ',' << (l2 ? "l2" : "l1") << ',' << fmt17(s) << '\n';
    close_out(f, path);
    written.push_back(path);

    if (!t.failures.empty()) {
        path = dir / "failures.csv";
        open_out(f, path);
        f << "method,n,replication,message\n";
        for (const auto& x : t.failures)
            f << csv_quote(x.method) << ',' << x.n << ',' << x.replication << ',' << csv_quote(x.message) << '\n';
        close_out(f, path);
        written.push_back(path);
    }
    return written;
}

std::vector<std::filesystem::path> emit(const RealDataTable& t, const std::filesystem::path& dir) {
    detail::require(!t.rows.empty(), "emit: result table is empty");
    make_dir(dir);
    std::vector<std::filesystem::path> written;
    std::ofstream f;
    auto path = dir / "real_data.csv";
    open_out(f, path);
    f << "# " << t.provenance << '\n' << "method,runs,failures,train_l1,train_se,test_l1,test_se\n";
    for (const auto& r : t.rows)
        f << csv_quote(r.method) << ',' << r.runs << ',' << r.failures << ',' << fmt17(r.train_l1) << ','
          << fmt17(r.train_se) << ',' << fmt17(r.test_l1) << ',' << fmt17(r.test_se) << '\n';
    close_out(f, path);
    written.push_back(path);
    if (!t.failures.empty()) {
        path = dir / "failures.csv";
        open_out(f, path);
        f << "method,train_rows,replication,message\n";
        for (const auto& x : t.failures)
            f << csv_quote(x.method) << ',' << x.n << ',' << x.replication << ',' << csv_quote(x.message) << '\n';
        close_out(f, path);
        written.push_back(path);
    }
    return written;
}

}  // namespace drcr::bench
