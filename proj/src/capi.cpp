#include "drcr/drcr.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <new>
#include <optional>
#include <sstream>
#include <string>

#include "drcr/baselines.hpp"
#include "drcr/bench.hpp"
#include "drcr/data.hpp"
#include "drcr/error.hpp"
#include "drcr/fit.hpp"
#include "drcr/model.hpp"

struct drcr_dataset {
    drcr::Dataset data;
};

struct drcr_model {
    drcr::MaxAffineModel model;
};

namespace {

thread_local std::string g_last_error;

template <class F>
drcr_status guarded(F&& f) {
    try {
        g_last_error.clear();
        f();
        return DRCR_OK;
    } catch (const drcr::InvalidArgument& e) {
        g_last_error = e.what();
        return DRCR_ERR_INVALID;
    } catch (const drcr::ParseError& e) {
        g_last_error = e.what();
        if (e.line()) g_last_error += " (line " + std::to_string(e.line()) + ")";
        return DRCR_ERR_PARSE;
    } catch (const drcr::IoError& e) {
        g_last_error = e.what();
        return DRCR_ERR_IO;
    } catch (const drcr::SolverError& e) {
        g_last_error = e.what();
        return DRCR_ERR_SOLVER;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return DRCR_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return DRCR_ERR_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (!p) throw drcr::InvalidArgument(std::string(what) + " is NULL");
}

drcr::ScheduleKind schedule_kind(drcr_schedule s) {
    switch (s) {
        case DRCR_SCHEDULE_EXPERIMENTAL: return drcr::ScheduleKind::experimental;
        case DRCR_SCHEDULE_THEORETICAL: return drcr::ScheduleKind::theoretical;
        case DRCR_SCHEDULE_FIXED: return drcr::ScheduleKind::explicit_value;
    }
    throw drcr::InvalidArgument("unknown radius schedule");
}

drcr::RadiusSchedule make_schedule(drcr_schedule s, double delta, double gamma, double multiplier) {
    drcr::RadiusSchedule out;
    out.kind = schedule_kind(s);
    if (gamma > 0) out.gamma = gamma;
    out.multiplier = multiplier;
    out.value = delta;
    if (out.kind == drcr::ScheduleKind::explicit_value && !(delta >= 0))
        throw drcr::InvalidArgument("fixed schedule needs delta >= 0");
    return out;
}

drcr::data::CovariateDist dist_of(drcr_dist d) {
    switch (d) {
        case DRCR_DIST_GAUSSIAN: return drcr::data::CovariateDist::gaussian;
        case DRCR_DIST_T10: return drcr::data::CovariateDist::student_t10;
    }
    throw drcr::InvalidArgument("unknown covariate distribution");
}

drcr::LinearLoss loss_of(drcr_linear_loss l) {
    return l == DRCR_LINEAR_SQUARED ? drcr::LinearLoss::squared : drcr::LinearLoss::absolute;
}

std::optional<double> cap_of(double c) { return c > 0 ? std::optional<double>(c) : std::nullopt; }

std::vector<std::string> split_names(const char* s) {
    std::vector<std::string> out;
    std::string cur;
    for (const char* p = s; *p; ++p) {
        if (*p == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (*p != ' ') {
            cur += *p;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace

extern "C" {

const char* drcr_last_error(void) { return g_last_error.c_str(); }

const char* drcr_version(void) { return "1.0.0"; }

drcr_status drcr_dataset_create(size_t n, size_t d, const double* xs, const double* ys, drcr_dataset** out) {
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        if (n > 0) {
            need(xs, "xs");
            need(ys, "ys");
        }
        std::vector<double> x(xs, xs + n * d), y(ys, ys + n);
        *out = new drcr_dataset{drcr::Dataset(d, std::move(x), std::move(y), "capi")};
    });
}

drcr_status drcr_dataset_read_csv(const char* path, drcr_dataset** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = nullptr;
        std::ifstream in(path);
        if (!in) throw drcr::IoError(std::string("cannot open '") + path + "'");
        *out = new drcr_dataset{drcr::data::read_dataset_csv(in)};
    });
}

drcr_status drcr_dataset_write_csv(const drcr_dataset* ds, const char* path) {
    return guarded([&] {
        need(ds, "dataset");
        need(path, "path");
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw drcr::IoError(std::string("cannot write '") + path + "'");
        drcr::data::write_dataset_csv(f, ds->data);
        f.close();
        if (!f) throw drcr::IoError(std::string("failed writing '") + path + "'");
    });
}

size_t drcr_dataset_n(const drcr_dataset* ds) { return ds ? ds->data.n() : 0; }
size_t drcr_dataset_d(const drcr_dataset* ds) { return ds ? ds->data.d() : 0; }

drcr_status drcr_dataset_row(const drcr_dataset* ds, size_t i, double* x, double* y) {
    return guarded([&] {
        need(ds, "dataset");
        if (i >= ds->data.n()) throw drcr::InvalidArgument("row index out of range");
        if (x) {
            const auto r = ds->data.x(i);
            std::copy(r.begin(), r.end(), x);
        }
        if (y) *y = ds->data.y(i);
    });
}

void drcr_dataset_free(drcr_dataset* ds) { delete ds; }

void drcr_synthetic_spec_init(drcr_synthetic_spec* spec) {
    if (!spec) return;
    *spec = drcr_synthetic_spec{100, 5, DRCR_DIST_GAUSSIAN, 0.2, 0, 0, 0};
}

drcr_status drcr_generate_synthetic(const drcr_synthetic_spec* spec, drcr_dataset** out) {
    return guarded([&] {
        need(spec, "spec");
        need(out, "out");
        *out = nullptr;
        drcr::data::SyntheticSpec s;
        s.n = spec->n;
        s.d = spec->d;
        s.covariate_dist = dist_of(spec->dist);
        s.noise_sigma = spec->sigma;
        s.seed = spec->seed;
        s.stream_a = spec->stream_a;
        s.stream_b = spec->stream_b;
        *out = new drcr_dataset{drcr::data::generate_synthetic(s)};
    });
}

drcr_status drcr_write_air_market_csv(const char* path, size_t rows, uint64_t seed) {
    return guarded([&] {
        need(path, "path");
        if (rows < 2) throw drcr::InvalidArgument("need at least 2 rows");
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw drcr::IoError(std::string("cannot write '") + path + "'");
        drcr::data::write_table_csv(f, drcr::data::air_market_like(rows, seed));
        f.close();
        if (!f) throw drcr::IoError(std::string("failed writing '") + path + "'");
    });
}

void drcr_fit_options_init(drcr_fit_options* opts) {
    if (!opts) return;
    *opts = drcr_fit_options{DRCR_SCHEDULE_EXPERIMENTAL, 0.0, 0.0, 1.0, 0.0, -1, 0};
}

drcr_status drcr_fit(const drcr_dataset* ds, const drcr_fit_options* opts, drcr_model** out) {
    return guarded([&] {
        need(ds, "dataset");
        need(out, "out");
        *out = nullptr;
        drcr_fit_options o;
        drcr_fit_options_init(&o);
        if (opts) o = *opts;
        drcr::FitConfig cfg;
        cfg.schedule = make_schedule(o.schedule, o.delta, o.gamma, o.multiplier);
        cfg.grad_cap = cap_of(o.grad_cap);
        if (o.row_generation >= 0) cfg.row_generation = o.row_generation != 0;
        if (o.log_diagnostics) cfg.log = &std::cerr;
        *out = new drcr_model{drcr::fit_drcr(ds->data, cfg)};
    });
}

drcr_status drcr_fit_lse(const drcr_dataset* ds, double c, drcr_model** out) {
    return guarded([&] {
        need(ds, "dataset");
        need(out, "out");
        *out = nullptr;
        drcr::LseConfig cfg;
        cfg.c = c;
        *out = new drcr_model{drcr::fit_convex_lse(ds->data, cfg)};
    });
}

drcr_status drcr_fit_linear(const drcr_dataset* ds, drcr_linear_loss loss, drcr_model** out) {
    return guarded([&] {
        need(ds, "dataset");
        need(out, "out");
        *out = nullptr;
        *out = new drcr_model{drcr::fit_linear(ds->data, loss_of(loss))};
    });
}

drcr_status drcr_default_radius(size_t n, size_t d, drcr_schedule schedule, double gamma, double* out) {
    return guarded([&] {
        need(out, "out");
        *out = drcr::default_radius(n, d, schedule_kind(schedule),
                                    gamma > 0 ? std::optional<double>(gamma) : std::nullopt);
    });
}

drcr_status drcr_model_predict(const drcr_model* m, const double* x, size_t d, double* out) {
    return guarded([&] {
        need(m, "model");
        need(x, "x");
        need(out, "out");
        *out = drcr::predict(m->model, std::span<const double>(x, d));
    });
}

drcr_status drcr_model_predict_many(const drcr_model* m, const double* xs, size_t count, size_t d, double* out) {
    return guarded([&] {
        need(m, "model");
        if (count == 0) return;
        need(xs, "xs");
        need(out, "out");
        for (size_t i = 0; i < count; ++i) out[i] = drcr::predict(m->model, std::span<const double>(xs + i * d, d));
    });
}

size_t drcr_model_d(const drcr_model* m) { return m ? m->model.d() : 0; }
size_t drcr_model_pieces(const drcr_model* m) { return m ? m->model.pieces().size() : 0; }
double drcr_model_objective(const drcr_model* m) { return m ? m->model.fit_meta().objective : NAN; }
double drcr_model_delta(const drcr_model* m) { return m ? m->model.fit_meta().delta : NAN; }
double drcr_model_gradient_sup_norm(const drcr_model* m) { return m ? drcr::gradient_sup_norm(m->model) : NAN; }

drcr_status drcr_model_dual_objective(const drcr_model* m, const drcr_dataset* ds, double delta, double* out) {
    return guarded([&] {
        need(m, "model");
        need(ds, "dataset");
        need(out, "out");
        *out = drcr::dual_objective(m->model, ds->data, delta);
    });
}

drcr_status drcr_model_save(const drcr_model* m, const char* path) {
    return guarded([&] {
        need(m, "model");
        need(path, "path");
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw drcr::IoError(std::string("cannot write '") + path + "'");
        f << drcr::serialize(m->model);
        f.close();
        if (!f) throw drcr::IoError(std::string("failed writing '") + path + "'");
    });
}

drcr_status drcr_model_load(const char* path, drcr_model** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = nullptr;
        std::ifstream f(path, std::ios::binary);
        if (!f) throw drcr::IoError(std::string("cannot open '") + path + "'");
        const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        *out = new drcr_model{drcr::deserialize(text)};
    });
}

void drcr_model_free(drcr_model* m) { delete m; }

void drcr_benchmark_spec_init(drcr_benchmark_spec* spec) {
    if (!spec) return;
    *spec = drcr_benchmark_spec{};
    spec->methods = "drcr,lse(0.8),lse(10),kernel";
    spec->d = 5;
    spec->dist = DRCR_DIST_GAUSSIAN;
    spec->sigma = 0.2;
    spec->replications = 1;
    spec->schedule = DRCR_SCHEDULE_EXPERIMENTAL;
    spec->multiplier = 1.0;
    spec->linear_loss = DRCR_LINEAR_ABSOLUTE;
    spec->out_dir = "results";
}

drcr_status drcr_run_benchmark(const drcr_benchmark_spec* spec, size_t* failed_runs) {
    return guarded([&] {
        need(spec, "spec");
        need(spec->methods, "methods");
        need(spec->out_dir, "out_dir");
        if (spec->n_count) need(spec->n_list, "n_list");
        drcr::bench::ExperimentSpec e;
        e.methods = drcr::bench::parse_methods(spec->methods);
        e.d = spec->d;
        e.n_list.assign(spec->n_list, spec->n_list + spec->n_count);
        e.dist = dist_of(spec->dist);
        e.noise_sigma = spec->sigma;
        e.replications = spec->replications;
        e.base_seed = spec->seed;
        e.schedule = make_schedule(spec->schedule, spec->delta, spec->gamma, spec->multiplier);
        e.grad_cap = cap_of(spec->grad_cap);
        e.linear_loss = loss_of(spec->linear_loss);
        e.threads = spec->threads;
        e.out_dir = spec->out_dir;
        const auto t = drcr::bench::run_benchmark(e);
        drcr::bench::emit(t, e.out_dir);
        if (failed_runs) *failed_runs = t.failures.size();
        if (spec->print_summary) {
            std::printf("%-12s %6s %5s %4s %14s %12s %14s %12s %10s\n", "method", "n", "runs", "fail", "mean_l1",
                        "se_l1", "mean_l2", "se_l2", "seconds");
            for (const auto& c : t.cells)
                std::printf("%-12s %6zu %5zu %4zu %14.6g %12.4g %14.6g %12.4g %10.2f\n", c.method.c_str(), c.n,
                            c.runs, c.failures, c.mean_l1, c.se_l1, c.mean_l2, c.se_l2, c.seconds);
            for (const auto& [m, s] : drcr::bench::loglog_slopes(t))
                std::printf("log-log slope of mean l1 vs n: %s %.4f\n", m.c_str(), s);
            for (const auto& f : t.failures)
                std::printf("FAILED %s n=%zu replication=%zu: %s\n", f.method.c_str(), f.n, f.replication,
                            f.message.c_str());
            std::fflush(stdout);
        }
    });
}

void drcr_real_data_spec_init(drcr_real_data_spec* spec) {
    if (!spec) return;
    *spec = drcr_real_data_spec{};
    spec->covariates = "so2,nox,co2,nox_rate";
    spec->response = "heat_input";
    spec->log_covariates = 1;
    spec->standardize_response = 1;
    spec->methods = "drcr,lse(10),linear";
    spec->train_rows = 400;
    spec->replications = 10;
    spec->schedule = DRCR_SCHEDULE_EXPERIMENTAL;
    spec->multiplier = 1.0;
    spec->linear_loss = DRCR_LINEAR_ABSOLUTE;
    spec->out_dir = "results";
}

drcr_status drcr_run_real_data(const drcr_real_data_spec* spec, size_t* failed_runs) {
    return guarded([&] {
        need(spec, "spec");
        need(spec->csv_path, "csv_path");
        need(spec->covariates, "covariates");
        need(spec->response, "response");
        need(spec->out_dir, "out_dir");
        drcr::bench::RealDataSpec r;
        r.methods = drcr::bench::parse_methods(spec->methods ? spec->methods : "drcr,lse(10),linear");
        r.plan = drcr::data::PreprocessPlan::make(split_names(spec->covariates), spec->response,
                                                  spec->log_covariates != 0, spec->standardize_response != 0);
        r.train_rows = spec->train_rows;
        r.replications = spec->replications;
        r.base_seed = spec->seed;
        r.schedule = make_schedule(spec->schedule, spec->delta, spec->gamma, spec->multiplier);
        r.grad_cap = cap_of(spec->grad_cap);
        r.linear_loss = loss_of(spec->linear_loss);
        r.threads = spec->threads;
        const auto t = drcr::bench::run_real_data(std::filesystem::path(spec->csv_path), r);
        drcr::bench::emit(t, spec->out_dir);
        if (failed_runs) *failed_runs = t.failures.size();
        if (spec->print_summary) {
            std::printf("%-12s %5s %4s %14s %14s\n", "method", "runs", "fail", "train_l1", "test_l1");
            for (const auto& row : t.rows)
                std::printf("%-12s %5zu %4zu %14.6g %14.6g\n", row.method.c_str(), row.runs, row.failures,
                            row.train_l1, row.test_l1);
            for (const auto& f : t.failures)
                std::printf("FAILED %s replication=%zu: %s\n", f.method.c_str(), f.replication, f.message.c_str());
            std::fflush(stdout);
        }
    });
}

}  // extern "C"
