#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "drcr/error.hpp"
#include "simplex_engine.hpp"

namespace drcr::lp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// nearest power of two, so scaling never perturbs the data
double pow2_round(double s) {
    if (!(s > 0) || !std::isfinite(s)) return 1.0;
    return std::exp2(std::round(std::log2(s)));
}

}  // namespace

SimplexEngine::SimplexEngine(const LinearProgram& lp, const SolverOptions& opts,
                             std::span<const double> start)
    : opts_(opts) {
    lp.validate();
    opts_.validate();
    n_ = lp.num_cols();
    N_ = n_ + 1;
    if (!start.empty() && start.size() != n_)
        detail::invalid("solve_lp: start point has wrong dimension");

    ftol_ = opts_.feas_tol * 1e-2;
    dtol_ = 1e-9;
    ptol_ = 1e-7;
    max_iter_ = opts_.max_iterations ? opts_.max_iterations : 200 * (lp.num_rows() + n_);

    compute_scaling(lp);
    cost_.assign(N_, 0.0);
    lo_.assign(N_, 0.0);
    hi_.assign(N_, kInf);
    for (std::size_t j = 0; j < n_; ++j) {
        cost_[j] = lp.objective[j] * colscale_[j];
        lo_[j] = lp.lower[j] / colscale_[j];
        hi_[j] = lp.upper[j] / colscale_[j];
    }
    phase1_cost_.assign(N_, 0.0);
    phase1_cost_[n_] = 1.0;

    var_ws_.assign(N_, -1);
    perturbed_ = opts_.perturbation > 0;
    add_rows_from(lp, 0);
    initial_working_set(start);
}

void SimplexEngine::compute_scaling(const LinearProgram& lp) {
    colscale_.assign(n_, 1.0);
    if (!opts_.scaling || lp.entries.empty()) return;
    const auto m = lp.num_rows();
    std::vector<double> rs(m, 1.0), cs(n_, 1.0);
    for (int pass = 0; pass < 6; ++pass) {
        std::vector<double> lo(m, kInf), hi(m, 0.0);
        for (const auto& t : lp.entries) {
            const double a = std::abs(t.value) * cs[t.col];
            if (a == 0) continue;
            lo[t.row] = std::min(lo[t.row], a);
            hi[t.row] = std::max(hi[t.row], a);
        }
        for (std::size_t r = 0; r < m; ++r)
            rs[r] = hi[r] > 0 ? 1.0 / std::sqrt(lo[r] * hi[r]) : 1.0;
        std::vector<double> clo(n_, kInf), chi(n_, 0.0);
        for (const auto& t : lp.entries) {
            const double a = std::abs(t.value) * rs[t.row];
            if (a == 0) continue;
            clo[t.col] = std::min(clo[t.col], a);
            chi[t.col] = std::max(chi[t.col], a);
        }
        for (std::size_t j = 0; j < n_; ++j)
            cs[j] = chi[j] > 0 ? 1.0 / std::sqrt(clo[j] * chi[j]) : 1.0;
    }
    for (std::size_t j = 0; j < n_; ++j) colscale_[j] = pow2_round(cs[j]);
}

void SimplexEngine::add_rows_from(const LinearProgram& lp, std::size_t first_row) {
    const auto m = lp.num_rows();
    // bucket the new entries by row; duplicates are summed
    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(m - first_row);
    for (const auto& t : lp.entries) {
        if (t.row < first_row) continue;
        rows[t.row - first_row].emplace_back(static_cast<std::uint32_t>(t.col), t.value);
    }
    for (std::size_t r = first_row; r < m; ++r) {
        auto& entries = rows[r - first_row];
        std::sort(entries.begin(), entries.end());
        std::vector<std::pair<std::uint32_t, double>> merged;
        for (const auto& e : entries) {
            if (!merged.empty() && merged.back().first == e.first)
                merged.back().second += e.second;
            else
                merged.push_back(e);
        }
        double amin = kInf, amax = 0;
        for (const auto& [j, a] : merged) {
            if (a == 0) continue;
            const double s = std::abs(a) * colscale_[j];
            amin = std::min(amin, s);
            amax = std::max(amax, s);
        }
        const double rs = (opts_.scaling && amax > 0) ? pow2_round(1.0 / std::sqrt(amin * amax)) : 1.0;
        for (const auto& [j, a] : merged) {
            if (a == 0) continue;
            col_idx_.push_back(j);
            val_.push_back(a * rs * colscale_[j]);
        }
        row_start_.push_back(col_idx_.size());
        rowscale_.push_back(rs);
        rhs_.push_back(lp.rhs[r] * rs);
        sense_.push_back(lp.senses[r]);
        const auto ri = static_cast<std::uint32_t>(r);
        if (lp.senses[r] != Sense::less_equal) sides_.push_back({ri, 1.0, false});
        if (lp.senses[r] != Sense::greater_equal) sides_.push_back({ri, -1.0, false});
    }
    side_in_ws_.resize(sides_.size(), 0);
    // deterministic relaxation of every side, removed before the final
    // cleanup; breaks the massive ties of degenerate vertices
    for (std::size_t k = pert_.size(); k < sides_.size(); ++k) {
        const auto& sd = sides_[k];
        const double u = static_cast<double>(mix(k) >> 11) * 0x1.0p-53;
        pert_.push_back(opts_.perturbation * (1.0 + u) * (1.0 + std::abs(rhs_[sd.row])));
    }
    act_.resize(rhs_.size(), 0.0);
    for (std::size_t r = first_row; r < m && !x_.empty(); ++r) {
        double a = 0;
        for (std::size_t e = row_start_[r]; e < row_start_[r + 1]; ++e) a += val_[e] * x_[col_idx_[e]];
        act_[r] = a;
    }
}

void SimplexEngine::initial_working_set(std::span<const double> start) {
    x_.assign(N_, 0.0);
    temp_val_.assign(N_, 0.0);
    ws_.assign(N_, Cid{Kind::temp, 0});
    for (std::size_t j = 0; j < n_; ++j) {
        double v = start.empty() ? 0.0 : start[j] / colscale_[j];
        v = std::clamp(v, lo_[j], hi_[j]);
        x_[j] = v;
        Cid c{Kind::temp, static_cast<std::uint32_t>(j)};
        if (std::isfinite(lo_[j]) && v == lo_[j])
            c.kind = Kind::lower;
        else if (std::isfinite(hi_[j]) && v == hi_[j])
            c.kind = Kind::upper;
        temp_val_[j] = v;
        ws_[j] = c;
        set_in_ws(c, true);
    }
    for (std::size_t r = 0; r < rhs_.size(); ++r) {
        double a = 0;
        for (std::size_t e = row_start_[r]; e < row_start_[r + 1]; ++e) a += val_[e] * x_[col_idx_[e]];
        act_[r] = a;
    }
    // violated sides get the artificial column
    std::size_t worst = sides_.size();
    double worst_v = ftol_;
    for (std::size_t k = 0; k < sides_.size(); ++k) {
        const double v = -slack(Cid{Kind::row, static_cast<std::uint32_t>(k)});
        if (v > ftol_) {
            sides_[k].art = true;
            if (v > worst_v) {
                worst_v = v;
                worst = k;
            }
        }
    }
    const auto s = static_cast<std::uint32_t>(n_);
    if (worst == sides_.size()) {
        ws_[n_] = Cid{Kind::fixed, s};
        in_phase1_ = false;
    } else {
        x_[n_] = worst_v;
        ws_[n_] = Cid{Kind::row, static_cast<std::uint32_t>(worst)};
        in_phase1_ = true;
    }
    set_in_ws(ws_[n_], true);
    refactor();
}

double SimplexEngine::beta(Cid c) const {
    switch (c.kind) {
        case Kind::row: {
            const auto& s = sides_[c.index];
            return s.sign * rhs_[s.row] - (perturbed_ ? pert_[c.index] : 0.0);
        }
        case Kind::lower: return lo_[c.index];
        case Kind::upper: return -hi_[c.index];
        case Kind::temp: return temp_val_[c.index];
        case Kind::fixed: return 0.0;
    }
    return 0.0;
}

double SimplexEngine::slack(Cid c) const {
    switch (c.kind) {
        case Kind::row: {
            const auto& s = sides_[c.index];
            return s.sign * (act_[s.row] - rhs_[s.row]) + (s.art ? x_[n_] : 0.0) + (perturbed_ ? pert_[c.index] : 0.0);
        }
        case Kind::lower: return x_[c.index] - lo_[c.index];
        case Kind::upper: return hi_[c.index] - x_[c.index];
        case Kind::temp: return x_[c.index] - temp_val_[c.index];
        case Kind::fixed: return x_[c.index];
    }
    return 0.0;
}

double SimplexEngine::side_rate(std::size_t k, std::span<const double> ad,
                                std::span<const double> d) const {
    const auto& s = sides_[k];
    return s.sign * ad[s.row] + (s.art ? d[n_] : 0.0);
}

std::uint64_t SimplexEngine::order_key(Cid c) const {
    std::uint64_t rank = c.kind == Kind::temp ? 0 : c.kind == Kind::row ? 1 : 2;
    return (rank << 40) | (std::uint64_t(c.index) << 1) | (c.kind == Kind::upper ? 1u : 0u);
}

void SimplexEngine::set_in_ws(Cid c, bool on) {
    if (c.kind == Kind::row)
        side_in_ws_[c.index] = on;
    else
        var_ws_[c.index] = on ? static_cast<std::int8_t>(c.kind) : std::int8_t(-1);
}

void SimplexEngine::row_times_inverse(Cid c, std::vector<double>& v) const {
    v.assign(N_, 0.0);
    switch (c.kind) {
        case Kind::row: {
            const auto& s = sides_[c.index];
            for (std::size_t e = row_start_[s.row]; e < row_start_[s.row + 1]; ++e)
                v[col_idx_[e]] += s.sign * val_[e];
            if (s.art) v[n_] += 1.0;
            break;
        }
        case Kind::upper: v[c.index] = -1.0; break;
        default: v[c.index] = 1.0; break;
    }
    basis_.btran(v);
}

void SimplexEngine::inverse_column(std::size_t p, std::vector<double>& d) const {
    d.assign(N_, 0.0);
    d[p] = 1.0;
    basis_.ftran(d);
}

void SimplexEngine::times_matrix(std::span<const double> d, std::vector<double>& ad) const {
    const auto m = rhs_.size();
    ad.resize(m);
    for (std::size_t r = 0; r < m; ++r) {
        double a = 0;
        for (std::size_t e = row_start_[r]; e < row_start_[r + 1]; ++e) a += val_[e] * d[col_idx_[e]];
        ad[r] = a;
    }
}

void SimplexEngine::refactor() {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(N_ * 4);
    std::vector<char> unit_seen(N_, 0);
    for (std::size_t p = 0; p < N_; ++p) {
        const Cid c = ws_[p];
        const auto r = static_cast<int>(p);
        if (is_unit(c)) {
            if (unit_seen[c.index]) throw SolverError("simplex: singular working set");
            unit_seen[c.index] = 1;
            t.emplace_back(r, static_cast<int>(c.index), c.kind == Kind::upper ? -1.0 : 1.0);
            continue;
        }
        const auto& s = sides_[c.index];
        for (std::size_t e = row_start_[s.row]; e < row_start_[s.row + 1]; ++e)
            t.emplace_back(r, static_cast<int>(col_idx_[e]), s.sign * val_[e]);
        if (s.art) t.emplace_back(r, static_cast<int>(n_), 1.0);
    }
    basis_.factor(N_, t);
    since_refactor_ = 0;
    recompute_state();
}

void SimplexEngine::recompute_state() {
    std::vector<double> b(N_);
    for (std::size_t p = 0; p < N_; ++p) b[p] = beta(ws_[p]);
    basis_.ftran(b);
    x_ = std::move(b);
    lam_ = in_phase1_ ? phase1_cost_ : cost_;
    basis_.btran(lam_);
    times_matrix(x_, act_);
}

void SimplexEngine::pivot(std::size_t p, Cid q) {
    row_times_inverse(q, v_);
    const double alpha = v_[p];
    if (!(std::abs(alpha) > 0)) throw SolverError("simplex: zero pivot");
    w_ = v_;
    w_[p] -= 1.0;
    nz_.clear();
    for (std::size_t i = 0; i < N_; ++i) {
        if (w_[i] != 0.0) {
            w_[i] /= alpha;
            nz_.push_back(static_cast<std::uint32_t>(i));
        }
    }
    const double lp = lam_[p];
    for (auto i : nz_) lam_[i] -= w_[i] * lp;
    basis_.update(p, nz_, w_);
    set_in_ws(ws_[p], false);
    ws_[p] = q;
    set_in_ws(q, true);
    ++iterations_;
    if (++since_refactor_ >= opts_.refactor_interval) refactor();
}

double SimplexEngine::max_violation(Cid* worst) const {
    double mv = 0;
    for (std::size_t k = 0; k < sides_.size(); ++k) {
        if (side_in_ws_[k]) continue;
        const Cid c{Kind::row, static_cast<std::uint32_t>(k)};
        const double v = -slack(c);
        if (v > mv) {
            mv = v;
            if (worst) *worst = c;
        }
    }
    for (std::size_t j = 0; j < N_; ++j) {
        if (var_ws_[j] == static_cast<std::int8_t>(Kind::fixed)) continue;
        const double vl = lo_[j] - x_[j];
        if (vl > mv && var_ws_[j] != static_cast<std::int8_t>(Kind::lower)) {
            mv = vl;
            if (worst) *worst = Cid{Kind::lower, static_cast<std::uint32_t>(j)};
        }
        const double vu = x_[j] - hi_[j];
        if (vu > mv && var_ws_[j] != static_cast<std::int8_t>(Kind::upper)) {
            mv = vu;
            if (worst) *worst = Cid{Kind::upper, static_cast<std::uint32_t>(j)};
        }
    }
    return mv;
}

double SimplexEngine::objective(std::span<const double> c) const {
    double s = 0;
    for (std::size_t j = 0; j < N_; ++j) s += c[j] * x_[j];
    return s;
}

void SimplexEngine::note_progress(double value) {
    // value must decrease for progress
    if (value < best_progress_ - 1e-12 * (1.0 + std::abs(best_progress_))) {
        best_progress_ = value;
        stall_ = 0;
        bland_ = false;
    } else if (++stall_ >= opts_.stall_threshold) {
        bland_ = true;
    }
}

SimplexEngine::Outcome SimplexEngine::primal(bool phase1) {
    const auto& c = phase1 ? phase1_cost_ : cost_;
    best_progress_ = objective(c);
    stall_ = 0;
    bland_ = false;
    bool verified = false;
    for (;;) {
        if (iterations_ >= max_iter_) return Outcome::limit;
        if (phase1 && x_[n_] <= ftol_) return Outcome::optimal;

        // pricing
        std::size_t p = N_;
        bool p_temp = false;
        double best = 0;
        std::uint64_t best_key = ~std::uint64_t(0);
        for (std::size_t i = 0; i < N_; ++i) {
            const Cid ci = ws_[i];
            if (ci.kind == Kind::fixed) continue;
            const double l = lam_[i];
            if (ci.kind == Kind::temp) {
                if (std::abs(l) > dtol_ && (!p_temp || std::abs(l) > best)) {
                    p = i;
                    p_temp = true;
                    best = std::abs(l);
                }
                continue;
            }
            if (p_temp || l >= -dtol_) continue;
            if (bland_) {
                const auto key = order_key(ci);
                if (key < best_key) {
                    best_key = key;
                    p = i;
                }
            } else if (-l > best) {
                best = -l;
                p = i;
            }
        }
        if (p == N_) {
            if (verified || since_refactor_ == 0) return Outcome::optimal;
            refactor();
            verified = true;
            continue;
        }
        verified = false;

        const double sigma = p_temp ? (lam_[p] > 0 ? -1.0 : 1.0) : 1.0;
        inverse_column(p, d_);
        if (sigma < 0)
            for (auto& v : d_) v = -v;
        times_matrix(d_, ad_);

        // Harris two-pass ratio test
        double theta_max = kInf;
        auto consider1 = [&](double rate, double sl) {
            if (rate < -ptol_) theta_max = std::min(theta_max, (std::max(sl, 0.0) + ftol_) / -rate);
        };
        for (std::size_t k = 0; k < sides_.size(); ++k) {
            if (side_in_ws_[k]) continue;
            consider1(side_rate(k, ad_, d_), slack(Cid{Kind::row, static_cast<std::uint32_t>(k)}));
        }
        for (std::size_t j = 0; j < N_; ++j) {
            const auto st = var_ws_[j];
            if (st == static_cast<std::int8_t>(Kind::fixed) || d_[j] == 0) continue;
            if (std::isfinite(lo_[j]) && st != static_cast<std::int8_t>(Kind::lower))
                consider1(d_[j], x_[j] - lo_[j]);
            if (std::isfinite(hi_[j]) && st != static_cast<std::int8_t>(Kind::upper))
                consider1(-d_[j], hi_[j] - x_[j]);
        }
        if (theta_max == kInf) {
            if (phase1) throw SolverError("simplex: unbounded phase-1 direction");
            ray_.assign(d_.begin(), d_.begin() + static_cast<std::ptrdiff_t>(n_));
            return Outcome::unbounded;
        }

        Cid q{Kind::fixed, 0};
        double q_rate = 0, q_ratio = kInf;
        std::uint64_t q_key = ~std::uint64_t(0);
        bool q_art = false;
        auto consider2 = [&](Cid cand, double rate, double sl) {
            if (rate >= -ptol_) return;
            const double ratio = std::max(sl, 0.0) / -rate;
            if (ratio > theta_max) return;
            const bool art = phase1 && cand.kind == Kind::lower && cand.index == n_;
            if (q_art) return;
            if (art) {
                q = cand; q_rate = rate; q_ratio = ratio; q_art = true;
                return;
            }
            if (bland_) {
                const auto key = order_key(cand);
                if (ratio < q_ratio - 1e-12 || (ratio <= q_ratio + 1e-12 && key < q_key)) {
                    q = cand; q_rate = rate; q_ratio = ratio; q_key = key;
                }
            } else if (-rate > -q_rate) {
                q = cand; q_rate = rate; q_ratio = ratio;
            }
        };
        for (std::size_t k = 0; k < sides_.size(); ++k) {
            if (side_in_ws_[k]) continue;
            const Cid ck{Kind::row, static_cast<std::uint32_t>(k)};
            consider2(ck, side_rate(k, ad_, d_), slack(ck));
        }
        for (std::size_t j = 0; j < N_; ++j) {
            const auto st = var_ws_[j];
            if (st == static_cast<std::int8_t>(Kind::fixed) || d_[j] == 0) continue;
            const auto ju = static_cast<std::uint32_t>(j);
            if (std::isfinite(lo_[j]) && st != static_cast<std::int8_t>(Kind::lower))
                consider2(Cid{Kind::lower, ju}, d_[j], x_[j] - lo_[j]);
            if (std::isfinite(hi_[j]) && st != static_cast<std::int8_t>(Kind::upper))
                consider2(Cid{Kind::upper, ju}, -d_[j], hi_[j] - x_[j]);
        }
        if (q.kind == Kind::fixed) throw SolverError("simplex: ratio test failed");

        const double step = q_ratio;
        if (step > 0) {
            for (std::size_t i = 0; i < N_; ++i) x_[i] += step * d_[i];
            for (std::size_t r = 0; r < act_.size(); ++r) act_[r] += step * ad_[r];
        }
        if (q.kind == Kind::lower && q.index == n_) x_[n_] = 0.0;
        pivot(p, q);
        note_progress(objective(c));
    }
}

SimplexEngine::Outcome SimplexEngine::dual() {
    best_progress_ = -objective(cost_);
    stall_ = 0;
    bland_ = false;
    for (;;) {
        if (iterations_ >= max_iter_) return Outcome::limit;
        // entering: most violated constraint (first violated under Bland)
        Cid q{Kind::fixed, 0};
        double worst = ftol_;
        std::uint64_t q_key = ~std::uint64_t(0);
        auto consider = [&](Cid c, double viol) {
            if (viol <= ftol_) return;
            if (bland_) {
                const auto key = order_key(c);
                if (key < q_key) {
                    q_key = key;
                    q = c;
                    worst = viol;
                }
            } else if (viol > worst) {
                worst = viol;
                q = c;
            }
        };
        for (std::size_t k = 0; k < sides_.size(); ++k) {
            if (side_in_ws_[k]) continue;
            const Cid c{Kind::row, static_cast<std::uint32_t>(k)};
            consider(c, -slack(c));
        }
        for (std::size_t j = 0; j < N_; ++j) {
            const auto st = var_ws_[j];
            if (st == static_cast<std::int8_t>(Kind::fixed)) continue;
            const auto ju = static_cast<std::uint32_t>(j);
            if (st != static_cast<std::int8_t>(Kind::lower)) consider(Cid{Kind::lower, ju}, lo_[j] - x_[j]);
            if (st != static_cast<std::int8_t>(Kind::upper)) consider(Cid{Kind::upper, ju}, x_[j] - hi_[j]);
        }
        if (q.kind == Kind::fixed) {
            if (since_refactor_ == 0) return Outcome::optimal;
            refactor();
            if (max_violation(nullptr) <= ftol_) return Outcome::optimal;
            continue;
        }

        row_times_inverse(q, v_);
        // leaving: temporaries first, then the dual ratio test
        std::size_t p = N_;
        double best = 0;
        for (std::size_t i = 0; i < N_; ++i)
            if (ws_[i].kind == Kind::temp && std::abs(v_[i]) > ptol_ && std::abs(v_[i]) > best) {
                best = std::abs(v_[i]);
                p = i;
            }
        if (p == N_) {
            double theta_max = kInf;
            for (std::size_t i = 0; i < N_; ++i) {
                const auto k = ws_[i].kind;
                if (k == Kind::fixed || k == Kind::temp || v_[i] <= ptol_) continue;
                theta_max = std::min(theta_max, (std::max(lam_[i], 0.0) + dtol_) / v_[i]);
            }
            if (theta_max == kInf) {
                farkas_.clear();
                farkas_.emplace_back(q, 1.0);
                for (std::size_t i = 0; i < N_; ++i)
                    if (ws_[i].kind != Kind::fixed && v_[i] != 0) farkas_.emplace_back(ws_[i], -v_[i]);
                return Outcome::infeasible;
            }
            double best_ratio = kInf;
            std::uint64_t best_key = ~std::uint64_t(0);
            for (std::size_t i = 0; i < N_; ++i) {
                const auto k = ws_[i].kind;
                if (k == Kind::fixed || k == Kind::temp || v_[i] <= ptol_) continue;
                const double ratio = std::max(lam_[i], 0.0) / v_[i];
                if (ratio > theta_max) continue;
                if (bland_) {
                    const auto key = order_key(ws_[i]);
                    if (ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && key < best_key)) {
                        best_ratio = ratio;
                        best_key = key;
                        p = i;
                    }
                } else if (v_[i] > best) {
                    best = v_[i];
                    p = i;
                }
            }
        }
        const double sigma = (ws_[p].kind == Kind::temp && v_[p] < 0) ? -1.0 : 1.0;
        inverse_column(p, d_);
        if (sigma < 0)
            for (auto& v : d_) v = -v;
        times_matrix(d_, ad_);
        const double rate = sigma * v_[p];
        const double step = -slack(q) / rate;
        for (std::size_t i = 0; i < N_; ++i) x_[i] += step * d_[i];
        for (std::size_t r = 0; r < act_.size(); ++r) act_[r] += step * ad_[r];
        if (ws_[p].kind != Kind::temp && lam_[p] < 0) lam_[p] = 0;
        pivot(p, q);
        note_progress(-objective(cost_));
    }
}

void SimplexEngine::end_phase1() {
    const auto s = static_cast<std::uint32_t>(n_);
    if (var_ws_[n_] != static_cast<std::int8_t>(Kind::lower)) {
        // s is at zero but still basic: swap its bound in with a zero step
        row_times_inverse(Cid{Kind::lower, s}, v_);
        std::size_t p = N_;
        double best = 0;
        for (std::size_t i = 0; i < N_; ++i)
            if (ws_[i].kind != Kind::fixed && std::abs(v_[i]) > best) {
                best = std::abs(v_[i]);
                p = i;
            }
        if (p == N_ || best < ptol_) throw SolverError("simplex: cannot remove artificial column");
        x_[n_] = 0.0;
        pivot(p, Cid{Kind::lower, s});
    }
    for (std::size_t i = 0; i < N_; ++i)
        if (ws_[i].kind == Kind::lower && ws_[i].index == s) {
            set_in_ws(ws_[i], false);
            ws_[i] = Cid{Kind::fixed, s};
            set_in_ws(ws_[i], true);
        }
    for (auto& side : sides_) side.art = false;
    in_phase1_ = false;
    refactor();
}

void SimplexEngine::unperturb() {
    perturbed_ = false;
    refactor();
}

SimplexEngine::Outcome SimplexEngine::finish() {
    for (int round = 0; round < 8; ++round) {
        auto r = primal(false);
        if (r != Outcome::optimal) return r;
        if (max_violation(nullptr) <= ftol_ * 10) return Outcome::optimal;
        r = dual();
        if (r != Outcome::optimal) return r;
    }
    return Outcome::optimal;
}

LPSolution SimplexEngine::solve() {
    if (in_phase1_) {
        const auto r = primal(true);
        if (r == Outcome::limit) return make_solution(Status::iteration_limit);
        if (x_[n_] > ftol_) {
            // phase-1 multipliers: sum lam_k a_k = 0 on x, lam'beta = s > 0
            farkas_.clear();
            for (std::size_t i = 0; i < N_; ++i)
                if (ws_[i].kind != Kind::temp && lam_[i] != 0) farkas_.emplace_back(ws_[i], lam_[i]);
            return make_solution(Status::infeasible);
        }
        end_phase1();
    }
    if (perturbed_) {
        const auto r = primal(false);
        if (r == Outcome::limit) return make_solution(Status::iteration_limit);
        if (r == Outcome::unbounded) return make_solution(Status::unbounded);
        unperturb();
    }
    switch (finish()) {
        case Outcome::optimal: return make_solution(Status::optimal);
        case Outcome::unbounded: return make_solution(Status::unbounded);
        case Outcome::infeasible: return make_solution(Status::infeasible);
        case Outcome::limit: break;
    }
    return make_solution(Status::iteration_limit);
}

LPSolution SimplexEngine::append_rows_and_resolve(const LinearProgram& lp) {
    if (lp.num_cols() != n_ || lp.num_rows() < rhs_.size())
        detail::invalid("simplex: appended program must extend the original");
    lp.validate();
    add_rows_from(lp, rhs_.size());
    if (in_phase1_) return solve();
    Outcome r = dual();
    if (r == Outcome::optimal) r = finish();
    switch (r) {
        case Outcome::optimal: return make_solution(Status::optimal);
        case Outcome::unbounded: return make_solution(Status::unbounded);
        case Outcome::infeasible: return make_solution(Status::infeasible);
        case Outcome::limit: break;
    }
    return make_solution(Status::iteration_limit);
}

LPSolution SimplexEngine::make_solution(Status status) const {
    LPSolution sol;
    sol.status = status;
    sol.iterations = iterations_;
    const auto m = rhs_.size();
    sol.primal.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) sol.primal[j] = x_[j] * colscale_[j];
    sol.dual.assign(m, 0.0);
    sol.reduced_costs.assign(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) sol.reduced_costs[j] = cost_[j];
    for (std::size_t i = 0; i < N_; ++i) {
        const Cid c = ws_[i];
        if (c.kind != Kind::row || in_phase1_) continue;
        const auto& s = sides_[c.index];
        const double y = s.sign * lam_[i];  // scaled row multiplier
        sol.dual[s.row] += y * rowscale_[s.row];
        for (std::size_t e = row_start_[s.row]; e < row_start_[s.row + 1]; ++e)
            sol.reduced_costs[col_idx_[e]] -= val_[e] * y;
    }
    for (std::size_t j = 0; j < n_; ++j) sol.reduced_costs[j] /= colscale_[j];
    double obj = 0;
    for (std::size_t j = 0; j < n_; ++j) obj += cost_[j] * x_[j];
    sol.objective_value = obj;

    if (status == Status::infeasible) {
        sol.farkas_rows.assign(m, 0.0);
        sol.farkas_bounds.assign(n_, 0.0);
        for (const auto& [c, y] : farkas_) {
            switch (c.kind) {
                case Kind::row: {
                    const auto& s = sides_[c.index];
                    sol.farkas_rows[s.row] += s.sign * y * rowscale_[s.row];
                    break;
                }
                case Kind::lower:
                    if (c.index < n_) sol.farkas_bounds[c.index] += y / colscale_[c.index];
                    break;
                case Kind::upper:
                    if (c.index < n_) sol.farkas_bounds[c.index] -= y / colscale_[c.index];
                    break;
                default: break;
            }
        }
    }
    if (status == Status::unbounded) {
        sol.ray.resize(n_);
        for (std::size_t j = 0; j < n_; ++j) sol.ray[j] = ray_[j] * colscale_[j];
    }
    return sol;
}

}  // namespace drcr::lp
