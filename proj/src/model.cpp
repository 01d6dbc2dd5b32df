#include "drcr/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "drcr/error.hpp"
#include "json.hpp"

namespace drcr {

namespace {

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

void check_same_length(std::span<const double> f, std::span<const double> g) {
    if (f.size() != g.size()) detail::invalid("loss: length mismatch");
    if (f.empty()) detail::invalid("loss: empty input");
}

std::string fmt17(double v) {
    if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double read_number(const nlohmann::json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw ParseError("model: unexpected string '" + s + "' where a number was expected");
    }
    return j.get<double>();
}

}  // namespace

Dataset::Dataset(std::size_t d, std::vector<double> xs, std::vector<double> ys, std::string tag)
    : d_(d), xs_(std::move(xs)), ys_(std::move(ys)), tag_(std::move(tag)) {
    detail::require(d_ >= 1, "dataset: d must be >= 1");
    detail::require(!ys_.empty(), "dataset: n must be >= 1");
    detail::require(xs_.size() == ys_.size() * d_, "dataset: covariate matrix must be n x d");
    detail::require(all_finite(xs_) && all_finite(ys_), "dataset: entries must be finite");
}

Dataset Dataset::subset(std::span<const std::size_t> idx, std::string tag) const {
    std::vector<double> xs;
    std::vector<double> ys;
    xs.reserve(idx.size() * d_);
    ys.reserve(idx.size());
    for (std::size_t i : idx) {
        detail::require(i < n(), "dataset: subset index out of range");
        auto row = x(i);
        xs.insert(xs.end(), row.begin(), row.end());
        ys.push_back(ys_[i]);
    }
    return Dataset(d_, std::move(xs), std::move(ys), tag.empty() ? tag_ : std::move(tag));
}

MaxAffineModel::MaxAffineModel(std::size_t d, std::vector<AffinePiece> pieces, double grad_cap,
                               FitMeta meta)
    : d_(d), pieces_(std::move(pieces)), grad_cap_(grad_cap), meta_(meta) {
    detail::require(d_ >= 1, "model: d must be >= 1");
    detail::require(!pieces_.empty(), "model: at least one piece is required");
    detail::require(grad_cap_ > 0, "model: grad_cap must be positive");
    for (const auto& p : pieces_) {
        detail::require(p.xi.size() == d_ && p.anchor.size() == d_,
                        "model: piece gradient/anchor length must equal d");
    }
}

double predict(const MaxAffineModel& model, std::span<const double> x) {
    if (x.size() != model.d()) detail::invalid("predict: dimension mismatch");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : model.pieces()) {
        double v = p.g;
        for (std::size_t k = 0; k < x.size(); ++k) v += p.xi[k] * (x[k] - p.anchor[k]);
        best = std::max(best, v);
    }
    return best;
}

std::vector<double> predict_all(const MaxAffineModel& model, const Dataset& data) {
    std::vector<double> out(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) out[i] = predict(model, data.x(i));
    return out;
}

double gradient_sup_norm(const MaxAffineModel& model) {
    double m = 0.0;
    for (const auto& p : model.pieces())
        for (double v : p.xi) m = std::max(m, std::abs(v));
    return m;
}

double empirical_l1(std::span<const double> f, std::span<const double> g) {
    check_same_length(f, g);
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += std::abs(f[i] - g[i]);
    return s / static_cast<double>(f.size());
}

double empirical_l2(std::span<const double> f, std::span<const double> g) {
    check_same_length(f, g);
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += (f[i] - g[i]) * (f[i] - g[i]);
    return std::sqrt(s / static_cast<double>(f.size()));
}

LossReport loss_report(std::span<const double> f, std::span<const double> g) {
    return {empirical_l1(f, g), empirical_l2(f, g), f.size()};
}

double dual_objective(const MaxAffineModel& model, const Dataset& data, double delta) {
    if (!(delta >= 0)) detail::invalid("dual_objective: delta must be >= 0");
    if (model.d() != data.d()) detail::invalid("dual_objective: dimension mismatch");
    // absolute loss is 1-Lipschitz in its prediction argument
    constexpr double loss_lipschitz = 1.0;
    return delta * loss_lipschitz * gradient_sup_norm(model) +
           empirical_l1(data.ys(), predict_all(model, data));
}

std::string serialize(const MaxAffineModel& model) {
    std::ostringstream os;
    auto vec = [&](const std::vector<double>& v) {
        os << '[';
        for (std::size_t k = 0; k < v.size(); ++k) os << (k ? "," : "") << fmt17(v[k]);
        os << ']';
    };
    os << "{\"d\":" << model.d() << ",\"grad_cap\":" << fmt17(model.grad_cap())
       << ",\"fit_meta\":{\"objective\":" << fmt17(model.fit_meta().objective)
       << ",\"iterations\":" << model.fit_meta().iterations
       << ",\"delta\":" << fmt17(model.fit_meta().delta) << "},\"pieces\":[";
    const auto& pieces = model.pieces();
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        os << (i ? ",\n" : "\n") << "{\"g\":" << fmt17(pieces[i].g) << ",\"xi\":";
        vec(pieces[i].xi);
        os << ",\"anchor\":";
        vec(pieces[i].anchor);
        os << '}';
    }
    os << "\n]}\n";
    return os.str();
}

MaxAffineModel deserialize(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("model: ") + e.what());
    }
    try {
        const auto d = j.at("d").get<std::size_t>();
        std::vector<AffinePiece> pieces;
        for (const auto& p : j.at("pieces")) {
            AffinePiece piece;
            piece.g = read_number(p.at("g"));
            for (const auto& v : p.at("xi")) piece.xi.push_back(read_number(v));
            for (const auto& v : p.at("anchor")) piece.anchor.push_back(read_number(v));
            pieces.push_back(std::move(piece));
        }
        FitMeta meta;
        if (j.contains("fit_meta")) {
            const auto& m = j["fit_meta"];
            meta.objective = read_number(m.at("objective"));
            meta.iterations = m.at("iterations").get<std::size_t>();
            meta.delta = read_number(m.at("delta"));
        }
        return MaxAffineModel(d, std::move(pieces), read_number(j.at("grad_cap")), meta);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model: ") + e.what());
    }
}

}  // namespace drcr
