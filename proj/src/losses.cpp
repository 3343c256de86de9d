#include "fmda/losses.hpp"

#include <cmath>

#include "fmda/errors.hpp"

namespace fmda {

namespace {

constexpr double kProbFloor = 1e-300;
constexpr double kNormFloor = 1e-12;

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ConfigError(std::string(what) + ": feature shapes differ");
    }
}

/// Writes d||a - b|| / da (the unit difference, scaled) into grad rows.
double row_distance(const Matrix& a, const Matrix& b, std::size_t r, std::vector<double>& unit) {
    auto ar = a.row(r);
    auto br = b.row(r);
    const double d = euclidean_distance(ar, br);
    unit.assign(ar.size(), 0.0);
    if (d > 0.0) {
        for (std::size_t k = 0; k < ar.size(); ++k) unit[k] = (ar[k] - br[k]) / d;
    }
    return d;
}

/// Row-wise unit normalization and its backward pass.
struct Normalized {
    Matrix unit;
    std::vector<double> norms;
};

Normalized normalize_rows(const Matrix& f) {
    Normalized out{Matrix(f.rows(), f.cols()), std::vector<double>(f.rows(), 0.0)};
    for (std::size_t r = 0; r < f.rows(); ++r) {
        auto src = f.row(r);
        double sq = 0.0;
        for (double v : src) sq += v * v;
        const double norm = std::sqrt(sq);
        out.norms[r] = norm;
        if (norm > kNormFloor) {
            auto dst = out.unit.row(r);
            for (std::size_t k = 0; k < src.size(); ++k) dst[k] = src[k] / norm;
        }
    }
    return out;
}

Matrix normalize_backward(const Normalized& n, const Matrix& grad_unit) {
    Matrix out(grad_unit.rows(), grad_unit.cols());
    for (std::size_t r = 0; r < grad_unit.rows(); ++r) {
        if (!(n.norms[r] > kNormFloor)) continue;
        auto u = n.unit.row(r);
        auto g = grad_unit.row(r);
        double dot = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) dot += u[k] * g[k];
        auto dst = out.row(r);
        for (std::size_t k = 0; k < u.size(); ++k) dst[k] = (g[k] - u[k] * dot) / n.norms[r];
    }
    return out;
}

}  // namespace

CrossEntropyResult cross_entropy(const Matrix& probs, std::span<const int> labels) {
    if (probs.rows() != labels.size()) throw ConfigError("cross_entropy: batch size mismatch");
    if (probs.rows() == 0) throw UsageError("cross_entropy: empty batch");
    CrossEntropyResult out;
    out.grad_logits = probs;
    const double inv_batch = 1.0 / static_cast<double>(probs.rows());
    double total = 0.0;
    for (std::size_t r = 0; r < probs.rows(); ++r) {
        const int y = labels[r];
        if (y < 0 || static_cast<std::size_t>(y) >= probs.cols()) {
            throw ConfigError("cross_entropy: label " + std::to_string(y) + " out of range");
        }
        double p = probs(r, static_cast<std::size_t>(y));
        if (p <= 0.0) {
            p = kProbFloor;
            ++out.clamped;
        }
        total -= std::log(p);
        out.grad_logits(r, static_cast<std::size_t>(y)) -= 1.0;
    }
    scale_inplace(out.grad_logits, inv_batch);
    out.value = total * inv_batch;
    return out;
}

PairLossResult l2_distance_loss(const Matrix& anchor, const Matrix& positive) {
    require_same_shape(anchor, positive, "l2_distance_loss");
    PairLossResult out{0.0, Matrix(anchor.rows(), anchor.cols()), Matrix(anchor.rows(), anchor.cols())};
    if (anchor.rows() == 0) return out;
    const double inv_n = 1.0 / static_cast<double>(anchor.rows());
    std::vector<double> unit;
    double total = 0.0;
    for (std::size_t r = 0; r < anchor.rows(); ++r) {
        total += row_distance(anchor, positive, r, unit);
        auto ga = out.grad_anchor.row(r);
        auto gp = out.grad_positive.row(r);
        for (std::size_t k = 0; k < unit.size(); ++k) {
            ga[k] = unit[k] * inv_n;
            gp[k] = -unit[k] * inv_n;
        }
    }
    out.value = total * inv_n;
    return out;
}

TripletLossResult triplet_plus_loss(const Matrix& anchor, const Matrix& positive,
                                    const Matrix& negative, double alpha, double beta) {
    if (!(alpha >= 0.0) || !(beta >= 0.0)) {
        throw ConfigError("triplet_plus_loss: margins alpha and beta must be >= 0");
    }
    require_same_shape(anchor, positive, "triplet_plus_loss");
    require_same_shape(anchor, negative, "triplet_plus_loss");
    const std::size_t n = anchor.rows();
    const std::size_t k = anchor.cols();
    TripletLossResult out{0.0, Matrix(n, k), Matrix(n, k), Matrix(n, k)};
    if (n == 0) return out;
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> unit_p;
    std::vector<double> unit_n;
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const double dp = row_distance(anchor, positive, r, unit_p);
        const double dn = row_distance(anchor, negative, r, unit_n);
        const double ranked = dp - dn + alpha;
        const double absolute = dp - beta;
        double coef_p = 0.0;
        double coef_n = 0.0;
        if (ranked > 0.0) {
            total += ranked;
            coef_p += 1.0;
            coef_n -= 1.0;
        }
        if (absolute > 0.0) {
            total += absolute;
            coef_p += 1.0;
        }
        coef_p *= inv_n;
        coef_n *= inv_n;
        auto ga = out.grad_anchor.row(r);
        auto gp = out.grad_positive.row(r);
        auto gn = out.grad_negative.row(r);
        for (std::size_t c = 0; c < k; ++c) {
            ga[c] = coef_p * unit_p[c] + coef_n * unit_n[c];
            gp[c] = -coef_p * unit_p[c];
            gn[c] = -coef_n * unit_n[c];
        }
    }
    out.value = total * inv_n;
    return out;
}

CombinedLossResult combined_loss(const Matrix& anchor_probs, std::span<const int> labels,
                                 const Matrix& anchor, const Matrix& positive,
                                 const Matrix& negative, Method method, const LossOptions& opts) {
    if (method != Method::kFinetune && method != Method::kFmdaL2 && method != Method::kFmdaTriplet) {
        throw UsageError("combined_loss: method '" + std::string(to_string(method)) +
                         "' has no adaptation objective");
    }
    if (!(opts.lambda >= 0.0)) throw ConfigError("combined_loss: lambda must be >= 0");
    if (method == Method::kFmdaTriplet && (negative.rows() != anchor.rows() || negative.empty())) {
        throw UsageError("combined_loss: fmda-triplet needs one negative per anchor");
    }
    if (anchor.rows() != labels.size()) throw ConfigError("combined_loss: batch size mismatch");

    CombinedLossResult out;
    CrossEntropyResult ce = cross_entropy(anchor_probs, labels);
    out.value.classification = ce.value;
    out.grad_logits = std::move(ce.grad_logits);
    out.grad_anchor = Matrix(anchor.rows(), anchor.cols());
    out.grad_positive = Matrix(positive.rows(), positive.cols());
    out.grad_negative = Matrix(negative.rows(), negative.cols());

    if (method != Method::kFinetune) {
        require_same_shape(anchor, positive, "combined_loss");
        if (opts.normalize_features) {
            const Normalized na = normalize_rows(anchor);
            const Normalized np = normalize_rows(positive);
            if (method == Method::kFmdaL2) {
                PairLossResult d = l2_distance_loss(na.unit, np.unit);
                out.value.distance = d.value;
                out.grad_anchor = normalize_backward(na, d.grad_anchor);
                out.grad_positive = normalize_backward(np, d.grad_positive);
            } else {
                const Normalized nn = normalize_rows(negative);
                TripletLossResult d = triplet_plus_loss(na.unit, np.unit, nn.unit, opts.alpha, opts.beta);
                out.value.distance = d.value;
                out.grad_anchor = normalize_backward(na, d.grad_anchor);
                out.grad_positive = normalize_backward(np, d.grad_positive);
                out.grad_negative = normalize_backward(nn, d.grad_negative);
            }
        } else if (method == Method::kFmdaL2) {
            PairLossResult d = l2_distance_loss(anchor, positive);
            out.value.distance = d.value;
            out.grad_anchor = std::move(d.grad_anchor);
            out.grad_positive = std::move(d.grad_positive);
        } else {
            TripletLossResult d = triplet_plus_loss(anchor, positive, negative, opts.alpha, opts.beta);
            out.value.distance = d.value;
            out.grad_anchor = std::move(d.grad_anchor);
            out.grad_positive = std::move(d.grad_positive);
            out.grad_negative = std::move(d.grad_negative);
        }
        scale_inplace(out.grad_anchor, opts.lambda);
        scale_inplace(out.grad_positive, opts.lambda);
        scale_inplace(out.grad_negative, opts.lambda);
    }
    out.value.total = out.value.classification + opts.lambda * out.value.distance;
    return out;
}

}  // namespace fmda
