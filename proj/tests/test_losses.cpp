#include <doctest.h>

#include <cmath>
#include <vector>

#include "fmda/errors.hpp"
#include "fmda/losses.hpp"
#include "oracles.hpp"

using namespace fmda;
using namespace fmda::testing;

namespace {

Matrix rotate_rows(const Matrix& m, const Matrix& q) { return matmul(m, q); }

// Random orthogonal matrix by Gram-Schmidt.
Matrix random_rotation(std::size_t d, RngStream& rng) {
    Matrix q = random_matrix(d, d, rng);
    for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t p = 0; p < c; ++p) {
            double dot = 0.0;
            for (std::size_t r = 0; r < d; ++r) dot += q(r, c) * q(r, p);
            for (std::size_t r = 0; r < d; ++r) q(r, c) -= dot * q(r, p);
        }
        double n = 0.0;
        for (std::size_t r = 0; r < d; ++r) n += q(r, c) * q(r, c);
        n = std::sqrt(n);
        for (std::size_t r = 0; r < d; ++r) q(r, c) /= n;
    }
    return q;
}

// Rows (0, 0), (dp, 0) and (0, dn) give distances dp and dn to the anchor.
double triplet_at(double dp, double dn, double alpha, double beta) {
    return triplet_plus_loss(Matrix::from_rows({{0, 0}}), Matrix::from_rows({{dp, 0}}),
                             Matrix::from_rows({{0, dn}}), alpha, beta)
        .value;
}

}  // namespace

TEST_CASE("cross-entropy examples") {
    const std::vector<int> y0{0};
    CHECK(cross_entropy(Matrix::from_rows({{0.25, 0.25, 0.25, 0.25}}), y0).value ==
          doctest::Approx(std::log(4.0)).epsilon(1e-15));
    CHECK(cross_entropy(Matrix::from_rows({{1.0, 0.0}}), y0).value == 0.0);
    CHECK(std::fabs(cross_entropy(Matrix::from_rows({{0.7, 0.2, 0.1}}), y0).value - 0.356675) <
          1e-6);

    const CrossEntropyResult clamped = cross_entropy(Matrix::from_rows({{0.0, 1.0}}), y0);
    CHECK(clamped.clamped == 1);
    CHECK(std::isfinite(clamped.value));
    CHECK(clamped.value == doctest::Approx(-std::log(1e-300)));

    const CrossEntropyResult r =
        cross_entropy(Matrix::from_rows({{0.7, 0.2, 0.1}, {0.1, 0.3, 0.6}}), std::vector<int>{0, 2});
    CHECK(r.grad_logits == Matrix::from_rows({{(0.7 - 1) / 2, 0.1, 0.05}, {0.05, 0.15, (0.6 - 1) / 2}}));
    CHECK_THROWS_AS(cross_entropy(Matrix::from_rows({{0.5, 0.5}}), std::vector<int>{2}), Error);
}

TEST_CASE("cross-entropy is non-negative and zero only at certainty") {
    RngStream rng(1, 1);
    for (int t = 0; t < 200; ++t) {
        const Matrix z = random_matrix(4, 5, rng, 3.0);
        Matrix p(4, 5);
        for (std::size_t r = 0; r < 4; ++r) {
            const auto s = softmax(z.row(r));
            for (std::size_t c = 0; c < 5; ++c) p(r, c) = s[c];
        }
        const std::vector<int> y{0, 1, 2, 4};
        const double v = cross_entropy(p, y).value;
        CHECK(v > 0.0);
        CHECK(std::fabs(v - oracle_cross_entropy(z, y)) < 1e-12);
    }
}

TEST_CASE("L2 distance loss examples") {
    const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
    const PairLossResult same = l2_distance_loss(a, a);
    CHECK(same.value == 0.0);
    for (double g : same.grad_anchor.values()) CHECK(g == 0.0);
    CHECK(l2_distance_loss(Matrix::from_rows({{1, 0}}), Matrix::from_rows({{0, 0}})).value == 1.0);
    const PairLossResult r =
        l2_distance_loss(Matrix::from_rows({{3, 0}, {0, 4}}), Matrix::from_rows({{0, 0}, {0, 0}}));
    CHECK(r.value == 3.5);
    CHECK(r.grad_anchor == Matrix::from_rows({{0.5, 0}, {0, 0.5}}));
    CHECK(r.grad_positive == Matrix::from_rows({{-0.5, 0}, {0, -0.5}}));
    CHECK_THROWS_AS(l2_distance_loss(Matrix(2, 2), Matrix(2, 3)), ConfigError);
}

TEST_CASE("triplet loss examples") {
    CHECK(triplet_at(0.0, 2.0, 1.0, 0.3) == 0.0);
    CHECK(triplet_at(1.0, 1.0, 1.0, 0.3) == doctest::Approx(1.7).epsilon(1e-15));
    CHECK(triplet_at(0.5, 2.0, 1.0, 0.3) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK_THROWS_AS(triplet_at(1, 1, -0.1, 0.3), ConfigError);
    CHECK_THROWS_AS(triplet_at(1, 1, 1.0, -0.1), ConfigError);
}

TEST_CASE("losses agree with the loop oracles") {
    RngStream rng(2, 1);
    for (int t = 0; t < 100; ++t) {
        const Matrix a = random_matrix(6, 4, rng), p = random_matrix(6, 4, rng),
                     n = random_matrix(6, 4, rng);
        CHECK(std::fabs(l2_distance_loss(a, p).value - oracle_l2(a, p)) < 1e-13);
        CHECK(std::fabs(triplet_plus_loss(a, p, n, 0.7, 0.2).value -
                        oracle_triplet(a, p, n, 0.7, 0.2)) < 1e-13);
    }
}

TEST_CASE("triplet loss is monotone in the positive and negative distances") {
    RngStream rng(3, 1);
    for (int t = 0; t < 500; ++t) {
        const double dp = rng.uniform(0, 3), dn = rng.uniform(0, 3), eps = rng.uniform(0, 0.5);
        const double alpha = rng.uniform(0, 1.5), beta = rng.uniform(0, 0.6);
        const double base = triplet_at(dp, dn, alpha, beta);
        CHECK(triplet_at(dp, dn + eps, alpha, beta) <= base + 1e-15);
        CHECK(triplet_at(dp + eps, dn, alpha, beta) >= base - 1e-15);
    }
}

TEST_CASE("distance losses are invariant under a common rotation") {
    RngStream rng(4, 1);
    for (int t = 0; t < 50; ++t) {
        const Matrix q = random_rotation(5, rng);
        const Matrix a = random_matrix(6, 5, rng), p = random_matrix(6, 5, rng),
                     n = random_matrix(6, 5, rng);
        const Matrix ra = rotate_rows(a, q), rp = rotate_rows(p, q), rn = rotate_rows(n, q);
        CHECK(std::fabs(l2_distance_loss(a, p).value - l2_distance_loss(ra, rp).value) < 1e-9);
        CHECK(std::fabs(triplet_plus_loss(a, p, n, 1.0, 0.3).value -
                        triplet_plus_loss(ra, rp, rn, 1.0, 0.3).value) < 1e-9);
    }
}

TEST_CASE("combined loss assembly") {
    RngStream rng(5, 1);
    const Matrix a = random_matrix(4, 3, rng), p = random_matrix(4, 3, rng),
                 n = random_matrix(4, 3, rng);
    Matrix probs(4, 2);
    probs.fill(0.5);
    const std::vector<int> y{0, 0, 1, 1};
    const double ce = std::log(2.0);

    LossOptions opts;
    opts.lambda = 0.0;
    const CombinedLossResult zero = combined_loss(probs, y, a, p, n, Method::kFmdaL2, opts);
    CHECK(zero.value.total == zero.value.classification);
    for (double g : zero.grad_anchor.values()) CHECK(g == 0.0);

    for (Method m : {Method::kFmdaL2, Method::kFmdaTriplet}) {
        opts.lambda = 1.7;
        const CombinedLossResult r = combined_loss(probs, y, a, p, n, m, opts);
        CHECK(std::fabs(r.value.total - (r.value.classification + 1.7 * r.value.distance)) < 1e-12);
        CHECK(r.value.classification == doctest::Approx(ce).epsilon(1e-15));
        CHECK(r.value.distance > 0.0);
    }
    opts.lambda = 1.0;
    const double l2 = l2_distance_loss(a, p).value;
    const CombinedLossResult r = combined_loss(probs, y, a, p, n, Method::kFmdaL2, opts);
    CHECK(std::fabs(r.value.total - (ce + l2)) < 1e-12);

    const CombinedLossResult ft = combined_loss(probs, y, a, p, n, Method::kFinetune, opts);
    CHECK(ft.value.distance == 0.0);
    CHECK(ft.value.total == ft.value.classification);
    for (double g : ft.grad_positive.values()) CHECK(g == 0.0);
    for (double g : ft.grad_negative.values()) CHECK(g == 0.0);

    CHECK_THROWS_AS(combined_loss(probs, y, a, p, Matrix(), Method::kFmdaTriplet, opts), UsageError);
    CHECK_NOTHROW(combined_loss(probs, y, a, p, Matrix(), Method::kFmdaL2, opts));
    CHECK_THROWS_AS(combined_loss(probs, y, a, p, n, Method::kWithoutTarget, opts), UsageError);
}

TEST_CASE("normalized features use unit-length rows") {
    RngStream rng(6, 1);
    const Matrix a = random_matrix(4, 3, rng), p = random_matrix(4, 3, rng),
                 n = random_matrix(4, 3, rng);
    Matrix probs(4, 2);
    probs.fill(0.5);
    const std::vector<int> y{0, 0, 1, 1};
    LossOptions opts;
    opts.normalize_features = true;
    const CombinedLossResult r = combined_loss(probs, y, a, p, n, Method::kFmdaL2, opts);
    CHECK(std::fabs(r.value.distance - oracle_l2(oracle_normalize(a), oracle_normalize(p))) < 1e-13);
    // Scaling the raw features changes nothing.
    const CombinedLossResult s =
        combined_loss(probs, y, scaled(a, 7.0), scaled(p, 0.3), n, Method::kFmdaL2, opts);
    CHECK(std::fabs(s.value.distance - r.value.distance) < 1e-13);
}
