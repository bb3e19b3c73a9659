#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "itecp/conformal.hpp"
#include "itecp/errors.hpp"
#include "itecp/rng.hpp"

using namespace itecp;

namespace {

GbmModel constant_model(double value, std::size_t d) {
    GbmModel m;
    m.base_prediction = value;
    m.n_features = d;
    return m;
}

CalibratedQuantile quantile_of(double value, double level = 0.9) {
    CalibratedQuantile q;
    q.level = level;
    q.value = value;
    q.n_calib = 100;
    return q;
}

}  // namespace

TEST_CASE("conformal quantile index arithmetic") {
    std::vector<double> scores(99);
    for (std::size_t i = 0; i < 99; ++i) scores[i] = static_cast<double>(i + 1);
    CHECK(conformal_quantile(scores, 0.1).value == 90.0);

    const std::vector<double> five = {1, 2, 3, 4, 5};
    CHECK(!conformal_quantile(five, 0.1).finite());

    const std::vector<double> three = {3, 1, 2};
    CHECK(conformal_quantile(three, 0.5).value == 2.0);

    CHECK_THROWS_AS(conformal_quantile({}, 0.1), DataError);
    CHECK_THROWS_AS(conformal_quantile(five, 0.0), ConfigError);
}

TEST_CASE("conformal quantile matches exact integer index arithmetic") {
    for (std::size_t n : {1ul, 2ul, 7ul, 19ul, 99ul, 100ul, 200ul}) {
        std::vector<double> scores(n);
        for (std::size_t i = 0; i < n; ++i) scores[i] = static_cast<double>(i + 1);
        for (int i = 1; i <= 99; ++i) {
            const double alpha = i / 100.0;
            // exact: k = ceil((n+1)(100-i)/100) in integers
            const std::size_t num = (n + 1) * static_cast<std::size_t>(100 - i);
            const std::size_t k = (num + 99) / 100;
            const auto q = conformal_quantile(scores, alpha);
            if (k > n) {
                CHECK(!q.finite());
            } else {
                CHECK(q.value == static_cast<double>(k));
            }
        }
    }
}

TEST_CASE("higher coverage never shrinks the quantile") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> scores(30 + rng.below(100));
        for (auto& s : scores) s = rng.normal();
        double prev = -std::numeric_limits<double>::infinity();
        for (int i = 99; i >= 1; --i) {  // alpha descending => level ascending
            const auto q = conformal_quantile(scores, i / 100.0);
            CHECK(q.value >= prev);
            prev = q.value;
        }
    }
}

TEST_CASE("absolute residual scores") {
    const auto zero = constant_model(0.0, 1);
    Matrix rows(3, 1);
    const std::vector<double> targets = {1.0, -2.0, 3.0};
    const auto s = abs_residual_scores(zero, rows, targets, ScoreSource::oracle());
    CHECK(s.values == std::vector<double>{1.0, 2.0, 3.0});

    const auto match = constant_model(5.0, 1);
    const std::vector<double> fives = {5.0, 5.0, 5.0};
    const auto z = abs_residual_scores(match, rows, fives, ScoreSource::oracle());
    for (double v : z.values) CHECK(v == 0.0);

    // homogeneity: doubling predictions and targets doubles the scores
    const auto doubled = constant_model(10.0, 1);
    const std::vector<double> tens = {2.0, -4.0, 6.0};
    const auto s1 = abs_residual_scores(constant_model(5.0, 1), rows,
                                        std::vector<double>{1.0, -2.0, 3.0},
                                        ScoreSource::oracle());
    const auto s2 = abs_residual_scores(doubled, rows, tens, ScoreSource::oracle());
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(s2.values[i] == doctest::Approx(2.0 * s1.values[i]).epsilon(1e-15));
}

TEST_CASE("signed-distance scores and the max identity") {
    QuantilePair pair;
    pair.lo = constant_model(0.0, 1);
    pair.hi = constant_model(2.0, 1);
    Matrix rows(3, 1);
    const std::vector<double> targets = {1.0, 3.0, -1.0};
    const auto s = cqr_scores(pair, rows, targets, ScoreSource::oracle());
    CHECK(s.values == std::vector<double>{-1.0, 1.0, 1.0});

    Rng rng(32);
    for (int i = 0; i < 1000; ++i) {
        const double a = rng.normal() * 10.0, b = rng.normal() * 10.0;
        const double via_identity = 0.5 * (a + b) + 0.5 * std::abs(a - b);
        CHECK(std::abs(std::max(a, b) - via_identity) < 1e-12);
    }
}

TEST_CASE("interval issuance in both modes") {
    CateModel point_cate;
    point_cate.point = constant_model(1.0, 1);
    const std::vector<double> x = {0.5};

    const auto iv = issue_interval(point_cate, quantile_of(2.0), ScoreKind::AbsoluteResidual, x);
    CHECK(iv.lo == -1.0);
    CHECK(iv.hi == 3.0);

    CalibratedQuantile inf_q;  // default value is +inf
    inf_q.n_calib = 3;
    const auto vac = issue_interval(point_cate, inf_q, ScoreKind::AbsoluteResidual, x);
    CHECK(vac.vacuous());
    CHECK(vac.lo == -std::numeric_limits<double>::infinity());
    CHECK(vac.hi == std::numeric_limits<double>::infinity());

    CateModel cqr_cate;
    cqr_cate.point = constant_model(0.5, 1);
    QuantilePair pair;
    pair.lo = constant_model(0.0, 1);
    pair.hi = constant_model(1.0, 1);
    cqr_cate.quantile_pair = pair;
    const auto band =
        issue_interval(cqr_cate, quantile_of(-0.25), ScoreKind::SignedDistanceCQR, x);
    CHECK(band.lo == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(band.hi == doctest::Approx(0.75).epsilon(1e-15));

    CHECK_THROWS_AS(
        issue_interval(point_cate, quantile_of(1.0), ScoreKind::SignedDistanceCQR, x),
        DataError);
}

TEST_CASE("interval membership is the score-threshold event") {
    Rng rng(33);
    const std::vector<double> x = {0.0};
    for (int i = 0; i < 10000; ++i) {
        const double tau_hat = rng.normal() * 3.0;
        const double ite = rng.normal() * 3.0;
        const double q = std::abs(rng.normal());
        CateModel cate;
        cate.point = constant_model(tau_hat, 1);
        const auto iv =
            issue_interval(cate, quantile_of(q), ScoreKind::AbsoluteResidual, x);
        const bool in_interval = iv.contains(ite);
        const bool below_quantile = std::abs(tau_hat - ite) <= q;
        CHECK(in_interval == below_quantile);
    }

    // same equivalence for the signed-distance construction
    for (int i = 0; i < 10000; ++i) {
        const double lo = rng.normal() * 2.0;
        const double hi = lo + std::abs(rng.normal());
        const double ite = rng.normal() * 3.0;
        const double q = rng.normal();
        CateModel cate;
        cate.point = constant_model(0.5 * (lo + hi), 1);
        QuantilePair pair;
        pair.lo = constant_model(lo, 1);
        pair.hi = constant_model(hi, 1);
        cate.quantile_pair = pair;
        const auto iv =
            issue_interval(cate, quantile_of(q), ScoreKind::SignedDistanceCQR, x);
        const bool in_interval = iv.contains(ite);
        const bool below_quantile = std::max(lo - ite, ite - hi) <= q;
        CHECK(in_interval == below_quantile);
    }
}

TEST_CASE("split conformal coverage matches the rank guarantee") {
    // generate -> split -> calibrate -> test on one point, scores and target
    // of the same type, repeated; coverage must sit in
    // [1-alpha, 1-alpha + 1/(n_c+1)] up to Monte Carlo noise.
    const double alpha = 0.2;
    const int reps = 500;
    const std::size_t n_train = 60, n_calib = 79;
    int hits = 0;
    for (int r = 0; r < reps; ++r) {
        SynthConfig cfg;
        cfg.n = n_train + n_calib + 1;
        cfg.d = 2;
        cfg.seed = 1000 + r;
        cfg.setup = Setup::B;
        const auto ds = generate_synthetic(cfg);

        Matrix train_x(n_train, 2);
        std::vector<double> train_ite(n_train);
        for (std::size_t i = 0; i < n_train; ++i) {
            train_x.at(i, 0) = ds.x.at(i, 0);
            train_x.at(i, 1) = ds.x.at(i, 1);
            train_ite[i] = (*ds.y1)[i] - (*ds.y0)[i];
        }
        GbmConfig gcfg;
        gcfg.n_trees = 10;
        const auto model = fit(train_x, train_ite, gcfg);

        std::vector<double> scores(n_calib);
        for (std::size_t i = 0; i < n_calib; ++i) {
            const std::size_t row = n_train + i;
            scores[i] = std::abs(model.predict_row(ds.x.row(row)) -
                                 ((*ds.y1)[row] - (*ds.y0)[row]));
        }
        const auto q = conformal_quantile(scores, alpha);
        const std::size_t t = n_train + n_calib;
        const double test_score =
            std::abs(model.predict_row(ds.x.row(t)) - ((*ds.y1)[t] - (*ds.y0)[t]));
        if (test_score <= q.value) ++hits;
    }
    const double coverage = static_cast<double>(hits) / reps;
    const double lo = 1.0 - alpha;
    const double hi = 1.0 - alpha + 1.0 / (n_calib + 1);
    const double mc = 3.0 * std::sqrt(0.8 * 0.2 / reps);
    CHECK(coverage >= lo - mc);
    CHECK(coverage <= hi + mc);
}

TEST_CASE("end-to-end meta-learner pipeline issues usable intervals") {
    SynthConfig cfg;
    cfg.n = 600;
    cfg.d = 2;
    cfg.seed = 77;
    cfg.setup = Setup::B;
    const auto ds = generate_synthetic(cfg);
    const auto splits = split(ds, {0.4, 0.3, 0.2}, 5);

    GbmConfig gcfg;
    gcfg.n_trees = 25;
    for (ScoreKind kind : {ScoreKind::AbsoluteResidual, ScoreKind::SignedDistanceCQR}) {
        const auto art = conformal_meta_learner(ds, splits, Learner::DR, kind, 0.1, gcfg);
        CHECK(art.quantile.n_calib == splits.calib_set.size());
        const auto iv = art.interval_at(ds.x.row(0));
        CHECK(iv.lo <= iv.hi);
        if (kind == ScoreKind::SignedDistanceCQR) CHECK(art.cate.quantile_pair.has_value());
    }

    SplitIndices empty_phi = splits;
    empty_phi.phi_set.clear();
    CHECK_THROWS_AS(conformal_meta_learner(ds, empty_phi, Learner::DR,
                                           ScoreKind::AbsoluteResidual, 0.1, gcfg),
                    DataError);
}
