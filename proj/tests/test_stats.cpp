#include <doctest.h>

#include <cmath>
#include <vector>

#include "cfr/stats.hpp"
#include "support/generators.hpp"

using namespace cfr;
using namespace cfr::stats;

namespace {

// Definitional-sums route, independent of the implementation's centered
// two-pass formula.
double pearson_definitional(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        syy += ys[i] * ys[i];
        sxy += xs[i] * ys[i];
    }
    return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

} // namespace

TEST_CASE("pearson: exact linear relations") {
    const std::vector<double> up{1, 2, 3};
    const std::vector<double> doubled{2, 4, 6};
    const std::vector<double> down{3, 2, 1};
    CHECK(*pearson(up, doubled) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*pearson(up, down) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("pearson matches the definitional-sums route") {
    const std::vector<double> xs{0, 1, 2, 3};
    const std::vector<double> ys{0, 1, 2, 6};
    // 38 / sqrt(20 * 83) by the definitional sums.
    CHECK(pearson_definitional(xs, ys) == doctest::Approx(38.0 / std::sqrt(1660.0)));
    CHECK(*pearson(xs, ys) == doctest::Approx(pearson_definitional(xs, ys)).epsilon(1e-12));
    CHECK(*pearson(xs, ys) == doctest::Approx(0.93268).epsilon(1e-4));

    testing::Gen gen(3);
    for (int i = 0; i < 300; ++i) {
        const int n = gen.integer(3, 24);
        std::vector<double> as, bs;
        for (int k = 0; k < n; ++k) {
            as.push_back(gen.real(-5.0, 5.0));
            bs.push_back(gen.real(-5.0, 5.0));
        }
        const auto r = pearson(as, bs);
        REQUIRE(r.has_value());
        CHECK(*r == doctest::Approx(pearson_definitional(as, bs)).epsilon(1e-9));
        CHECK(*r >= -1.0);
        CHECK(*r <= 1.0);
    }
}

TEST_CASE("pearson is symmetric and invariant under positive affine maps") {
    testing::Gen gen(5);
    for (int i = 0; i < 200; ++i) {
        const int n = gen.integer(3, 16);
        std::vector<double> xs, ys;
        for (int k = 0; k < n; ++k) {
            xs.push_back(gen.real(-2.0, 2.0));
            ys.push_back(gen.real(-2.0, 2.0));
        }
        const auto r = pearson(xs, ys);
        REQUIRE(r.has_value());
        CHECK(almost_equal(*r, *pearson(ys, xs)));

        const double a = gen.real(0.1, 3.0);
        const double b = gen.real(-4.0, 4.0);
        std::vector<double> mapped;
        for (const double x : xs) mapped.push_back(a * x + b);
        CHECK(almost_equal(*pearson(mapped, ys), *r));
    }
}

TEST_CASE("pearson on a constant vector is absent, not zero") {
    const std::vector<double> flat{0.5, 0.5, 0.5, 0.5};
    const std::vector<double> varying{1, 2, 3, 4};
    CHECK(!pearson(flat, varying).has_value());
    CHECK(!pearson(varying, flat).has_value());
    CHECK_THROWS_AS(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}),
                    std::invalid_argument);
    CHECK_THROWS_AS(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}),
                    std::invalid_argument);
}

TEST_CASE("critical r for correlation significance") {
    // t*(10, .05) = 2.2281: r* = 2.2281 / sqrt(2.2281^2 + 10).
    CHECK(critical_r(10, 0.05) == doctest::Approx(0.5760).epsilon(5e-4));
    // t*(1, .05) = 12.706.
    CHECK(critical_r(1, 0.05) == doctest::Approx(0.9969).epsilon(5e-4));
    // Relaxing alpha lowers the bar monotonically.
    CHECK(critical_r(10, 0.5) < critical_r(10, 0.05));
    CHECK_THROWS_AS(critical_r(0, 0.05), std::invalid_argument);
    CHECK_THROWS_AS(critical_r(10, 0.0), std::invalid_argument);
}

TEST_CASE("student t machinery agrees with published critical values") {
    CHECK(student_t_critical(10, 0.05) == doctest::Approx(2.2281).epsilon(1e-4));
    CHECK(student_t_critical(1, 0.05) == doctest::Approx(12.7062).epsilon(1e-4));
    CHECK(student_t_critical(42, 0.05) == doctest::Approx(2.0181).epsilon(1e-4));
    CHECK(student_t_critical(42, 0.001) == doctest::Approx(3.5377).epsilon(1e-4));
    // Round trip: the two-tailed p of the critical value is alpha.
    for (const int df : {1, 5, 10, 42, 100}) {
        for (const double alpha : {0.001, 0.01, 0.05, 0.5}) {
            CHECK(student_t_two_tailed_p(student_t_critical(df, alpha), df) ==
                  doctest::Approx(alpha).epsilon(1e-9));
        }
    }
}

TEST_CASE("f tail probability matches the squared-t special case") {
    // F(1, df) is the square of t(df): tail probabilities must agree.
    for (const int df : {4, 10, 42}) {
        for (const double t : {0.5, 1.0, 2.0, 3.2}) {
            CHECK(f_tail_probability(t * t, 1, df) ==
                  doctest::Approx(student_t_two_tailed_p(t, df)).epsilon(1e-10));
        }
    }
    CHECK(f_tail_probability(0.0, 1, 10) == doctest::Approx(1.0));
}

TEST_CASE("partial correlation: values consistent with reported statistics") {
    // Mean correlations 0.65 and 0.75 with inter-model correlation 0.877
    // leave essentially nothing: about -0.024.
    CHECK(partial_correlation(0.65, 0.75, 0.877) == doctest::Approx(-0.024).epsilon(0.01));
    // Median correlations 0.71 and 0.83 with 0.879: about -0.074.
    CHECK(partial_correlation(0.71, 0.83, 0.879) == doctest::Approx(-0.074).epsilon(0.01));
    // Fully mediated case stays near zero.
    CHECK(std::fabs(partial_correlation(0.5, 0.5, 0.99)) < 0.05);
}

TEST_CASE("partial correlation of an exact product is algebraically zero") {
    testing::Gen gen(7);
    for (int i = 0; i < 500; ++i) {
        const double r = gen.real(-0.95, 0.95);
        const double s = gen.real(-0.95, 0.95);
        CHECK(std::fabs(partial_correlation(r * s, r, s)) < 1e-9);
    }
}

TEST_CASE("partial correlation rejects degenerate and out-of-range inputs") {
    CHECK_THROWS_AS(partial_correlation(0.5, 1.0, 0.5), DegenerateInputError);
    CHECK_THROWS_AS(partial_correlation(0.5, 0.5, -1.0), DegenerateInputError);
    CHECK_THROWS_AS(partial_correlation(1.5, 0.5, 0.5), std::invalid_argument);
}

namespace {

std::vector<AnovaObservation> random_balanced(testing::Gen& gen, int per_group) {
    std::vector<AnovaObservation> obs;
    for (int g = 1; g <= 2; ++g) {
        for (int i = 0; i < per_group; ++i) {
            obs.push_back(AnovaObservation{g, {gen.real(-1.0, 1.0), gen.real(-1.0, 1.0)}});
        }
    }
    return obs;
}

} // namespace

TEST_CASE("anova: no within-level differences means a zero F") {
    std::vector<AnovaObservation> obs{{1, {0.4, 0.4}},
                                      {1, {0.9, 0.9}},
                                      {2, {0.1, 0.1}},
                                      {2, {0.7, 0.7}}};
    const AnovaResult result = mixed_anova(obs);
    CHECK(result.f_model == doctest::Approx(0.0));
    CHECK(result.p_model == doctest::Approx(1.0));
}

TEST_CASE("anova within-effect F equals the pooled paired-t squared") {
    testing::Gen gen(11);
    for (int round = 0; round < 100; ++round) {
        const auto obs = random_balanced(gen, gen.integer(2, 12));
        const AnovaResult result = mixed_anova(obs);

        std::vector<int> groups;
        std::vector<double> diffs;
        for (const auto& o : obs) {
            groups.push_back(o.group);
            diffs.push_back(o.values[0] - o.values[1]);
        }
        const double t2 = testing::paired_t_pooled_squared(groups, diffs);
        CHECK(result.f_model == doctest::Approx(t2).epsilon(1e-9));
        CHECK(result.df_model[0] == 1);
        CHECK(result.df_model[1] == static_cast<int>(obs.size()) - 2);
        CHECK(result.f_model >= 0.0);
        CHECK(result.f_group >= 0.0);
        CHECK(result.f_interaction >= 0.0);
    }
}

TEST_CASE("anova identity also holds on unbalanced groups") {
    testing::Gen gen(13);
    for (int round = 0; round < 50; ++round) {
        std::vector<AnovaObservation> obs;
        const int n1 = gen.integer(2, 9);
        const int n2 = gen.integer(2, 9);
        for (int i = 0; i < n1; ++i) {
            obs.push_back(AnovaObservation{1, {gen.real(-1.0, 1.0), gen.real(-1.0, 1.0)}});
        }
        for (int i = 0; i < n2; ++i) {
            obs.push_back(AnovaObservation{2, {gen.real(-1.0, 1.0), gen.real(-1.0, 1.0)}});
        }
        std::vector<int> groups;
        std::vector<double> diffs;
        for (const auto& o : obs) {
            groups.push_back(o.group);
            diffs.push_back(o.values[0] - o.values[1]);
        }
        CHECK(mixed_anova(obs).f_model ==
              doctest::Approx(testing::paired_t_pooled_squared(groups, diffs)).epsilon(1e-9));
    }
}

TEST_CASE("anova F_model is unchanged when the group labels are flipped") {
    testing::Gen gen(17);
    for (int round = 0; round < 50; ++round) {
        auto obs = random_balanced(gen, gen.integer(2, 8));
        const double reference = mixed_anova(obs).f_model;
        for (auto& o : obs) o.group = o.group == 1 ? 2 : 1;
        CHECK(mixed_anova(obs).f_model == doctest::Approx(reference).epsilon(1e-12));
    }
}

TEST_CASE("anova needs two subjects per group") {
    std::vector<AnovaObservation> obs{{1, {0.1, 0.2}}, {1, {0.3, 0.4}}, {2, {0.5, 0.6}}};
    CHECK_THROWS_AS(mixed_anova(obs), std::invalid_argument);
    obs.push_back(AnovaObservation{3, {0.0, 0.0}});
    CHECK_THROWS_AS(mixed_anova(obs), std::invalid_argument);
}

namespace {

std::vector<ModelSpec> two_models() {
    return {{"mmh", mmh_model()}, {"mean", mean_model()}};
}

} // namespace

TEST_CASE("fit on noise-free data: the generating model correlates almost perfectly") {
    const DesignSpec design = DesignSpec::default_design();
    const auto subjects = simulate_subjects(8, design, mmh_model(), 0.0, 21);
    const auto report = fit_models(subjects, design, two_models());

    REQUIRE(report.model_names[0] == "mmh");
    CHECK(report.n_items == 12);
    CHECK(report.critical_r_value == doctest::Approx(0.576).epsilon(5e-4));
    for (const auto& fit : report.subjects) {
        REQUIRE(fit.models[0].r.has_value());
        // Ratings sit on the 1/16 grid while predictions are continuous, so
        // quantization keeps r a hair under 1.
        CHECK(*fit.models[0].r > 0.995);
        CHECK(fit.models[0].significant);
    }
    CHECK(report.best_model == 0);
    CHECK(report.mean_r[0] > report.mean_r[1]);
}

TEST_CASE("fit report on a seeded noisy dataset") {
    const DesignSpec design = DesignSpec::default_design();
    const auto subjects = simulate_subjects(44, design, mmh_model(), 0.15, 7);
    const auto report = fit_models(subjects, design, two_models());

    CHECK(report.mean_r[0] > report.mean_r[1]);
    REQUIRE(report.anova.has_value());
    CHECK(report.anova->df_model[0] == 1);
    CHECK(report.anova->df_model[1] == 42);
    CHECK(report.anova->p_model < 0.05);
    REQUIRE(report.partial_r_mean[1].has_value());
    CHECK(std::fabs(*report.partial_r_mean[1]) < 0.15);

    // The generating model wins the per-subject comparison for most
    // subjects.
    int mmh_wins = 0;
    for (const auto& fit : report.subjects) {
        if (fit.models[0].r && fit.models[1].r && *fit.models[0].r > *fit.models[1].r) {
            ++mmh_wins;
        }
    }
    CHECK(mmh_wins >= 33); // at least 75% of 44

    // Golden values recorded from the first run of this seed.
    CHECK(mmh_wins == 44);
    CHECK(report.mean_r[0] == doctest::Approx(0.954876).epsilon(1e-5));
    CHECK(report.mean_r[1] == doctest::Approx(0.624727).epsilon(1e-5));
    CHECK(report.anova->f_model == doctest::Approx(835.894).epsilon(1e-4));
    CHECK(*report.partial_r_mean[1] == doctest::Approx(0.0353567).epsilon(1e-4));
    CHECK(report.significant_count[0] == 44);
    CHECK(report.significant_count[1] == 33);
    CHECK(*report.intermodel_r_mean == doctest::Approx(0.645853).epsilon(1e-5));
}

TEST_CASE("fit ranks the generating model first across noise levels") {
    const DesignSpec design = DesignSpec::default_design();
    for (const double sd : {0.05, 0.2, 0.3}) {
        const auto subjects = simulate_subjects(24, design, mmh_model(), sd, 31);
        const auto report = fit_models(subjects, design, two_models());
        CAPTURE(sd);
        CHECK(report.best_model == 0);
        CHECK(report.model_names[report.best_model] == "mmh");
    }
}

TEST_CASE("fisher-z switch transforms the anova input, not the aggregates") {
    const DesignSpec design = DesignSpec::default_design();
    const auto subjects = simulate_subjects(12, design, mmh_model(), 0.2, 19);
    const auto raw = fit_models(subjects, design, two_models(), 0.05, false);
    const auto z = fit_models(subjects, design, two_models(), 0.05, true);
    REQUIRE(raw.anova.has_value());
    REQUIRE(z.anova.has_value());
    CHECK(raw.anova->f_model != doctest::Approx(z.anova->f_model));
    // atanh stretches strong positive correlations well past the raw scale.
    CHECK(z.anova->level_means[0] > raw.anova->level_means[0] + 0.1);
    CHECK(raw.mean_r[0] == doctest::Approx(z.mean_r[0]));
    CHECK(raw.median_r[1] == doctest::Approx(z.median_r[1]));
}

TEST_CASE("fit with a single subject still yields correlations, without anova") {
    const DesignSpec design = DesignSpec::default_design();
    auto subjects = simulate_subjects(2, design, mmh_model(), 0.1, 3);
    subjects.resize(1);
    const auto report = fit_models(subjects, design, two_models());
    CHECK(report.subjects.size() == 1);
    CHECK(report.subjects[0].models[0].r.has_value());
    CHECK(!report.anova.has_value());
}

TEST_CASE("fit excludes degenerate subjects instead of zeroing them") {
    const DesignSpec design = DesignSpec::default_design();
    auto subjects = simulate_subjects(4, design, mmh_model(), 0.1, 9);
    // A subject with an all-zero calibration predicts 0 everywhere under
    // every model: the prediction vector is constant.
    subjects[0].calibration = CalibrationMap{0.0, 0.0, 0.0};
    const auto report = fit_models(subjects, design, two_models());
    CHECK(!report.subjects[0].models[0].r.has_value());
    CHECK(report.excluded_count[0] == 1);
    CHECK(report.excluded_count[1] == 1);
    CHECK(report.subjects[1].models[0].r.has_value());
}

TEST_CASE("fit validates missing ratings") {
    const DesignSpec design = DesignSpec::default_design();
    auto subjects = simulate_subjects(3, design, mmh_model(), 0.1, 5);
    subjects[1].ratings.erase(7);
    CHECK_THROWS_AS(fit_models(subjects, design, two_models()), std::invalid_argument);
}

TEST_CASE("fit report serializes to json, csv, and text") {
    const DesignSpec design = DesignSpec::default_design();
    const auto subjects = simulate_subjects(6, design, mmh_model(), 0.1, 13);
    const auto report = fit_models(subjects, design, two_models());

    const std::string json = report.to_json_string(2);
    CHECK(json.find("\"best_model\"") != std::string::npos);
    CHECK(json.find("\"mmh\"") != std::string::npos);

    const std::string csv = report.to_csv();
    CHECK(csv.rfind("subject_id,form,model,r,significant,excluded\n", 0) == 0);
    // One row per subject and model plus the header.
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 6 * 2);

    const std::string text = report.to_text();
    CHECK(text.find("best model: mmh") != std::string::npos);
}
