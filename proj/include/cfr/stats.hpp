// stats.hpp — per-subject model fitting and the statistical machinery it
// needs: Pearson correlation, correlation significance, partial correlation,
// and a two-group / two-level split-plot ANOVA.

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfr/experiment.hpp"

namespace cfr {
namespace stats {

/// Sample Pearson product-moment correlation. Returns nullopt when either
/// vector is constant (the statistic is undefined; callers exclude such
/// cases from aggregates instead of biasing them with zeros).
/// Throws std::invalid_argument on mismatched lengths or fewer than 3 pairs.
std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys);

/// Regularized incomplete beta function I_x(a, b), accurate to ~1e-12.
double incomplete_beta(double a, double b, double x);

/// Two-tailed tail probability of Student's t with df degrees of freedom.
double student_t_two_tailed_p(double t, int df);

/// Two-tailed critical value: the t with P(|T| >= t) = alpha. Accurate to
/// better than 1e-6 (bisection on the CDF).
double student_t_critical(int df, double alpha);

/// Upper tail probability P(F >= f) for an F(df1, df2) statistic.
double f_tail_probability(double f, int df1, int df2);

/// Smallest |r| significant at the two-tailed alpha level with df degrees
/// of freedom: t* / sqrt(t*^2 + df).
double critical_r(int df, double alpha);

/// First-order partial correlation of x and y with z held fixed.
/// Throws DegenerateInputError when |r_xz| or |r_yz| is 1 (the denominator
/// vanishes) and std::invalid_argument outside [-1, 1].
double partial_correlation(double r_xy, double r_xz, double r_yz);

/// One subject's scores: group (1 or 2) and one value per within level.
struct AnovaObservation {
    int group = 1;
    std::array<double, 2> values{};
};

struct AnovaResult {
    int n_subjects = 0;
    // Within-subject main effect, df (1, N-2); the error term is the
    // level x subject-within-group interaction.
    double f_model = 0.0;
    std::array<int, 2> df_model{1, 0};
    double p_model = 1.0;
    // Between-subject (group) effect against subject-within-group error.
    double f_group = 0.0;
    double p_group = 1.0;
    // Level x group interaction.
    double f_interaction = 0.0;
    double p_interaction = 1.0;
    std::array<double, 2> level_means{};
    std::array<double, 2> level_medians{};
};

/// Split-plot ANOVA with one two-level between factor and one two-level
/// within factor. Throws std::invalid_argument with fewer than two subjects
/// in either group.
AnovaResult mixed_anova(std::span<const AnovaObservation> observations);

/// A named propagation model entered into the fit.
struct ModelSpec {
    std::string name;
    StrategyConfig config;
};

struct SubjectModelFit {
    std::optional<double> r; // nullopt when the prediction vector is constant
    bool significant = false;
};

struct SubjectFit {
    int subject_id = 0;
    int form = 1;
    std::vector<SubjectModelFit> models; // parallel to the ModelSpec list
    std::optional<double> intermodel_r;  // model 0 vs model 1 predictions
};

struct FitReport {
    std::vector<std::string> model_names;
    int n_items = 0;
    double alpha = 0.05;
    double critical_r_value = 0.0;

    std::vector<SubjectFit> subjects;

    // Aggregates over subjects with a defined r.
    std::vector<double> mean_r;
    std::vector<double> median_r;
    std::vector<int> significant_count;
    std::vector<int> excluded_count;

    std::optional<double> intermodel_r_mean;
    std::optional<double> intermodel_r_median;

    std::size_t best_model = 0; // index of the highest mean r
    // Partial correlation of each model's agreement with the ratings when
    // the best model is held fixed, from mean and from median correlations.
    // nullopt for the best model itself and for degenerate inputs.
    std::vector<std::optional<double>> partial_r_mean;
    std::vector<std::optional<double>> partial_r_median;

    // Present only for two-model fits with at least two usable subjects per
    // form.
    std::optional<AnovaResult> anova;

    std::string to_json_string(int indent = -1) const;
    /// Flat summary, one row per subject and model.
    std::string to_csv() const;
    std::string to_text() const;
};

/// The full fitting pipeline: per-subject predictions from the subject's
/// own calibration, per-model correlations with the ratings, significance
/// counts, the form x model ANOVA over correlations, inter-model prediction
/// correlations, and partial correlations controlling the best model.
///
/// The ANOVA runs on raw correlations by default; fisher_z feeds it
/// atanh-transformed values instead. Reported means and medians stay on the
/// raw scale either way.
FitReport fit_models(std::span<const SubjectRecord> subjects, const DesignSpec& design,
                     std::span<const ModelSpec> models, double alpha = 0.05,
                     bool fisher_z = false);

} // namespace stats
} // namespace cfr
