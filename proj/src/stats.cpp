// Correlation, significance, and split-plot ANOVA.

#include "cfr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cfr {
namespace stats {

namespace {

double mean_of(std::span<const double> xs) {
    double sum = 0.0;
    for (const double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

double median_of(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    if (n % 2 == 1) return xs[n / 2];
    return (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
}

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIterations = 300;
    constexpr double kEpsilon = 1e-15;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEpsilon) break;
    }
    return h;
}

std::string format_cell(double v, int precision = 6) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(precision);
    out << v;
    return out.str();
}

} // namespace

std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) {
        throw std::invalid_argument("pearson needs equal-length vectors");
    }
    if (xs.size() < 3) {
        throw std::invalid_argument("pearson needs at least 3 pairs");
    }
    const double mx = mean_of(xs);
    const double my = mean_of(ys);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) {
        throw std::invalid_argument("incomplete_beta needs positive shape parameters");
    }
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_tailed_p(double t, int df) {
    if (df < 1) throw std::invalid_argument("df must be at least 1");
    const double t2 = t * t;
    const double nu = static_cast<double>(df);
    return incomplete_beta(nu / 2.0, 0.5, nu / (nu + t2));
}

double student_t_critical(int df, double alpha) {
    if (df < 1) throw std::invalid_argument("df must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("alpha must lie in (0, 1)");
    }
    // p(t) is monotone decreasing from 1 at t=0; bracket then bisect.
    double lo = 0.0;
    double hi = 1.0;
    while (student_t_two_tailed_p(hi, df) > alpha) {
        hi *= 2.0;
        if (hi > 1e300) break;
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (student_t_two_tailed_p(mid, df) > alpha) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double f_tail_probability(double f, int df1, int df2) {
    if (df1 < 1 || df2 < 1) throw std::invalid_argument("df must be at least 1");
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    const double d1 = static_cast<double>(df1);
    const double d2 = static_cast<double>(df2);
    return incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

double critical_r(int df, double alpha) {
    const double t = student_t_critical(df, alpha);
    return t / std::sqrt(t * t + static_cast<double>(df));
}

double partial_correlation(double r_xy, double r_xz, double r_yz) {
    for (const double r : {r_xy, r_xz, r_yz}) {
        if (!(r >= -1.0 && r <= 1.0)) {
            throw std::invalid_argument("correlation " + std::to_string(r) +
                                        " outside [-1, 1]");
        }
    }
    const double denom2 = (1.0 - r_xz * r_xz) * (1.0 - r_yz * r_yz);
    if (denom2 <= 0.0) {
        throw DegenerateInputError("partial correlation undefined when a "
                                   "controlling correlation is +/-1");
    }
    return (r_xy - r_xz * r_yz) / std::sqrt(denom2);
}

AnovaResult mixed_anova(std::span<const AnovaObservation> observations) {
    int n1 = 0, n2 = 0;
    for (const auto& obs : observations) {
        if (obs.group == 1) ++n1;
        else if (obs.group == 2) ++n2;
        else throw std::invalid_argument("group labels must be 1 or 2");
    }
    if (n1 < 2 || n2 < 2) {
        throw std::invalid_argument("mixed_anova needs at least two subjects per group");
    }
    const int n = n1 + n2;
    const double nd = static_cast<double>(n);

    // Cell means. Index 0 holds group 1.
    double grand = 0.0;
    std::array<double, 2> level_mean{};
    std::array<double, 2> group_mean{};
    std::array<std::array<double, 2>, 2> cell_mean{};
    for (const auto& obs : observations) {
        const int g = obs.group - 1;
        for (int m = 0; m < 2; ++m) {
            grand += obs.values[m];
            level_mean[m] += obs.values[m];
            group_mean[g] += obs.values[m];
            cell_mean[g][m] += obs.values[m];
        }
    }
    const std::array<double, 2> group_n{static_cast<double>(n1), static_cast<double>(n2)};
    grand /= 2.0 * nd;
    for (int m = 0; m < 2; ++m) level_mean[m] /= nd;
    for (int g = 0; g < 2; ++g) {
        group_mean[g] /= 2.0 * group_n[g];
        for (int m = 0; m < 2; ++m) cell_mean[g][m] /= group_n[g];
    }

    double ss_group = 0.0;
    for (int g = 0; g < 2; ++g) {
        const double dev = group_mean[g] - grand;
        ss_group += 2.0 * group_n[g] * dev * dev;
    }

    double ss_model = 0.0;
    for (int m = 0; m < 2; ++m) {
        const double dev = level_mean[m] - grand;
        ss_model += nd * dev * dev;
    }

    double ss_interaction = 0.0;
    for (int g = 0; g < 2; ++g) {
        for (int m = 0; m < 2; ++m) {
            const double dev = cell_mean[g][m] - group_mean[g] - level_mean[m] + grand;
            ss_interaction += group_n[g] * dev * dev;
        }
    }

    double ss_subjects_within = 0.0;
    double ss_within_total = 0.0;
    for (const auto& obs : observations) {
        const int g = obs.group - 1;
        const double subj_mean = (obs.values[0] + obs.values[1]) / 2.0;
        const double dev = subj_mean - group_mean[g];
        ss_subjects_within += 2.0 * dev * dev;
        for (int m = 0; m < 2; ++m) {
            const double w = obs.values[m] - subj_mean;
            ss_within_total += w * w;
        }
    }
    double ss_error = ss_within_total - ss_model - ss_interaction;
    if (ss_error < 0.0) ss_error = 0.0; // rounding guard

    const int df_error = n - 2;
    const auto f_ratio = [df_error](double ss_effect, double ss_err) {
        if (ss_effect <= 0.0) return 0.0;
        const double ms_err = ss_err / static_cast<double>(df_error);
        if (ms_err <= 0.0) return std::numeric_limits<double>::infinity();
        return ss_effect / ms_err;
    };

    AnovaResult result;
    result.n_subjects = n;
    result.f_model = f_ratio(ss_model, ss_error);
    result.df_model = {1, df_error};
    result.p_model = f_tail_probability(result.f_model, 1, df_error);
    result.f_group = f_ratio(ss_group, ss_subjects_within);
    result.p_group = f_tail_probability(result.f_group, 1, df_error);
    result.f_interaction = f_ratio(ss_interaction, ss_error);
    result.p_interaction = f_tail_probability(result.f_interaction, 1, df_error);
    result.level_means = level_mean;
    {
        std::vector<double> first, second;
        for (const auto& obs : observations) {
            first.push_back(obs.values[0]);
            second.push_back(obs.values[1]);
        }
        result.level_medians = {median_of(std::move(first)), median_of(std::move(second))};
    }
    return result;
}

FitReport fit_models(std::span<const SubjectRecord> subjects, const DesignSpec& design,
                     std::span<const ModelSpec> models, double alpha, bool fisher_z) {
    if (models.empty()) throw std::invalid_argument("fit_models needs at least one model");
    if (subjects.empty()) throw std::invalid_argument("fit_models needs subjects");
    if (design.items.size() < 3) {
        throw std::invalid_argument("design needs at least three items");
    }

    FitReport report;
    report.n_items = static_cast<int>(design.items.size());
    report.alpha = alpha;
    report.critical_r_value = critical_r(report.n_items - 2, alpha);
    for (const auto& model : models) report.model_names.push_back(model.name);
    report.significant_count.assign(models.size(), 0);
    report.excluded_count.assign(models.size(), 0);

    std::vector<std::vector<double>> r_values(models.size());
    std::vector<double> intermodel_values;

    for (const auto& subject : subjects) {
        SubjectFit fit;
        fit.subject_id = subject.subject_id;
        fit.form = subject.form;

        std::vector<double> ratings;
        ratings.reserve(design.items.size());
        for (const auto& item : design.items) {
            const auto it = subject.ratings.find(item.id);
            if (it == subject.ratings.end()) {
                throw std::invalid_argument("subject " + std::to_string(subject.subject_id) +
                                            " has no rating for item " +
                                            std::to_string(item.id));
            }
            ratings.push_back(it->second.value());
        }

        std::vector<std::vector<double>> predictions(models.size());
        for (std::size_t m = 0; m < models.size(); ++m) {
            predictions[m].reserve(design.items.size());
            for (const auto& item : design.items) {
                predictions[m].push_back(
                    predict_item(item, subject.calibration, models[m].config).value());
            }
            SubjectModelFit model_fit;
            model_fit.r = pearson(predictions[m], ratings);
            if (model_fit.r) {
                model_fit.significant = std::fabs(*model_fit.r) > report.critical_r_value;
                r_values[m].push_back(*model_fit.r);
                if (model_fit.significant) ++report.significant_count[m];
            } else {
                ++report.excluded_count[m];
            }
            fit.models.push_back(std::move(model_fit));
        }

        if (models.size() >= 2) {
            fit.intermodel_r = pearson(predictions[0], predictions[1]);
            if (fit.intermodel_r) intermodel_values.push_back(*fit.intermodel_r);
        }
        report.subjects.push_back(std::move(fit));
    }

    report.mean_r.assign(models.size(), std::numeric_limits<double>::quiet_NaN());
    report.median_r.assign(models.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t m = 0; m < models.size(); ++m) {
        if (!r_values[m].empty()) {
            report.mean_r[m] = mean_of(r_values[m]);
            report.median_r[m] = median_of(r_values[m]);
        }
    }
    if (!intermodel_values.empty()) {
        report.intermodel_r_mean = mean_of(intermodel_values);
        report.intermodel_r_median = median_of(intermodel_values);
    }

    report.best_model = 0;
    for (std::size_t m = 1; m < models.size(); ++m) {
        if (std::isnan(report.mean_r[report.best_model]) ||
            (!std::isnan(report.mean_r[m]) && report.mean_r[m] > report.mean_r[report.best_model])) {
            report.best_model = m;
        }
    }

    report.partial_r_mean.assign(models.size(), std::nullopt);
    report.partial_r_median.assign(models.size(), std::nullopt);
    if (models.size() == 2 && report.intermodel_r_mean) {
        const std::size_t best = report.best_model;
        const std::size_t other = 1 - best;
        const auto try_partial = [](double r_xy, double r_xz,
                                    double r_yz) -> std::optional<double> {
            if (std::isnan(r_xy) || std::isnan(r_xz) || std::isnan(r_yz)) {
                return std::nullopt;
            }
            try {
                return partial_correlation(r_xy, r_xz, r_yz);
            } catch (const DegenerateInputError&) {
                return std::nullopt;
            }
        };
        report.partial_r_mean[other] = try_partial(
            report.mean_r[other], report.mean_r[best], *report.intermodel_r_mean);
        report.partial_r_median[other] = try_partial(
            report.median_r[other], report.median_r[best], *report.intermodel_r_median);
    }

    if (models.size() == 2) {
        const auto score = [fisher_z](double r) {
            if (!fisher_z) return r;
            return std::atanh(std::clamp(r, -1.0 + 1e-15, 1.0 - 1e-15));
        };
        std::vector<AnovaObservation> observations;
        for (const auto& fit : report.subjects) {
            if (fit.models[0].r && fit.models[1].r) {
                observations.push_back(AnovaObservation{
                    fit.form, {score(*fit.models[0].r), score(*fit.models[1].r)}});
            }
        }
        try {
            report.anova = mixed_anova(observations);
        } catch (const std::invalid_argument&) {
            report.anova = std::nullopt;
        }
    }
    return report;
}

namespace {

nlohmann::json optional_to_json(const std::optional<double>& v) {
    if (!v) return nullptr;
    return *v;
}

nlohmann::json anova_to_json(const AnovaResult& a) {
    return {{"n_subjects", a.n_subjects},
            {"f_model", a.f_model},
            {"df_model", {a.df_model[0], a.df_model[1]}},
            {"p_model", a.p_model},
            {"f_form", a.f_group},
            {"p_form", a.p_group},
            {"f_interaction", a.f_interaction},
            {"p_interaction", a.p_interaction},
            {"level_means", {a.level_means[0], a.level_means[1]}},
            {"level_medians", {a.level_medians[0], a.level_medians[1]}}};
}

} // namespace

std::string FitReport::to_json_string(int indent) const {
    nlohmann::json doc;
    doc["model_names"] = model_names;
    doc["n_items"] = n_items;
    doc["alpha"] = alpha;
    doc["critical_r"] = critical_r_value;
    doc["subjects"] = nlohmann::json::array();
    for (const auto& fit : subjects) {
        nlohmann::json per_model = nlohmann::json::array();
        for (const auto& m : fit.models) {
            per_model.push_back(
                {{"r", optional_to_json(m.r)}, {"significant", m.significant}});
        }
        doc["subjects"].push_back({{"subject_id", fit.subject_id},
                                   {"form", fit.form},
                                   {"models", std::move(per_model)},
                                   {"intermodel_r", optional_to_json(fit.intermodel_r)}});
    }
    const auto number_or_null = [](double v) -> nlohmann::json {
        if (std::isnan(v)) return nullptr;
        return v;
    };
    doc["mean_r"] = nlohmann::json::array();
    doc["median_r"] = nlohmann::json::array();
    for (std::size_t m = 0; m < model_names.size(); ++m) {
        doc["mean_r"].push_back(number_or_null(mean_r[m]));
        doc["median_r"].push_back(number_or_null(median_r[m]));
    }
    doc["significant_count"] = significant_count;
    doc["excluded_count"] = excluded_count;
    doc["intermodel_r_mean"] = optional_to_json(intermodel_r_mean);
    doc["intermodel_r_median"] = optional_to_json(intermodel_r_median);
    doc["best_model"] = model_names[best_model];
    doc["partial_r_mean"] = nlohmann::json::array();
    doc["partial_r_median"] = nlohmann::json::array();
    for (std::size_t m = 0; m < model_names.size(); ++m) {
        doc["partial_r_mean"].push_back(optional_to_json(partial_r_mean[m]));
        doc["partial_r_median"].push_back(optional_to_json(partial_r_median[m]));
    }
    doc["anova"] = anova ? anova_to_json(*anova) : nlohmann::json(nullptr);
    return doc.dump(indent);
}

std::string FitReport::to_csv() const {
    std::string out = "subject_id,form,model,r,significant,excluded\n";
    for (const auto& fit : subjects) {
        for (std::size_t m = 0; m < model_names.size(); ++m) {
            const auto& model_fit = fit.models[m];
            out += std::to_string(fit.subject_id) + "," + std::to_string(fit.form) + "," +
                   model_names[m] + ",";
            out += model_fit.r ? format_cell(*model_fit.r) : "";
            out += ",";
            out += model_fit.significant ? "1" : "0";
            out += ",";
            out += model_fit.r ? "0" : "1";
            out += "\n";
        }
    }
    return out;
}

std::string FitReport::to_text() const {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(6);
    out << "items per subject: " << n_items << "  critical |r| at alpha " << alpha
        << ": " << critical_r_value << "\n";
    for (const auto& fit : subjects) {
        out << "subject " << fit.subject_id << " (form " << fit.form << "):";
        for (std::size_t m = 0; m < model_names.size(); ++m) {
            out << " " << model_names[m] << " r=";
            if (fit.models[m].r) {
                out << *fit.models[m].r << (fit.models[m].significant ? "*" : "");
            } else {
                out << "excluded";
            }
        }
        out << "\n";
    }
    for (std::size_t m = 0; m < model_names.size(); ++m) {
        out << "model " << model_names[m] << ": ";
        if (std::isnan(mean_r[m])) {
            out << "no usable subjects";
        } else {
            out << "mean r " << mean_r[m] << ", median r " << median_r[m] << ", significant "
                << significant_count[m] << "/" << subjects.size();
        }
        if (excluded_count[m] > 0) out << ", excluded " << excluded_count[m];
        out << "\n";
    }
    if (intermodel_r_mean) {
        out << "inter-model r: mean " << *intermodel_r_mean << ", median "
            << *intermodel_r_median << "\n";
    }
    out << "best model: " << model_names[best_model] << "\n";
    for (std::size_t m = 0; m < model_names.size(); ++m) {
        if (partial_r_mean[m]) {
            out << "partial r (" << model_names[m] << " | " << model_names[best_model]
                << "): from means " << *partial_r_mean[m];
            if (partial_r_median[m]) out << ", from medians " << *partial_r_median[m];
            out << "\n";
        }
    }
    if (anova) {
        out << "anova: F_model(" << anova->df_model[0] << "," << anova->df_model[1]
            << ") = " << anova->f_model << ", p = " << anova->p_model << "; F_form = "
            << anova->f_group << ", p = " << anova->p_group << "; F_interaction = "
            << anova->f_interaction << ", p = " << anova->p_interaction << "\n";
    } else {
        out << "anova: unavailable\n";
    }
    return out.str();
}

} // namespace stats
} // namespace cfr
