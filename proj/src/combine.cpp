// Cross-rule combination and conclusion scaling.

#include "cfr/combine.hpp"

#include <cmath>
#include <stdexcept>

namespace cfr {

namespace {

CertaintyFactor clamp_result(double v) {
    // The formulas map [-1,1]^2 into [-1,1] exactly; the clamp only absorbs
    // last-ulp rounding at the boundary.
    return CertaintyFactor::clamped(v);
}

} // namespace

CertaintyFactor combine_heckerman(CertaintyFactor x, CertaintyFactor y) {
    const double denom = 1.0 + x.value() * y.value();
    if (denom <= 0.0) {
        throw ContradictionError("heckerman combination of certain opposed evidence");
    }
    return clamp_result((x.value() + y.value()) / denom);
}

CertaintyFactor combine_classic(CertaintyFactor x, CertaintyFactor y) {
    const double a = x.value();
    const double b = y.value();
    if (a >= 0.0 && b >= 0.0) {
        return clamp_result(a + b - a * b);
    }
    if (a <= 0.0 && b <= 0.0) {
        return clamp_result(a + b + a * b);
    }
    const double denom = 1.0 - std::min(std::fabs(a), std::fabs(b));
    if (denom <= 0.0) {
        throw ContradictionError("classic CF combination of certain opposed evidence");
    }
    return clamp_result((a + b) / denom);
}

CertaintyFactor combine_dempster_shafer(CertaintyFactor x, CertaintyFactor y) {
    // Each CF becomes a simple support function over {X, not-X, unknown}:
    // |cf| on the supported hypothesis, the remainder on unknown.
    const auto mass_for = [](double cf) {
        struct Mass {
            double pro, con, theta;
        };
        if (cf >= 0.0) return Mass{cf, 0.0, 1.0 - cf};
        return Mass{0.0, -cf, 1.0 + cf};
    };
    const auto m1 = mass_for(x.value());
    const auto m2 = mass_for(y.value());

    const double conflict = m1.pro * m2.con + m1.con * m2.pro;
    const double norm = 1.0 - conflict;
    if (norm <= 0.0) {
        throw ContradictionError("dempster-shafer combination with total conflict");
    }
    const double pro = (m1.pro * m2.pro + m1.pro * m2.theta + m1.theta * m2.pro) / norm;
    const double con = (m1.con * m2.con + m1.con * m2.theta + m1.theta * m2.con) / norm;
    return clamp_result(pro - con);
}

CertaintyFactor combine(Combiner combiner, CertaintyFactor x, CertaintyFactor y) {
    switch (combiner) {
    case Combiner::Heckerman:
        return combine_heckerman(x, y);
    case Combiner::ClassicCF:
        return combine_classic(x, y);
    case Combiner::DempsterShafer:
        return combine_dempster_shafer(x, y);
    case Combiner::Mean:
        return clamp_result((x.value() + y.value()) / 2.0);
    case Combiner::Max:
        return std::max(x, y);
    case Combiner::Min:
        return std::min(x, y);
    }
    throw std::logic_error("unreachable combiner");
}

CertaintyFactor fold_combine(Combiner combiner, std::span<const CertaintyFactor> cfs) {
    if (cfs.empty()) {
        throw std::invalid_argument("fold_combine requires a non-empty list");
    }
    if (combiner == Combiner::Mean) {
        double sum = 0.0;
        for (const auto cf : cfs) sum += cf.value();
        return CertaintyFactor::clamped(sum / static_cast<double>(cfs.size()));
    }
    CertaintyFactor acc = cfs.front();
    for (std::size_t i = 1; i < cfs.size(); ++i) {
        acc = combine(combiner, acc, cfs[i]);
    }
    return acc;
}

CertaintyFactor scale(Scaler scaler, CertaintyFactor max_cf, double antecedent_cf) {
    if (!(antecedent_cf >= 0.0 && antecedent_cf <= 1.0)) {
        throw std::out_of_range("antecedent certainty " + std::to_string(antecedent_cf) +
                                " outside [0, 1]");
    }
    switch (scaler) {
    case Scaler::Multiply:
        return CertaintyFactor(max_cf.value() * antecedent_cf);
    case Scaler::MeanScale:
        return CertaintyFactor((max_cf.value() + antecedent_cf) / 2.0);
    }
    throw std::logic_error("unreachable scaler");
}

const char* to_string(Combiner combiner) noexcept {
    switch (combiner) {
    case Combiner::Heckerman: return "heckerman";
    case Combiner::ClassicCF: return "classic";
    case Combiner::DempsterShafer: return "dempster-shafer";
    case Combiner::Mean: return "mean";
    case Combiner::Max: return "max";
    case Combiner::Min: return "min";
    }
    return "?";
}

const char* to_string(Scaler scaler) noexcept {
    switch (scaler) {
    case Scaler::Multiply: return "multiply";
    case Scaler::MeanScale: return "mean-scale";
    }
    return "?";
}

} // namespace cfr
