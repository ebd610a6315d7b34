// Antecedent trees and summarization models.

#include "cfr/antecedent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cfr {

AntecedentExpr AntecedentExpr::leaf(std::string proposition) {
    if (proposition.empty()) {
        throw std::invalid_argument("leaf proposition must be named");
    }
    AntecedentExpr e;
    e.kind_ = Kind::Leaf;
    e.proposition_ = std::move(proposition);
    return e;
}

AntecedentExpr AntecedentExpr::conjunction(std::vector<AntecedentExpr> children) {
    if (children.size() < 2) {
        throw std::invalid_argument("conjunction needs at least two children");
    }
    AntecedentExpr e;
    e.kind_ = Kind::And;
    e.children_ = std::move(children);
    return e;
}

AntecedentExpr AntecedentExpr::disjunction(std::vector<AntecedentExpr> children) {
    if (children.size() < 2) {
        throw std::invalid_argument("disjunction needs at least two children");
    }
    AntecedentExpr e;
    e.kind_ = Kind::Or;
    e.children_ = std::move(children);
    return e;
}

const std::string& AntecedentExpr::proposition() const {
    if (kind_ != Kind::Leaf) {
        throw std::logic_error("proposition() on a non-leaf node");
    }
    return proposition_;
}

std::vector<std::string> AntecedentExpr::leaf_propositions() const {
    std::vector<std::string> out;
    const auto walk = [&out](const AntecedentExpr& node, const auto& self) -> void {
        if (node.kind() == Kind::Leaf) {
            out.push_back(node.proposition_);
            return;
        }
        for (const auto& child : node.children()) self(child, self);
    };
    walk(*this, walk);
    return out;
}

bool operator==(const AntecedentExpr& a, const AntecedentExpr& b) {
    return a.kind_ == b.kind_ && a.proposition_ == b.proposition_ &&
           a.children_ == b.children_;
}

namespace {

// Leaf certainty, clamped into [0, 1].
double leaf_certainty(const std::string& prop, const BeliefLookup& beliefs) {
    const auto cf = beliefs(prop);
    if (!cf) throw UnknownPropositionError(prop);
    return std::max(0.0, cf->value());
}

std::vector<double> flat_certainties(const AntecedentExpr& expr,
                                     const BeliefLookup& beliefs) {
    std::vector<double> out;
    for (const auto& prop : expr.leaf_propositions()) {
        out.push_back(leaf_certainty(prop, beliefs));
    }
    return out;
}

double maximin(const AntecedentExpr& expr, const BeliefLookup& beliefs) {
    switch (expr.kind()) {
    case AntecedentExpr::Kind::Leaf:
        return leaf_certainty(expr.proposition(), beliefs);
    case AntecedentExpr::Kind::And: {
        double acc = 1.0;
        for (const auto& child : expr.children())
            acc = std::min(acc, maximin(child, beliefs));
        return acc;
    }
    case AntecedentExpr::Kind::Or: {
        double acc = 0.0;
        for (const auto& child : expr.children())
            acc = std::max(acc, maximin(child, beliefs));
        return acc;
    }
    }
    throw std::logic_error("unreachable expr kind");
}

double prob_hybrid(const AntecedentExpr& expr, const BeliefLookup& beliefs) {
    switch (expr.kind()) {
    case AntecedentExpr::Kind::Leaf:
        return leaf_certainty(expr.proposition(), beliefs);
    case AntecedentExpr::Kind::And: {
        double acc = 1.0;
        for (const auto& child : expr.children())
            acc *= prob_hybrid(child, beliefs);
        return acc;
    }
    case AntecedentExpr::Kind::Or: {
        double miss = 1.0;
        for (const auto& child : expr.children())
            miss *= 1.0 - prob_hybrid(child, beliefs);
        return 1.0 - miss;
    }
    }
    throw std::logic_error("unreachable expr kind");
}

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    // Even length: mean of the two middle order statistics.
    return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

} // namespace

namespace {

double summarize_raw(Summarizer summarizer, const AntecedentExpr& expr,
                     const BeliefLookup& beliefs) {
    switch (summarizer) {
    case Summarizer::Maximin:
        return maximin(expr, beliefs);
    case Summarizer::ProbHybrid:
        return prob_hybrid(expr, beliefs);
    default:
        break;
    }

    const std::vector<double> flat = flat_certainties(expr, beliefs);
    switch (summarizer) {
    case Summarizer::Min:
        return *std::min_element(flat.begin(), flat.end());
    case Summarizer::Max:
        return *std::max_element(flat.begin(), flat.end());
    case Summarizer::Product: {
        double acc = 1.0;
        for (const double c : flat) acc *= c;
        return acc;
    }
    case Summarizer::SumMinusOverlap: {
        double miss = 1.0;
        for (const double c : flat) miss *= 1.0 - c;
        return 1.0 - miss;
    }
    case Summarizer::Mean: {
        double sum = 0.0;
        for (const double c : flat) sum += c;
        return sum / static_cast<double>(flat.size());
    }
    case Summarizer::Median:
        return median_of(flat);
    default:
        throw std::logic_error("unreachable summarizer");
    }
}

} // namespace

double summarize(Summarizer summarizer, const AntecedentExpr& expr,
                 const BeliefLookup& beliefs) {
    // The mean path can drift past 1 by an ulp when summing many values.
    return std::clamp(summarize_raw(summarizer, expr, beliefs), 0.0, 1.0);
}

const char* to_string(Summarizer summarizer) noexcept {
    switch (summarizer) {
    case Summarizer::Maximin: return "maximin";
    case Summarizer::Min: return "min";
    case Summarizer::Max: return "max";
    case Summarizer::Product: return "product";
    case Summarizer::SumMinusOverlap: return "sum-minus-overlap";
    case Summarizer::Mean: return "mean";
    case Summarizer::Median: return "median";
    case Summarizer::ProbHybrid: return "prob-hybrid";
    }
    return "?";
}

} // namespace cfr
