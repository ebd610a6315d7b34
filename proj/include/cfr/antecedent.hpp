// antecedent.hpp — antecedent expression trees and the summarization models
// that reduce a rule's antecedent certainties to a single value in [0, 1].

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfr/certainty.hpp"

namespace cfr {

/// A finite, non-empty tree of propositions joined by conjunction or
/// disjunction. And/Or nodes always have at least two children.
class AntecedentExpr {
public:
    enum class Kind { Leaf, And, Or };

    static AntecedentExpr leaf(std::string proposition);
    /// Throws std::invalid_argument with fewer than two children.
    static AntecedentExpr conjunction(std::vector<AntecedentExpr> children);
    static AntecedentExpr disjunction(std::vector<AntecedentExpr> children);

    Kind kind() const noexcept { return kind_; }
    const std::string& proposition() const; // Leaf only
    std::span<const AntecedentExpr> children() const noexcept { return children_; }

    /// All leaf proposition names, left to right (duplicates preserved).
    std::vector<std::string> leaf_propositions() const;

    friend bool operator==(const AntecedentExpr&, const AntecedentExpr&);

private:
    AntecedentExpr() = default;

    Kind kind_ = Kind::Leaf;
    std::string proposition_;
    std::vector<AntecedentExpr> children_;
};

/// The summarization models. Maximin and ProbHybrid are structure-sensitive
/// and recurse over the tree; the rest apply to the flattened list of leaf
/// certainties regardless of connectives, which is their documented role as
/// foil models.
enum class Summarizer {
    Maximin,        // min over And children, max over Or children
    Min,
    Max,
    Product,
    SumMinusOverlap, // 1 - prod(1 - c_i)
    Mean,
    Median,
    ProbHybrid,     // product over And children, sum-minus-overlap over Or
};

using BeliefLookup =
    std::function<std::optional<CertaintyFactor>(const std::string&)>;

/// Reduces the antecedent certainties to one value in [0, 1]. Leaf
/// certainties are clamped to [0, 1] first: a disconfirmed antecedent
/// weakens a rule, it never inverts its conclusion.
///
/// Throws UnknownPropositionError when a leaf has no belief.
double summarize(Summarizer summarizer, const AntecedentExpr& expr,
                 const BeliefLookup& beliefs);

const char* to_string(Summarizer summarizer) noexcept;

} // namespace cfr
