// combine.hpp — cross-rule combination operators and conclusion-scaling
// operators for certainty factors.

#pragma once

#include <span>
#include <string>

#include "cfr/certainty.hpp"

namespace cfr {

/// How certainties contributed to the same conclusion by different rules are
/// merged into one value.
enum class Combiner {
    Heckerman,      // (x + y) / (1 + x*y)
    ClassicCF,      // MYCIN's three-branch update
    DempsterShafer, // simple support functions over {X, not-X, unknown}
    Mean,
    Max,
    Min,
};

/// How a conclusion's maximum certainty factor is attenuated by the
/// summarized antecedent certainty.
enum class Scaler {
    Multiply,  // max_cf * antecedent
    MeanScale, // (max_cf + antecedent) / 2
};

CertaintyFactor combine_heckerman(CertaintyFactor x, CertaintyFactor y);
CertaintyFactor combine_classic(CertaintyFactor x, CertaintyFactor y);
CertaintyFactor combine_dempster_shafer(CertaintyFactor x, CertaintyFactor y);

/// Pairwise combination under the given operator.
CertaintyFactor combine(Combiner combiner, CertaintyFactor x, CertaintyFactor y);

/// Accumulates a sequence of contributions in list order.
///
/// A left fold of the pairwise operator, except for Mean, which is defined as
/// the arithmetic mean of the whole list: an iterated pairwise mean would
/// weight late contributions more heavily. Heckerman is associative, so its
/// fold is order-independent; ClassicCF with mixed signs is not, and the list
/// order (rule-firing order) is the contract.
CertaintyFactor fold_combine(Combiner combiner, std::span<const CertaintyFactor> cfs);

/// Attenuates max_cf by the summarized antecedent certainty in [0, 1].
CertaintyFactor scale(Scaler scaler, CertaintyFactor max_cf, double antecedent_cf);

const char* to_string(Combiner combiner) noexcept;
const char* to_string(Scaler scaler) noexcept;

} // namespace cfr
