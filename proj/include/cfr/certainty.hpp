// certainty.hpp — the certainty-factor value type and the error types shared
// across the engine.
//
// A certainty factor is a signed degree of belief in [-1, 1]: -1 means the
// proposition is certain not to hold, 0 means nothing is known, +1 means it
// is certain to hold.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cfr {

/// Absolute tolerance for algebraic identities on certainty factors.
inline constexpr double kCfTolerance = 1e-9;

class CertaintyFactor {
public:
    CertaintyFactor() noexcept = default;

    /// Throws std::out_of_range unless v is in [-1, 1] (NaN is rejected too).
    explicit CertaintyFactor(double v) : value_(v) {
        if (!(v >= -1.0 && v <= 1.0)) {
            throw std::out_of_range("certainty factor " + std::to_string(v) +
                                    " outside [-1, 1]");
        }
    }

    /// Clamps v into [-1, 1]; NaN becomes 0.
    static CertaintyFactor clamped(double v) noexcept {
        CertaintyFactor cf;
        cf.value_ = std::isnan(v) ? 0.0 : std::clamp(v, -1.0, 1.0);
        return cf;
    }

    double value() const noexcept { return value_; }

    friend bool operator==(CertaintyFactor, CertaintyFactor) = default;
    friend auto operator<=>(CertaintyFactor, CertaintyFactor) = default;

private:
    double value_ = 0.0;
};

inline bool almost_equal(double a, double b, double tol = kCfTolerance) noexcept {
    return std::fabs(a - b) <= tol;
}

inline bool almost_equal(CertaintyFactor a, CertaintyFactor b,
                         double tol = kCfTolerance) noexcept {
    return almost_equal(a.value(), b.value(), tol);
}

/// Two certain but opposed pieces of evidence cannot be reconciled; the
/// combination formulas hit a 0/0 there. Raised instead of returning a
/// sentinel because such a pair indicates a modeling bug upstream.
class ContradictionError : public std::domain_error {
public:
    explicit ContradictionError(const std::string& what)
        : std::domain_error(what) {}
};

class UnknownPropositionError : public std::runtime_error {
public:
    explicit UnknownPropositionError(std::string proposition)
        : std::runtime_error("unknown proposition: " + proposition),
          proposition_(std::move(proposition)) {}

    const std::string& proposition() const noexcept { return proposition_; }

private:
    std::string proposition_;
};

class CycleError : public std::runtime_error {
public:
    explicit CycleError(std::vector<std::string> cycle)
        : std::runtime_error("rule dependency cycle: " + join(cycle)),
          cycle_(std::move(cycle)) {}

    /// Propositions along the cycle, first repeated at the end.
    const std::vector<std::string>& cycle() const noexcept { return cycle_; }

private:
    static std::string join(const std::vector<std::string>& props) {
        std::string out;
        for (const auto& p : props) {
            if (!out.empty()) out += " -> ";
            out += p;
        }
        return out;
    }

    std::vector<std::string> cycle_;
};

/// Statistic is undefined for the given input (e.g. a constant vector fed to
/// a correlation).
class DegenerateInputError : public std::domain_error {
public:
    explicit DegenerateInputError(const std::string& what)
        : std::domain_error(what) {}
};

} // namespace cfr
