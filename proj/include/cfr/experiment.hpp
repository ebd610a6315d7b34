// experiment.hpp — questionnaire design, slash-mark conversions, synthetic
// subjects, and per-model predictions.
//
// Items pair two rules that act as independent sources of evidence for one
// event X. Antecedent and conclusion certainties are verbal descriptors
// (highly / moderately / slightly) resolved per subject through a
// calibration map.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cfr/dsl.hpp"
#include "cfr/engine.hpp"

namespace cfr {

enum class Descriptor { Highly, Moderately, Slightly };
enum class Direction { Happen, NotHappen };
enum class Connective { And, Or };

/// Per-subject numeric reading of the certainty descriptors, each in [0, 1].
/// Values measured from a 16 cm calibration line are quantized to multiples
/// of 1/32 (half-centimetre marks).
struct CalibrationMap {
    double highly = 0.0;
    double moderately = 0.0;
    double slightly = 0.0;

    double value(Descriptor d) const;
    /// Throws std::out_of_range when any descriptor leaves [0, 1].
    void validate() const;

    friend bool operator==(const CalibrationMap&, const CalibrationMap&) = default;
};

/// One of an item's two rules, in descriptor form.
struct ItemRule {
    Connective connective = Connective::And;
    std::array<Descriptor, 3> antecedents{Descriptor::Highly, Descriptor::Moderately,
                                          Descriptor::Slightly};
    Descriptor conclusion_certainty = Descriptor::Highly; // Highly or Moderately
    Direction conclusion_direction = Direction::Happen;

    friend bool operator==(const ItemRule&, const ItemRule&) = default;
};

struct ExperimentItem {
    int id = 0;
    ItemRule rule1;
    ItemRule rule2;

    friend bool operator==(const ExperimentItem&, const ExperimentItem&) = default;
};

/// The item set under test. The default design crosses rule1's connective
/// and conclusion certainty with both rules' conclusion directions, gives
/// rule2 the opposite connective and a moderate conclusion, and drops the
/// four cells where both conclusions point at "happen", leaving 12 items.
struct DesignSpec {
    std::vector<ExperimentItem> items;

    static DesignSpec default_design();

    /// JSON round-trip per schemas/design.schema.json.
    std::string to_json_string(int indent = -1) const;
    static DesignSpec from_json_string(const std::string& text);

    friend bool operator==(const DesignSpec&, const DesignSpec&) = default;
};

struct SubjectRecord {
    int subject_id = 0;
    int form = 1; // 1 or 2, the item-order permutation the subject saw
    CalibrationMap calibration;
    std::map<int, CertaintyFactor> ratings; // item id -> rating

    friend bool operator==(const SubjectRecord&, const SubjectRecord&) = default;
};

/// Rounds to the nearest multiple of step, ties away from zero.
double quantize(double value, double step);

/// Calibration line: measure to the nearest half centimetre, divide by 16.
/// Throws std::out_of_range outside [0, 16] cm.
double convert_calibration_mark(double cm);

/// Rating line: measure to the nearest half centimetre, subtract 8, divide
/// by 8. Throws std::out_of_range outside [0, 16] cm.
CertaintyFactor convert_rating_mark(double cm);

/// Instantiates an item as a runnable rulebase: rules r1/r2 over events
/// A..C and D..F concluding X, plus facts for the six antecedent events.
/// A not-happen conclusion negates the descriptor's calibrated value.
Rulebase item_rulebase(const ExperimentItem& item, const CalibrationMap& calibration);

/// Runs the item's two-rule inference under the given model and returns the
/// belief in X. Prediction always uses firing threshold 0, so a prediction
/// exists whenever any antecedent certainty is positive; with no firing the
/// prediction is 0.
CertaintyFactor predict_item(const ExperimentItem& item, const CalibrationMap& calibration,
                             StrategyConfig model);

/// Deterministic synthetic subjects in place of human volunteers: jittered
/// calibrations quantized to 1/32, model predictions plus Gaussian noise
/// quantized to 1/16, forms alternating 1/2.
std::vector<SubjectRecord> simulate_subjects(int n, const DesignSpec& design,
                                             const StrategyConfig& truth_model,
                                             double noise_sd, std::uint64_t seed);

/// CSV round-trip. Ratings: subject_id,form,item_id,rating. Calibration:
/// subject_id,descriptor,value.
std::string ratings_to_csv(std::span<const SubjectRecord> subjects);
std::string calibration_to_csv(std::span<const SubjectRecord> subjects);
std::vector<SubjectRecord> subjects_from_csv(const std::string& ratings_csv,
                                             const std::string& calibration_csv);

const char* to_string(Descriptor d) noexcept;
const char* to_string(Direction d) noexcept;
const char* to_string(Connective c) noexcept;

} // namespace cfr
