// Questionnaire design, conversions, prediction, and synthetic subjects.

#include "cfr/experiment.hpp"

#include <charconv>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cfr {

namespace {

// Reference descriptor values used only to seed simulated calibrations
// (line midpoints of thirds on the 0..1 calibration scale).
constexpr double kBaseHighly = 0.875;
constexpr double kBaseModerately = 0.5;
constexpr double kBaseSlightly = 0.1875;

constexpr double kCalibrationStep = 1.0 / 32.0; // half-cm on the 0..1 line
constexpr double kRatingStep = 1.0 / 16.0;      // half-cm on the -1..1 line
constexpr double kCalibrationJitter = 1.0 / 16.0;

// Engine-independent uniform/gaussian stream so that identical seeds give
// identical records on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

    double gaussian(double sd) {
        if (sd <= 0.0) {
            uniform(); // keep the stream layout independent of sd
            uniform();
            return 0.0;
        }
        double u1 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform();
        return sd * std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
    }

private:
    std::mt19937_64 engine_;
};

double check_mark(double cm) {
    if (!(cm >= 0.0 && cm <= 16.0)) {
        throw std::out_of_range("mark " + std::to_string(cm) + " outside the 16 cm line");
    }
    return quantize(cm, 0.5);
}

std::string format_number(double v) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
    return std::string(buf, result.ptr);
}

Descriptor descriptor_from_string(const std::string& s) {
    if (s == "highly") return Descriptor::Highly;
    if (s == "moderately") return Descriptor::Moderately;
    if (s == "slightly") return Descriptor::Slightly;
    throw std::invalid_argument("unknown descriptor: " + s);
}

Direction direction_from_string(const std::string& s) {
    if (s == "happen") return Direction::Happen;
    if (s == "not_happen") return Direction::NotHappen;
    throw std::invalid_argument("unknown direction: " + s);
}

Connective connective_from_string(const std::string& s) {
    if (s == "and") return Connective::And;
    if (s == "or") return Connective::Or;
    throw std::invalid_argument("unknown connective: " + s);
}

nlohmann::json item_rule_to_json(const ItemRule& r) {
    return {{"connective", to_string(r.connective)},
            {"antecedents",
             {to_string(r.antecedents[0]), to_string(r.antecedents[1]),
              to_string(r.antecedents[2])}},
            {"conclusion", to_string(r.conclusion_certainty)},
            {"direction", to_string(r.conclusion_direction)}};
}

ItemRule item_rule_from_json(const nlohmann::json& j) {
    ItemRule r;
    r.connective = connective_from_string(j.at("connective").get<std::string>());
    const auto& ants = j.at("antecedents");
    if (!ants.is_array() || ants.size() != 3) {
        throw std::invalid_argument("item rule needs exactly three antecedent descriptors");
    }
    for (std::size_t i = 0; i < 3; ++i) {
        r.antecedents[i] = descriptor_from_string(ants[i].get<std::string>());
    }
    r.conclusion_certainty = descriptor_from_string(j.at("conclusion").get<std::string>());
    if (r.conclusion_certainty == Descriptor::Slightly) {
        throw std::invalid_argument("conclusion certainty must be highly or moderately");
    }
    r.conclusion_direction = direction_from_string(j.at("direction").get<std::string>());
    return r;
}

} // namespace

double CalibrationMap::value(Descriptor d) const {
    switch (d) {
    case Descriptor::Highly: return highly;
    case Descriptor::Moderately: return moderately;
    case Descriptor::Slightly: return slightly;
    }
    throw std::logic_error("unreachable descriptor");
}

void CalibrationMap::validate() const {
    for (const double v : {highly, moderately, slightly}) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::out_of_range("calibration value " + std::to_string(v) +
                                    " outside [0, 1]");
        }
    }
}

DesignSpec DesignSpec::default_design() {
    DesignSpec design;
    int id = 1;
    for (const Connective conn1 : {Connective::And, Connective::Or}) {
        for (const Descriptor cert1 : {Descriptor::Highly, Descriptor::Moderately}) {
            for (const Direction dir1 : {Direction::Happen, Direction::NotHappen}) {
                for (const Direction dir2 : {Direction::Happen, Direction::NotHappen}) {
                    if (dir1 == Direction::Happen && dir2 == Direction::Happen) {
                        continue; // both-confirming cells are dropped
                    }
                    ExperimentItem item;
                    item.id = id++;
                    item.rule1 = ItemRule{conn1,
                                          {Descriptor::Highly, Descriptor::Moderately,
                                           Descriptor::Slightly},
                                          cert1, dir1};
                    item.rule2 = ItemRule{conn1 == Connective::And ? Connective::Or
                                                                   : Connective::And,
                                          {Descriptor::Highly, Descriptor::Moderately,
                                           Descriptor::Slightly},
                                          Descriptor::Moderately, dir2};
                    design.items.push_back(item);
                }
            }
        }
    }
    return design;
}

std::string DesignSpec::to_json_string(int indent) const {
    nlohmann::json doc;
    doc["items"] = nlohmann::json::array();
    for (const auto& item : items) {
        doc["items"].push_back({{"id", item.id},
                                {"rule1", item_rule_to_json(item.rule1)},
                                {"rule2", item_rule_to_json(item.rule2)}});
    }
    return doc.dump(indent);
}

DesignSpec DesignSpec::from_json_string(const std::string& text) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    DesignSpec design;
    for (const auto& j : doc.at("items")) {
        ExperimentItem item;
        item.id = j.at("id").get<int>();
        item.rule1 = item_rule_from_json(j.at("rule1"));
        item.rule2 = item_rule_from_json(j.at("rule2"));
        design.items.push_back(std::move(item));
    }
    return design;
}

double quantize(double value, double step) {
    return std::round(value / step) * step;
}

double convert_calibration_mark(double cm) {
    return check_mark(cm) / 16.0;
}

CertaintyFactor convert_rating_mark(double cm) {
    return CertaintyFactor((check_mark(cm) - 8.0) / 8.0);
}

Rulebase item_rulebase(const ExperimentItem& item, const CalibrationMap& calibration) {
    calibration.validate();

    const auto make_rule = [&](const std::string& id, const ItemRule& r,
                               std::span<const char* const> props) {
        std::vector<AntecedentExpr> leaves;
        for (const char* p : props) leaves.push_back(AntecedentExpr::leaf(p));
        AntecedentExpr antecedent = r.connective == Connective::And
                                        ? AntecedentExpr::conjunction(std::move(leaves))
                                        : AntecedentExpr::disjunction(std::move(leaves));
        double max_cf = calibration.value(r.conclusion_certainty);
        if (r.conclusion_direction == Direction::NotHappen) max_cf = -max_cf;
        return Rule(id, std::move(antecedent), {Conclusion{"X", CertaintyFactor(max_cf)}});
    };

    static constexpr const char* kProps1[] = {"A", "B", "C"};
    static constexpr const char* kProps2[] = {"D", "E", "F"};

    Rulebase rb;
    rb.rules.push_back(make_rule("r1", item.rule1, kProps1));
    rb.rules.push_back(make_rule("r2", item.rule2, kProps2));
    for (std::size_t i = 0; i < 3; ++i) {
        rb.facts.push_back(Fact{kProps1[i],
                                CertaintyFactor(calibration.value(item.rule1.antecedents[i]))});
    }
    for (std::size_t i = 0; i < 3; ++i) {
        rb.facts.push_back(Fact{kProps2[i],
                                CertaintyFactor(calibration.value(item.rule2.antecedents[i]))});
    }
    return rb;
}

CertaintyFactor predict_item(const ExperimentItem& item, const CalibrationMap& calibration,
                             StrategyConfig model) {
    model.firing_threshold = 0.0; // a subject always produces a rating
    const Rulebase rb = item_rulebase(item, calibration);
    WorkingMemory wm;
    for (const auto& fact : rb.facts) {
        wm.assert_fact(fact.proposition, fact.cf, model.combiner);
    }
    const InferenceResult result = infer(std::move(wm), rb.rules, model);
    const auto belief = query(result.memory, "X");
    return belief.value_or(CertaintyFactor{});
}

std::vector<SubjectRecord> simulate_subjects(int n, const DesignSpec& design,
                                             const StrategyConfig& truth_model,
                                             double noise_sd, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("need at least two subjects");
    if (noise_sd < 0.0) throw std::invalid_argument("noise_sd must be non-negative");

    Rng rng(seed);
    std::vector<SubjectRecord> subjects;
    subjects.reserve(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
        SubjectRecord subject;
        subject.subject_id = i;
        subject.form = (i % 2 == 1) ? 1 : 2;

        const auto jittered = [&rng](double base) {
            const double v =
                quantize(base + rng.uniform(-kCalibrationJitter, kCalibrationJitter),
                         kCalibrationStep);
            return std::clamp(v, 0.0, 1.0);
        };
        subject.calibration.highly = jittered(kBaseHighly);
        subject.calibration.moderately = jittered(kBaseModerately);
        subject.calibration.slightly = jittered(kBaseSlightly);

        for (const auto& item : design.items) {
            const double prediction =
                predict_item(item, subject.calibration, truth_model).value();
            const double noisy =
                std::clamp(prediction + rng.gaussian(noise_sd), -1.0, 1.0);
            subject.ratings[item.id] = CertaintyFactor(quantize(noisy, kRatingStep));
        }
        subjects.push_back(std::move(subject));
    }
    return subjects;
}

std::string ratings_to_csv(std::span<const SubjectRecord> subjects) {
    std::string out = "subject_id,form,item_id,rating\n";
    for (const auto& subject : subjects) {
        for (const auto& [item_id, rating] : subject.ratings) {
            out += std::to_string(subject.subject_id) + "," +
                   std::to_string(subject.form) + "," + std::to_string(item_id) + "," +
                   format_number(rating.value()) + "\n";
        }
    }
    return out;
}

std::string calibration_to_csv(std::span<const SubjectRecord> subjects) {
    std::string out = "subject_id,descriptor,value\n";
    for (const auto& subject : subjects) {
        const auto row = [&](Descriptor d) {
            out += std::to_string(subject.subject_id) + "," + to_string(d) + "," +
                   format_number(subject.calibration.value(d)) + "\n";
        };
        row(Descriptor::Highly);
        row(Descriptor::Moderately);
        row(Descriptor::Slightly);
    }
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    return fields;
}

double parse_double(const std::string& s, const char* what) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw std::invalid_argument(std::string("bad ") + what + ": '" + s + "'");
    }
    return v;
}

int parse_int(const std::string& s, const char* what) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw std::invalid_argument(std::string("bad ") + what + ": '" + s + "'");
    }
    return v;
}

} // namespace

std::vector<SubjectRecord> subjects_from_csv(const std::string& ratings_csv,
                                             const std::string& calibration_csv) {
    std::map<int, SubjectRecord> by_id;

    std::istringstream ratings(ratings_csv);
    std::string line;
    bool header = true;
    while (std::getline(ratings, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != 4) {
            throw std::invalid_argument("ratings row needs 4 fields: '" + line + "'");
        }
        const int id = parse_int(fields[0], "subject_id");
        SubjectRecord& subject = by_id[id];
        subject.subject_id = id;
        subject.form = parse_int(fields[1], "form");
        if (subject.form != 1 && subject.form != 2) {
            throw std::invalid_argument("form must be 1 or 2");
        }
        const double rating = parse_double(fields[3], "rating");
        // Ratings come off the half-centimetre marks of the +/-8 scale.
        if (std::fabs(rating / kRatingStep - std::round(rating / kRatingStep)) > 1e-9) {
            throw std::invalid_argument("rating " + fields[3] +
                                        " is not a multiple of 1/16");
        }
        subject.ratings[parse_int(fields[2], "item_id")] = CertaintyFactor(rating);
    }

    std::istringstream calibs(calibration_csv);
    header = true;
    while (std::getline(calibs, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != 3) {
            throw std::invalid_argument("calibration row needs 3 fields: '" + line + "'");
        }
        const int id = parse_int(fields[0], "subject_id");
        const auto it = by_id.find(id);
        if (it == by_id.end()) {
            throw std::invalid_argument("calibration for unknown subject " +
                                        std::to_string(id));
        }
        const double value = parse_double(fields[2], "value");
        switch (descriptor_from_string(fields[1])) {
        case Descriptor::Highly: it->second.calibration.highly = value; break;
        case Descriptor::Moderately: it->second.calibration.moderately = value; break;
        case Descriptor::Slightly: it->second.calibration.slightly = value; break;
        }
    }

    std::vector<SubjectRecord> subjects;
    for (auto& [_, subject] : by_id) {
        subject.calibration.validate();
        subjects.push_back(std::move(subject));
    }
    return subjects;
}

const char* to_string(Descriptor d) noexcept {
    switch (d) {
    case Descriptor::Highly: return "highly";
    case Descriptor::Moderately: return "moderately";
    case Descriptor::Slightly: return "slightly";
    }
    return "?";
}

const char* to_string(Direction d) noexcept {
    switch (d) {
    case Direction::Happen: return "happen";
    case Direction::NotHappen: return "not_happen";
    }
    return "?";
}

const char* to_string(Connective c) noexcept {
    switch (c) {
    case Connective::And: return "and";
    case Connective::Or: return "or";
    }
    return "?";
}

} // namespace cfr
