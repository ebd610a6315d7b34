// Working memory and forward chaining.

#include "cfr/engine.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cfr {

Rule::Rule(std::string id, AntecedentExpr antecedent, std::vector<Conclusion> conclusions)
    : id_(std::move(id)),
      antecedent_(std::move(antecedent)),
      conclusions_(std::move(conclusions)) {
    if (id_.empty()) {
        throw std::invalid_argument("rule id must be named");
    }
    if (conclusions_.empty()) {
        throw std::invalid_argument("rule " + id_ + " has no conclusions");
    }
    std::set<std::string> seen;
    for (const auto& c : conclusions_) {
        if (!seen.insert(c.proposition).second) {
            throw std::invalid_argument("rule " + id_ + " concludes " + c.proposition +
                                        " twice");
        }
    }
}

bool Belief::has_contribution_from(const std::string& rule_id) const {
    return std::any_of(contributions.begin(), contributions.end(),
                       [&](const Contribution& c) { return c.rule_id == rule_id; });
}

CertaintyFactor Belief::recompute(Combiner combiner) const {
    std::vector<CertaintyFactor> parts;
    parts.reserve(contributions.size() + 1);
    if (base_fact) parts.push_back(*base_fact);
    for (const auto& c : contributions) parts.push_back(c.cf);
    return fold_combine(combiner, parts);
}

const Belief* WorkingMemory::find(const std::string& prop) const {
    const auto it = beliefs_.find(prop);
    return it == beliefs_.end() ? nullptr : &it->second;
}

void WorkingMemory::assert_fact(const std::string& prop, CertaintyFactor cf,
                                Combiner combiner) {
    Belief& belief = beliefs_[prop];
    belief.base_fact = cf;
    belief.cf = belief.recompute(combiner);
}

CertaintyFactor WorkingMemory::add_contribution(const std::string& prop,
                                                Contribution contribution,
                                                Combiner combiner) {
    Belief& belief = beliefs_[prop];
    if (!belief.has_contribution_from(contribution.rule_id)) {
        belief.contributions.push_back(std::move(contribution));
        belief.cf = belief.recompute(combiner);
    }
    return belief.cf;
}

StrategyConfig mmh_model(double firing_threshold) {
    return {Summarizer::Maximin, Scaler::Multiply, Combiner::Heckerman, firing_threshold};
}

StrategyConfig mean_model(double firing_threshold) {
    return {Summarizer::Mean, Scaler::MeanScale, Combiner::Mean, firing_threshold};
}

FireOutcome fire_rule(WorkingMemory& wm, const Rule& rule, const StrategyConfig& cfg) {
    if (!(cfg.firing_threshold >= 0.0 && cfg.firing_threshold < 1.0)) {
        throw std::invalid_argument("firing threshold must lie in [0, 1)");
    }
    const BeliefLookup lookup = [&wm](const std::string& prop) {
        return query(wm, prop);
    };
    FireOutcome outcome;
    outcome.summarized_antecedent = summarize(cfg.summarizer, rule.antecedent(), lookup);
    if (outcome.summarized_antecedent <= cfg.firing_threshold) {
        return outcome;
    }
    outcome.fired = true;
    for (const auto& conclusion : rule.conclusions()) {
        const CertaintyFactor scaled =
            scale(cfg.scaler, conclusion.max_cf, outcome.summarized_antecedent);
        const CertaintyFactor after = wm.add_contribution(
            conclusion.proposition, Contribution{rule.id(), scaled}, cfg.combiner);
        outcome.contributions.push_back(
            TraceContribution{conclusion.proposition, scaled.value(), after.value()});
    }
    return outcome;
}

namespace {

// Cycle detection on the proposition graph: antecedent leaf -> conclusion.
// Iterative DFS so that very long rule chains cannot exhaust the stack.
void check_acyclic(std::span<const Rule> rules) {
    std::map<std::string, std::set<std::string>> edges;
    for (const auto& rule : rules) {
        for (const auto& leaf : rule.antecedent().leaf_propositions()) {
            for (const auto& conclusion : rule.conclusions()) {
                edges[leaf].insert(conclusion.proposition);
            }
        }
    }

    enum class Color { White, Grey, Black };
    std::map<std::string, Color> color;
    const auto color_of = [&color](const std::string& node) {
        const auto it = color.find(node);
        return it == color.end() ? Color::White : it->second;
    };

    struct Frame {
        const std::string* node;
        std::set<std::string>::const_iterator next;
    };

    for (const auto& [root, _] : edges) {
        if (color_of(root) != Color::White) continue;
        std::vector<Frame> stack;
        std::vector<std::string> path;
        color[root] = Color::Grey;
        path.push_back(root);
        stack.push_back(Frame{&root, edges[root].begin()});
        while (!stack.empty()) {
            Frame& frame = stack.back();
            const auto& outgoing = edges[*frame.node];
            if (frame.next == outgoing.end()) {
                color[*frame.node] = Color::Black;
                path.pop_back();
                stack.pop_back();
                continue;
            }
            const std::string& next = *frame.next++;
            const Color c = color_of(next);
            if (c == Color::Grey) {
                // Back edge: report the cycle with its start repeated.
                const auto start = std::find(path.begin(), path.end(), next);
                std::vector<std::string> cycle(start, path.end());
                cycle.push_back(next);
                throw CycleError(std::move(cycle));
            }
            if (c == Color::White) {
                color[next] = Color::Grey;
                path.push_back(next);
                stack.push_back(Frame{&next, edges[next].begin()});
            }
        }
    }
}

// Every antecedent leaf must be asserted or reachable through some chain of
// rules; anything else is a typo-class error in the rulebase. Whether a
// derivable leaf actually ends up believed at run time is a separate matter
// (a below-threshold source rule simply leaves it absent).
void check_derivable(const WorkingMemory& wm, std::span<const Rule> rules) {
    std::set<std::string> derivable;
    for (const auto& [prop, _] : wm.beliefs()) derivable.insert(prop);
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& rule : rules) {
            const auto leaves = rule.antecedent().leaf_propositions();
            const bool ready = std::all_of(leaves.begin(), leaves.end(),
                                           [&](const std::string& leaf) {
                                               return derivable.count(leaf) > 0;
                                           });
            if (!ready) continue;
            for (const auto& conclusion : rule.conclusions()) {
                if (derivable.insert(conclusion.proposition).second) grew = true;
            }
        }
    }
    for (const auto& rule : rules) {
        for (const auto& leaf : rule.antecedent().leaf_propositions()) {
            if (!derivable.count(leaf)) throw UnknownPropositionError(leaf);
        }
    }
}

} // namespace

InferenceResult infer(WorkingMemory initial, std::span<const Rule> rules,
                      const StrategyConfig& cfg) {
    check_acyclic(rules);
    check_derivable(initial, rules);

    InferenceResult result{std::move(initial), {}};
    std::vector<bool> fired(rules.size(), false);

    bool progressed = true;
    while (progressed) {
        progressed = false;
        for (std::size_t i = 0; i < rules.size(); ++i) {
            if (fired[i]) continue;
            const auto leaves = rules[i].antecedent().leaf_propositions();
            const bool ready = std::all_of(leaves.begin(), leaves.end(),
                                           [&](const std::string& leaf) {
                                               return result.memory.find(leaf) != nullptr;
                                           });
            if (!ready) continue;
            FireOutcome outcome = fire_rule(result.memory, rules[i], cfg);
            if (!outcome.fired) continue; // may pass the threshold on a later pass
            fired[i] = true;
            progressed = true;
            result.trace.firings.push_back(TraceFiring{
                rules[i].id(), outcome.summarized_antecedent,
                std::move(outcome.contributions)});
        }
    }
    return result;
}

std::optional<CertaintyFactor> query(const WorkingMemory& wm, const std::string& prop) {
    const Belief* belief = wm.find(prop);
    if (!belief) return std::nullopt;
    return belief->cf;
}

std::string Trace::to_text() const {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(4);
    for (const auto& firing : firings) {
        out << "fire " << firing.rule_id
            << " antecedent=" << firing.summarized_antecedent << '\n';
        for (const auto& c : firing.contributions) {
            out << "  " << c.proposition << " += " << c.scaled_cf
                << " -> " << c.combined_cf_after << '\n';
        }
    }
    return out.str();
}

std::string Trace::to_json_string(int indent) const {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& firing : firings) {
        nlohmann::json contributions = nlohmann::json::array();
        for (const auto& c : firing.contributions) {
            contributions.push_back({{"proposition", c.proposition},
                                     {"scaled_cf", c.scaled_cf},
                                     {"combined_cf_after", c.combined_cf_after}});
        }
        doc.push_back({{"rule_id", firing.rule_id},
                       {"summarized_antecedent", firing.summarized_antecedent},
                       {"contributions", std::move(contributions)}});
    }
    return doc.dump(indent);
}

} // namespace cfr
