// engine.hpp — working memory, rule firing with certainty propagation, and
// fixpoint forward chaining with provenance traces.
//
// A WorkingMemory value is confined to one thread at a time; independent
// inference sessions over distinct values run in parallel without
// coordination.

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cfr/antecedent.hpp"
#include "cfr/certainty.hpp"
#include "cfr/combine.hpp"

namespace cfr {

struct Conclusion {
    std::string proposition;
    CertaintyFactor max_cf;

    friend bool operator==(const Conclusion&, const Conclusion&) = default;
};

class Rule {
public:
    /// Throws std::invalid_argument on an empty conclusion list or a
    /// duplicated conclusion proposition.
    Rule(std::string id, AntecedentExpr antecedent, std::vector<Conclusion> conclusions);

    const std::string& id() const noexcept { return id_; }
    const AntecedentExpr& antecedent() const noexcept { return antecedent_; }
    std::span<const Conclusion> conclusions() const noexcept { return conclusions_; }

    friend bool operator==(const Rule&, const Rule&) = default;

private:
    std::string id_;
    AntecedentExpr antecedent_;
    std::vector<Conclusion> conclusions_;
};

/// One rule's scaled contribution to a proposition.
struct Contribution {
    std::string rule_id;
    CertaintyFactor cf;
};

/// Current belief in one proposition together with its provenance: the
/// optional asserted base fact and the per-rule contributions folded so far.
/// The certainty is recomputable from those parts at any time.
struct Belief {
    CertaintyFactor cf;
    std::optional<CertaintyFactor> base_fact;
    std::vector<Contribution> contributions;

    bool has_contribution_from(const std::string& rule_id) const;
    /// fold_combine over base fact (first, when present) then contributions.
    CertaintyFactor recompute(Combiner combiner) const;
};

class WorkingMemory {
public:
    const std::map<std::string, Belief>& beliefs() const noexcept { return beliefs_; }

    const Belief* find(const std::string& prop) const;

    /// Records (or replaces) the base fact for prop and refreshes the belief
    /// from provenance under the given combiner.
    void assert_fact(const std::string& prop, CertaintyFactor cf, Combiner combiner);

    /// Appends a rule contribution and refreshes the belief. No-op when the
    /// rule already contributed to prop. Returns the belief after the update.
    CertaintyFactor add_contribution(const std::string& prop, Contribution contribution,
                                     Combiner combiner);

private:
    std::map<std::string, Belief> beliefs_;
};

/// A propagation model: one summarizer, one scaler, one combiner, plus the
/// firing threshold. A rule fires only when its summarized antecedent
/// certainty strictly exceeds the threshold.
struct StrategyConfig {
    Summarizer summarizer = Summarizer::Maximin;
    Scaler scaler = Scaler::Multiply;
    Combiner combiner = Combiner::Heckerman;
    double firing_threshold = 0.2;
};

/// The maximin / multiply / Heckerman triple.
StrategyConfig mmh_model(double firing_threshold = 0.2);
/// The mean / mean-scale / mean triple.
StrategyConfig mean_model(double firing_threshold = 0.2);

struct TraceContribution {
    std::string proposition;
    double scaled_cf;
    double combined_cf_after;
};

struct TraceFiring {
    std::string rule_id;
    double summarized_antecedent;
    std::vector<TraceContribution> contributions;
};

struct Trace {
    std::vector<TraceFiring> firings;

    /// Line-oriented human-readable rendering.
    std::string to_text() const;
    /// JSON per schemas/trace.schema.json (serialized nlohmann document).
    std::string to_json_string(int indent = -1) const;
};

struct FireOutcome {
    bool fired = false;
    double summarized_antecedent = 0.0;
    std::vector<TraceContribution> contributions;
};

/// Evaluates the rule against wm and, when the summarized antecedent
/// certainty exceeds the threshold, scales and records every conclusion.
/// Throws UnknownPropositionError when an antecedent leaf has no belief.
FireOutcome fire_rule(WorkingMemory& wm, const Rule& rule, const StrategyConfig& cfg);

struct InferenceResult {
    WorkingMemory memory;
    Trace trace;
};

/// Forward chains to fixpoint: passes over the rulebase in declaration
/// order, firing every rule whose antecedent leaves are all believed and
/// which has not yet fired. Each rule contributes at most once, so the
/// fixpoint is reached after at most |rules| passes.
///
/// Throws CycleError when the conclusion -> antecedent dependency graph has
/// a cycle, and UnknownPropositionError when some rule's antecedent leaf is
/// neither asserted nor derivable from any chain of rules.
InferenceResult infer(WorkingMemory initial, std::span<const Rule> rules,
                      const StrategyConfig& cfg);

/// Belief lookup; absence is distinct from a zero certainty.
std::optional<CertaintyFactor> query(const WorkingMemory& wm, const std::string& prop);

} // namespace cfr
