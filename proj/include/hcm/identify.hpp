#pragma once

#include "hcm/dsl.hpp"
#include "hcm/estimand.hpp"
#include "hcm/graph.hpp"
#include "hcm/transform.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hcm {

struct Witness {
    std::string description;
    std::vector<std::string> component; // blocking district / hedge root
};

struct IdOutcome {
    bool ok = false;
    ExprPtr expr;
    Witness witness;
};

// Complete c-component identification recursion for p(Y ; do(X)) over an
// ADMG. Deterministic flags are ignored here (exploited only downstream by
// simplify_estimand). Failure is a value carrying the blocking structure.
IdOutcome id_algorithm(const Admg& g, const std::set<int>& X,
                       const std::set<int>& Y);

struct PipelineStage {
    std::string label;
    CollapsedModel model;
};

struct IdResult {
    bool identified = false;
    Estimand estimand;                    // when identified
    std::vector<std::string> assumptions; // when identified
    Witness witness;                      // when not
    std::vector<PipelineStage> stages;    // winning candidate's passes
    std::string treatment_node, outcome_node;
    std::string effect_note; // how the model-level estimand maps to the query
};

// Full pipeline: collapse, map the intervention, search augmentation /
// marginalization candidates, run the flat ID algorithm, simplify. First
// success wins; on total failure the witness comes from the plain collapsed
// model. Throws Error("InvalidQuery") on malformed queries.
IdResult identify_hcm(const HierGraph& g, const QuerySpec& q);

enum class SuffVerdict { Identifiable, NotIdentifiableAllObserved };

// Fast-path structural criteria. Identifiable when, after deleting
// non-ancestors of the outcome, the subunit treatment has no bidirected path
// to a direct unit descendant, or a subunit instrument exists. The negative
// verdict fires for unit-level treatments whose erased-plate model fails the
// bidirected criterion (effect on all observed variables). nullopt when the
// preconditions fail or neither condition applies.
std::optional<SuffVerdict> sufficient_id_check(const HierGraph& g,
                                               const QuerySpec& q);

} // namespace hcm
