#pragma once

#include "hcm/graph.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hcm {

enum class InterventionKind {
    HardUnit,            // intervene V = hard
    SoftSubunit,         // intervene V ~ soft
    ConditionalSoftSubunit // intervene V ~ soft | W,...
};

enum class OutcomeForm { UnitValue, SubunitMarginal };

struct QuerySpec {
    int treatment = -1;
    InterventionKind intervention = InterventionKind::SoftSubunit;
    std::vector<int> conditioning; // subunit parents of treatment, sorted
    int outcome = -1;
    OutcomeForm outcome_form = OutcomeForm::UnitValue;
    // Symbolic labels; numeric bindings live in simulate/estimate configs.
    std::string label = "q*";
};

struct ParseResult {
    HierGraph graph;
    std::optional<QuerySpec> query;
};

// Line-oriented grammar:
//   hcm <Name> {
//     unit observed <Name>      | unit hidden <Name>
//     subunit observed <Name>   | subunit hidden <Name>
//     <A> -> <B>
//   }
//   query {                       (optional)
//     intervene <V> ~ soft [| <W>,...]
//     intervene <V> = hard
//     outcome <Y>
//   }
// '#' starts a comment anywhere on a line.
//
// Throws Error("SyntaxError") with line:col context, or Error("SemanticError")
// for unknown variables / level violations.
ParseResult parse_hcm(const std::string& text);

std::string serialize_hcm(const HierGraph& g,
                          const std::optional<QuerySpec>& query);

} // namespace hcm
