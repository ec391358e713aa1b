#pragma once

#include "hcm/dsl.hpp"
#include "hcm/graph.hpp"

#include <set>
#include <string>
#include <vector>

namespace hcm {

enum class QKind { Original, Augmentation };

// A node of the collapsed model: either a unit variable carried over from the
// HCM or a Q variable (original per-subunit conditional, or an augmentation
// Q^{L|R} with do-semantics on R).
struct CNode {
    enum Kind { UnitVar, Q } kind = UnitVar;
    std::string name;
    bool observed = true;
    bool deterministic = false;

    int unit_id = -1;           // UnitVar: id in the source HCM

    QKind qkind = QKind::Original;
    std::vector<int> L;         // Q: subjects (Original: single subject)
    std::vector<int> R;         // Q: conditioning (Original: pa_S(subject))
    std::vector<int> factors;   // subunit ids v whose q^{v|pa_S(v)} the
                                // defining functional multiplies together
    std::vector<int> integrated; // factors integrated out (= factors \ L)
};

struct CollapsedModel {
    HierGraph hcm; // source hierarchical graph (for subunit structure)
    std::vector<CNode> nodes;
    std::set<std::pair<int, int>> edges;

    int find(const std::string& name) const; // -1 when absent
    int require(const std::string& name) const;
    int unit_node(int hcm_id) const;
    int original_q(int subject) const; // -1 when marginalized away

    std::vector<int> parents(int v) const;
    std::vector<int> children(int v) const;

    FlatGraph flat() const;
    std::string to_dot() const;
    // Canonical text form (sorted node lines with flags + edge lines); two
    // models are isomorphic in the golden-test sense iff these strings match.
    std::string canonical() const;
};

// Collapse pass: one original QVar per subunit variable, unit variables
// re-wired to the QVars of their direct subunit ancestors.
CollapsedModel collapse(const HierGraph& g);

// Whether q^{L|R} = p(x^L ; do(x^R)) is computable from q(x^{S_obs}):
// decided by running the flat ID algorithm on the subunit-only graph.
bool q_functional_observable(const HierGraph& g, const std::set<int>& L,
                             const std::set<int>& R);

// Q-variable name for rendering: "Q[a|x,z]" etc.
std::string q_name(const HierGraph& g, const std::vector<int>& L,
                   const std::vector<int>& R);

// Add augmentation Q^{L|R} and re-route consumers whose mechanism factors
// through the new functional. Throws Error("InvalidAugmentation") on
// duplicates or when (L,R) is not expressible over the current model.
CollapsedModel augment(const CollapsedModel& m, const std::set<int>& L,
                       const std::set<int>& R);

// Remove `drop` (each a parent of `aug` with no other child), re-routing their
// parents to `aug` and clearing aug's deterministic flag when drop is
// nonempty. Throws Error("IllegalDrop").
CollapsedModel marginalize_aug(const CollapsedModel& m, int aug,
                               const std::set<int>& drop);

// Inverse of augment for un-marginalized augmentations: remove the
// augmentation node, reconnecting its consumers to its factor nodes. Used by
// the augmentation-validity property test.
CollapsedModel reabsorb_aug(const CollapsedModel& m, int aug);

// The hard intervention in the collapsed model that realizes the query:
// unit node for HardUnit, the original QVar of the treatment otherwise.
// (identify may re-target the soft case onto an augmentation.)
int map_intervention(const CollapsedModel& m, const QuerySpec& q);

} // namespace hcm
