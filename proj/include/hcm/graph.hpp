#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace hcm {

// Base class for every error this library throws. `code()` is a stable
// machine-readable tag; `what()` carries context.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& msg)
        : std::runtime_error(code + ": " + msg), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

enum class Level { Unit, Subunit };

struct SourceLoc {
    int line = 0;
    int column = 0;
};

struct Variable {
    std::string name;
    Level level = Level::Unit;
    bool observed = true;
    SourceLoc loc;
};

// A two-level hierarchical causal graph: unit variables live on the outer
// plate, subunit variables on the inner plate. Edges are directed and may
// cross levels, except that a unit -> subunit edge is rejected when it would
// make a subunit variable depend on a descendant of the inner plate (checked
// by validate(), not add_edge, so partially built graphs stay inspectable).
class HierGraph {
public:
    std::string name = "model";

    int add_var(const std::string& name, Level level, bool observed,
                SourceLoc loc = {});
    void add_edge(int parent, int child);
    void add_edge(const std::string& parent, const std::string& child);

    int size() const { return static_cast<int>(vars_.size()); }
    const Variable& var(int id) const { return vars_.at(id); }
    std::optional<int> find(const std::string& name) const;
    int require(const std::string& name) const;

    const std::set<std::pair<int, int>>& edges() const { return edges_; }
    bool has_edge(int a, int b) const { return edges_.count({a, b}) > 0; }

    std::vector<int> parents(int v) const;
    std::vector<int> children(int v) const;
    std::set<int> ancestors(int v) const;   // excludes v
    std::set<int> descendants(int v) const; // excludes v
    std::set<int> ancestors_of(const std::set<int>& vs) const; // includes vs

    // Subunit / unit parents of v, in id order.
    std::vector<int> subunit_parents(int v) const;
    std::vector<int> unit_parents(int v) const;

    // Topological order; ties broken by declaration order. Throws
    // Error("CycleDetected") if the graph has a directed cycle.
    std::vector<int> topo_order() const;
    bool is_acyclic() const;

    std::string to_dot() const;

private:
    std::vector<Variable> vars_;
    std::map<std::string, int> index_;
    std::set<std::pair<int, int>> edges_;
};

struct ValidationIssue {
    std::string code;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
};

// Structural checks: acyclicity, no unit-level variable with a subunit
// parent *and* subunit child when that would be ill-formed is allowed (that
// is a legal interferer); what is rejected here is only cycles. Kept as a
// report so the DSL can surface all problems at once.
ValidationReport validate_hcm(const HierGraph& g);

// Subunit ancestors of w reachable through directed paths whose intermediate
// nodes are all subunit variables.
std::set<int> direct_subunit_ancestors(const HierGraph& g, int w);

// Unit descendants of subunit v reachable through directed paths whose
// intermediate nodes are all subunit variables.
std::set<int> direct_unit_descendants(const HierGraph& g, int v);

struct MarginalizeCheck {
    bool ok = false;
    // "", "Confounder" (more than one child) or "Interferer" (unit variable
    // with both a subunit parent and a subunit child).
    std::string reason;
};

MarginalizeCheck can_marginalize(const HierGraph& g, int v);

// Remove endogenous v, rewiring its parents to its unique child. Throws
// Error("IllegalMarginalization") when can_marginalize fails.
HierGraph marginalize_endogenous(const HierGraph& g, int v);

// Flat (single-level) DAG with observability and determinism flags. The
// collapsed model lowers to this before identification.
struct FlatVar {
    std::string name;
    bool observed = true;
    bool deterministic = false;
};

class FlatGraph {
public:
    int add_var(const std::string& name, bool observed,
                bool deterministic = false);
    void add_edge(int parent, int child);

    int size() const { return static_cast<int>(vars_.size()); }
    const FlatVar& var(int id) const { return vars_.at(id); }
    std::optional<int> find(const std::string& name) const;
    int require(const std::string& name) const;
    const std::set<std::pair<int, int>>& edges() const { return edges_; }

    std::vector<int> parents(int v) const;
    std::vector<int> children(int v) const;
    std::set<int> ancestors_of(const std::set<int>& vs) const; // includes vs
    std::vector<int> topo_order() const;

    std::string to_dot() const;

private:
    std::vector<FlatVar> vars_;
    std::map<std::string, int> index_;
    std::set<std::pair<int, int>> edges_;
};

// Acyclic directed mixed graph over the observed variables only.
struct Admg {
    std::vector<std::string> names;
    std::vector<bool> deterministic;
    std::set<std::pair<int, int>> directed;   // parent -> child
    std::set<std::pair<int, int>> bidirected; // stored with first < second

    int size() const { return static_cast<int>(names.size()); }
    int require(const std::string& name) const;
    std::vector<int> parents(int v) const;
    std::vector<int> topo_order() const;
    std::set<int> ancestors_of(const std::set<int>& vs) const; // includes vs

    // Connected components of the bidirected part restricted to `over`.
    std::vector<std::set<int>> districts(const std::set<int>& over) const;

    Admg induced(const std::set<int>& keep) const; // keeps names
    std::string to_dot() const;
};

// Latent projection: directed edge a->b when a reaches b through hidden-only
// intermediates; bidirected a<->b when some hidden h reaches both through
// hidden-only directed paths.
Admg latent_projection(const FlatGraph& g);

// True when a path a <-> x1 <-> ... <-> b exists using only bidirected edges,
// for some b in targets.
bool bidirected_path_exists(const Admg& g, int a, const std::set<int>& targets);

} // namespace hcm
