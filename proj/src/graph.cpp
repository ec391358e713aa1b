#include "hcm/graph.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

namespace hcm {

int HierGraph::add_var(const std::string& name, Level level, bool observed,
                       SourceLoc loc) {
    if (index_.count(name))
        throw Error("DuplicateName", "variable '" + name + "' already declared");
    if (name.empty())
        throw Error("UnknownVariable", "empty variable name");
    int id = static_cast<int>(vars_.size());
    vars_.push_back(Variable{name, level, observed, loc});
    index_[name] = id;
    return id;
}

void HierGraph::add_edge(int parent, int child) {
    if (parent < 0 || parent >= size() || child < 0 || child >= size())
        throw Error("UnknownVariable", "edge endpoint out of range");
    if (parent == child)
        throw Error("CycleDetected",
                    "self edge on '" + vars_[parent].name + "'");
    edges_.insert({parent, child});
}

void HierGraph::add_edge(const std::string& parent, const std::string& child) {
    add_edge(require(parent), require(child));
}

std::optional<int> HierGraph::find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

int HierGraph::require(const std::string& name) const {
    auto id = find(name);
    if (!id) throw Error("UnknownVariable", "no variable named '" + name + "'");
    return *id;
}

std::vector<int> HierGraph::parents(int v) const {
    std::vector<int> out;
    for (const auto& [a, b] : edges_)
        if (b == v) out.push_back(a);
    return out;
}

std::vector<int> HierGraph::children(int v) const {
    std::vector<int> out;
    for (const auto& [a, b] : edges_)
        if (a == v) out.push_back(b);
    return out;
}

std::set<int> HierGraph::ancestors(int v) const {
    std::set<int> seen;
    std::deque<int> q{v};
    while (!q.empty()) {
        int cur = q.front();
        q.pop_front();
        for (int p : parents(cur))
            if (seen.insert(p).second) q.push_back(p);
    }
    return seen;
}

std::set<int> HierGraph::descendants(int v) const {
    std::set<int> seen;
    std::deque<int> q{v};
    while (!q.empty()) {
        int cur = q.front();
        q.pop_front();
        for (int c : children(cur))
            if (seen.insert(c).second) q.push_back(c);
    }
    return seen;
}

std::set<int> HierGraph::ancestors_of(const std::set<int>& vs) const {
    std::set<int> out = vs;
    for (int v : vs) {
        auto a = ancestors(v);
        out.insert(a.begin(), a.end());
    }
    return out;
}

std::vector<int> HierGraph::subunit_parents(int v) const {
    std::vector<int> out;
    for (int p : parents(v))
        if (vars_[p].level == Level::Subunit) out.push_back(p);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> HierGraph::unit_parents(int v) const {
    std::vector<int> out;
    for (int p : parents(v))
        if (vars_[p].level == Level::Unit) out.push_back(p);
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

template <class Parents>
std::optional<std::vector<int>> kahn(int n, Parents parents) {
    std::vector<int> indeg(n, 0);
    std::vector<std::vector<int>> kids(n);
    for (int v = 0; v < n; ++v)
        for (int p : parents(v)) {
            indeg[v]++;
            kids[p].push_back(v);
        }
    std::vector<int> ready, order;
    for (int v = 0; v < n; ++v)
        if (indeg[v] == 0) ready.push_back(v);
    while (!ready.empty()) {
        std::sort(ready.begin(), ready.end(), std::greater<int>());
        int v = ready.back();
        ready.pop_back();
        order.push_back(v);
        for (int c : kids[v])
            if (--indeg[c] == 0) ready.push_back(c);
    }
    if (static_cast<int>(order.size()) != n) return std::nullopt;
    return order;
}

} // namespace

std::vector<int> HierGraph::topo_order() const {
    auto o = kahn(size(), [&](int v) { return parents(v); });
    if (!o) throw Error("CycleDetected", "graph '" + name + "' has a cycle");
    return *o;
}

bool HierGraph::is_acyclic() const {
    return kahn(size(), [&](int v) { return parents(v); }).has_value();
}

std::string HierGraph::to_dot() const {
    std::ostringstream os;
    os << "digraph \"" << name << "\" {\n";
    os << "  rankdir=LR;\n";
    os << "  subgraph cluster_inner { label=\"subunit\"; style=dashed;\n";
    for (int v = 0; v < size(); ++v)
        if (vars_[v].level == Level::Subunit)
            os << "    \"" << vars_[v].name << "\" [shape="
               << (vars_[v].observed ? "ellipse" : "ellipse, style=dashed")
               << "];\n";
    os << "  }\n";
    for (int v = 0; v < size(); ++v)
        if (vars_[v].level == Level::Unit)
            os << "  \"" << vars_[v].name << "\" [shape="
               << (vars_[v].observed ? "box" : "box, style=dashed") << "];\n";
    for (const auto& [a, b] : edges_)
        os << "  \"" << vars_[a].name << "\" -> \"" << vars_[b].name << "\";\n";
    os << "}\n";
    return os.str();
}

ValidationReport validate_hcm(const HierGraph& g) {
    ValidationReport rep;
    if (!g.is_acyclic())
        rep.issues.push_back({"CycleDetected", "graph has a directed cycle"});
    if (g.size() == 0)
        rep.issues.push_back({"EmptyGraph", "graph declares no variables"});
    return rep;
}

std::set<int> direct_subunit_ancestors(const HierGraph& g, int w) {
    std::set<int> out, seen;
    std::deque<int> q{w};
    seen.insert(w);
    while (!q.empty()) {
        int cur = q.front();
        q.pop_front();
        for (int p : g.parents(cur)) {
            if (g.var(p).level != Level::Subunit) continue;
            out.insert(p);
            if (seen.insert(p).second) q.push_back(p);
        }
    }
    return out;
}

std::set<int> direct_unit_descendants(const HierGraph& g, int v) {
    std::set<int> out, seen;
    std::deque<int> q{v};
    seen.insert(v);
    while (!q.empty()) {
        int cur = q.front();
        q.pop_front();
        for (int c : g.children(cur)) {
            if (g.var(c).level == Level::Unit) {
                out.insert(c);
            } else if (seen.insert(c).second) {
                q.push_back(c);
            }
        }
    }
    return out;
}

MarginalizeCheck can_marginalize(const HierGraph& g, int v) {
    auto kids = g.children(v);
    if (kids.size() > 1) return {false, "Confounder"};
    if (g.var(v).level == Level::Unit) {
        bool sub_parent = !g.subunit_parents(v).empty();
        bool sub_child = false;
        for (int c : kids)
            if (g.var(c).level == Level::Subunit) sub_child = true;
        if (sub_parent && sub_child) return {false, "Interferer"};
    }
    return {true, ""};
}

HierGraph marginalize_endogenous(const HierGraph& g, int v) {
    auto check = can_marginalize(g, v);
    if (!check.ok)
        throw Error("IllegalMarginalization",
                    "cannot marginalize '" + g.var(v).name + "': " +
                        check.reason);
    HierGraph out;
    out.name = g.name;
    std::vector<int> remap(g.size(), -1);
    for (int i = 0; i < g.size(); ++i) {
        if (i == v) continue;
        const auto& vr = g.var(i);
        remap[i] = out.add_var(vr.name, vr.level, vr.observed, vr.loc);
    }
    auto kids = g.children(v);
    int child = kids.empty() ? -1 : kids.front();
    for (const auto& [a, b] : g.edges()) {
        if (a == v) continue;
        if (b == v) {
            if (child >= 0 && a != child)
                out.add_edge(remap[a], remap[child]);
            continue;
        }
        out.add_edge(remap[a], remap[b]);
    }
    return out;
}

int FlatGraph::add_var(const std::string& name, bool observed,
                       bool deterministic) {
    if (index_.count(name))
        throw Error("DuplicateName", "variable '" + name + "' already declared");
    int id = static_cast<int>(vars_.size());
    vars_.push_back(FlatVar{name, observed, deterministic});
    index_[name] = id;
    return id;
}

void FlatGraph::add_edge(int parent, int child) {
    if (parent < 0 || parent >= size() || child < 0 || child >= size())
        throw Error("UnknownVariable", "edge endpoint out of range");
    if (parent == child)
        throw Error("CycleDetected", "self edge on '" + vars_[parent].name + "'");
    edges_.insert({parent, child});
}

std::optional<int> FlatGraph::find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

int FlatGraph::require(const std::string& name) const {
    auto id = find(name);
    if (!id) throw Error("UnknownVariable", "no variable named '" + name + "'");
    return *id;
}

std::vector<int> FlatGraph::parents(int v) const {
    std::vector<int> out;
    for (const auto& [a, b] : edges_)
        if (b == v) out.push_back(a);
    return out;
}

std::vector<int> FlatGraph::children(int v) const {
    std::vector<int> out;
    for (const auto& [a, b] : edges_)
        if (a == v) out.push_back(b);
    return out;
}

std::set<int> FlatGraph::ancestors_of(const std::set<int>& vs) const {
    std::set<int> out = vs;
    std::deque<int> q(vs.begin(), vs.end());
    while (!q.empty()) {
        int cur = q.front();
        q.pop_front();
        for (int p : parents(cur))
            if (out.insert(p).second) q.push_back(p);
    }
    return out;
}

std::vector<int> FlatGraph::topo_order() const {
    auto o = kahn(size(), [&](int v) { return parents(v); });
    if (!o) throw Error("CycleDetected", "flat graph has a cycle");
    return *o;
}

std::string FlatGraph::to_dot() const {
    std::ostringstream os;
    os << "digraph flat {\n  rankdir=LR;\n";
    for (int v = 0; v < size(); ++v) {
        os << "  \"" << vars_[v].name << "\" [";
        if (!vars_[v].observed) os << "style=dashed, ";
        os << "shape=" << (vars_[v].deterministic ? "diamond" : "ellipse")
           << "];\n";
    }
    for (const auto& [a, b] : edges_)
        os << "  \"" << vars_[a].name << "\" -> \"" << vars_[b].name << "\";\n";
    os << "}\n";
    return os.str();
}

int Admg::require(const std::string& name) const {
    for (int i = 0; i < size(); ++i)
        if (names[i] == name) return i;
    throw Error("UnknownVariable", "no variable named '" + name + "'");
}

std::vector<int> Admg::parents(int v) const {
    std::vector<int> out;
    for (const auto& [a, b] : directed)
        if (b == v) out.push_back(a);
    return out;
}

std::vector<int> Admg::topo_order() const {
    auto o = kahn(size(), [&](int v) { return parents(v); });
    if (!o) throw Error("CycleDetected", "ADMG has a directed cycle");
    return *o;
}

std::set<int> Admg::ancestors_of(const std::set<int>& vs) const {
    std::set<int> out = vs;
    std::deque<int> q(vs.begin(), vs.end());
    while (!q.empty()) {
        int cur = q.front();
        q.pop_front();
        for (int p : parents(cur))
            if (out.insert(p).second) q.push_back(p);
    }
    return out;
}

std::vector<std::set<int>> Admg::districts(const std::set<int>& over) const {
    std::vector<std::set<int>> out;
    std::set<int> left = over;
    while (!left.empty()) {
        int start = *left.begin();
        std::set<int> comp{start};
        std::deque<int> q{start};
        while (!q.empty()) {
            int cur = q.front();
            q.pop_front();
            for (const auto& [a, b] : bidirected) {
                int other = -1;
                if (a == cur) other = b;
                else if (b == cur) other = a;
                if (other >= 0 && over.count(other) && comp.insert(other).second)
                    q.push_back(other);
            }
        }
        for (int v : comp) left.erase(v);
        out.push_back(std::move(comp));
    }
    std::sort(out.begin(), out.end(),
              [](const auto& x, const auto& y) { return *x.begin() < *y.begin(); });
    return out;
}

Admg Admg::induced(const std::set<int>& keep) const {
    Admg out;
    std::vector<int> remap(size(), -1);
    for (int v = 0; v < size(); ++v) {
        if (!keep.count(v)) continue;
        remap[v] = static_cast<int>(out.names.size());
        out.names.push_back(names[v]);
        out.deterministic.push_back(deterministic[v]);
    }
    for (const auto& [a, b] : directed)
        if (keep.count(a) && keep.count(b))
            out.directed.insert({remap[a], remap[b]});
    for (const auto& [a, b] : bidirected)
        if (keep.count(a) && keep.count(b))
            out.bidirected.insert({std::min(remap[a], remap[b]),
                                   std::max(remap[a], remap[b])});
    return out;
}

std::string Admg::to_dot() const {
    std::ostringstream os;
    os << "digraph admg {\n  rankdir=LR;\n";
    for (int v = 0; v < size(); ++v)
        os << "  \"" << names[v] << "\" [shape="
           << (deterministic[v] ? "diamond" : "ellipse") << "];\n";
    for (const auto& [a, b] : directed)
        os << "  \"" << names[a] << "\" -> \"" << names[b] << "\";\n";
    for (const auto& [a, b] : bidirected)
        os << "  \"" << names[a] << "\" -> \"" << names[b]
           << "\" [dir=both, style=dashed, constraint=false];\n";
    os << "}\n";
    return os.str();
}

Admg latent_projection(const FlatGraph& g) {
    int n = g.size();
    // reach[h] = observed nodes reachable from h through hidden intermediates,
    // by following one edge out of h and then only hidden nodes.
    auto reach_observed = [&](int start) {
        std::set<int> out, seen;
        std::deque<int> q{start};
        seen.insert(start);
        while (!q.empty()) {
            int cur = q.front();
            q.pop_front();
            for (int c : g.children(cur)) {
                if (g.var(c).observed) {
                    out.insert(c);
                } else if (seen.insert(c).second) {
                    q.push_back(c);
                }
            }
        }
        return out;
    };

    Admg out;
    std::vector<int> remap(n, -1);
    for (int v = 0; v < n; ++v) {
        if (!g.var(v).observed) continue;
        remap[v] = static_cast<int>(out.names.size());
        out.names.push_back(g.var(v).name);
        out.deterministic.push_back(g.var(v).deterministic);
    }
    for (int v = 0; v < n; ++v) {
        if (!g.var(v).observed) continue;
        for (int t : reach_observed(v))
            out.directed.insert({remap[v], remap[t]});
    }
    for (int h = 0; h < n; ++h) {
        if (g.var(h).observed) continue;
        auto r = reach_observed(h);
        for (int a : r)
            for (int b : r)
                if (a < b)
                    out.bidirected.insert({std::min(remap[a], remap[b]),
                                           std::max(remap[a], remap[b])});
    }
    return out;
}

bool bidirected_path_exists(const Admg& g, int a, const std::set<int>& targets) {
    std::set<int> seen{a};
    std::deque<int> q{a};
    while (!q.empty()) {
        int cur = q.front();
        q.pop_front();
        for (const auto& [x, y] : g.bidirected) {
            int other = -1;
            if (x == cur) other = y;
            else if (y == cur) other = x;
            if (other < 0 || !seen.insert(other).second) continue;
            if (targets.count(other)) return true;
            q.push_back(other);
        }
    }
    return false;
}

} // namespace hcm
