#include "hcm/transform.hpp"

#include "hcm/identify.hpp"

#include <algorithm>
#include <sstream>

namespace hcm {

namespace {

std::vector<int> sorted(std::set<int> s) {
    return {s.begin(), s.end()};
}

std::set<int> as_set(const std::vector<int>& v) {
    return {v.begin(), v.end()};
}

} // namespace

int CollapsedModel::find(const std::string& name) const {
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
        if (nodes[i].name == name) return i;
    return -1;
}

int CollapsedModel::require(const std::string& name) const {
    int i = find(name);
    if (i < 0) throw Error("UnknownVariable", "no node named '" + name + "'");
    return i;
}

int CollapsedModel::unit_node(int hcm_id) const {
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
        if (nodes[i].kind == CNode::UnitVar && nodes[i].unit_id == hcm_id)
            return i;
    return -1;
}

int CollapsedModel::original_q(int subject) const {
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
        if (nodes[i].kind == CNode::Q && nodes[i].qkind == QKind::Original &&
            nodes[i].L.size() == 1 && nodes[i].L[0] == subject)
            return i;
    return -1;
}

std::vector<int> CollapsedModel::parents(int v) const {
    std::vector<int> out;
    for (const auto& [a, b] : edges)
        if (b == v) out.push_back(a);
    return out;
}

std::vector<int> CollapsedModel::children(int v) const {
    std::vector<int> out;
    for (const auto& [a, b] : edges)
        if (a == v) out.push_back(b);
    return out;
}

FlatGraph CollapsedModel::flat() const {
    FlatGraph g;
    for (const auto& n : nodes)
        g.add_var(n.name, n.observed, n.deterministic);
    for (const auto& [a, b] : edges)
        g.add_edge(a, b);
    return g;
}

std::string CollapsedModel::to_dot() const {
    std::ostringstream os;
    os << "digraph collapsed {\n  rankdir=LR;\n";
    for (const auto& n : nodes) {
        os << "  \"" << n.name << "\" [shape="
           << (n.kind == CNode::UnitVar ? "box" : "ellipse");
        if (!n.observed) os << ", style=dashed";
        os << "];\n";
    }
    for (const auto& [a, b] : edges) {
        os << "  \"" << nodes[a].name << "\" -> \"" << nodes[b].name << "\"";
        // double arrows into a deterministic node
        if (nodes[b].deterministic) os << " [color=\"black:white:black\"]";
        os << ";\n";
    }
    os << "}\n";
    return os.str();
}

std::string CollapsedModel::canonical() const {
    std::vector<std::string> lines;
    for (const auto& n : nodes) {
        lines.push_back("node " + n.name + (n.observed ? " obs" : " hid") +
                        (n.deterministic ? " det" : " sto"));
    }
    for (const auto& [a, b] : edges)
        lines.push_back("edge " + nodes[a].name + " -> " + nodes[b].name);
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
}

std::string q_name(const HierGraph& g, const std::vector<int>& L,
                   const std::vector<int>& R) {
    std::string s = "Q[";
    for (size_t i = 0; i < L.size(); ++i) {
        if (i) s += ",";
        s += g.var(L[i]).name;
    }
    if (!R.empty()) {
        s += "|";
        for (size_t i = 0; i < R.size(); ++i) {
            if (i) s += ",";
            s += g.var(R[i]).name;
        }
    }
    s += "]";
    return s;
}

CollapsedModel collapse(const HierGraph& g) {
    auto rep = validate_hcm(g);
    if (!rep.ok())
        throw Error(rep.issues.front().code, rep.issues.front().message);
    CollapsedModel m;
    m.hcm = g;
    std::vector<int> unit_of(g.size(), -1), q_of(g.size(), -1);
    for (int v = 0; v < g.size(); ++v) {
        if (g.var(v).level != Level::Unit) continue;
        CNode n;
        n.kind = CNode::UnitVar;
        n.name = g.var(v).name;
        n.observed = g.var(v).observed;
        n.unit_id = v;
        unit_of[v] = static_cast<int>(m.nodes.size());
        m.nodes.push_back(n);
    }
    for (int v : g.topo_order()) {
        if (g.var(v).level != Level::Subunit) continue;
        CNode n;
        n.kind = CNode::Q;
        n.qkind = QKind::Original;
        n.L = {v};
        n.R = g.subunit_parents(v);
        n.factors = {v};
        n.name = q_name(g, n.L, n.R);
        n.observed = g.var(v).observed;
        for (int p : n.R)
            if (!g.var(p).observed) n.observed = false;
        q_of[v] = static_cast<int>(m.nodes.size());
        m.nodes.push_back(n);
    }
    for (const auto& [a, b] : g.edges()) {
        bool au = g.var(a).level == Level::Unit;
        bool bu = g.var(b).level == Level::Unit;
        if (au && bu) m.edges.insert({unit_of[a], unit_of[b]});
        if (au && !bu) m.edges.insert({unit_of[a], q_of[b]});
    }
    for (int w = 0; w < g.size(); ++w) {
        if (g.var(w).level != Level::Unit) continue;
        for (int v : direct_subunit_ancestors(g, w))
            m.edges.insert({q_of[v], unit_of[w]});
    }
    return m;
}

bool q_functional_observable(const HierGraph& g, const std::set<int>& L,
                             const std::set<int>& R) {
    for (int v : L)
        if (g.var(v).level != Level::Subunit)
            throw Error("LevelViolation",
                        "'" + g.var(v).name + "' is not subunit-level");
    for (int v : R)
        if (g.var(v).level != Level::Subunit)
            throw Error("LevelViolation",
                        "'" + g.var(v).name + "' is not subunit-level");
    for (int v : L)
        if (!g.var(v).observed) return false;
    for (int v : R)
        if (!g.var(v).observed) return false;

    // Subunit-only flat graph: the inner plate alone.
    FlatGraph sub;
    std::vector<int> remap(g.size(), -1);
    for (int v = 0; v < g.size(); ++v)
        if (g.var(v).level == Level::Subunit)
            remap[v] = sub.add_var(g.var(v).name, g.var(v).observed);
    for (const auto& [a, b] : g.edges())
        if (remap[a] >= 0 && remap[b] >= 0) sub.add_edge(remap[a], remap[b]);

    Admg admg = latent_projection(sub);
    std::set<int> Xs, Ys;
    for (int v : R) Xs.insert(admg.require(g.var(v).name));
    for (int v : L) Ys.insert(admg.require(g.var(v).name));
    if (Xs.empty()) return true; // marginal of observed variables
    return id_algorithm(admg, Xs, Ys).ok;
}

CollapsedModel augment(const CollapsedModel& m, const std::set<int>& Lset,
                       const std::set<int>& Rset) {
    const HierGraph& g = m.hcm;
    if (Lset.empty())
        throw Error("InvalidAugmentation", "empty target set");
    for (int v : Lset)
        if (g.var(v).level != Level::Subunit)
            throw Error("InvalidAugmentation",
                        "'" + g.var(v).name + "' is not subunit-level");
    std::set<int> daL;
    for (int v : Lset) {
        auto da = direct_subunit_ancestors(g, v);
        daL.insert(da.begin(), da.end());
    }
    for (int v : Rset) {
        if (g.var(v).level != Level::Subunit)
            throw Error("InvalidAugmentation",
                        "'" + g.var(v).name + "' is not subunit-level");
        if (Lset.count(v) || !daL.count(v))
            throw Error("InvalidAugmentation",
                        "conditioning variable '" + g.var(v).name +
                            "' must be a direct subunit ancestor of the targets");
    }
    std::set<int> F; // factors: q^{v|pa_S(v)} for v in (L + da_S(L)) \ R
    for (int v : Lset) F.insert(v);
    for (int v : daL) F.insert(v);
    for (int v : Rset) F.erase(v);
    std::set<int> W = F; // integrated-out factors
    for (int v : Lset) W.erase(v);

    for (const auto& n : m.nodes)
        if (n.kind == CNode::Q && as_set(n.L) == Lset && as_set(n.R) == Rset)
            throw Error("InvalidAugmentation",
                        "duplicate augmentation " + q_name(g, sorted(Lset),
                                                           sorted(Rset)));

    // Parent selection: prefer one existing augmentation that covers part of
    // the functional (its factors and integrated set nested in ours, and its
    // integrated variables invisible to the remaining factors), then the
    // original QVar of every uncovered factor.
    int cover = -1;
    for (int i = 0; i < static_cast<int>(m.nodes.size()); ++i) {
        const auto& n = m.nodes[i];
        if (n.kind != CNode::Q || n.qkind != QKind::Augmentation) continue;
        auto Fi = as_set(n.factors);
        auto Wi = as_set(n.integrated);
        auto Ri = as_set(n.R);
        bool ok = std::includes(F.begin(), F.end(), Fi.begin(), Fi.end()) &&
                  std::includes(W.begin(), W.end(), Wi.begin(), Wi.end());
        for (int r : Ri)
            if (!F.count(r) && !Rset.count(r)) ok = false;
        if (ok)
            for (int v : F) {
                if (Fi.count(v)) continue;
                for (int p : g.subunit_parents(v))
                    if (Wi.count(p)) ok = false;
            }
        if (ok)
            for (int l : Lset)
                if (Wi.count(l)) ok = false;
        if (ok)
            for (int r : Rset)
                if (Wi.count(r)) ok = false;
        if (ok && (cover < 0 || n.factors.size() >
                                    m.nodes[cover].factors.size()))
            cover = i;
    }
    std::set<int> covered;
    if (cover >= 0)
        covered = as_set(m.nodes[cover].factors);
    std::vector<int> parents;
    if (cover >= 0) parents.push_back(cover);
    for (int v : sorted(F)) {
        if (covered.count(v)) continue;
        int q = m.original_q(v);
        if (q < 0)
            throw Error("InvalidAugmentation",
                        "functional needs q for '" + g.var(v).name +
                            "', which is no longer in the model");
        parents.push_back(q);
    }

    CollapsedModel out = m;
    CNode n;
    n.kind = CNode::Q;
    n.qkind = QKind::Augmentation;
    n.L = sorted(Lset);
    n.R = sorted(Rset);
    n.factors = sorted(F);
    n.integrated = sorted(W);
    n.name = q_name(g, n.L, n.R);
    n.deterministic = true;
    n.observed = q_functional_observable(g, Lset, Rset);
    int nid = static_cast<int>(out.nodes.size());
    out.nodes.push_back(n);
    for (int p : parents) out.edges.insert({p, nid});

    // Re-route unit variables whose parent marginal factors through the new
    // functional: all factors present, integrated-out variables not read by
    // the consumer or by its remaining factors, conditioning available.
    for (int w = 0; w < static_cast<int>(out.nodes.size()); ++w) {
        const auto& cn = out.nodes[w];
        if (cn.kind != CNode::UnitVar) continue;
        auto da = direct_subunit_ancestors(g, cn.unit_id);
        bool ok = std::includes(da.begin(), da.end(), F.begin(), F.end());
        auto paS = as_set(g.subunit_parents(cn.unit_id));
        for (int v : W)
            if (paS.count(v)) ok = false;
        for (int r : Rset)
            if (!da.count(r) || W.count(r)) ok = false;
        std::vector<int> rest;
        for (int v : da) {
            if (F.count(v)) continue;
            rest.push_back(v);
            for (int p : g.subunit_parents(v))
                if (W.count(p)) ok = false;
        }
        if (!ok) continue;
        std::vector<int> reps;
        for (int v : rest) {
            int q = out.original_q(v);
            if (q < 0) { ok = false; break; }
            reps.push_back(q);
        }
        if (!ok) continue;
        for (auto it = out.edges.begin(); it != out.edges.end();) {
            if (it->second == w && out.nodes[it->first].kind == CNode::Q)
                it = out.edges.erase(it);
            else
                ++it;
        }
        out.edges.insert({nid, w});
        for (int q : reps) out.edges.insert({q, w});
    }
    return out;
}

CollapsedModel marginalize_aug(const CollapsedModel& m, int aug,
                               const std::set<int>& drop) {
    if (aug < 0 || aug >= static_cast<int>(m.nodes.size()) ||
        m.nodes[aug].kind != CNode::Q ||
        m.nodes[aug].qkind != QKind::Augmentation)
        throw Error("IllegalDrop", "target is not an augmentation variable");
    for (int d : drop) {
        if (!m.edges.count({d, aug}))
            throw Error("IllegalDrop", "'" + m.nodes.at(d).name +
                                           "' is not a parent of '" +
                                           m.nodes[aug].name + "'");
        for (int c : m.children(d))
            if (c != aug)
                throw Error("IllegalDrop",
                            "'" + m.nodes[d].name + "' also feeds '" +
                                m.nodes[c].name + "'");
    }
    CollapsedModel out;
    out.hcm = m.hcm;
    std::vector<int> remap(m.nodes.size(), -1);
    for (int i = 0; i < static_cast<int>(m.nodes.size()); ++i) {
        if (drop.count(i)) continue;
        remap[i] = static_cast<int>(out.nodes.size());
        out.nodes.push_back(m.nodes[i]);
    }
    if (!drop.empty()) out.nodes[remap[aug]].deterministic = false;
    for (const auto& [a, b] : m.edges) {
        if (drop.count(a)) continue; // edge into aug, vanishes with the parent
        if (drop.count(b)) {
            out.edges.insert({remap[a], remap[aug]}); // re-route to aug
            continue;
        }
        out.edges.insert({remap[a], remap[b]});
    }
    // Re-routing may have produced a self edge guard: parents of dropped node
    // cannot include aug (aug is its child), so no self edge is possible.
    return out;
}

CollapsedModel reabsorb_aug(const CollapsedModel& m, int aug) {
    if (aug < 0 || aug >= static_cast<int>(m.nodes.size()) ||
        m.nodes[aug].kind != CNode::Q ||
        m.nodes[aug].qkind != QKind::Augmentation)
        throw Error("InvalidAugmentation", "not an augmentation variable");
    if (!m.nodes[aug].deterministic)
        throw Error("InvalidAugmentation",
                    "cannot re-absorb a marginalized augmentation");
    CollapsedModel out;
    out.hcm = m.hcm;
    std::vector<int> remap(m.nodes.size(), -1);
    for (int i = 0; i < static_cast<int>(m.nodes.size()); ++i) {
        if (i == aug) continue;
        remap[i] = static_cast<int>(out.nodes.size());
        out.nodes.push_back(m.nodes[i]);
    }
    auto pars = m.parents(aug);
    for (const auto& [a, b] : m.edges) {
        if (b == aug) continue;
        if (a == aug) {
            for (int p : pars) out.edges.insert({remap[p], remap[b]});
            continue;
        }
        out.edges.insert({remap[a], remap[b]});
    }
    return out;
}

int map_intervention(const CollapsedModel& m, const QuerySpec& q) {
    if (q.intervention == InterventionKind::HardUnit) {
        int n = m.unit_node(q.treatment);
        if (n < 0)
            throw Error("UnknownVariable", "treatment not in collapsed model");
        return n;
    }
    int n = m.original_q(q.treatment);
    if (n < 0)
        throw Error("UnknownVariable",
                    "treatment Q variable not in collapsed model");
    return n;
}

} // namespace hcm
