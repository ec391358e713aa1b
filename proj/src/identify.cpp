#include "hcm/identify.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <sstream>

namespace hcm {

namespace {

// Current distribution in the ID recursion: either the observational joint
// restricted to `vars` (atom) or a compound expression over `vars`. Free
// names inside a compound (conditioning variables outside `vars`) are bound
// by enclosing integrals at evaluation time.
struct PExpr {
    ExprPtr e;
    std::set<int> vars;
    bool atom = true;
};

struct Ctx {
    const Admg& g;
    std::vector<int> topo;
};

std::vector<std::string> names(const Ctx& c, const std::set<int>& s) {
    std::vector<std::string> out;
    for (int v : s) out.push_back(c.g.names[v]);
    return out;
}

std::set<int> set_minus(const std::set<int>& a, const std::set<int>& b) {
    std::set<int> out;
    for (int v : a)
        if (!b.count(v)) out.insert(v);
    return out;
}

std::set<int> set_and(const std::set<int>& a, const std::set<int>& b) {
    std::set<int> out;
    for (int v : a)
        if (b.count(v)) out.insert(v);
    return out;
}

std::set<int> set_or(const std::set<int>& a, const std::set<int>& b) {
    std::set<int> out = a;
    out.insert(b.begin(), b.end());
    return out;
}

// Ancestors of Y inside V, optionally with edges into `cut` removed.
std::set<int> anc_within(const Ctx& c, const std::set<int>& V,
                         const std::set<int>& Y, const std::set<int>& cut) {
    std::set<int> out = set_and(Y, V);
    std::deque<int> q(out.begin(), out.end());
    while (!q.empty()) {
        int v = q.front();
        q.pop_front();
        if (cut.count(v)) continue; // incoming edges removed
        for (const auto& [a, b] : c.g.directed)
            if (b == v && V.count(a) && out.insert(a).second) q.push_back(a);
    }
    return out;
}

PExpr sumout(const Ctx& c, const PExpr& p, const std::set<int>& drop) {
    auto real_drop = set_and(drop, p.vars);
    if (real_drop.empty()) return p;
    PExpr out;
    out.vars = set_minus(p.vars, real_drop);
    out.atom = p.atom;
    if (p.atom)
        out.e = prob(names(c, out.vars), {});
    else
        out.e = integral(names(c, real_drop), p.e);
    return out;
}

ExprPtr cond(const Ctx& c, const PExpr& p, int v, const std::set<int>& pred) {
    if (p.atom) return prob({c.g.names[v]}, names(c, pred));
    auto pred_in = set_and(pred, p.vars);
    std::set<int> vset{v};
    auto num_drop = set_minus(p.vars, set_or(pred_in, vset));
    auto den_drop = set_minus(p.vars, pred_in);
    ExprPtr num = integral(names(c, num_drop), p.e);
    ExprPtr den = integral(names(c, den_drop), p.e);
    return quotient(num, den);
}

IdOutcome fail_witness(const Ctx& c, const std::set<int>& V,
                       const std::set<int>& S, const std::set<int>& X) {
    IdOutcome out;
    out.ok = false;
    std::ostringstream os;
    os << "hedge: the subgraph over {";
    bool first = true;
    for (int v : V) {
        if (!first) os << ", ";
        os << c.g.names[v];
        first = false;
    }
    os << "} forms a single bidirected-connected district containing the "
          "intervened variable(s) {";
    first = true;
    for (int v : X) {
        if (!first) os << ", ";
        os << c.g.names[v];
        first = false;
    }
    os << "} and the component {";
    first = true;
    for (int v : S) {
        if (!first) os << ", ";
        os << c.g.names[v];
        first = false;
    }
    os << "}";
    out.witness.description = os.str();
    out.witness.component = names(c, V);
    return out;
}

IdOutcome idrec(const Ctx& c, const std::set<int>& V, const std::set<int>& Y,
                const std::set<int>& X, const PExpr& P) {
    if (X.empty()) {
        IdOutcome out;
        out.ok = true;
        out.expr = sumout(c, P, set_minus(V, Y)).e;
        return out;
    }
    auto An = anc_within(c, V, Y, {});
    if (An != V)
        return idrec(c, An, Y, set_and(X, An), sumout(c, P, set_minus(V, An)));
    auto An2 = anc_within(c, V, Y, X);
    auto W = set_minus(set_minus(V, X), An2);
    if (!W.empty()) return idrec(c, V, Y, set_or(X, W), P);

    auto VX = set_minus(V, X);
    auto comps = c.g.districts(VX);
    if (comps.size() > 1) {
        std::vector<ExprPtr> kids;
        for (const auto& S : comps) {
            auto r = idrec(c, V, S, set_minus(V, S), P);
            if (!r.ok) return r;
            kids.push_back(r.expr);
        }
        IdOutcome out;
        out.ok = true;
        out.expr = integral(names(c, set_minus(V, set_or(Y, X))),
                            product(kids));
        return out;
    }
    const auto& S = comps.front();
    auto CG = c.g.districts(V);
    if (CG.size() == 1) return fail_witness(c, V, S, X);
    std::set<int> Sp;
    for (const auto& d : CG)
        if (d.count(*S.begin())) Sp = d;

    std::vector<int> topoV;
    for (int v : c.topo)
        if (V.count(v)) topoV.push_back(v);
    auto preds_of = [&](int v) {
        std::set<int> out;
        for (int u : topoV) {
            if (u == v) break;
            out.insert(u);
        }
        return out;
    };
    if (Sp == S) {
        std::vector<ExprPtr> kids;
        for (int v : topoV)
            if (S.count(v)) kids.push_back(cond(c, P, v, preds_of(v)));
        IdOutcome out;
        out.ok = true;
        out.expr = integral(names(c, set_minus(S, Y)), product(kids));
        return out;
    }
    std::vector<ExprPtr> kids;
    for (int v : topoV)
        if (Sp.count(v)) kids.push_back(cond(c, P, v, preds_of(v)));
    PExpr P2;
    P2.e = product(kids);
    P2.vars = Sp;
    P2.atom = false;
    return idrec(c, Sp, Y, set_and(X, Sp), P2);
}

} // namespace

IdOutcome id_algorithm(const Admg& g, const std::set<int>& X,
                       const std::set<int>& Y) {
    for (int v : Y)
        if (X.count(v)) throw Error("InvalidQuery", "X and Y must be disjoint");
    if (Y.empty()) throw Error("InvalidQuery", "empty outcome set");
    Ctx c{g, g.topo_order()};
    std::set<int> V;
    for (int v = 0; v < g.size(); ++v) V.insert(v);
    PExpr P;
    P.atom = true;
    P.vars = V;
    P.e = prob(names(c, V), {});
    return idrec(c, V, Y, X, P);
}

// ---------------------------------------------------------------------------
// pipeline

namespace {

std::set<int> as_set(const std::vector<int>& v) {
    return {v.begin(), v.end()};
}

// Single-child Q-variable parents of `aug` eligible for marginalization.
// `hidden_only` keeps observed parents; otherwise observed parents whose
// subject does not appear in the augmentation's targets are dropped too. The
// mapped treatment node is never dropped.
std::set<int> marg_drop_set(const CollapsedModel& m, int aug,
                            const std::string& treat_name, bool hidden_only) {
    std::set<int> drop;
    auto augL = as_set(m.nodes[aug].L);
    for (int p : m.parents(aug)) {
        const auto& n = m.nodes[p];
        if (n.kind != CNode::Q) continue;
        if (n.name == treat_name) continue;
        if (m.children(p).size() != 1) continue;
        if (!n.observed) {
            drop.insert(p);
            continue;
        }
        if (hidden_only) continue;
        bool subject_in_L = false;
        for (int l : n.L)
            if (augL.count(l)) subject_in_L = true;
        if (!subject_in_L) drop.insert(p);
    }
    return drop;
}

bool path_avoiding(const CollapsedModel& m, int from, int to, int avoid) {
    if (from == avoid) return false;
    std::set<int> seen{from};
    std::deque<int> q{from};
    while (!q.empty()) {
        int cur = q.front();
        q.pop_front();
        if (cur == to) return true;
        for (int nxt : m.children(cur)) {
            if (nxt == avoid) continue;
            if (seen.insert(nxt).second) q.push_back(nxt);
        }
    }
    return false;
}

struct OutcomePlan {
    enum Kind { Direct, MediatorAug, OutcomeAug, FallbackAug } kind;
};

// True when some observational factor conditions on a variable in `det`.
// Conditioning on a deterministic functional of other variables is a
// zero-probability event off its manifold, so such an estimand has no
// unit-level positivity and the candidate must be rejected.
bool conditions_on_any(const ExprPtr& e, const std::set<std::string>& det) {
    if (!e) return false;
    if (e->kind == Expr::Kind::Prob)
        for (const auto& name : e->given)
            if (det.count(name)) return true;
    for (const auto& kid : e->kids)
        if (conditions_on_any(kid, det)) return true;
    return false;
}

} // namespace

IdResult identify_hcm(const HierGraph& g, const QuerySpec& q) {
    if (q.treatment < 0 || q.treatment >= g.size() || q.outcome < 0 ||
        q.outcome >= g.size())
        throw Error("InvalidQuery", "treatment/outcome out of range");
    if (q.treatment == q.outcome)
        throw Error("InvalidQuery", "treatment equals outcome");
    const auto& tv = g.var(q.treatment);
    const auto& yv = g.var(q.outcome);
    if (q.intervention == InterventionKind::HardUnit) {
        if (tv.level != Level::Unit)
            throw Error("InvalidQuery", "hard interventions need a unit variable");
    } else if (tv.level != Level::Subunit) {
        throw Error("InvalidQuery", "soft interventions need a subunit variable");
    }
    if (!tv.observed)
        throw Error("InvalidQuery", "treatment must be observed");

    CollapsedModel base = collapse(g);
    std::vector<PipelineStage> stages0{{"collapse", base}};

    // Treatment options: hard unit interventions stay put; soft interventions
    // map to the original Q variable (R = pa_S(T)) or to augmentations
    // Q^{T|R} for R between the query's conditioning set and pa_S(T),
    // larger R first.
    struct TreatOpt {
        bool is_unit = false;
        std::set<int> R;
        bool is_original = false;
    };
    std::vector<TreatOpt> treat_opts;
    std::vector<int> paS = g.subunit_parents(q.treatment);
    if (q.intervention == InterventionKind::HardUnit) {
        treat_opts.push_back({true, {}, false});
    } else {
        std::set<int> Rstar = as_set(q.conditioning);
        for (int w : Rstar)
            if (std::find(paS.begin(), paS.end(), w) == paS.end())
                throw Error("InvalidQuery",
                            "conditioning variable is not a subunit parent");
        std::vector<int> free;
        for (int p : paS)
            if (!Rstar.count(p)) free.push_back(p);
        std::vector<std::set<int>> options;
        int nfree = static_cast<int>(free.size());
        for (int mask = 0; mask < (1 << nfree); ++mask) {
            std::set<int> R = Rstar;
            for (int i = 0; i < nfree; ++i)
                if (mask & (1 << i)) R.insert(free[i]);
            options.push_back(R);
        }
        std::sort(options.begin(), options.end(),
                  [](const auto& a, const auto& b) {
                      if (a.size() != b.size()) return a.size() > b.size();
                      return a < b;
                  });
        for (auto& R : options)
            treat_opts.push_back(
                {false, R, R.size() == paS.size()});
    }

    std::vector<OutcomePlan> out_opts;
    if (yv.level == Level::Unit) {
        out_opts.push_back({OutcomePlan::Direct});
        if (!g.subunit_parents(q.outcome).empty())
            out_opts.push_back({OutcomePlan::MediatorAug});
    } else {
        out_opts.push_back({OutcomePlan::OutcomeAug});
        if (tv.level == Level::Subunit &&
            direct_subunit_ancestors(g, q.outcome).count(q.treatment))
            out_opts.push_back({OutcomePlan::FallbackAug});
    }

    std::string orig_treat_name =
        tv.level == Level::Subunit ? q_name(g, {q.treatment}, paS) : tv.name;

    std::set<std::string> seen;
    int runs = 0;
    const int kMaxRuns = 32;

    for (const auto& oopt : out_opts) {
        for (const auto& topt : treat_opts) {
            for (bool hidden_only : {false, true}) {
                if (runs >= kMaxRuns) break;
                try {
                    CollapsedModel m = base;
                    std::vector<PipelineStage> stages = stages0;
                    std::vector<std::string> augs; // creation order, by name
                    std::string treat_name, outcome_name, effect_note;
                    bool retargeted = false;

                    if (topt.is_unit) {
                        treat_name = tv.name;
                    } else if (topt.is_original) {
                        treat_name = orig_treat_name;
                    } else {
                        m = augment(m, {q.treatment}, topt.R);
                        treat_name = q_name(
                            g, {q.treatment},
                            std::vector<int>(topt.R.begin(), topt.R.end()));
                        stages.push_back({"augment " + treat_name, m});
                        augs.push_back(treat_name);
                        retargeted = true;
                    }

                    switch (oopt.kind) {
                    case OutcomePlan::Direct:
                        outcome_name = yv.name;
                        break;
                    case OutcomePlan::MediatorAug: {
                        auto L = as_set(g.subunit_parents(q.outcome));
                        m = augment(m, L, {});
                        std::string nm =
                            q_name(g, std::vector<int>(L.begin(), L.end()), {});
                        stages.push_back({"augment " + nm, m});
                        augs.push_back(nm);
                        outcome_name = yv.name;
                        break;
                    }
                    case OutcomePlan::OutcomeAug: {
                        auto paY = g.subunit_parents(q.outcome);
                        if (paY.empty()) {
                            outcome_name = q_name(g, {q.outcome}, {});
                        } else {
                            m = augment(m, {q.outcome}, {});
                            outcome_name = q_name(g, {q.outcome}, {});
                            stages.push_back({"augment " + outcome_name, m});
                            augs.push_back(outcome_name);
                        }
                        effect_note = "effect on q(" + yv.name +
                                      "): population expectation over " +
                                      outcome_name;
                        break;
                    }
                    case OutcomePlan::FallbackAug: {
                        auto paY = g.subunit_parents(q.outcome);
                        outcome_name = q_name(g, {q.outcome}, {q.treatment});
                        if (!(paY.size() == 1 && paY[0] == q.treatment)) {
                            m = augment(m, {q.outcome}, {q.treatment});
                            stages.push_back({"augment " + outcome_name, m});
                            augs.push_back(outcome_name);
                        }
                        effect_note =
                            "effect on q(" + yv.name + ") composes as \\int q^{" +
                            yv.name + "|" + tv.name + "}(y|t) q*(t) dt using " +
                            outcome_name;
                        break;
                    }
                    }

                    for (const auto& aug_name : augs) {
                        int idx = m.find(aug_name);
                        if (idx < 0) continue;
                        auto drop =
                            marg_drop_set(m, idx, treat_name, hidden_only);
                        if (drop.empty()) continue;
                        m = marginalize_aug(m, idx, drop);
                        stages.push_back({"marginalize " + aug_name, m});
                    }

                    int ti = m.find(treat_name);
                    int oi = m.find(outcome_name);
                    if (ti < 0 || oi < 0 || ti == oi) continue;
                    if (!m.nodes[ti].observed || !m.nodes[oi].observed)
                        continue;
                    if (m.nodes[ti].kind == CNode::Q &&
                        m.nodes[ti].deterministic)
                        continue; // no unit-level positivity for a hard do
                    if (retargeted) {
                        int orig = m.find(orig_treat_name);
                        if (orig >= 0 && path_avoiding(m, orig, oi, ti))
                            continue; // Prop. intervention-matching violated
                    }

                    std::string sig =
                        m.canonical() + "|" + treat_name + "|" + outcome_name;
                    if (!seen.insert(sig).second) continue;

                    FlatGraph flat = m.flat();
                    Admg admg = latent_projection(flat);
                    ++runs;
                    auto r = id_algorithm(admg, {admg.require(treat_name)},
                                          {admg.require(outcome_name)});
                    if (!r.ok) continue;

                    IdResult res;
                    res.identified = true;
                    res.treatment_node = treat_name;
                    res.outcome_node = outcome_name;
                    res.effect_note = effect_note;
                    res.stages = stages;
                    Estimand est;
                    for (int i = 0; i < static_cast<int>(m.nodes.size()); ++i) {
                        if (!m.nodes[i].deterministic) continue;
                        std::vector<std::string> args;
                        for (int p : m.parents(i)) args.push_back(m.nodes[p].name);
                        std::sort(args.begin(), args.end());
                        est.deterministic[m.nodes[i].name] = args;
                    }
                    est.root = expectation("units", r.expr);
                    Estimand simplified = simplify_estimand(est);
                    std::set<std::string> det_names;
                    for (const auto& [nm, args] : est.deterministic)
                        det_names.insert(nm);
                    if (conditions_on_any(simplified.root, det_names))
                        continue;
                    res.estimand = simplified;
                    res.assumptions = {
                        "subunit-level positivity",
                        "unit-level positivity for do(" + treat_name + " = q*)",
                        "mechanism convergence in the infinite-subunit limit"};
                    if (retargeted)
                        res.assumptions.push_back(
                            "intervention matching: all directed paths from " +
                            orig_treat_name + " to " + outcome_name +
                            " pass through " + treat_name);
                    return res;
                } catch (const Error& err) {
                    if (err.code() == "InvalidQuery") throw;
                    continue; // InvalidAugmentation etc.: next candidate
                }
            }
        }
    }

    // Not identified by this method: report the witness from the plain
    // collapsed model.
    IdResult res;
    res.identified = false;
    res.stages = stages0;
    std::string treat0 =
        tv.level == Level::Unit ? tv.name : orig_treat_name;
    std::string out0 =
        yv.level == Level::Unit
            ? yv.name
            : q_name(g, {q.outcome}, g.subunit_parents(q.outcome));
    res.treatment_node = treat0;
    res.outcome_node = out0;
    int t0 = base.find(treat0), o0 = base.find(out0);
    if (t0 < 0 || o0 < 0 || !base.nodes[t0].observed ||
        !base.nodes[o0].observed) {
        res.witness.description =
            "treatment or outcome node is unobserved in the collapsed model";
        return res;
    }
    Admg admg = latent_projection(base.flat());
    auto r = id_algorithm(admg, {admg.require(treat0)}, {admg.require(out0)});
    if (!r.ok) {
        res.witness = r.witness;
    } else {
        res.witness.description =
            "no augmentation/marginalization candidate yielded an estimand "
            "with unit-level positivity";
    }
    return res;
}

std::optional<SuffVerdict> sufficient_id_check(const HierGraph& g,
                                               const QuerySpec& q) {
    // Precondition for all three criteria: no hidden subunit confounders.
    for (int v = 0; v < g.size(); ++v)
        if (g.var(v).level == Level::Subunit && !g.var(v).observed &&
            g.children(v).size() >= 2)
            return std::nullopt;

    auto flatten = [&](const std::set<int>& keep) {
        FlatGraph f;
        std::vector<int> remap(g.size(), -1);
        for (int v = 0; v < g.size(); ++v)
            if (keep.count(v))
                remap[v] = f.add_var(g.var(v).name, g.var(v).observed);
        for (const auto& [a, b] : g.edges())
            if (remap[a] >= 0 && remap[b] >= 0) f.add_edge(remap[a], remap[b]);
        return f;
    };

    if (q.intervention != InterventionKind::HardUnit) {
        if (g.var(q.treatment).level != Level::Subunit) return std::nullopt;
        // Delete non-ancestors of the outcome.
        auto keep = g.ancestors_of({q.outcome});
        if (!keep.count(q.treatment))
            return SuffVerdict::Identifiable; // no causal path at all
        // Condition 2: subunit instrument.
        for (int z = 0; z < g.size(); ++z) {
            if (!keep.count(z)) continue;
            if (g.var(z).level != Level::Subunit || !g.var(z).observed)
                continue;
            auto kids = g.children(z);
            std::set<int> ks;
            for (int k : kids)
                if (keep.count(k)) ks.insert(k);
            if (ks == std::set<int>{q.treatment} && g.parents(z).empty())
                return SuffVerdict::Identifiable;
        }
        // Condition 1: no bidirected path from the treatment to a direct unit
        // descendant of it.
        FlatGraph f = flatten(keep);
        Admg admg = latent_projection(f);
        std::set<int> targets;
        for (int d : direct_unit_descendants(g, q.treatment))
            if (keep.count(d) && g.var(d).observed)
                targets.insert(admg.require(g.var(d).name));
        if (!g.var(q.treatment).observed) return std::nullopt;
        int a = admg.require(g.var(q.treatment).name);
        if (!bidirected_path_exists(admg, a, targets))
            return SuffVerdict::Identifiable;
        return std::nullopt;
    }

    // Unit-level treatment: erased-plate bidirected criterion for the effect
    // on all observed variables.
    if (!g.var(q.treatment).observed) return std::nullopt;
    std::set<int> all;
    for (int v = 0; v < g.size(); ++v) all.insert(v);
    Admg admg = latent_projection(flatten(all));
    int a = admg.require(g.var(q.treatment).name);
    std::set<int> kids;
    for (const auto& [x, y] : admg.directed)
        if (x == a) kids.insert(y);
    if (bidirected_path_exists(admg, a, kids))
        return SuffVerdict::NotIdentifiableAllObserved;
    return std::nullopt;
}

} // namespace hcm
