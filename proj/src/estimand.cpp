#include "hcm/estimand.hpp"

#include "hcm/graph.hpp"

#include <algorithm>
#include <sstream>

namespace hcm {

namespace {

std::shared_ptr<Expr> make(Expr::Kind k) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    return e;
}

} // namespace

ExprPtr prob(std::vector<std::string> targets, std::vector<std::string> given,
             std::string regime) {
    auto e = make(Expr::Kind::Prob);
    e->targets = std::move(targets);
    e->given = std::move(given);
    e->regime = std::move(regime);
    std::sort(e->targets.begin(), e->targets.end());
    std::sort(e->given.begin(), e->given.end());
    return e;
}

ExprPtr integral(std::vector<std::string> bound, ExprPtr body) {
    if (bound.empty()) return body;
    auto e = make(Expr::Kind::Integral);
    std::sort(bound.begin(), bound.end());
    e->bound = std::move(bound);
    e->kids = {std::move(body)};
    return e;
}

ExprPtr product(std::vector<ExprPtr> kids) {
    if (kids.size() == 1) return kids[0];
    auto e = make(Expr::Kind::Product);
    e->kids = std::move(kids);
    return e;
}

ExprPtr sum_of(std::vector<ExprPtr> kids) {
    if (kids.size() == 1) return kids[0];
    auto e = make(Expr::Kind::Sum);
    e->kids = std::move(kids);
    return e;
}

ExprPtr quotient(ExprPtr num, ExprPtr den) {
    auto e = make(Expr::Kind::Quotient);
    e->kids = {std::move(num), std::move(den)};
    return e;
}

ExprPtr delta(std::string var, std::vector<std::string> args) {
    auto e = make(Expr::Kind::Delta);
    e->targets = {std::move(var)};
    std::sort(args.begin(), args.end());
    e->given = std::move(args);
    return e;
}

ExprPtr expectation(std::string note, ExprPtr body) {
    auto e = make(Expr::Kind::Expectation);
    e->note = std::move(note);
    e->kids = {std::move(body)};
    return e;
}

ExprPtr constant(double v) {
    auto e = make(Expr::Kind::Const);
    e->value = v;
    return e;
}

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind || a->targets != b->targets || a->given != b->given ||
        a->regime != b->regime || a->bound != b->bound || a->note != b->note ||
        a->value != b->value || a->kids.size() != b->kids.size())
        return false;
    for (size_t i = 0; i < a->kids.size(); ++i)
        if (!structurally_equal(a->kids[i], b->kids[i])) return false;
    return true;
}

namespace {

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += v[i];
    }
    return s;
}

} // namespace

std::string to_text(const ExprPtr& e) {
    if (!e) return "<null>";
    switch (e->kind) {
    case Expr::Kind::Prob: {
        std::string s = "p(" + join(e->targets);
        if (!e->given.empty()) s += " | " + join(e->given);
        if (!e->regime.empty()) s += " ; do(" + e->regime + ")";
        return s + ")";
    }
    case Expr::Kind::Integral:
        return "\\int_{" + join(e->bound) + "} " + to_text(e->kids[0]) + " d(" +
               join(e->bound) + ")";
    case Expr::Kind::Product: {
        std::string s;
        for (size_t i = 0; i < e->kids.size(); ++i) {
            if (i) s += " ";
            bool paren = e->kids[i]->kind == Expr::Kind::Sum;
            s += paren ? "(" + to_text(e->kids[i]) + ")" : to_text(e->kids[i]);
        }
        return s.empty() ? "1" : s;
    }
    case Expr::Kind::Sum: {
        std::string s;
        for (size_t i = 0; i < e->kids.size(); ++i) {
            if (i) s += " + ";
            s += to_text(e->kids[i]);
        }
        return s;
    }
    case Expr::Kind::Quotient:
        return "[" + to_text(e->kids[0]) + "] / [" + to_text(e->kids[1]) + "]";
    case Expr::Kind::Delta:
        return "\\delta(" + e->targets[0] + " = m(" + join(e->given) + "))";
    case Expr::Kind::Expectation:
        return "E_{" + e->note + "}[ " + to_text(e->kids[0]) + " ]";
    case Expr::Kind::Const: {
        std::ostringstream os;
        os << e->value;
        return os.str();
    }
    }
    return "?";
}

nlohmann::json to_json(const ExprPtr& e) {
    nlohmann::json j;
    if (!e) return j;
    switch (e->kind) {
    case Expr::Kind::Prob:
        j["kind"] = "prob";
        j["targets"] = e->targets;
        j["given"] = e->given;
        if (!e->regime.empty()) j["regime"] = e->regime;
        break;
    case Expr::Kind::Integral:
        j["kind"] = "integral";
        j["bound"] = e->bound;
        j["body"] = to_json(e->kids[0]);
        break;
    case Expr::Kind::Product:
    case Expr::Kind::Sum: {
        j["kind"] = e->kind == Expr::Kind::Product ? "product" : "sum";
        auto arr = nlohmann::json::array();
        for (const auto& k : e->kids) arr.push_back(to_json(k));
        j["children"] = arr;
        break;
    }
    case Expr::Kind::Quotient:
        j["kind"] = "quotient";
        j["numerator"] = to_json(e->kids[0]);
        j["denominator"] = to_json(e->kids[1]);
        break;
    case Expr::Kind::Delta:
        j["kind"] = "delta";
        j["var"] = e->targets[0];
        j["args"] = e->given;
        break;
    case Expr::Kind::Expectation:
        j["kind"] = "expectation";
        j["note"] = e->note;
        j["body"] = to_json(e->kids[0]);
        break;
    case Expr::Kind::Const:
        j["kind"] = "const";
        j["value"] = e->value;
        break;
    }
    return j;
}

// ---------------------------------------------------------------------------
// simplification

namespace {

ExprPtr rename_var(const ExprPtr& e, const std::string& from,
                   const std::string& to) {
    if (!e) return e;
    auto c = std::make_shared<Expr>(*e);
    auto ren = [&](std::vector<std::string>& v) {
        for (auto& s : v)
            if (s == from) s = to;
        std::sort(v.begin(), v.end());
    };
    ren(c->targets);
    ren(c->given);
    // A bound occurrence shadows; do not descend into an Integral that
    // rebinds the name.
    if (c->kind == Expr::Kind::Integral &&
        std::find(c->bound.begin(), c->bound.end(), from) != c->bound.end())
        return c;
    for (auto& k : c->kids) k = rename_var(k, from, to);
    return c;
}

ExprPtr simplify_once(
    const ExprPtr& e,
    const std::map<std::string, std::vector<std::string>>& det, bool& changed) {
    if (!e) return e;
    auto c = std::make_shared<Expr>(*e);
    for (auto& k : c->kids) k = simplify_once(k, det, changed);

    switch (c->kind) {
    case Expr::Kind::Prob: {
        if (c->targets.empty()) {
            changed = true;
            return constant(1.0);
        }
        if (c->targets.size() == 1) {
            auto it = det.find(c->targets[0]);
            if (it != det.end()) {
                bool have_args = true;
                for (const auto& a : it->second)
                    if (std::find(c->given.begin(), c->given.end(), a) ==
                        c->given.end())
                        have_args = false;
                if (have_args) {
                    changed = true;
                    return delta(c->targets[0], it->second);
                }
            }
        }
        return c;
    }
    case Expr::Kind::Product: {
        std::vector<ExprPtr> kids;
        for (auto& k : c->kids) {
            if (k->kind == Expr::Kind::Product) {
                changed = true;
                kids.insert(kids.end(), k->kids.begin(), k->kids.end());
            } else if (k->kind == Expr::Kind::Const && k->value == 1.0) {
                changed = true;
            } else {
                kids.push_back(k);
            }
        }
        if (kids.empty()) {
            changed = true;
            return constant(1.0);
        }
        if (kids.size() == 1) {
            changed = true;
            return kids[0];
        }
        c->kids = std::move(kids);
        return c;
    }
    case Expr::Kind::Integral: {
        // Collapse over a Delta'd bound variable: substitute the functional
        // symbol into the remaining factors.
        std::vector<ExprPtr> factors;
        if (c->kids[0]->kind == Expr::Kind::Product)
            factors = c->kids[0]->kids;
        else
            factors = {c->kids[0]};
        for (const auto& b : c->bound) {
            for (size_t i = 0; i < factors.size(); ++i) {
                const auto& f = factors[i];
                if (f->kind != Expr::Kind::Delta || f->targets[0] != b)
                    continue;
                // Ensure the functional's arguments do not involve another
                // bound variable of this integral (substitution stays valid).
                bool clean = true;
                for (const auto& a : f->given)
                    if (std::find(c->bound.begin(), c->bound.end(), a) !=
                        c->bound.end())
                        clean = false;
                if (!clean) continue;
                std::string token = "m(" + join(f->given) + ")";
                std::vector<ExprPtr> rest;
                for (size_t j = 0; j < factors.size(); ++j)
                    if (j != i) rest.push_back(rename_var(factors[j], b, token));
                std::vector<std::string> bound;
                for (const auto& x : c->bound)
                    if (x != b) bound.push_back(x);
                changed = true;
                ExprPtr body = rest.empty() ? constant(1.0) : product(rest);
                return bound.empty() ? body : integral(bound, body);
            }
        }
        if (c->kids[0]->kind == Expr::Kind::Const && c->kids[0]->value == 1.0 &&
            c->bound.empty()) {
            changed = true;
            return c->kids[0];
        }
        if (c->bound.empty()) {
            changed = true;
            return c->kids[0];
        }
        return c;
    }
    case Expr::Kind::Quotient:
        if (c->kids[1]->kind == Expr::Kind::Const && c->kids[1]->value == 1.0) {
            changed = true;
            return c->kids[0];
        }
        if (c->kids[1]->kind == Expr::Kind::Prob &&
            c->kids[1]->targets.empty()) {
            changed = true;
            return c->kids[0];
        }
        return c;
    default:
        return c;
    }
}

} // namespace

Estimand simplify_estimand(const Estimand& e) {
    Estimand out = e;
    for (int iter = 0; iter < 64; ++iter) {
        bool changed = false;
        out.root = simplify_once(out.root, out.deterministic, changed);
        if (!changed) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// numeric evaluation

int DiscreteJoint::index_of(const std::string& name) const {
    for (int i = 0; i < static_cast<int>(vars.size()); ++i)
        if (vars[i] == name) return i;
    return -1;
}

double DiscreteJoint::mass(const std::map<std::string, int>& env,
                           const std::vector<std::string>& fixed) const {
    std::vector<int> fix(vars.size(), -1);
    for (const auto& name : fixed) {
        int idx = index_of(name);
        if (idx < 0)
            throw Error("EvalError", "joint lacks variable '" + name + "'");
        auto it = env.find(name);
        if (it == env.end())
            throw Error("EvalError", "unbound variable '" + name + "'");
        fix[idx] = it->second;
    }
    double total = 0.0;
    size_t cells = p.size();
    for (size_t cell = 0; cell < cells; ++cell) {
        size_t rest = cell;
        bool match = true;
        for (int i = static_cast<int>(vars.size()) - 1; i >= 0; --i) {
            int val = static_cast<int>(rest % card[i]);
            rest /= card[i];
            if (fix[i] >= 0 && fix[i] != val) {
                match = false;
                break;
            }
        }
        if (match) total += p[cell];
    }
    return total;
}

double eval_estimand(const ExprPtr& e, const DiscreteJoint& joint,
                     std::map<std::string, int>& env) {
    if (!e) throw Error("EvalError", "null expression");
    switch (e->kind) {
    case Expr::Kind::Prob: {
        if (!e->regime.empty())
            throw Error("EvalError", "do-regime term in final estimand");
        std::vector<std::string> all = e->targets;
        all.insert(all.end(), e->given.begin(), e->given.end());
        double num = joint.mass(env, all);
        double den = e->given.empty() ? joint.mass(env, {})
                                      : joint.mass(env, e->given);
        if (den == 0.0) return 0.0;
        return num / den;
    }
    case Expr::Kind::Integral: {
        // Iterate the product support of the bound variables; inner bindings
        // shadow outer ones.
        std::vector<int> cards;
        for (const auto& b : e->bound) {
            int idx = joint.index_of(b);
            if (idx < 0)
                throw Error("EvalError", "joint lacks bound variable '" + b + "'");
            cards.push_back(joint.card[idx]);
        }
        std::vector<std::optional<int>> saved;
        for (const auto& b : e->bound) {
            auto it = env.find(b);
            saved.push_back(it == env.end() ? std::nullopt
                                            : std::optional<int>(it->second));
        }
        std::vector<int> idx(e->bound.size(), 0);
        double total = 0.0;
        while (true) {
            for (size_t i = 0; i < e->bound.size(); ++i)
                env[e->bound[i]] = idx[i];
            total += eval_estimand(e->kids[0], joint, env);
            size_t k = 0;
            for (; k < idx.size(); ++k) {
                if (++idx[k] < cards[k]) break;
                idx[k] = 0;
            }
            if (k == idx.size()) break;
        }
        for (size_t i = 0; i < e->bound.size(); ++i) {
            if (saved[i])
                env[e->bound[i]] = *saved[i];
            else
                env.erase(e->bound[i]);
        }
        return total;
    }
    case Expr::Kind::Product: {
        double r = 1.0;
        for (const auto& k : e->kids) {
            r *= eval_estimand(k, joint, env);
            if (r == 0.0) return 0.0;
        }
        return r;
    }
    case Expr::Kind::Sum: {
        double r = 0.0;
        for (const auto& k : e->kids) r += eval_estimand(k, joint, env);
        return r;
    }
    case Expr::Kind::Quotient: {
        double den = eval_estimand(e->kids[1], joint, env);
        if (den == 0.0) return 0.0;
        return eval_estimand(e->kids[0], joint, env) / den;
    }
    case Expr::Kind::Expectation:
        return eval_estimand(e->kids[0], joint, env);
    case Expr::Kind::Const:
        return e->value;
    case Expr::Kind::Delta:
        throw Error("EvalError",
                    "delta terms require mechanism knowledge; evaluate the "
                    "unsimplified estimand");
    }
    throw Error("EvalError", "unknown node");
}

} // namespace hcm
