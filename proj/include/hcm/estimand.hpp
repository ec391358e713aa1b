#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace hcm {

// Symbolic estimand expression. Variables are referred to by node name of the
// analyzed (collapsed) model; intervention constants are free variables bound
// at evaluation time. Integral means "sum or integrate the body over the
// bound variables"; an inner Integral over a name shadows an outer binding.
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Kind {
        Prob,        // p(targets | given), regime tag "" = observational
        Integral,    // over bound vars
        Product,     // n-ary
        Sum,         // n-ary addition
        Quotient,    // kids[0] / kids[1], 0/0 := 0
        Delta,       // point mass: var = functional(args)
        Expectation, // annotation wrapper around kids[0]
        Const        // literal (value)
    };
    Kind kind = Kind::Const;
    std::vector<std::string> targets; // Prob; Delta: targets[0] = var
    std::vector<std::string> given;   // Prob conditioning; Delta: args
    std::string regime;               // Prob: do(...) tag, must be empty in
                                      // final identified estimands
    std::vector<std::string> bound;   // Integral
    std::vector<ExprPtr> kids;
    std::string note;                 // Expectation label
    double value = 1.0;               // Const
};

ExprPtr prob(std::vector<std::string> targets, std::vector<std::string> given,
             std::string regime = "");
ExprPtr integral(std::vector<std::string> bound, ExprPtr body);
ExprPtr product(std::vector<ExprPtr> kids);
ExprPtr sum_of(std::vector<ExprPtr> kids);
ExprPtr quotient(ExprPtr num, ExprPtr den);
ExprPtr delta(std::string var, std::vector<std::string> args);
ExprPtr expectation(std::string note, ExprPtr body);
ExprPtr constant(double v);

struct Estimand {
    ExprPtr root;
    // Deterministic nodes of the analyzed model and their parent arguments;
    // consumed by simplify_estimand.
    std::map<std::string, std::vector<std::string>> deterministic;
};

// Rewrites to a fixed point: p(d | ...) with d deterministic and all its
// arguments in the conditioning set becomes a Delta; an Integral over a
// Delta'd variable collapses by substitution; single-child products unwrap;
// nested products/integrals flatten; unit factors vanish.
Estimand simplify_estimand(const Estimand& e);

bool structurally_equal(const ExprPtr& a, const ExprPtr& b);

std::string to_text(const ExprPtr& e);  // LaTeX-like rendering
nlohmann::json to_json(const ExprPtr& e);

// Brute-force discrete joint over named variables, row-major in the order of
// `vars`. Probabilities need not be normalized per-query; eval uses ratios.
struct DiscreteJoint {
    std::vector<std::string> vars;
    std::vector<int> card;
    std::vector<double> p;

    int index_of(const std::string& name) const;
    double mass(const std::map<std::string, int>& env,
                const std::vector<std::string>& fixed) const;
};

// Evaluate an estimand numerically against a discrete joint. `env` binds free
// variables (outcome value, intervention constants) to support indices.
double eval_estimand(const ExprPtr& e, const DiscreteJoint& joint,
                     std::map<std::string, int>& env);

} // namespace hcm
