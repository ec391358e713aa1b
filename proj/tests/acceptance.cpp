// Acceptance gate: eight end-to-end criteria, one PASS/FAIL line each.
// Usage: acceptance [N]  (no argument runs all criteria; exit 0 iff all pass)

#include "hcm/bayes.hpp"
#include "hcm/identify.hpp"
#include "hcm/reproduce.hpp"

#include "golden_common.hpp"
#include "oracle_common.hpp"

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace hcm;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

// ---------------------------------------------------------------- criterion 1

Verdict criterion_identification() {
    const char* identified[] = {
        "confounder.hcm",           "interference.hcm",
        "instrument.hcm",           "ident_mediator_marginal.hcm",
        "ident_subunit_chain.hcm",  "ident_subunit_mediator.hcm",
        "ident_instrument_unit_mediator.hcm",
        "ident_instrument_covariate.hcm",
        "ident_unit_mediator_feedback.hcm",
        "ident_conditional_policy.hcm",
        "subconf_backdoor.hcm",     "subconf_frontdoor.hcm",
        "subconf_frontdoor_chain.hcm"};
    const char* rejected[] = {"nonident_confounded_interferer.hcm",
                              "nonident_double_confounded_instrument.hcm",
                              "nonident_confounded_unit_mediator.hcm",
                              "nonident_unit_treatment.hcm"};
    for (const char* f : identified) {
        auto pr = load_fixture(f);
        if (!identify_hcm(pr.graph, *pr.query).identified)
            return {false, std::string(f) + " not identified"};
    }
    for (const char* f : rejected) {
        auto pr = load_fixture(f);
        if (identify_hcm(pr.graph, *pr.query).identified)
            return {false, std::string(f) + " wrongly identified"};
    }

    auto pinned = [](const char* f, const ExprPtr& want) -> std::string {
        auto pr = load_fixture(f);
        auto r = identify_hcm(pr.graph, *pr.query);
        if (!r.identified) return std::string(f) + " not identified";
        if (!structurally_equal(r.estimand.root, want))
            return std::string(f) + " estimand mismatch: " +
                   to_text(r.estimand.root);
        return "";
    };
    std::string err;
    err = pinned("confounder.hcm",
                 expectation("units",
                             integral({"Q[Y|A]"},
                                      product({prob({"Q[Y|A]"}, {}),
                                               delta("Q[Y]",
                                                     {"Q[A]", "Q[Y|A]"})}))));
    if (!err.empty()) return {false, err};
    err = pinned(
        "interference.hcm",
        expectation(
            "units",
            integral({"Q[Y|A]", "Z"},
                     product({prob({"Z"}, {"Q[A]"}),
                              integral({"Q[A]"},
                                       product({prob({"Q[A]"}, {}),
                                                prob({"Q[Y|A]"},
                                                     {"Q[A]", "Z"})})),
                              delta("Q[Y]", {"Q[A]", "Q[Y|A]"})}))));
    if (!err.empty()) return {false, err};
    err = pinned("instrument.hcm",
                 expectation("units",
                             integral({"Q[A|Z]"},
                                      product({prob({"Q[A|Z]"}, {}),
                                               prob({"Y"},
                                                    {"Q[A]", "Q[A|Z]"})}))));
    if (!err.empty()) return {false, err};
    return {true, "13 identified, 4 rejected, 3 pinned estimands matched"};
}

// ---------------------------------------------------------------- criterion 2

Verdict criterion_oracle() {
    auto sw = oracle::run_oracle(100, 2024);
    std::ostringstream os;
    os << sw.identifiable_checked << " models, max |err| = " << sw.max_err
       << " (tol 1e-9)";
    return {sw.identifiable_checked == 100 && sw.max_err <= 1e-9, os.str()};
}

// --------------------------------------------------------------- grid helpers

struct CellStats {
    double mean = 0.0;
    double se = 0.0;   // cross-seed standard error of the mean
    double mae = 0.0;  // mean absolute error against the truth
    double truth = 0.0;
    int n = 0;
};

CellStats cell_stats(const std::vector<RunRow>& rows,
                     const std::string& setting, const std::string& est) {
    CellStats c;
    std::vector<double> v;
    for (const auto& r : rows) {
        if (r.setting != setting || r.estimator != est) continue;
        if (std::isnan(r.estimate)) continue;
        v.push_back(r.estimate);
        c.truth = r.truth;
        c.mae += std::abs(r.estimate - r.truth);
    }
    c.n = static_cast<int>(v.size());
    if (c.n == 0) return c;
    c.mae /= c.n;
    for (double x : v) c.mean += x;
    c.mean /= c.n;
    double ss = 0.0;
    for (double x : v) ss += (x - c.mean) * (x - c.mean);
    c.se = c.n > 1 ? std::sqrt(ss / (c.n - 1) / c.n) : 0.0;
    return c;
}

// ---------------------------------------------------------------- criterion 3

Verdict criterion_confounder() {
    auto rows = reproduce_grid("confounder", {1000}, 20);
    std::ostringstream os;
    for (const char* s : {"omega=0", "omega=0.2", "omega=0.5"}) {
        auto c = cell_stats(rows, s, "hcm");
        if (c.n != 20) return {false, std::string(s) + ": missing seeds"};
        double dev = std::abs(c.mean - c.truth);
        os << s << " |mean-truth|=" << dev << " (2se=" << 2 * c.se << "); ";
        if (dev > 2 * c.se)
            return {false, os.str() + "outside 2 standard errors"};
    }
    auto hcm_c = cell_stats(rows, "omega=0.5", "hcm");
    auto naive = cell_stats(rows, "omega=0.5", "naive");
    os << "naive MAE " << naive.mae << " vs hcm MAE " << hcm_c.mae
       << " (need >= 2x)";
    return {naive.mae >= 2.0 * hcm_c.mae, os.str()};
}

// ---------------------------------------------------------------- criterion 4

Verdict criterion_interference() {
    auto rows = reproduce_grid("interference", {1000}, 20);
    std::ostringstream os;
    std::vector<double> bias;
    for (const char* s : {"rho=0", "rho=0.5", "rho=1.5"}) {
        auto c = cell_stats(rows, s, "hcm");
        if (c.n != 20) return {false, std::string(s) + ": missing seeds"};
        double dev = std::abs(c.mean - c.truth);
        os << s << " |mean-truth|=" << dev << " (2se=" << 2 * c.se << "); ";
        if (dev > 2 * c.se)
            return {false, os.str() + "outside 2 standard errors"};
        auto b = cell_stats(rows, s, "confounder");
        bias.push_back(std::abs(b.mean - b.truth));
    }
    os << "confounder-estimator bias " << bias[0] << " < " << bias[1] << " < "
       << bias[2];
    return {bias[0] < bias[1] && bias[1] < bias[2], os.str()};
}

// ---------------------------------------------------------------- criterion 5

Verdict criterion_instrument() {
    auto rows = reproduce_grid("instrument", {1000}, 20);
    std::ostringstream os;
    for (const char* s : {"omega=0", "omega=0.2", "omega=0.5"}) {
        auto c = cell_stats(rows, s, "hcm");
        auto nv = cell_stats(rows, s, "naive");
        if (c.n != 20 || nv.n != 20)
            return {false, std::string(s) + ": missing seeds"};
        if (std::abs(c.truth - 0.25) > 1e-12)
            return {false, std::string(s) + ": truth is not 0.25"};
        os << s << " hcm MAE=" << c.mae << " naive MAE=" << nv.mae << "; ";
        if (std::string(s) == "omega=0") {
            if (c.mae > 0.05)
                return {false, os.str() + "MAE above 0.05 at omega=0"};
        } else if (!(c.mae < nv.mae)) {
            return {false, os.str() + "estimator does not beat the baseline"};
        }
    }
    return {true, os.str()};
}

// ---------------------------------------------------------------- criterion 6

Verdict criterion_eight_schools() {
    auto j = reproduce_eight_schools(std::string(HCM_DATA_DIR) +
                                         "/eight_schools.csv",
                                     50000, 4, 2024);
    double mean = j["mean"], sd = j["sd"], rhat = j["max_rhat"];
    std::ostringstream os;
    os << "nu mean=" << mean << " (4.4 +/- 0.5), sd=" << sd
       << " (3.4 +/- 0.5), max rhat=" << rhat << " (< 1.05)";
    bool ok = std::abs(mean - 4.4) <= 0.5 && std::abs(sd - 3.4) <= 0.5 &&
              rhat < 1.05;
    return {ok, os.str()};
}

// ---------------------------------------------------------------- criterion 7

Verdict criterion_convergence() {
    auto pts = reproduce_convergence(500, 10);
    std::vector<double> ks, w1;
    for (const auto& p : pts) (p.metric == "ks" ? ks : w1).push_back(p.value);
    std::ostringstream os;
    os << "ks(m=10,100,1000)=" << ks[0] << "," << ks[1] << "," << ks[2]
       << "; w1(m=25,100,400)=" << w1[0] << "," << w1[1] << "," << w1[2];
    bool ok = ks.size() == 3 && w1.size() == 3 && ks[0] > ks[1] &&
              ks[1] > ks[2] && w1[0] > w1[1] && w1[1] > w1[2];
    return {ok, os.str()};
}

// ---------------------------------------------------------------- criterion 8

Verdict criterion_golden() {
    int panels = 0;
    for (const auto& c : run_golden_panels()) {
        if (!c.ok) return {false, c.name + ": " + c.detail};
        ++panels;
    }
    auto legality = run_legality_table();
    if (legality.size() != 6)
        return {false, "legality table must have 6 cases"};
    for (const auto& c : legality)
        if (!c.ok) return {false, c.name + ": " + c.detail};
    std::ostringstream os;
    os << panels << " golden panels and 6 legality cases matched";
    return {true, os.str()};
}

struct Criterion {
    const char* title;
    Verdict (*run)();
};

const Criterion kCriteria[] = {
    {"identification suite + pinned estimands", criterion_identification},
    {"discrete oracle equivalence", criterion_oracle},
    {"confounder reproduction", criterion_confounder},
    {"interference reproduction", criterion_interference},
    {"instrument reproduction", criterion_instrument},
    {"eight schools posterior", criterion_eight_schools},
    {"convergence in m", criterion_convergence},
    {"structural golden tests", criterion_golden},
};

bool run_one(int idx) {
    const auto& c = kCriteria[idx - 1];
    Verdict v;
    try {
        v = c.run();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << idx << " ("
              << c.title << "): " << v.detail << "\n";
    return v.pass;
}

} // namespace

int main(int argc, char** argv) {
    if (argc > 2) {
        std::cerr << "usage: acceptance [1-8]\n";
        return 2;
    }
    if (argc == 2) {
        int idx = std::atoi(argv[1]);
        if (idx < 1 || idx > 8) {
            std::cerr << "usage: acceptance [1-8]\n";
            return 2;
        }
        return run_one(idx) ? 0 : 1;
    }
    bool all = true;
    for (int i = 1; i <= 8; ++i) all = run_one(i) && all;
    return all ? 0 : 1;
}
