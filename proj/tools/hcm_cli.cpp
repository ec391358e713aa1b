#include "hcm/bayes.hpp"
#include "hcm/dsl.hpp"
#include "hcm/estimate.hpp"
#include "hcm/identify.hpp"
#include "hcm/reproduce.hpp"
#include "hcm/simulate.hpp"
#include "hcm/transform.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw hcm::Error("SyntaxError", "cannot open " + path);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::string default_out_dir() {
    const char* env = std::getenv("HCM_OUT_DIR");
    return env ? env : ".";
}

hcm::MechanismSpec spec_for(const std::string& motif, double omega,
                            double rho) {
    if (motif == "confounder") return hcm::confounder_spec(omega);
    if (motif == "interference") return hcm::interference_spec(rho);
    if (motif == "instrument") return hcm::instrument_spec(omega);
    throw hcm::Error("DomainError", "unknown motif: " + motif);
}

int cmd_identify(const std::string& file, bool as_json,
                 const std::string& dot_dir) {
    hcm::ParseResult pr = hcm::parse_hcm(slurp(file));
    if (!pr.query)
        throw hcm::Error("InvalidQuery", file + " has no query block");
    hcm::IdResult r = hcm::identify_hcm(pr.graph, *pr.query);
    if (!dot_dir.empty()) {
        hcm::write_file(dot_dir + "/input.dot", pr.graph.to_dot());
        for (const auto& st : r.stages)
            hcm::write_file(dot_dir + "/" + st.label + ".dot",
                            st.model.to_dot());
    }
    if (as_json) {
        json j;
        j["identified"] = r.identified;
        if (r.identified) {
            j["estimand"] = hcm::to_json(r.estimand.root);
            j["estimand_text"] = hcm::to_text(r.estimand.root);
            j["assumptions"] = r.assumptions;
            j["treatment_node"] = r.treatment_node;
            j["outcome_node"] = r.outcome_node;
            if (!r.effect_note.empty()) j["effect_note"] = r.effect_note;
        } else {
            j["witness"] = {{"description", r.witness.description},
                            {"component", r.witness.component}};
        }
        std::cout << j.dump(2) << "\n";
    } else if (r.identified) {
        std::cout << "identified\n";
        std::cout << "estimand: " << hcm::to_text(r.estimand.root) << "\n";
        if (!r.effect_note.empty())
            std::cout << "note: " << r.effect_note << "\n";
        std::cout << "assumptions:\n";
        for (const auto& a : r.assumptions) std::cout << "  - " << a << "\n";
    } else {
        std::cout << "not identified by this method\n";
        std::cout << "witness: " << r.witness.description << "\n";
    }
    return r.identified ? 0 : 2;
}

int cmd_collapse(const std::string& file, bool dot, bool as_json) {
    hcm::ParseResult pr = hcm::parse_hcm(slurp(file));
    hcm::CollapsedModel m = hcm::collapse(pr.graph);
    if (dot)
        std::cout << m.to_dot();
    else if (as_json) {
        json j;
        j["canonical"] = m.canonical();
        std::cout << j.dump(2) << "\n";
    } else
        std::cout << m.canonical();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Identification, simulation and estimation for two-level "
                 "hierarchical causal models"};
    app.require_subcommand(1);

    std::string file, out_dir = default_out_dir(), dot_dir, experiment, motif;
    bool as_json = false, dot = false;
    int n = 100, m = 100, seeds = 20, iterations = 50000, chains = 4;
    uint64_t seed = 1;
    double omega = 0.0, rho = 0.0;

    auto* identify = app.add_subcommand("identify", "Run the identification "
                                        "pipeline on an .hcm file");
    identify->add_option("file", file)->required();
    identify->add_flag("--json", as_json, "machine-readable output");
    identify->add_option("--dot-dir", dot_dir,
                         "write every intermediate graph as DOT");

    auto* collapse = app.add_subcommand("collapse",
                                        "Print the collapsed model");
    collapse->add_option("file", file)->required();
    collapse->add_flag("--dot", dot, "DOT output");
    collapse->add_flag("--json", as_json);

    auto* simulate = app.add_subcommand("simulate",
                                        "Sample a benchmark generative model");
    simulate->add_option("motif", motif, "confounder|interference|instrument")
        ->required();
    simulate->add_option("--n", n, "unit count");
    simulate->add_option("--m", m, "subunits per unit");
    simulate->add_option("--seed", seed)->required();
    simulate->add_option("--omega", omega, "confounding strength");
    simulate->add_option("--rho", rho, "interference strength");
    simulate->add_option("--out", out_dir, "output directory");

    auto* estimate = app.add_subcommand("estimate", "Simulate and run the "
                                        "matching effect estimator");
    estimate->add_option("motif", motif)->required();
    estimate->add_option("--n", n);
    estimate->add_option("--m", m);
    estimate->add_option("--seed", seed)->required();
    estimate->add_option("--omega", omega);
    estimate->add_option("--rho", rho);
    estimate->add_flag("--json", as_json);

    auto* reproduce = app.add_subcommand("reproduce",
                                         "Run a full experiment grid");
    reproduce->add_option("experiment", experiment,
                          "confounder|interference|instrument|eight-schools|"
                          "convergence")
        ->required();
    reproduce->add_option("--seeds", seeds, "seeds per grid cell");
    reproduce->add_option("--seed", seed, "base seed (eight-schools)");
    reproduce->add_option("--iterations", iterations);
    reproduce->add_option("--chains", chains);
    reproduce->add_option("--out", out_dir, "output directory");
    reproduce->add_option("--data", file, "schools CSV (eight-schools)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (identify->parsed()) return cmd_identify(file, as_json, dot_dir);
        if (collapse->parsed()) return cmd_collapse(file, dot, as_json);
        if (simulate->parsed()) {
            hcm::MechanismSpec sp = spec_for(motif, omega, rho);
            hcm::HierDataset d = hcm::sample_hcgm(sp, n, m, seed);
            std::string base = out_dir + "/" + motif + "_" +
                               std::to_string(seed);
            hcm::write_file(base + ".csv", d.to_csv());
            hcm::write_file(base + ".json", d.sidecar(sp.meta).dump(2));
            std::cout << base << ".csv\n" << base << ".json\n";
            return 0;
        }
        if (estimate->parsed()) {
            hcm::MechanismSpec sp = spec_for(motif, omega, rho);
            hcm::HierDataset d = hcm::sample_hcgm(sp, n, m, seed);
            json j;
            j["motif"] = motif;
            j["n"] = n;
            j["m"] = m;
            j["seed"] = seed;
            j["spec"] = sp.meta;
            if (motif == "confounder") {
                j["estimate"] = hcm::estimator_confounder(d, 1).value -
                                hcm::estimator_confounder(d, 0).value;
                j["truth"] = hcm::true_effect_confounder(omega, 1) -
                             hcm::true_effect_confounder(omega, 0);
                j["baseline"] = hcm::naive_regression_baseline(d, 1.0).value;
            } else if (motif == "interference") {
                j["estimate"] =
                    hcm::estimator_interference(d, 0.75, seed).value -
                    hcm::estimator_interference(d, 0.25, seed).value;
                j["truth"] = hcm::true_effect_interference(rho, 0.75) -
                             hcm::true_effect_interference(rho, 0.25);
            } else {
                j["estimate"] = hcm::estimator_instrument(d, 0.75).value -
                                hcm::estimator_instrument(d, 0.25).value;
                j["truth"] = hcm::true_effect_instrument(omega, 0.75) -
                             hcm::true_effect_instrument(omega, 0.25);
                j["baseline"] =
                    hcm::naive_instrument_baseline(d, 0.75).value -
                    hcm::naive_instrument_baseline(d, 0.25).value;
                j["classifier"] = "logistic with pairwise interactions";
            }
            std::cout << j.dump(2) << "\n";
            return 0;
        }
        if (reproduce->parsed()) {
            if (experiment == "eight-schools") {
                std::string path =
                    file.empty() ? std::string(HCM_DATA_DIR) +
                                       "/eight_schools.csv"
                                 : file;
                json j = hcm::reproduce_eight_schools(path, iterations,
                                                      chains, seed);
                hcm::write_file(out_dir + "/eight_schools_posterior.json",
                                j.dump(2));
                std::cout << j.dump(2) << "\n";
            } else if (experiment == "convergence") {
                auto pts = hcm::reproduce_convergence(500, 10);
                std::ostringstream csv;
                csv << "metric,m,value\n";
                for (const auto& p : pts)
                    csv << p.metric << ',' << p.m << ',' << p.value << '\n';
                hcm::write_file(out_dir + "/convergence.csv", csv.str());
                std::cout << csv.str();
            } else {
                auto rows = hcm::reproduce_grid(experiment, {10, 100, 1000},
                                                seeds);
                std::string csv = hcm::rows_to_csv(rows);
                hcm::write_file(out_dir + "/" + experiment + ".csv", csv);
                std::cout << out_dir << "/" << experiment << ".csv\n";
            }
            return 0;
        }
    } catch (const hcm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
