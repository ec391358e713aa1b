#include <doctest.h>

#include "hcm/bayes.hpp"
#include "hcm/dataset.hpp"
#include "hcm/graph.hpp"

#include <cmath>
#include <cstdio>

using namespace hcm;

namespace {

std::string temp_csv(const char* name, const std::string& body) {
    std::string path = std::string("/tmp/") + name;
    write_file(path, body);
    return path;
}

} // namespace

TEST_CASE("loads the bundled school summaries") {
    auto rows = load_schools_csv(std::string(HCM_DATA_DIR) +
                                 "/eight_schools.csv");
    REQUIRE(rows.size() == 8);
    CHECK(rows[0].school == "A");
    CHECK(rows[0].mu_hat == doctest::Approx(28.0));
    CHECK(rows[0].sigma == doctest::Approx(15.0));
    CHECK(rows[7].school == "H");
    CHECK(rows[7].sigma == doctest::Approx(18.0));
}

TEST_CASE("csv loader rejects bad rows") {
    auto bad_sigma = temp_csv("hcm_bad_sigma.csv",
                              "school,mu_hat,sigma\nA,1.0,0.0\n");
    CHECK_THROWS_WITH_AS(load_schools_csv(bad_sigma),
                         doctest::Contains("DomainError"), Error);
    auto bad_row = temp_csv("hcm_bad_row.csv",
                            "school,mu_hat,sigma\nA,one,2.0\n");
    CHECK_THROWS_WITH_AS(load_schools_csv(bad_row),
                         doctest::Contains("SyntaxError"), Error);
    std::remove(bad_sigma.c_str());
    std::remove(bad_row.c_str());
}

TEST_CASE("sampler guards its arguments") {
    std::vector<SchoolSummary> data{{"A", 1.0, 1.0}, {"B", 2.0, 1.0}};
    CHECK_THROWS_WITH_AS(mh_sample(data, 500, 2, 1),
                         doctest::Contains("DomainError"), Error);
    CHECK_THROWS_AS(mh_sample(data, 10000, 1, 1), Error);
    data.push_back({"C", 0.0, -1.0});
    CHECK_THROWS_AS(mh_sample(data, 10000, 2, 1), Error);
}

TEST_CASE("chains are reproducible per seed") {
    std::vector<SchoolSummary> data{{"A", 2.0, 1.0}, {"B", -1.0, 2.0}};
    auto a = mh_sample(data, 10000, 2, 42, false);
    auto b = mh_sample(data, 10000, 2, 42, false);
    CHECK(a.draws == b.draws);
    auto c = mh_sample(data, 10000, 2, 43, false);
    CHECK(a.draws[0][0] != c.draws[0][0]);
    CHECK(a.params.size() == 4); // nu, log_tau, mu_A, mu_B
    CHECK(a.params[0] == "nu");
}

TEST_CASE("no data: the population effect reproduces its prior") {
    auto chains = mh_sample({}, 40000, 2, 7, false);
    auto s = posterior_ate(chains);
    // nu ~ Normal(0, 5): generous bands for MCMC error.
    CHECK(std::abs(s.mean) < 0.6);
    CHECK(s.sd == doctest::Approx(5.0).epsilon(0.15));
    CHECK(s.p5 == doctest::Approx(-8.22).epsilon(0.12));
    CHECK(s.p95 == doctest::Approx(8.22).epsilon(0.12));
}

TEST_CASE("concordant precise schools pin the population effect") {
    std::vector<SchoolSummary> data;
    for (int i = 0; i < 8; ++i)
        data.push_back({std::string(1, char('A' + i)), 5.0, 0.5});
    auto chains = mh_sample(data, 20000, 2, 11, false);
    auto s = posterior_ate(chains);
    CHECK(std::abs(s.mean - 5.0) < 0.4);
    CHECK(s.sd < 1.0);
}

TEST_CASE("one vague school leaves the prior nearly untouched") {
    std::vector<SchoolSummary> data{{"A", 20.0, 100.0}};
    auto chains = mh_sample(data, 40000, 2, 13, false);
    auto s = posterior_ate(chains);
    CHECK(std::abs(s.mean) < 1.0);
    CHECK(s.sd > 3.5);
}

TEST_CASE("acceptance rates sit in the adapted window") {
    std::vector<SchoolSummary> data{{"A", 2.0, 1.0}, {"B", -1.0, 2.0},
                                    {"C", 0.5, 1.5}};
    auto chains = mh_sample(data, 20000, 2, 3, false);
    for (size_t p = 0; p < chains.params.size(); ++p) {
        INFO(chains.params[p]);
        CHECK(chains.acceptance[p] > 0.1);
        CHECK(chains.acceptance[p] < 0.6);
    }
}

TEST_CASE("summary csv has one row per retained draw") {
    std::vector<SchoolSummary> data{{"A", 2.0, 1.0}, {"B", -1.0, 2.0}};
    auto chains = mh_sample(data, 10000, 2, 5, false);
    std::string csv = chains_to_csv(chains);
    CHECK(csv.rfind("chain,iter,nu,log_tau", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 10000);
}
