#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace hcm {

// Rectangular two-level dataset: n units, m subunit rows per unit. Unit
// columns have length n; subunit columns have length n*m (row j of unit i at
// index i*m + j). Hidden columns hold latent draws (per-unit q-parameters)
// and are kept for oracle checks but excluded from CSV output.
struct HierDataset {
    int n = 0;
    int m = 0;
    uint64_t seed = 0;

    std::vector<std::string> unit_names;
    std::vector<bool> unit_observed;
    std::vector<std::vector<double>> unit_cols; // each length n

    std::vector<std::string> sub_names;
    std::vector<bool> sub_observed;
    std::vector<std::vector<double>> sub_cols; // each length n*m

    int add_unit_col(const std::string& name, bool observed);
    int add_sub_col(const std::string& name, bool observed);
    int unit_col(const std::string& name) const;  // -1 when absent
    int sub_col(const std::string& name) const;

    double sub(int col, int i, int j) const { return sub_cols[col][i * m + j]; }
    double& sub(int col, int i, int j) { return sub_cols[col][i * m + j]; }

    double unit_mean_sub(int col, int i) const;

    // Observed columns only, one row per subunit: unit,subunit,<unit
    // cols...>,<sub cols...> with unit values repeated per row.
    std::string to_csv() const;
    nlohmann::json sidecar(const nlohmann::json& spec_meta) const;
};

void write_file(const std::string& path, const std::string& content);

} // namespace hcm
