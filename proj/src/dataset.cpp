#include "hcm/dataset.hpp"

#include "hcm/graph.hpp"

#include <fstream>
#include <sstream>

namespace hcm {

int HierDataset::add_unit_col(const std::string& name, bool observed) {
    unit_names.push_back(name);
    unit_observed.push_back(observed);
    unit_cols.emplace_back(static_cast<size_t>(n), 0.0);
    return static_cast<int>(unit_cols.size()) - 1;
}

int HierDataset::add_sub_col(const std::string& name, bool observed) {
    sub_names.push_back(name);
    sub_observed.push_back(observed);
    sub_cols.emplace_back(static_cast<size_t>(n) * m, 0.0);
    return static_cast<int>(sub_cols.size()) - 1;
}

int HierDataset::unit_col(const std::string& name) const {
    for (size_t k = 0; k < unit_names.size(); ++k)
        if (unit_names[k] == name) return static_cast<int>(k);
    return -1;
}

int HierDataset::sub_col(const std::string& name) const {
    for (size_t k = 0; k < sub_names.size(); ++k)
        if (sub_names[k] == name) return static_cast<int>(k);
    return -1;
}

double HierDataset::unit_mean_sub(int col, int i) const {
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += sub(col, i, j);
    return m > 0 ? s / m : 0.0;
}

std::string HierDataset::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "unit,subunit";
    for (size_t k = 0; k < unit_names.size(); ++k)
        if (unit_observed[k]) out << ',' << unit_names[k];
    for (size_t k = 0; k < sub_names.size(); ++k)
        if (sub_observed[k]) out << ',' << sub_names[k];
    out << '\n';
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            out << i << ',' << j;
            for (size_t k = 0; k < unit_names.size(); ++k)
                if (unit_observed[k]) out << ',' << unit_cols[k][i];
            for (size_t k = 0; k < sub_names.size(); ++k)
                if (sub_observed[k]) out << ',' << sub_cols[k][i * m + j];
            out << '\n';
        }
    }
    return out.str();
}

nlohmann::json HierDataset::sidecar(const nlohmann::json& spec_meta) const {
    nlohmann::json j;
    j["n"] = n;
    j["m"] = m;
    j["seed"] = seed;
    j["spec"] = spec_meta;
    return j;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("EvalError", "cannot open " + path + " for writing");
    f << content;
}

} // namespace hcm
