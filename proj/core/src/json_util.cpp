#include "corsvm/json_util.hpp"

#include "corsvm/errors.hpp"

namespace corsvm {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ParseError("expected an array of rows");
    const Eigen::Index n = static_cast<Eigen::Index>(j.size());
    if (n == 0) return Eigen::MatrixXd(0, 0);
    if (!j[0].is_array()) throw ParseError("expected nested row arrays");
    const Eigen::Index d = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d)
            throw ParseError("ragged row in matrix JSON");
        for (Eigen::Index k = 0; k < d; ++k)
            m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
    return m;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ParseError("expected an array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = j[static_cast<std::size_t>(i)].get<double>();
    return v;
}

}  // namespace corsvm
