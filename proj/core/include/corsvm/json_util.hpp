#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace corsvm {

// Matrices serialize as nested row arrays, vectors as flat arrays.

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);

}  // namespace corsvm
