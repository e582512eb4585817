#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace corsvm {

/// Labeled feature matrix as loaded from disk. Rows are samples, labels
/// are positive integer class ids.
struct RawDataset {
    Eigen::MatrixXd features;                 // N x D
    std::vector<int> labels;                  // N class ids
    std::map<int, std::string> class_names;   // id -> display name

    Eigen::Index rows() const { return features.rows(); }
    Eigen::Index dims() const { return features.cols(); }
};

/// Two-class subset with labels mapped to {-1, +1}. pair.first is the
/// class id mapped to +1, pair.second the one mapped to -1.
struct BinaryDataset {
    Eigen::MatrixXd features;  // N x d
    std::vector<int> labels;   // values in {-1, +1}
    std::pair<int, int> pair{0, 0};

    Eigen::Index rows() const { return features.rows(); }
    Eigen::Index dims() const { return features.cols(); }
};

/// Column standardization + projection fitted on one dataset.
/// apply(x) = components * ((x - column_means) / column_scales).
struct PcaTransform {
    Eigen::VectorXd column_means;        // D
    Eigen::VectorXd column_scales;       // D, all > 0
    Eigen::MatrixXd components;          // d x D, rows orthonormal
    Eigen::VectorXd explained_variance;  // d, non-increasing
};

void to_json(nlohmann::json& j, const PcaTransform& t);
void from_json(const nlohmann::json& j, PcaTransform& t);

/// Loads the CSV schema `f_0,...,f_{D-1},label`. Parse failures name the
/// offending file line (header is line 1).
RawDataset load_csv(const std::filesystem::path& path);

/// Same schema but requires labels in {-1, +1}; used to score exported
/// models against already-reduced data.
BinaryDataset load_binary_csv(const std::filesystem::path& path);

/// Writes the same schema with 17 significant digits so that values
/// round-trip bit-identically through load_csv.
void write_csv(const std::filesystem::path& path, const RawDataset& ds);
void write_csv(const std::filesystem::path& path, const BinaryDataset& ds);

/// Per-column z-scoring with the n-1 (sample) standard deviation, so each
/// non-constant output column has mean 0 and sample sd 1. Constant columns
/// become all-zero with scale 1. The returned transform carries means and
/// scales; components are left empty for pca_reduce to fill in.
std::pair<RawDataset, PcaTransform> standardize(const RawDataset& ds);

/// Projects onto the top-d eigenvectors of the sample covariance
/// (cyclic-Jacobi eigendecomposition). `partial` is the transform returned
/// by standardize; means/scales compose into the result so that
/// apply(transform, raw_row) reproduces the training projection.
std::pair<RawDataset, PcaTransform> pca_reduce(const RawDataset& ds, int d,
                                               const PcaTransform& partial);
std::pair<RawDataset, PcaTransform> pca_reduce(const RawDataset& ds, int d);

// Same operations for two-class data; the pipeline standardizes after
// pair extraction so the fitted parameters are per pair.
std::pair<BinaryDataset, PcaTransform> standardize(const BinaryDataset& ds);
std::pair<BinaryDataset, PcaTransform> pca_reduce(const BinaryDataset& ds, int d,
                                                  const PcaTransform& partial);

Eigen::VectorXd apply(const PcaTransform& t, const Eigen::VectorXd& x);
Eigen::MatrixXd apply(const PcaTransform& t, const Eigen::MatrixXd& rows);

/// Keeps rows labeled a or b (order preserved); a maps to +1, b to -1.
BinaryDataset select_pair(const RawDataset& ds, int a, int b);

struct SplitResult {
    BinaryDataset train;
    BinaryDataset test;
};

/// Deterministic stratified split. Per label, round(fraction * count) rows
/// go to the test side, clamped so both sides stay non-empty when the
/// label has at least two rows. Row order within each side is preserved.
SplitResult split(const BinaryDataset& ds, double test_fraction, std::uint64_t seed);

}  // namespace corsvm
