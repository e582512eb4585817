#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "corsvm/svm.hpp"

namespace corsvm {

enum class QuboWeighting { none, encoded };

/// Binary expansion of a dual coefficient: alpha = sum_k base^k * bit_k,
/// optionally scaled by the point weight. lambda is the quadratic penalty
/// on the label-balance constraint.
struct EncodingSpec {
    int base = 2;
    int bits = 3;
    double lambda = 1.0;
    QuboWeighting weighting = QuboWeighting::none;

    /// Largest encodable coefficient: (base^bits - 1)/(base - 1), or
    /// bits when base == 1.
    double alpha_max() const;
};

void to_json(nlohmann::json& j, const EncodingSpec& e);
void from_json(const nlohmann::json& j, EncodingSpec& e);

/// Upper-triangular QUBO matrix over M*bits binary variables. Bit k of
/// point i lives at flat index bits*i + k.
struct QuboProblem {
    std::size_t dim = 0;
    Eigen::MatrixXd q;  // dim x dim, strictly-lower entries exactly 0
    EncodingSpec encoding;
    KernelSpec kernel;
    std::string data_fingerprint;

    std::size_t index(std::size_t point, std::size_t bit) const {
        return static_cast<std::size_t>(encoding.bits) * point + bit;
    }
};

void to_json(nlohmann::json& j, const QuboProblem& p);
void from_json(const nlohmann::json& j, QuboProblem& p);

struct BinarySolution {
    std::vector<std::uint8_t> z;
    double energy = 0.0;
};

void to_json(nlohmann::json& j, const BinarySolution& s);
void from_json(const nlohmann::json& j, BinarySolution& s);

/// Geometric cooling schedule for the Metropolis solver.
struct AnnealSchedule {
    double t_start = 1.0;
    double t_end = 1e-3;
    int sweeps = 200;
    int restarts = 32;
    std::uint64_t seed = 0;
};

/// t_start = max |Q entry| (floored for all-zero problems), t_end three
/// decades below, 200 sweeps, 32 restarts.
AnnealSchedule default_schedule(const QuboProblem& q, std::uint64_t seed);

double alpha_from_bits(std::span<const std::uint8_t> bits, const EncodingSpec& enc,
                       double point_weight);

/// Builds Q so that for every assignment z,
///   energy(Q, z) = dual_objective(decoded alpha) + lambda * (sum_i alpha_i y_i)^2.
QuboProblem build_qubo(const Eigen::MatrixXd& points, const std::vector<int>& labels,
                       const Eigen::VectorXd& weights, const KernelSpec& spec,
                       const EncodingSpec& enc);

/// z' Q z under the upper-triangular convention (each unordered pair
/// counted once).
double energy(const QuboProblem& q, std::span<const std::uint8_t> z);

/// Energy change of flipping bit `b` in state z.
double flip_delta(const QuboProblem& q, std::span<const std::uint8_t> z, std::size_t b);

/// Global minimum by Gray-code enumeration with incremental energies.
/// Guarded at 26 bits. Ties resolve to the lexicographically smallest z.
/// `checkpoint`, when set, observes every visited (state, energy).
BinarySolution solve_exhaustive(
    const QuboProblem& q,
    const std::function<void(std::span<const std::uint8_t>, double)>& checkpoint = {});

/// Multi-restart single-bit-flip Metropolis under geometric cooling, each
/// restart seeded from (seed, restart index) and finished with a greedy
/// 1-flip descent. Best result across restarts by (energy, lexicographic z).
BinarySolution solve_anneal(const QuboProblem& q, const AnnealSchedule& sched);

/// Decodes a bit assignment back into an SvmModel. C is set to the
/// encoding's alpha_max so the per-point boxes hold by construction; the
/// balance constraint is not repaired, its residual stays visible through
/// constraint_residual.
SvmModel decode_model(const QuboProblem& q, const BinarySolution& sol,
                      const Eigen::MatrixXd& points, const std::vector<int>& labels,
                      const Eigen::VectorXd& weights, const KernelSpec& spec,
                      const EncodingSpec& enc);

/// |sum_i alpha_i y_i| of a model.
double constraint_residual(const SvmModel& model);

}  // namespace corsvm
