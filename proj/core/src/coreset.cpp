#include "corsvm/coreset.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <set>
#include <string>
#include <thread>

#include "corsvm/errors.hpp"
#include "corsvm/json_util.hpp"
#include "corsvm/rng.hpp"

namespace corsvm {

namespace {

constexpr double kArmijo = 1e-4;

Eigen::VectorXd scatter(Eigen::Index n, const std::vector<std::size_t>& support,
                        const Eigen::VectorXd& values) {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < support.size(); ++i)
        full(static_cast<Eigen::Index>(support[i])) = values(static_cast<Eigen::Index>(i));
    return full;
}

// KL of the weighted fit against the (precomputed) full-data fit.
double kl_objective(const BinaryDataset& ds, const GaussianPrior& prior,
                    const GaussianApprox& full, const std::vector<std::size_t>& support,
                    const Eigen::VectorXd& values) {
    return gaussian_kl(laplace_fit(ds, scatter(ds.rows(), support, values), prior), full);
}

void validate_support(const BinaryDataset& ds, const std::vector<std::size_t>& support) {
    std::set<std::size_t> seen;
    for (const std::size_t idx : support) {
        if (idx >= static_cast<std::size_t>(ds.rows()))
            throw LookupError("coreset: index " + std::to_string(idx) + " out of range");
        if (!seen.insert(idx).second)
            throw Error("coreset: duplicate support index " + std::to_string(idx));
    }
}

int resolve_threads(int threads) {
    if (threads > 0) return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, count) across up to `threads` workers. Results
// land in caller-owned slots, so the schedule cannot affect the outcome.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    const int workers = std::min<int>(resolve_threads(threads),
                                      static_cast<int>(std::max<std::size_t>(count, 1)));
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (std::size_t i = static_cast<std::size_t>(w); i < count;
                     i += static_cast<std::size_t>(workers))
                    fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

Eigen::VectorXd clamp_nonnegative(Eigen::VectorXd w) {
    for (Eigen::Index i = 0; i < w.size(); ++i)
        if (w(i) <= 0.0) w(i) = 0.0;
    return w;
}

}  // namespace

void to_json(nlohmann::json& j, const CoresetSelection& sel) {
    nlohmann::json idx = nlohmann::json::array();
    for (const std::size_t i : sel.indices) idx.push_back(i);
    j = nlohmann::json{{"indices", std::move(idx)},
                       {"weights", vector_to_json(sel.weights)},
                       {"achieved_kl", sel.achieved_kl},
                       {"source_size", sel.source_size}};
}

void from_json(const nlohmann::json& j, CoresetSelection& sel) {
    sel.indices.clear();
    for (const auto& v : j.at("indices")) sel.indices.push_back(v.get<std::size_t>());
    sel.weights = vector_from_json(j.at("weights"));
    sel.achieved_kl = j.at("achieved_kl").get<double>();
    sel.source_size = j.at("source_size").get<std::size_t>();
    sel.step_kl.clear();
    if (sel.indices.size() != static_cast<std::size_t>(sel.weights.size()))
        throw ParseError("CoresetSelection: indices/weights length mismatch");
}

Eigen::VectorXd optimize_weights(const BinaryDataset& ds,
                                 const std::vector<std::size_t>& support,
                                 const Eigen::VectorXd& init, const GaussianPrior& prior,
                                 const CoresetConfig& cfg) {
    validate_support(ds, support);
    if (static_cast<std::size_t>(init.size()) != support.size())
        throw DimensionError("optimize_weights: init length does not match support");
    if (support.empty()) return Eigen::VectorXd(0);

    const GaussianApprox full =
        laplace_fit(ds, Eigen::VectorXd::Ones(ds.rows()), prior);
    const auto objective = [&](const Eigen::VectorXd& w) {
        return kl_objective(ds, prior, full, support, w);
    };

    Eigen::VectorXd w = clamp_nonnegative(init);
    double obj = objective(w);
    Eigen::VectorXd best_w = w;
    double best_obj = obj;

    const Eigen::Index m = w.size();
    Eigen::VectorXd grad(m);

    for (int iter = 0; iter < cfg.weight_opt_steps; ++iter) {
        // Central finite differences, one-sided against the w >= 0 wall.
        for (Eigen::Index jx = 0; jx < m; ++jx) {
            const double h = 1e-4 * std::max(std::abs(w(jx)), 1.0);
            Eigen::VectorXd probe = w;
            probe(jx) = w(jx) + h;
            const double up = objective(probe);
            if (w(jx) - h >= 0.0) {
                probe(jx) = w(jx) - h;
                grad(jx) = (up - objective(probe)) / (2.0 * h);
            } else {
                grad(jx) = (up - obj) / h;
            }
        }
        if (grad.cwiseAbs().maxCoeff() == 0.0) break;

        double t = 1.0;
        bool accepted = false;
        Eigen::VectorXd w_new;
        double obj_new = obj;
        while (t >= 1e-12) {
            w_new = clamp_nonnegative(w - t * grad);
            const double decrease_ref = grad.dot(w - w_new);
            if (decrease_ref <= 0.0) {
                t *= 0.5;
                continue;
            }
            obj_new = objective(w_new);
            if (obj_new <= obj - kArmijo * decrease_ref) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;

        const double rel_decrease = (obj - obj_new) / std::max(obj, 1e-300);
        w = std::move(w_new);
        obj = obj_new;
        if (obj < best_obj) {
            best_obj = obj;
            best_w = w;
        }
        if (rel_decrease < cfg.tol) break;
    }
    return best_w;
}

CoresetSelection build_coreset(const BinaryDataset& ds, const GaussianPrior& prior,
                               const CoresetConfig& cfg) {
    const auto n = static_cast<std::size_t>(ds.rows());
    const std::size_t m = cfg.size;
    if (m < 1) throw SizeError("build_coreset: coreset size must be at least 1");
    if (m > n)
        throw SizeError("build_coreset: coreset size " + std::to_string(m) + " exceeds " +
                        std::to_string(n) + " rows");

    const GaussianApprox full =
        laplace_fit(ds, Eigen::VectorXd::Ones(ds.rows()), prior);

    std::vector<std::size_t> selected;
    Eigen::VectorXd weights(0);
    double current_kl = kl_objective(ds, prior, full, selected, weights);

    std::vector<char> taken(n, 0);
    std::vector<double> step_kl;
    step_kl.reserve(m);

    for (std::size_t k = 0; k < m; ++k) {
        std::vector<std::size_t> candidates;
        candidates.reserve(n - k);
        for (std::size_t i = 0; i < n; ++i)
            if (!taken[i]) candidates.push_back(i);

        if (cfg.candidate_pool > 0 && candidates.size() > cfg.candidate_pool) {
            Rng rng(derive_seed(cfg.seed, 1000 + k));
            for (std::size_t i = 0; i < cfg.candidate_pool; ++i) {
                const std::size_t j = i + rng.next_index(candidates.size() - i);
                std::swap(candidates[i], candidates[j]);
            }
            candidates.resize(cfg.candidate_pool);
            std::sort(candidates.begin(), candidates.end());
        }

        // Provisional weight keeps the total pseudo-mass near N.
        const double trial_weight =
            static_cast<double>(n) / static_cast<double>(k + 1);
        std::vector<double> scores(candidates.size());
        parallel_for(candidates.size(), cfg.threads, [&](std::size_t ci) {
            std::vector<std::size_t> trial_support = selected;
            trial_support.push_back(candidates[ci]);
            Eigen::VectorXd trial_w(weights.size() + 1);
            trial_w.head(weights.size()) = weights;
            trial_w(weights.size()) = trial_weight;
            scores[ci] = kl_objective(ds, prior, full, trial_support, trial_w);
        });

        std::size_t best_ci = 0;
        for (std::size_t ci = 1; ci < scores.size(); ++ci)
            if (scores[ci] < scores[best_ci]) best_ci = ci;

        selected.push_back(candidates[best_ci]);
        taken[candidates[best_ci]] = 1;

        // Refine from the previous optimum; the new point starts at N/M.
        Eigen::VectorXd init_a(weights.size() + 1);
        init_a.head(weights.size()) = weights;
        init_a(weights.size()) = static_cast<double>(n) / static_cast<double>(m);
        Eigen::VectorXd w_a = optimize_weights(ds, selected, init_a, prior, cfg);
        double obj_a = kl_objective(ds, prior, full, selected, w_a);

        if (obj_a <= current_kl) {
            weights = std::move(w_a);
            current_kl = obj_a;
        } else {
            // The N/M start can score worse than keeping the new point
            // inactive; descending from weight 0 restores monotonicity.
            Eigen::VectorXd init_b(weights.size() + 1);
            init_b.head(weights.size()) = weights;
            init_b(weights.size()) = 0.0;
            Eigen::VectorXd w_b = optimize_weights(ds, selected, init_b, prior, cfg);
            const double obj_b = kl_objective(ds, prior, full, selected, w_b);
            if (obj_a <= obj_b) {
                weights = std::move(w_a);
                current_kl = obj_a;
            } else {
                weights = std::move(w_b);
                current_kl = obj_b;
            }
        }

        if (k + 1 == m && m == n) {
            // Full support: all-ones reproduces the full posterior exactly.
            Eigen::VectorXd w_c = optimize_weights(
                ds, selected, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m)), prior, cfg);
            const double obj_c = kl_objective(ds, prior, full, selected, w_c);
            if (obj_c < current_kl) {
                weights = std::move(w_c);
                current_kl = obj_c;
            }
        }

        step_kl.push_back(current_kl);
    }

    CoresetSelection sel;
    sel.indices = std::move(selected);
    sel.weights = std::move(weights);
    sel.achieved_kl = current_kl;
    sel.source_size = n;
    sel.step_kl = std::move(step_kl);
    return sel;
}

double coreset_kl(const BinaryDataset& ds, const CoresetSelection& sel,
                  const GaussianPrior& prior) {
    validate_support(ds, sel.indices);
    if (sel.indices.size() != static_cast<std::size_t>(sel.weights.size()))
        throw DimensionError("coreset_kl: indices/weights length mismatch");
    const GaussianApprox full =
        laplace_fit(ds, Eigen::VectorXd::Ones(ds.rows()), prior);
    return kl_objective(ds, prior, full, sel.indices, sel.weights);
}

}  // namespace corsvm
