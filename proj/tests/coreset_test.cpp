#include <doctest.h>

#include <cmath>
#include <set>

#include "corsvm/coreset.hpp"
#include "corsvm/errors.hpp"
#include "corsvm/rng.hpp"
#include "corsvm/synthetic.hpp"
#include "test_helpers.hpp"

using namespace corsvm;

namespace {

CoresetSelection manual_selection(std::vector<std::size_t> indices, Eigen::VectorXd weights,
                                  std::size_t source_size) {
    CoresetSelection sel;
    sel.indices = std::move(indices);
    sel.weights = std::move(weights);
    sel.source_size = source_size;
    return sel;
}

BinaryDataset blob_pair(std::size_t per_class, double separation, std::uint64_t seed) {
    return select_pair(make_blobs(per_class, 2, 2, separation, 1.0, seed), 1, 2);
}

}  // namespace

TEST_CASE("optimize_weights keeps the all-ones optimum on full support") {
    const BinaryDataset ds = blob_pair(5, 2.0, 41);
    const auto n = static_cast<std::size_t>(ds.rows());
    std::vector<std::size_t> support(n);
    for (std::size_t i = 0; i < n; ++i) support[i] = i;

    CoresetConfig cfg;
    const GaussianPrior prior{1.0};
    const Eigen::VectorXd w =
        optimize_weights(ds, support, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)),
                         prior, cfg);
    CHECK(coreset_kl(ds, manual_selection(support, w, n), prior) <= 1e-6);
}

TEST_CASE("optimize_weights on an empty support leaves the prior objective") {
    const BinaryDataset ds = blob_pair(4, 2.0, 42);
    CoresetConfig cfg;
    const GaussianPrior prior{1.0};
    const Eigen::VectorXd w = optimize_weights(ds, {}, Eigen::VectorXd(0), prior, cfg);
    CHECK(w.size() == 0);

    const double objective = coreset_kl(ds, manual_selection({}, Eigen::VectorXd(0),
                                                             static_cast<std::size_t>(ds.rows())),
                                        prior);
    const GaussianApprox prior_fit =
        laplace_fit(ds, Eigen::VectorXd::Zero(ds.rows()), prior);
    const GaussianApprox full_fit = laplace_fit(ds, Eigen::VectorXd::Ones(ds.rows()), prior);
    CHECK(objective == gaussian_kl(prior_fit, full_fit));
}

TEST_CASE("optimize_weights never scores worse than its warm start") {
    const BinaryDataset ds = blob_pair(5, 1.5, 43);
    const std::vector<std::size_t> support{1, 4, 7};
    const Eigen::VectorXd init = Eigen::VectorXd::Ones(3);
    CoresetConfig cfg;
    const GaussianPrior prior{1.0};

    const auto n = static_cast<std::size_t>(ds.rows());
    const double before = coreset_kl(ds, manual_selection(support, init, n), prior);
    const Eigen::VectorXd w = optimize_weights(ds, support, init, prior, cfg);
    const double after = coreset_kl(ds, manual_selection(support, w, n), prior);
    CHECK(after <= before + 1e-12);
}

TEST_CASE("optimize_weights validates support and init") {
    const BinaryDataset ds = blob_pair(3, 1.5, 44);
    CoresetConfig cfg;
    const GaussianPrior prior{1.0};
    CHECK_THROWS_AS(optimize_weights(ds, {99}, Eigen::VectorXd::Ones(1), prior, cfg),
                    LookupError);
    CHECK_THROWS_AS(optimize_weights(ds, {0, 0}, Eigen::VectorXd::Ones(2), prior, cfg), Error);
    CHECK_THROWS_AS(optimize_weights(ds, {0, 1}, Eigen::VectorXd::Ones(3), prior, cfg),
                    DimensionError);
}

TEST_CASE("build_coreset at full size reaches a near-zero objective") {
    const BinaryDataset ds = blob_pair(4, 2.0, 45);
    CoresetConfig cfg;
    cfg.size = static_cast<std::size_t>(ds.rows());
    const CoresetSelection sel = build_coreset(ds, GaussianPrior{1.0}, cfg);
    CHECK(sel.achieved_kl <= 1e-6);
}

TEST_CASE("build_coreset breaks score ties toward the lowest index") {
    BinaryDataset ds;
    ds.features.resize(2, 1);
    ds.features << 1.3, -1.3;
    ds.labels = {+1, -1};
    ds.pair = {1, 2};

    CoresetConfig cfg;
    cfg.size = 1;
    const CoresetSelection sel = build_coreset(ds, GaussianPrior{1.0}, cfg);
    REQUIRE(sel.indices.size() == 1);
    CHECK(sel.indices[0] == 0);
}

TEST_CASE("greedy coreset beats uniform random subsets of the same size") {
    const BinaryDataset ds = blob_pair(15, 2.0, 46);  // N = 30
    const auto n = static_cast<std::size_t>(ds.rows());
    const std::size_t m = 6;
    const GaussianPrior prior{1.0};

    CoresetConfig cfg;
    cfg.size = m;
    const CoresetSelection greedy = build_coreset(ds, prior, cfg);

    double total = 0.0;
    for (std::uint64_t r = 0; r < 10; ++r) {
        Rng rng(derive_seed(900, r));
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t j = i + rng.next_index(n - i);
            std::swap(pool[i], pool[j]);
        }
        pool.resize(m);
        const Eigen::VectorXd w = Eigen::VectorXd::Constant(
            static_cast<Eigen::Index>(m), static_cast<double>(n) / static_cast<double>(m));
        total += coreset_kl(ds, manual_selection(pool, w, n), prior);
    }
    CHECK(greedy.achieved_kl <= total / 10.0);
}

TEST_CASE("coreset_kl of the untouched dataset is zero") {
    const BinaryDataset ds = blob_pair(5, 2.0, 47);
    const auto n = static_cast<std::size_t>(ds.rows());
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    const double kl = coreset_kl(
        ds, manual_selection(all, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)), n),
        GaussianPrior{1.0});
    CHECK(std::abs(kl) <= 1e-9);
}

TEST_CASE("scaling the weights of a proper subset changes the divergence") {
    const BinaryDataset ds = blob_pair(5, 1.5, 48);
    CoresetConfig cfg;
    cfg.size = 3;
    const GaussianPrior prior{1.0};
    const CoresetSelection sel = build_coreset(ds, prior, cfg);

    const double kl1 = coreset_kl(ds, sel, prior);
    CoresetSelection doubled = sel;
    doubled.weights = 2.0 * sel.weights;
    const double kl2 = coreset_kl(ds, doubled, prior);
    CHECK(std::abs(kl1 - kl2) > 0.0);
}

TEST_CASE("build_coreset is deterministic bit for bit") {
    const BinaryDataset ds = blob_pair(8, 1.5, 49);
    CoresetConfig cfg;
    cfg.size = 4;
    cfg.seed = 1234;
    const GaussianPrior prior{1.0};

    const CoresetSelection a = build_coreset(ds, prior, cfg);
    const CoresetSelection b = build_coreset(ds, prior, cfg);
    CHECK(a.indices == b.indices);
    CHECK(a.weights == b.weights);
    CHECK(a.achieved_kl == b.achieved_kl);

    // Parallel candidate scoring must not change the outcome.
    CoresetConfig threaded = cfg;
    threaded.threads = 4;
    const CoresetSelection c = build_coreset(ds, prior, threaded);
    CHECK(c.indices == a.indices);
    CHECK(c.weights == a.weights);
}

TEST_CASE("greedy runs never repeat an index and never go below zero weight") {
    const BinaryDataset ds = blob_pair(8, 1.5, 50);
    CoresetConfig cfg;
    cfg.size = 6;
    const CoresetSelection sel = build_coreset(ds, GaussianPrior{1.0}, cfg);

    const std::set<std::size_t> unique(sel.indices.begin(), sel.indices.end());
    CHECK(unique.size() == sel.indices.size());
    for (Eigen::Index i = 0; i < sel.weights.size(); ++i) {
        CHECK(sel.weights(i) >= 0.0);
        CHECK_FALSE(std::signbit(sel.weights(i)));
    }

    REQUIRE(sel.step_kl.size() == 6);
    for (std::size_t k = 1; k < sel.step_kl.size(); ++k)
        CHECK(sel.step_kl[k] <= sel.step_kl[k - 1] + 1e-12);
    CHECK(sel.achieved_kl == sel.step_kl.back());
}

TEST_CASE("achieved_kl matches a from-scratch recomputation") {
    const BinaryDataset ds = blob_pair(6, 1.5, 51);
    CoresetConfig cfg;
    cfg.size = 3;
    const GaussianPrior prior{1.0};
    const CoresetSelection sel = build_coreset(ds, prior, cfg);
    CHECK(std::abs(coreset_kl(ds, sel, prior) - sel.achieved_kl) <= 1e-9);
}

TEST_CASE("candidate pool subsampling stays deterministic") {
    const BinaryDataset ds = blob_pair(10, 1.5, 52);
    CoresetConfig cfg;
    cfg.size = 3;
    cfg.candidate_pool = 5;
    cfg.seed = 7;
    const GaussianPrior prior{1.0};
    const CoresetSelection a = build_coreset(ds, prior, cfg);
    const CoresetSelection b = build_coreset(ds, prior, cfg);
    CHECK(a.indices == b.indices);
    CHECK(a.weights == b.weights);
}

TEST_CASE("build_coreset rejects impossible sizes") {
    const BinaryDataset ds = blob_pair(3, 1.5, 53);
    CoresetConfig cfg;
    cfg.size = static_cast<std::size_t>(ds.rows()) + 1;
    CHECK_THROWS_AS(build_coreset(ds, GaussianPrior{1.0}, cfg), SizeError);
    cfg.size = 0;
    CHECK_THROWS_AS(build_coreset(ds, GaussianPrior{1.0}, cfg), SizeError);
}

TEST_CASE("coreset_kl validates the selection") {
    const BinaryDataset ds = blob_pair(3, 1.5, 54);
    CHECK_THROWS_AS(
        coreset_kl(ds, manual_selection({17}, Eigen::VectorXd::Ones(1), 6), GaussianPrior{1.0}),
        LookupError);
}

TEST_CASE("CoresetSelection serializes losslessly") {
    CoresetSelection sel;
    sel.indices = {3, 0, 5};
    sel.weights.resize(3);
    sel.weights << 1.25, 0.0, 7.5;
    sel.achieved_kl = 0.125;
    sel.source_size = 9;

    const nlohmann::json j = sel;
    const CoresetSelection back = j.get<CoresetSelection>();
    CHECK(back.indices == sel.indices);
    CHECK(back.weights == sel.weights);
    CHECK(back.achieved_kl == sel.achieved_kl);
    CHECK(back.source_size == sel.source_size);
}
