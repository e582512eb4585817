#include "corsvm/evalrep.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "corsvm/errors.hpp"
#include "corsvm/io.hpp"
#include "corsvm/rng.hpp"

namespace corsvm {

namespace {

std::string pair_text(const std::pair<int, int>& p) {
    return "{" + std::to_string(p.first) + ", " + std::to_string(p.second) + "}";
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::string render_block(const std::vector<std::string>& headers,
                         const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(headers.size());
    for (std::size_t c = 0; c < headers.size(); ++c) width[c] = headers[c].size();
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());

    std::string out;
    const auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            out += cells[c];
            if (c + 1 < cells.size()) out += std::string(width[c] - cells[c].size() + 2, ' ');
        }
        out += '\n';
    };
    emit(headers);
    for (const auto& row : rows) emit(row);
    return out;
}

std::size_t resolve_coreset_size(double requested, std::size_t train_rows) {
    if (requested >= 1.0) return static_cast<std::size_t>(std::llround(requested));
    if (requested > 0.0) {
        const auto m = static_cast<std::size_t>(
            std::llround(requested * static_cast<double>(train_rows)));
        return std::max<std::size_t>(m, 1);
    }
    throw Error("coreset size must be positive");
}

template <typename Fn>
auto stage(const std::pair<int, int>& pair, const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw Error("pair " + pair_text(pair) + ", stage " + name + ": " + e.what());
    }
}

}  // namespace

void to_json(nlohmann::json& j, const PairResult& r) {
    j = nlohmann::json{{"pair", {r.pair.first, r.pair.second}},
                       {"data_size", r.data_size},
                       {"coreset_size", r.coreset_size},
                       {"kl", r.kl},
                       {"qacc", r.qacc},
                       {"cacc", r.cacc},
                       {"qubo_residual", r.qubo_residual}};
}

void from_json(const nlohmann::json& j, PairResult& r) {
    r.pair = {j.at("pair").at(0).get<int>(), j.at("pair").at(1).get<int>()};
    r.data_size = j.at("data_size").get<std::size_t>();
    r.coreset_size = j.at("coreset_size").get<std::size_t>();
    r.kl = j.at("kl").get<double>();
    r.qacc = j.at("qacc").get<double>();
    r.cacc = j.at("cacc").get<double>();
    r.qubo_residual = j.at("qubo_residual").get<double>();
}

ExperimentConfig parse_experiment_config(const nlohmann::json& doc) {
    ExperimentConfig cfg;

    const nlohmann::json dataset = doc.value("dataset", nlohmann::json::object());
    cfg.dataset_path = dataset.value("path", std::string{});
    if (dataset.contains("pairs")) {
        for (const auto& p : dataset.at("pairs"))
            cfg.pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    } else if (dataset.contains("pair")) {
        const auto& p = dataset.at("pair");
        cfg.pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    }
    cfg.pca_dim = dataset.value("pca_dim", 2);
    cfg.test_fraction = dataset.value("test_fraction", 0.2);

    cfg.prior_variance =
        doc.value("prior", nlohmann::json::object()).value("variance", 1.0);

    const nlohmann::json coreset = doc.value("coreset", nlohmann::json::object());
    cfg.coreset_size = coreset.value("size", 20.0);
    cfg.weight_opt_steps = coreset.value("max_steps", 200);
    cfg.coreset_tol = coreset.value("tol", 1e-7);
    if (coreset.contains("pool")) {
        const auto& pool = coreset.at("pool");
        if (pool.is_string()) {
            if (pool.get<std::string>() != "all")
                throw ParseError("coreset.pool must be \"all\" or an integer");
            cfg.candidate_pool = 0;
        } else {
            cfg.candidate_pool = pool.get<std::size_t>();
        }
    }

    const nlohmann::json svm = doc.value("svm", nlohmann::json::object());
    cfg.C = svm.value("C", 7.0);
    const std::string kind = svm.value("kernel", "rbf");
    if (kind == "rbf")
        cfg.kernel.kind = KernelKind::rbf;
    else if (kind == "linear")
        cfg.kernel.kind = KernelKind::linear;
    else
        throw ParseError("svm.kernel must be \"rbf\" or \"linear\"");
    if (svm.contains("gamma")) {
        const auto& g = svm.at("gamma");
        if (g.is_string()) {
            if (g.get<std::string>() != "median")
                throw ParseError("svm.gamma must be a number or \"median\"");
        } else {
            cfg.gamma = g.get<double>();
        }
    }

    const nlohmann::json qubo = doc.value("qubo", nlohmann::json::object());
    cfg.encoding = qubo.get<EncodingSpec>();
    const std::string solver = qubo.value("solver", "anneal");
    if (solver == "exhaustive")
        cfg.exhaustive = true;
    else if (solver != "anneal")
        throw ParseError("qubo.solver must be \"anneal\" or \"exhaustive\"");

    const nlohmann::json anneal = doc.value("anneal", nlohmann::json::object());
    cfg.sweeps = anneal.value("sweeps", 200);
    cfg.restarts = anneal.value("restarts", 32);
    if (anneal.contains("t_start") && anneal.at("t_start").is_number())
        cfg.t_start = anneal.at("t_start").get<double>();
    if (anneal.contains("t_end") && anneal.at("t_end").is_number())
        cfg.t_end = anneal.at("t_end").get<double>();

    cfg.seed = doc.value("seed", static_cast<std::uint64_t>(0));
    cfg.threads = doc.value("threads", 1);
    return cfg;
}

double accuracy(const SvmModel& model, const BinaryDataset& test) {
    if (test.rows() == 0) throw SizeError("accuracy: empty test set");
    Eigen::Index correct = 0;
    for (Eigen::Index i = 0; i < test.rows(); ++i) {
        const Decision d = decide(model, test.features.row(i).transpose());
        if (d.label == test.labels[static_cast<std::size_t>(i)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test.rows());
}

PairPipeline run_pair_pipeline(const ExperimentConfig& cfg, const RawDataset& ds,
                               std::size_t pair_index) {
    if (pair_index >= cfg.pairs.size())
        throw LookupError("run_pair_pipeline: pair index out of range");
    const auto pair = cfg.pairs[pair_index];
    const GaussianPrior prior{cfg.prior_variance};

    PairPipeline p;
    p.pair = pair;

    BinaryDataset selected =
        stage(pair, "select_pair", [&] { return select_pair(ds, pair.first, pair.second); });
    p.data_size = static_cast<std::size_t>(selected.rows());

    BinaryDataset reduced = stage(pair, "pca_reduce", [&] {
        auto [standardized, partial] = standardize(selected);
        return pca_reduce(standardized, cfg.pca_dim, partial).first;
    });
    SplitResult parts = stage(pair, "split", [&] {
        return split(reduced, cfg.test_fraction, derive_seed(cfg.seed, pair_index, 1));
    });
    p.train = std::move(parts.train);
    p.test = std::move(parts.test);

    p.selection = stage(pair, "coreset", [&] {
        CoresetConfig ccfg;
        ccfg.size =
            resolve_coreset_size(cfg.coreset_size, static_cast<std::size_t>(p.train.rows()));
        ccfg.weight_opt_steps = cfg.weight_opt_steps;
        ccfg.tol = cfg.coreset_tol;
        ccfg.candidate_pool = cfg.candidate_pool;
        ccfg.seed = derive_seed(cfg.seed, pair_index, 2);
        ccfg.threads = cfg.threads;
        return build_coreset(p.train, prior, ccfg);
    });

    p.core_points.resize(static_cast<Eigen::Index>(p.selection.indices.size()), p.train.dims());
    p.core_labels.resize(p.selection.indices.size());
    for (std::size_t i = 0; i < p.selection.indices.size(); ++i) {
        p.core_points.row(static_cast<Eigen::Index>(i)) =
            p.train.features.row(static_cast<Eigen::Index>(p.selection.indices[i]));
        p.core_labels[i] = p.train.labels[p.selection.indices[i]];
    }

    p.kernel = cfg.kernel;
    if (p.kernel.kind == KernelKind::rbf)
        p.kernel.gamma = cfg.gamma ? *cfg.gamma : median_heuristic_gamma(p.train.features);
    return p;
}

AnnealSchedule experiment_schedule(const ExperimentConfig& cfg, const QuboProblem& problem,
                                   std::size_t pair_index) {
    AnnealSchedule sched = default_schedule(problem, derive_seed(cfg.seed, pair_index, 3));
    sched.sweeps = cfg.sweeps;
    sched.restarts = cfg.restarts;
    if (cfg.t_start) sched.t_start = *cfg.t_start;
    if (cfg.t_end) sched.t_end = *cfg.t_end;
    return sched;
}

std::vector<PairResult> run_experiment(const ExperimentConfig& cfg, const RawDataset& ds) {
    if (cfg.pairs.empty()) throw Error("run_experiment: no class pairs configured");

    std::vector<PairResult> results;
    results.reserve(cfg.pairs.size());

    for (std::size_t idx = 0; idx < cfg.pairs.size(); ++idx) {
        const PairPipeline p = run_pair_pipeline(cfg, ds, idx);
        const auto pair = p.pair;

        const SvmModel classical = stage(pair, "train_weighted_svm", [&] {
            return train_weighted_svm(p.core_points, p.core_labels, p.selection.weights, cfg.C,
                                      p.kernel);
        });

        const QuboProblem problem = stage(pair, "build_qubo", [&] {
            return build_qubo(p.core_points, p.core_labels, p.selection.weights, p.kernel,
                              cfg.encoding);
        });
        const BinarySolution solution = stage(pair, "solve_qubo", [&] {
            if (cfg.exhaustive) return solve_exhaustive(problem);
            return solve_anneal(problem, experiment_schedule(cfg, problem, idx));
        });
        const SvmModel quantum = stage(pair, "decode_model", [&] {
            return decode_model(problem, solution, p.core_points, p.core_labels,
                                p.selection.weights, p.kernel, cfg.encoding);
        });

        PairResult r;
        r.pair = pair;
        r.data_size = p.data_size;
        r.coreset_size = p.selection.indices.size();
        r.kl = p.selection.achieved_kl;
        r.qacc = stage(pair, "accuracy", [&] { return accuracy(quantum, p.test); });
        r.cacc = stage(pair, "accuracy", [&] { return accuracy(classical, p.test); });
        r.qubo_residual = constraint_residual(quantum);
        results.push_back(r);
    }
    return results;
}

std::vector<PairResult> run_experiment(const ExperimentConfig& cfg) {
    const RawDataset ds = load_csv(cfg.dataset_path);
    return run_experiment(cfg, ds);
}

std::string render_tables(const std::vector<PairResult>& results) {
    std::vector<std::vector<std::string>> coreset_rows;
    std::vector<std::vector<std::string>> accuracy_rows;
    for (const auto& r : results) {
        coreset_rows.push_back({pair_text(r.pair), std::to_string(r.data_size),
                                std::to_string(r.coreset_size), fixed(r.kl, 3)});
        accuracy_rows.push_back({pair_text(r.pair), std::to_string(r.coreset_size),
                                 fixed(r.qacc, 2), fixed(r.cacc, 2)});
    }
    std::string out =
        render_block({"Classes", "Data size", "Coreset Size", "KL divergence"}, coreset_rows);
    out += '\n';
    out += render_block({"Classes", "Coreset Size", "qacc", "cacc"}, accuracy_rows);
    return out;
}

std::string render_csv(const std::vector<PairResult>& results) {
    std::string out = "pair_a,pair_b,data_size,coreset_size,kl,qacc,cacc,qubo_residual\n";
    for (const auto& r : results) {
        out += std::to_string(r.pair.first) + ',' + std::to_string(r.pair.second) + ',' +
               std::to_string(r.data_size) + ',' + std::to_string(r.coreset_size) + ',' +
               format_double(r.kl) + ',' + format_double(r.qacc) + ',' + format_double(r.cacc) +
               ',' + format_double(r.qubo_residual) + '\n';
    }
    return out;
}

}  // namespace corsvm
