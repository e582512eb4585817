// Command line front end: coreset construction, weighted SVM training along
// the classical and the QUBO/annealing path, QUBO solving, model scoring and
// the full experiment matrix, all driven by one JSON config file.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "corsvm/coreset.hpp"
#include "corsvm/dataset.hpp"
#include "corsvm/errors.hpp"
#include "corsvm/evalrep.hpp"
#include "corsvm/io.hpp"
#include "corsvm/qubo.hpp"
#include "corsvm/rng.hpp"
#include "corsvm/svm.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliInvocation {
    std::string subcommand;
    fs::path config;
    std::vector<std::string> overrides;
    fs::path output;
    int threads = 0;  // 0 = available cores
};

// Applies one `section.key=value` override. Values parse as JSON when
// possible and fall back to plain strings.
void apply_override(json& doc, const std::string& kv) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
        throw corsvm::ParseError("override '" + kv + "' is not of the form key=value");
    const std::string path = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);

    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot - start);
        if (key.empty())
            throw corsvm::ParseError("override '" + kv + "' has an empty path segment");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            break;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

json required_section(const json& doc, const char* section) {
    if (!doc.contains(section) || !doc.at(section).is_object())
        throw corsvm::ParseError(std::string("config: section '") + section + "' is required");
    return doc.at(section);
}

fs::path required_path(const json& section, const char* key, const char* where) {
    if (!section.contains(key))
        throw corsvm::ParseError(std::string("config: ") + where + "." + key + " is required");
    return fs::path(section.at(key).get<std::string>());
}

struct LoadedConfig {
    json doc;
    corsvm::ExperimentConfig cfg;
};

LoadedConfig load_config(const CliInvocation& inv) {
    LoadedConfig out;
    out.doc = corsvm::read_json_file(inv.config);
    for (const auto& kv : inv.overrides) apply_override(out.doc, kv);
    out.cfg = corsvm::parse_experiment_config(out.doc);
    out.cfg.threads = inv.threads;  // 0 resolves to hardware concurrency
    return out;
}

void require_pairs(const corsvm::ExperimentConfig& cfg) {
    if (cfg.pairs.empty())
        throw corsvm::ParseError("config: dataset.pair or dataset.pairs is required");
}

void maybe_export_test(const json& doc, const corsvm::PairPipeline& p) {
    const json dataset = doc.value("dataset", json::object());
    if (dataset.contains("export_test")) {
        const fs::path path = dataset.at("export_test").get<std::string>();
        corsvm::write_csv(path, p.test);
        std::cerr << "[dataset] wrote test split (" << p.test.rows() << " rows) to "
                  << path.string() << "\n";
    }
}

corsvm::PairPipeline pipeline_head(const LoadedConfig& lc) {
    const corsvm::RawDataset raw = corsvm::load_csv(lc.cfg.dataset_path);
    std::cerr << "[dataset] " << raw.rows() << " rows, " << raw.dims() << " features from "
              << lc.cfg.dataset_path.string() << "\n";
    corsvm::PairPipeline p = corsvm::run_pair_pipeline(lc.cfg, raw, 0);
    std::cerr << "[coreset] pair {" << p.pair.first << ", " << p.pair.second << "}: M="
              << p.selection.indices.size() << ", kl=" << p.selection.achieved_kl << "\n";
    maybe_export_test(lc.doc, p);
    return p;
}

int cmd_coreset(const CliInvocation& inv, const LoadedConfig& lc) {
    const corsvm::PairPipeline p = pipeline_head(lc);
    corsvm::write_json_file(inv.output, json(p.selection));
    std::cerr << "[output] wrote " << inv.output.string() << "\n";
    return 0;
}

int cmd_train_csvm(const CliInvocation& inv, const LoadedConfig& lc) {
    const corsvm::PairPipeline p = pipeline_head(lc);
    const corsvm::SvmModel model = corsvm::train_weighted_svm(
        p.core_points, p.core_labels, p.selection.weights, lc.cfg.C, p.kernel);
    std::cerr << "[train-csvm] bias=" << model.bias << "\n";
    corsvm::write_json_file(inv.output, json(model));
    std::cerr << "[output] wrote " << inv.output.string() << "\n";
    return 0;
}

int cmd_train_qsvm(const CliInvocation& inv, const LoadedConfig& lc) {
    const corsvm::PairPipeline p = pipeline_head(lc);
    const corsvm::QuboProblem problem = corsvm::build_qubo(
        p.core_points, p.core_labels, p.selection.weights, p.kernel, lc.cfg.encoding);
    std::cerr << "[qubo] dim=" << problem.dim << "\n";

    const json qubo_section = lc.doc.value("qubo", json::object());
    if (qubo_section.contains("export")) {
        const fs::path path = qubo_section.at("export").get<std::string>();
        corsvm::write_json_file(path, json(problem));
        std::cerr << "[qubo] exported problem to " << path.string() << "\n";
    }

    const corsvm::BinarySolution solution =
        lc.cfg.exhaustive ? corsvm::solve_exhaustive(problem)
                          : corsvm::solve_anneal(problem,
                                                 corsvm::experiment_schedule(lc.cfg, problem, 0));
    const corsvm::SvmModel model =
        corsvm::decode_model(problem, solution, p.core_points, p.core_labels,
                             p.selection.weights, p.kernel, lc.cfg.encoding);
    std::cerr << "[train-qsvm] energy=" << solution.energy
              << ", balance residual=" << corsvm::constraint_residual(model) << "\n";
    corsvm::write_json_file(inv.output, json(model));
    std::cerr << "[output] wrote " << inv.output.string() << "\n";
    return 0;
}

int cmd_solve_qubo(const CliInvocation& inv, const LoadedConfig& lc,
                   const fs::path& problem_path) {
    const corsvm::QuboProblem problem =
        corsvm::read_json_file(problem_path).get<corsvm::QuboProblem>();
    std::cerr << "[qubo] loaded dim=" << problem.dim << " from " << problem_path.string()
              << "\n";

    const corsvm::BinarySolution solution =
        lc.cfg.exhaustive ? corsvm::solve_exhaustive(problem)
                          : corsvm::solve_anneal(problem,
                                                 corsvm::experiment_schedule(lc.cfg, problem, 0));
    std::cerr << "[solve-qubo] energy=" << solution.energy << "\n";
    corsvm::write_json_file(inv.output, json(solution));
    std::cerr << "[output] wrote " << inv.output.string() << "\n";
    return 0;
}

int cmd_evaluate(const CliInvocation& inv, const LoadedConfig& lc, const fs::path& model_path,
                 const fs::path& data_path) {
    (void)lc;
    const corsvm::SvmModel model =
        corsvm::read_json_file(model_path).get<corsvm::SvmModel>();
    const corsvm::BinaryDataset data = corsvm::load_binary_csv(data_path);
    const double acc = corsvm::accuracy(model, data);
    const auto correct =
        static_cast<long long>(std::llround(acc * static_cast<double>(data.rows())));
    std::cerr << "[evaluate] accuracy=" << acc << " on " << data.rows() << " rows\n";

    corsvm::write_json_file(inv.output, json{{"accuracy", acc},
                                             {"n_test", data.rows()},
                                             {"n_correct", correct}});
    std::cerr << "[output] wrote " << inv.output.string() << "\n";
    return 0;
}

int cmd_run(const CliInvocation& inv, const LoadedConfig& lc) {
    std::cerr << "[run] " << lc.cfg.pairs.size() << " pair(s) from "
              << lc.cfg.dataset_path.string() << "\n";
    const std::vector<corsvm::PairResult> results = corsvm::run_experiment(lc.cfg);
    for (const auto& r : results)
        std::cerr << "[run] pair {" << r.pair.first << ", " << r.pair.second
                  << "}: kl=" << r.kl << ", qacc=" << r.qacc << ", cacc=" << r.cacc
                  << ", residual=" << r.qubo_residual << "\n";

    corsvm::write_json_file(inv.output, json(results));
    fs::path table_path = inv.output;
    table_path.replace_extension(".txt");
    fs::path csv_path = inv.output;
    csv_path.replace_extension(".csv");
    const std::string tables = corsvm::render_tables(results);
    corsvm::write_file_atomic(table_path, tables);
    corsvm::write_file_atomic(csv_path, corsvm::render_csv(results));

    std::cout << tables;
    std::cerr << "[output] wrote " << inv.output.string() << ", " << table_path.string()
              << ", " << csv_path.string() << "\n";
    return 0;
}

int dispatch(const CliInvocation& inv) {
    LoadedConfig lc;
    fs::path model_path;
    fs::path data_path;
    fs::path problem_path;
    try {
        lc = load_config(inv);
        if (inv.subcommand == "evaluate") {
            const json section = required_section(lc.doc, "evaluate");
            model_path = required_path(section, "model", "evaluate");
            data_path = required_path(section, "data", "evaluate");
        } else if (inv.subcommand == "solve-qubo") {
            const json section = required_section(lc.doc, "solve_qubo");
            problem_path = required_path(section, "problem", "solve_qubo");
        } else {
            require_pairs(lc.cfg);
        }
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (inv.subcommand == "coreset") return cmd_coreset(inv, lc);
        if (inv.subcommand == "train-csvm") return cmd_train_csvm(inv, lc);
        if (inv.subcommand == "train-qsvm") return cmd_train_qsvm(inv, lc);
        if (inv.subcommand == "solve-qubo") return cmd_solve_qubo(inv, lc, problem_path);
        if (inv.subcommand == "evaluate") return cmd_evaluate(inv, lc, model_path, data_path);
        if (inv.subcommand == "run") return cmd_run(inv, lc);
        std::cerr << "unknown subcommand '" << inv.subcommand << "'\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error [" << inv.subcommand << "]: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian coreset selection and weighted SVM training, classically and "
                 "through a QUBO annealing surrogate"};
    app.require_subcommand(1);

    CliInvocation inv;
    app.add_option("--threads", inv.threads, "Worker cap for parallel stages (0 = all cores)");

    const struct {
        const char* name;
        const char* help;
        const char* default_output;
    } commands[] = {
        {"coreset", "Build a coreset and write the selection JSON", "coreset.json"},
        {"train-csvm", "Train the classically solved weighted SVM", "model_csvm.json"},
        {"train-qsvm", "Train the weighted SVM through the QUBO solver", "model_qsvm.json"},
        {"solve-qubo", "Solve an exported QUBO problem JSON", "solution.json"},
        {"evaluate", "Score a model JSON against a CSV", "evaluation.json"},
        {"run", "Run the full experiment matrix and write the report", "report.json"},
    };

    for (const auto& c : commands) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--config", inv.config, "JSON config file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--set", inv.overrides,
                        "Override a config entry, e.g. --set qubo.lambda=2.0");
        sub->add_option("--output", inv.output, "Output file path");
        sub->parse_complete_callback([&inv, c] {
            inv.subcommand = c.name;
            if (inv.output.empty()) inv.output = c.default_output;
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n\n" << app.help() << std::flush;
        return 2;
    }

    return dispatch(inv);
}
