// Writes a synthetic Gaussian-blob CSV so the pipeline can be exercised
// without any external data.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "corsvm/dataset.hpp"
#include "corsvm/synthetic.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Synthetic blob dataset generator (CSV schema f_0,...,f_{D-1},label)"};

    std::string out = "synthetic.csv";
    std::size_t per_class = 50;
    int classes = 2;
    int dim = 2;
    double separation = 3.0;
    double noise = 1.0;
    std::uint64_t seed = 1;

    app.add_option("--out", out, "Output CSV path");
    app.add_option("--per-class", per_class, "Samples per class");
    app.add_option("--classes", classes, "Number of classes");
    app.add_option("--dim", dim, "Feature dimension");
    app.add_option("--separation", separation, "Distance of class centers from the origin");
    app.add_option("--noise", noise, "Isotropic noise standard deviation");
    app.add_option("--seed", seed, "Generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        const corsvm::RawDataset ds =
            corsvm::make_blobs(per_class, classes, dim, separation, noise, seed);
        corsvm::write_csv(out, ds);
        std::cerr << "wrote " << ds.rows() << " rows (" << classes << " classes, dim " << dim
                  << ") to " << out << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
