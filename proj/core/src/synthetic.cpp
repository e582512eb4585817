#include "corsvm/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "corsvm/errors.hpp"
#include "corsvm/rng.hpp"

namespace corsvm {

RawDataset make_blobs(std::size_t per_class, int n_classes, int dim, double separation,
                      double noise, std::uint64_t seed) {
    if (per_class < 1 || n_classes < 1 || dim < 1)
        throw Error("make_blobs: per_class, n_classes and dim must be positive");

    const auto n = per_class * static_cast<std::size_t>(n_classes);
    RawDataset ds;
    ds.features.resize(static_cast<Eigen::Index>(n), dim);
    ds.labels.resize(n);

    Rng rng(derive_seed(seed, 7));
    std::size_t row = 0;
    for (int c = 0; c < n_classes; ++c) {
        Eigen::VectorXd center = Eigen::VectorXd::Zero(dim);
        if (dim == 1) {
            center(0) = separation * (static_cast<double>(c) -
                                      0.5 * static_cast<double>(n_classes - 1));
        } else {
            const double angle =
                2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(n_classes);
            center(0) = separation * std::cos(angle);
            center(1) = separation * std::sin(angle);
        }
        for (std::size_t k = 0; k < per_class; ++k, ++row) {
            for (int d = 0; d < dim; ++d)
                ds.features(static_cast<Eigen::Index>(row), d) =
                    center(d) + noise * rng.next_normal();
            ds.labels[row] = c + 1;
        }
    }
    for (int c = 0; c < n_classes; ++c) ds.class_names[c + 1] = std::to_string(c + 1);
    return ds;
}

}  // namespace corsvm
