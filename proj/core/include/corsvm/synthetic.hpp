#pragma once

#include <cstdint>

#include "corsvm/dataset.hpp"

namespace corsvm {

/// Gaussian blob dataset with class ids 1..n_classes. Class centers sit
/// `separation` away from the origin (on a circle for dim >= 2, on the
/// line for dim == 1); points scatter isotropically with sd `noise`.
RawDataset make_blobs(std::size_t per_class, int n_classes, int dim, double separation,
                      double noise, std::uint64_t seed);

}  // namespace corsvm
