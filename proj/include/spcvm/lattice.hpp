#pragma once

#include "spcvm/mat.hpp"

#include <span>
#include <string>
#include <vector>

namespace spcvm {

enum class KernelId { gaussian, epanechnikov };

const char* kernel_name(KernelId k);
KernelId kernel_from_name(const std::string& name);

// Regular grid on the unit square. Site j = (xs[j], ys[j]); enumeration is
// the Cartesian expansion with x varying fastest.
struct Lattice {
    int grid_size = 0;
    double spacing = 0.0;
    std::vector<double> xs;
    std::vector<double> ys;

    std::size_t size() const { return xs.size(); }
};

Lattice build_lattice(int grid_size);

// Full symmetric Euclidean distance matrix in lattice enumeration order.
Mat distance_matrix(const Lattice& lattice);

struct KernelWeights {
    std::vector<double> w; // normalized, sums to 1
    double eff_n = 0.0;    // Kish effective sample size 1 / sum(w^2)
    double h = 0.0;
    double s0x = 0.0, s0y = 0.0;
    KernelId kernel = KernelId::gaussian;
};

// Normalized kernel weights around s0 with bandwidth h. The kernel profile's
// constant prefactor cancels in the normalization and is not applied.
KernelWeights kernel_weights(const Lattice& lattice, double s0x, double s0y, double h,
                             KernelId kernel);

// Kish effective sample size of a normalized nonnegative weight vector.
double effective_sample_size(std::span<const double> w);

} // namespace spcvm
