#include "spcvm/lattice.hpp"

#include "spcvm/errors.hpp"
#include "spcvm/kernels.hpp"

#include <cmath>
#include <string>

namespace spcvm {

const char* kernel_name(KernelId k) {
    return k == KernelId::gaussian ? "gaussian" : "epanechnikov";
}

KernelId kernel_from_name(const std::string& name) {
    if (name == "gaussian") return KernelId::gaussian;
    if (name == "epanechnikov") return KernelId::epanechnikov;
    throw Error(ErrorKind::config, "unknown kernel '" + name + "' (gaussian|epanechnikov)");
}

Lattice build_lattice(int grid_size) {
    if (grid_size < 2)
        throw Error(ErrorKind::numeric,
                    "build_lattice: grid_size must be >= 2, got " + std::to_string(grid_size));
    Lattice lat;
    lat.grid_size = grid_size;
    lat.spacing = 1.0 / (grid_size - 1);
    std::vector<double> axis(static_cast<std::size_t>(grid_size));
    for (int i = 0; i < grid_size; ++i)
        axis[static_cast<std::size_t>(i)] = static_cast<double>(i) / (grid_size - 1);
    const std::size_t n = static_cast<std::size_t>(grid_size) * grid_size;
    lat.xs.reserve(n);
    lat.ys.reserve(n);
    for (int iy = 0; iy < grid_size; ++iy)
        for (int ix = 0; ix < grid_size; ++ix) {
            lat.xs.push_back(axis[static_cast<std::size_t>(ix)]);
            lat.ys.push_back(axis[static_cast<std::size_t>(iy)]);
        }
    return lat;
}

Mat distance_matrix(const Lattice& lattice) {
    const std::size_t n = lattice.size();
    Mat d(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        d(i, i) = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            double dx = lattice.xs[i] - lattice.xs[j];
            double dy = lattice.ys[i] - lattice.ys[j];
            double dist = std::sqrt(dx * dx + dy * dy);
            d(i, j) = dist;
            d(j, i) = dist;
        }
    }
    return d;
}

KernelWeights kernel_weights(const Lattice& lattice, double s0x, double s0y, double h,
                             KernelId kernel) {
    if (!(h > 0.0)) throw Error(ErrorKind::numeric, "kernel_weights: bandwidth must be > 0");
    if (s0x < 0.0 || s0x > 1.0 || s0y < 0.0 || s0y > 1.0)
        throw Error(ErrorKind::numeric, "kernel_weights: s0 must lie inside [0,1]^2");
    const std::size_t n = lattice.size();
    if (n == 0) throw Error(ErrorKind::numeric, "kernel_weights: empty lattice");

    KernelWeights kw;
    kw.w.resize(n);
    kw.h = h;
    kw.s0x = s0x;
    kw.s0y = s0y;
    kw.kernel = kernel;

    bool any_live = false;
    for (std::size_t j = 0; j < n; ++j) {
        double dx = lattice.xs[j] - s0x;
        double dy = lattice.ys[j] - s0y;
        double u = std::sqrt(dx * dx + dy * dy) / h;
        double v;
        if (kernel == KernelId::gaussian) {
            v = std::exp(-0.5 * u * u);
        } else {
            v = u < 1.0 ? 1.0 - u * u : 0.0;
        }
        kw.w[j] = v;
        if (v >= 1e-300) any_live = true;
    }
    if (!any_live)
        throw Error(ErrorKind::numeric,
                    "kernel_weights: degenerate bandwidth, all raw weights below 1e-300");

    double total = kernels::sum(kw.w.data(), n);
    for (std::size_t j = 0; j < n; ++j) kw.w[j] /= total;
    kw.eff_n = effective_sample_size(kw.w);
    return kw;
}

double effective_sample_size(std::span<const double> w) {
    double ssq = kernels::sumsq(w.data(), w.size());
    if (ssq <= 0.0)
        throw Error(ErrorKind::numeric, "effective_sample_size: weight vector is zero");
    return 1.0 / ssq;
}

} // namespace spcvm
