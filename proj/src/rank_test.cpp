#include "spcvm/rank_test.hpp"

#include "spcvm/errors.hpp"
#include "spcvm/kernels.hpp"
#include "spcvm/mvn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace spcvm {

std::vector<double> midranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // 1-based average rank over the tie run [i, j]
        double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

void validate_dataset(const FieldDataset& data) {
    if (data.K() < 2)
        throw Error(ErrorKind::data, "dataset must contain at least 2 fields");
    const std::size_t n = data.n();
    const int p = data.p();
    if (n == 0 || p < 1 || p > 2)
        throw Error(ErrorKind::data, "dataset fields must be n x p with p in {1, 2}");
    if (data.lattice.size() != n)
        throw Error(ErrorKind::data, "dataset row count does not match the lattice");
    for (const Mat& f : data.fields) {
        if (f.rows() != n || f.cols() != static_cast<std::size_t>(p))
            throw Error(ErrorKind::data, "all fields must share the same shape");
        for (std::size_t i = 0; i < f.size(); ++i)
            if (!std::isfinite(f.data()[i]))
                throw Error(ErrorKind::data, "dataset contains non-finite values");
    }
}

Mat pooled_pseudo_obs(const FieldDataset& data) {
    validate_dataset(data);
    const std::size_t n = data.n();
    const std::size_t kfields = static_cast<std::size_t>(data.K());
    const std::size_t p = static_cast<std::size_t>(data.p());
    const std::size_t total = kfields * n;

    Mat u(total, p);
    std::vector<double> column(total);
    for (std::size_t c = 0; c < p; ++c) {
        for (std::size_t k = 0; k < kfields; ++k)
            for (std::size_t j = 0; j < n; ++j) column[k * n + j] = data.fields[k](j, c);
        std::vector<double> ranks = midranks(column);
        const double denom = static_cast<double>(total) + 1.0;
        for (std::size_t i = 0; i < total; ++i) u(i, c) = ranks[i] / denom;
    }
    return u;
}

std::vector<double> smoothed_copula(const Mat& u_field, const ThresholdGrid& grid,
                                    const KernelWeights& weights) {
    const std::size_t n = u_field.rows();
    if (weights.w.size() != n)
        throw Error(ErrorKind::numeric, "smoothed_copula: weight length does not match field");
    if (u_field.cols() != static_cast<std::size_t>(grid.p))
        throw Error(ErrorKind::numeric, "smoothed_copula: dimension mismatch with grid");

    // column-contiguous views for the indicator kernels
    std::vector<double> u1(n), u2;
    for (std::size_t j = 0; j < n; ++j) u1[j] = u_field(j, 0);
    if (grid.p == 2) {
        u2.resize(n);
        for (std::size_t j = 0; j < n; ++j) u2[j] = u_field(j, 1);
    }

    const std::size_t m = grid.size();
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (grid.p == 1) {
            out[i] = kernels::weighted_indicator_le(u1.data(), grid.copula_thresholds(i, 0),
                                                    weights.w.data(), n);
        } else {
            out[i] = kernels::weighted_indicator_le2(u1.data(), u2.data(),
                                                     grid.copula_thresholds(i, 0),
                                                     grid.copula_thresholds(i, 1),
                                                     weights.w.data(), n);
        }
    }
    return out;
}

double cvm_statistic(const Mat& fhat, double eff_n) {
    const std::size_t m = fhat.rows();
    const std::size_t kfields = fhat.cols();
    if (kfields < 2) throw Error(ErrorKind::numeric, "cvm_statistic: K must be >= 2");

    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = fhat.row(i);
        double mean = kernels::sum(row, kfields) / static_cast<double>(kfields);
        for (std::size_t k = 0; k < kfields; ++k) {
            double d = row[k] - mean;
            total += d * d;
        }
    }
    return eff_n * total / (static_cast<double>(m) * static_cast<double>(kfields));
}

TestResult run_test(const FieldDataset& data, const CalibrationResult& calib) {
    validate_dataset(data);

    std::ostringstream mismatch;
    auto check = [&](bool ok, const std::string& field) {
        if (!ok) mismatch << (mismatch.tellp() > 0 ? ", " : "") << field;
    };
    check(static_cast<std::size_t>(calib.config.grid_size) * calib.config.grid_size == data.n() &&
              calib.config.grid_size == data.lattice.grid_size,
          "grid_size");
    check(calib.config.K == data.K(), "K");
    check(calib.config.p == data.p(), "p");
    if (mismatch.tellp() > 0)
        throw Error(ErrorKind::numeric,
                    "calibration does not match the dataset; differing fields: " + mismatch.str());

    const ThresholdGrid grid = make_threshold_grid(calib.config.p, calib.config.m_per_dim);
    const KernelWeights weights = kernel_weights(data.lattice, calib.config.s0x, calib.config.s0y,
                                                 calib.config.h, calib.config.kernel);

    const Mat u = pooled_pseudo_obs(data);
    const std::size_t n = data.n();
    const std::size_t m = grid.size();
    const std::size_t kfields = static_cast<std::size_t>(data.K());

    Mat fhat(m, kfields);
    Mat u_field(n, static_cast<std::size_t>(grid.p));
    for (std::size_t k = 0; k < kfields; ++k) {
        for (std::size_t j = 0; j < n; ++j)
            for (int c = 0; c < grid.p; ++c)
                u_field(j, static_cast<std::size_t>(c)) =
                    u(k * n + j, static_cast<std::size_t>(c));
        std::vector<double> col = smoothed_copula(u_field, grid, weights);
        for (std::size_t i = 0; i < m; ++i) fhat(i, k) = col[i];
    }

    TestResult result;
    result.tn = cvm_statistic(fhat, weights.eff_n);
    result.a = calib.a;
    result.nu = calib.nu;
    result.eff_n = weights.eff_n;
    result.p_value = chi2_survival(result.tn / calib.a, calib.nu);
    result.fhat = std::move(fhat);
    return result;
}

} // namespace spcvm
