#pragma once

#include "spcvm/covariance.hpp"
#include "spcvm/lattice.hpp"
#include "spcvm/mat.hpp"

#include <span>
#include <string>
#include <vector>

namespace spcvm {

// Mid-ranks (ties averaged), 1-based, in input order.
std::vector<double> midranks(std::span<const double> values);

// K fields observed on a shared lattice; row j of each field matrix is the
// observation vector at lattice site j.
struct FieldDataset {
    Lattice lattice;
    std::vector<Mat> fields;          // each n x p
    std::vector<std::string> labels;  // optional field names (CSV input)

    int K() const { return static_cast<int>(fields.size()); }
    int p() const { return fields.empty() ? 0 : static_cast<int>(fields.front().cols()); }
    std::size_t n() const { return fields.empty() ? 0 : fields.front().rows(); }
};

void validate_dataset(const FieldDataset& data);

// Componentwise pooled mid-ranks over all K*n observations, divided by
// (K*n + 1); rows are ordered field-major (field 0 sites, field 1 sites, ...).
Mat pooled_pseudo_obs(const FieldDataset& data);

// Kernel-smoothed empirical copula of one field's pseudo-observations:
// entry i = sum_j w_j 1{u[j,.] <= threshold_i componentwise}.
std::vector<double> smoothed_copula(const Mat& u_field, const ThresholdGrid& grid,
                                    const KernelWeights& weights);

// Quadratic contrast statistic from the M x K matrix of per-field smoothed
// copula values.
double cvm_statistic(const Mat& fhat, double eff_n);

struct TestResult {
    double tn = 0.0;
    double a = 0.0;
    double nu = 0.0;
    double p_value = 0.0;
    double eff_n = 0.0;
    Mat fhat; // M x K
};

TestResult run_test(const FieldDataset& data, const CalibrationResult& calib);

} // namespace spcvm
