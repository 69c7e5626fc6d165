#pragma once

#include "spcvm/mat.hpp"

#include <vector>

namespace spcvm {

// Upper tail of the F distribution via the regularized incomplete beta.
double f_survival(double f, double df1, double df2);

struct KruskalWallisResult {
    double h = 0.0;       // tie-corrected statistic
    double p_value = 1.0;
};

// K-group Kruskal-Wallis with mid-ranks and tie correction.
KruskalWallisResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

// Per-variable Kruskal-Wallis with Bonferroni aggregation: min(1, p * min_j p_j).
double kw_multivariate(const std::vector<Mat>& groups);

struct AnovaResult {
    double f = 0.0;
    double p_value = 1.0;
};

AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups);

struct PillaiResult {
    double v = 0.0;  // Pillai's trace
    double f = 0.0;
    double df1 = 0.0, df2 = 0.0;
    double p_value = 1.0;
};

// One-way MANOVA via Pillai's trace with the standard F approximation.
PillaiResult manova_pillai(const std::vector<Mat>& groups);

} // namespace spcvm
