#include "spcvm/baselines.hpp"

#include "spcvm/errors.hpp"
#include "spcvm/mvn.hpp"
#include "spcvm/rank_test.hpp"
#include "spcvm/special.hpp"

#include <algorithm>
#include <cmath>

namespace spcvm {

double f_survival(double f, double df1, double df2) {
    if (df1 <= 0.0 || df2 <= 0.0)
        throw Error(ErrorKind::numeric, "f_survival: degrees of freedom must be > 0");
    if (f <= 0.0) return 1.0;
    return inc_beta(0.5 * df2, 0.5 * df1, df2 / (df2 + df1 * f));
}

KruskalWallisResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
    const std::size_t kgroups = groups.size();
    if (kgroups < 2) throw Error(ErrorKind::numeric, "kruskal_wallis: need at least 2 groups");

    std::vector<double> pooled;
    for (const auto& g : groups) {
        if (g.empty()) throw Error(ErrorKind::numeric, "kruskal_wallis: empty group");
        pooled.insert(pooled.end(), g.begin(), g.end());
    }
    const std::size_t n_total = pooled.size();
    if (n_total < kgroups + 1)
        throw Error(ErrorKind::numeric, "kruskal_wallis: too few observations");

    const std::vector<double> ranks = midranks(pooled);

    double stat = 0.0;
    std::size_t offset = 0;
    for (const auto& g : groups) {
        double rank_sum = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) rank_sum += ranks[offset + i];
        stat += rank_sum * rank_sum / static_cast<double>(g.size());
        offset += g.size();
    }
    const double n = static_cast<double>(n_total);
    stat = 12.0 / (n * (n + 1.0)) * stat - 3.0 * (n + 1.0);

    // tie correction: 1 - sum(t^3 - t) / (N^3 - N)
    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double tie_sum = 0.0;
    std::size_t i = 0;
    while (i < n_total) {
        std::size_t j = i;
        while (j + 1 < n_total && sorted[j + 1] == sorted[i]) ++j;
        double t = static_cast<double>(j - i + 1);
        tie_sum += t * t * t - t;
        i = j + 1;
    }
    double correction = 1.0 - tie_sum / (n * n * n - n);
    if (correction <= 0.0) return {0.0, 1.0}; // every observation identical

    KruskalWallisResult result;
    result.h = stat / correction;
    result.p_value = chi2_survival(std::max(0.0, result.h), static_cast<double>(kgroups - 1));
    return result;
}

double kw_multivariate(const std::vector<Mat>& groups) {
    if (groups.empty()) throw Error(ErrorKind::numeric, "kw_multivariate: no groups");
    const std::size_t p = groups.front().cols();
    if (p < 1) throw Error(ErrorKind::numeric, "kw_multivariate: p must be >= 1");

    double min_p = 1.0;
    for (std::size_t c = 0; c < p; ++c) {
        std::vector<std::vector<double>> columns;
        columns.reserve(groups.size());
        for (const Mat& g : groups) {
            std::vector<double> col(g.rows());
            for (std::size_t r = 0; r < g.rows(); ++r) col[r] = g(r, c);
            columns.push_back(std::move(col));
        }
        min_p = std::min(min_p, kruskal_wallis(columns).p_value);
    }
    return std::min(1.0, min_p * static_cast<double>(p));
}

AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups) {
    const std::size_t kgroups = groups.size();
    if (kgroups < 2) throw Error(ErrorKind::numeric, "anova_oneway: need at least 2 groups");

    double n_total = 0.0;
    double grand_sum = 0.0;
    for (const auto& g : groups) {
        if (g.empty()) throw Error(ErrorKind::numeric, "anova_oneway: empty group");
        n_total += static_cast<double>(g.size());
        for (double v : g) grand_sum += v;
    }
    const double grand_mean = grand_sum / n_total;

    double ss_between = 0.0, ss_within = 0.0;
    for (const auto& g : groups) {
        double mean = 0.0;
        for (double v : g) mean += v;
        mean /= static_cast<double>(g.size());
        ss_between += static_cast<double>(g.size()) * (mean - grand_mean) * (mean - grand_mean);
        for (double v : g) ss_within += (v - mean) * (v - mean);
    }

    const double df1 = static_cast<double>(kgroups - 1);
    const double df2 = n_total - static_cast<double>(kgroups);
    if (df2 <= 0.0) throw Error(ErrorKind::numeric, "anova_oneway: no residual degrees of freedom");

    if (ss_within <= 0.0) {
        // degenerate: zero within-group variance
        return ss_between > 0.0 ? AnovaResult{std::numeric_limits<double>::infinity(), 0.0}
                                : AnovaResult{0.0, 1.0};
    }

    AnovaResult result;
    result.f = (ss_between / df1) / (ss_within / df2);
    result.p_value = f_survival(result.f, df1, df2);
    return result;
}

PillaiResult manova_pillai(const std::vector<Mat>& groups) {
    const std::size_t kgroups = groups.size();
    if (kgroups < 2) throw Error(ErrorKind::numeric, "manova_pillai: need at least 2 groups");
    const std::size_t p = groups.front().cols();
    if (p < 2) throw Error(ErrorKind::numeric, "manova_pillai: requires p >= 2");

    std::size_t n_total = 0;
    for (const Mat& g : groups) {
        if (g.rows() == 0 || g.cols() != p)
            throw Error(ErrorKind::numeric, "manova_pillai: inconsistent group shapes");
        n_total += g.rows();
    }
    if (n_total <= kgroups + p)
        throw Error(ErrorKind::numeric, "manova_pillai: requires N - K > p");

    std::vector<double> grand(p, 0.0);
    for (const Mat& g : groups)
        for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t c = 0; c < p; ++c) grand[c] += g(r, c);
    for (std::size_t c = 0; c < p; ++c) grand[c] /= static_cast<double>(n_total);

    Mat between(p, p), within(p, p);
    std::vector<double> mean(p);
    for (const Mat& g : groups) {
        std::fill(mean.begin(), mean.end(), 0.0);
        for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t c = 0; c < p; ++c) mean[c] += g(r, c);
        for (std::size_t c = 0; c < p; ++c) mean[c] /= static_cast<double>(g.rows());

        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = 0; b < p; ++b)
                between(a, b) += static_cast<double>(g.rows()) * (mean[a] - grand[a]) *
                                 (mean[b] - grand[b]);

        for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t a = 0; a < p; ++a)
                for (std::size_t b = 0; b < p; ++b)
                    within(a, b) += (g(r, a) - mean[a]) * (g(r, b) - mean[b]);
    }

    // V = tr(H (H+E)^-1) via Cholesky solves on the total SSCP
    Mat total(p, p);
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b) total(a, b) = between(a, b) + within(a, b);

    Mat chol(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = total(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= chol(i, k) * chol(j, k);
            if (i == j) {
                if (s <= 1e-12 * std::max(1.0, total(i, i)))
                    throw Error(ErrorKind::numeric, "manova_pillai: singular H + E matrix");
                chol(i, i) = std::sqrt(s);
            } else {
                chol(i, j) = s / chol(j, j);
            }
        }
    }

    double v = 0.0;
    std::vector<double> y(p), x(p);
    for (std::size_t col = 0; col < p; ++col) {
        for (std::size_t i = 0; i < p; ++i) {
            double s = between(i, col);
            for (std::size_t k = 0; k < i; ++k) s -= chol(i, k) * y[k];
            y[i] = s / chol(i, i);
        }
        for (std::size_t ii = p; ii-- > 0;) {
            double s = y[ii];
            for (std::size_t k = ii + 1; k < p; ++k) s -= chol(k, ii) * x[k];
            x[ii] = s / chol(ii, ii);
        }
        v += x[col];
    }

    const double pp = static_cast<double>(p);
    const double kk = static_cast<double>(kgroups);
    const double nn = static_cast<double>(n_total);
    const double s = std::min(pp, kk - 1.0);
    const double m = 0.5 * (std::fabs(pp - kk + 1.0) - 1.0);
    const double n2 = 0.5 * (nn - kk - pp - 1.0);

    PillaiResult result;
    result.v = v;
    result.df1 = s * (2.0 * m + s + 1.0);
    result.df2 = s * (2.0 * n2 + s + 1.0);
    double denom = s - v;
    if (denom <= 0.0) {
        result.f = std::numeric_limits<double>::infinity();
        result.p_value = 0.0;
        return result;
    }
    result.f = ((2.0 * n2 + s + 1.0) / (2.0 * m + s + 1.0)) * (v / denom);
    result.p_value = f_survival(result.f, result.df1, result.df2);
    return result;
}

} // namespace spcvm
