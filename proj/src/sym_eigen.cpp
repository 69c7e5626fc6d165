#include "spcvm/sym_eigen.hpp"

#include "spcvm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace spcvm {

std::vector<double> symmetric_eigenvalues(const Mat& a) {
    if (a.rows() != a.cols())
        throw Error(ErrorKind::numeric, "symmetric_eigenvalues: matrix must be square");
    const std::size_t n = a.rows();
    Mat m = a;

    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::fabs(m(i, j)));
    if (scale == 0.0) return std::vector<double>(n, 0.0);

    const double stop = 1e-30 * scale * scale * static_cast<double>(n) * static_cast<double>(n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += m(p, q) * m(p, q);
        if (off <= stop) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = m(p, q);
                if (std::fabs(apq) <= 1e-300) continue;
                double theta = 0.5 * (m(q, q) - m(p, p)) / apq;
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double akp = m(k, p), akq = m(k, q);
                    m(k, p) = c * akp - s * akq;
                    m(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = m(p, k), aqk = m(q, k);
                    m(p, k) = c * apk - s * aqk;
                    m(q, k) = s * apk + c * aqk;
                }
            }
        }
    }

    std::vector<double> eigs(n);
    for (std::size_t i = 0; i < n; ++i) eigs[i] = m(i, i);
    std::sort(eigs.begin(), eigs.end(), std::greater<double>());
    return eigs;
}

} // namespace spcvm
