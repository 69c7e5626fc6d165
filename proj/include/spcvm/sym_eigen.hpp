#pragma once

#include "spcvm/mat.hpp"

#include <vector>

namespace spcvm {

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
// descending. Input is copied; the matrix is assumed symmetric (use the
// caller's symmetrization rule first).
std::vector<double> symmetric_eigenvalues(const Mat& a);

} // namespace spcvm
