#pragma once

#include <complex>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace fgda {

using Cplx = std::complex<double>;

// Row-major storage so operators can be applied row-parallel with results
// independent of the thread count.
using SparseCx = Eigen::SparseMatrix<Cplx, Eigen::RowMajor>;

}  // namespace fgda
