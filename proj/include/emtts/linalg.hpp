#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "emtts/errors.hpp"

namespace emtts {

using Complex = std::complex<double>;
using Vector = std::vector<double>;
using ComplexVector = std::vector<Complex>;

/// Dense real matrix, row-major.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }

    Vector apply(const Vector& x) const;
    DenseMatrix transpose() const;

    /// Largest entry magnitude.
    double max_abs() const;

    DenseMatrix& operator+=(const DenseMatrix& other);
    DenseMatrix& operator*=(double s);

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix scaled(DenseMatrix a, double s);

double inf_norm(const Vector& v);
double two_norm(const Vector& v);

/// LU factorization with partial pivoting. A pivot of magnitude below
/// 1e-14 * max|M| raises SingularMatrix.
class LuSolver {
public:
    explicit LuSolver(DenseMatrix m);

    Vector solve(const Vector& rhs) const;
    void solve_in_place(Vector& rhs) const;

    /// Solves M X = B column by column.
    DenseMatrix solve(const DenseMatrix& rhs) const;

    double determinant() const;
    std::size_t size() const { return lu_.rows(); }

private:
    DenseMatrix lu_;
    std::vector<std::size_t> perm_;
    int perm_sign_ = 1;
};

/// Convenience one-shot solve.
Vector lu_solve(const DenseMatrix& m, const Vector& rhs);

/// All eigenvalues of a square matrix via Hessenberg reduction followed by
/// implicit double-shift QR sweeps. Sorted by descending modulus.
/// Raises NoConvergence if a block fails to deflate within the sweep budget.
std::vector<Complex> eigenvalues(const DenseMatrix& m);

/// Harmonic coefficients of one fundamental period of uniformly spaced samples.
/// t_start is the absolute time of samples[0]; sample n sits at t_start + n*dt.
/// c_0 is the sample mean; for k > 0, c_k = (2/N) * sum_n samples[n] e^{-i k w0 t_n},
/// so the signal is approximated by Re(sum_k c_k e^{i k w0 t}).
ComplexVector dft_harmonics(const Vector& samples, const std::vector<int>& harmonics,
                            double omega0, double t_start, double dt);

}  // namespace emtts
