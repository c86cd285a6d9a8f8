#include "emtts/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace emtts {

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Vector DenseMatrix::apply(const Vector& x) const {
    Vector y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        double acc = 0.0;
        const double* row = &data_[i * cols_];
        for (std::size_t j = 0; j < cols_; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
    return y;
}

DenseMatrix DenseMatrix::transpose() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

double DenseMatrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& other) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) {
    a += b;
    return a;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix c = a;
    for (std::size_t i = 0; i < c.rows(); ++i)
        for (std::size_t j = 0; j < c.cols(); ++j) c(i, j) -= b(i, j);
    return c;
}

DenseMatrix scaled(DenseMatrix a, double s) {
    a *= s;
    return a;
}

double inf_norm(const Vector& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double two_norm(const Vector& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

LuSolver::LuSolver(DenseMatrix m) : lu_(std::move(m)), perm_(lu_.rows()) {
    if (lu_.rows() != lu_.cols()) throw Error("LuSolver: matrix must be square");
    const std::size_t n = lu_.rows();
    const double tol = 1e-14 * lu_.max_abs();
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(lu_(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(lu_(i, k));
            if (v > best) { best = v; piv = i; }
        }
        if (best < tol || best == 0.0)
            throw SingularMatrix("pivot " + std::to_string(k) + " below threshold");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
            std::swap(perm_[k], perm_[piv]);
            perm_sign_ = -perm_sign_;
        }
        const double d = lu_(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = lu_(i, k) / d;
            lu_(i, k) = f;
            if (f == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
        }
    }
}

void LuSolver::solve_in_place(Vector& rhs) const {
    const std::size_t n = lu_.rows();
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = rhs[perm_[i]];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) y[i] -= lu_(i, j) * y[j];
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = i + 1; j < n; ++j) y[i] -= lu_(i, j) * y[j];
        y[i] /= lu_(i, i);
    }
    rhs = std::move(y);
}

Vector LuSolver::solve(const Vector& rhs) const {
    Vector x = rhs;
    solve_in_place(x);
    return x;
}

DenseMatrix LuSolver::solve(const DenseMatrix& rhs) const {
    DenseMatrix x(rhs.rows(), rhs.cols());
    Vector col(rhs.rows());
    for (std::size_t j = 0; j < rhs.cols(); ++j) {
        for (std::size_t i = 0; i < rhs.rows(); ++i) col[i] = rhs(i, j);
        solve_in_place(col);
        for (std::size_t i = 0; i < rhs.rows(); ++i) x(i, j) = col[i];
    }
    return x;
}

double LuSolver::determinant() const {
    double d = perm_sign_;
    for (std::size_t i = 0; i < lu_.rows(); ++i) d *= lu_(i, i);
    return d;
}

Vector lu_solve(const DenseMatrix& m, const Vector& rhs) {
    return LuSolver(m).solve(rhs);
}

namespace {

// Householder reduction to upper Hessenberg form, in place.
void to_hessenberg(DenseMatrix& a) {
    const std::size_t n = a.rows();
    if (n < 3) return;
    Vector v(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double norm = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) norm += a(i, k) * a(i, k);
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;
        const double alpha = a(k + 1, k) >= 0 ? -norm : norm;
        double vnorm2 = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) {
            v[i] = a(i, k);
            if (i == k + 1) v[i] -= alpha;
            vnorm2 += v[i] * v[i];
        }
        if (vnorm2 == 0.0) continue;
        // A <- (I - 2vv^T/v^Tv) A (I - 2vv^T/v^Tv)
        for (std::size_t j = k; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t i = k + 1; i < n; ++i) dot += v[i] * a(i, j);
            const double f = 2.0 * dot / vnorm2;
            for (std::size_t i = k + 1; i < n; ++i) a(i, j) -= f * v[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            double dot = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) dot += a(i, j) * v[j];
            const double f = 2.0 * dot / vnorm2;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * v[j];
        }
        for (std::size_t i = k + 2; i < n; ++i) a(i, k) = 0.0;
    }
}

// Eigenvalues of a 2x2 block.
void eig2x2(double a, double b, double c, double d, Complex& l1, Complex& l2) {
    const double tr = a + d;
    const double det = a * d - b * c;
    const double disc = tr * tr / 4.0 - det;
    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        // stable evaluation: larger root first, the other via the product
        double m = tr / 2.0 >= 0 ? tr / 2.0 + root : tr / 2.0 - root;
        l1 = Complex(m, 0.0);
        l2 = Complex(m != 0.0 ? det / m : tr / 2.0 - std::copysign(root, tr), 0.0);
    } else {
        const double im = std::sqrt(-disc);
        l1 = Complex(tr / 2.0, im);
        l2 = Complex(tr / 2.0, -im);
    }
}

}  // namespace

std::vector<Complex> eigenvalues(const DenseMatrix& m) {
    if (m.rows() != m.cols()) throw Error("eigenvalues: matrix must be square");
    const std::size_t n = m.rows();
    std::vector<Complex> eig;
    eig.reserve(n);
    if (n == 0) return eig;
    if (n == 1) return {Complex(m(0, 0), 0.0)};

    DenseMatrix h = m;
    to_hessenberg(h);

    const double eps = 1e-16;
    std::size_t q = n - 1;      // active block ends at q
    int iter_since_deflate = 0;
    const int budget = 60;      // sweeps per eigenvalue before giving up

    while (true) {
        // zero out negligible subdiagonals
        for (std::size_t i = 0; i + 1 <= q && i + 1 <= n - 1; ++i) {
            if (std::abs(h(i + 1, i)) <= eps * (std::abs(h(i, i)) + std::abs(h(i + 1, i + 1))))
                h(i + 1, i) = 0.0;
        }
        // deflate trailing 1x1 / 2x2 blocks
        while (true) {
            if (q == 0) {
                eig.emplace_back(h(0, 0), 0.0);
                goto done;
            }
            if (h(q, q - 1) == 0.0) {
                eig.emplace_back(h(q, q), 0.0);
                --q;
                iter_since_deflate = 0;
                continue;
            }
            if (q == 1 || h(q - 1, q - 2) == 0.0) {
                Complex l1, l2;
                eig2x2(h(q - 1, q - 1), h(q - 1, q), h(q, q - 1), h(q, q), l1, l2);
                eig.push_back(l1);
                eig.push_back(l2);
                if (q == 1) goto done;
                q -= 2;
                iter_since_deflate = 0;
                continue;
            }
            break;
        }

        // find start p of the active unreduced block [p, q]
        std::size_t p = q - 1;
        while (p > 0 && h(p, p - 1) != 0.0) --p;

        if (++iter_since_deflate > budget)
            throw NoConvergence("QR sweeps exhausted on block of size " +
                                std::to_string(q - p + 1));

        // Francis implicit double shift; occasionally an exceptional shift
        double s, t;
        if (iter_since_deflate % 16 == 0) {
            const double w = std::abs(h(q, q - 1)) + std::abs(h(q - 1, q - 2));
            s = 1.5 * w;
            t = w * w;
        } else {
            s = h(q - 1, q - 1) + h(q, q);
            t = h(q - 1, q - 1) * h(q, q) - h(q - 1, q) * h(q, q - 1);
        }
        double x = h(p, p) * h(p, p) + h(p, p + 1) * h(p + 1, p) - s * h(p, p) + t;
        double y = h(p + 1, p) * (h(p, p) + h(p + 1, p + 1) - s);
        double z = (p + 2 <= q) ? h(p + 1, p) * h(p + 2, p + 1) : 0.0;

        for (std::size_t k = p; k <= q - 1; ++k) {
            // Householder on (x, y, z)
            const bool has_z = (k + 2 <= q);
            double zz = has_z ? z : 0.0;
            double norm = std::sqrt(x * x + y * y + zz * zz);
            if (norm != 0.0) {
                const double alpha = x >= 0 ? -norm : norm;
                double v0 = x - alpha, v1 = y, v2 = zz;
                const double vnorm2 = v0 * v0 + v1 * v1 + v2 * v2;
                if (vnorm2 > 0.0) {
                    const std::size_t r0 = k, r1 = k + 1, r2 = k + 2;
                    const std::size_t jstart = (k > p) ? k - 1 : p;
                    for (std::size_t j = jstart; j < n; ++j) {
                        double dot = v0 * h(r0, j) + v1 * h(r1, j);
                        if (has_z) dot += v2 * h(r2, j);
                        const double f = 2.0 * dot / vnorm2;
                        h(r0, j) -= f * v0;
                        h(r1, j) -= f * v1;
                        if (has_z) h(r2, j) -= f * v2;
                    }
                    const std::size_t iend = std::min(q, k + 3);
                    for (std::size_t i = 0; i <= iend; ++i) {
                        double dot = v0 * h(i, r0) + v1 * h(i, r1);
                        if (has_z) dot += v2 * h(i, r2);
                        const double f = 2.0 * dot / vnorm2;
                        h(i, r0) -= f * v0;
                        h(i, r1) -= f * v1;
                        if (has_z) h(i, r2) -= f * v2;
                    }
                }
            }
            if (k + 1 <= q - 1) {
                x = h(k + 1, k);
                y = h(k + 2, k);
                z = (k + 3 <= q) ? h(k + 3, k) : 0.0;
            }
        }
    }

done:
    std::sort(eig.begin(), eig.end(), [](const Complex& a, const Complex& b) {
        const double ma = std::abs(a), mb = std::abs(b);
        if (ma != mb) return ma > mb;
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return eig;
}

ComplexVector dft_harmonics(const Vector& samples, const std::vector<int>& harmonics,
                            double omega0, double t_start, double dt) {
    const std::size_t n = samples.size();
    int kmax = 0;
    for (int k : harmonics) kmax = std::max(kmax, k);
    if (n < static_cast<std::size_t>(2 * kmax + 1))
        throw InsufficientSamples("need at least " + std::to_string(2 * kmax + 1) +
                                  " samples, got " + std::to_string(n));
    const double period = 2.0 * std::numbers::pi / omega0;
    if (std::abs(n * dt - period) > 1e-9 * period)
        throw InsufficientSamples("window is not one fundamental period");

    ComplexVector out;
    out.reserve(harmonics.size());
    for (int k : harmonics) {
        if (k == 0) {
            double mean = 0.0;
            for (double s : samples) mean += s;
            out.emplace_back(mean / static_cast<double>(n), 0.0);
        } else {
            Complex acc(0.0, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double phase = -k * omega0 * (t_start + static_cast<double>(i) * dt);
                acc += samples[i] * Complex(std::cos(phase), std::sin(phase));
            }
            out.push_back(acc * (2.0 / static_cast<double>(n)));
        }
    }
    return out;
}

}  // namespace emtts
