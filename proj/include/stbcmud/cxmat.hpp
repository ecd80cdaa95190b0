#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace stbcmud {

using cx = std::complex<double>;

/// Dense row-major complex matrix sized for small space-time-code algebra
/// (everything in this project is at most a few dozen rows).
class ComplexMat {
public:
    ComplexMat() = default;
    ComplexMat(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, cx{0.0, 0.0}) {}
    ComplexMat(std::size_t rows, std::size_t cols, std::vector<cx> entries);

    static ComplexMat identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    cx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const cx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<cx>& entries() const { return data_; }

    bool all_finite() const;

    ComplexMat operator+(const ComplexMat& o) const;
    ComplexMat operator-(const ComplexMat& o) const;
    ComplexMat operator*(const ComplexMat& o) const;
    ComplexMat operator*(cx s) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cx> data_;
};

/// 2x2 block [[a, b], [-conj(b), conj(a)]].  Closed under sums, products and
/// inversion, which is what makes the cancellation recursions work.
struct AlamoutiBlock {
    cx a{0.0, 0.0};
    cx b{0.0, 0.0};

    double norm_sq() const { return std::norm(a) + std::norm(b); }

    AlamoutiBlock hermitian() const { return {std::conj(a), -b}; }

    ComplexMat to_matrix() const;

    AlamoutiBlock operator+(const AlamoutiBlock& o) const { return {a + o.a, b + o.b}; }
    AlamoutiBlock operator-(const AlamoutiBlock& o) const { return {a - o.a, b - o.b}; }
    AlamoutiBlock operator*(const AlamoutiBlock& o) const {
        return {a * o.a - b * std::conj(o.b), a * o.b + b * std::conj(o.a)};
    }
    AlamoutiBlock operator*(double s) const { return {a * s, b * s}; }

    /// Block applied to a length-2 vector.
    std::pair<cx, cx> apply(cx r1, cx r2) const {
        return {a * r1 + b * r2, -std::conj(b) * r1 + std::conj(a) * r2};
    }
    /// Hermitian of the block applied to a length-2 vector.
    std::pair<cx, cx> apply_hermitian(cx r1, cx r2) const {
        return {std::conj(a) * r1 - b * r2, std::conj(b) * r1 + a * r2};
    }
};

ComplexMat hermitian(const ComplexMat& m);

/// a.cols must equal b.rows.
ComplexMat matmul(const ComplexMat& a, const ComplexMat& b);

/// Sum of squared magnitudes of all entries (Frobenius norm squared).
double frob_norm_sq(const ComplexMat& m);

/// Inverse of an Alamouti block: hermitian over squared norm.
/// Throws std::domain_error on a (numerically) zero block.
AlamoutiBlock alamouti_inverse(const AlamoutiBlock& blk);

/// Count of singular values above tol times the largest one; 0 for the zero
/// matrix.  Singular values come from the eigenvalues of m^H m.
std::size_t numerical_rank(const ComplexMat& m, double tol);

/// Determinant via LU with partial pivoting.  Square input only.
cx det(const ComplexMat& m);

/// Inverse of a square matrix via Gauss-Jordan with partial pivoting.
/// Throws std::domain_error when (numerically) singular.
ComplexMat inverse(const ComplexMat& m);

/// Eigen decomposition of a real symmetric matrix (entries must be real and
/// symmetric within 1e-10; throws std::invalid_argument otherwise).
/// Returns pairs (eigenvalue, eigenvector) sorted by ascending eigenvalue.
std::vector<std::pair<double, ComplexMat>> eig_real_sym(const ComplexMat& m);

/// Kronecker product.
ComplexMat kron(const ComplexMat& a, const ComplexMat& b);

}  // namespace stbcmud
