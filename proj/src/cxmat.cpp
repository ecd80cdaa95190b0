#include "stbcmud/cxmat.hpp"

#include <algorithm>
#include <cmath>

namespace stbcmud {

ComplexMat::ComplexMat(std::size_t rows, std::size_t cols, std::vector<cx> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
        throw std::invalid_argument("ComplexMat: entry count does not match dimensions");
    }
}

ComplexMat ComplexMat::identity(std::size_t n) {
    ComplexMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = cx{1.0, 0.0};
    return m;
}

bool ComplexMat::all_finite() const {
    for (const cx& v : data_) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
    return true;
}

ComplexMat ComplexMat::operator+(const ComplexMat& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
        throw std::invalid_argument("ComplexMat: dimension mismatch in addition");
    }
    ComplexMat r(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] = data_[i] + o.data_[i];
    return r;
}

ComplexMat ComplexMat::operator-(const ComplexMat& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
        throw std::invalid_argument("ComplexMat: dimension mismatch in subtraction");
    }
    ComplexMat r(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] = data_[i] - o.data_[i];
    return r;
}

ComplexMat ComplexMat::operator*(const ComplexMat& o) const { return matmul(*this, o); }

ComplexMat ComplexMat::operator*(cx s) const {
    ComplexMat r(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] = data_[i] * s;
    return r;
}

ComplexMat AlamoutiBlock::to_matrix() const {
    ComplexMat m(2, 2);
    m(0, 0) = a;
    m(0, 1) = b;
    m(1, 0) = -std::conj(b);
    m(1, 1) = std::conj(a);
    return m;
}

ComplexMat hermitian(const ComplexMat& m) {
    ComplexMat r(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r(j, i) = std::conj(m(i, j));
    return r;
}

ComplexMat matmul(const ComplexMat& a, const ComplexMat& b) {
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("matmul: inner dimensions do not match");
    }
    ComplexMat r(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const cx aik = a(i, k);
            if (aik == cx{0.0, 0.0}) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
        }
    }
    return r;
}

double frob_norm_sq(const ComplexMat& m) {
    double s = 0.0;
    for (const cx& v : m.entries()) s += std::norm(v);
    return s;
}

AlamoutiBlock alamouti_inverse(const AlamoutiBlock& blk) {
    const double n = blk.norm_sq();
    if (n <= 1e-300) throw std::domain_error("alamouti_inverse: singular block");
    AlamoutiBlock h = blk.hermitian();
    return {h.a / n, h.b / n};
}

namespace {

// Real symmetric 2n x 2n embedding of a Hermitian matrix: [[X, -Y], [Y, X]].
ComplexMat real_embed_hermitian(const ComplexMat& h) {
    const std::size_t n = h.rows();
    ComplexMat e(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double x = h(i, j).real();
            const double y = h(i, j).imag();
            e(i, j) = cx{x, 0.0};
            e(i + n, j + n) = cx{x, 0.0};
            e(i, j + n) = cx{-y, 0.0};
            e(i + n, j) = cx{y, 0.0};
        }
    }
    return e;
}

// Jacobi eigenvalue iteration on a real symmetric matrix held in a flat
// buffer.  Rotations accumulate into vecs when provided.
void jacobi_eig(std::vector<double>& m, std::size_t n, std::vector<double>* vecs) {
    if (vecs) {
        vecs->assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) (*vecs)[i * n + i] = 1.0;
    }
    auto at = [&](std::size_t i, std::size_t j) -> double& { return m[i * n + j]; };
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
        if (off < 1e-26 * static_cast<double>(n)) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double mkp = at(k, p);
                    const double mkq = at(k, q);
                    at(k, p) = c * mkp - s * mkq;
                    at(k, q) = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mpk = at(p, k);
                    const double mqk = at(q, k);
                    at(p, k) = c * mpk - s * mqk;
                    at(q, k) = s * mpk + c * mqk;
                }
                if (vecs) {
                    for (std::size_t k = 0; k < n; ++k) {
                        const double vkp = (*vecs)[k * n + p];
                        const double vkq = (*vecs)[k * n + q];
                        (*vecs)[k * n + p] = c * vkp - s * vkq;
                        (*vecs)[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
}

}  // namespace

std::size_t numerical_rank(const ComplexMat& m, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("numerical_rank: tol must be positive");
    if (m.rows() == 0 || m.cols() == 0) return 0;
    ComplexMat gram = matmul(hermitian(m), m);
    ComplexMat e = real_embed_hermitian(gram);
    const std::size_t n = e.rows();
    std::vector<double> buf(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) buf[i * n + j] = e(i, j).real();
    jacobi_eig(buf, n, nullptr);
    std::vector<double> sv;
    sv.reserve(n);
    for (std::size_t i = 0; i < n; ++i) sv.push_back(std::sqrt(std::max(0.0, buf[i * n + i])));
    const double svmax = *std::max_element(sv.begin(), sv.end());
    if (svmax == 0.0) return 0;
    // Each singular value appears twice in the real embedding.
    std::size_t cnt = 0;
    for (double s : sv)
        if (s > tol * svmax) ++cnt;
    return cnt / 2;
}

cx det(const ComplexMat& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("det: matrix must be square");
    const std::size_t n = m.rows();
    if (n == 0) return cx{1.0, 0.0};
    ComplexMat lu = m;
    cx d{1.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(lu(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(lu(i, k)) > best) {
                best = std::abs(lu(i, k));
                piv = i;
            }
        }
        if (best == 0.0) return cx{0.0, 0.0};
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
            d = -d;
        }
        d *= lu(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const cx f = lu(i, k) / lu(k, k);
            for (std::size_t j = k; j < n; ++j) lu(i, j) -= f * lu(k, j);
        }
    }
    return d;
}

ComplexMat inverse(const ComplexMat& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("inverse: matrix must be square");
    const std::size_t n = m.rows();
    ComplexMat a = m;
    ComplexMat inv = ComplexMat::identity(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(a(i, k)) > best) {
                best = std::abs(a(i, k));
                piv = i;
            }
        }
        if (best < 1e-300) throw std::domain_error("inverse: singular matrix");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a(k, j), a(piv, j));
                std::swap(inv(k, j), inv(piv, j));
            }
        }
        const cx p = a(k, k);
        for (std::size_t j = 0; j < n; ++j) {
            a(k, j) /= p;
            inv(k, j) /= p;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k) continue;
            const cx f = a(i, k);
            if (f == cx{0.0, 0.0}) continue;
            for (std::size_t j = 0; j < n; ++j) {
                a(i, j) -= f * a(k, j);
                inv(i, j) -= f * inv(k, j);
            }
        }
    }
    return inv;
}

std::vector<std::pair<double, ComplexMat>> eig_real_sym(const ComplexMat& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("eig_real_sym: matrix must be square");
    const std::size_t n = m.rows();
    double scale = 0.0;
    for (const cx& v : m.entries()) scale = std::max(scale, std::abs(v));
    const double tol = 1e-10 * std::max(1.0, scale);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(m(i, j).imag()) > tol) {
                throw std::invalid_argument("eig_real_sym: matrix has complex entries");
            }
            if (std::abs(m(i, j).real() - m(j, i).real()) > tol) {
                throw std::invalid_argument("eig_real_sym: matrix is not symmetric");
            }
        }
    }
    std::vector<double> buf(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) buf[i * n + j] = 0.5 * (m(i, j).real() + m(j, i).real());
    std::vector<double> vecs;
    jacobi_eig(buf, n, &vecs);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return buf[x * n + x] < buf[y * n + y]; });
    std::vector<std::pair<double, ComplexMat>> out;
    out.reserve(n);
    for (std::size_t idx : order) {
        ComplexMat v(n, 1);
        for (std::size_t k = 0; k < n; ++k) v(k, 0) = cx{vecs[k * n + idx], 0.0};
        out.emplace_back(buf[idx * n + idx], std::move(v));
    }
    return out;
}

ComplexMat kron(const ComplexMat& a, const ComplexMat& b) {
    ComplexMat r(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            for (std::size_t p = 0; p < b.rows(); ++p)
                for (std::size_t q = 0; q < b.cols(); ++q)
                    r(i * b.rows() + p, j * b.cols() + q) = a(i, j) * b(p, q);
    return r;
}

}  // namespace stbcmud
