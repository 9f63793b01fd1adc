#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "impc/dense.hpp"

namespace impc {

// Partial-pivot LU of a square matrix. A pivot below 1e-12·‖M‖∞ is treated
// as singular.
class LuFactorization {
public:
    static LuFactorization compute(const DenseMatrix& m) {
        if (!m.is_square()) throw std::invalid_argument("lu: matrix not square");
        if (!m.all_finite()) throw std::invalid_argument("lu: non-finite entries");
        LuFactorization f;
        f.lu_ = m;
        const std::size_t n = m.rows();
        f.perm_.resize(n);
        for (std::size_t i = 0; i < n; ++i) f.perm_[i] = i;
        const double pivot_floor = 1e-12 * m.inf_norm();

        for (std::size_t k = 0; k < n; ++k) {
            std::size_t piv = k;
            double best = std::abs(f.lu_(k, k));
            for (std::size_t i = k + 1; i < n; ++i) {
                const double v = std::abs(f.lu_(i, k));
                if (v > best) {
                    best = v;
                    piv = i;
                }
            }
            if (best <= pivot_floor)
                throw std::runtime_error("singular matrix: pivot " + std::to_string(k) +
                                         " below threshold in LU factorization");
            if (piv != k) {
                for (std::size_t j = 0; j < n; ++j) std::swap(f.lu_(k, j), f.lu_(piv, j));
                std::swap(f.perm_[k], f.perm_[piv]);
            }
            const double dk = f.lu_(k, k);
            const double* krow = f.lu_.row_data(k);
            for (std::size_t i = k + 1; i < n; ++i) {
                const double l = f.lu_(i, k) / dk;
                f.lu_(i, k) = l;
                double* irow = f.lu_.row_data(i);
                for (std::size_t j = k + 1; j < n; ++j) irow[j] -= l * krow[j];
            }
        }
        return f;
    }

    DenseVector solve(const DenseVector& b) const {
        const std::size_t n = lu_.rows();
        if (b.size() != n) throw std::invalid_argument("lu solve: rhs dimension mismatch");
        DenseVector y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = b[perm_[i]];
            for (std::size_t j = 0; j < i; ++j) acc -= lu_(i, j) * y[j];
            y[i] = acc;
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double acc = y[ii];
            for (std::size_t j = ii + 1; j < n; ++j) acc -= lu_(ii, j) * y[j];
            y[ii] = acc / lu_(ii, ii);
        }
        return y;
    }

    std::size_t dim() const { return lu_.rows(); }

private:
    DenseMatrix lu_;
    std::vector<std::size_t> perm_;
};

inline DenseVector lu_solve(const DenseMatrix& m, const DenseVector& b) {
    return LuFactorization::compute(m).solve(b);
}

// Extreme eigenvalues of a symmetric matrix by cyclic Jacobi sweeps.
// The input is symmetrized; asymmetry beyond 1e-12 (relative) is rejected.
inline std::pair<double, double> sym_eig_extremes(const DenseMatrix& s_in) {
    if (!s_in.is_square()) throw std::invalid_argument("sym_eig: matrix not square");
    if (!s_in.all_finite()) throw std::invalid_argument("sym_eig: non-finite entries");
    const std::size_t n = s_in.rows();
    if (n == 0) throw std::invalid_argument("sym_eig: empty matrix");

    double asym = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            asym = std::max(asym, std::abs(s_in(i, j) - s_in(j, i)));
    const double scale = s_in.max_abs();
    if (scale > 0.0 && asym > 1e-12 * scale)
        throw std::invalid_argument("sym_eig: matrix asymmetry exceeds tolerance");

    DenseMatrix a = symmetric_part(s_in);
    const double fro = a.frobenius_norm();
    if (fro == 0.0) return {0.0, 0.0};

    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += 2.0 * a(i, j) * a(i, j);
        if (std::sqrt(off) <= 1e-14 * fro) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }

    double lo = a(0, 0), hi = a(0, 0);
    for (std::size_t i = 1; i < n; ++i) {
        lo = std::min(lo, a(i, i));
        hi = std::max(hi, a(i, i));
    }
    return {lo, hi};
}

// e^M by scaling-and-squaring around a truncated Taylor core.
inline DenseMatrix expm(const DenseMatrix& m) {
    if (!m.is_square()) throw std::invalid_argument("expm: matrix not square");
    if (!m.all_finite()) throw std::invalid_argument("expm: non-finite entries");
    const std::size_t n = m.rows();

    const double norm = m.inf_norm();
    int squarings = 0;
    if (norm > 0.25) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / 0.25)));
        squarings = std::max(squarings, 0);
    }
    DenseMatrix scaled = m;
    scaled *= std::ldexp(1.0, -squarings);

    DenseMatrix result = DenseMatrix::identity(n);
    DenseMatrix term = DenseMatrix::identity(n);
    for (int k = 1; k <= 40; ++k) {
        term = term * scaled;
        term *= 1.0 / static_cast<double>(k);
        result += term;
        if (term.max_abs() <= 1e-17 * std::max(result.max_abs(), 1.0)) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    if (!result.all_finite()) throw std::runtime_error("expm: non-finite result");
    return result;
}

}  // namespace impc
