#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace impc {

class DenseVector {
public:
    DenseVector() = default;
    explicit DenseVector(std::size_t dim, double fill = 0.0) : v_(dim, fill) {}
    DenseVector(std::initializer_list<double> init) : v_(init) {}

    static DenseVector zeros(std::size_t dim) { return DenseVector(dim); }

    std::size_t size() const { return v_.size(); }
    double& operator[](std::size_t i) { return v_[i]; }
    double operator[](std::size_t i) const { return v_[i]; }
    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }

    DenseVector segment(std::size_t offset, std::size_t len) const {
        DenseVector out(len);
        for (std::size_t i = 0; i < len; ++i) out[i] = v_[offset + i];
        return out;
    }
    void set_segment(std::size_t offset, const DenseVector& src) {
        for (std::size_t i = 0; i < src.size(); ++i) v_[offset + i] = src[i];
    }

    DenseVector& operator+=(const DenseVector& o) {
        for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o[i];
        return *this;
    }
    DenseVector& operator-=(const DenseVector& o) {
        for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o[i];
        return *this;
    }
    DenseVector& operator*=(double s) {
        for (double& e : v_) e *= s;
        return *this;
    }

    double inf_norm() const {
        double m = 0.0;
        for (double e : v_) m = std::max(m, std::abs(e));
        return m;
    }
    double two_norm() const { return std::sqrt(dot(*this)); }
    // Four-lane accumulation: fixed deterministic order, short dependency chains.
    double dot(const DenseVector& o) const {
        const std::size_t n = v_.size();
        double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
        std::size_t i = 0;
        for (; i + 4 <= n; i += 4) {
            a0 += v_[i] * o[i];
            a1 += v_[i + 1] * o[i + 1];
            a2 += v_[i + 2] * o[i + 2];
            a3 += v_[i + 3] * o[i + 3];
        }
        for (; i < n; ++i) a0 += v_[i] * o[i];
        return (a0 + a1) + (a2 + a3);
    }
    bool all_finite() const {
        for (double e : v_)
            if (!std::isfinite(e)) return false;
        return true;
    }

private:
    std::vector<double> v_;
};

inline DenseVector operator+(DenseVector a, const DenseVector& b) { return a += b; }
inline DenseVector operator-(DenseVector a, const DenseVector& b) { return a -= b; }
inline DenseVector operator*(double s, DenseVector a) { return a *= s; }
inline DenseVector operator-(DenseVector a) { return a *= -1.0; }

// Row-major dense matrix. Entries are plain doubles; dimension checks are the
// caller-facing error surface, numerical validity is checked by the kernels.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    static DenseMatrix zeros(std::size_t rows, std::size_t cols) { return DenseMatrix(rows, cols); }
    static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        const std::size_t r = rows.size();
        const std::size_t c = r == 0 ? 0 : rows.begin()->size();
        DenseMatrix m(r, c);
        std::size_t i = 0;
        for (const auto& row : rows) {
            if (row.size() != c) throw std::invalid_argument("from_rows: ragged row lengths");
            std::size_t j = 0;
            for (double e : row) m(i, j++) = e;
            ++i;
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
    const double* row_data(std::size_t i) const { return a_.data() + i * cols_; }
    double* row_data(std::size_t i) { return a_.data() + i * cols_; }

    DenseMatrix transpose() const {
        DenseMatrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    void set_block(std::size_t i0, std::size_t j0, const DenseMatrix& b) {
        if (i0 + b.rows() > rows_ || j0 + b.cols() > cols_)
            throw std::invalid_argument("set_block: block exceeds matrix bounds");
        for (std::size_t i = 0; i < b.rows(); ++i)
            for (std::size_t j = 0; j < b.cols(); ++j) (*this)(i0 + i, j0 + j) = b(i, j);
    }
    DenseMatrix block(std::size_t i0, std::size_t j0, std::size_t r, std::size_t c) const {
        if (i0 + r > rows_ || j0 + c > cols_)
            throw std::invalid_argument("block: range exceeds matrix bounds");
        DenseMatrix out(r, c);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) out(i, j) = (*this)(i0 + i, j0 + j);
        return out;
    }

    void multiply_into(const DenseVector& x, DenseVector& out) const {
        if (x.size() != cols_) throw std::invalid_argument("matvec: dimension mismatch");
        if (out.size() != rows_) out = DenseVector(rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            const double* row = row_data(i);
            double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
            std::size_t j = 0;
            for (; j + 4 <= cols_; j += 4) {
                a0 += row[j] * x[j];
                a1 += row[j + 1] * x[j + 1];
                a2 += row[j + 2] * x[j + 2];
                a3 += row[j + 3] * x[j + 3];
            }
            for (; j < cols_; ++j) a0 += row[j] * x[j];
            out[i] = (a0 + a1) + (a2 + a3);
        }
    }
    DenseVector operator*(const DenseVector& x) const {
        DenseVector out(rows_);
        multiply_into(x, out);
        return out;
    }
    // y = Mᵀ x without forming the transpose; four rows per pass.
    void transpose_multiply_into(const DenseVector& x, DenseVector& out) const {
        if (x.size() != rows_) throw std::invalid_argument("matvec(T): dimension mismatch");
        if (out.size() != cols_) out = DenseVector(cols_);
        for (std::size_t j = 0; j < cols_; ++j) out[j] = 0.0;
        std::size_t i = 0;
        for (; i + 4 <= rows_; i += 4) {
            const double* r0 = row_data(i);
            const double* r1 = row_data(i + 1);
            const double* r2 = row_data(i + 2);
            const double* r3 = row_data(i + 3);
            const double x0 = x[i], x1 = x[i + 1], x2 = x[i + 2], x3 = x[i + 3];
            for (std::size_t j = 0; j < cols_; ++j)
                out[j] += (r0[j] * x0 + r1[j] * x1) + (r2[j] * x2 + r3[j] * x3);
        }
        for (; i < rows_; ++i) {
            const double* row = row_data(i);
            const double xi = x[i];
            for (std::size_t j = 0; j < cols_; ++j) out[j] += row[j] * xi;
        }
    }
    DenseVector transpose_times(const DenseVector& x) const {
        DenseVector out(cols_);
        transpose_multiply_into(x, out);
        return out;
    }

    DenseMatrix operator*(const DenseMatrix& b) const {
        if (cols_ != b.rows()) throw std::invalid_argument("matmul: dimension mismatch");
        DenseMatrix out(rows_, b.cols());
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t k = 0; k < cols_; ++k) {
                const double aik = (*this)(i, k);
                if (aik == 0.0) continue;
                const double* brow = b.row_data(k);
                double* orow = out.row_data(i);
                for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
            }
        }
        return out;
    }

    DenseMatrix& operator+=(const DenseMatrix& o) {
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }
    DenseMatrix& operator-=(const DenseMatrix& o) {
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
        return *this;
    }
    DenseMatrix& operator*=(double s) {
        for (double& e : a_) e *= s;
        return *this;
    }

    // Induced infinity norm (max absolute row sum).
    double inf_norm() const {
        double m = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
            m = std::max(m, s);
        }
        return m;
    }
    double max_abs() const {
        double m = 0.0;
        for (double e : a_) m = std::max(m, std::abs(e));
        return m;
    }
    double frobenius_norm() const {
        double s = 0.0;
        for (double e : a_) s += e * e;
        return std::sqrt(s);
    }
    bool all_finite() const {
        for (double e : a_)
            if (!std::isfinite(e)) return false;
        return true;
    }
    bool is_square() const { return rows_ == cols_; }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

inline DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
inline DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
inline DenseMatrix operator*(double s, DenseMatrix a) { return a *= s; }

inline DenseMatrix symmetric_part(const DenseMatrix& m) {
    if (!m.is_square()) throw std::invalid_argument("symmetric_part: matrix not square");
    DenseMatrix s(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        s(i, i) = m(i, i);
        for (std::size_t j = i + 1; j < m.cols(); ++j) {
            const double v = 0.5 * (m(i, j) + m(j, i));
            s(i, j) = v;
            s(j, i) = v;
        }
    }
    return s;
}

inline void require_dim(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("dimension mismatch: " + what);
}

}  // namespace impc
