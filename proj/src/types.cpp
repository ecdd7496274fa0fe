#include "dsmle/types.hpp"

#include <cstdio>

namespace dsmle {

ParameterBox::ParameterBox(std::vector<Interval> dims) : dims_(std::move(dims)) {
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        if (!(dims_[i].lo <= dims_[i].hi)) {
            throw Error("parameter box dimension " + std::to_string(i) + " has lo > hi");
        }
    }
}

bool ParameterBox::contains(const ParameterPoint& p, double tol) const {
    if (p.size() != dims_.size()) return false;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        if (p[i] < dims_[i].lo - tol || p[i] > dims_[i].hi + tol) return false;
    }
    return true;
}

ParameterPoint ParameterBox::clamp(ParameterPoint p) const {
    for (std::size_t i = 0; i < dims_.size() && i < p.size(); ++i) {
        if (p[i] < dims_[i].lo) p[i] = dims_[i].lo;
        if (p[i] > dims_[i].hi) p[i] = dims_[i].hi;
    }
    return p;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::multiplied(const Matrix& rhs) const {
    if (cols_ != rhs.rows_) throw Error("matrix dimension mismatch in multiply");
    Matrix out(rows_, rhs.cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = 0; k < cols_; ++k) {
            const double v = (*this)(i, k);
            if (v == 0.0) continue;
            for (std::size_t j = 0; j < rhs.cols_; ++j) out(i, j) += v * rhs(k, j);
        }
    }
    return out;
}

Matrix Matrix::power(unsigned k) const {
    if (rows_ != cols_) throw Error("matrix power requires a square matrix");
    Matrix result = Matrix::identity(rows_);
    Matrix base = *this;
    while (k > 0) {
        if (k & 1u) result = result.multiplied(base);
        base = base.multiplied(base);
        k >>= 1u;
    }
    return result;
}

std::vector<double> Matrix::row_sums() const {
    std::vector<double> s(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) s[i] += (*this)(i, j);
    }
    return s;
}

std::vector<double> left_multiply(const std::vector<double>& v, const Matrix& m) {
    if (v.size() != m.rows()) throw Error("vector/matrix dimension mismatch");
    std::vector<double> out(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double vi = v[i];
        if (vi == 0.0) continue;
        for (std::size_t j = 0; j < m.cols(); ++j) out[j] += vi * m(i, j);
    }
    return out;
}

std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 14695981039346656037ull;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double euclidean_distance(const ParameterPoint& a, const ParameterPoint& b) {
    if (a.size() != b.size()) throw Error("parameter dimension mismatch in distance");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace dsmle
