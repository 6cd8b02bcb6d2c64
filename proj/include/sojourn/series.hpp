#pragma once

// Truncated power series in one variable (order N: c_0..c_N) and in two
// variables (total degree <= N), dense matrices over any of the rings in use,
// and Gaussian elimination over those rings.

#include "errors.hpp"
#include "scalar.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace sojourn {

template <typename S>
class Series1 {
public:
    Series1() = default;
    explicit Series1(int order) : c_(static_cast<std::size_t>(check_order(order)) + 1, scalar_traits<S>::zero()) {}
    Series1(int order, std::vector<S> coeffs) : Series1(order)
    {
        if (coeffs.size() > c_.size()) coeffs.resize(c_.size());
        std::copy(coeffs.begin(), coeffs.end(), c_.begin());
    }

    static Series1 constant(int order, const S& v)
    {
        Series1 s(order);
        s.c_[0] = v;
        return s;
    }
    static Series1 variable(int order)
    {
        Series1 s(order);
        if (order >= 1) s.c_[1] = scalar_traits<S>::one();
        return s;
    }
    /// x^k, or the zero series when k exceeds the order.
    static Series1 monomial(int order, int k, const S& v = scalar_traits<S>::one())
    {
        Series1 s(order);
        if (k >= 0 && k <= order) s.c_[static_cast<std::size_t>(k)] = v;
        return s;
    }

    int order() const { return static_cast<int>(c_.size()) - 1; }
    const S& operator[](int k) const { return c_[static_cast<std::size_t>(k)]; }
    S& operator[](int k) { return c_[static_cast<std::size_t>(k)]; }
    S coeff(int k) const
    {
        if (k < 0 || k > order()) throw std::out_of_range("series coefficient out of range");
        return c_[static_cast<std::size_t>(k)];
    }
    const std::vector<S>& coeffs() const { return c_; }

    Series1& operator+=(const Series1& o)
    {
        same_order(o);
        for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
        return *this;
    }
    Series1& operator-=(const Series1& o)
    {
        same_order(o);
        for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
        return *this;
    }
    Series1& operator*=(const S& s)
    {
        for (auto& v : c_) v *= s;
        return *this;
    }
    friend Series1 operator+(Series1 a, const Series1& b) { return a += b; }
    friend Series1 operator-(Series1 a, const Series1& b) { return a -= b; }
    friend Series1 operator*(Series1 a, const S& s) { return a *= s; }
    friend Series1 operator*(const S& s, Series1 a) { return a *= s; }
    friend Series1 operator-(Series1 a)
    {
        for (auto& v : a.c_) v = -v;
        return a;
    }
    friend Series1 operator*(const Series1& a, const Series1& b)
    {
        a.same_order(b);
        const int n = a.order();
        Series1 out(n);
        for (int i = 0; i <= n; ++i) {
            if (scalar_traits<S>::is_zero(a[i])) continue;
            for (int j = 0; i + j <= n; ++j) out[i + j] += a[i] * b[j];
        }
        return out;
    }
    Series1& operator*=(const Series1& o) { return *this = *this * o; }

    /// Multiplicative inverse; the constant term must be a unit.
    Series1 invert() const
    {
        if (!is_unit(c_[0])) throw numerical_error("not a unit");
        const int n = order();
        Series1 g(n);
        S inv0 = scalar_traits<S>::one() / c_[0];
        g[0] = inv0;
        for (int k = 1; k <= n; ++k) {
            S acc = scalar_traits<S>::zero();
            for (int j = 1; j <= k; ++j) acc += c_[static_cast<std::size_t>(j)] * g[k - j];
            g[k] = -acc * inv0;
        }
        return g;
    }

    /// Square root with constant term 1.
    Series1 sqrt() const
    {
        if (!nearly_equal(c_[0], scalar_traits<S>::one(), 1e-14)) {
            throw std::invalid_argument("sqrt requires unit constant term");
        }
        const int n = order();
        Series1 r(n);
        r[0] = scalar_traits<S>::one();
        for (int k = 1; k <= n; ++k) {
            S acc = c_[static_cast<std::size_t>(k)];
            for (int j = 1; j < k; ++j) acc -= r[j] * r[k - j];
            r[k] = acc / 2;
        }
        return r;
    }

    /// x^k * s, truncated.
    Series1 shift(int k) const
    {
        Series1 out(order());
        for (int i = 0; i + k <= order(); ++i) out[i + k] = c_[static_cast<std::size_t>(i)];
        return out;
    }

    /// s / x for s with zero constant term; the result has order N-1.
    Series1 divide_by_x() const
    {
        if (!scalar_traits<S>::is_zero(c_[0])) throw std::invalid_argument("divide_by_x needs zero constant term");
        if (order() == 0) throw std::invalid_argument("divide_by_x on an order-0 series");
        Series1 out(order() - 1);
        for (int i = 1; i <= order(); ++i) out[i - 1] = c_[static_cast<std::size_t>(i)];
        return out;
    }

    Series1 truncated(int new_order) const
    {
        Series1 out(new_order);
        for (int k = 0; k <= std::min(new_order, order()); ++k) out[k] = c_[static_cast<std::size_t>(k)];
        return out;
    }

    template <typename T>
    T evaluate(const T& x) const
    {
        T acc = T(0);
        for (int k = order(); k >= 0; --k) acc = acc * x + scalar_cast<T>(c_[static_cast<std::size_t>(k)]);
        return acc;
    }

    friend bool operator==(const Series1& a, const Series1& b) { return a.c_ == b.c_; }

private:
    static int check_order(int order)
    {
        if (order < 0) throw std::invalid_argument("negative series order");
        return order;
    }
    static bool is_unit(const S& v)
    {
        if constexpr (scalar_traits<S>::exact) {
            return !scalar_traits<S>::is_zero(v);
        } else {
            return std::fabs(v) > 1e-14;
        }
    }
    void same_order(const Series1& o) const
    {
        if (o.c_.size() != c_.size()) throw std::invalid_argument("series order mismatch");
    }

    std::vector<S> c_;
};

/// Bivariate series truncated at total degree N; coefficient (a,b) multiplies x^a y^b.
template <typename S>
class Series2 {
public:
    Series2() = default;
    explicit Series2(int order) : order_(order)
    {
        if (order < 0) throw std::invalid_argument("negative series order");
        c_.assign(index(0, order) + 1, scalar_traits<S>::zero());
    }

    static Series2 constant(int order, const S& v)
    {
        Series2 s(order);
        s.c_[0] = v;
        return s;
    }
    static Series2 var_x(int order)
    {
        Series2 s(order);
        if (order >= 1) s.at(1, 0) = scalar_traits<S>::one();
        return s;
    }
    static Series2 var_y(int order)
    {
        Series2 s(order);
        if (order >= 1) s.at(0, 1) = scalar_traits<S>::one();
        return s;
    }
    static Series2 lift_x(const Series1<S>& f)
    {
        Series2 s(f.order());
        for (int a = 0; a <= f.order(); ++a) s.at(a, 0) = f[a];
        return s;
    }
    static Series2 lift_y(const Series1<S>& f)
    {
        Series2 s(f.order());
        for (int b = 0; b <= f.order(); ++b) s.at(0, b) = f[b];
        return s;
    }
    /// (x/y) f(y) for f with zero constant term; total degree is preserved.
    static Series2 x_over_y(const Series1<S>& f)
    {
        if (!scalar_traits<S>::is_zero(f[0])) throw std::invalid_argument("x/y shift needs zero constant term");
        Series2 s(f.order());
        for (int b = 1; b <= f.order(); ++b) s.at(1, b - 1) = f[b];
        return s;
    }

    int order() const { return order_; }

    S& at(int a, int b) { return c_[index(a, b)]; }
    const S& at(int a, int b) const { return c_[index(a, b)]; }
    S coeff(int a, int b) const
    {
        if (a < 0 || b < 0 || a + b > order_) throw std::out_of_range("series coefficient out of range");
        return at(a, b);
    }
    /// Row n of the bivariate table: entry m is the coefficient of x^m y^(n-m).
    std::vector<S> slice_n(int n) const
    {
        if (n < 0 || n > order_) throw std::out_of_range("slice beyond series order");
        std::vector<S> row(static_cast<std::size_t>(n) + 1);
        for (int m = 0; m <= n; ++m) row[static_cast<std::size_t>(m)] = at(m, n - m);
        return row;
    }
    Series1<S> diagonal() const
    {
        Series1<S> d(order_);
        for (int n = 0; n <= order_; ++n) {
            for (int m = 0; m <= n; ++m) d[n] += at(m, n - m);
        }
        return d;
    }
    Series1<S> at_y_zero() const
    {
        Series1<S> d(order_);
        for (int a = 0; a <= order_; ++a) d[a] = at(a, 0);
        return d;
    }
    Series1<S> at_x_zero() const
    {
        Series1<S> d(order_);
        for (int b = 0; b <= order_; ++b) d[b] = at(0, b);
        return d;
    }
    const S& constant_term() const { return c_[0]; }

    Series2& operator+=(const Series2& o)
    {
        same_order(o);
        for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
        return *this;
    }
    Series2& operator-=(const Series2& o)
    {
        same_order(o);
        for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
        return *this;
    }
    Series2& operator*=(const S& s)
    {
        for (auto& v : c_) v *= s;
        return *this;
    }
    friend Series2 operator+(Series2 a, const Series2& b) { return a += b; }
    friend Series2 operator-(Series2 a, const Series2& b) { return a -= b; }
    friend Series2 operator*(Series2 a, const S& s) { return a *= s; }
    friend Series2 operator*(const S& s, Series2 a) { return a *= s; }
    friend Series2 operator-(Series2 a)
    {
        for (auto& v : a.c_) v = -v;
        return a;
    }
    friend Series2 operator*(const Series2& f, const Series2& g)
    {
        f.same_order(g);
        const int n = f.order_;
        Series2 out(n);
        for (int d1 = 0; d1 <= n; ++d1) {
            for (int a1 = 0; a1 <= d1; ++a1) {
                const S& u = f.at(a1, d1 - a1);
                if (scalar_traits<S>::is_zero(u)) continue;
                for (int d2 = 0; d1 + d2 <= n; ++d2) {
                    for (int a2 = 0; a2 <= d2; ++a2) out.at(a1 + a2, d1 - a1 + d2 - a2) += u * g.at(a2, d2 - a2);
                }
            }
        }
        return out;
    }
    Series2& operator*=(const Series2& o) { return *this = *this * o; }

    Series2 invert() const
    {
        const S& f0 = c_[0];
        bool unit;
        if constexpr (scalar_traits<S>::exact) {
            unit = !scalar_traits<S>::is_zero(f0);
        } else {
            unit = std::fabs(f0) > 1e-14;
        }
        if (!unit) throw numerical_error("not a unit");
        S inv0 = scalar_traits<S>::one() / f0;
        Series2 g(order_);
        g.at(0, 0) = inv0;
        for (int d = 1; d <= order_; ++d) {
            for (int a = 0; a <= d; ++a) {
                const int b = d - a;
                S acc = scalar_traits<S>::zero();
                for (int i = 0; i <= a; ++i) {
                    for (int j = 0; j <= b; ++j) {
                        if (i == 0 && j == 0) continue;
                        const S& fij = at(i, j);
                        if (scalar_traits<S>::is_zero(fij)) continue;
                        acc += fij * g.at(a - i, b - j);
                    }
                }
                g.at(a, b) = -acc * inv0;
            }
        }
        return g;
    }

    template <typename T>
    T evaluate(const T& x, const T& y) const
    {
        T acc = T(0);
        for (int a = 0; a <= order_; ++a) {
            T inner = T(0);
            for (int b = order_ - a; b >= 0; --b) inner = inner * y + scalar_cast<T>(at(a, b));
            T xa = T(1);
            for (int k = 0; k < a; ++k) xa *= x;
            acc += xa * inner;
        }
        return acc;
    }

    friend bool operator==(const Series2& a, const Series2& b) { return a.order_ == b.order_ && a.c_ == b.c_; }

private:
    static std::size_t index(int a, int b)
    {
        const std::size_t d = static_cast<std::size_t>(a + b);
        return d * (d + 1) / 2 + static_cast<std::size_t>(b);
    }
    void same_order(const Series2& o) const
    {
        if (o.order_ != order_) throw std::invalid_argument("series order mismatch");
    }

    int order_ = 0;
    std::vector<S> c_;
};

// Ring traits: uniform access to zero/one/inverse/pivot size for the element
// types used by the linear solver (plain scalars and the two series types).
template <typename T>
struct ring_traits;

template <typename T>
struct scalar_ring {
    using scalar = T;
    static constexpr bool is_series = false;
    static T zero_like(const T&) { return scalar_traits<T>::zero(); }
    static T one_like(const T&) { return scalar_traits<T>::one(); }
    static T from_scalar_like(const T&, const T& v) { return v; }
    static T inverse(const T& v) { return scalar_traits<T>::one() / v; }
    static double pivot_size(const T& v) { return std::fabs(scalar_traits<T>::to_double(v)); }
    static bool pivot_nonzero(const T& v) { return !scalar_traits<T>::is_zero(v); }
};

template <>
struct ring_traits<double> : scalar_ring<double> {};
template <>
struct ring_traits<Rational> : scalar_ring<Rational> {};

template <typename S>
struct ring_traits<Series1<S>> {
    using scalar = S;
    static constexpr bool is_series = true;
    static Series1<S> zero_like(const Series1<S>& p) { return Series1<S>(p.order()); }
    static Series1<S> one_like(const Series1<S>& p) { return Series1<S>::constant(p.order(), scalar_traits<S>::one()); }
    static Series1<S> from_scalar_like(const Series1<S>& p, const S& v) { return Series1<S>::constant(p.order(), v); }
    static Series1<S> inverse(const Series1<S>& v) { return v.invert(); }
    static double pivot_size(const Series1<S>& v) { return std::fabs(scalar_traits<S>::to_double(v[0])); }
    static bool pivot_nonzero(const Series1<S>& v) { return !scalar_traits<S>::is_zero(v[0]); }
};

template <typename S>
struct ring_traits<Series2<S>> {
    using scalar = S;
    static constexpr bool is_series = true;
    static Series2<S> zero_like(const Series2<S>& p) { return Series2<S>(p.order()); }
    static Series2<S> one_like(const Series2<S>& p) { return Series2<S>::constant(p.order(), scalar_traits<S>::one()); }
    static Series2<S> from_scalar_like(const Series2<S>& p, const S& v) { return Series2<S>::constant(p.order(), v); }
    static Series2<S> inverse(const Series2<S>& v) { return v.invert(); }
    static double pivot_size(const Series2<S>& v) { return std::fabs(scalar_traits<S>::to_double(v.constant_term())); }
    static bool pivot_nonzero(const Series2<S>& v) { return !scalar_traits<S>::is_zero(v.constant_term()); }
};

template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, const T& fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n, const T& proto)
    {
        Matrix m(n, n, ring_traits<T>::zero_like(proto));
        for (std::size_t i = 0; i < n; ++i) m(i, i) = ring_traits<T>::one_like(proto);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    Matrix transpose() const
    {
        if (data_.empty()) return Matrix(cols_, rows_, T());
        Matrix t(cols_, rows_, data_.front());
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix& operator+=(const Matrix& o)
    {
        check_same(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }
    Matrix& operator-=(const Matrix& o)
    {
        check_same(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }
    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(const Matrix& a, const Matrix& b)
    {
        if (a.cols_ != b.rows_) throw std::invalid_argument("matrix shape mismatch in product");
        const T& proto = !a.data_.empty() ? a.data_.front() : b.data_.front();
        Matrix out(a.rows_, b.cols_, ring_traits<T>::zero_like(proto));
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k)
                for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += a(i, k) * b(k, j);
        return out;
    }
    template <typename U>
    Matrix scaled(const U& s) const
    {
        Matrix out = *this;
        for (auto& v : out.data_) v = v * s;
        return out;
    }

private:
    void check_same(const Matrix& o) const
    {
        if (o.rows_ != rows_ || o.cols_ != cols_) throw std::invalid_argument("matrix shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

template <typename S>
using SeriesMatrix = Matrix<Series1<S>>;

struct SolveDiagnostics {
    double min_pivot = std::numeric_limits<double>::infinity();
    bool ill_conditioned = false;
};

/// Solves A X = B by Gaussian elimination. For series rings the pivot is the
/// entry with the largest constant term, which must be a unit.
template <typename T>
Matrix<T> solve_linear(Matrix<T> a, Matrix<T> b, SolveDiagnostics* diag = nullptr)
{
    using R = ring_traits<T>;
    const std::size_t n = a.rows();
    if (a.cols() != n) throw std::invalid_argument("solve_linear needs a square matrix");
    if (b.rows() != n) throw std::invalid_argument("right-hand side has wrong row count");
    double scale = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, R::pivot_size(a(i, j)));

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t best = n;
        double best_size = -1;
        for (std::size_t i = k; i < n; ++i) {
            if (!R::pivot_nonzero(a(i, k))) continue;
            const double s = R::pivot_size(a(i, k));
            if (s > best_size) {
                best_size = s;
                best = i;
            }
        }
        bool singular = best == n;
        if constexpr (!scalar_traits<typename R::scalar>::exact) {
            if (!singular && best_size <= 1e-14 * std::max(scale, 1.0)) singular = true;
        }
        if (singular) {
            throw numerical_error(R::is_series ? "system singular at x=0" : "singular linear system");
        }
        if (diag) {
            diag->min_pivot = std::min(diag->min_pivot, best_size);
            if constexpr (!scalar_traits<typename R::scalar>::exact) {
                if (best_size < 1e-6) diag->ill_conditioned = true;
            }
        }
        if (best != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(best, j));
            for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(k, j), b(best, j));
        }
        const T inv = R::inverse(a(k, k));
        for (std::size_t j = k; j < n; ++j) a(k, j) = a(k, j) * inv;
        for (std::size_t j = 0; j < b.cols(); ++j) b(k, j) = b(k, j) * inv;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k) continue;
            if (!R::pivot_nonzero(a(i, k)) && a(i, k) == R::zero_like(a(i, k))) continue;
            const T factor = a(i, k);
            for (std::size_t j = k; j < n; ++j) a(i, j) -= factor * a(k, j);
            for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) -= factor * b(k, j);
        }
    }
    return b;
}

template <typename T>
Matrix<T> invert_matrix(const Matrix<T>& a, SolveDiagnostics* diag = nullptr)
{
    return solve_linear(a, Matrix<T>::identity(a.rows(), a(0, 0)), diag);
}

}  // namespace sojourn
