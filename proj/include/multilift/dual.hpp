/*
 Copyright 2026 The Multilift Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef MULTILIFT_DUAL_HPP
#define MULTILIFT_DUAL_HPP

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <type_traits>

namespace multilift {
namespace ad {

/**
 * @brief Forward-mode dual number with a single tangent.
 *
 * Nesting Dual<Dual<double>> gives second derivatives: seed the inner
 * tangent with direction i and the outer tangent with direction j, and
 * the result's d.d holds the (i, j) Hessian entry.
 */
template <typename T>
struct Dual {
    T v{};
    T d{};

    constexpr Dual() = default;
    template <typename U, typename = std::enable_if_t<std::is_arithmetic_v<U>>>
    constexpr Dual(U x) : v(static_cast<double>(x)), d(0.0) {}
    constexpr Dual(const T& value, const T& tangent) : v(value), d(tangent) {}

    Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
    Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
    Dual& operator*=(const Dual& o) { *this = *this * o; return *this; }
    Dual& operator/=(const Dual& o) { *this = *this / o; return *this; }

    friend Dual operator+(const Dual& a, const Dual& b) { return {a.v + b.v, a.d + b.d}; }
    friend Dual operator-(const Dual& a, const Dual& b) { return {a.v - b.v, a.d - b.d}; }
    friend Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
    friend Dual operator+(const Dual& a) { return a; }
    friend Dual operator*(const Dual& a, const Dual& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
    friend Dual operator/(const Dual& a, const Dual& b) {
        T inv = T(1.0) / b.v;
        T q = a.v * inv;
        return {q, (a.d - q * b.d) * inv};
    }

    friend Dual operator+(const Dual& a, double b) { return {a.v + b, a.d}; }
    friend Dual operator+(double a, const Dual& b) { return {a + b.v, b.d}; }
    friend Dual operator-(const Dual& a, double b) { return {a.v - b, a.d}; }
    friend Dual operator-(double a, const Dual& b) { return {a - b.v, -b.d}; }
    friend Dual operator*(const Dual& a, double b) { return {a.v * b, a.d * b}; }
    friend Dual operator*(double a, const Dual& b) { return {a * b.v, a * b.d}; }
    friend Dual operator/(const Dual& a, double b) { return {a.v / b, a.d / b}; }
    friend Dual operator/(double a, const Dual& b) { return Dual(a) / b; }

    friend bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
    friend bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }
    friend bool operator<=(const Dual& a, const Dual& b) { return a.v <= b.v; }
    friend bool operator>=(const Dual& a, const Dual& b) { return a.v >= b.v; }
    friend bool operator==(const Dual& a, const Dual& b) { return a.v == b.v; }
    friend bool operator!=(const Dual& a, const Dual& b) { return a.v != b.v; }
    friend bool operator<(const Dual& a, double b) { return a.v < b; }
    friend bool operator>(const Dual& a, double b) { return a.v > b; }
    friend bool operator<=(const Dual& a, double b) { return a.v <= b; }
    friend bool operator>=(const Dual& a, double b) { return a.v >= b; }
    friend bool operator<(double a, const Dual& b) { return a < b.v; }
    friend bool operator>(double a, const Dual& b) { return a > b.v; }
};

using D1 = Dual<double>;
using D2 = Dual<D1>;

// Plain value of any (possibly nested) scalar.
inline double value(double x) { return x; }
template <typename T>
double value(const Dual<T>& x) { return value(x.v); }

template <typename T>
Dual<T> sqrt(const Dual<T>& x) {
    using std::sqrt;
    T s = sqrt(x.v);
    return {s, x.d / (2.0 * s)};
}
template <typename T>
Dual<T> exp(const Dual<T>& x) {
    using std::exp;
    T e = exp(x.v);
    return {e, e * x.d};
}
template <typename T>
Dual<T> log(const Dual<T>& x) {
    using std::log;
    return {log(x.v), x.d / x.v};
}
template <typename T>
Dual<T> sin(const Dual<T>& x) {
    using std::sin;
    using std::cos;
    return {sin(x.v), cos(x.v) * x.d};
}
template <typename T>
Dual<T> cos(const Dual<T>& x) {
    using std::sin;
    using std::cos;
    return {cos(x.v), -sin(x.v) * x.d};
}
template <typename T>
Dual<T> abs(const Dual<T>& x) {
    return value(x) < 0.0 ? -x : x;
}
template <typename T>
Dual<T> pow(const Dual<T>& x, double p) {
    using std::pow;
    T y = pow(x.v, p);
    return {y, p * pow(x.v, p - 1.0) * x.d};
}
template <typename T>
Dual<T> abs2(const Dual<T>& x) { return x * x; }
template <typename T>
const Dual<T>& conj(const Dual<T>& x) { return x; }
template <typename T>
const Dual<T>& real(const Dual<T>& x) { return x; }
template <typename T>
Dual<T> imag(const Dual<T>&) { return Dual<T>(0.0); }
template <typename T>
bool isfinite(const Dual<T>& x) {
    using std::isfinite;
    return isfinite(x.v) && isfinite(x.d);
}
template <typename T>
bool isnan(const Dual<T>& x) {
    using std::isnan;
    return isnan(x.v) || isnan(x.d);
}

// Tangent extraction helpers used by the derivative drivers.
inline double tangent(const D1& x) { return x.d; }
inline double second(const D2& x) { return x.d.d; }

}  // namespace ad
}  // namespace multilift

namespace Eigen {
template <typename T>
struct NumTraits<multilift::ad::Dual<T>> : GenericNumTraits<double> {
    using Real = multilift::ad::Dual<T>;
    using NonInteger = multilift::ad::Dual<T>;
    using Nested = multilift::ad::Dual<T>;
    using Literal = multilift::ad::Dual<T>;
    enum {
        IsComplex = 0,
        IsInteger = 0,
        IsSigned = 1,
        RequireInitialization = 1,
        ReadCost = 2,
        AddCost = 4,
        MulCost = 8
    };
    static inline Real epsilon() { return Real(std::numeric_limits<double>::epsilon()); }
    static inline Real dummy_precision() { return Real(1e-12); }
    static inline Real highest() { return Real(std::numeric_limits<double>::max()); }
    static inline Real lowest() { return Real(std::numeric_limits<double>::lowest()); }
    static inline int digits10() { return std::numeric_limits<double>::digits10; }
};

template <typename T, typename BinaryOp>
struct ScalarBinaryOpTraits<multilift::ad::Dual<T>, double, BinaryOp> {
    using ReturnType = multilift::ad::Dual<T>;
};
template <typename T, typename BinaryOp>
struct ScalarBinaryOpTraits<double, multilift::ad::Dual<T>, BinaryOp> {
    using ReturnType = multilift::ad::Dual<T>;
};
}  // namespace Eigen

#endif  // MULTILIFT_DUAL_HPP
