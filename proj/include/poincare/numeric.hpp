#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

namespace poincare {

/// Raised when an iterative method exhausts its budget.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Neumaier-compensated accumulator. All reductions in the library go
/// through this in ascending index order.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) noexcept {
    CompensatedSum acc;
    for (double x : xs) acc += x;
    return acc.value();
}

inline double compensated_dot(std::span<const double> a, std::span<const double> b) noexcept {
    CompensatedSum acc;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc.value();
}

/// |x|^p with integer p up to 3 short-circuited.
inline double abs_pow(double x, double p) noexcept {
    const double a = std::abs(x);
    if (p == 1.0) return a;
    if (p == 2.0) return a * a;
    if (p == 3.0) return a * a * a;
    return std::pow(a, p);
}

inline void require(bool ok, const char* message) {
    if (!ok) throw std::invalid_argument(message);
}

inline void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

/// Shortest round-trip decimal form, '.' separator regardless of locale.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

} // namespace poincare
