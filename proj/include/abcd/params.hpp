#pragma once

#include "abcd/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace abcd {

inline constexpr double kStructTol = 1e-12;

// raw coefficient triple, d = b implied; predicates accept it unvalidated
struct Triple {
    double a, b, c;
};

struct NuB {
    double nu, b;
};

struct NormParams {
    double a_tilde, c_tilde;
};

class PhysParams {
public:
    double a() const { return a_; }
    double b() const { return b_; }
    double c() const { return c_; }
    double d() const { return d_; }
    double theta() const { return theta_; }
    Triple triple() const { return {a_, b_, c_}; }

    friend PhysParams validate_phys(double a, double b, double c, double d);
    friend PhysParams from_nu_b(double nu, double b);

private:
    PhysParams(double a, double b, double c, double d, double theta)
        : a_(a), b_(b), c_(c), d_(d), theta_(theta) {}
    double a_, b_, c_, d_, theta_;
};

namespace detail {
inline std::string fmt4(double a, double b, double c, double d) {
    std::ostringstream os;
    os.precision(17);
    os << "(a,b,c,d)=(" << a << "," << b << "," << c << "," << d << ")";
    return os.str();
}
} // namespace detail

inline PhysParams validate_phys(double a, double b, double c, double d) {
    const auto tag = detail::fmt4(a, b, c, d);
    if (!(std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(d)))
        throw Error(ErrorCode::SignViolation, "non-finite coefficient " + tag);
    if (std::abs(d - b) > kStructTol)
        throw Error(ErrorCode::NotHamiltonian, "d must equal b " + tag);
    if (a >= 0.0 || c >= 0.0)
        throw Error(ErrorCode::SignViolation, "a and c must be negative " + tag);
    if (std::abs(a + b + c + d - 1.0 / 3.0) > kStructTol)
        throw Error(ErrorCode::SumViolation, "a+b+c+d must be 1/3 " + tag);
    const double theta2 = 1.0 - 2.0 * (c + d);
    if (theta2 < -kStructTol || theta2 > 1.0 + kStructTol)
        throw Error(ErrorCode::ThetaOutOfRange, "theta^2 outside [0,1] " + tag);
    const double theta = std::sqrt(std::clamp(theta2, 0.0, 1.0));
    return PhysParams(a, b, c, b, theta);
}

inline bool in_R0(double nu, double b) {
    return b > 1.0 / 6.0 && nu >= 0.0 && nu <= 1.0 && nu > 2.0 / 3.0 - 2.0 * b && nu < 2.0 * b;
}

inline PhysParams from_nu_b(double nu, double b) {
    if (!in_R0(nu, b)) {
        std::ostringstream os;
        os.precision(17);
        os << "(nu,b)=(" << nu << "," << b << ")";
        throw Error(ErrorCode::OutsideR0, os.str());
    }
    const double a = -nu / 2.0 + 1.0 / 3.0 - b;
    const double c = nu / 2.0 - b;
    return PhysParams(a, b, c, b, std::sqrt(std::clamp(1.0 - nu, 0.0, 1.0)));
}

inline NuB to_nu_b(const PhysParams& p) { return {2.0 * (p.c() + p.b()), p.b()}; }

inline NormParams normalize(const PhysParams& p) { return {p.a() / p.b(), p.c() / p.b()}; }

inline PhysParams a_equals_c_line(double b) {
    if (!(b > 1.0 / 6.0))
        throw Error(ErrorCode::BTooSmall, "a=c line needs b > 1/6");
    const double a = 1.0 / 6.0 - b;
    return validate_phys(a, b, a, b);
}

inline bool on_ac_line(const Triple& t) { return std::abs(t.a - t.c) <= kStructTol; }

} // namespace abcd
