#pragma once

#include "abcd/error.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <string>

namespace abcd {

enum class Profile { Tanh, Sech2, Sech4, HalfOnePlusTanh, HalfOneMinusTanh };

inline const char* to_string(Profile p) {
    switch (p) {
    case Profile::Tanh: return "tanh";
    case Profile::Sech2: return "sech2";
    case Profile::Sech4: return "sech4";
    case Profile::HalfOnePlusTanh: return "half_one_plus_tanh";
    case Profile::HalfOneMinusTanh: return "half_one_minus_tanh";
    }
    return "?";
}

inline Profile parse_profile(const std::string& s) {
    for (auto p : {Profile::Tanh, Profile::Sech2, Profile::Sech4, Profile::HalfOnePlusTanh, Profile::HalfOneMinusTanh})
        if (s == to_string(p)) return p;
    if (s == "psi") return Profile::HalfOnePlusTanh;
    throw Error(ErrorCode::ConfigError, "unknown weight profile '" + s + "'");
}

// phi and its first three derivatives in the profile variable y
inline std::array<double, 4> profile_derivs(Profile p, double y) {
    const double T = std::tanh(y);
    const double c = std::cosh(y);
    const double S = (std::abs(y) > 350) ? 0.0 : 1.0 / (c * c); // sech^2
    switch (p) {
    case Profile::Tanh: return {T, S, -2 * T * S, -2 * S * S + 4 * T * T * S};
    case Profile::Sech2: return {S, -2 * T * S, -2 * S * S + 4 * T * T * S, 16 * T * S * S - 8 * T * T * T * S};
    case Profile::Sech4:
        return {S * S, -4 * T * S * S, -4 * S * S * S + 16 * T * T * S * S, 56 * T * S * S * S - 64 * T * T * T * S * S};
    case Profile::HalfOnePlusTanh: return {0.5 * (1 + T), 0.5 * S, -T * S, -S * S + 2 * T * T * S};
    case Profile::HalfOneMinusTanh: return {0.5 * (1 - T), -0.5 * S, T * S, S * S - 2 * T * T * S};
    }
    return {0, 0, 0, 0};
}

// lambda(t) = t / log^2 t
inline double lambda_law(double t) {
    const double l = std::log(t);
    return t / (l * l);
}
inline double lambda_law_prime(double t) {
    const double l = std::log(t);
    return (1 - 2 / l) / (l * l);
}

// profile((x - x0 - v t) / scale(t))
struct Weight {
    Profile profile = Profile::Tanh;
    double v = 0.0;
    double x0 = 0.0;
    std::optional<double> fixed_scale; // absent: lambda(t) law

    double scale(double t) const {
        if (fixed_scale) return *fixed_scale;
        if (!(t > 1)) throw Error(ErrorCode::BadRange, "lambda(t) law needs t > 1");
        return lambda_law(t);
    }
    double scale_prime(double t) const { return fixed_scale ? 0.0 : lambda_law_prime(t); }
    double center(double t) const { return x0 + v * t; }
    double y(double x, double t) const { return (x - center(t)) / scale(t); }
    double operator()(double x, double t) const { return profile_derivs(profile, y(x, t))[0]; }
};

} // namespace abcd
