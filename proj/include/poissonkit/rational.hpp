#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace poissonkit {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Int factorial(int n) {
    Int r = 1;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

inline Int binomial(long n, long k) {
    if (k < 0 || k > n || n < 0) return 0;
    if (k > n - k) k = n - k;
    Int r = 1;
    for (long i = 1; i <= k; ++i) {
        r *= n - k + i;
        r /= i;
    }
    return r;
}

inline Int int_pow(const Int& base, int e) {
    Int r = 1, b = base;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

inline Rat rat_pow(const Rat& base, int e) {
    if (e < 0) return Rat(1) / rat_pow(base, -e);
    Rat r = 1, b = base;
    int n = e;
    while (n > 0) {
        if (n & 1) r *= b;
        b *= b;
        n >>= 1;
    }
    return r;
}

// Exact: every finite double is a dyadic rational.
inline Rat rat_from_double(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("rat_from_double: non-finite");
    if (x == 0.0) return Rat(0);
    int exp2 = 0;
    double m = std::frexp(x, &exp2);  // x = m * 2^exp2, |m| in [0.5,1)
    auto mant = static_cast<long long>(std::ldexp(m, 53));
    exp2 -= 53;
    Rat r(mant);
    if (exp2 >= 0) {
        r *= int_pow(Int(2), exp2);
    } else {
        r /= int_pow(Int(2), -exp2);
    }
    return r;
}

// Accepts "p/q", integer, or decimal literals ("-1.25", "3e-2"); decimal
// forms parse exactly.
inline Rat parse_rational(const std::string& s) {
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        Int num(s.substr(0, slash));
        Int den(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("parse_rational: zero denominator");
        return Rat(num, den);
    }
    std::string t = s;
    int exp10 = 0;
    auto epos = t.find_first_of("eE");
    if (epos != std::string::npos) {
        exp10 = std::stoi(t.substr(epos + 1));
        t = t.substr(0, epos);
    }
    auto dot = t.find('.');
    if (dot != std::string::npos) {
        exp10 -= static_cast<int>(t.size() - dot - 1);
        t.erase(dot, 1);
    }
    if (t.empty() || t == "-" || t == "+") throw std::invalid_argument("parse_rational: bad literal");
    Rat r{Int(t)};
    if (exp10 > 0) r *= int_pow(Int(10), exp10);
    if (exp10 < 0) r /= int_pow(Int(10), -exp10);
    return r;
}

// Lossless: "p" for integers, "p/q" otherwise.
inline std::string rat_to_string(const Rat& r) {
    Int num = boost::multiprecision::numerator(r);
    Int den = boost::multiprecision::denominator(r);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

inline double rat_to_double(const Rat& r) { return r.convert_to<double>(); }

}  // namespace poissonkit
