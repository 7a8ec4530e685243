#pragma once

// Shared basics: wide integers, error taxonomy, deterministic primality,
// and a couple of small helpers used across the library.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace polystab {

inline constexpr const char* kVersion = "1.0.0";

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;

// Arbitrary-precision natural/integer. Field cardinalities q^(d^n) overflow
// any machine word by modest depths, so every cardinality, exponent and
// element index that can grow with the tower uses BigInt.
using BigInt = boost::multiprecision::cpp_int;

// ---------------------------------------------------------------------------
// Errors. Everything thrown by the library derives from Error so callers can
// catch library failures in one net; specific types mirror distinct contract
// violations and are asserted individually in the tests.

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct NotPrimeError : Error {
    explicit NotPrimeError(u64 p)
        : Error("characteristic must be a prime < 2^32, got " + std::to_string(p)) {}
};

struct ModulusError : Error {
    using Error::Error;
};

// modulus not monic / degree < 2 / reducible over its base level
struct ModulusNotMonicError : ModulusError {
    using ModulusError::ModulusError;
};
struct ModulusDegreeError : ModulusError {
    using ModulusError::ModulusError;
};
struct ModulusReducibleError : ModulusError {
    using ModulusError::ModulusError;
};

// operands from different towers / different levels without an embedding
struct LevelMismatchError : Error {
    using Error::Error;
};

struct DivisionByZeroError : Error {
    DivisionByZeroError() : Error("division by zero") {}
};

// quadratic-residue queries are not defined in characteristic 2
struct EvenCharacteristicError : Error {
    EvenCharacteristicError() : Error("operation undefined in characteristic 2") {}
};

struct DegreeOverflowError : Error {
    using Error::Error;
};

struct DepthBudgetExceededError : Error {
    using Error::Error;
};

struct ChainTooShortError : Error {
    using Error::Error;
};

// family constructor preconditions
struct ZeroParameterError : Error {
    using Error::Error;
};
struct WrongResidueClassError : Error {
    using Error::Error;
};
struct HypothesisViolatedError : Error {
    using Error::Error;
};

// classifier preconditions
struct ZeroLeadingCoefficientError : Error {
    using Error::Error;
};
struct ZeroLinearCoefficientError : Error {
    using Error::Error;
};
struct ZeroConstantTermError : Error {
    using Error::Error;
};
struct DegreeUnsupportedError : Error {
    using Error::Error;
};
struct NotSquarefreeError : Error {
    using Error::Error;
};

// sweeps refuse to enumerate fields past their configured cardinality cap
struct SizeCapExceededError : Error {
    using Error::Error;
};

// a reducible chain step whose factors all have degree not dividing d
struct NoRootInRequiredExtensionError : Error {
    using Error::Error;
};

struct ParseError : Error {
    ParseError(const std::string& what, std::size_t pos)
        : Error(what + " (at position " + std::to_string(pos) + ")"), position(pos) {}
    std::size_t position;
};

// ---------------------------------------------------------------------------
// Deterministic Miller-Rabin, exact for n < 3'215'031'751 which covers the
// full supported range of characteristics (p < 2^32). Bases: 2, 3, 5, 7.

namespace detail {

inline u64 mulmod_u64(u64 a, u64 b, u64 m) {
    return static_cast<u64>((static_cast<unsigned __int128>(a) * b) % m);
}

inline u64 powmod_u64(u64 base, u64 exp, u64 m) {
    u64 r = 1 % m;
    base %= m;
    while (exp) {
        if (exp & 1) r = mulmod_u64(r, base, m);
        base = mulmod_u64(base, base, m);
        exp >>= 1;
    }
    return r;
}

}  // namespace detail

inline bool is_prime_u64(u64 n) {
    if (n < 2) return false;
    for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull}) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) d >>= 1, ++s;
    for (u64 a : {2ull, 3ull, 5ull, 7ull}) {
        u64 x = detail::powmod_u64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int i = 1; i < s; ++i) {
            x = detail::mulmod_u64(x, x, n);
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

// p^k as BigInt
inline BigInt bigint_pow(u64 base, const BigInt& exp) {
    BigInt r = 1, b = base, e = exp;
    while (e > 0) {
        if ((e & 1) != 0) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

}  // namespace polystab
