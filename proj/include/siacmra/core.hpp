#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace siacmra {

// ---------------------------------------------------------------------------
// Small 2D point/vector type. 1D code uses the x component and leaves y = 0.
// ---------------------------------------------------------------------------
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }

// ---------------------------------------------------------------------------
// Error taxonomy
// ---------------------------------------------------------------------------
struct geometry_error : std::runtime_error {
    explicit geometry_error(const std::string& m) : std::runtime_error(m) {}
};
struct domain_exit_error : geometry_error {
    explicit domain_exit_error(const std::string& m) : geometry_error(m) {}
};
struct format_error : std::runtime_error {
    explicit format_error(const std::string& m) : std::runtime_error(m) {}
};
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& m) : std::runtime_error(m) {}
};
struct solver_error : std::runtime_error {
    solver_error(const std::string& m, double res) : std::runtime_error(m), residual(res) {}
    double residual;
};

// ---------------------------------------------------------------------------
// pcg32: small deterministic generator, identical stream on every platform.
// ---------------------------------------------------------------------------
class Pcg32 {
 public:
    explicit Pcg32(std::uint64_t seed, std::uint64_t stream = 0x14057b7ef767814full) {
        state_ = 0u;
        inc_ = (stream << 1u) | 1u;
        next();
        state_ += seed;
        next();
    }

    std::uint32_t next() {
        std::uint64_t old = state_;
        state_ = old * 6364136223846793005ull + inc_;
        std::uint32_t xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
    }

    // uniform on [0,1)
    double uniform01() { return next() * (1.0 / 4294967296.0); }
    // uniform on [-1/2, 1/2)
    double uniform_half() { return uniform01() - 0.5; }

 private:
    std::uint64_t state_;
    std::uint64_t inc_;
};

// ---------------------------------------------------------------------------
// FNV-1a over raw bytes; used for structural mesh hashes in dump headers
// and for hierarchy consistency checks.
// ---------------------------------------------------------------------------
class Fnv1a {
 public:
    void add_bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 1099511628211ull;
        }
    }
    void add(double v) { add_bytes(&v, sizeof v); }
    void add(std::int64_t v) { add_bytes(&v, sizeof v); }
    std::uint64_t value() const { return h_; }

 private:
    std::uint64_t h_ = 14695981039346656037ull;
};

// full round-trip precision formatting used by all text dumps
inline std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline constexpr double pi = 3.14159265358979323846;

}  // namespace siacmra
