#pragma once

// Finite-field towers built at runtime. A tower starts at a prime field F_p
// and grows by adjoining a root of a monic polynomial over the current top
// level; elements are flat coefficient vectors over F_p in the product basis,
// and all arithmetic recurses level by level against precomputed reduction
// data. Construction through this header is UNCHECKED with respect to
// modulus irreducibility — the checked entry points (make_tower / extend)
// live with the polynomial layer, which owns the irreducibility test.

#include "polystab/arena.hpp"
#include "polystab/common.hpp"

#include <algorithm>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

namespace polystab {

class Tower;
using TowerPtr = std::shared_ptr<const Tower>;

// Per-level reduction data. `tail` holds the modulus minus its monic lead,
// as ext many blocks over the level below; `rows` gives x^{e+j} reduced mod
// the modulus for j = 0..e-2 (everything a product of two reduced elements
// can overflow by); `psums` are the power sums of the modulus roots, which
// make the relative trace a dot product.
struct Level {
    u32 ext = 0;
    std::size_t block = 0;
    std::size_t sub_block = 0;
    bool fast_acc = false;
    BigInt card;
    std::vector<u32> tail;
    std::vector<u32> rows;
    std::vector<u32> psums;
};

class Tower {
public:
    static TowerPtr prime_field(u64 p) {
        if (p >= (u64(1) << 32) || !is_prime_u64(p)) throw NotPrimeError(p);
        auto tw = std::make_shared<Tower>();
        tw->p_ = p;
        tw->card0_ = p;
        return tw;
    }

    // Adjoins a root of the given monic modulus (flat coefficient blocks over
    // the current top level, ascending, lead included). Validates shape, NOT
    // irreducibility.
    static TowerPtr extend_unchecked(const TowerPtr& base, const std::vector<u32>& modulus_flat);

    u64 characteristic() const { return p_; }
    u32 height() const { return static_cast<u32>(levels_.size()); }

    const Level& level(u32 i) const { return *levels_[i - 1]; }  // 1-based

    std::size_t block(u32 lvl) const { return lvl == 0 ? 1 : levels_[lvl - 1]->block; }
    u32 ext_degree(u32 lvl) const { return levels_[lvl - 1]->ext; }
    const BigInt& cardinality(u32 lvl) const { return lvl == 0 ? card0_ : levels_[lvl - 1]->card; }

    // True when the two towers are built from the identical level objects up
    // to `upto` (levels are shared on extension, so pointer identity is the
    // right notion of "same field").
    bool prefix_equal(const Tower& o, u32 upto) const {
        if (p_ != o.p_) return false;
        if (upto > height() || upto > o.height()) return false;
        for (u32 i = 0; i < upto; ++i)
            if (levels_[i] != o.levels_[i]) return false;
        return true;
    }

    u64 p_ = 0;
    BigInt card0_;
    std::vector<std::shared_ptr<const Level>> levels_;
};

namespace detail {

// ---- flat ground-coordinate kernels ---------------------------------------

inline void vec_zero(u32* out, std::size_t n) { std::fill(out, out + n, 0u); }

inline void vec_copy(u32* out, const u32* a, std::size_t n) {
    std::memcpy(out, a, n * sizeof(u32));
}

inline bool vec_is_zero(const u32* a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (a[i]) return false;
    return true;
}

inline void vec_add(u64 p, const u32* a, const u32* b, u32* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        u64 t = u64(a[i]) + b[i];
        out[i] = static_cast<u32>(t >= p ? t - p : t);
    }
}

inline void vec_sub(u64 p, const u32* a, const u32* b, u32* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        u64 t = u64(a[i]) + p - b[i];
        out[i] = static_cast<u32>(t >= p ? t - p : t);
    }
}

inline void vec_neg(u64 p, const u32* a, u32* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<u32>(a[i] ? p - a[i] : 0);
}

inline void vec_scale(u64 p, const u32* a, u64 s, u32* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<u32>((u64(a[i]) * s) % p);
}

// out += a*s, all mod p
inline void vec_scale_acc(u64 p, const u32* a, u64 s, u32* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<u32>((u64(a[i]) * s + out[i]) % p);
}

// Embedded prime-field constant? (all coordinates above the first are zero)
inline bool vec_is_scalar(const u32* a, std::size_t n, u64& value) {
    for (std::size_t i = 1; i < n; ++i)
        if (a[i]) return false;
    value = a[0];
    return true;
}

inline u64 inv_mod_u64(u64 a, u64 p) {
    if (a == 0) throw DivisionByZeroError();
    // extended Euclid; p prime
    i64 t = 0, nt = 1;
    i64 r = static_cast<i64>(p), nr = static_cast<i64>(a % p);
    while (nr != 0) {
        i64 q = r / nr;
        i64 tmp = t - q * nt;
        t = nt;
        nt = tmp;
        tmp = r - q * nr;
        r = nr;
        nr = tmp;
    }
    if (t < 0) t += static_cast<i64>(p);
    return static_cast<u64>(t);
}

// ---- block arithmetic (recursive over tower levels) ------------------------
//
// A "block" at level L is block(L) contiguous ground coordinates. `out` must
// not alias the inputs unless stated otherwise.

inline void mul_block(const Tower& tw, u32 lvl, const u32* a, const u32* b, u32* out,
                      Workspace& ws);

// Dedicated schoolbook for the first extension step, where sub-blocks are
// single residues. This is the innermost hot loop of every deep tower.
inline void mul_level1(const Tower& tw, const u32* a, const u32* b, u32* out, Workspace& ws) {
    const Level& L = tw.level(1);
    const u32 e = L.ext;
    const u64 p = tw.p_;
    Workspace::Frame frame(ws);
    u32* prod = ws.alloc0(2 * e - 1);
    if (L.fast_acc) {
        thread_local std::vector<u64> acc;
        acc.assign(2 * e - 1, 0);
        for (u32 i = 0; i < e; ++i) {
            const u64 ai = a[i];
            if (!ai) continue;
            for (u32 j = 0; j < e; ++j) acc[i + j] += ai * b[j];
        }
        for (u32 k = 0; k < 2 * e - 1; ++k) prod[k] = static_cast<u32>(acc[k] % p);
    } else {
        for (u32 i = 0; i < e; ++i) {
            const u64 ai = a[i];
            if (!ai) continue;
            for (u32 j = 0; j < e; ++j)
                prod[i + j] = static_cast<u32>((ai * b[j] + prod[i + j]) % p);
        }
    }
    // fold the overflow terms back through the reduction rows (ground scalars here)
    for (u32 i = 0; i < e; ++i) {
        u64 s = prod[i];
        for (u32 j = 0; j + 1 < e; ++j) {
            const u64 c = prod[e + j];
            if (c) s = (s + c * L.rows[j * e + i]) % p;
        }
        out[i] = static_cast<u32>(s % p);
    }
}

// Reduce a raw product (2e-1 blocks over lvl-1) against the level's rows.
inline void reduce_product(const Tower& tw, u32 lvl, const u32* prod, u32* out, Workspace& ws) {
    const Level& L = tw.level(lvl);
    const u32 e = L.ext;
    const std::size_t sb = L.sub_block;
    const u64 p = tw.p_;
    Workspace::Frame frame(ws);
    u32* tmp = ws.alloc(sb);
    for (u32 i = 0; i < e; ++i) vec_copy(out + i * sb, prod + i * sb, sb);
    for (u32 j = 0; j + 1 < e; ++j) {
        const u32* over = prod + (e + j) * sb;
        if (vec_is_zero(over, sb)) continue;
        const u32* row = L.rows.data() + j * (e * sb);
        for (u32 i = 0; i < e; ++i) {
            const u32* ri = row + i * sb;
            if (vec_is_zero(ri, sb)) continue;
            u64 rscal;
            if (vec_is_scalar(ri, sb, rscal)) {
                vec_scale_acc(p, over, rscal, out + i * sb, sb);
            } else {
                mul_block(tw, lvl - 1, over, ri, tmp, ws);
                vec_add(p, out + i * sb, tmp, out + i * sb, sb);
            }
        }
    }
}

inline void mul_block(const Tower& tw, u32 lvl, const u32* a, const u32* b, u32* out,
                      Workspace& ws) {
    const u64 p = tw.p_;
    if (lvl == 0) {
        out[0] = static_cast<u32>((u64(a[0]) * b[0]) % p);
        return;
    }
    const Level& L = tw.level(lvl);
    const std::size_t n = L.block;
    if (vec_is_zero(a, n) || vec_is_zero(b, n)) {
        vec_zero(out, n);
        return;
    }
    u64 s;
    if (vec_is_scalar(a, n, s)) {
        vec_scale(p, b, s, out, n);
        return;
    }
    if (vec_is_scalar(b, n, s)) {
        vec_scale(p, a, s, out, n);
        return;
    }
    if (lvl == 1) {
        mul_level1(tw, a, b, out, ws);
        return;
    }

    const u32 e = L.ext;
    const std::size_t sb = L.sub_block;
    Workspace::Frame frame(ws);
    u32* prod = ws.alloc0((2 * e - 1) * sb);

    auto A = [&](u32 i) { return a + i * sb; };
    auto B = [&](u32 i) { return b + i * sb; };
    auto P = [&](u32 i) { return prod + i * sb; };

    if (e == 2) {
        // Karatsuba: 3 sub-products
        u32* t0 = ws.alloc(sb);
        u32* t1 = ws.alloc(sb);
        u32* tm = ws.alloc(sb);
        mul_block(tw, lvl - 1, A(0), B(0), P(0), ws);
        mul_block(tw, lvl - 1, A(1), B(1), P(2), ws);
        vec_add(p, A(0), A(1), t0, sb);
        vec_add(p, B(0), B(1), t1, sb);
        mul_block(tw, lvl - 1, t0, t1, tm, ws);
        vec_sub(p, tm, P(0), tm, sb);
        vec_sub(p, tm, P(2), P(1), sb);
    } else if (e == 3) {
        // 3-way Karatsuba: 6 sub-products
        u32* t0 = ws.alloc(sb);
        u32* t1 = ws.alloc(sb);
        u32* m3 = ws.alloc(sb);
        u32* m4 = ws.alloc(sb);
        u32* m5 = ws.alloc(sb);
        mul_block(tw, lvl - 1, A(0), B(0), P(0), ws);  // m0
        mul_block(tw, lvl - 1, A(1), B(1), P(2), ws);  // m1 (parked in P2)
        mul_block(tw, lvl - 1, A(2), B(2), P(4), ws);  // m2
        vec_add(p, A(0), A(1), t0, sb);
        vec_add(p, B(0), B(1), t1, sb);
        mul_block(tw, lvl - 1, t0, t1, m3, ws);
        vec_add(p, A(0), A(2), t0, sb);
        vec_add(p, B(0), B(2), t1, sb);
        mul_block(tw, lvl - 1, t0, t1, m4, ws);
        vec_add(p, A(1), A(2), t0, sb);
        vec_add(p, B(1), B(2), t1, sb);
        mul_block(tw, lvl - 1, t0, t1, m5, ws);
        // c1 = m3 - m0 - m1 ; c2 = m4 - m0 - m2 + m1 ; c3 = m5 - m1 - m2
        vec_sub(p, m3, P(0), m3, sb);
        vec_sub(p, m3, P(2), t0, sb);  // c1
        vec_sub(p, m4, P(0), m4, sb);
        vec_sub(p, m4, P(4), m4, sb);
        vec_add(p, m4, P(2), m4, sb);  // c2
        vec_sub(p, m5, P(2), m5, sb);
        vec_sub(p, m5, P(4), P(3), sb);  // c3
        vec_copy(P(1), t0, sb);
        vec_copy(P(2), m4, sb);
    } else if (e == 4) {
        // two-level Karatsuba over halves: 9 sub-products
        const std::size_t hb = 2 * sb;
        u32* ta = ws.alloc(hb);
        u32* tb = ws.alloc(hb);
        u32* z0 = ws.alloc0(3 * sb);
        u32* z1 = ws.alloc0(3 * sb);
        u32* z2 = ws.alloc0(3 * sb);
        auto half_mul = [&](const u32* x, const u32* y, u32* z) {
            // (x0 + x1 t)(y0 + y1 t) over lvl-1 blocks, 3 blocks out
            Workspace::Frame f2(ws);
            u32* u0 = ws.alloc(sb);
            u32* u1 = ws.alloc(sb);
            u32* um = ws.alloc(sb);
            mul_block(tw, lvl - 1, x, y, z, ws);
            mul_block(tw, lvl - 1, x + sb, y + sb, z + 2 * sb, ws);
            vec_add(p, x, x + sb, u0, sb);
            vec_add(p, y, y + sb, u1, sb);
            mul_block(tw, lvl - 1, u0, u1, um, ws);
            vec_sub(p, um, z, um, sb);
            vec_sub(p, um, z + 2 * sb, z + sb, sb);
        };
        half_mul(a, b, z0);
        half_mul(a + hb, b + hb, z2);
        vec_add(p, a, a + hb, ta, hb);
        vec_add(p, b, b + hb, tb, hb);
        half_mul(ta, tb, z1);
        for (u32 i = 0; i < 3; ++i) {
            vec_sub(p, z1 + i * sb, z0 + i * sb, z1 + i * sb, sb);
            vec_sub(p, z1 + i * sb, z2 + i * sb, z1 + i * sb, sb);
        }
        // assemble: z0 at t^0, z1 at t^2 (block offset 2), z2 at t^4
        for (u32 i = 0; i < 3; ++i) vec_add(p, P(i), z0 + i * sb, P(i), sb);
        for (u32 i = 0; i < 3; ++i) vec_add(p, P(i + 2), z1 + i * sb, P(i + 2), sb);
        for (u32 i = 0; i < 3; ++i) vec_add(p, P(i + 4), z2 + i * sb, P(i + 4), sb);
    } else {
        // generic schoolbook over blocks (rare: big single-step extensions)
        u32* tmp = ws.alloc(sb);
        for (u32 i = 0; i < e; ++i) {
            if (vec_is_zero(A(i), sb)) continue;
            for (u32 j = 0; j < e; ++j) {
                if (vec_is_zero(B(j), sb)) continue;
                mul_block(tw, lvl - 1, A(i), B(j), tmp, ws);
                vec_add(p, P(i + j), tmp, P(i + j), sb);
            }
        }
    }

    reduce_product(tw, lvl, prod, out, ws);
}

// Squaring; in characteristic 2 cross terms vanish and a square costs e
// sub-squarings plus row folds instead of a full product.
inline void sqr_block(const Tower& tw, u32 lvl, const u32* a, u32* out, Workspace& ws) {
    if (lvl == 0 || tw.p_ != 2) {
        if (lvl == 0) {
            out[0] = static_cast<u32>((u64(a[0]) * a[0]) % tw.p_);
            return;
        }
        const Level& L = tw.level(lvl);
        Workspace::Frame frame(ws);
        u32* tmp = ws.alloc(L.block);
        vec_copy(tmp, a, L.block);
        mul_block(tw, lvl, tmp, tmp, out, ws);
        return;
    }
    const Level& L = tw.level(lvl);
    const u32 e = L.ext;
    const std::size_t sb = L.sub_block;
    Workspace::Frame frame(ws);
    u32* prod = ws.alloc0((2 * e - 1) * sb);
    for (u32 i = 0; i < e; ++i) {
        if (vec_is_zero(a + i * sb, sb)) continue;
        sqr_block(tw, lvl - 1, a + i * sb, prod + 2 * i * sb, ws);
    }
    reduce_product(tw, lvl, prod, out, ws);
}

inline void pow_block(const Tower& tw, u32 lvl, const u32* a, const BigInt& exp, u32* out,
                      Workspace& ws) {
    const std::size_t n = tw.block(lvl);
    if (exp == 0) {
        vec_zero(out, n);
        out[0] = static_cast<u32>(1 % tw.p_);
        return;
    }
    Workspace::Frame frame(ws);
    u32* acc = ws.alloc(n);
    u32* tmp = ws.alloc(n);
    vec_copy(acc, a, n);
    const long top = static_cast<long>(boost::multiprecision::msb(exp));
    for (long bit = top - 1; bit >= 0; --bit) {
        sqr_block(tw, lvl, acc, tmp, ws);
        if (boost::multiprecision::bit_test(exp, static_cast<unsigned>(bit))) {
            mul_block(tw, lvl, tmp, a, acc, ws);
        } else {
            std::swap(acc, tmp);
        }
    }
    vec_copy(out, acc, n);
}

// ---- element-level polynomial helpers over a level (used by inv/norm) -----
//
// Small dense polynomials whose coefficients are blocks of level `lvl`; these
// only ever see degrees up to the extension degree of the level above, so the
// quadratic algorithms are fine.

inline int poly_deg(const u32* c, int max_deg, std::size_t bs) {
    for (int d = max_deg; d >= 0; --d)
        if (!vec_is_zero(c + std::size_t(d) * bs, bs)) return d;
    return -1;
}

inline void inv_block(const Tower& tw, u32 lvl, const u32* a, u32* out, Workspace& ws) {
    const u64 p = tw.p_;
    if (lvl == 0) {
        out[0] = static_cast<u32>(inv_mod_u64(a[0], p));
        return;
    }
    const Level& L = tw.level(lvl);
    const u32 e = L.ext;
    const std::size_t sb = L.sub_block;
    if (vec_is_zero(a, L.block)) throw DivisionByZeroError();
    u64 s;
    if (vec_is_scalar(a, L.block, s)) {
        vec_zero(out, L.block);
        out[0] = static_cast<u32>(inv_mod_u64(s, p));
        return;
    }

    // extended Euclid on (modulus, a) over the level below
    Workspace::Frame frame(ws);
    const int cap = static_cast<int>(e);  // degrees stay ≤ e
    auto alloc_poly = [&]() { return ws.alloc0(std::size_t(cap + 1) * sb); };
    u32* r0 = alloc_poly();
    u32* r1 = alloc_poly();
    u32* t0 = alloc_poly();
    u32* t1 = alloc_poly();
    u32* q = alloc_poly();
    u32* tnew = alloc_poly();
    u32* tmp = ws.alloc(sb);
    u32* linv = ws.alloc(sb);

    vec_copy(r0, L.tail.data(), e * sb);
    r0[std::size_t(e) * sb] = 1;  // monic lead of the modulus
    vec_copy(r1, a, e * sb);
    t1[0] = 1;

    int d0 = e, d1 = poly_deg(r1, e - 1, sb);
    while (d1 > 0) {
        // q, r0 := divmod(r0, r1); quotient accumulated in q
        vec_zero(q, std::size_t(cap + 1) * sb);
        inv_block(tw, lvl - 1, r1 + std::size_t(d1) * sb, linv, ws);
        while (d0 >= d1) {
            mul_block(tw, lvl - 1, r0 + std::size_t(d0) * sb, linv, q + std::size_t(d0 - d1) * sb,
                      ws);
            const u32* f = q + std::size_t(d0 - d1) * sb;
            for (int i = 0; i <= d1; ++i) {
                mul_block(tw, lvl - 1, f, r1 + std::size_t(i) * sb, tmp, ws);
                vec_sub(p, r0 + std::size_t(d0 - d1 + i) * sb, tmp,
                        r0 + std::size_t(d0 - d1 + i) * sb, sb);
            }
            d0 = poly_deg(r0, d0, sb);
            if (d0 < 0) break;
        }
        // tnew = t0 - q * t1
        vec_copy(tnew, t0, std::size_t(cap + 1) * sb);
        const int dq = poly_deg(q, cap, sb);
        const int dt1 = poly_deg(t1, cap, sb);
        for (int i = 0; i <= dq; ++i) {
            if (vec_is_zero(q + std::size_t(i) * sb, sb)) continue;
            for (int j = 0; j <= dt1; ++j) {
                mul_block(tw, lvl - 1, q + std::size_t(i) * sb, t1 + std::size_t(j) * sb, tmp, ws);
                vec_sub(p, tnew + std::size_t(i + j) * sb, tmp, tnew + std::size_t(i + j) * sb, sb);
            }
        }
        std::swap(r0, r1);
        std::swap(t0, t1);
        vec_copy(t1, tnew, std::size_t(cap + 1) * sb);
        std::swap(d0, d1);
        d1 = poly_deg(r1, d1 < 0 ? e - 1 : d1, sb);
    }
    // a nonzero element sharing a factor with the modulus means the modulus
    // was never irreducible in the first place
    if (d1 < 0) throw ModulusReducibleError("zero divisor found: level modulus is reducible");
    // r1 is a nonzero constant; inverse = t1 / r1
    inv_block(tw, lvl - 1, r1, linv, ws);
    for (u32 i = 0; i < e; ++i)
        mul_block(tw, lvl - 1, t1 + std::size_t(i) * sb, linv, out + i * sb, ws);
}

// relative trace to the level below: dot product with the modulus power sums
inline void rel_trace(const Tower& tw, u32 lvl, const u32* a, u32* out, Workspace& ws) {
    const Level& L = tw.level(lvl);
    const u32 e = L.ext;
    const std::size_t sb = L.sub_block;
    Workspace::Frame frame(ws);
    u32* tmp = ws.alloc(sb);
    vec_zero(out, sb);
    for (u32 i = 0; i < e; ++i) {
        const u32* ai = a + i * sb;
        const u32* si = L.psums.data() + i * sb;
        if (vec_is_zero(ai, sb) || vec_is_zero(si, sb)) continue;
        mul_block(tw, lvl - 1, ai, si, tmp, ws);
        vec_add(tw.p_, out, tmp, out, sb);
    }
}

// Exponentiation of a block by a small machine exponent (used by the norm).
inline void pow_block_small(const Tower& tw, u32 lvl, const u32* a, u64 exp, u32* out,
                            Workspace& ws) {
    pow_block(tw, lvl, a, BigInt(exp), out, ws);
}

// relative norm to the level below: resultant of (modulus, element) computed
// with the Euclidean scheme, all arithmetic one level down
inline void rel_norm(const Tower& tw, u32 lvl, const u32* a, u32* out, Workspace& ws) {
    const Level& L = tw.level(lvl);
    const u32 e = L.ext;
    const std::size_t sb = L.sub_block;
    const u64 p = tw.p_;
    Workspace::Frame frame(ws);

    if (vec_is_zero(a, L.block)) {
        vec_zero(out, sb);
        return;
    }
    u64 s;
    if (vec_is_scalar(a, L.block, s)) {
        // norm of an embedded constant is just s^e
        vec_zero(out, sb);
        out[0] = static_cast<u32>(detail::powmod_u64(s, e, p));
        return;
    }

    u32* A = ws.alloc0(std::size_t(e + 1) * sb);
    u32* B = ws.alloc0(std::size_t(e + 1) * sb);
    u32* res = ws.alloc0(sb);
    u32* tmp = ws.alloc(sb);
    u32* linv = ws.alloc(sb);
    res[0] = static_cast<u32>(1 % p);

    vec_copy(A, L.tail.data(), e * sb);
    A[std::size_t(e) * sb] = 1;
    vec_copy(B, a, e * sb);
    int da = e, db = poly_deg(B, e - 1, sb);
    bool negate = false;

    while (db > 0) {
        // R = A mod B
        inv_block(tw, lvl - 1, B + std::size_t(db) * sb, linv, ws);
        int dr = da;
        while (dr >= db) {
            Workspace::Frame f2(ws);
            u32* f = ws.alloc(sb);
            mul_block(tw, lvl - 1, A + std::size_t(dr) * sb, linv, f, ws);
            for (int i = 0; i <= db; ++i) {
                mul_block(tw, lvl - 1, f, B + std::size_t(i) * sb, tmp, ws);
                vec_sub(p, A + std::size_t(dr - db + i) * sb, tmp, A + std::size_t(dr - db + i) * sb,
                        sb);
            }
            dr = poly_deg(A, dr, sb);
            if (dr < 0) break;
        }
        // res *= lc(B)^(da - deg R), sign flips by da*db parity
        const int degR = dr;
        pow_block_small(tw, lvl - 1, B + std::size_t(db) * sb, u64(da - (degR < 0 ? 0 : degR)), tmp,
                        ws);
        mul_block(tw, lvl - 1, res, tmp, linv, ws);
        vec_copy(res, linv, sb);
        if ((da & 1) && (db & 1)) negate = !negate;
        if (degR < 0) {
            // B divides A: shared factor, resultant 0 (cannot happen for an
            // irreducible modulus, but keep the math honest)
            vec_zero(out, sb);
            return;
        }
        std::swap(A, B);
        da = db;
        db = degR;
    }
    // B is now a nonzero constant: res *= B0^da
    pow_block_small(tw, lvl - 1, B, u64(da), tmp, ws);
    mul_block(tw, lvl - 1, res, tmp, linv, ws);
    vec_copy(res, linv, sb);
    if (negate) vec_neg(p, res, res, sb);
    vec_copy(out, res, sb);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Tower construction

inline TowerPtr Tower::extend_unchecked(const TowerPtr& base, const std::vector<u32>& flat) {
    const u32 h = base->height();
    const std::size_t sb = base->block(h);
    if (flat.size() % sb != 0) throw ModulusDegreeError("modulus has ragged coefficient data");
    const std::size_t ncoeff = flat.size() / sb;
    if (ncoeff < 3) throw ModulusDegreeError("extension degree must be at least 2");
    const u32 e = static_cast<u32>(ncoeff - 1);
    u64 lead;
    if (!detail::vec_is_scalar(flat.data() + std::size_t(e) * sb, sb, lead) || lead != 1)
        throw ModulusNotMonicError("modulus must be monic");

    auto& ws = detail::workspace();
    auto lvl = std::make_shared<Level>();
    lvl->ext = e;
    lvl->sub_block = sb;
    lvl->block = sb * e;
    lvl->card = boost::multiprecision::pow(base->cardinality(h), e);
    lvl->tail.assign(flat.begin(), flat.begin() + std::ptrdiff_t(std::size_t(e) * sb));

    const u64 p = base->characteristic();
    const BigInt worst = BigInt(2) * e * (p - 1) * (p - 1);
    lvl->fast_acc = worst < (BigInt(1) << 64);

    // rows: x^e = -tail, then x^{e+j} by shift-and-fold
    lvl->rows.assign(std::size_t(e - 1) * e * sb, 0);
    u32* row0 = lvl->rows.data();
    detail::vec_neg(p, lvl->tail.data(), row0, std::size_t(e) * sb);
    {
        detail::Workspace::Frame frame(ws);
        u32* tmp = ws.alloc(sb);
        for (u32 j = 1; j + 1 <= e - 1; ++j) {
            const u32* prev = lvl->rows.data() + std::size_t(j - 1) * e * sb;
            u32* cur = lvl->rows.data() + std::size_t(j) * e * sb;
            const u32* top = prev + std::size_t(e - 1) * sb;  // coefficient of x^{e-1}
            // cur = shift(prev) + top * row0
            for (u32 i = e - 1; i >= 1; --i)
                detail::vec_copy(cur + std::size_t(i) * sb, prev + std::size_t(i - 1) * sb, sb);
            detail::vec_zero(cur, sb);
            if (!detail::vec_is_zero(top, sb)) {
                for (u32 i = 0; i < e; ++i) {
                    if (detail::vec_is_zero(row0 + std::size_t(i) * sb, sb)) continue;
                    detail::mul_block(*base, h, top, row0 + std::size_t(i) * sb, tmp, ws);
                    detail::vec_add(p, cur + std::size_t(i) * sb, tmp, cur + std::size_t(i) * sb,
                                    sb);
                }
            }
        }
    }

    // power sums of the modulus roots via Newton's identities
    lvl->psums.assign(std::size_t(e) * sb, 0);
    lvl->psums[0] = static_cast<u32>(e % p);
    {
        detail::Workspace::Frame frame(ws);
        u32* acc = ws.alloc(sb);
        u32* tmp = ws.alloc(sb);
        for (u32 k = 1; k < e; ++k) {
            // s_k = -( k*c_{e-k} + sum_{i=1}^{k-1} c_{e-i} * s_{k-i} )
            detail::vec_scale(p, lvl->tail.data() + std::size_t(e - k) * sb, k % p, acc, sb);
            for (u32 i = 1; i < k; ++i) {
                const u32* ci = lvl->tail.data() + std::size_t(e - i) * sb;
                const u32* ski = lvl->psums.data() + std::size_t(k - i) * sb;
                if (detail::vec_is_zero(ci, sb) || detail::vec_is_zero(ski, sb)) continue;
                detail::mul_block(*base, h, ci, ski, tmp, ws);
                detail::vec_add(p, acc, tmp, acc, sb);
            }
            detail::vec_neg(p, acc, lvl->psums.data() + std::size_t(k) * sb, sb);
        }
    }

    auto tw = std::make_shared<Tower>(*base);
    tw->levels_.push_back(std::move(lvl));
    return tw;
}

}  // namespace polystab
