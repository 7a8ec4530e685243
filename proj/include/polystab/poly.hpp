#pragma once

// Dense univariate polynomials whose coefficients live at one tower level,
// plus everything the stability machinery needs from them: ring/euclidean
// operations, composition and self-iteration, a deterministic Rabin-style
// irreducibility test, squarefree + distinct-degree factor patterns, root
// extraction, closed-form discriminants up to degree 4, and the checked
// tower-construction entry points.

#include "polystab/element.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace polystab {

inline constexpr u64 kDefaultIterateDegreeCap = 531441;  // 3^12

class Poly {
public:
    Poly() = default;
    Poly(TowerPtr tower, u32 level, std::vector<FieldElement> coeffs)
        : tower_(std::move(tower)), level_(level), c_(std::move(coeffs)) {
        for (const auto& e : c_)
            if (e.level() != level_ || !e.tower()->prefix_equal(*tower_, level_))
                throw LevelMismatchError("polynomial coefficient at the wrong level");
        normalize();
    }

    static Poly zero(const TowerPtr& tw, u32 lvl) { return Poly(tw, lvl, {}); }
    static Poly constant(FieldElement e) {
        auto tw = e.tower();
        auto lvl = e.level();
        return Poly(tw, lvl, {std::move(e)});
    }
    static Poly x(const TowerPtr& tw, u32 lvl) {
        return Poly(tw, lvl, {FieldElement::zero(tw, lvl), FieldElement::one(tw, lvl)});
    }
    // convenience for prime-field coefficient lists (ascending)
    static Poly from_ints(const TowerPtr& tw, u32 lvl, const std::vector<u64>& cs) {
        std::vector<FieldElement> v;
        v.reserve(cs.size());
        for (u64 k : cs) v.push_back(FieldElement::from_prime(tw, lvl, k));
        return Poly(tw, lvl, std::move(v));
    }

    const TowerPtr& tower() const { return tower_; }
    u32 level() const { return level_; }
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const std::vector<FieldElement>& coeffs() const { return c_; }

    // coefficient access with implicit zero above the degree
    FieldElement coeff(std::size_t i) const {
        return i < c_.size() ? c_[i] : FieldElement::zero(tower_, level_);
    }
    const FieldElement& lead() const { return c_.back(); }

    bool is_monic() const { return !c_.empty() && c_.back().is_one(); }

private:
    void normalize() {
        while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
    }
    TowerPtr tower_;
    u32 level_ = 0;
    std::vector<FieldElement> c_;
};

namespace detail {

inline void require_same_ring(const Poly& a, const Poly& b) {
    if (a.level() != b.level() ||
        (a.tower() != b.tower() && !a.tower()->prefix_equal(*b.tower(), a.level())))
        throw LevelMismatchError("polynomials over different coefficient fields");
}

}  // namespace detail

inline bool operator==(const Poly& a, const Poly& b) {
    detail::require_same_ring(a, b);
    if (a.degree() != b.degree()) return false;
    for (std::size_t i = 0; i < a.coeffs().size(); ++i)
        if (!(a.coeffs()[i] == b.coeffs()[i])) return false;
    return true;
}
inline bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

inline Poly operator+(const Poly& a, const Poly& b) {
    detail::require_same_ring(a, b);
    const std::size_t n = std::max(a.coeffs().size(), b.coeffs().size());
    std::vector<FieldElement> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(a.coeff(i) + b.coeff(i));
    return Poly(a.tower(), a.level(), std::move(out));
}

inline Poly operator-(const Poly& a, const Poly& b) {
    detail::require_same_ring(a, b);
    const std::size_t n = std::max(a.coeffs().size(), b.coeffs().size());
    std::vector<FieldElement> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(a.coeff(i) - b.coeff(i));
    return Poly(a.tower(), a.level(), std::move(out));
}

inline Poly operator*(const Poly& a, const Poly& b) {
    detail::require_same_ring(a, b);
    if (a.is_zero() || b.is_zero()) return Poly::zero(a.tower(), a.level());
    std::vector<FieldElement> out(a.coeffs().size() + b.coeffs().size() - 1,
                                  FieldElement::zero(a.tower(), a.level()));
    for (std::size_t i = 0; i < a.coeffs().size(); ++i) {
        if (a.coeffs()[i].is_zero()) continue;
        for (std::size_t j = 0; j < b.coeffs().size(); ++j) {
            if (b.coeffs()[j].is_zero()) continue;
            out[i + j] = out[i + j] + a.coeffs()[i] * b.coeffs()[j];
        }
    }
    return Poly(a.tower(), a.level(), std::move(out));
}

inline Poly operator*(const Poly& a, const FieldElement& s) {
    std::vector<FieldElement> out;
    out.reserve(a.coeffs().size());
    for (const auto& e : a.coeffs()) out.push_back(e * s);
    return Poly(a.tower(), a.level(), std::move(out));
}

inline std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b) {
    detail::require_same_ring(a, b);
    if (b.is_zero()) throw DivisionByZeroError();
    if (a.degree() < b.degree()) return {Poly::zero(a.tower(), a.level()), a};
    const FieldElement li = inv(b.lead());
    std::vector<FieldElement> rem(a.coeffs());
    std::vector<FieldElement> quo(std::size_t(a.degree() - b.degree()) + 1,
                                  FieldElement::zero(a.tower(), a.level()));
    for (int d = a.degree(); d >= b.degree(); --d) {
        if (rem[std::size_t(d)].is_zero()) continue;
        const FieldElement f = rem[std::size_t(d)] * li;
        quo[std::size_t(d - b.degree())] = f;
        for (int i = 0; i <= b.degree(); ++i)
            rem[std::size_t(d - b.degree() + i)] =
                rem[std::size_t(d - b.degree() + i)] - f * b.coeffs()[std::size_t(i)];
    }
    return {Poly(a.tower(), a.level(), std::move(quo)), Poly(a.tower(), a.level(), std::move(rem))};
}

inline Poly make_monic(const Poly& a) {
    if (a.is_zero() || a.is_monic()) return a;
    return a * inv(a.lead());
}

inline Poly gcd(const Poly& a, const Poly& b) {
    detail::require_same_ring(a, b);
    Poly r0 = a, r1 = b;
    while (!r1.is_zero()) {
        Poly r = divmod(r0, r1).second;
        r0 = std::move(r1);
        r1 = std::move(r);
    }
    return make_monic(r0);
}

inline Poly derivative(const Poly& a) {
    if (a.degree() < 1) return Poly::zero(a.tower(), a.level());
    std::vector<FieldElement> out;
    out.reserve(std::size_t(a.degree()));
    for (int i = 1; i <= a.degree(); ++i) {
        out.push_back(a.coeffs()[std::size_t(i)] *
                      FieldElement::from_prime(a.tower(), a.level(), u64(i)));
    }
    return Poly(a.tower(), a.level(), std::move(out));
}

// Horner evaluation; the point may live at a level above the coefficients,
// in which case they are embedded on the fly (this is exactly the Capelli
// situation: base-level polynomial, chain-level point).
inline FieldElement eval(const Poly& f, const FieldElement& x) {
    if (x.level() < f.level()) throw LevelMismatchError("evaluation point below coefficient level");
    if (!x.tower()->prefix_equal(*f.tower(), f.level()))
        throw LevelMismatchError("evaluation point from an incompatible tower");
    FieldElement acc = FieldElement::zero(x.tower(), x.level());
    for (int i = f.degree(); i >= 0; --i) {
        const FieldElement& ci = f.coeffs()[std::size_t(i)];
        acc = acc * x + (x.level() == f.level() ? ci : embed(ci, x.tower(), x.level()));
    }
    return acc;
}

inline Poly compose(const Poly& f, const Poly& g) {
    detail::require_same_ring(f, g);
    Poly acc = Poly::zero(f.tower(), f.level());
    for (int i = f.degree(); i >= 0; --i)
        acc = acc * g + Poly::constant(f.coeffs()[std::size_t(i)]);
    return acc;
}

// n-fold self-composition f^(n) with a degree guard. f^(0) = x.
inline Poly iterate(const Poly& f, u32 n, u64 degree_cap = kDefaultIterateDegreeCap) {
    if (f.degree() < 0) throw DegreeOverflowError("cannot iterate the zero polynomial");
    Poly acc = Poly::x(f.tower(), f.level());
    for (u32 i = 0; i < n; ++i) {
        const u64 next = u64(acc.degree()) * u64(f.degree() < 0 ? 0 : f.degree());
        if (f.degree() > 1 && next > degree_cap)
            throw DegreeOverflowError("iterate would exceed the degree cap of " +
                                      std::to_string(degree_cap));
        acc = compose(f, acc);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Flat modular-arithmetic context: working representation for x^(Q^j) mod f
// and friends. Coefficients are raw blocks; degree is fixed below k = deg f.

namespace detail {

struct ModCtx {
    const Tower* tw;
    u32 lvl;
    u32 k;
    std::size_t bs;
    u64 p;
    std::vector<u32> rows;  // (k-1) rows × k blocks: x^{k+j} mod f

    explicit ModCtx(const Poly& f) {
        if (!f.is_monic()) throw ModulusNotMonicError("modular context requires a monic modulus");
        tw = f.tower().get();
        lvl = f.level();
        k = static_cast<u32>(f.degree());
        bs = tw->block(lvl);
        p = tw->characteristic();
        auto& ws = workspace();
        Workspace::Frame frame(ws);
        // row 0 = -(tail); then shift-and-fold
        rows.assign(std::size_t(k - 1) * k * bs, 0);
        if (k >= 2) {
            u32* row0 = rows.data();
            for (u32 i = 0; i < k; ++i)
                vec_neg(p, f.coeffs()[i].data(), row0 + std::size_t(i) * bs, bs);
            u32* tmp = ws.alloc(bs);
            for (u32 j = 1; j + 1 <= k - 1; ++j) {
                const u32* prev = rows.data() + std::size_t(j - 1) * k * bs;
                u32* cur = rows.data() + std::size_t(j) * k * bs;
                const u32* top = prev + std::size_t(k - 1) * bs;
                for (u32 i = k - 1; i >= 1; --i)
                    vec_copy(cur + std::size_t(i) * bs, prev + std::size_t(i - 1) * bs, bs);
                vec_zero(cur, bs);
                if (!vec_is_zero(top, bs)) {
                    for (u32 i = 0; i < k; ++i) {
                        if (vec_is_zero(row0 + std::size_t(i) * bs, bs)) continue;
                        mul_block(*tw, lvl, top, row0 + std::size_t(i) * bs, tmp, ws);
                        vec_add(p, cur + std::size_t(i) * bs, tmp, cur + std::size_t(i) * bs, bs);
                    }
                }
            }
        }
    }

    std::size_t words() const { return std::size_t(k) * bs; }

    // raw (2k-1 block) product -> reduced k blocks
    void fold(const u32* prod, u32* out, Workspace& ws) const {
        Workspace::Frame frame(ws);
        u32* tmp = ws.alloc(bs);
        for (u32 i = 0; i < k; ++i) vec_copy(out + std::size_t(i) * bs, prod + std::size_t(i) * bs, bs);
        for (u32 j = 0; j + 1 < k; ++j) {
            const u32* over = prod + std::size_t(k + j) * bs;
            if (vec_is_zero(over, bs)) continue;
            const u32* row = rows.data() + std::size_t(j) * k * bs;
            for (u32 i = 0; i < k; ++i) {
                const u32* ri = row + std::size_t(i) * bs;
                if (vec_is_zero(ri, bs)) continue;
                u64 s;
                if (vec_is_scalar(ri, bs, s)) {
                    vec_scale_acc(p, over, s, out + std::size_t(i) * bs, bs);
                } else {
                    mul_block(*tw, lvl, over, ri, tmp, ws);
                    vec_add(p, out + std::size_t(i) * bs, tmp, out + std::size_t(i) * bs, bs);
                }
            }
        }
    }

    void mulmod(const u32* a, const u32* b, u32* out, Workspace& ws) const {
        Workspace::Frame frame(ws);
        u32* prod = ws.alloc0(std::size_t(2 * k - 1) * bs);
        if (lvl == 0) {
            // ground coefficients: tight schoolbook
            for (u32 i = 0; i < k; ++i) {
                const u64 ai = a[i];
                if (!ai) continue;
                for (u32 j = 0; j < k; ++j)
                    if (b[j]) prod[i + j] = static_cast<u32>((ai * b[j] + prod[i + j]) % p);
            }
        } else {
            u32* tmp = ws.alloc(bs);
            for (u32 i = 0; i < k; ++i) {
                if (vec_is_zero(a + std::size_t(i) * bs, bs)) continue;
                for (u32 j = 0; j < k; ++j) {
                    if (vec_is_zero(b + std::size_t(j) * bs, bs)) continue;
                    mul_block(*tw, lvl, a + std::size_t(i) * bs, b + std::size_t(j) * bs, tmp, ws);
                    vec_add(p, prod + std::size_t(i + j) * bs, tmp, prod + std::size_t(i + j) * bs,
                            bs);
                }
            }
        }
        fold(prod, out, ws);
    }

    void sqrmod(const u32* a, u32* out, Workspace& ws) const {
        if (p == 2) {
            // cross terms vanish: k sub-squarings land on even powers
            Workspace::Frame frame(ws);
            u32* prod = ws.alloc0(std::size_t(2 * k - 1) * bs);
            for (u32 i = 0; i < k; ++i) {
                if (vec_is_zero(a + std::size_t(i) * bs, bs)) continue;
                sqr_block(*tw, lvl, a + std::size_t(i) * bs, prod + std::size_t(2 * i) * bs, ws);
            }
            fold(prod, out, ws);
            return;
        }
        mulmod(a, a, out, ws);
    }

    void powmod(const u32* base, const BigInt& e, u32* out, Workspace& ws) const {
        const std::size_t n = words();
        if (e == 0) {
            vec_zero(out, n);
            out[0] = static_cast<u32>(1 % p);
            return;
        }
        Workspace::Frame frame(ws);
        u32* acc = ws.alloc(n);
        u32* tmp = ws.alloc(n);
        vec_copy(acc, base, n);
        const long top = static_cast<long>(boost::multiprecision::msb(e));
        for (long bit = top - 1; bit >= 0; --bit) {
            sqrmod(acc, tmp, ws);
            if (boost::multiprecision::bit_test(e, static_cast<unsigned>(bit))) {
                mulmod(tmp, base, acc, ws);
            } else {
                std::swap(acc, tmp);
            }
        }
        vec_copy(out, acc, n);
    }

    // a(b) mod f by Horner, where a is given as k blocks (degree < k)
    void compose_mod(const u32* a, const u32* b, u32* out, Workspace& ws) const {
        const std::size_t n = words();
        Workspace::Frame frame(ws);
        u32* acc = ws.alloc0(n);
        u32* tmp = ws.alloc(n);
        for (int i = int(k) - 1; i >= 0; --i) {
            mulmod(acc, b, tmp, ws);
            vec_copy(acc, tmp, n);
            // add the coefficient a_i at the constant block
            vec_add(p, acc, a + std::size_t(i) * bs, acc, bs);
        }
        vec_copy(out, acc, n);
    }

    Poly to_poly(const u32* a, const TowerPtr& tower) const {
        std::vector<FieldElement> cs;
        cs.reserve(k);
        for (u32 i = 0; i < k; ++i) {
            std::vector<u32> c(a + std::size_t(i) * bs, a + std::size_t(i + 1) * bs);
            cs.emplace_back(tower, lvl, std::move(c));
        }
        return Poly(tower, lvl, std::move(cs));
    }

    std::vector<u32> from_poly(const Poly& f) const {
        std::vector<u32> out(words(), 0);
        for (int i = 0; i <= f.degree(); ++i)
            vec_copy(out.data() + std::size_t(i) * bs, f.coeffs()[std::size_t(i)].data(), bs);
        return out;
    }

    std::vector<u32> x_poly() const {
        std::vector<u32> out(words(), 0);
        if (k == 1) {
            // x mod (x + c0) = -c0: handled by caller; contexts require k ≥ 1
            return out;
        }
        out[bs] = 1;
        return out;
    }
};

// Memoized x^(Q^j) mod f via binary composition of the level-cardinality
// Frobenius. Valid because the coefficients of every stored power live in
// the level's field and are fixed by its Frobenius.
struct FrobChain {
    const ModCtx& ctx;
    std::map<u32, std::vector<u32>> memo;

    explicit FrobChain(const ModCtx& c) : ctx(c) {
        auto& ws = workspace();
        std::vector<u32> sigma(ctx.words(), 0);
        const std::vector<u32> xp = ctx.x_poly();
        ctx.powmod(xp.data(), ctx.tw->cardinality(ctx.lvl), sigma.data(), ws);
        memo.emplace(1u, std::move(sigma));
    }

    const std::vector<u32>& get(u32 j) {
        auto it = memo.find(j);
        if (it != memo.end()) return it->second;
        auto& ws = workspace();
        std::vector<u32> out(ctx.words(), 0);
        if (j % 2 == 0) {
            const auto& half = get(j / 2);
            ctx.compose_mod(half.data(), half.data(), out.data(), ws);
        } else {
            const auto& prev = get(j - 1);
            const auto& one = get(1);
            ctx.compose_mod(prev.data(), one.data(), out.data(), ws);
        }
        return memo.emplace(j, std::move(out)).first->second;
    }
};

inline std::vector<u32> prime_factors_u64(u64 n) {
    std::vector<u32> out;
    for (u64 d = 2; d * d <= n; ++d) {
        if (n % d == 0) {
            out.push_back(static_cast<u32>(d));
            while (n % d == 0) n /= d;
        }
    }
    if (n > 1) out.push_back(static_cast<u32>(n));
    return out;
}

}  // namespace detail

// Deterministic Rabin-style irreducibility: f (degree k) is irreducible over
// its level iff x^(Q^k) = x mod f and gcd(x^(Q^(k/l)) - x, f) = 1 for every
// prime l dividing k.
inline bool is_irreducible(const Poly& f_in) {
    if (f_in.degree() <= 0) return false;
    if (f_in.degree() == 1) return true;
    const Poly f = make_monic(f_in);
    const u32 k = static_cast<u32>(f.degree());
    auto& ws = detail::workspace();
    detail::ModCtx ctx(f);
    detail::FrobChain frob(ctx);
    const std::vector<u32> xp = ctx.x_poly();
    if (frob.get(k) != xp) return false;
    for (u32 l : detail::prime_factors_u64(k)) {
        Poly diff = ctx.to_poly(frob.get(k / l).data(), f.tower()) - Poly::x(f.tower(), f.level());
        if (gcd(diff, f).degree() != 0) return false;
    }
    (void)ws;
    return true;
}

// ---------------------------------------------------------------------------
// Factor patterns: one (degree, multiplicity) pair per irreducible factor,
// sorted; repeats allowed, so four distinct roots read {(1,1),(1,1),(1,1),(1,1)}.

using FactorPattern = std::vector<std::pair<u32, u32>>;

namespace detail {

// p-th root of a polynomial that is a p-th power: f(x) = g(x^p)^... more
// precisely f = h^p with h_j = c_{jp}^(Q/p).
inline Poly poly_pth_root(const Poly& f) {
    const u64 p = f.tower()->characteristic();
    const BigInt q = f.tower()->cardinality(f.level());
    std::vector<FieldElement> out;
    for (int i = 0; i <= f.degree(); i += int(p))
        out.push_back(pow(f.coeffs()[std::size_t(i)], q / p));
    return Poly(f.tower(), f.level(), std::move(out));
}

// squarefree decomposition, characteristic-aware; returns (g, multiplicity)
// with f = lead * prod g_i^{m_i}, the g_i monic squarefree pairwise coprime
inline void squarefree_decompose(const Poly& f_in, u32 scale,
                                 std::vector<std::pair<Poly, u32>>& out) {
    Poly f = make_monic(f_in);
    if (f.degree() <= 0) return;
    Poly d = derivative(f);
    if (d.is_zero()) {
        squarefree_decompose(poly_pth_root(f), scale * static_cast<u32>(f.tower()->characteristic()),
                             out);
        return;
    }
    Poly c = gcd(f, d);
    Poly w = divmod(f, c).first;
    u32 i = 1;
    while (w.degree() > 0) {
        Poly y = gcd(w, c);
        Poly z = divmod(w, y).first;
        if (z.degree() > 0) out.emplace_back(make_monic(z), i * scale);
        w = std::move(y);
        c = divmod(c, w).first;
        ++i;
    }
    // what survives the loop is exactly the product of factors whose
    // multiplicity is divisible by p, i.e. a perfect p-th power
    if (c.degree() > 0)
        squarefree_decompose(poly_pth_root(c),
                             scale * static_cast<u32>(f.tower()->characteristic()), out);
}

}  // namespace detail

// Distinct-degree factorization of each squarefree part gives the full
// pattern without producing the factors themselves.
inline FactorPattern factor_pattern(const Poly& f_in) {
    if (f_in.degree() < 0) throw DegreeUnsupportedError("cannot factor the zero polynomial");
    FactorPattern pat;
    if (f_in.degree() == 0) return pat;
    std::vector<std::pair<Poly, u32>> parts;
    detail::squarefree_decompose(f_in, 1, parts);
    auto& ws = detail::workspace();
    for (auto& [g0, mult] : parts) {
        Poly g = g0;
        u32 d = 1;
        while (2 * d <= static_cast<u32>(g.degree())) {
            detail::ModCtx ctx(g);
            detail::FrobChain frob(ctx);
            Poly diff =
                ctx.to_poly(frob.get(d).data(), g.tower()) - Poly::x(g.tower(), g.level());
            Poly h = gcd(diff, g);
            if (h.degree() > 0) {
                for (u32 c = 0; c < static_cast<u32>(h.degree()) / d; ++c)
                    pat.emplace_back(d, mult);
                g = divmod(g, h).first;
            }
            ++d;
        }
        if (g.degree() > 0) pat.emplace_back(static_cast<u32>(g.degree()), mult);
    }
    (void)ws;
    std::sort(pat.begin(), pat.end());
    return pat;
}

namespace detail {

// Deterministic splitting of a monic squarefree product of linear factors.
inline void split_linear(const Poly& g, std::vector<FieldElement>& roots) {
    if (g.degree() == 0) return;
    if (g.degree() == 1) {
        roots.push_back(-g.coeffs()[0]);
        return;
    }
    const TowerPtr& tw = g.tower();
    const u32 lvl = g.level();
    const u64 p = tw->characteristic();
    const BigInt q = tw->cardinality(lvl);
    auto& ws = workspace();
    ModCtx ctx(g);
    // enumerate shifts in canonical element order until the gcd splits g
    for (BigInt sidx = 0;; ++sidx) {
        if (sidx >= q)
            throw Error("deterministic splitting exhausted its shift sequence");  // unreachable
        FieldElement s = FieldElement::from_index(tw, lvl, sidx);
        Poly h = Poly::zero(tw, lvl);
        if (p == 2) {
            // trace polynomial of s*x: sum over absolute Frobenius orbit
            const u32 M = static_cast<u32>(boost::multiprecision::msb(q));
            std::vector<u32> t = ctx.from_poly(Poly::x(tw, lvl) * s);
            std::vector<u32> acc = t;
            std::vector<u32> tmp(ctx.words());
            for (u32 j = 1; j < M; ++j) {
                ctx.sqrmod(t.data(), tmp.data(), ws);
                t = tmp;
                vec_add(p, acc.data(), t.data(), acc.data(), ctx.words());
            }
            h = ctx.to_poly(acc.data(), tw);
        } else {
            // (x+s)^((Q-1)/2) - 1
            std::vector<u32> base = ctx.from_poly(Poly::x(tw, lvl) + Poly::constant(s));
            std::vector<u32> r(ctx.words());
            ctx.powmod(base.data(), (q - 1) / 2, r.data(), ws);
            Poly rp = ctx.to_poly(r.data(), tw);
            h = rp - Poly::constant(FieldElement::one(tw, lvl));
        }
        Poly d = gcd(h, g);
        if (d.degree() > 0 && d.degree() < g.degree()) {
            split_linear(d, roots);
            split_linear(divmod(g, d).first, roots);
            return;
        }
    }
}

}  // namespace detail

// Equal-degree splitting: every irreducible factor of h has degree dd.
// Deterministic: trial polynomials are enumerated in canonical index order,
// and for two roots in different factors some trial separates them (the
// quotient ring surjects onto any pair of root fields).
namespace detail {

inline Poly poly_from_trial_index(const TowerPtr& tw, u32 lvl, u32 max_deg, BigInt idx) {
    const BigInt q = tw->cardinality(lvl);
    std::vector<FieldElement> cs;
    for (u32 i = 0; i <= max_deg && idx > 0; ++i) {
        cs.push_back(FieldElement::from_index(tw, lvl, idx % q));
        idx /= q;
    }
    while (cs.size() < 2) cs.push_back(FieldElement::zero(tw, lvl));
    return Poly(tw, lvl, std::move(cs));
}

inline void split_equal_degree(const Poly& h, u32 dd, std::vector<Poly>& out) {
    if (h.degree() <= 0) return;
    if (static_cast<u32>(h.degree()) == dd) {
        out.push_back(make_monic(h));
        return;
    }
    const TowerPtr& tw = h.tower();
    const u32 lvl = h.level();
    const u64 p = tw->characteristic();
    const BigInt q = tw->cardinality(lvl);
    auto& ws = workspace();
    ModCtx ctx(h);
    // start past the constants: they cannot separate roots
    for (BigInt tidx = q;; ++tidx) {
        Poly trial = poly_from_trial_index(tw, lvl, static_cast<u32>(h.degree()) - 1, tidx);
        std::vector<u32> c = ctx.from_poly(trial);
        Poly probe = Poly::zero(tw, lvl);
        if (p == 2) {
            const u32 M = static_cast<u32>(boost::multiprecision::msb(q)) * dd;
            std::vector<u32> t = c;
            std::vector<u32> acc = t;
            std::vector<u32> tmp(ctx.words());
            for (u32 j = 1; j < M; ++j) {
                ctx.sqrmod(t.data(), tmp.data(), ws);
                t = tmp;
                vec_add(p, acc.data(), t.data(), acc.data(), ctx.words());
            }
            probe = ctx.to_poly(acc.data(), tw);
        } else {
            BigInt e = 1;
            for (u32 j = 0; j < dd; ++j) e *= q;
            std::vector<u32> r(ctx.words());
            ctx.powmod(c.data(), (e - 1) / 2, r.data(), ws);
            probe = ctx.to_poly(r.data(), tw) - Poly::constant(FieldElement::one(tw, lvl));
        }
        Poly g = gcd(probe, h);
        if (g.degree() > 0 && g.degree() < h.degree()) {
            split_equal_degree(g, dd, out);
            split_equal_degree(divmod(h, g).first, dd, out);
            return;
        }
    }
}

}  // namespace detail

// total order on polynomials: by degree, then coefficients from the constant up
inline bool poly_canonical_less(const Poly& a, const Poly& b) {
    if (a.degree() != b.degree()) return a.degree() < b.degree();
    for (std::size_t i = 0; i < a.coeffs().size(); ++i) {
        if (canonical_less(a.coeffs()[i], b.coeffs()[i])) return true;
        if (canonical_less(b.coeffs()[i], a.coeffs()[i])) return false;
    }
    return false;
}

// Complete factorization into monic irreducibles with multiplicities, sorted
// canonically. Intended for the small degrees the chain machinery handles.
inline std::vector<std::pair<Poly, u32>> factor_full(const Poly& f_in) {
    if (f_in.degree() < 0) throw DegreeUnsupportedError("cannot factor the zero polynomial");
    std::vector<std::pair<Poly, u32>> out;
    if (f_in.degree() == 0) return out;
    std::vector<std::pair<Poly, u32>> parts;
    detail::squarefree_decompose(f_in, 1, parts);
    for (auto& [g0, mult] : parts) {
        Poly g = g0;
        u32 d = 1;
        while (2 * d <= static_cast<u32>(g.degree())) {
            detail::ModCtx ctx(g);
            detail::FrobChain frob(ctx);
            Poly diff =
                ctx.to_poly(frob.get(d).data(), g.tower()) - Poly::x(g.tower(), g.level());
            Poly h = gcd(diff, g);
            if (h.degree() > 0) {
                std::vector<Poly> fs;
                detail::split_equal_degree(h, d, fs);
                for (auto& irr : fs) out.emplace_back(std::move(irr), mult);
                g = divmod(g, h).first;
            }
            ++d;
        }
        if (g.degree() > 0) out.emplace_back(make_monic(g), mult);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return poly_canonical_less(a.first, b.first);
    });
    return out;
}

// All roots of f in its own coefficient field (distinct, canonical order).
inline std::vector<FieldElement> roots_in_field(const Poly& f_in) {
    std::vector<FieldElement> roots;
    if (f_in.degree() <= 0) return roots;
    Poly f = make_monic(f_in);
    if (f.degree() == 1) {
        roots.push_back(-f.coeffs()[0]);
        return roots;
    }
    // distinct-root part: gcd(f, x^Q - x)
    auto& ws = detail::workspace();
    detail::ModCtx ctx(f);
    std::vector<u32> xq(ctx.words());
    const std::vector<u32> xp = ctx.x_poly();
    ctx.powmod(xp.data(), f.tower()->cardinality(f.level()), xq.data(), ws);
    Poly diff = ctx.to_poly(xq.data(), f.tower()) - Poly::x(f.tower(), f.level());
    Poly g = gcd(diff, f);
    if (g.degree() == 0) return roots;
    detail::split_linear(g, roots);
    std::sort(roots.begin(), roots.end(),
              [](const FieldElement& a, const FieldElement& b) { return canonical_less(a, b); });
    return roots;
}

// Lift a polynomial coefficient-wise into a higher level of a compatible tower.
inline Poly poly_embed(const Poly& f, const TowerPtr& tw, u32 lvl) {
    std::vector<FieldElement> cs;
    cs.reserve(f.coeffs().size());
    for (const FieldElement& c : f.coeffs()) cs.push_back(embed(c, tw, lvl));
    return Poly(tw, lvl, std::move(cs));
}

// Deterministic square root in odd characteristic: the canonically smaller
// root of x^2 - u, or nothing when u is a non-square.
inline std::optional<FieldElement> sqrt_element(const FieldElement& u) {
    if (u.tower()->characteristic() == 2) throw EvenCharacteristicError();
    if (u.is_zero()) return u;
    Poly q(u.tower(), u.level(),
           std::vector<FieldElement>{-u, FieldElement::zero(u.tower(), u.level()),
                                     FieldElement::one(u.tower(), u.level())});
    std::vector<FieldElement> rs = roots_in_field(q);
    if (rs.empty()) return std::nullopt;
    return rs.front();
}

// ---------------------------------------------------------------------------
// Closed-form discriminants for degrees 2..4.

inline FieldElement discriminant(const Poly& f) {
    const TowerPtr& tw = f.tower();
    const u32 lvl = f.level();
    auto k = [&](u64 n) { return FieldElement::from_prime(tw, lvl, n); };
    auto kneg = [&](u64 n) { return -FieldElement::from_prime(tw, lvl, n); };
    switch (f.degree()) {
        case 2: {
            const FieldElement a = f.coeffs()[2], b = f.coeffs()[1], c = f.coeffs()[0];
            return b * b - k(4) * a * c;
        }
        case 3: {
            const FieldElement a = f.coeffs()[3], b = f.coeffs()[2], c = f.coeffs()[1],
                               d = f.coeffs()[0];
            return k(18) * a * b * c * d - k(4) * b * b * b * d + b * b * c * c -
                   k(4) * a * c * c * c - k(27) * a * a * d * d;
        }
        case 4: {
            const FieldElement a = f.coeffs()[4], b = f.coeffs()[3], c = f.coeffs()[2],
                               d = f.coeffs()[1], e = f.coeffs()[0];
            FieldElement r = k(256) * a * a * a * e * e * e;
            r = r + kneg(192) * a * a * b * d * e * e;
            r = r + kneg(128) * a * a * c * c * e * e;
            r = r + k(144) * a * a * c * d * d * e;
            r = r + kneg(27) * a * a * d * d * d * d;
            r = r + k(144) * a * b * b * c * e * e;
            r = r + kneg(6) * a * b * b * d * d * e;
            r = r + kneg(80) * a * b * c * c * d * e;
            r = r + k(18) * a * b * c * d * d * d;
            r = r + k(16) * a * c * c * c * c * e;
            r = r + kneg(4) * a * c * c * c * d * d;
            r = r + kneg(27) * b * b * b * b * e * e;
            r = r + k(18) * b * b * b * c * d * e;
            r = r + kneg(4) * b * b * b * d * d * d;
            r = r + kneg(4) * b * b * c * c * c * e;
            r = r + b * b * c * c * d * d;
            return r;
        }
        default:
            throw DegreeUnsupportedError("closed-form discriminant only for degrees 2..4, got " +
                                         std::to_string(f.degree()));
    }
}

// First monic irreducible of the given degree in canonical coefficient order.
inline Poly find_irreducible(const TowerPtr& tw, u32 lvl, u32 degree) {
    if (degree < 1) throw DegreeUnsupportedError("irreducible search needs degree >= 1");
    const BigInt q = tw->cardinality(lvl);
    std::vector<BigInt> idx(degree, 0);
    for (;;) {
        std::vector<FieldElement> cs;
        cs.reserve(degree + 1);
        for (u32 i = 0; i < degree; ++i) cs.push_back(FieldElement::from_index(tw, lvl, idx[i]));
        cs.push_back(FieldElement::one(tw, lvl));
        Poly f(tw, lvl, std::move(cs));
        if (degree == 1 || is_irreducible(f)) return f;
        // odometer
        u32 j = 0;
        while (j < degree) {
            if (++idx[j] < q) break;
            idx[j] = 0;
            ++j;
        }
        if (j == degree)
            throw Error("no irreducible of the requested degree (impossible over a finite field)");
    }
}

// ---------------------------------------------------------------------------
// Checked tower construction.

inline TowerPtr make_tower(u64 p) { return Tower::prime_field(p); }

namespace detail {

// shape checks + flattening, trusting the caller about irreducibility
// (used where it is already established: the checked extend() below, the
// engine right after its own test, trace-one quadratics, ...)
inline TowerPtr adjoin_root_of(const TowerPtr& base, const Poly& modulus) {
    if (modulus.level() != base->height())
        throw LevelMismatchError("modulus must live at the tower's current top level");
    if (modulus.degree() < 2)
        throw ModulusDegreeError("extension degree must be at least 2, got degree " +
                                 std::to_string(modulus.degree()));
    if (!modulus.is_monic()) throw ModulusNotMonicError("extension modulus must be monic");
    std::vector<u32> flat;
    flat.reserve(std::size_t(modulus.degree() + 1) * base->block(base->height()));
    for (int i = 0; i <= modulus.degree(); ++i) {
        const auto& c = modulus.coeffs()[std::size_t(i)].coords();
        flat.insert(flat.end(), c.begin(), c.end());
    }
    return Tower::extend_unchecked(base, flat);
}

}  // namespace detail

inline TowerPtr extend(const TowerPtr& base, const Poly& modulus) {
    if (modulus.degree() >= 2 && !is_irreducible(modulus))
        throw ModulusReducibleError("extension modulus is reducible over its level");
    return detail::adjoin_root_of(base, modulus);
}

// poly text form: comma-separated coefficient encodings, ascending
inline std::string poly_to_text(const Poly& f) {
    if (f.is_zero()) return "0";
    std::string s;
    for (int i = 0; i <= f.degree(); ++i) {
        if (i) s += ',';
        s += element_to_text(f.coeffs()[std::size_t(i)]);
    }
    return s;
}

inline Poly parse_poly(const TowerPtr& tw, u32 lvl, const std::string& s) {
    std::vector<FieldElement> cs;
    std::size_t i = 0;
    for (;;) {
        std::vector<u32> c(tw->block(lvl), 0);
        detail::parse_element_at(tw, lvl, s, i, c.data());
        cs.emplace_back(tw, lvl, std::move(c));
        detail::skip_ws(s, i);
        if (i == s.size()) break;
        if (s[i] != ',') throw ParseError("expected ',' between coefficients", i);
        ++i;
    }
    return Poly(tw, lvl, std::move(cs));
}

// descriptor text "p; m1; m2; ..." -> verified tower
inline TowerPtr make_tower(const std::string& descriptor) {
    std::size_t i = 0;
    BigInt pval = detail::parse_decimal(descriptor, i);
    if (pval <= 0 || pval >= (BigInt(1) << 32))
        throw NotPrimeError(static_cast<u64>(pval & 0xffffffffu));
    TowerPtr tw = Tower::prime_field(static_cast<u64>(pval));
    detail::skip_ws(descriptor, i);
    while (i < descriptor.size()) {
        if (descriptor[i] != ';') throw ParseError("expected ';' between moduli", i);
        ++i;
        std::size_t end = descriptor.find(';', i);
        if (end == std::string::npos) end = descriptor.size();
        const std::string part = descriptor.substr(i, end - i);
        tw = extend(tw, parse_poly(tw, tw->height(), part));
        i = end;
    }
    return tw;
}

}  // namespace polystab
