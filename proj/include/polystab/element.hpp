#pragma once

// FieldElement: an immutable value in some level of a tower, plus the
// field-theoretic operations (Frobenius, trace, norm, residue-class tests)
// and the canonical text encoding used by the CLI and the test fixtures.

#include "polystab/tower.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace polystab {

class FieldElement {
public:
    FieldElement() = default;
    FieldElement(TowerPtr tower, u32 level, std::vector<u32> coords)
        : tower_(std::move(tower)), level_(level), c_(std::move(coords)) {
        if (c_.size() != tower_->block(level_))
            throw LevelMismatchError("coordinate vector does not match the level block size");
    }

    static FieldElement zero(const TowerPtr& tw, u32 lvl) {
        return FieldElement(tw, lvl, std::vector<u32>(tw->block(lvl), 0));
    }
    static FieldElement one(const TowerPtr& tw, u32 lvl) {
        std::vector<u32> c(tw->block(lvl), 0);
        c[0] = static_cast<u32>(1 % tw->characteristic());
        return FieldElement(tw, lvl, std::move(c));
    }
    // the residue class of x adjoined at this level (level ≥ 1)
    static FieldElement generator(const TowerPtr& tw, u32 lvl) {
        if (lvl == 0) throw LevelMismatchError("the prime field has no adjoined generator");
        std::vector<u32> c(tw->block(lvl), 0);
        c[tw->block(lvl - 1)] = 1;
        return FieldElement(tw, lvl, std::move(c));
    }
    static FieldElement from_prime(const TowerPtr& tw, u32 lvl, u64 value) {
        std::vector<u32> c(tw->block(lvl), 0);
        c[0] = static_cast<u32>(value % tw->characteristic());
        return FieldElement(tw, lvl, std::move(c));
    }
    // canonical enumeration: index = sum of coords[j] * p^j
    static FieldElement from_index(const TowerPtr& tw, u32 lvl, BigInt idx) {
        const u64 p = tw->characteristic();
        std::vector<u32> c(tw->block(lvl), 0);
        for (std::size_t j = 0; j < c.size() && idx != 0; ++j) {
            c[j] = static_cast<u32>(idx % p);
            idx /= p;
        }
        if (idx != 0) throw LevelMismatchError("element index exceeds field cardinality");
        return FieldElement(tw, lvl, std::move(c));
    }
    BigInt index() const {
        BigInt idx = 0;
        const u64 p = tower_->characteristic();
        for (std::size_t j = c_.size(); j-- > 0;) idx = idx * p + c_[j];
        return idx;
    }

    const TowerPtr& tower() const { return tower_; }
    u32 level() const { return level_; }
    const std::vector<u32>& coords() const { return c_; }
    u32* data() { return c_.data(); }
    const u32* data() const { return c_.data(); }

    bool is_zero() const { return detail::vec_is_zero(c_.data(), c_.size()); }
    bool is_one() const {
        u64 s;
        return detail::vec_is_scalar(c_.data(), c_.size(), s) && s == 1 % tower_->characteristic();
    }

private:
    TowerPtr tower_;
    u32 level_ = 0;
    std::vector<u32> c_;
};

namespace detail {

inline void require_same_field(const FieldElement& a, const FieldElement& b) {
    if (a.level() != b.level())
        throw LevelMismatchError("operands live at different tower levels");
    if (a.tower() != b.tower() && !a.tower()->prefix_equal(*b.tower(), a.level()))
        throw LevelMismatchError("operands come from incompatible towers");
}

}  // namespace detail

inline bool operator==(const FieldElement& a, const FieldElement& b) {
    detail::require_same_field(a, b);
    return a.coords() == b.coords();
}
inline bool operator!=(const FieldElement& a, const FieldElement& b) { return !(a == b); }

// canonical total order: compare as base-p numbers, most significant last
inline bool canonical_less(const FieldElement& a, const FieldElement& b) {
    detail::require_same_field(a, b);
    const auto& x = a.coords();
    const auto& y = b.coords();
    for (std::size_t j = x.size(); j-- > 0;)
        if (x[j] != y[j]) return x[j] < y[j];
    return false;
}

inline FieldElement operator+(const FieldElement& a, const FieldElement& b) {
    detail::require_same_field(a, b);
    std::vector<u32> out(a.coords().size());
    detail::vec_add(a.tower()->characteristic(), a.data(), b.data(), out.data(), out.size());
    return FieldElement(a.tower(), a.level(), std::move(out));
}

inline FieldElement operator-(const FieldElement& a, const FieldElement& b) {
    detail::require_same_field(a, b);
    std::vector<u32> out(a.coords().size());
    detail::vec_sub(a.tower()->characteristic(), a.data(), b.data(), out.data(), out.size());
    return FieldElement(a.tower(), a.level(), std::move(out));
}

inline FieldElement operator-(const FieldElement& a) {
    std::vector<u32> out(a.coords().size());
    detail::vec_neg(a.tower()->characteristic(), a.data(), out.data(), out.size());
    return FieldElement(a.tower(), a.level(), std::move(out));
}

inline FieldElement operator*(const FieldElement& a, const FieldElement& b) {
    detail::require_same_field(a, b);
    std::vector<u32> out(a.coords().size());
    detail::mul_block(*a.tower(), a.level(), a.data(), b.data(), out.data(),
                      detail::workspace());
    return FieldElement(a.tower(), a.level(), std::move(out));
}

inline FieldElement inv(const FieldElement& a) {
    std::vector<u32> out(a.coords().size());
    detail::inv_block(*a.tower(), a.level(), a.data(), out.data(), detail::workspace());
    return FieldElement(a.tower(), a.level(), std::move(out));
}

inline FieldElement operator/(const FieldElement& a, const FieldElement& b) { return a * inv(b); }

inline FieldElement pow(const FieldElement& a, const BigInt& e) {
    std::vector<u32> out(a.coords().size());
    detail::pow_block(*a.tower(), a.level(), a.data(), e, out.data(), detail::workspace());
    return FieldElement(a.tower(), a.level(), std::move(out));
}

inline FieldElement sqr(const FieldElement& a) {
    std::vector<u32> out(a.coords().size());
    detail::sqr_block(*a.tower(), a.level(), a.data(), out.data(), detail::workspace());
    return FieldElement(a.tower(), a.level(), std::move(out));
}

// Embed an element into a higher level of (a compatible extension of) its
// tower; the subfield sits as the constant part of every block above it.
inline FieldElement embed(const FieldElement& a, const TowerPtr& tw, u32 lvl) {
    if (lvl < a.level() || !tw->prefix_equal(*a.tower(), a.level()))
        throw LevelMismatchError("embed target is not an extension of the element's field");
    std::vector<u32> out(tw->block(lvl), 0);
    detail::vec_copy(out.data(), a.data(), a.coords().size());
    return FieldElement(tw, lvl, std::move(out));
}

// Inverse of embed for elements that actually lie in the lower level.
inline FieldElement project(const FieldElement& a, u32 lvl) {
    if (lvl > a.level()) throw LevelMismatchError("project target above element level");
    const std::size_t nb = a.tower()->block(lvl);
    if (!detail::vec_is_zero(a.data() + nb, a.coords().size() - nb))
        throw LevelMismatchError("element does not lie in the requested subfield");
    std::vector<u32> out(a.data(), a.data() + nb);
    return FieldElement(a.tower(), lvl, std::move(out));
}

// x -> x^(cardinality of base_level): the canonical generator of the Galois
// group of the element's level over that base.
inline FieldElement frobenius(const FieldElement& a, u32 base_level) {
    if (base_level > a.level()) throw LevelMismatchError("frobenius base above element level");
    return pow(a, a.tower()->cardinality(base_level));
}

inline FieldElement trace(const FieldElement& a, u32 base_level) {
    if (base_level > a.level()) throw LevelMismatchError("trace base above element level");
    auto& ws = detail::workspace();
    std::vector<u32> cur(a.coords());
    for (u32 lvl = a.level(); lvl > base_level; --lvl) {
        std::vector<u32> next(a.tower()->block(lvl - 1));
        detail::rel_trace(*a.tower(), lvl, cur.data(), next.data(), ws);
        cur = std::move(next);
    }
    return FieldElement(a.tower(), base_level, std::move(cur));
}

inline FieldElement norm(const FieldElement& a, u32 base_level) {
    if (base_level > a.level()) throw LevelMismatchError("norm base above element level");
    auto& ws = detail::workspace();
    std::vector<u32> cur(a.coords());
    for (u32 lvl = a.level(); lvl > base_level; --lvl) {
        std::vector<u32> next(a.tower()->block(lvl - 1));
        detail::rel_norm(*a.tower(), lvl, cur.data(), next.data(), ws);
        cur = std::move(next);
    }
    return FieldElement(a.tower(), base_level, std::move(cur));
}

// Quadratic-residue test. Fast path: push the element down to the prime field
// with the norm (valid because 2 divides every odd Q-1 along the way) and
// apply the Euler criterion there. Zero counts as a square.
inline bool is_square(const FieldElement& a) {
    const u64 p = a.tower()->characteristic();
    if (p == 2) throw EvenCharacteristicError();
    if (a.is_zero()) return true;
    const FieldElement n = norm(a, 0);
    return detail::powmod_u64(n.coords()[0], (p - 1) / 2, p) == 1;
}

// Reference route: e^((Q-1)/2) directly at the element's level.
inline bool is_square_euler(const FieldElement& a) {
    const u64 p = a.tower()->characteristic();
    if (p == 2) throw EvenCharacteristicError();
    if (a.is_zero()) return true;
    const BigInt q = a.tower()->cardinality(a.level());
    return pow(a, (q - 1) / 2).is_one();
}

// Cubic-residue test. When 3 does not divide Q-1 cubing is a bijection and
// everything is a cube; otherwise descend by norms while the target field
// still sees cubes (3 | Q'-1) and finish with one Euler-type test. Zero
// counts as a cube.
inline bool is_cube(const FieldElement& a) {
    const BigInt q = a.tower()->cardinality(a.level());
    if ((q - 1) % 3 != 0) return true;
    if (a.is_zero()) return true;
    auto& ws = detail::workspace();
    std::vector<u32> cur(a.coords());
    u32 lvl = a.level();
    while (lvl > 0 && (a.tower()->cardinality(lvl - 1) - 1) % 3 == 0) {
        std::vector<u32> next(a.tower()->block(lvl - 1));
        detail::rel_norm(*a.tower(), lvl, cur.data(), next.data(), ws);
        cur = std::move(next);
        --lvl;
    }
    const BigInt qs = a.tower()->cardinality(lvl);
    if (lvl == 0)
        return detail::powmod_u64(cur[0], static_cast<u64>((qs - 1) / 3), a.tower()->characteristic()) == 1;
    FieldElement e(a.tower(), lvl, std::move(cur));
    return pow(e, (qs - 1) / 3).is_one();
}

inline bool is_cube_euler(const FieldElement& a) {
    const BigInt q = a.tower()->cardinality(a.level());
    if ((q - 1) % 3 != 0) return true;
    if (a.is_zero()) return true;
    return pow(a, (q - 1) / 3).is_one();
}

// ---------------------------------------------------------------------------
// Canonical text encoding.
//
//   level 0:    a plain decimal residue, e.g. "3"
//   level k>0:  "[" sub "," sub "," ... "]", one entry per basis power,
//               ascending, e.g. "[[1,0],[2,1]]"
//
// A bare decimal is also accepted at any level and decodes through the
// canonical index (base-p digits), which makes prime-power CLI inputs like
// "2" for the nontrivial element of F_4 work.

namespace detail {

// canonical text of one coordinate block: prime-subfield values compact to
// their decimal form, which the parser reads back as the same canonical index
inline std::string block_to_text(const Tower& tw, u32 lvl, const u32* c) {
    if (lvl == 0) return std::to_string(c[0]);
    const std::size_t b = tw.block(lvl);
    if (vec_is_zero(c + 1, b - 1)) return std::to_string(c[0]);
    const u32 e = tw.ext_degree(lvl);
    const std::size_t sb = tw.block(lvl - 1);
    std::string s = "[";
    for (u32 i = 0; i < e; ++i) {
        if (i) s += ',';
        s += block_to_text(tw, lvl - 1, c + i * sb);
    }
    s += ']';
    return s;
}

}  // namespace detail

inline std::string element_to_text(const FieldElement& a) {
    return detail::block_to_text(*a.tower(), a.level(), a.data());
}

namespace detail {

inline void skip_ws(const std::string& s, std::size_t& i) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
}

inline BigInt parse_decimal(const std::string& s, std::size_t& i) {
    skip_ws(s, i);
    const std::size_t start = i;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
    if (i == start) throw ParseError("expected a decimal digit", start);
    return BigInt(s.substr(start, i - start));
}

// parses one element at `lvl`, writing block(lvl) coords to out
inline void parse_element_at(const TowerPtr& tw, u32 lvl, const std::string& s, std::size_t& i,
                             u32* out) {
    skip_ws(s, i);
    if (i < s.size() && s[i] == '[') {
        if (lvl == 0) throw ParseError("nested list deeper than the tower", i);
        ++i;
        const u32 e = tw->ext_degree(lvl);
        const std::size_t sb = tw->block(lvl - 1);
        for (u32 k = 0; k < e; ++k) {
            if (k) {
                skip_ws(s, i);
                if (i >= s.size() || s[i] != ',') throw ParseError("expected ','", i);
                ++i;
            }
            parse_element_at(tw, lvl - 1, s, i, out + k * sb);
        }
        skip_ws(s, i);
        if (i >= s.size() || s[i] != ']') throw ParseError("expected ']'", i);
        ++i;
        return;
    }
    // bare decimal: canonical index
    BigInt idx = parse_decimal(s, i);
    const u64 p = tw->characteristic();
    const std::size_t nb = tw->block(lvl);
    for (std::size_t j = 0; j < nb; ++j) {
        out[j] = static_cast<u32>(idx % p);
        idx /= p;
    }
    if (idx != 0) throw ParseError("value exceeds the field cardinality", i);
}

}  // namespace detail

inline FieldElement parse_element(const TowerPtr& tw, u32 lvl, const std::string& s) {
    std::size_t i = 0;
    std::vector<u32> out(tw->block(lvl), 0);
    detail::parse_element_at(tw, lvl, s, i, out.data());
    detail::skip_ws(s, i);
    if (i != s.size()) throw ParseError("trailing characters after element", i);
    return FieldElement(tw, lvl, std::move(out));
}

// "p; m1; m2; ..." with each modulus printed as its full ascending
// coefficient list (elements of the level below, monic lead included).
inline std::string descriptor_text(const Tower& tw) {
    std::string s = std::to_string(tw.characteristic());
    for (u32 lvl = 1; lvl <= tw.height(); ++lvl) {
        s += "; ";
        const Level& L = tw.level(lvl);
        const std::size_t sb = L.sub_block;
        for (u32 i = 0; i < L.ext; ++i) {
            if (i) s += ',';
            s += detail::block_to_text(tw, lvl - 1, L.tail.data() + i * sb);
        }
        std::vector<u32> lead(sb, 0);
        lead[0] = static_cast<u32>(1 % tw.characteristic());
        s += ',';
        s += detail::block_to_text(tw, lvl - 1, lead.data());
    }
    return s;
}

}  // namespace polystab
