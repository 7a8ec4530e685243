#pragma once

// Closed-form factorization-pattern classifiers for the shapes the stability
// machinery dispatches on:
//
//   * quadratics in characteristic 2 (root count + explicit roots),
//   * cubic trinomials x^3 + ax + b in characteristic 2,
//   * quartic binomials x^4 - a when q = 1 (mod 4),
//   * quartic trinomials x^4 + cx + d in characteristic 3,
//   * the parity law linking the factor count of a squarefree polynomial to
//     the quadratic character of its discriminant.
//
// Each classifier decides the pattern from trace / residue / cube conditions
// instead of factoring, and the tests replay every one of them against the
// generic factorizer. States the underlying theory excludes are not silently
// "handled": they throw, so a wrong classification can never look like data.

#include "polystab/poly.hpp"

namespace polystab {

namespace detail {

// First basis vector of F_{2^M} (canonical index 2^j) with absolute trace
// one. One exists because the trace form is non-degenerate, and scanning the
// basis matters: plain index order can wade through an entire trace-zero
// subfield before leaving it.
inline FieldElement first_trace_one_basis_vector(const TowerPtr& tw, u32 lvl) {
    const u32 M = static_cast<u32>(tw->block(lvl));
    for (u32 j = 0; j < M; ++j) {
        FieldElement e = FieldElement::from_index(tw, lvl, BigInt(1) << j);
        if (!trace(e, 0).is_zero()) return e;
    }
    throw Error("trace vanished on a full basis; the trace form cannot be degenerate");
}

// Solve y^2 + y = u over F_{2^M}; requires Tr(u) = 0 (caller's burden).
// Small fields get an exhaustive canonical scan, which keeps an independent
// reference in play; larger fields use the half-trace (M odd) or the
// theta-expansion (M even) with theta the first trace-one element.
inline FieldElement solve_artin_schreier(const FieldElement& u) {
    const TowerPtr& tw = u.tower();
    const u32 lvl = u.level();
    const u32 M = static_cast<u32>(tw->block(lvl));
    const BigInt q = tw->cardinality(lvl);
    if (q <= 4096) {
        for (BigInt i = 0; i < q; ++i) {
            FieldElement y = FieldElement::from_index(tw, lvl, i);
            if (sqr(y) + y == u) return y;
        }
        throw Error("no Artin-Schreier solution found; trace precondition violated");
    }
    if (M % 2 == 1) {
        // half-trace: sum of u^(4^i) for i = 0 .. (M-1)/2
        FieldElement z = u;
        FieldElement acc = u;
        for (u32 i = 0; i < (M - 1) / 2; ++i) {
            z = sqr(sqr(z));
            acc = acc + z;
        }
        return acc;
    }
    // even M: z = sum_{i<M-1} S_i theta^(2^i) with S_i = sum_{j>i} u^(2^j)
    // and theta any trace-one element. Tr(u) = 0 flips each suffix sum into
    // the prefix sum through i, so one ascending pass covers everything.
    const FieldElement theta = first_trace_one_basis_vector(tw, lvl);
    FieldElement up = u;      // u^(2^i)
    FieldElement prefix = u;  // sum_{j<=i} u^(2^j) = S_i
    FieldElement tp = theta;  // theta^(2^i)
    FieldElement z = prefix * tp;
    for (u32 i = 1; i + 1 < M; ++i) {
        up = sqr(up);
        prefix = prefix + up;
        tp = sqr(tp);
        z = z + prefix * tp;
    }
    return z;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Quadratics over F_{2^M}: a x^2 + b x + c.
//
//   b = 0          -> one (double) solution sqrt(c/a)
//   Tr(ac/b^2) = 0 -> two distinct solutions
//   Tr(ac/b^2) = 1 -> none
//
// Solutions are recovered explicitly (canonical order) unless the caller only
// wants the count; each recovered solution is re-checked by evaluation.

struct QuadraticChar2Solutions {
    u32 count = 0;
    std::vector<FieldElement> solutions;
};

inline QuadraticChar2Solutions char2_quadratic_solutions(const FieldElement& a,
                                                         const FieldElement& b,
                                                         const FieldElement& c,
                                                         bool want_solutions = true) {
    if (a.tower()->characteristic() != 2)
        throw WrongResidueClassError("quadratic root-count rule requires characteristic 2");
    if (a.is_zero())
        throw ZeroLeadingCoefficientError("quadratic solver needs a nonzero leading coefficient");
    const TowerPtr& tw = a.tower();
    const u32 lvl = a.level();
    const BigInt q = tw->cardinality(lvl);
    QuadraticChar2Solutions out;
    if (b.is_zero()) {
        out.count = 1;
        if (want_solutions) out.solutions.push_back(pow(c / a, q / 2));
    } else {
        const FieldElement u = a * c / (b * b);
        if (!trace(u, 0).is_zero()) return out;  // count 0
        out.count = 2;
        if (want_solutions) {
            const FieldElement y = detail::solve_artin_schreier(u);
            const FieldElement shift = b / a;
            FieldElement x1 = shift * y;
            FieldElement x2 = x1 + shift;
            if (canonical_less(x2, x1)) std::swap(x1, x2);
            out.solutions = {x1, x2};
        }
    }
    for (const FieldElement& x : out.solutions)
        if (!(a * x * x + b * x + c).is_zero())
            throw Error("recovered quadratic solution fails re-evaluation");
    return out;
}

// ---------------------------------------------------------------------------
// Cubic trinomials x^3 + a x + b over F_{2^M}, b != 0. Writing t1, t2 for the
// roots of x^2 + bx + a^3 (they live in F_{2^M} for even M, in F_{2^(2M)}
// otherwise), the pattern is decided by
//
//   Tr(a^3/b^2) != Tr(1)           -> one root, one irreducible quadratic
//   Tr equal, t1 and t2 cubes      -> splits into three distinct roots
//   Tr equal, t1 and t2 non-cubes  -> irreducible
//
// a = 0 falls outside that trichotomy (the t_i collapse to {0, b}); binomial
// rules take over: for odd M cubing is a bijection, for even M everything
// hangs on whether b is a cube.

inline FactorPattern cubic_trinomial_pattern(const FieldElement& a, const FieldElement& b) {
    if (a.tower()->characteristic() != 2)
        throw WrongResidueClassError("cubic trinomial rule requires characteristic 2");
    if (b.is_zero())
        throw ZeroConstantTermError("cubic trinomial rule needs a nonzero constant term");
    const TowerPtr& tw = a.tower();
    const u32 lvl = a.level();
    const u32 M = static_cast<u32>(tw->block(lvl));

    if (a.is_zero()) {
        if (M % 2 == 1) return {{1, 1}, {2, 1}};
        return is_cube(b) ? FactorPattern{{1, 1}, {1, 1}, {1, 1}} : FactorPattern{{3, 1}};
    }

    const FieldElement a3 = a * a * a;
    const bool tr = !trace(a3 / (b * b), 0).is_zero();
    const bool tr_one = (M % 2) == 1;  // absolute trace of 1
    if (tr != tr_one) return {{1, 1}, {2, 1}};

    FieldElement t1(tw, lvl, std::vector<u32>(tw->block(lvl))), t2 = t1;
    if (!tr) {
        // t-quadratic splits over the field itself
        auto sol = char2_quadratic_solutions(FieldElement::one(tw, lvl), b, a3);
        t1 = sol.solutions[0];
        t2 = sol.solutions[1];
    } else {
        // adjoin a root of x^2 + x + g for a canonical trace-one g, then the
        // t-quadratic splits there (its trace dies in the doubled field)
        const FieldElement g = detail::first_trace_one_basis_vector(tw, lvl);
        const FieldElement one = FieldElement::one(tw, lvl);
        TowerPtr up = detail::adjoin_root_of(tw, Poly(tw, lvl, {g, one, one}));
        auto sol = char2_quadratic_solutions(FieldElement::one(up, lvl + 1),
                                             embed(b, up, lvl + 1), embed(a3, up, lvl + 1));
        t1 = sol.solutions[0];
        t2 = sol.solutions[1];
    }
    const bool c1 = is_cube(t1);
    const bool c2 = is_cube(t2);
    if (c1 != c2) throw Error("conjugate resolvent roots disagree on cube status");
    return c1 ? FactorPattern{{1, 1}, {1, 1}, {1, 1}} : FactorPattern{{3, 1}};
}

// ---------------------------------------------------------------------------
// Quartic binomials x^4 - a over a field with q = 1 (mod 4): irreducible
// exactly when a is a non-square.

inline bool quartic_binomial_irreducible(const FieldElement& a) {
    const BigInt q = a.tower()->cardinality(a.level());
    if (q % 4 != 1)
        throw WrongResidueClassError("quartic binomial rule requires q = 1 (mod 4)");
    if (a.is_zero()) throw ZeroParameterError("quartic binomial rule needs a nonzero constant");
    return !is_square(a);
}

// ---------------------------------------------------------------------------
// Quartic trinomials x^4 + c x + d in characteristic 3, c != 0. The cubic
// resolvent g = x^3 - d x - c^2 controls everything: if r^2 is a root of g
// then
//
//   x^4 + cx + d = (x^2 + rx + c/r - r^2)(x^2 - rx - c/r - r^2),
//
// and the two quadratic discriminants -r^2 -+ c/r decide how far the split
// goes. Root counts of g in the base field steer the case analysis; the d = 0
// degeneracy x^4 + cx = x (x + c^(1/3))^3 gets its own verdict since the
// generic five-way split assumes separability.

enum class QuarticChar3Case {
    SplitsIntoLinears,          // four distinct roots
    TwoIrreducibleQuadratics,   // no root, two quadratic factors
    UniqueRoot,                 // one root + an irreducible cubic
    ExactlyTwoRoots,            // two roots + an irreducible quadratic
    Irreducible,                //
    RepeatedFactorDegenerate,   // d = 0: x (x + c^(1/3))^3
};

inline const char* to_string(QuarticChar3Case k) {
    switch (k) {
        case QuarticChar3Case::SplitsIntoLinears: return "splits-into-linears";
        case QuarticChar3Case::TwoIrreducibleQuadratics: return "two-irreducible-quadratics";
        case QuarticChar3Case::UniqueRoot: return "unique-root";
        case QuarticChar3Case::ExactlyTwoRoots: return "exactly-two-roots";
        case QuarticChar3Case::Irreducible: return "irreducible";
        case QuarticChar3Case::RepeatedFactorDegenerate: return "repeated-factor-degenerate";
    }
    return "?";
}

struct QuarticChar3Verdict {
    QuarticChar3Case kind;
    FactorPattern pattern;
    std::vector<FieldElement> resolvent_roots;  // roots of x^3 - dx - c^2 in the field
    std::optional<FieldElement> split_witness;  // an r realizing the quadratic split
    bool expansion_checked = false;             // claimed split re-expanded exactly
};

namespace detail {

// re-expand (x^2 + rx + c/r - r^2)(x^2 - rx - c/r - r^2) and compare
inline void check_quartic_split(const FieldElement& c, const FieldElement& d,
                                const FieldElement& r) {
    const TowerPtr& tw = c.tower();
    const u32 lvl = c.level();
    const FieldElement one = FieldElement::one(tw, lvl);
    const FieldElement w = c / r;
    const FieldElement r2 = r * r;
    Poly q1(tw, lvl, {w - r2, r, one});
    Poly q2(tw, lvl, {-w - r2, -r, one});
    Poly target(tw, lvl, {d, c, FieldElement::zero(tw, lvl), FieldElement::zero(tw, lvl), one});
    if (!(q1 * q2 == target)) throw Error("quartic quadratic-split failed re-expansion");
}

}  // namespace detail

inline QuarticChar3Verdict quartic_char3_classify(const FieldElement& c, const FieldElement& d) {
    if (c.tower()->characteristic() != 3)
        throw WrongResidueClassError("quartic trinomial rule requires characteristic 3");
    if (c.is_zero())
        throw ZeroLinearCoefficientError("quartic trinomial rule needs a nonzero linear term");
    const TowerPtr& tw = c.tower();
    const u32 lvl = c.level();
    const BigInt q = tw->cardinality(lvl);
    const FieldElement one = FieldElement::one(tw, lvl);
    QuarticChar3Verdict v;

    if (d.is_zero()) {
        // x^4 + cx = x (x + e)^3 with e the unique cube root of c
        const FieldElement e = pow(c, q / 3);
        Poly lin(tw, lvl, {e, one});
        Poly prod = Poly::x(tw, lvl) * lin * lin * lin;
        if (!(prod == Poly(tw, lvl, {FieldElement::zero(tw, lvl), c, FieldElement::zero(tw, lvl),
                                     FieldElement::zero(tw, lvl), one})))
            throw Error("degenerate quartic split failed re-expansion");
        v.kind = QuarticChar3Case::RepeatedFactorDegenerate;
        v.pattern = {{1, 1}, {1, 3}};
        v.resolvent_roots = {e * e};  // triple root of x^3 - c^2
        v.expansion_checked = true;
        return v;
    }

    Poly g(tw, lvl, {-(c * c), -d, FieldElement::zero(tw, lvl), one});
    v.resolvent_roots = roots_in_field(g);

    if (v.resolvent_roots.empty()) {
        v.kind = QuarticChar3Case::UniqueRoot;
        v.pattern = {{1, 1}, {3, 1}};
        return v;
    }

    if (v.resolvent_roots.size() == 1) {
        const FieldElement u = v.resolvent_roots.front();
        if (!is_square(u)) {
            v.kind = QuarticChar3Case::Irreducible;
            v.pattern = {{4, 1}};
            return v;
        }
        const FieldElement r = *sqrt_element(u);
        const FieldElement w = c / r;
        const bool sp = is_square(-u + w);
        const bool sm = is_square(-u - w);
        if (sp == sm)
            throw Error("lone square resolvent root with equal-status discriminants; "
                        "the theory excludes this state");
        detail::check_quartic_split(c, d, r);
        v.kind = QuarticChar3Case::ExactlyTwoRoots;
        v.pattern = {{1, 1}, {1, 1}, {2, 1}};
        v.split_witness = r;
        v.expansion_checked = true;
        return v;
    }

    if (v.resolvent_roots.size() == 3) {
        u32 nsquare = 0;
        for (const auto& u : v.resolvent_roots) nsquare += is_square(u) ? 1 : 0;
        if (nsquare == 3) {
            for (const auto& u : v.resolvent_roots) {
                const FieldElement r = *sqrt_element(u);
                const FieldElement w = c / r;
                if (!is_square(-u + w) || !is_square(-u - w))
                    throw Error("all-square resolvent with a non-square discriminant; "
                                "the theory excludes this state");
                detail::check_quartic_split(c, d, r);
                if (!v.split_witness) v.split_witness = r;
            }
            v.kind = QuarticChar3Case::SplitsIntoLinears;
            v.pattern = {{1, 1}, {1, 1}, {1, 1}, {1, 1}};
            v.expansion_checked = true;
            return v;
        }
        if (nsquare == 1) {
            for (const auto& u : v.resolvent_roots) {
                if (!is_square(u)) continue;
                const FieldElement r = *sqrt_element(u);
                const FieldElement w = c / r;
                if (is_square(-u + w) || is_square(-u - w))
                    throw Error("lone-square resolvent with a square discriminant; "
                                "the theory excludes this state");
                detail::check_quartic_split(c, d, r);
                v.split_witness = r;
            }
            v.kind = QuarticChar3Case::TwoIrreducibleQuadratics;
            v.pattern = {{2, 1}, {2, 1}};
            v.expansion_checked = true;
            return v;
        }
        throw Error("resolvent root squares came out even; their product is a square, "
                    "so the theory excludes this state");
    }

    throw Error("separable cubic resolvent with exactly two roots; "
                "the theory excludes this state");
}

// ---------------------------------------------------------------------------
// Parity law: for a squarefree polynomial of degree 2..4 over odd
// characteristic, the number of irreducible factors r satisfies
// r = deg (mod 2) exactly when the discriminant is a square.

inline bool parity_check(const Poly& f) {
    if (f.tower()->characteristic() == 2) throw EvenCharacteristicError();
    if (f.degree() < 2 || f.degree() > 4)
        throw DegreeUnsupportedError("parity law stated for degrees 2..4, got degree " +
                                     std::to_string(f.degree()));
    if (gcd(f, derivative(f)).degree() != 0)
        throw NotSquarefreeError("parity law needs a squarefree polynomial");
    const FactorPattern pat = factor_pattern(f);
    const u32 r = static_cast<u32>(pat.size());
    return ((r % 2) == (static_cast<u32>(f.degree()) % 2)) == is_square(discriminant(f));
}

}  // namespace polystab
