#pragma once
// Constructive families of stable polynomials, one per supported shape:
//
//   * quadratic, odd characteristic: the unique quadratic with a prescribed
//     leading coefficient and discriminant whose critical-chain discriminants
//     reproduce themselves (Delta_n^2 = 4 Delta_{n-1});
//   * cubic, characteristic 2: f = b^2 (x+a)^3 + x under a trace hypothesis,
//     where irreducibility of f itself already certifies every level;
//   * quartic, q = 1 (mod 4): f = b^3 (x+a)^4 - a, stable exactly when ab is
//     a non-square;
//   * quartic, characteristic 3: f = b^3 (x+a)^4 + c (x+a) - a, certified
//     level by level through the root pattern of a resolvent cubic.
//
// Each family ships a checked constructor (hypotheses are validated eagerly;
// invalid parameters are refused), a closed-form stability verdict where the
// theory provides one, and a recurrence validator that rebuilds the critical
// chain and confirms the algebraic identities the stability proofs rest on.

#include "polystab/stability.hpp"

#include <optional>
#include <string>
#include <vector>

namespace polystab {

// ---------------------------------------------------------------------------
// Quadratic family (odd characteristic).
//
// quad_build(b, delta) materializes f = b x^2 + (delta/2) x +
// (delta^2 - 4 delta) / (16 b), the one quadratic with lead b and
// discriminant delta for which the chain discriminants satisfy
// Delta_n^2 = 4 Delta_{n-1}. Stability holds exactly when q = 1 (mod 4)
// and delta is a non-square; for q = 3 (mod 4) every element of F_q is a
// fourth power in F_{q^2}, so Delta_1 is always a square there and the
// second iterate already factors.

struct QuadraticFamilyInstance {
    Poly f;
    FieldElement b;
    FieldElement delta;
};

inline QuadraticFamilyInstance quad_build(const FieldElement& b, const FieldElement& delta) {
    const TowerPtr& tw = b.tower();
    const u32 lvl = b.level();
    if (tw->characteristic() == 2) throw EvenCharacteristicError();
    if (b.is_zero()) throw ZeroParameterError("quadratic family: leading coefficient b = 0");
    if (delta.is_zero()) throw ZeroParameterError("quadratic family: discriminant delta = 0");

    const FieldElement two = FieldElement::from_prime(tw, lvl, 2);
    const FieldElement four = two * two;
    const FieldElement sixteen = four * four;
    const FieldElement c1 = delta / two;
    const FieldElement c0 = (delta * delta - four * delta) / (sixteen * b);
    Poly f(tw, lvl, {c0, c1, b});
    if (!(discriminant(f) == delta))
        throw Error("quadratic family construction lost its discriminant");
    return QuadraticFamilyInstance{std::move(f), b, delta};
}

inline bool quad_is_stable(const QuadraticFamilyInstance& inst) {
    const BigInt q = inst.b.tower()->cardinality(inst.b.level());
    return q % 4 == 1 && !is_square(inst.delta);
}

// The chain-discriminant sequence Delta_n = delta + 4 b alpha_n, grown while
// the per-level frontier stays irreducible (Delta_n a non-square). Each entry
// lives at its own chain level; `first_square` is the first level whose
// discriminant turned square (= the first reducible frontier), if one was
// found within `depth`.
struct DeltaSequenceReport {
    std::vector<FieldElement> deltas;
    bool recurrence_ok = true;  // Delta_n^2 == 4 Delta_{n-1} at every computed level
    std::optional<u32> first_square;
};

inline DeltaSequenceReport quad_delta_sequence(const QuadraticFamilyInstance& inst, u32 depth) {
    DeltaSequenceReport rep;
    rep.deltas.push_back(inst.delta);
    ChainTrace chain(inst.f);
    for (u32 n = 0;; ++n) {
        if (is_square(rep.deltas[n])) {
            rep.first_square = n;
            break;
        }
        if (n == depth) break;
        // non-square discriminant: the quadratic frontier is irreducible
        chain.adopt_irreducible_frontier(chain.shifted(n));
        const FieldElement& al = chain.alpha(n + 1);
        const TowerPtr& ut = al.tower();
        const u32 ul = al.level();
        const FieldElement four = FieldElement::from_prime(ut, ul, 4);
        FieldElement next = embed(inst.delta, ut, ul) + four * embed(inst.b, ut, ul) * al;
        if (!(next * next == four * embed(rep.deltas[n], ut, ul))) rep.recurrence_ok = false;
        rep.deltas.push_back(std::move(next));
    }
    return rep;
}

// True when the discriminant recurrence held at every computed level and,
// for stable instances, no discriminant turned square within `depth`.
inline bool delta_recurrence_check(const QuadraticFamilyInstance& inst, u32 depth) {
    DeltaSequenceReport rep = quad_delta_sequence(inst, depth);
    if (!rep.recurrence_ok) return false;
    if (quad_is_stable(inst) && rep.first_square) return false;
    return true;
}

// Enumerates every family member with a non-square discriminant over F_q,
// q = 1 (mod 4): b ranges over F_q^*, delta over the (q-1)/2 non-squares.
// The resulting polynomials are pairwise distinct (the construction is
// injective in (b, delta)), giving the lower bound (q-1)^2/2 on the number
// of stable quadratics.
struct QuadraticFamilyCensus {
    u64 count = 0;
    std::vector<QuadraticFamilyInstance> instances;
};

inline QuadraticFamilyCensus quad_count_lower_bound(const TowerPtr& tw, u32 lvl) {
    const BigInt q = tw->cardinality(lvl);
    if (q % 4 != 1)
        throw WrongResidueClassError("stable quadratic family needs q = 1 (mod 4), got q = " +
                                     q.str());
    QuadraticFamilyCensus census;
    for (BigInt bi = 1; bi < q; ++bi) {
        FieldElement b = FieldElement::from_index(tw, lvl, bi);
        for (BigInt di = 1; di < q; ++di) {
            FieldElement delta = FieldElement::from_index(tw, lvl, di);
            if (is_square(delta)) continue;
            census.instances.push_back(quad_build(b, delta));
        }
    }
    for (std::size_t i = 0; i < census.instances.size(); ++i)
        for (std::size_t j = i + 1; j < census.instances.size(); ++j)
            if (census.instances[i].f == census.instances[j].f)
                throw Error("quadratic family members collided; the (b, delta) map must inject");
    census.count = census.instances.size();
    return census;
}

// ---------------------------------------------------------------------------
// Cubic family (characteristic 2).
//
// f = b^2 (x+a)^3 + x with a, b != 0 and Tr((ab)^{-1}) = Tr(1). Under that
// hypothesis the level criteria propagate down the chain, so f is stable as
// soon as it is irreducible over the base field. The normalized chain
// values beta_n = b (alpha_n + a) satisfy beta_n^3 + beta_n = beta_{n-1},
// stay outside {0, 1}, and inherit the trace identity at every level.

struct CubicChar2FamilyInstance {
    Poly f;
    FieldElement a;
    FieldElement b;
};

inline CubicChar2FamilyInstance cubic2_build(const FieldElement& a, const FieldElement& b) {
    const TowerPtr& tw = a.tower();
    const u32 lvl = a.level();
    if (tw->characteristic() != 2)
        throw WrongResidueClassError("cubic family requires characteristic 2");
    if (a.is_zero() || b.is_zero())
        throw ZeroParameterError("cubic family: parameters a, b must be nonzero");
    if (!(trace(inv(a * b), 0) == trace(FieldElement::one(tw, lvl), 0)))
        throw HypothesisViolatedError("cubic family: Tr((ab)^{-1}) != Tr(1)");
    const FieldElement b2 = b * b;
    const FieldElement one = FieldElement::one(tw, lvl);
    // b^2 (x+a)^3 + x, expanded via (x+a)^3 = x^3 + a x^2 + a^2 x + a^3
    Poly f(tw, lvl, {a * a * a * b2, a * a * b2 + one, a * b2, b2});
    return CubicChar2FamilyInstance{std::move(f), a, b};
}

inline bool cubic2_is_stable(const CubicChar2FamilyInstance& inst) {
    return is_irreducible(inst.f);
}

// The a = b = 1 member over F_{2^m} is x^3 + x^2 + 1, whose roots generate
// F_8: it is irreducible over F_{2^m} (hence stable) exactly when 3 does not
// divide m, and for 3 | m it already splits at level 0.
inline bool cubic2_unit_member_stable(u32 m) { return m % 3 != 0; }

struct BetaSequenceReport {
    std::vector<FieldElement> betas;
    bool recurrence_ok = true;       // beta_n^3 + beta_n == beta_{n-1}
    bool excluded_values_ok = true;  // beta_n never 0 or 1 for n >= 1
    bool trace_identity_ok = true;   // Tr(beta_n^{-1}) == Tr(1) at every level
    std::optional<u32> stopped_at;   // level whose frontier was reducible, if hit
};

inline BetaSequenceReport cubic2_beta_sequence(const CubicChar2FamilyInstance& inst, u32 depth) {
    BetaSequenceReport rep;
    auto audit_trace = [&rep](const FieldElement& beta) {
        const FieldElement one = FieldElement::one(beta.tower(), beta.level());
        if (!(trace(inv(beta), 0) == trace(one, 0))) rep.trace_identity_ok = false;
    };
    // beta_0 = ab may legitimately equal 1 (e.g. a = b = 1); the {0, 1}
    // exclusion only kicks in from level 1 on, where beta_n = 1 would force
    // beta_{n-1} = 0 and collapse the chain back to beta_0 = 0
    rep.betas.push_back(inst.a * inst.b);
    audit_trace(rep.betas[0]);
    // irreducibility at the root level certifies the whole chain, so each
    // frontier may be adopted without a fresh test once level 0 passes
    if (!is_irreducible(inst.f)) {
        rep.stopped_at = 0;
        return rep;
    }
    ChainTrace chain(inst.f);
    for (u32 n = 0; n < depth; ++n) {
        chain.adopt_irreducible_frontier(chain.shifted(n));
        const FieldElement& al = chain.alpha(n + 1);
        const TowerPtr& ut = al.tower();
        const u32 ul = al.level();
        FieldElement beta = embed(inst.b, ut, ul) * (al + embed(inst.a, ut, ul));
        if (!(beta * beta * beta + beta == embed(rep.betas[n], ut, ul))) rep.recurrence_ok = false;
        if (beta.is_zero() || beta.is_one()) rep.excluded_values_ok = false;
        if (!beta.is_zero()) audit_trace(beta);
        rep.betas.push_back(std::move(beta));
    }
    return rep;
}

inline bool beta_recurrence_check_cubic(const CubicChar2FamilyInstance& inst, u32 depth) {
    BetaSequenceReport rep = cubic2_beta_sequence(inst, depth);
    return rep.recurrence_ok && rep.excluded_values_ok && rep.trace_identity_ok &&
           !rep.stopped_at.has_value();
}

// ---------------------------------------------------------------------------
// Quartic family (q = 1 (mod 4)).
//
// f = b^3 (x+a)^4 - a with a, b != 0. Substituting y = b (x + a) turns
// f - alpha_n into (y^4 - beta_n)/b with beta_n = b (alpha_n + a), so each
// level is irreducible exactly when beta_n is a non-square (the binomial
// criterion, available at every level since q^{4^n} = 1 (mod 4)), and
// beta_{n+1}^4 = beta_n makes non-squareness self-perpetuating: stability
// holds exactly when beta_0 = ab is a non-square.

struct QuarticFamilyInstance {
    Poly f;
    FieldElement a;
    FieldElement b;
};

inline QuarticFamilyInstance quartic_build(const FieldElement& a, const FieldElement& b) {
    const TowerPtr& tw = a.tower();
    const u32 lvl = a.level();
    if (tw->cardinality(lvl) % 4 != 1)
        throw WrongResidueClassError("quartic power family needs q = 1 (mod 4)");
    if (a.is_zero() || b.is_zero())
        throw ZeroParameterError("quartic power family: parameters a, b must be nonzero");
    const FieldElement b3 = b * b * b;
    Poly shift(tw, lvl, {a, FieldElement::one(tw, lvl)});
    Poly f = Poly::constant(b3) * shift * shift * shift * shift - Poly::constant(a);
    return QuarticFamilyInstance{std::move(f), a, b};
}

inline bool quartic_is_stable(const QuarticFamilyInstance& inst) {
    return !is_square(inst.a * inst.b);
}

struct QuarticBetaReport {
    std::vector<FieldElement> betas;
    bool recurrence_ok = true;  // beta_n^4 == beta_{n-1}
    std::optional<u32> first_square;
};

inline QuarticBetaReport quartic_beta_sequence(const QuarticFamilyInstance& inst, u32 depth) {
    QuarticBetaReport rep;
    rep.betas.push_back(inst.a * inst.b);
    ChainTrace chain(inst.f);
    for (u32 n = 0;; ++n) {
        if (is_square(rep.betas[n])) {
            rep.first_square = n;
            break;
        }
        if (n == depth) break;
        chain.adopt_irreducible_frontier(chain.shifted(n));
        const FieldElement& al = chain.alpha(n + 1);
        const TowerPtr& ut = al.tower();
        const u32 ul = al.level();
        FieldElement beta = embed(inst.b, ut, ul) * (al + embed(inst.a, ut, ul));
        FieldElement b4 = beta * beta;
        b4 = b4 * b4;
        if (!(b4 == embed(rep.betas[n], ut, ul))) rep.recurrence_ok = false;
        rep.betas.push_back(std::move(beta));
    }
    return rep;
}

inline bool beta_recurrence_check_quartic(const QuarticFamilyInstance& inst, u32 depth) {
    QuarticBetaReport rep = quartic_beta_sequence(inst, depth);
    if (!rep.recurrence_ok) return false;
    if (quartic_is_stable(inst) && rep.first_square) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Quartic family (characteristic 3).
//
// f = b^3 (x+a)^4 + c (x+a) - a with b, c != 0. The y = b (x+a) substitution
// turns level n into y^4 + c y - beta_n with beta_n = b (alpha_n + a), whose
// irreducibility is read off the resolvent cubic x^3 + beta_n x - c^2: the
// level is irreducible exactly when the resolvent has a unique root in the
// level field and that root is a non-square. There is no one-shot stability
// certificate here; certification walks the chain level by level.

struct QuarticChar3FamilyInstance {
    Poly f;
    FieldElement a;
    FieldElement b;
    FieldElement c;
};

inline QuarticChar3FamilyInstance quartic3_build(const FieldElement& a, const FieldElement& b,
                                                 const FieldElement& c) {
    const TowerPtr& tw = a.tower();
    const u32 lvl = a.level();
    if (tw->characteristic() != 3)
        throw WrongResidueClassError("resolvent quartic family requires characteristic 3");
    if (b.is_zero() || c.is_zero())
        throw ZeroParameterError("resolvent quartic family: parameters b, c must be nonzero");
    const FieldElement b3 = b * b * b;
    Poly shift(tw, lvl, {a, FieldElement::one(tw, lvl)});
    Poly f = Poly::constant(b3) * shift * shift * shift * shift + Poly::constant(c) * shift -
             Poly::constant(a);
    return QuarticChar3FamilyInstance{std::move(f), a, b, c};
}

// x^3 + beta x - c^2 over beta's level (c is embedded to match).
inline Poly quartic3_resolvent(const QuarticChar3FamilyInstance& inst, const FieldElement& beta) {
    const TowerPtr& ut = beta.tower();
    const u32 ul = beta.level();
    const FieldElement c = embed(inst.c, ut, ul);
    return Poly(ut, ul, {-(c * c), beta, FieldElement::zero(ut, ul), FieldElement::one(ut, ul)});
}

// Walks levels 0..depth, deciding each through the resolvent root pattern.
// beta_n = beta_{n+1}^4 + c beta_{n+1} keeps a nonzero beta_0 = ab nonzero
// down the whole chain, so the resolvent can only degenerate at level 0
// (a = 0), where y^4 + c y - 0 = y (y^3 + c) is reducible outright.
inline StabilityReport quartic3_certify(const QuarticChar3FamilyInstance& inst, u32 depth) {
    StabilityReport rep;
    rep.poly = poly_to_text(inst.f);
    rep.field = descriptor_text(*inst.f.tower());
    rep.degree = 4;
    rep.depth = depth;
    rep.budget = depth;
    rep.method = CertifyMethod::TheoremDriven;
    rep.steps.assign(depth + 1, StepRecord{});

    ChainTrace chain(inst.f);
    FieldElement beta = inst.a * inst.b;
    for (u32 n = 0; n <= depth; ++n) {
        rep.steps[n].rule = "family-resolvent";
        if (beta.is_zero()) {
            rep.steps[n].verdict = StepVerdict::Reducible;
            rep.first_reducible = n;
            break;
        }
        Poly res = quartic3_resolvent(inst, beta);
        std::vector<FieldElement> roots = roots_in_field(res);
        const bool irreducible = roots.size() == 1 && !is_square(roots[0]);
        if (!irreducible) {
            rep.steps[n].verdict = StepVerdict::Reducible;
            rep.first_reducible = n;
            break;
        }
        rep.steps[n].verdict = StepVerdict::Irreducible;
        if (n < depth) {
            chain.adopt_irreducible_frontier(chain.shifted(n));
            const FieldElement& al = chain.alpha(n + 1);
            beta = embed(inst.b, al.tower(), al.level()) *
                   (al + embed(inst.a, al.tower(), al.level()));
        }
    }
    rep.step_degrees = chain.step_degrees();
    rep.stable_to_depth = !rep.first_reducible.has_value();
    return rep;
}

}  // namespace polystab
