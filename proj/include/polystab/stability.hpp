#pragma once

// The stability engine. For f of degree d over a finite field, "stable to
// depth D" means the self-compositions f, f(f), f(f(f)), ... stay irreducible
// through D+1 folds. The engine never composes: it climbs a chain of field
// extensions instead. With alpha_0 = 0 and alpha_{n+1} a root of f - alpha_n,
// the (n+1)-fold composition is irreducible exactly when the n-fold one is
// and f - alpha_n stays irreducible over the field generated so far, so one
// ladder of degree-d tests over F_{q^(d^n)} replaces factoring polynomials of
// degree d^(n+1).
//
// Two certification routes cover every level:
//   * generic: the deterministic irreducibility test applied to f - alpha_n,
//   * theorem-driven: closed-form residue/trace/resolvent criteria for the
//     shapes that admit them (see classify.hpp), plus family certificates
//     that settle *all* levels at once when f matches a constructive family.
//
// A direct compose-then-test oracle is kept alongside for desk-scale
// cross-examination of everything the ladder claims.

#include "polystab/classify.hpp"

#include <chrono>

namespace polystab {

// ---------------------------------------------------------------------------
// Chain of critical points: alpha_0 = 0 and f(alpha_{n+1}) = alpha_n, each
// alpha living at the lowest tower level that can hold it. Extensions happen
// only when the frontier polynomial f - alpha_n is actually irreducible (then
// it becomes the next tower modulus); otherwise a root comes from one of its
// factors, chosen by a deterministic policy.

class ChainTrace {
public:
    // which factor supplies the next root when the frontier is reducible
    enum class RootPolicy { LowestDegree, HighestDegree };

    explicit ChainTrace(Poly f, RootPolicy policy = RootPolicy::LowestDegree)
        : f_(std::move(f)), policy_(policy) {
        if (f_.degree() < 2)
            throw DegreeUnsupportedError("chains need a base polynomial of degree >= 2");
        if (f_.level() != f_.tower()->height())
            throw LevelMismatchError("chain base polynomial must live at its tower's top level");
        tower_ = f_.tower();
        alphas_.push_back(FieldElement::zero(tower_, f_.level()));
    }

    const Poly& base_poly() const { return f_; }
    u32 d() const { return static_cast<u32>(f_.degree()); }
    const TowerPtr& tower() const { return tower_; }

    // number of recorded alphas; valid indices are 0 .. size()-1
    u32 size() const { return static_cast<u32>(alphas_.size()); }
    const FieldElement& alpha(u32 n) const { return alphas_.at(n); }

    // f - alpha_n with coefficients lifted to alpha_n's field
    Poly shifted(u32 n) const {
        const FieldElement& al = alphas_.at(n);
        return poly_embed(f_, al.tower(), al.level()) - Poly::constant(al);
    }

    // degree of the extension adopted at step n (1 = root found in place)
    u32 step_degree(u32 n) const { return step_degrees_.at(n); }
    const std::vector<u32>& step_degrees() const { return step_degrees_; }
    bool step_frontier_irreducible(u32 n) const { return frontier_irreducible_.at(n); }

    // One self-testing step: test the frontier, extend accordingly.
    void extend() {
        const Poly fn = shifted(size() - 1);
        if (is_irreducible(fn)) {
            adopt_irreducible_frontier(fn);
            return;
        }
        frontier_irreducible_.push_back(false);
        auto factors = factor_full(fn);
        const Poly* pick = nullptr;
        for (const auto& fm : factors) {
            const Poly& g = fm.first;
            if (d() % static_cast<u32>(g.degree()) != 0) continue;
            if (!pick) {
                pick = &g;
                continue;
            }
            const bool better = policy_ == RootPolicy::LowestDegree
                                    ? g.degree() < pick->degree()
                                    : g.degree() > pick->degree();
            if (better) pick = &g;  // factors are canonically sorted: ties keep the first
        }
        if (!pick)
            throw NoRootInRequiredExtensionError(
                "every factor of the frontier has degree not dividing " + std::to_string(d()) +
                ", so no root lies in the required extension");
        if (pick->degree() == 1) {
            push_alpha(-pick->coeffs()[0], 1);
        } else {
            tower_ = detail::adjoin_root_of(tower_, *pick);
            push_alpha(FieldElement::generator(tower_, tower_->height()),
                       static_cast<u32>(pick->degree()));
        }
    }

    // Step taken on the caller's authority that the frontier is irreducible
    // (the certifier calls this right after its own per-level test).
    void adopt_irreducible_frontier(const Poly& fn) {
        frontier_irreducible_.push_back(true);
        tower_ = detail::adjoin_root_of(tower_, make_monic(fn));
        push_alpha(FieldElement::generator(tower_, tower_->height()), d());
    }

private:
    void push_alpha(FieldElement a, u32 deg) {
        // the defining recurrence, re-checked at every single step
        if (!(eval(f_, a) == embed(alphas_.back(), a.tower(), a.level())))
            throw Error("chain recurrence violated: f(alpha_{n+1}) != alpha_n");
        alphas_.push_back(std::move(a));
        step_degrees_.push_back(deg);
    }

    Poly f_;
    RootPolicy policy_;
    TowerPtr tower_;
    std::vector<FieldElement> alphas_;
    std::vector<u32> step_degrees_;
    std::vector<bool> frontier_irreducible_;
};

// Does the (n+1)-fold composition of the chain's polynomial stay irreducible,
// assuming the n-fold one does? Exactly the frontier test at level n.
inline bool capelli_step(const ChainTrace& chain, u32 n) {
    if (n >= chain.size())
        throw ChainTooShortError("level " + std::to_string(n) + " needs alpha_" +
                                 std::to_string(n) + "; the chain has " +
                                 std::to_string(chain.size()) + " entries");
    return is_irreducible(chain.shifted(n));
}

// Compose-then-test oracle: materializes the n-fold composition (degree d^n,
// capped) and tests it directly. The expensive road the ladder avoids.
inline bool direct_iterate_oracle(const Poly& f, u32 n,
                                  u64 degree_cap = kDefaultIterateDegreeCap) {
    return is_irreducible(iterate(f, n, degree_cap));
}

// ---------------------------------------------------------------------------
// Root-reachability sweep: for every r <= r_max and every a in F_{q^r}, some
// irreducible factor of f - a must have degree dividing d (equivalently, f - a
// has a root in F_{q^(dr)}). Returns the first (r, a) violating it, if any.

struct SrWitness {
    u32 r = 0;
    FieldElement a;
};

struct SrCheckResult {
    bool holds = true;
    std::optional<SrWitness> witness;
};

inline SrCheckResult sr_check(const Poly& f, u32 d, u32 r_max,
                              const BigInt& size_cap = BigInt(1) << 20) {
    if (f.degree() < 1) throw DegreeUnsupportedError("root-reachability needs degree >= 1");
    if (d == 0) throw ZeroParameterError("root-reachability needs d >= 1");
    for (u32 r = 1; r <= r_max; ++r) {
        TowerPtr tw = f.tower();
        u32 lvl = f.level();
        if (r > 1) {
            tw = detail::adjoin_root_of(tw, find_irreducible(tw, lvl, r));
            lvl += 1;
        }
        const BigInt qr = tw->cardinality(lvl);
        if (qr > size_cap)
            throw SizeCapExceededError("enumerating " + qr.str() +
                                       " shifts exceeds the size cap " + size_cap.str());
        const Poly fr = poly_embed(f, tw, lvl);
        for (BigInt ia = 0; ia < qr; ++ia) {
            const FieldElement a = FieldElement::from_index(tw, lvl, ia);
            const FactorPattern pat = factor_pattern(fr - Poly::constant(a));
            bool ok = false;
            for (const auto& dm : pat) ok = ok || (d % dm.first == 0);
            if (!ok) return {false, SrWitness{r, a}};
        }
    }
    return {true, std::nullopt};
}

// ---------------------------------------------------------------------------
// Certification.

enum class CertifyMethod { Generic, TheoremDriven };

inline const char* to_string(CertifyMethod m) {
    return m == CertifyMethod::Generic ? "generic" : "theorem";
}

enum class StepVerdict { Irreducible, Reducible, CoveredByCertificate, Untested };

inline char verdict_letter(StepVerdict v) {
    switch (v) {
        case StepVerdict::Irreducible: return 'I';
        case StepVerdict::Reducible: return 'R';
        case StepVerdict::CoveredByCertificate: return 'C';
        case StepVerdict::Untested: return 'U';
    }
    return '?';
}

struct StepRecord {
    StepVerdict verdict = StepVerdict::Untested;
    std::string rule;  // criterion that decided this level
    double millis = 0.0;
};

struct StabilityReport {
    std::string poly;
    std::string field;  // tower descriptor of the base field
    u32 degree = 0;
    u32 depth = 0;   // requested highest level
    u32 budget = 0;  // computation allowed up to this level
    CertifyMethod method = CertifyMethod::Generic;
    std::vector<StepRecord> steps;  // indexed by level 0..depth
    std::optional<u32> first_reducible;
    std::string certificate;  // family certificate when one applies
    std::vector<u32> step_degrees;
    bool stable_to_depth = false;

    std::string verdict_string() const {
        std::string s;
        for (const auto& st : steps) s += verdict_letter(st.verdict);
        return s;
    }

    // one-line record, stable across reruns (timings live only in `steps`)
    std::string to_line() const {
        std::string s = "poly=" + poly + " field=" + field + " d=" + std::to_string(degree) +
                        " depth=" + std::to_string(depth) +
                        " method=" + to_string(method) + " verdicts=" + verdict_string();
        s += " first_reducible=";
        s += first_reducible ? std::to_string(*first_reducible) : std::string("-");
        s += " certificate=";
        s += certificate.empty() ? std::string("-") : certificate;
        return s;
    }
};

// Depth past which per-level computation refuses to go unless overridden; the
// ground field of level n has q^(d^n) elements, so these are generous.
inline u32 default_depth_budget(u32 d) {
    switch (d) {
        case 2: return 10;
        case 3: return 6;
        default: return 5;
    }
}

namespace detail {

// Dispatch data for the theorem-driven route, precomputed once from f's
// coefficients. Level n then needs only alpha_n.
struct TheoremPlan {
    enum class Kind {
        None,
        QuadraticOdd,        // odd char: discriminant chain delta0 + 4*lead*alpha
        QuadraticChar2,      // char 2: root-count rule on lead, linear, const+alpha
        CubicChar2,          // char 2: depressed trinomial y^3 + Ay + B_n
        QuarticPowerShift,   // q = 1 (4): f = e(x+a)^4 + C, binomial after shift
        QuarticChar3,        // char 3: depressed trinomial z^4 + Cz + D_n
    };

    Kind kind = Kind::None;
    std::string rule = "generic";

    // certificates: either active from level 0, or armed and waiting for the
    // level-0 verdict (the constructive cubic family certifies "irreducible
    // at the root implies stable")
    std::string certificate_immediate;
    std::string certificate_after_level0;

    // per-kind scalars at the base level
    std::optional<FieldElement> s0, s1, s2;
};

inline TheoremPlan make_theorem_plan(const Poly& f) {
    TheoremPlan plan;
    const TowerPtr& tw = f.tower();
    const u32 lvl = f.level();
    const u64 p = tw->characteristic();
    const BigInt q = tw->cardinality(lvl);
    const u32 d = static_cast<u32>(f.degree());
    const FieldElement lead = f.lead();

    if (d == 2) {
        const FieldElement c0 = f.coeff(0), c1 = f.coeff(1);
        if (p != 2) {
            plan.kind = TheoremPlan::Kind::QuadraticOdd;
            plan.rule = "quadratic-discriminant";
            plan.s0 = discriminant(f);
            plan.s1 = lead + lead + lead + lead;  // 4 * lead
            // constructive family: disc = 2*c1 pins constant to the one value
            // making the discriminant chain self-reproducing
            if (*plan.s0 == c1 + c1 && q % 4 == 1 && !is_square(*plan.s0))
                plan.certificate_immediate =
                    "quadratic-family: non-square self-reproducing discriminant with "
                    "q = 1 (mod 4)";
        } else {
            plan.kind = TheoremPlan::Kind::QuadraticChar2;
            plan.rule = "quadratic-root-count";
            plan.s0 = lead;
            plan.s1 = c1;
            plan.s2 = c0;
        }
        return plan;
    }

    if (d == 3 && p == 2) {
        // depress the monic rescaling: y = x + c2/c3 kills the square term
        const FieldElement p2 = f.coeff(2) / lead;
        const FieldElement p1 = f.coeff(1) / lead;
        const FieldElement p0 = f.coeff(0) / lead;
        plan.kind = TheoremPlan::Kind::CubicChar2;
        plan.rule = "cubic-trinomial";
        plan.s0 = p2 * p2 + p1;       // A, constant across all levels
        plan.s1 = p1 * p2 + p0;       // B at level 0
        plan.s2 = inv(lead);          // alpha enters B through 1/lead
        // constructive family lead^(1/2)=b, shift a: matches e(x+a)^3 + x
        const FieldElement b = pow(lead, q / 2);
        if (!f.coeff(2).is_zero()) {
            const FieldElement a = f.coeff(2) / lead;
            if (f.coeff(1) == a * a * lead + FieldElement::one(tw, lvl) &&
                f.coeff(0) == a * a * a * lead) {
                const u32 m = static_cast<u32>(tw->block(lvl));
                const bool tr_one = (m % 2) == 1;
                const bool tr_hyp = !trace(inv(a * b), 0).is_zero();
                if (tr_hyp == tr_one)
                    plan.certificate_after_level0 =
                        "cubic-family: trace hypothesis holds, so irreducibility at the "
                        "root level already certifies every level";
            }
        }
        return plan;
    }

    if (d == 4) {
        // pure power plus constant: f = e(x+a)^4 + C, with a read off the
        // cubic coefficient (q = 1 mod 4 keeps the characteristic odd here)
        if (q % 4 == 1) {
            const FieldElement four = embed(FieldElement::from_prime(tw, 0, 4 % p), tw, lvl);
            const FieldElement e = lead;
            const FieldElement a = f.coeff(3) / (four * e);
            Poly shape = Poly(tw, lvl,
                              {a, FieldElement::one(tw, lvl)});  // (x + a)
            Poly pw = shape * shape;
            pw = pw * pw;  // (x+a)^4
            const FieldElement C = f.coeff(0) - e * pw.coeff(0);
            Poly rebuilt = pw * e + Poly::constant(C);
            if (rebuilt == f) {
                plan.kind = TheoremPlan::Kind::QuarticPowerShift;
                plan.rule = "quartic-binomial";
                plan.s0 = e;
                plan.s1 = C;
                // constructive family: constant locked to -a and lead a cube
                Poly cube_eq(tw, lvl,
                             {-e, FieldElement::zero(tw, lvl), FieldElement::zero(tw, lvl),
                              FieldElement::one(tw, lvl)});
                if (C == -a && !roots_in_field(cube_eq).empty() &&
                    !is_square(a / e) && !a.is_zero())
                    plan.certificate_immediate =
                        "quartic-power-family: non-square shifted constant with "
                        "q = 1 (mod 4) reproduces itself through every level";
                return plan;
            }
        }
        if (p == 3 && f.coeff(2).is_zero()) {
            // monic-rescale, then x -> x - c3 leaves a trinomial z^4 + Cz + D
            const FieldElement p3 = f.coeff(3) / lead;
            const FieldElement p1 = f.coeff(1) / lead;
            const FieldElement p0 = f.coeff(0) / lead;
            const FieldElement t = -p3;
            // F(z+t) with F = z^4 + p3 z^3 + p1 z + p0 (char-3 identities)
            const FieldElement C = p1 - p3 * p3 * p3;
            const FieldElement D = t * t * t * t + p3 * t * t * t + p1 * t + p0;
            if (!C.is_zero()) {
                plan.kind = TheoremPlan::Kind::QuarticChar3;
                plan.rule = "quartic-resolvent";
                plan.s0 = C;
                plan.s1 = D;
                plan.s2 = inv(lead);
            }
            return plan;
        }
    }

    return plan;
}

// The per-level closed-form verdict; alpha is alpha_n at its own level.
inline StepVerdict theorem_step(const TheoremPlan& plan, const FieldElement& alpha) {
    const TowerPtr& tw = alpha.tower();
    const u32 lvl = alpha.level();
    const auto lift = [&](const FieldElement& e) { return embed(e, tw, lvl); };

    switch (plan.kind) {
        case TheoremPlan::Kind::QuadraticOdd: {
            const FieldElement delta = lift(*plan.s0) + lift(*plan.s1) * alpha;
            return is_square(delta) ? StepVerdict::Reducible : StepVerdict::Irreducible;
        }
        case TheoremPlan::Kind::QuadraticChar2: {
            const auto sol = char2_quadratic_solutions(lift(*plan.s0), lift(*plan.s1),
                                                       lift(*plan.s2) - alpha,
                                                       /*want_solutions=*/false);
            return sol.count == 0 ? StepVerdict::Irreducible : StepVerdict::Reducible;
        }
        case TheoremPlan::Kind::CubicChar2: {
            const FieldElement B = lift(*plan.s1) + lift(*plan.s2) * alpha;  // char 2
            if (B.is_zero()) return StepVerdict::Reducible;
            const FactorPattern pat = cubic_trinomial_pattern(lift(*plan.s0), B);
            return pat == FactorPattern{{3, 1}} ? StepVerdict::Irreducible
                                                : StepVerdict::Reducible;
        }
        case TheoremPlan::Kind::QuarticPowerShift: {
            const FieldElement A = (alpha - lift(*plan.s1)) / lift(*plan.s0);
            if (A.is_zero()) return StepVerdict::Reducible;
            return quartic_binomial_irreducible(A) ? StepVerdict::Irreducible
                                                   : StepVerdict::Reducible;
        }
        case TheoremPlan::Kind::QuarticChar3: {
            const FieldElement D = lift(*plan.s1) - lift(*plan.s2) * alpha;
            if (D.is_zero()) return StepVerdict::Reducible;
            const auto v = quartic_char3_classify(lift(*plan.s0), D);
            return v.kind == QuarticChar3Case::Irreducible ? StepVerdict::Irreducible
                                                           : StepVerdict::Reducible;
        }
        case TheoremPlan::Kind::None: break;
    }
    throw Error("theorem step invoked without an applicable rule");
}

}  // namespace detail

// Certify stability of f (declared degree d) through chain level `depth`,
// meaning levels 0..depth each get a verdict. Level n speaks for the
// irreducibility of the (n+1)-fold self-composition. Per-level computation
// stops at the budget; levels beyond it are only reachable under a family
// certificate (otherwise the request throws rather than silently shrinking).
inline StabilityReport certify_stability(const Poly& f, u32 d, u32 depth,
                                         CertifyMethod method, u32 budget_override = 0) {
    if (f.degree() < 2 || f.degree() > 4)
        throw DegreeUnsupportedError("stability certification covers degrees 2..4, got " +
                                     std::to_string(f.degree()));
    if (static_cast<u32>(f.degree()) != d)
        throw DegreeUnsupportedError("declared degree " + std::to_string(d) +
                                     " does not match the polynomial's degree " +
                                     std::to_string(f.degree()));

    StabilityReport rep;
    rep.poly = poly_to_text(f);
    rep.field = descriptor_text(*f.tower());
    rep.degree = d;
    rep.depth = depth;
    rep.budget = budget_override ? budget_override : default_depth_budget(d);
    rep.method = method;

    detail::TheoremPlan plan;
    if (method == CertifyMethod::TheoremDriven) plan = detail::make_theorem_plan(f);
    rep.certificate = plan.certificate_immediate;

    ChainTrace chain(f);
    bool cert_active = !plan.certificate_immediate.empty();

    for (u32 n = 0; n <= depth; ++n) {
        if (n > rep.budget) {
            if (cert_active) {
                rep.steps.push_back({StepVerdict::CoveredByCertificate, "certificate", 0.0});
                continue;
            }
            throw DepthBudgetExceededError(
                "level " + std::to_string(n) + " exceeds the depth budget " +
                std::to_string(rep.budget) + " and no certificate covers the remainder");
        }
        const auto t0 = std::chrono::steady_clock::now();
        StepVerdict v;
        std::string rule;
        const Poly fn = chain.shifted(n);
        if (method == CertifyMethod::Generic ||
            plan.kind == detail::TheoremPlan::Kind::None) {
            v = is_irreducible(fn) ? StepVerdict::Irreducible : StepVerdict::Reducible;
            rule = "generic";
        } else {
            v = detail::theorem_step(plan, chain.alpha(n));
            rule = plan.rule;
        }
        const auto t1 = std::chrono::steady_clock::now();
        rep.steps.push_back(
            {v, rule, std::chrono::duration<double, std::milli>(t1 - t0).count()});

        if (v == StepVerdict::Reducible) {
            if (cert_active)
                throw Error("per-level verdict contradicts an active family certificate");
            rep.first_reducible = n;
            for (u32 k = n + 1; k <= depth; ++k)
                rep.steps.push_back({StepVerdict::Untested, "", 0.0});
            break;
        }
        if (n == 0 && !plan.certificate_after_level0.empty()) {
            cert_active = true;
            rep.certificate = plan.certificate_after_level0;
        }
        if (n < depth && n < rep.budget) chain.adopt_irreducible_frontier(fn);
    }

    rep.step_degrees = chain.step_degrees();
    rep.stable_to_depth = !rep.first_reducible.has_value();
    return rep;
}

}  // namespace polystab
