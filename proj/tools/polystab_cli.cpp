// Batch front end for the stability library. Four subcommands:
//
//   certify    one polynomial, per-level verdicts as a JSON document
//              exit 0 = stable to depth, 2 = reducibility found,
//              3 = depth budget exhausted, 1 = any other error
//   census     sweep all degree-d polynomials (or family instances) over F_q,
//              CSV rows plus a summary against the counting bounds
//   classify   closed-form factorization-pattern rules, optional oracle check
//   conjecture three-way agreement table (theorem / generic / iterate oracle)
//              for x^3 + x^2 + 1 over F_2
//
// Polynomials are entered as c0,c1,...,cd (ascending degree). Extension-field
// coefficients accept either a canonical index or the nested form [a,b,...]
// over the next field down, matching the library's own printing.

#include "polystab/polystab.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

using namespace polystab;
using nlohmann::json;

namespace {

struct FieldHandle {
    TowerPtr tw;
    u32 lvl = 0;
    u64 q = 0;
};

// q must be a prime power p^k; the field is the prime tower for k = 1 and a
// single extension by the first irreducible degree-k modulus otherwise
FieldHandle field_for_q(u64 q) {
    if (q < 2) throw ParseError("field size must be at least 2", 0);
    u64 p = q;
    for (u64 f = 2; f * f <= q; ++f)
        if (q % f == 0) {
            p = f;
            break;
        }
    u32 k = 0;
    for (u64 r = q; r > 1; r /= p) {
        if (r % p != 0) throw ParseError("field size must be a prime power", 0);
        ++k;
    }
    FieldHandle h;
    h.q = q;
    h.tw = make_tower(p);
    h.lvl = 0;
    if (k > 1) {
        h.tw = extend(h.tw, find_irreducible(h.tw, 0, k));
        h.lvl = 1;
    }
    return h;
}

u64 env_u64(const char* name, u64 fallback) {
    const char* v = std::getenv(name);
    if (!v || !*v) return fallback;
    return std::strtoull(v, nullptr, 10);
}

std::string pattern_text(const FactorPattern& pat) {
    std::string s = "{";
    for (std::size_t i = 0; i < pat.size(); ++i) {
        if (i) s += ",";
        s += "(" + std::to_string(pat[i].first) + "," + std::to_string(pat[i].second) + ")";
    }
    return s + "}";
}

json report_to_json(const StabilityReport& rep) {
    json j;
    j["poly"] = rep.poly;
    j["field"] = rep.field;
    j["degree"] = rep.degree;
    j["depth"] = rep.depth;
    j["budget"] = rep.budget;
    j["method"] = to_string(rep.method);
    j["verdicts"] = rep.verdict_string();
    if (rep.first_reducible)
        j["first_reducible"] = *rep.first_reducible;
    else
        j["first_reducible"] = nullptr;
    j["certificate"] = rep.certificate;
    j["stable_to_depth"] = rep.stable_to_depth;
    json steps = json::array();
    for (std::size_t n = 0; n < rep.steps.size(); ++n) {
        json s;
        s["level"] = n;
        s["verdict"] = std::string(1, verdict_letter(rep.steps[n].verdict));
        s["rule"] = rep.steps[n].rule;
        steps.push_back(std::move(s));
    }
    j["steps"] = std::move(steps);
    return j;
}

// runs fn(i) for i in [0, count) on a small pool; results land by index, so
// output order never depends on scheduling
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    unsigned hw = std::thread::hardware_concurrency();
    std::size_t workers = std::min<std::size_t>(count, hw ? hw : 1);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// certify

int run_certify(u64 q, const std::string& poly_text, std::optional<u32> degree_flag, u32 depth,
                bool depth_given, const std::string& method_name, u32 budget) {
    FieldHandle fh = field_for_q(q);
    Poly f = parse_poly(fh.tw, fh.lvl, poly_text);
    if (f.degree() < 2 || f.degree() > 4)
        throw DegreeUnsupportedError("degree must be 2, 3 or 4, got " +
                                     std::to_string(f.degree()));
    const u32 d = static_cast<u32>(f.degree());
    if (degree_flag && *degree_flag != d)
        throw ParseError("--degree disagrees with the parsed polynomial", 0);
    if (!depth_given) depth = default_depth_budget(d);
    CertifyMethod method;
    if (method_name == "theorem")
        method = CertifyMethod::TheoremDriven;
    else if (method_name == "generic")
        method = CertifyMethod::Generic;
    else
        throw ParseError("--method must be 'theorem' or 'generic'", 0);

    ExperimentManifest man;
    man.command = "certify";
    man.depth_budget = budget ? budget : default_depth_budget(d);
    man.set("q", q);
    man.set("poly", poly_text);
    man.set("degree", u64(d));
    man.set("depth", u64(depth));
    man.set("method", method_name);

    StabilityReport rep = certify_stability(f, d, depth, method, budget);
    json doc;
    doc["manifest"] = man.to_json();
    doc["report"] = report_to_json(rep);
    std::cout << doc.dump(2) << "\n";
    return rep.stable_to_depth ? 0 : 2;
}

// ---------------------------------------------------------------------------
// census

struct CensusRow {
    std::string line;
    bool stable = false;
    bool family = false;
};

void census_summary_degree2(std::ostream& os, u64 q, u64 total, u64 stable, u64 family_stable) {
    os << "# summary total=" << total << " stable=" << stable << "\n";
    os << "# summary family_stable=" << family_stable << "\n";
    os << "# summary bound_half_qsq_minus_1=" << (q * q - 1) / 2 << "\n";
    os << "# summary bound_quarter_qm1_sq=" << (q - 1) * (q - 1) / 4 << "\n";
}

int run_census(u64 q, u32 degree, u32 depth, bool depth_given, const std::string& out_path,
               bool family_only) {
    u64 cap;
    switch (degree) {
        case 2: cap = 27; break;
        case 3: cap = 9; break;
        case 4: cap = 5; break;
        default: throw DegreeUnsupportedError("census supports degrees 2, 3, 4");
    }
    cap = env_u64("POLYSTAB_SIZE_CAP", cap);
    if (q > cap)
        throw SizeCapExceededError("census over F_" + std::to_string(q) + " exceeds the cap " +
                                   std::to_string(cap) +
                                   " for this degree (override: POLYSTAB_SIZE_CAP)");
    if (!depth_given) depth = default_depth_budget(degree);
    const u64 depth_cap = env_u64("POLYSTAB_DEPTH_CAP", 12);
    if (depth > depth_cap)
        throw DepthBudgetExceededError("census depth " + std::to_string(depth) +
                                       " exceeds the cap (override: POLYSTAB_DEPTH_CAP)");

    ExperimentManifest man;
    man.command = "census";
    man.depth_budget = depth;
    man.set("q", q);
    man.set("degree", u64(degree));
    man.set("depth", u64(depth));
    man.set("family_only", family_only ? "true" : "false");

    // parameter tuples in canonical order; each task certifies independently
    // (fields are rebuilt per task: tower scratch state is not shared across
    // threads)
    std::vector<std::vector<u64>> tuples;
    const FieldHandle probe = field_for_q(q);
    const u64 p = probe.tw->characteristic();
    if (!family_only) {
        // all degree-d polynomials: indices (c0, ..., c_{d-1}) free, lead nonzero
        u64 lower = 1;
        for (u32 i = 0; i < degree; ++i) lower *= q;
        for (u64 lead = 1; lead < q; ++lead)
            for (u64 rest = 0; rest < lower; ++rest) {
                std::vector<u64> t(degree + 1);
                u64 r = rest;
                for (u32 i = 0; i < degree; ++i) {
                    t[i] = r % q;
                    r /= q;
                }
                t[degree] = lead;
                tuples.push_back(std::move(t));
            }
    } else if (degree == 2) {
        if (p == 2) throw EvenCharacteristicError();
        for (u64 b = 1; b < q; ++b)
            for (u64 d0 = 1; d0 < q; ++d0) tuples.push_back({b, d0});
    } else if (degree == 3) {
        if (p != 2)
            throw WrongResidueClassError("the constructive cubic family lives in char 2");
        for (u64 a = 1; a < q; ++a)
            for (u64 b = 1; b < q; ++b) tuples.push_back({a, b});
    } else {
        if (p == 3) {
            for (u64 a = 0; a < q; ++a)
                for (u64 b = 1; b < q; ++b)
                    for (u64 c = 1; c < q; ++c) tuples.push_back({a, b, c});
        } else if (q % 4 == 1) {
            for (u64 a = 1; a < q; ++a)
                for (u64 b = 1; b < q; ++b) tuples.push_back({a, b});
        } else {
            throw WrongResidueClassError(
                "the quartic families need q = 1 (mod 4) or characteristic 3");
        }
    }

    std::vector<CensusRow> rows(tuples.size());
    std::atomic<u64> skipped{0};
    parallel_for(tuples.size(), [&](std::size_t i) {
        FieldHandle fh = field_for_q(q);
        const std::vector<u64>& t = tuples[i];
        auto el = [&](u64 idx) { return FieldElement::from_index(fh.tw, fh.lvl, BigInt(idx)); };
        Poly f(fh.tw, fh.lvl, {});
        std::string params;
        if (!family_only) {
            std::vector<FieldElement> cs;
            for (u64 idx : t) cs.push_back(el(idx));
            f = Poly(fh.tw, fh.lvl, std::move(cs));
        } else {
            try {
                if (degree == 2) {
                    FieldElement delta = el(t[1]);
                    if (is_square(delta)) return;  // family needs a non-square
                    f = quad_build(el(t[0]), delta).f;
                } else if (degree == 3) {
                    f = cubic2_build(el(t[0]), el(t[1])).f;
                } else if (t.size() == 3) {
                    auto inst = quartic3_build(el(t[0]), el(t[1]), el(t[2]));
                    StabilityReport rep = quartic3_certify(inst, depth);
                    std::string line;
                    for (u64 idx : t) line += std::to_string(idx) + ",";
                    rows[i].line = line + poly_to_text(inst.f) + "," +
                                   (rep.stable_to_depth ? "stable" : "reducible") + "," +
                                   (rep.first_reducible ? std::to_string(*rep.first_reducible)
                                                        : std::string("-")) +
                                   ",family-resolvent," + rep.verdict_string();
                    rows[i].stable = rep.stable_to_depth;
                    rows[i].family = true;
                    return;
                } else {
                    f = quartic_build(el(t[0]), el(t[1])).f;
                }
            } catch (const HypothesisViolatedError&) {
                skipped.fetch_add(1);
                return;
            }
        }
        StabilityReport rep = certify_stability(f, degree, depth, CertifyMethod::TheoremDriven,
                                                depth);
        std::string line;
        if (family_only)
            for (u64 idx : t) line += std::to_string(idx) + ",";
        line += poly_to_text(f);
        line += ",";
        line += rep.stable_to_depth ? "stable" : "reducible";
        line += ",";
        line += rep.first_reducible ? std::to_string(*rep.first_reducible) : std::string("-");
        line += ",";
        line += rep.certificate.empty() ? "-" : rep.certificate.substr(0, rep.certificate.find(':'));
        line += ",";
        line += rep.verdict_string();
        rows[i].line = std::move(line);
        rows[i].stable = rep.stable_to_depth;
        rows[i].family = !rep.certificate.empty();
    });

    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw Error("cannot open output file " + out_path);
        os = &file;
    }
    *os << man.csv_comment_rows();
    if (family_only)
        *os << "params...,poly,verdict,first_reducible,certificate,verdicts\n";
    else
        *os << "poly,verdict,first_reducible,certificate,verdicts\n";
    u64 total = 0, stable = 0, family_stable = 0;
    for (const auto& r : rows) {
        if (r.line.empty()) continue;
        *os << r.line << "\n";
        ++total;
        if (r.stable) ++stable;
        if (r.stable && r.family) ++family_stable;
    }
    if (degree == 2)
        census_summary_degree2(*os, q, total, stable, family_stable);
    else
        *os << "# summary total=" << total << " stable=" << stable
            << " hypothesis_skipped=" << skipped.load() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// classify

int run_classify(u64 q, const std::string& kind, const std::vector<std::string>& coeffs,
                 bool check) {
    FieldHandle fh = field_for_q(q);
    ExperimentManifest man;
    man.command = "classify";
    man.set("q", q);
    man.set("kind", kind);
    for (std::size_t i = 0; i < coeffs.size(); ++i)
        man.set("c" + std::to_string(i), coeffs[i]);

    json doc;
    doc["manifest"] = man.to_json();
    json& out = doc["result"];
    auto el = [&](const std::string& s) { return parse_element(fh.tw, fh.lvl, s); };

    FactorPattern pat;         // classifier's answer as a pattern
    Poly oracle_poly(fh.tw, fh.lvl, {});  // what to factor for --check
    if (kind == "cubic2") {
        if (coeffs.size() != 2) throw ParseError("cubic2 takes coefficients a b", 0);
        FieldElement a = el(coeffs[0]), b = el(coeffs[1]);
        const FieldElement zero = FieldElement::zero(fh.tw, fh.lvl);
        const FieldElement one = FieldElement::one(fh.tw, fh.lvl);
        oracle_poly = Poly(fh.tw, fh.lvl, {b, a, zero, one});
        if (b.is_zero()) {
            pat = factor_pattern(oracle_poly);  // x divides: outside the rule
            out["fallback"] = true;
            out["verdict"] = pattern_text(pat);
        } else {
            pat = cubic_trinomial_pattern(a, b);
            out["verdict"] = pat.size() == 1 ? "irreducible"
                             : pat.size() == 2 ? "one-linear-one-quadratic"
                                               : "splits-into-linears";
        }
    } else if (kind == "quartic3") {
        if (coeffs.size() != 2) throw ParseError("quartic3 takes coefficients c d", 0);
        FieldElement c = el(coeffs[0]), d = el(coeffs[1]);
        const FieldElement zero = FieldElement::zero(fh.tw, fh.lvl);
        const FieldElement one = FieldElement::one(fh.tw, fh.lvl);
        oracle_poly = Poly(fh.tw, fh.lvl, {d, c, zero, zero, one});
        if (c.is_zero()) {
            pat = factor_pattern(oracle_poly);
            out["fallback"] = true;
            out["verdict"] = pattern_text(pat);
        } else {
            QuarticChar3Verdict v = quartic_char3_classify(c, d);
            pat = v.pattern;
            out["verdict"] = to_string(v.kind);
            json roots = json::array();
            for (const auto& r : v.resolvent_roots) roots.push_back(element_to_text(r));
            out["resolvent_roots"] = std::move(roots);
            if (v.split_witness) out["split_witness"] = element_to_text(*v.split_witness);
            out["expansion_checked"] = v.expansion_checked;
        }
    } else if (kind == "binomial4") {
        if (coeffs.size() != 1) throw ParseError("binomial4 takes one coefficient a", 0);
        FieldElement a = el(coeffs[0]);
        if (a.is_zero()) throw ZeroParameterError("binomial4 needs a != 0");
        const FieldElement zero = FieldElement::zero(fh.tw, fh.lvl);
        const FieldElement one = FieldElement::one(fh.tw, fh.lvl);
        oracle_poly = Poly(fh.tw, fh.lvl, {zero - a, zero, zero, zero, one});
        const bool irr = quartic_binomial_irreducible(a);
        out["verdict"] = irr ? "irreducible" : "reducible";
        pat = irr ? FactorPattern{{4, 1}} : FactorPattern{};  // pattern only used if irr
        if (check) {
            pat = factor_pattern(oracle_poly);
            out["oracle_pattern"] = pattern_text(pat);
            const bool oracle_irr = pat.size() == 1 && pat[0] == std::pair<u32, u32>{4u, 1u};
            out["agree"] = oracle_irr == irr;
            std::cout << doc.dump(2) << "\n";
            return oracle_irr == irr ? 0 : 1;
        }
        std::cout << doc.dump(2) << "\n";
        return 0;
    } else if (kind == "parity") {
        std::string text;
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            if (i) text += ",";
            text += coeffs[i];
        }
        Poly f = parse_poly(fh.tw, fh.lvl, text);
        const bool consistent = parity_check(f);
        out["consistent"] = consistent;
        out["discriminant_square"] = is_square(discriminant(f));
        std::cout << doc.dump(2) << "\n";
        return consistent ? 0 : 1;
    } else {
        throw ParseError("--kind must be cubic2, quartic3, binomial4 or parity", 0);
    }

    out["pattern"] = pattern_text(pat);
    if (check) {
        FactorPattern oracle = factor_pattern(oracle_poly);
        out["oracle_pattern"] = pattern_text(oracle);
        out["agree"] = oracle == pat;
        std::cout << doc.dump(2) << "\n";
        return oracle == pat ? 0 : 1;
    }
    std::cout << doc.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// conjecture

int run_conjecture(u32 depth, u32 generic_cap, u32 oracle_cap) {
    FieldHandle fh = field_for_q(2);
    Poly f = parse_poly(fh.tw, 0, "1,0,1,1");  // x^3 + x^2 + 1
    StabilityReport theorem = certify_stability(f, 3, depth, CertifyMethod::TheoremDriven, depth);
    const u32 gdepth = std::min(depth, generic_cap);
    StabilityReport generic = certify_stability(f, 3, gdepth, CertifyMethod::Generic, gdepth);

    std::cout << "three-way check: x^3+x^2+1 over F_2, levels 0.." << depth << "\n";
    std::cout << "level  theorem      generic      iterate-oracle\n";
    bool all_agree = true;
    for (u32 n = 0; n <= depth; ++n) {
        auto cell = [](StepVerdict v) -> std::string {
            switch (v) {
                case StepVerdict::Irreducible: return "irreducible";
                case StepVerdict::Reducible: return "reducible";
                case StepVerdict::CoveredByCertificate: return "certified";
                default: return "untested";
            }
        };
        std::string tcell = cell(theorem.steps[n].verdict);
        std::string gcell = n <= gdepth ? cell(generic.steps[n].verdict) : "untested";
        // level n corresponds to the (n+1)-fold composite of degree 3^(n+1)
        std::string ocell = "untested";
        if (n + 1 <= oracle_cap)
            ocell = direct_iterate_oracle(f, n + 1) ? "irreducible" : "reducible";
        char buf[80];
        std::snprintf(buf, sizeof(buf), "%5u  %-11s  %-11s  %s", n, tcell.c_str(), gcell.c_str(),
                      ocell.c_str());
        std::cout << buf << "\n";
        auto tested = [](const std::string& s) { return s != "untested" && s != "certified"; };
        if (tested(gcell) && gcell != tcell) all_agree = false;
        if (tested(ocell) && ocell != tcell) all_agree = false;
    }
    std::cout << (all_agree ? "agreement: yes" : "agreement: NO") << "\n";
    std::cout << "certificate: " << (theorem.certificate.empty() ? "-" : theorem.certificate)
              << "\n";
    return all_agree && theorem.stable_to_depth ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stability certification over finite-field extension towers"};
    app.require_subcommand(1);

    u64 q = 2;
    std::string poly_text, method_name = "theorem", out_path, kind;
    std::vector<std::string> coeffs;
    u32 depth = 0, budget = 0, degree = 0, generic_cap = 6, oracle_cap = 5;
    bool check = false, family_only = false;

    CLI::App* c_certify = app.add_subcommand("certify", "certify one polynomial level by level");
    c_certify->add_option("--q", q, "field size (prime power)")->required();
    c_certify->add_option("--poly", poly_text, "coefficients c0,c1,... ascending")->required();
    c_certify->add_option("--degree", degree, "expected degree (validated)");
    CLI::Option* certify_depth = c_certify->add_option("--depth", depth, "highest level to test");
    c_certify->add_option("--method", method_name, "theorem | generic")
        ->default_str("theorem");
    c_certify->add_option("--budget", budget, "computation ceiling on levels");

    CLI::App* c_census = app.add_subcommand("census", "sweep all polynomials of a degree");
    c_census->add_option("--q", q, "field size (prime power)")->required();
    c_census->add_option("--degree", degree, "polynomial degree (2, 3 or 4)")->required();
    CLI::Option* census_depth = c_census->add_option("--depth", depth, "certification depth");
    c_census->add_option("--out", out_path, "CSV output path (default: stdout)");
    c_census->add_flag("--family", family_only, "sweep family instances instead");

    CLI::App* c_classify = app.add_subcommand("classify", "closed-form factorization patterns");
    c_classify->add_option("--q", q, "field size (prime power)")->required();
    c_classify->add_option("--kind", kind, "cubic2 | quartic3 | binomial4 | parity")->required();
    c_classify->add_option("coefficients", coeffs, "rule-specific coefficients")->required();
    c_classify->add_flag("--check", check, "also run the factorization oracle");

    CLI::App* c_conj = app.add_subcommand("conjecture",
                                          "three-way agreement for x^3+x^2+1 over F_2");
    c_conj->add_option("--depth", depth, "highest level for the theorem path")->default_val(6);
    c_conj->add_option("--generic-cap", generic_cap, "highest level for the generic path");
    c_conj->add_option("--oracle-cap", oracle_cap,
                       "highest iterate order for the compose-and-test oracle");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_certify->parsed())
            return run_certify(q, poly_text,
                               degree ? std::optional<u32>(degree) : std::nullopt, depth,
                               !certify_depth->empty(), method_name, budget);
        if (c_census->parsed())
            return run_census(q, degree, depth, !census_depth->empty(), out_path, family_only);
        if (c_classify->parsed()) return run_classify(q, kind, coeffs, check);
        if (c_conj->parsed()) return run_conjecture(depth, generic_cap, oracle_cap);
    } catch (const DepthBudgetExceededError& e) {
        std::cerr << "budget: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
