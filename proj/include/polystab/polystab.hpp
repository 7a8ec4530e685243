#pragma once
// Umbrella header: the whole library in one include.
//
// Layering, bottom to top:
//   common    — shared integer types and the error hierarchy
//   arena     — scratch-buffer reuse for tower arithmetic
//   tower     — extension towers over a prime field
//   element   — field elements: arithmetic, Frobenius, trace/norm, residues
//   poly      — univariate polynomials: gcd, irreducibility, factorization
//   classify  — closed-form factorization-pattern rules for special shapes
//   stability — Capelli chains, per-level certification, iterate oracles
//   families  — constructive stable families and their chain recurrences
//   manifest  — reproducibility records for batch experiments

#include "polystab/classify.hpp"
#include "polystab/common.hpp"
#include "polystab/element.hpp"
#include "polystab/families.hpp"
#include "polystab/manifest.hpp"
#include "polystab/poly.hpp"
#include "polystab/stability.hpp"
#include "polystab/tower.hpp"
