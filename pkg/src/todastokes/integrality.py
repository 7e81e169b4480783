"""Exact decision procedures for Z- and Q-structures.

Three criteria are implemented:

* the base criterion, P_a(T) = prod (T - exp(2 pi i a_j)) in Z[T];
* the gamma criterion for pull-backs, which asks for gamma with gamma^m in Q
  and prod (T - gamma exp(2 pi i c_j)) in Q[T];
* two closed-form specializations (r an odd prime, r = 2) that serve as
  independent oracles for the gamma criterion.

The gamma criterion is decided by a gcd/Bezout reduction.  Write e_k for the
elementary symmetric functions of the roots.  The polynomial has
coefficients (-1)^k gamma^k e_k, so the constraints are gamma^k e_k in Q* for
every k with e_k != 0, together with gamma^m in Q*.  If g is the gcd of the
constrained exponents and sum n_k k = g, then gamma^g lies in Q* theta^-1 with
theta = prod c_k^n_k, and a solution exists iff theta^(-k/g) c_k is rational
for every constraint (k, c_k).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .cyclotomic import (CycNumber, CycPolynomial, char_poly_from_phases,
                         elementary_symmetric, format_poly, phase_modulus,
                         poly_rationality)
from .weights import WeightTuple

__all__ = [
    "GammaWitness", "IntegralityVerdict", "z_structure_base", "gamma_decision",
    "pullback_check", "prime_oracle", "r2_exceptional", "R2_FAMILIES",
]


@dataclass(frozen=True)
class GammaWitness:
    """Outcome of the gamma criterion.

    When ``exists`` is true, gamma^g = scale_q / theta and gamma^m equals
    ``radicand`` exactly; gamma itself is |radicand|^(1/m) exp(2 pi i phase).
    ``rational_poly`` uses that gamma, ``unit_poly`` uses gamma^g = 1/theta.
    """

    exists: bool
    g: int
    m: int
    theta: CycNumber | None
    scale_q: Fraction = Fraction(1)
    radicand: Fraction | None = None
    phase: Fraction | None = None
    rational_poly: tuple[Fraction, ...] | None = None
    unit_poly: tuple[Fraction, ...] | None = None
    constraints: tuple[int, ...] = ()

    @property
    def gamma(self) -> complex | None:
        if not self.exists:
            return None
        return abs(float(self.radicand)) ** (1.0 / self.m) * cmath.exp(2j * math.pi * float(self.phase))

    @property
    def integral(self) -> bool:
        return self.exists and all(c.denominator == 1 for c in self.rational_poly)

    def describe(self) -> str:
        if not self.exists:
            return "no gamma"
        return f"gamma^{self.m} = {self.radicand}, arg gamma = 2pi*{self.phase}"


@dataclass(frozen=True)
class IntegralityVerdict:
    q_structure: bool
    z_structure: bool
    criterion_used: str  # base | gamma | prime_half_integer | r2_exceptional
    certificate: object = None
    detail: str = ""

    def __post_init__(self):
        if self.z_structure and not self.q_structure:
            raise ValueError("a Z-structure without a Q-structure is inconsistent")


# BASE CRITERION =======================================================================

def z_structure_base(w: WeightTuple) -> IntegralityVerdict:
    poly = char_poly_from_phases(w.a)
    verdict = poly_rationality(poly)
    q = verdict.rational is not None
    z = verdict.integral and q and verdict.rational[0] in (1, -1)
    # the roots are algebraic integers, so rational forces integral
    if q != z:
        raise AssertionError(f"rational but not integral characteristic polynomial for {w}")
    return IntegralityVerdict(q, z, "base", certificate=verdict.rational or poly,
                              detail=format_poly(verdict.rational) if q else str(poly))


# GAMMA CRITERION ======================================================================

def _bezout(values: Sequence[int]) -> tuple[int, list[int]]:
    g, coeffs = 0, [0] * len(values)
    for idx, v in enumerate(values):
        # extended Euclid on (g, v)
        old_r, r_ = g, v
        old_s, s = 1, 0
        old_t, t = 0, 1
        while r_:
            q = old_r // r_
            old_r, r_ = r_, old_r - q * r_
            old_s, s = s, old_s - q * s
            old_t, t = t, old_t - q * t
        coeffs = [c * old_s for c in coeffs]
        coeffs[idx] = old_t
        g = old_r
    if g < 0:
        g, coeffs = -g, [-c for c in coeffs]
    return g, coeffs


def _min_scale(radicand: Fraction, power: int) -> int:
    """Smallest q >= 1 with q^power * radicand an integer."""
    den = radicand.denominator
    q, p = 1, 2
    while den > 1:
        if p * p > den:
            p = den
        e = 0
        while den % p == 0:
            den //= p
            e += 1
        if e:
            q *= p ** (-(-e // power))
        p += 1
    return q


def gamma_decision(phases: Sequence, m: int) -> GammaWitness:
    """Decide whether some gamma with gamma^m in Q makes prod (T - gamma z_j) rational."""
    phases = [Fraction(c) for c in phases]
    if m < 1:
        raise ValueError("m must be positive")
    n = phase_modulus(phases)
    e = elementary_symmetric(phases, n)
    r = len(phases)
    # the gamma^m constraint goes first so that Bezout ties resolve onto the e_k
    constraints = [(m, CycNumber.rational(1, n))] + [(k, e[k]) for k in range(1, r + 1) if e[k]]
    exps = [k for k, _ in constraints]
    g, bez = _bezout(exps)
    theta = CycNumber.rational(1, n)
    for (k, c), nk in zip(constraints, bez):
        if nk:
            theta = theta * c ** nk
    inv_theta = theta.inverse()
    scaled = []
    for k, c in constraints:
        v = (inv_theta ** (k // g) * c).to_rational()
        if v is None:
            return GammaWitness(False, g, m, theta, constraints=tuple(exps))
        scaled.append(v)
    base_rad = scaled[0]  # theta^(-m/g), rational and nonzero
    coeff_scaled = {k: v for (k, _), v in zip(constraints[1:], scaled[1:])}
    q = _min_scale(base_rad, m // g)
    radicand = Fraction(q) ** (m // g) * base_rad

    def poly_for(scale: Fraction) -> tuple[Fraction, ...]:
        coeffs = [Fraction(0)] * (r + 1)
        coeffs[r] = Fraction(1)
        for k in range(1, r + 1):
            if e[k]:
                coeffs[r - k] = (-1) ** k * scale ** (k // g) * coeff_scaled[k]
        return tuple(coeffs)

    # pick the g-th root of q/theta whose m-th power is the rational radicand
    z = complex(q * inv_theta)
    root = abs(z) ** (1.0 / g) * cmath.exp(1j * cmath.phase(z) / g)
    turns = cmath.phase(root) / (2 * math.pi)
    phase = Fraction(round(turns * 2 * m), 2 * m) % 1
    return GammaWitness(
        True, g, m, theta, scale_q=Fraction(q), radicand=radicand, phase=phase,
        rational_poly=poly_for(Fraction(q)), unit_poly=poly_for(Fraction(1)),
        constraints=tuple(exps),
    )


def pullback_check(w: WeightTuple, flavor: str = "connection") -> IntegralityVerdict:
    """Gamma criterion with phases a_i (connection) or a_i/m (harmonic)."""
    if flavor == "connection":
        phases = list(w.a)
    elif flavor == "harmonic":
        phases = [x / w.m for x in w.a]
    else:
        raise ValueError(f"unknown flavor {flavor!r}")
    wit = gamma_decision(phases, w.m)
    detail = format_poly(wit.rational_poly) if wit.exists else "no gamma"
    return IntegralityVerdict(wit.exists, wit.exists, "gamma", certificate=wit, detail=detail)


# ORACLES ==============================================================================

def _is_odd_prime(r: int) -> bool:
    return r > 2 and all(r % p for p in range(2, math.isqrt(r) + 1))


def prime_oracle(w: WeightTuple) -> IntegralityVerdict:
    """Half-integer shift search for r an odd prime: shifts k/(2r), k = 0..2r-1."""
    if not _is_odd_prime(w.r):
        raise ValueError(f"prime_oracle needs r an odd prime, got r={w.r}")
    for k in range(2 * w.r):
        shift = Fraction(k, 2 * w.r)
        poly = char_poly_from_phases([x + shift for x in w.a])
        verdict = poly_rationality(poly)
        if verdict.rational is not None:
            return IntegralityVerdict(True, True, "prime_half_integer",
                                      certificate=(Fraction(k, 2), verdict.rational),
                                      detail=f"l = {Fraction(k, 2)}: {format_poly(verdict.rational)}")
    return IntegralityVerdict(False, False, "prime_half_integer", detail="no shift works")


R2_FAMILIES = {
    "sqrt2": (Fraction(-1, 8), Fraction(-7, 8)),
    "sqrt3a": (Fraction(-1, 12), Fraction(-11, 12)),
    "sqrt3b": (Fraction(-5, 12), Fraction(-7, 12)),
}


def _mod1(xs) -> list[Fraction]:
    return sorted(Fraction(x) % 1 for x in xs)


def r2_exceptional(w: WeightTuple) -> IntegralityVerdict:
    """Rank-two table: n/4 shifts or one of the exceptional families."""
    if w.r != 2:
        raise ValueError(f"r2_exceptional needs r = 2, got r={w.r}")
    for n in range(4):
        poly = char_poly_from_phases([x + Fraction(n, 4) for x in w.a])
        verdict = poly_rationality(poly)
        if verdict.rational is not None:
            return IntegralityVerdict(True, True, "r2_exceptional", certificate=("shift", n),
                                      detail=f"n = {n}: {format_poly(verdict.rational)}")
    target = _mod1(w.a)
    for name, fam in R2_FAMILIES.items():
        for n in range(4):
            if _mod1(x + Fraction(n, 4) for x in fam) == target:
                return IntegralityVerdict(True, True, "r2_exceptional", certificate=(name, n),
                                          detail=f"family {name}, n = {n}")
    return IntegralityVerdict(False, False, "r2_exceptional", detail="no branch applies")
