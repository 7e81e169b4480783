"""Exact arithmetic in cyclotomic fields Q(zeta_N).

An element of Q(zeta_N) is stored in the power basis 1, z, ..., z^(phi(N)-1)
after reduction modulo the N-th cyclotomic polynomial.  Coordinates are kept
as integer numerators over a single positive common denominator, which keeps
the representation canonical: two elements with the same modulus are equal
exactly when their stored data agree.  Elements with different moduli are
compared and combined after embedding both into Q(zeta_lcm).

Floating point only appears in ``complex(x)``.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from math import gcd, lcm
from numbers import Rational
from typing import Iterable, Sequence


class ModulusError(ValueError):
    """Raised when a root of unity does not live in the requested field."""


# POLYNOMIAL PLUMBING ==================================================================

def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def _exact_divide(num: list[int], den: Sequence[int]) -> list[int]:
    # long division by a monic integer polynomial, coefficients low to high
    num = list(num)
    dq = len(den) - 1
    out = [0] * (len(num) - dq)
    for k in range(len(out) - 1, -1, -1):
        c = num[k + dq]
        out[k] = c
        if c:
            for i, d in enumerate(den):
                num[k + i] -= c * d
    if any(num[:dq]):
        raise ArithmeticError("inexact polynomial division")
    return out


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Coefficients of Phi_n, lowest degree first.

    Computed by dividing x^n - 1 by Phi_d for every proper divisor d of n.
    """
    if n < 1:
        raise ValueError(f"cyclotomic_polynomial needs n >= 1, got {n}")
    poly = [-1] + [0] * (n - 1) + [1]
    for d in _divisors(n)[:-1]:
        poly = _exact_divide(poly, cyclotomic_polynomial(d))
    return tuple(poly)


def euler_phi(n: int) -> int:
    return len(cyclotomic_polynomial(n)) - 1


class _Field:
    """Reduction tables for Q(zeta_n): reduced coordinates of z^e."""

    __slots__ = ("n", "phi", "powers", "units")

    def __init__(self, n: int):
        self.n = n
        phi_poly = cyclotomic_polynomial(n)
        self.phi = phi = len(phi_poly) - 1
        # z^e for 0 <= e < max(n, 2*phi - 1)
        count = max(n, 2 * phi - 1)
        vec = [1] + [0] * (phi - 1)
        powers = []
        for _ in range(count):
            powers.append(tuple(vec))
            top = vec[-1]
            vec = [0] + vec[:-1]
            if top:
                for i in range(phi):
                    vec[i] -= top * phi_poly[i]
        self.powers = powers
        self.units = [k for k in range(1, n + 1) if gcd(k, n) == 1]


@lru_cache(maxsize=None)
def _field(n: int) -> _Field:
    return _Field(n)


# CYCLOTOMIC NUMBERS ===================================================================

class CycNumber:
    """Element of Q(zeta_N) in canonical reduced power-basis form."""

    __slots__ = ("n", "num", "den")
    __hash__ = None  # mutable-free but compared across moduli; keep out of dicts

    def __init__(self, n: int, num: Sequence[int], den: int = 1):
        # trusted constructor: num already reduced and of length phi(n)
        g = reduce(gcd, num, den)
        if den < 0:
            g = -g
        if g != 1:
            num = [c // g for c in num]
            den //= g
        self.n = n
        self.num = tuple(num)
        self.den = den

    # construction -------------------------------------------------------------------

    @classmethod
    def rational(cls, value, n: int = 1) -> "CycNumber":
        value = Fraction(value)
        phi = _field(n).phi
        return cls(n, [value.numerator] + [0] * (phi - 1), value.denominator)

    @classmethod
    def from_coords(cls, n: int, coords: Sequence) -> "CycNumber":
        fld = _field(n)
        if len(coords) != fld.phi:
            raise ValueError(f"Q(zeta_{n}) has dimension {fld.phi}, got {len(coords)} coordinates")
        fr = [Fraction(c) for c in coords]
        den = reduce(lcm, (c.denominator for c in fr), 1)
        return cls(n, [c.numerator * (den // c.denominator) for c in fr], den)

    @classmethod
    def _from_exponents(cls, n: int, terms: dict[int, int], den: int = 1) -> "CycNumber":
        fld = _field(n)
        acc = [0] * fld.phi
        for e, c in terms.items():
            if c:
                for i, p in enumerate(fld.powers[e % n]):
                    if p:
                        acc[i] += c * p
        return cls(n, acc, den)

    # views --------------------------------------------------------------------------

    @property
    def modulus(self) -> int:
        return self.n

    @property
    def coords(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(c, self.den) for c in self.num)

    def is_zero(self) -> bool:
        return not any(self.num)

    def __bool__(self) -> bool:
        return any(self.num)

    def is_rational(self) -> bool:
        return not any(self.num[1:])

    def to_rational(self) -> Fraction | None:
        """The rational value when all non-constant coordinates vanish, else None."""
        if any(self.num[1:]):
            return None
        return Fraction(self.num[0], self.den)

    def __complex__(self) -> complex:
        z = cmath.exp(2j * cmath.pi / self.n)
        acc = 0j
        for c in reversed(self.num):
            acc = acc * z + c
        return acc / self.den

    # embeddings and automorphisms ---------------------------------------------------

    def embed(self, n: int) -> "CycNumber":
        """Same value viewed in Q(zeta_n); requires self.modulus | n."""
        if n == self.n:
            return self
        if n % self.n:
            raise ModulusError(f"cannot embed Q(zeta_{self.n}) into Q(zeta_{n})")
        step = n // self.n
        return CycNumber._from_exponents(n, {j * step: c for j, c in enumerate(self.num)}, self.den)

    def galois(self, k: int) -> "CycNumber":
        """Image under zeta -> zeta^k, gcd(k, N) = 1."""
        if gcd(k, self.n) != 1:
            raise ModulusError(f"{k} is not a unit modulo {self.n}")
        terms: dict[int, int] = {}
        for j, c in enumerate(self.num):
            if c:
                e = (j * k) % self.n
                terms[e] = terms.get(e, 0) + c
        return CycNumber._from_exponents(self.n, terms, self.den)

    def conj(self) -> "CycNumber":
        return self.galois(-1)

    def norm(self) -> Fraction:
        """Field norm down to Q."""
        acc = self
        for k in _field(self.n).units[1:]:
            acc = acc * self.galois(k)
        value = acc.to_rational()
        assert value is not None
        return value

    # arithmetic ---------------------------------------------------------------------

    @staticmethod
    def _coerce(other) -> "CycNumber | None":
        if isinstance(other, CycNumber):
            return other
        if isinstance(other, (int, Rational)):
            return CycNumber.rational(other)
        return None

    @staticmethod
    def _align(x: "CycNumber", y: "CycNumber") -> tuple["CycNumber", "CycNumber"]:
        if x.n == y.n:
            return x, y
        n = lcm(x.n, y.n)
        return x.embed(n), y.embed(n)

    def __add__(self, other):
        y = self._coerce(other)
        if y is None:
            return NotImplemented
        x, y = self._align(self, y)
        return CycNumber(x.n, [a * y.den + b * x.den for a, b in zip(x.num, y.num)], x.den * y.den)

    __radd__ = __add__

    def __neg__(self) -> "CycNumber":
        return CycNumber(self.n, [-c for c in self.num], self.den)

    def __pos__(self) -> "CycNumber":
        return self

    def __sub__(self, other):
        y = self._coerce(other)
        if y is None:
            return NotImplemented
        return self + (-y)

    def __rsub__(self, other):
        y = self._coerce(other)
        if y is None:
            return NotImplemented
        return y + (-self)

    def __mul__(self, other):
        if isinstance(other, int):
            return CycNumber(self.n, [c * other for c in self.num], self.den)
        y = self._coerce(other)
        if y is None:
            return NotImplemented
        x, y = self._align(self, y)
        if y.n == 1 or not any(y.num[1:]):
            return CycNumber(x.n, [c * y.num[0] for c in x.num], x.den * y.den)
        if not any(x.num[1:]):
            return CycNumber(x.n, [c * x.num[0] for c in y.num], x.den * y.den)
        fld = _field(x.n)
        phi = fld.phi
        prod = [0] * (2 * phi - 1)
        for i, a in enumerate(x.num):
            if a:
                for j, b in enumerate(y.num):
                    if b:
                        prod[i + j] += a * b
        out = prod[:phi]
        for k in range(phi, 2 * phi - 1):
            c = prod[k]
            if c:
                for i, p in enumerate(fld.powers[k]):
                    if p:
                        out[i] += c * p
        return CycNumber(x.n, out, x.den * y.den)

    __rmul__ = __mul__

    def inverse(self) -> "CycNumber":
        if not any(self.num):
            raise ZeroDivisionError("inverse of zero in a cyclotomic field")
        if not any(self.num[1:]):
            return CycNumber.rational(Fraction(self.den, self.num[0]), self.n)
        # x^-1 = prod_{sigma != 1} sigma(x) / N(x)
        cofactor = CycNumber.rational(1, self.n)
        for k in _field(self.n).units[1:]:
            cofactor = cofactor * self.galois(k)
        nrm = (self * cofactor).to_rational()
        assert nrm is not None and nrm != 0
        return cofactor * (1 / nrm)

    def __truediv__(self, other):
        y = self._coerce(other)
        if y is None:
            return NotImplemented
        return self * y.inverse()

    def __rtruediv__(self, other):
        y = self._coerce(other)
        if y is None:
            return NotImplemented
        return y * self.inverse()

    def __pow__(self, k: int) -> "CycNumber":
        if not isinstance(k, int):
            return NotImplemented
        base = self if k >= 0 else self.inverse()
        k = abs(k)
        acc = CycNumber.rational(1, self.n)
        while k:
            if k & 1:
                acc = acc * base
            k >>= 1
            if k:
                base = base * base
        return acc

    def __eq__(self, other) -> bool:
        y = self._coerce(other)
        if y is None:
            return NotImplemented
        x, y = self._align(self, y)
        return x.den == y.den and x.num == y.num

    # display ------------------------------------------------------------------------

    def __repr__(self) -> str:
        return f"CycNumber({self.n}, [{', '.join(str(c) for c in self.coords)}])"

    def __str__(self) -> str:
        value = self.to_rational()
        if value is not None:
            return str(value)
        terms = []
        for j, c in enumerate(self.coords):
            if c:
                base = "1" if j == 0 else (f"z{self.n}" if j == 1 else f"z{self.n}^{j}")
                if not j:
                    terms.append(str(c))
                elif c in (1, -1):
                    terms.append(base if c == 1 else f"-{base}")
                else:
                    terms.append(f"{c}*{base}")
        return " + ".join(terms).replace("+ -", "- ")

    def to_json(self) -> dict:
        return {"modulus": self.n, "coords": [str(c) for c in self.coords]}


def as_cyc(x) -> CycNumber:
    y = CycNumber._coerce(x)
    if y is None:
        raise TypeError(f"cannot interpret {x!r} as a cyclotomic number")
    return y


def cyc_root_of_unity(num: int, den: int, n: int) -> CycNumber:
    """exp(2 pi i num/den) as an element of Q(zeta_n); requires den | n."""
    if den <= 0 or n <= 0:
        raise ModulusError("denominator and modulus must be positive")
    if n % den:
        raise ModulusError(f"{den} does not divide the modulus {n}")
    return CycNumber._from_exponents(n, {(num * (n // den)) % n: 1})


def root_of_unity(phase, n: int | None = None) -> CycNumber:
    """exp(2 pi i phase) for a rational phase, in Q(zeta_n) (default: minimal n)."""
    phase = Fraction(phase)
    return cyc_root_of_unity(phase.numerator, phase.denominator, n or phase.denominator)


def phase_modulus(phases: Iterable) -> int:
    return reduce(lcm, (Fraction(c).denominator for c in phases), 1)


# POLYNOMIALS ==========================================================================

class CycPolynomial:
    """Polynomial with coefficients in Q(zeta_N), lowest degree first."""

    __slots__ = ("n", "coeffs")
    __hash__ = None

    def __init__(self, coeffs: Sequence, n: int | None = None):
        cs = [as_cyc(c) for c in coeffs]
        while len(cs) > 1 and cs[-1].is_zero():
            cs.pop()
        if not cs:
            raise ValueError("empty coefficient list")
        if n is None:
            n = reduce(lcm, (c.n for c in cs), 1)
        self.n = n
        self.coeffs = tuple(c.embed(n) for c in cs)

    @property
    def modulus(self) -> int:
        return self.n

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def monic(self) -> bool:
        return self.coeffs[-1] == 1

    def coeff(self, k: int) -> CycNumber:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return CycNumber.rational(0, self.n)

    def conj(self) -> "CycPolynomial":
        return CycPolynomial([c.conj() for c in self.coeffs], self.n)

    def complex_coeffs(self) -> list[complex]:
        return [complex(c) for c in self.coeffs]

    def __call__(self, t):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * t + (complex(c) if isinstance(t, (complex, float)) else c)
        return acc

    def __eq__(self, other) -> bool:
        if not isinstance(other, CycPolynomial):
            return NotImplemented
        return len(self.coeffs) == len(other.coeffs) and all(
            a == b for a, b in zip(self.coeffs, other.coeffs))

    def __repr__(self) -> str:
        return f"CycPolynomial({list(self.coeffs)!r})"

    def __str__(self) -> str:
        rat = [c.to_rational() for c in self.coeffs]
        if all(c is not None for c in rat):
            return format_poly(rat)
        parts = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            mono = "" if k == 0 else ("T" if k == 1 else f"T^{k}")
            r = rat[k]
            if r is None:
                parts.append(f"({c})*{mono}" if mono else f"({c})")
            elif not mono:
                parts.append(str(r))
            elif abs(r) == 1:
                parts.append(mono if r == 1 else f"-{mono}")
            else:
                parts.append(f"{r}*{mono}")
        return " + ".join(parts).replace(" + -", " - ")


def format_poly(coeffs: Sequence, var: str = "T") -> str:
    """Human-readable form of a rational polynomial given lowest degree first."""
    parts = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = Fraction(coeffs[k])
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        if mono and mag == 1:
            body = mono
        elif mono:
            body = f"{mag}*{mono}"
        else:
            body = str(mag)
        parts.append((sign, body))
    if not parts:
        return "0"
    head = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    return head + "".join(f" {s} {b}" for s, b in parts[1:])


def elementary_symmetric(phases: Sequence, n: int | None = None) -> list[CycNumber]:
    """e_0, ..., e_r of the roots exp(2 pi i c_j), exactly in Q(zeta_n)."""
    phases = [Fraction(c) for c in phases]
    if n is None:
        n = phase_modulus(phases)
    base = phase_modulus(phases)
    if n % base:
        raise ModulusError(f"phases need modulus divisible by {base}, got {n}")
    exps = [(c.numerator * (n // c.denominator)) % n for c in phases]
    # expand in the group ring Z[x]/(x^n - 1), then reduce once
    e: list[dict[int, int]] = [{0: 1}] + [{} for _ in exps]
    for count, x in enumerate(exps, start=1):
        for k in range(count, 0, -1):
            tgt = e[k]
            for ex, c in e[k - 1].items():
                key = (ex + x) % n
                tgt[key] = tgt.get(key, 0) + c
    return [CycNumber._from_exponents(n, terms) for terms in e]


def char_poly_from_phases(phases: Sequence, n: int | None = None) -> CycPolynomial:
    """prod_j (T - exp(2 pi i c_j)) expanded exactly."""
    if len(phases) == 0:
        raise ValueError("need at least one phase")
    e = elementary_symmetric(phases, n)
    r = len(e) - 1
    coeffs = [e[r - k] if (r - k) % 2 == 0 else -e[r - k] for k in range(r + 1)]
    return CycPolynomial(coeffs, e[0].n)


@dataclass(frozen=True)
class RationalityVerdict:
    rational: tuple[Fraction, ...] | None
    integral: bool


def poly_rationality(poly: CycPolynomial) -> RationalityVerdict:
    rat = [c.to_rational() for c in poly.coeffs]
    if any(c is None for c in rat):
        return RationalityVerdict(None, False)
    return RationalityVerdict(tuple(rat), all(c.denominator == 1 for c in rat))
