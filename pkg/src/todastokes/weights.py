"""Combinatorics of parabolic weight tuples.

A tuple ``a = (a_1, ..., a_r)`` with pole parameter ``m`` lies in R_{r,m} when

    a_1 >= a_2 >= ... >= a_r >= a_1 - m.

Everything here is exact rational arithmetic on such tuples: validation,
the frame change that moves a boundary tuple (a_r = a_1 - m) into the
interior, the stable decomposition, pairing certificates, the asymptotic
slopes of the harmonic metric and the symmetry constants of the Toda
solution.  Indices in docstrings are 1-based as in the formulas; Python
lists are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence


def parse_rational(text) -> Fraction:
    if isinstance(text, Fraction):
        return text
    if isinstance(text, float):
        raise TypeError("weights must be exact; pass a string like '1/3' or a Fraction")
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse {text!r} as a rational number") from exc


@dataclass(frozen=True)
class WeightTuple:
    """Exact weights (a_1, ..., a_r) with pole parameter m.

    Membership in R_{r,m} is checked by :func:`validate_weights`, not on
    construction, so invalid tuples can still be represented and reported.
    """

    r: int
    m: int
    a: tuple[Fraction, ...]

    def __init__(self, a: Iterable, m: int = 1, r: int | None = None):
        a = tuple(parse_rational(x) for x in a)
        if r is None:
            r = len(a)
        if r != len(a) or r < 1:
            raise ValueError(f"rank {r} does not match {len(a)} weights")
        if int(m) != m or m < 1:
            raise ValueError(f"pole parameter must be a positive integer, got {m}")
        object.__setattr__(self, "r", int(r))
        object.__setattr__(self, "m", int(m))
        object.__setattr__(self, "a", a)

    @property
    def total(self) -> Fraction:
        return sum(self.a, Fraction(0))

    def weight(self, i: int) -> Fraction:
        """a_i with the cyclic convention a_{i+r} = a_i - m."""
        q, k = divmod(i - 1, self.r)
        return self.a[k] - q * self.m

    def shifted(self, c) -> "WeightTuple":
        c = parse_rational(c)
        return WeightTuple([x + c for x in self.a], self.m)

    def negated(self) -> "WeightTuple":
        return WeightTuple([-x for x in reversed(self.a)], self.m)

    def __str__(self) -> str:
        return f"(r={self.r}, m={self.m}, a=({', '.join(str(x) for x in self.a)}))"


@dataclass(frozen=True)
class WeightVerdict:
    valid: bool
    violation: str | None = None
    index: int | None = None  # 1-based index of the first failing inequality

    def __bool__(self) -> bool:
        return self.valid


def validate_weights(w: WeightTuple, target_sum=None) -> WeightVerdict:
    a = w.a
    for i in range(w.r - 1):
        if a[i] < a[i + 1]:
            return WeightVerdict(False, f"a_{i + 1} >= a_{i + 2} fails ({a[i]} < {a[i + 1]})", i + 1)
    if a[-1] < a[0] - w.m:
        return WeightVerdict(
            False, f"a_{w.r} >= a_1 - m fails ({a[-1]} < {a[0] - w.m})", w.r)
    if target_sum is not None and w.total != parse_rational(target_sum):
        return WeightVerdict(False, f"sum of weights is {w.total}, expected {target_sum}")
    return WeightVerdict(True)


def is_boundary(w: WeightTuple) -> bool:
    return w.a[-1] == w.a[0] - w.m


# FRAME CHANGE =========================================================================

@dataclass(frozen=True)
class FrameShift:
    j: int | None  # rotation index; None when no change was needed
    sum_change: Fraction

    @property
    def changed(self) -> bool:
        return self.j is not None


def normalize_weights(w: WeightTuple) -> tuple[WeightTuple, FrameShift]:
    """Move a boundary tuple into the interior by rotating the frame.

    With j defined by a_j > a_{j+1} = a_r the new weights are
    a'_i = a_{j+i} + m for i <= r - j and a'_i = a_{i-r+j} otherwise.
    """
    if not validate_weights(w):
        raise ValueError(f"weights {w} are not in R_{{r,m}}")
    if not is_boundary(w):
        return w, FrameShift(None, Fraction(0))
    a, r, m = w.a, w.r, w.m
    j = max(i for i in range(1, r + 1) if a[i - 1] > a[-1])
    new = [a[j + i - 1] + m for i in range(1, r - j + 1)] + [a[i - r + j - 1] for i in range(r - j + 1, r + 1)]
    out = WeightTuple(new, m)
    return out, FrameShift(j, Fraction(m * (r - j)))


# STABLE DECOMPOSITION =================================================================

@dataclass(frozen=True)
class StableDecomposition:
    b: tuple[Fraction, ...]
    r1: int
    S: tuple[int, ...]
    r0: int
    j0: int
    m0: Fraction
    a0: tuple[Fraction, ...]

    @property
    def stable(self) -> bool:
        return len(self.S) == 1


def stable_decomposition(w: WeightTuple) -> StableDecomposition:
    r, m = w.r, w.m
    b = [r * w.a[i] + m * (i + 1) for i in range(r)]
    r1 = r // gcd(m, r)
    S = tuple(
        j for j in range(1, r + 1)
        if j % r1 == 0 and all(b[(i + j) % r] == b[i] for i in range(r))
    )
    r0 = S[0]
    return StableDecomposition(
        b=tuple(b), r1=r1, S=S, r0=r0, j0=r // r0,
        m0=Fraction(m * r0, r), a0=tuple(w.a[:r0]),
    )


# PAIRING ==============================================================================

@dataclass(frozen=True)
class PairingCertificate:
    k0: int
    ell: int

    @property
    def nu(self) -> Fraction:
        return Fraction(self.ell, 2)


def _pairs_with_sum(total: int, r: int) -> list[tuple[int, int]]:
    return [(i, total - i) for i in range(1, r + 1) if 1 <= total - i <= r]


def _pairing_ell(w: WeightTuple, k0: int, offset: Fraction = Fraction(0)) -> int | None:
    # constraints: a_i + a_j = -l + offset on i+j = r+1-k0, -l - m + offset on 2r+1-k0
    r, m = w.r, w.m
    targets = []
    for i, j in _pairs_with_sum(r + 1 - k0, r):
        targets.append(-(w.a[i - 1] + w.a[j - 1]) + offset)
    for i, j in _pairs_with_sum(2 * r + 1 - k0, r):
        targets.append(-(w.a[i - 1] + w.a[j - 1]) - m + offset)
    if not targets:
        return None
    ell = targets[0]
    if ell.denominator != 1 or any(t != ell for t in targets):
        return None
    return int(ell)


def find_pairing(w: WeightTuple) -> list[PairingCertificate]:
    """All (k0, l) with a_i + a_j = -l (i+j = r+1-k0) and -l-m (i+j = 2r+1-k0)."""
    out = []
    for k0 in range(w.r):
        ell = _pairing_ell(w, k0)
        if ell is not None:
            out.append(PairingCertificate(k0, ell))
    return out


def refined_pairing_holds(w: WeightTuple, cert: PairingCertificate) -> bool:
    """Second-pass check of the certificate for every shift k0 + s*r0 in [0, r-1]."""
    dec = stable_decomposition(w)
    r0, m0 = dec.r0, dec.m0
    for s in range(-w.r, w.r + 1):
        k = cert.k0 + s * r0
        if 0 <= k <= w.r - 1:
            ell = _pairing_ell(w, k, offset=s * m0)
            if ell != cert.ell:
                return False
    return True


def pairing_polynomial_phases(w: WeightTuple, cert: PairingCertificate) -> list[Fraction]:
    """Phases (a_i + nu)/m whose polynomial is real for a valid certificate."""
    return [(x + cert.nu) / w.m for x in w.a]


# ASYMPTOTICS ==========================================================================

@dataclass(frozen=True)
class AsymptoticProfile:
    slope_zero: tuple[Fraction, ...]
    k: tuple[int, ...]
    slope_infty: tuple[Fraction, ...]
    boundary_case: bool
    toda_slope_zero: tuple[Fraction, ...] | None = None
    toda_slope_infty: tuple[Fraction, ...] | None = None

    @property
    def loglog(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(k, 2) for k in self.k)


def _block_index(order: Sequence[int], i: int) -> int:
    return len(order) - 2 * (order.index(i) + 1) + 1


def asymptotic_profile(w: WeightTuple) -> AsymptoticProfile:
    """Growth rates of log|e_i| at 0 and infinity.

    Near 0, log|e_i| = -a_i log|q| + (k_i/2) log(-log|q|) + O(1).  In the
    boundary case the weights equal to a_1 or a_r form one block ordered
    cyclically as j0+1, ..., r, 1, ..., j1, and k'_i replaces k_i there.
    """
    if not validate_weights(w):
        raise ValueError(f"weights {w} are not in R_{{r,m}}")
    r, m, a = w.r, w.m, w.a
    k = []
    for i in range(r):
        block = [j for j in range(r) if a[j] == a[i]]
        k.append(_block_index(block, i))
    boundary = is_boundary(w)
    if boundary:
        tail = [j for j in range(r) if a[j] == a[-1]]
        head = [j for j in range(r) if a[j] == a[0]]
        order = tail + head
        for i in order:
            k[i] = _block_index(order, i)
    total = w.total
    slope_infty = tuple(-(total + Fraction(m * (r + 1), 2) - m * i) / r for i in range(1, r + 1))
    toda0 = todainf = None
    if m == r:
        toda0 = tuple(-(a[i] + i) for i in range(r))
        todainf = tuple(-total / r - Fraction(r - 1, 2) for _ in range(r))
    return AsymptoticProfile(
        slope_zero=tuple(-x for x in a), k=tuple(k), slope_infty=slope_infty,
        boundary_case=boundary, toda_slope_zero=toda0, toda_slope_infty=todainf,
    )


# TODA SYMMETRY ========================================================================

def toda_symmetry(w: WeightTuple, cert: PairingCertificate) -> list[tuple[int, int, int]]:
    """Pairs (i, j, c) with w_i + w_j = c log|q| for the Toda solution (m = r)."""
    if w.m != w.r:
        raise ValueError("the Toda symmetry needs m = r")
    if cert not in find_pairing(w):
        raise ValueError(f"certificate {cert} does not hold for {w}")
    r0 = stable_decomposition(w).r0
    slope = cert.ell - w.r + 1 + cert.k0
    return [
        (i, j, slope)
        for i in range(1, w.r + 1) for j in range(i, w.r + 1)
        if (i + j + cert.k0 - 1) % r0 == 0
    ]
