"""Exact Stokes data and monodromy for the rank-r Toda connection.

Conventions (fixed here and checked by :func:`build_system`):

* ``C1`` has ones on the subdiagonal and omega in the top-right corner,
  omega = exp(2 pi i b), b = -sum(a) - (r-1)/2.
* With h = r // 2, the Stokes factor ``A`` is unipotent lower triangular with
  beta_j at (h+j, h-j+1) and alpha_j at (h+j+1, h-j+1) (1-based).  ``A1``
  carries the beta entries, ``A2`` the alpha entries and A = A2 A1.
* M = C1^-1 A and
  det(T - M) = T^r - sum alpha_j T^(r-2j) - sum beta_j T^(r-2j+1) - omega^-1.

The constant term is -omega^-1 = (-1)^r exp(2 pi i sum(a)), which is the
constant term of P_a(T) = prod (T - exp(2 pi i a_j)).  Matching P_a therefore
determines alpha and beta.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Any, Sequence

from .cyclotomic import (CycNumber, CycPolynomial, as_cyc, char_poly_from_phases,
                         phase_modulus, root_of_unity)
from .weights import WeightTuple

Matrix = list[list[Any]]


class ConventionError(ValueError):
    """A characteristic polynomial and omega that do not fit together."""


class ConsistencyError(AssertionError):
    """An exact identity that should hold by construction failed."""


# GENERIC EXACT LINEAR ALGEBRA =========================================================

def _is_zero(x) -> bool:
    if isinstance(x, CycNumber):
        return x.is_zero()
    return x == 0


def identity(r: int, one=1, zero=0) -> Matrix:
    return [[one if i == j else zero for j in range(r)] for i in range(r)]


def mat_mul(X: Matrix, Y: Matrix) -> Matrix:
    n, k, p = len(X), len(Y), len(Y[0])
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = None
            for t in range(k):
                x, y = X[i][t], Y[t][j]
                if _is_zero(x) or _is_zero(y):
                    continue
                acc = x * y if acc is None else acc + x * y
            row.append(acc if acc is not None else X[i][0] * 0)
        out.append(row)
    return out


def mat_equal(X: Matrix, Y: Matrix) -> bool:
    return all(_is_zero(x - y) for rx, ry in zip(X, Y) for x, y in zip(rx, ry))


def berkowitz(M: Matrix) -> list:
    """Coefficients of det(T I - M), highest degree first, without division."""
    n = len(M)
    if n == 0:
        return [1]
    coeffs = [1, -M[0][0]]
    for k in range(1, n):
        row = M[k][:k]
        col = [M[i][k] for i in range(k)]
        toeplitz = [1, -M[k][k]]
        vec = col
        for _ in range(k):
            acc = 0
            for x, y in zip(row, vec):
                if not (_is_zero(x) or _is_zero(y)):
                    acc = acc + x * y
            toeplitz.append(-acc)
            nxt = []
            for i in range(k):
                acc = 0
                for t in range(k):
                    x, y = M[i][t], vec[t]
                    if not (_is_zero(x) or _is_zero(y)):
                        acc = acc + x * y
                nxt.append(acc)
            vec = nxt
        new = []
        for i in range(k + 2):
            acc = 0
            for j in range(max(0, i - k - 1), min(i, k) + 1):
                x, y = toeplitz[i - j], coeffs[j]
                if not (_is_zero(x) or _is_zero(y)):
                    acc = acc + x * y
            new.append(acc)
        coeffs = new
    return coeffs


def charpoly_exact(M: Matrix) -> CycPolynomial:
    """det(T I - M) over a cyclotomic field."""
    return CycPolynomial([as_cyc(c) for c in reversed(berkowitz(M))])


def determinant(M: Matrix):
    c = berkowitz(M)[-1]
    return c if len(M) % 2 == 0 else -c


# STOKES MATRICES ======================================================================

def c1_matrix(r: int, omega, one=1, zero=0) -> Matrix:
    C = [[zero] * r for _ in range(r)]
    for i in range(r - 1):
        C[i + 1][i] = one
    C[0][r - 1] = omega
    return C


def c1_inverse(r: int, omega, one=1, zero=0) -> Matrix:
    C = [[zero] * r for _ in range(r)]
    for i in range(r - 1):
        C[i][i + 1] = one
    C[r - 1][0] = 1 / omega if not isinstance(omega, CycNumber) else omega.inverse()
    return C


def beta_position(r: int, j: int) -> tuple[int, int]:
    h = r // 2
    return h + j - 1, h - j  # 0-based (h+j, h-j+1)


def alpha_position(r: int, j: int) -> tuple[int, int]:
    h = r // 2
    return h + j, h - j  # 0-based (h+j+1, h-j+1)


def stokes_factors(r: int, alpha: Sequence, beta: Sequence, one=1, zero=0) -> tuple[Matrix, Matrix, Matrix]:
    """(A, A1, A2) for given entries; works over any commutative ring."""
    if len(beta) != r // 2 or len(alpha) != (r - 1) // 2:
        raise ValueError(f"rank {r} needs {(r - 1) // 2} alphas and {r // 2} betas")
    A1 = identity(r, one, zero)
    A2 = identity(r, one, zero)
    for j, x in enumerate(beta, start=1):
        i, k = beta_position(r, j)
        A1[i][k] = x
    for j, x in enumerate(alpha, start=1):
        i, k = alpha_position(r, j)
        A2[i][k] = x
    # no products between the two patterns, so A2 A1 = A1 + A2 - I
    A = [[A1[i][k] + A2[i][k] - (one if i == k else zero) for k in range(r)] for i in range(r)]
    return A, A1, A2


def target_charpoly(r: int, alpha: Sequence, beta: Sequence, omega) -> list:
    """Coefficients (low to high) of T^r - sum alpha_j T^(r-2j) - sum beta_j T^(r-2j+1) - omega^-1."""
    coeffs: list = [0] * (r + 1)
    coeffs[r] = 1
    for j, x in enumerate(alpha, start=1):
        coeffs[r - 2 * j] = coeffs[r - 2 * j] - x
    for j, x in enumerate(beta, start=1):
        coeffs[r - 2 * j + 1] = coeffs[r - 2 * j + 1] - x
    inv = omega.inverse() if isinstance(omega, CycNumber) else 1 / omega
    coeffs[0] = coeffs[0] - inv
    return coeffs


# SYSTEM ===============================================================================

def omega_from_weights(w: WeightTuple) -> tuple[Fraction, CycNumber]:
    b = -w.total - Fraction(w.r - 1, 2)
    return b, root_of_unity(b)


def extract_alpha_beta(P: CycPolynomial, omega: CycNumber) -> tuple[list[CycNumber], list[CycNumber]]:
    r = P.degree
    if not P.monic:
        raise ConventionError("characteristic polynomial must be monic")
    if P.coeff(0) != -omega.inverse():
        raise ConventionError(
            f"constant term {P.coeff(0)} differs from -1/omega = {-omega.inverse()}")
    beta = [-P.coeff(r - 2 * j + 1) for j in range(1, r // 2 + 1)]
    alpha = [-P.coeff(r - 2 * j) for j in range(1, (r - 1) // 2 + 1)]
    return alpha, beta


@dataclass(frozen=True)
class StokesSystem:
    weights: WeightTuple
    b: Fraction
    omega: CycNumber
    alpha: tuple[CycNumber, ...]
    beta: tuple[CycNumber, ...]
    P: CycPolynomial
    C1: Matrix
    A: Matrix
    A1: Matrix
    A2: Matrix
    M: Matrix

    @property
    def r(self) -> int:
        return self.weights.r

    @property
    def modulus(self) -> int:
        return self.P.modulus


def _check(cond: bool, what: str):
    if not cond:
        raise ConsistencyError(what)


def build_system(w: WeightTuple, verify: bool = True) -> StokesSystem:
    r = w.r
    b, omega = omega_from_weights(w)
    n = lcm(phase_modulus(w.a), b.denominator)
    P = char_poly_from_phases(w.a, n)
    omega = omega.embed(n)
    alpha, beta = extract_alpha_beta(P, omega)
    one, zero = CycNumber.rational(1, n), CycNumber.rational(0, n)
    A, A1, A2 = stokes_factors(r, alpha, beta, one, zero)
    C1 = c1_matrix(r, omega, one, zero)
    M = mat_mul(c1_inverse(r, omega, one, zero), A)
    sys_ = StokesSystem(w, b, omega, tuple(alpha), tuple(beta), P, C1, A, A1, A2, M)
    if verify:
        verify_system(sys_)
    return sys_


def verify_system(s: StokesSystem) -> None:
    r = s.r
    _check(mat_equal(s.A, mat_mul(s.A2, s.A1)), "A = A2 A1")
    for name, X in (("A", s.A), ("A1", s.A1), ("A2", s.A2)):
        _check(determinant(X) == 1, f"det {name} = 1")
    _check(determinant(s.C1) == (-1) ** (r - 1) * s.omega, "det C1 = (-1)^(r-1) omega")
    _check(mat_equal(mat_mul(s.C1, s.M), s.A), "C1 M = A")
    _check(charpoly_exact(s.M) == CycPolynomial(target_charpoly(r, s.alpha, s.beta, s.omega), s.modulus),
           "charpoly identity")
    _check(charpoly_exact(s.M) == s.P, "charpoly(M) = P_a")


def sector_ladder(s: StokesSystem) -> list[Matrix]:
    """C1^j A1 C1^-j and C1^j A2 C1^-j for j = 0..r-1, in sector order."""
    n = s.modulus
    one, zero = CycNumber.rational(1, n), CycNumber.rational(0, n)
    Cinv = c1_inverse(s.r, s.omega, one, zero)
    P, Pinv = identity(s.r, one, zero), identity(s.r, one, zero)
    out = []
    for _ in range(s.r):
        out.append(mat_mul(mat_mul(P, s.A1), Pinv))
        out.append(mat_mul(mat_mul(P, s.A2), Pinv))
        P, Pinv = mat_mul(s.C1, P), mat_mul(Pinv, Cinv)
    return out


def rationality_transfer(s: StokesSystem) -> dict:
    """Whether alpha, beta are rational/integral and omega = +-1."""
    entries = [x.to_rational() for x in (*s.alpha, *s.beta)]
    unit = s.omega == 1 or s.omega == -1
    rational = all(x is not None for x in entries) and unit
    integral = rational and all(x.denominator == 1 for x in entries)
    return {"rational": rational, "integral": integral, "omega_unit": unit}


# FRAME RELATIONS ======================================================================

def solve_unipotent_entry(prefactor: Matrix, target: Sequence, pos: tuple[int, int] = (1, 0)) -> Fraction:
    """Unknown x with charpoly(prefactor (I + x E_pos)) = target (low to high).

    The characteristic polynomial is affine in x, so two evaluations determine it.
    """
    r = len(prefactor)

    def cp(x):
        U = identity(r, Fraction(1), Fraction(0))
        U[pos[0]][pos[1]] = Fraction(x)
        return list(reversed(berkowitz(mat_mul(prefactor, U))))

    p0, p1 = cp(0), cp(1)
    slope = [b - a for a, b in zip(p0, p1)]
    x = None
    for a, d, t in zip(p0, slope, target):
        t = Fraction(t)
        if d == 0:
            if a != t:
                raise ValueError("frame relation is inconsistent with the target polynomial")
            continue
        cand = (t - a) / d
        if x is not None and cand != x:
            raise ValueError("frame relation is inconsistent with the target polynomial")
        x = cand
    if x is None:
        raise ValueError("the target polynomial does not depend on the unknown entry")
    return x
