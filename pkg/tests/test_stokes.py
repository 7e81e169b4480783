import random
from math import comb
from fractions import Fraction as F

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import galois_closed, random_weights
from todastokes.cyclotomic import CycPolynomial, char_poly_from_phases, root_of_unity
from todastokes.stokes import (ConventionError, alpha_position, beta_position, build_system,
                               c1_inverse, c1_matrix, charpoly_exact, determinant,
                               extract_alpha_beta, identity, mat_equal, mat_mul, omega_from_weights,
                               rationality_transfer, sector_ladder, solve_unipotent_entry,
                               stokes_factors)
from todastokes.weights import WeightTuple


def symbolic_system(r):
    alpha = sympy.symbols(f"alpha1:{(r - 1) // 2 + 1}")
    beta = sympy.symbols(f"beta1:{r // 2 + 1}")
    omega = sympy.Symbol("omega", nonzero=True)
    A, A1, A2 = stokes_factors(r, alpha, beta, sympy.Integer(1), sympy.Integer(0))
    C1 = sympy.Matrix(c1_matrix(r, omega, sympy.Integer(1), sympy.Integer(0)))
    return alpha, beta, omega, sympy.Matrix(A), sympy.Matrix(A1), sympy.Matrix(A2), C1


@pytest.mark.parametrize("r", range(2, 9))
def test_symbolic_charpoly_identity(r):
    alpha, beta, omega, A, A1, A2, C1 = symbolic_system(r)
    T = sympy.Symbol("T")
    M = C1.inv() * A
    lhs = sympy.expand(M.charpoly(T).as_expr())
    rhs = (T ** r - sum(a * T ** (r - 2 * j) for j, a in enumerate(alpha, 1))
           - sum(b * T ** (r - 2 * j + 1) for j, b in enumerate(beta, 1)) - 1 / omega)
    assert sympy.simplify(lhs - rhs) == 0
    assert A == A2 * A1
    assert sympy.simplify(C1.det() - (-1) ** (r - 1) * omega) == 0
    assert A.det() == A1.det() == A2.det() == 1


@pytest.mark.parametrize("r", range(2, 7))
def test_symbolic_derivatives(r):
    alpha, beta, omega, A, A1, A2, C1 = symbolic_system(r)
    T = sympy.Symbol("T")
    P = (C1.inv() * A).charpoly(T).as_expr()
    for j, b in enumerate(beta, 1):
        assert sympy.expand(sympy.diff(P, b) + T ** (r + 1 - 2 * j)) == 0
    for j, a in enumerate(alpha, 1):
        assert sympy.expand(sympy.diff(P, a) + T ** (r - 2 * j)) == 0


def test_positions_shapes():
    # r = 4: beta_1 (3,2), beta_2 (4,1), alpha_1 (4,2) in 1-based indices
    assert [beta_position(4, j) for j in (1, 2)] == [(2, 1), (3, 0)]
    assert alpha_position(4, 1) == (3, 1)
    # r = 5: beta at (3,2), (4,1); alpha at (4,2), (5,1)
    assert [beta_position(5, j) for j in (1, 2)] == [(2, 1), (3, 0)]
    assert [alpha_position(5, j) for j in (1, 2)] == [(3, 1), (4, 0)]
    with pytest.raises(ValueError):
        stokes_factors(3, [], [1])


def test_omega_examples():
    assert omega_from_weights(WeightTuple([0, 0, 0])) == (-1, 1)
    b, om = omega_from_weights(WeightTuple(["-1/8", "-7/8"]))
    assert b == F(1, 2) and om == -1
    assert omega_from_weights(WeightTuple(["1/3", "0", "-1/3"]))[0] == -1


def test_extract_examples():
    one = root_of_unity(0)
    alpha, beta = extract_alpha_beta(CycPolynomial([-1, 3, -3, 1]), one)
    assert alpha == [-3] and beta == [3]
    alpha, beta = extract_alpha_beta(CycPolynomial([-1, 0, 0, 1]), one)
    assert alpha == [0] and beta == [0]
    P = char_poly_from_phases(["-1/8", "-7/8"])
    z8 = root_of_unity(F(1, 8))
    alpha, beta = extract_alpha_beta(P, root_of_unity(F(1, 2)))
    assert alpha == [] and beta == [z8 + z8 ** 7]
    with pytest.raises(ConventionError):
        extract_alpha_beta(CycPolynomial([1, 0, 0, 1]), one)
    with pytest.raises(ConventionError):
        extract_alpha_beta(CycPolynomial([-1, 0, 2]), one)


def test_build_r3_zero():
    s = build_system(WeightTuple([0, 0, 0]))
    rat = lambda X: [[x.to_rational() for x in row] for row in X]
    assert rat(s.A) == [[1, 0, 0], [3, 1, 0], [-3, 0, 1]]
    assert rat(s.C1) == [[0, 0, 1], [1, 0, 0], [0, 1, 0]]
    assert rat(s.M) == [[3, 1, 0], [-3, 0, 1], [1, 0, 0]]
    assert charpoly_exact(s.M) == CycPolynomial([-1, 3, -3, 1])


def test_r2_trivial_stokes():
    # alpha, beta = 0: charpoly(C1^-1) = T^2 - 1/omega
    om = root_of_unity(F(1, 3))
    Ci = c1_inverse(2, om, root_of_unity(0, 3), 0 * om)
    assert charpoly_exact(Ci) == CycPolynomial([-om.inverse(), 0, 1])


def test_charpoly_examples():
    assert charpoly_exact(identity(2)) == CycPolynomial([1, -2, 1])
    b, a, w = F(2, 3), F(-5), F(7, 2)
    comp = [[b, a, 1 / w], [1, 0, 0], [0, 1, 0]]
    assert charpoly_exact(comp) == CycPolynomial([-1 / w, -a, -b, 1])
    assert determinant([[1, 2], [3, 4]]) == -2


def test_frame_relations_example():
    assert solve_unipotent_entry([[0, 2], [-1, 0]], [2, -2, 1]) == 1
    assert solve_unipotent_entry([[0, -1], [2, 0]], [2, -2, 1]) == -2
    with pytest.raises(ValueError):
        solve_unipotent_entry([[0, 2], [-1, 0]], [3, -2, 1])


def test_sector_ladder():
    rng = random.Random(11)
    for r in (2, 3, 4, 5):
        s = build_system(WeightTuple(galois_closed(rng, r)))
        ladder = sector_ladder(s)
        assert len(ladder) == 2 * r
        assert mat_equal(ladder[0], s.A1) and mat_equal(ladder[1], s.A2)
        for X in ladder:
            assert determinant(X) == 1
            cp = charpoly_exact(X)
            assert cp == CycPolynomial([(-1) ** (r - k) * comb(r, k) for k in range(r + 1)])
            if rationality_transfer(s)["integral"]:
                assert all(x.to_rational() is not None and x.to_rational().denominator == 1
                           for row in X for x in row)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10 ** 6))
def test_rationality_transfer(r, seed):
    rng = random.Random(seed)
    a = random_weights(rng, r) if seed % 2 else galois_closed(rng, r)
    s = build_system(WeightTuple(a))
    coeffs = [c.to_rational() for c in s.P.coeffs]
    rational = all(c is not None for c in coeffs)
    rt = rationality_transfer(s)
    assert rt["rational"] == rational
    assert rt["integral"] == (rational and all(c.denominator == 1 for c in coeffs))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10 ** 6))
def test_entry_perturbation(r, seed):
    rng = random.Random(seed)
    s = build_system(WeightTuple(random_weights(rng, r)))
    n = s.modulus
    one, zero = root_of_unity(0, n), 0 * s.omega
    delta = F(rng.randint(1, 9), rng.randint(1, 9))
    j = rng.randint(1, r // 2)
    beta = list(s.beta)
    beta[j - 1] = beta[j - 1] + delta
    A, _, _ = stokes_factors(r, s.alpha, beta, one, zero)
    P2 = charpoly_exact(mat_mul(c1_inverse(r, s.omega, one, zero), A))
    diff = [x - y for x, y in zip(P2.coeffs, s.P.coeffs)]
    expect = [0] * (r + 1)
    expect[r + 1 - 2 * j] = -delta
    assert diff == expect
