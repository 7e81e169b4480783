from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from todastokes.cyclotomic import char_poly_from_phases
from todastokes.weights import (PairingCertificate, WeightTuple, asymptotic_profile, find_pairing,
                                is_boundary, normalize_weights, pairing_polynomial_phases,
                                parse_rational, refined_pairing_holds, stable_decomposition,
                                toda_symmetry, validate_weights)


@st.composite
def valid_tuples(draw, max_r=6, max_m=4):
    r = draw(st.integers(1, max_r))
    m = draw(st.integers(1, max_m))
    d = draw(st.integers(1, 12))
    base = draw(st.integers(-2 * d, 2 * d))
    ks = draw(st.lists(st.integers(base, base + m * d), min_size=r, max_size=r))
    return WeightTuple([F(k, d) for k in sorted(ks, reverse=True)], m)


@st.composite
def boundary_tuples(draw):
    w = draw(valid_tuples(max_r=6))
    if w.r < 2:
        w = WeightTuple([w.a[0], w.a[0]], w.m)
    a = list(w.a)
    a[-1] = a[0] - w.m
    return WeightTuple(a, w.m)


def test_parse_rational():
    assert parse_rational("-7/8") == F(-7, 8)
    assert parse_rational(3) == 3
    with pytest.raises(ValueError):
        parse_rational("x")


def test_construction_errors():
    with pytest.raises(ValueError):
        WeightTuple([0, 0], m=0)
    with pytest.raises(ValueError):
        WeightTuple([0, 0], r=3)


def test_validate_examples():
    assert validate_weights(WeightTuple(["1/3", "0", "-1/3"]))
    assert validate_weights(WeightTuple([0] * 5, 3))
    v = validate_weights(WeightTuple(["0", "-3/2"]))
    assert not v and v.index == 2
    assert not validate_weights(WeightTuple(["0", "1"]))
    assert validate_weights(WeightTuple(["1/2", "-1/2"]), target_sum=0)
    assert not validate_weights(WeightTuple(["1/2", "-1/2"]), target_sum=1)


def test_normalize_example():
    w = WeightTuple(["1/2", "0", "-1/2"])
    out, shift = normalize_weights(w)
    assert out.a == (F(1, 2), F(1, 2), F(0))
    assert shift.j == 2 and shift.sum_change == 1
    same, shift = normalize_weights(WeightTuple(["1/3", "0", "-1/3"]))
    assert same.a == (F(1, 3), F(0), F(-1, 3)) and not shift.changed


def test_stable_decomposition_examples():
    d = stable_decomposition(WeightTuple([0, -1, -2], 3))
    assert d.b == (3, 3, 3) and d.S == (1, 2, 3) and (d.r0, d.j0, d.m0) == (1, 3, 1) and not d.stable
    for r, m in ((2, 1), (3, 2), (5, 5)):
        d = stable_decomposition(WeightTuple([0] * r, m))
        assert d.S == (r,) and d.stable
    # fixture confirmed by direct evaluation: b = (4, 4, 4, 4), r1 = 2
    d = stable_decomposition(WeightTuple(["1/2", "0", "-1/2", "-1"], 2))
    assert d.b == (4, 4, 4, 4) and d.r1 == 2
    assert d.S == (2, 4) and (d.r0, d.j0, d.m0) == (2, 2, 1) and d.a0 == (F(1, 2), 0)


def test_pairing_examples():
    w = WeightTuple(["-1/8", "-7/8"], 2)
    assert PairingCertificate(0, 1) in find_pairing(w)
    phases = pairing_polynomial_phases(w, PairingCertificate(0, 1))
    assert sorted(phases) == [F(-3, 16), F(3, 16)]
    for r, m in ((2, 1), (4, 4), (3, 1)):
        assert find_pairing(WeightTuple([0] * r, m))[0] == PairingCertificate(0, 0)
    assert find_pairing(WeightTuple(["0", "-1/3"])) == []


def test_asymptotic_examples():
    p = asymptotic_profile(WeightTuple(["0", "0", "-1/2"]))
    assert p.k == (1, -1, 0)
    assert p.slope_infty == (F(-1, 6), F(1, 6), F(1, 2))
    assert not p.boundary_case
    assert asymptotic_profile(WeightTuple(["1/2", "1/4", "0", "-1/3"])).k == (0, 0, 0, 0)
    b = asymptotic_profile(WeightTuple(["1/2", "-1/2"]))
    assert b.boundary_case and b.k == (-1, 1)
    t = asymptotic_profile(WeightTuple(["-1/2", "-1/2"], 2))
    assert t.toda_slope_zero == (F(1, 2), F(-1, 2)) and t.toda_slope_infty == (0, 0)
    assert t.loglog == (F(1, 2), F(-1, 2))


def test_toda_symmetry_examples():
    w = WeightTuple(["-1/2", "-1/2"], 2)
    assert toda_symmetry(w, PairingCertificate(0, 1)) == [(1, 2, 0)]
    for r in (2, 3, 4):
        pairs = toda_symmetry(WeightTuple([0] * r, r), PairingCertificate(0, 0))
        assert pairs and all(i + j == r + 1 and c == 1 - r for i, j, c in pairs)
    with pytest.raises(ValueError):
        toda_symmetry(w, PairingCertificate(0, 5))
    with pytest.raises(ValueError):
        toda_symmetry(WeightTuple([0, 0], 1), PairingCertificate(0, 0))


@settings(max_examples=150, deadline=None)
@given(boundary_tuples())
def test_normalize_leaves_boundary(w):
    assert is_boundary(w)
    out, shift = normalize_weights(w)
    assert validate_weights(out) and not is_boundary(out)
    assert out.total == w.total + shift.sum_change
    # rotation plus m-shift: the residues of r*a_i + m*i are permuted
    res = sorted((w.r * x + w.m * i) % (w.r * w.m) for i, x in enumerate(w.a, 1))
    res2 = sorted((w.r * x + w.m * (i + shift.j)) % (w.r * w.m) for i, x in enumerate(out.a, 1))
    assert res == res2


@settings(max_examples=200, deadline=None)
@given(valid_tuples())
def test_stable_decomposition_invariants(w):
    d = stable_decomposition(w)
    assert w.r in d.S and w.r % d.r0 == 0
    assert all(s % d.r0 == 0 for s in d.S)
    assert (d.r0 * w.m) % w.r == 0
    assert all(((x + y - 1) % w.r) + 1 in d.S for x in d.S for y in d.S)
    assert d.j0 * d.r0 == w.r and d.m0 == F(w.m * d.r0, w.r)


@settings(max_examples=200, deadline=None)
@given(valid_tuples())
def test_pairing_invariants(w):
    for cert in find_pairing(w):
        assert 0 <= cert.k0 < w.r and cert.nu.denominator in (1, 2)
        assert refined_pairing_holds(w, cert)
        P = char_poly_from_phases(pairing_polynomial_phases(w, cert))
        assert P.conj() == P
        for i in range(1, w.r + 1):
            for j in range(1, w.r + 1):
                if i + j == w.r + 1 - cert.k0:
                    assert w.a[i - 1] + w.a[j - 1] == -cert.ell
                if i + j == 2 * w.r + 1 - cert.k0:
                    assert w.a[i - 1] + w.a[j - 1] == -cert.ell - w.m


@settings(max_examples=200, deadline=None)
@given(st.one_of(valid_tuples(), boundary_tuples()))
def test_block_sums_vanish(w):
    p = asymptotic_profile(w)
    blocks: dict = {}
    for x, k in zip(w.a, p.k):
        blocks.setdefault(x, 0)
        blocks[x] += k
    if p.boundary_case:
        # the two extreme blocks merge into one cyclic block
        ends = blocks.pop(w.a[0]) + (blocks.pop(w.a[-1]) if w.a[-1] != w.a[0] else 0)
        assert ends == 0
    assert all(v == 0 for v in blocks.values())
    if not p.boundary_case:
        for i, x in enumerate(w.a):
            same = [j for j in range(w.r) if w.a[j] == x]
            assert p.k[i] == len(same) - 2 * (same.index(i) + 1) + 1
