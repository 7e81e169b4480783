"""Radial Toda lattice with opposite sign as a two-point boundary value problem.

For functions of s = log|q| alone the lattice becomes

    w_i'' = 2 r^2 e^(2s) (e^(2(w_i - w_(i-1))) - e^(2(w_(i+1) - w_i))),

with cyclic indices.  The right-hand side only involves differences, so
adding one constant to every w_i maps solutions to solutions; it sums to zero
over i, so sum(w_i) is affine in s.  We impose the slopes known from the
asymptotics at both ends and pin the shift with the value of sum(w_i) at the
midpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .numerics import NumericFailure
from .weights import (WeightTuple, asymptotic_profile, find_pairing, toda_symmetry,
                      validate_weights)

__all__ = [
    "radial_rhs", "BoundaryData", "boundary_data", "TodaProblem", "TodaSolution",
    "solve_bvp", "verify_solution", "TodaReport", "residual", "jacobian",
    "finite_difference_jacobian", "laplacian_check", "self_convergence", "domain_drift",
    "reflect_solution",
]

_EXP_LIMIT = 700.0


def _log_diff_exp(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """e^x - e^y without intermediate overflow (may still overflow in the result)."""
    hi = np.maximum(x, y)
    sign = np.where(x >= y, 1.0, -1.0)
    with np.errstate(over="ignore", divide="ignore"):
        return sign * np.exp(hi + np.log1p(-np.exp(-np.abs(x - y))))


def radial_rhs(w, s, r: int | None = None, return_flag: bool = False):
    """Second derivatives w_i'' for values w (shape (r,) or (r, n)) at s."""
    w = np.asarray(w, dtype=float)
    if r is None:
        r = w.shape[0]
    if w.shape[0] != r:
        raise ValueError("first axis of w must have length r")
    s = np.asarray(s, dtype=float)
    d_lo = w - np.roll(w, 1, axis=0)     # w_i - w_(i-1)
    d_hi = np.roll(w, -1, axis=0) - w    # w_(i+1) - w_i
    x, y = 2 * s + 2 * d_lo, 2 * s + 2 * d_hi
    flagged = bool(np.any(np.maximum(x, y) > _EXP_LIMIT))
    if flagged:
        out = 2 * r * r * _log_diff_exp(x, y)
    else:
        out = 2 * r * r * (np.exp(x) - np.exp(y))
    return (out, flagged) if return_flag else out


# BOUNDARY DATA ========================================================================

@dataclass(frozen=True)
class BoundaryData:
    slope_min: tuple[float, ...]
    slope_max: tuple[float, ...]
    s_mid: float
    sum_slope: Fraction
    sum_value: float
    k: tuple[int, ...]


def boundary_data(w: WeightTuple, s_min: float, s_max: float) -> BoundaryData:
    if w.m != w.r:
        raise ValueError("the Toda problem needs m = r")
    prof = asymptotic_profile(w)
    r = w.r
    lead = [-(w.a[i] + i) for i in range(r)]
    slope_min = tuple(float(lead[i]) + prof.k[i] / (2.0 * s_min) for i in range(r))
    at_inf = -w.total / r - Fraction(r - 1, 2)
    s_mid = 0.5 * (s_min + s_max)
    sum_slope = -Fraction(r * (r - 1), 2) - w.total
    return BoundaryData(slope_min, tuple(float(at_inf) for _ in range(r)), s_mid,
                        sum_slope, float(sum_slope) * s_mid, tuple(prof.k))


# PROBLEM ==============================================================================

@dataclass(frozen=True)
class TodaProblem:
    weights: WeightTuple
    s_min: float = -10.0
    s_max: float = 2.0
    n: int = 2000

    def __post_init__(self):
        if not validate_weights(self.weights):
            raise ValueError(f"weights {self.weights} are not in R_{{r,m}}")
        if self.weights.m != self.weights.r:
            raise ValueError("the Toda problem needs m = r")
        if not self.s_min < self.s_max:
            raise ValueError("need s_min < s_max")
        if self.n < 64:
            raise ValueError("grid needs at least 64 points")

    @property
    def r(self) -> int:
        return self.weights.r

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.s_min, self.s_max, self.n)

    @property
    def h(self) -> float:
        return (self.s_max - self.s_min) / (self.n - 1)

    @property
    def mid(self) -> int:
        return (self.n - 1) // 2

    @property
    def bc(self) -> BoundaryData:
        bd = boundary_data(self.weights, self.s_min, self.s_max)
        s_mid = float(self.grid[self.mid])
        return BoundaryData(bd.slope_min, bd.slope_max, s_mid, bd.sum_slope,
                            float(bd.sum_slope) * s_mid, bd.k)


@dataclass
class TodaSolution:
    problem: TodaProblem
    s: np.ndarray
    w: np.ndarray                      # shape (r, n)
    residual_norm: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)
    overflow_flag: bool = False


# DISCRETIZATION =======================================================================
# Unknown (i, k) sits at position k*r + i, which keeps the Jacobian banded.

def _interior_second_difference(W: np.ndarray, h: float) -> np.ndarray:
    return (W[:, :-2] - 2 * W[:, 1:-1] + W[:, 2:]) / (h * h)


def residual(problem: TodaProblem, W: np.ndarray, remove_kernel: bool = True) -> np.ndarray:
    """Residual array of shape (r, n); row (0, mid) is the normalization when requested."""
    r, h, s = problem.r, problem.h, problem.grid
    bc = problem.bc
    F = np.empty_like(W)
    rhs, _ = radial_rhs(W[:, 1:-1], s[1:-1], r, return_flag=True)
    F[:, 1:-1] = _interior_second_difference(W, h) - rhs
    F[:, 0] = (-3 * W[:, 0] + 4 * W[:, 1] - W[:, 2]) / (2 * h) - np.array(bc.slope_min)
    F[:, -1] = (3 * W[:, -1] - 4 * W[:, -2] + W[:, -3]) / (2 * h) - np.array(bc.slope_max)
    if remove_kernel:
        F[0, problem.mid] = W[:, problem.mid].sum() - bc.sum_value
    return F


def jacobian(problem: TodaProblem, W: np.ndarray, remove_kernel: bool = True) -> sp.csc_matrix:
    r, n, h, s = problem.r, problem.n, problem.h, problem.grid
    rows, cols, vals = [], [], []

    def put(ri, ci, v):
        rows.append(np.asarray(ri).ravel())
        cols.append(np.asarray(ci).ravel())
        vals.append(np.broadcast_to(v, np.shape(ri)).ravel())

    idx = np.arange(n * r).reshape(n, r).T        # idx[i, k]
    ks = np.arange(1, n - 1)
    # second differences
    for off, c in ((-1, 1.0), (0, -2.0), (1, 1.0)):
        put(idx[:, ks], idx[:, ks + off], c / (h * h))
    # minus the derivative of the right-hand side
    if r > 1:
        Wi = W[:, ks]
        e_lo = np.exp(2 * s[ks] + 2 * (Wi - np.roll(Wi, 1, axis=0)))
        e_hi = np.exp(2 * s[ks] + 2 * (np.roll(Wi, -1, axis=0) - Wi))
        c = 4.0 * r * r
        prev = np.roll(np.arange(r), 1)
        nxt = np.roll(np.arange(r), -1)
        put(idx[:, ks], idx[:, ks], -c * (e_lo + e_hi))
        put(idx[:, ks], idx[prev][:, ks], c * e_lo)
        put(idx[:, ks], idx[nxt][:, ks], c * e_hi)
    # one-sided Neumann closures
    for k, coef in ((0, (-3.0, 4.0, -1.0)), (n - 1, (3.0, -4.0, 1.0))):
        step = 1 if k == 0 else -1
        for j, cf in enumerate(coef):
            put(idx[:, k], idx[:, k + step * j], cf / (2 * h))
    J = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n * r, n * r))
    if remove_kernel:
        row = idx[0, problem.mid]
        J = J.tolil()
        J.rows[row] = []
        J.data[row] = []
        for i in range(r):
            J[row, idx[i, problem.mid]] = 1.0
        J = J.tocsr()
    return J.tocsc()


def _flatten(W: np.ndarray) -> np.ndarray:
    return W.T.ravel()


def _unflatten(x: np.ndarray, r: int) -> np.ndarray:
    return x.reshape(-1, r).T


def finite_difference_jacobian(problem: TodaProblem, W: np.ndarray, step: float = 1e-6,
                               remove_kernel: bool = True) -> np.ndarray:
    """Dense central-difference Jacobian (for checks on small grids)."""
    x0 = _flatten(W)
    N = x0.size
    J = np.empty((N, N))
    for j in range(N):
        e = np.zeros(N)
        e[j] = step
        fp = _flatten(residual(problem, _unflatten(x0 + e, problem.r), remove_kernel))
        fm = _flatten(residual(problem, _unflatten(x0 - e, problem.r), remove_kernel))
        J[:, j] = (fp - fm) / (2 * step)
    return J


# SOLVER ===============================================================================

def initial_guess(problem: TodaProblem, width: float = 1.0) -> np.ndarray:
    """Blend the line of slopes at s_min into the common line at s_max around s = 0."""
    s = problem.grid
    w = problem.weights
    sigma = float(-w.total / w.r - Fraction(w.r - 1, 2))
    lead = np.array([float(-(w.a[i] + i)) for i in range(w.r)])
    gate = 0.5 * (1 - np.tanh(s / (2 * width)))       # 1 on the left, 0 on the right
    # the leading slopes sum to r*sigma, so every blend keeps the sum exact
    return sigma * s[None, :] + (lead - sigma)[:, None] * (s * gate)[None, :]


def _finish(problem, W, norm, iterations, history) -> TodaSolution:
    _, flagged = radial_rhs(W, problem.grid, problem.r, return_flag=True)
    return TodaSolution(problem, problem.grid, W, norm, iterations, True, history, flagged)


def solve_bvp(problem: TodaProblem, tol: float = 1e-9, max_iter: int = 100,
              initial: np.ndarray | None = None) -> TodaSolution:
    r = problem.r
    W = initial_guess(problem) if initial is None else np.array(initial, dtype=float)
    F = residual(problem, W)
    norm = float(np.max(np.abs(F)))
    history = [norm]
    for it in range(1, max_iter + 1):
        if norm < tol:
            return _finish(problem, W, norm, it - 1, history)
        J = jacobian(problem, W)
        try:
            dx = spla.spsolve(J, -_flatten(F))
        except RuntimeError as exc:
            raise NumericFailure("singular Jacobian", iteration=it, residual=norm) from exc
        if not np.all(np.isfinite(dx)):
            raise NumericFailure("singular Jacobian", iteration=it, residual=norm)
        D = _unflatten(dx, r)
        lam = 1.0
        while True:
            trial = W + lam * D
            with np.errstate(over="ignore", invalid="ignore"):
                Ft = residual(problem, trial)
            tn = float(np.max(np.abs(Ft)))
            if np.isfinite(tn) and tn < (1 - 1e-4 * lam) * norm or lam < 1e-4:
                break
            lam *= 0.5
        if not np.isfinite(tn):
            raise NumericFailure("residual overflow", iteration=it, residual=norm)
        W, F, norm = trial, Ft, tn
        history.append(norm)
    if norm < tol:
        return _finish(problem, W, norm, max_iter, history)
    raise NumericFailure("Newton iteration did not converge", residual=norm, history=history)


# VERIFICATION =========================================================================

@dataclass
class TodaReport:
    sum_deviation: float
    symmetry: list                     # (i, j, slope, max deviation)
    slopes_min: list                   # (measured, expected, relative error)
    slopes_max: list
    loglog: list                       # (fitted coefficient, k_i/2)

    @property
    def max_symmetry_deviation(self) -> float:
        return max((d for *_, d in self.symmetry), default=0.0)

    @property
    def max_slope_error(self) -> float:
        return max(e for *_, e in self.slopes_min + self.slopes_max)

    def as_dict(self) -> dict:
        return {
            "approx": True,
            "sum_deviation": self.sum_deviation,
            "symmetry": [{"i": i, "j": j, "slope": str(c), "deviation": d}
                         for i, j, c, d in self.symmetry],
            "slopes_min": [{"measured": m, "expected": e, "rel_error": x} for m, e, x in self.slopes_min],
            "slopes_max": [{"measured": m, "expected": e, "rel_error": x} for m, e, x in self.slopes_max],
            "loglog": [{"fitted": f, "expected": e} for f, e in self.loglog],
        }


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-12) if b else abs(a)


def _end_slope(w_row: np.ndarray, s: np.ndarray, span: float, left: bool) -> float:
    """Least-squares slope over a window of width ``span`` at one end."""
    sel = s <= s[0] + span if left else s >= s[-1] - span
    return float(np.polyfit(s[sel], w_row[sel], 1)[0])


def verify_solution(sol: TodaSolution, w: WeightTuple | None = None,
                    fit_window: tuple[float, float] | None = None,
                    slope_window: float = 0.25) -> TodaReport:
    pb = sol.problem
    w = pb.weights if w is None else w
    s, W = sol.s, sol.w
    bc = boundary_data(w, pb.s_min, pb.s_max)
    sum_dev = float(np.max(np.abs(W.sum(axis=0) - float(bc.sum_slope) * s)))
    sym = []
    seen = set()
    for cert in find_pairing(w):
        for i, j, c in toda_symmetry(w, cert):
            if (i, j, c) in seen:
                continue
            seen.add((i, j, c))
            dev = float(np.max(np.abs(W[i - 1] + W[j - 1] - c * s)))
            sym.append((i, j, c, dev))
    # slopes are measured by a least-squares fit over an end window, not by the closure
    span = max(slope_window, 8 * pb.h)
    slopes_min = []
    slopes_max = []
    for i in range(w.r):
        m0 = _end_slope(W[i], s, span, left=True)
        m1 = _end_slope(W[i], s, span, left=False)
        e0 = -(float(w.a[i]) + i) + bc.k[i] / (2 * s[0])
        e1 = bc.slope_max[i]
        slopes_min.append((m0, e0, _rel(m0, e0)))
        slopes_max.append((m1, e1, _rel(m1, e1)))
    lo, hi = fit_window if fit_window else (pb.s_min, pb.s_min / 2)
    sel = (s >= lo) & (s <= hi)
    basis = np.vstack([np.log(-s[sel]), np.ones(sel.sum())]).T
    loglog = []
    for i in range(w.r):
        y = W[i, sel] + (float(w.a[i]) + i) * s[sel]
        coef = np.linalg.lstsq(basis, y, rcond=None)[0]
        loglog.append((float(coef[0]), bc.k[i] / 2))
    return TodaReport(sum_dev, sym, slopes_min, slopes_max, loglog)


# STUDIES ==============================================================================

def self_convergence(w: WeightTuple, s_min: float = -10.0, s_max: float = 2.0, n: int = 501,
                     tol: float = 1e-10) -> dict:
    """Defects on nested grids n, 2n-1, 4n-3; the ratio is about 4 for second order."""
    sols = []
    for level in range(3):
        m = (n - 1) * 2 ** level + 1
        sols.append(solve_bvp(TodaProblem(w, s_min, s_max, m), tol=tol))
    coarse = [sols[0].w, sols[1].w[:, ::2], sols[2].w[:, ::4]]
    d1 = float(np.max(np.abs(coarse[0] - coarse[1])))
    d2 = float(np.max(np.abs(coarse[1] - coarse[2])))
    return {"defects": [d1, d2], "ratio": d1 / d2 if d2 else math.inf,
            "order": math.log2(d1 / d2) if d2 and d1 else math.inf, "approx": True}


def domain_drift(w: WeightTuple, s_min: float = -10.0, s_max: float = 2.0, n: int = 1201,
                 extend: tuple[float, float] = (2.0, 1.0), tol: float = 1e-10) -> dict:
    """Re-solve on an enlarged domain and compare on the original interval."""
    h = (s_max - s_min) / (n - 1)
    base = solve_bvp(TodaProblem(w, s_min, s_max, n), tol=tol)
    lo = int(round(extend[0] / h))
    hi = int(round(extend[1] / h))
    big = solve_bvp(TodaProblem(w, s_min - lo * h, s_max + hi * h, n + lo + hi), tol=tol)
    sub = big.w[:, lo:lo + n]
    diff = sub - base.w
    # the interior of the interval is insensitive to the ends; report both
    core = slice(n // 4, 3 * n // 4)
    return {"max_drift": float(np.max(np.abs(diff))),
            "core_drift": float(np.max(np.abs(diff[:, core]))), "approx": True}


def reflect_solution(sol: TodaSolution) -> np.ndarray:
    """-w_(r+1-i) - (r-1) s, which solves the problem for the negated weights."""
    r = sol.problem.r
    return -sol.w[::-1] - (r - 1) * sol.s[None, :]


def laplacian_check(r: int = 2, radii: tuple[float, float] = (1.0, 2.0), sizes=(81, 161)) -> dict:
    """Compare the radial reduction with a five-point Laplacian of the planar equation.

    A manufactured radial field w_i(|q|) is sampled on a Cartesian grid over an
    annulus; 2 dbar d w = (1/2) Laplacian w is evaluated with the five-point
    stencil and compared with (1/2) e^(-2s) w_i''(s).  The error should fall
    by about 4 when the mesh is halved.
    """
    def field_(rad):
        s = np.log(rad)
        return np.stack([np.sin((i + 1) * s) + 0.3 * (i + 1) * s * s for i in range(r)])

    def radial_second(s):
        return np.stack([-(i + 1) ** 2 * np.sin((i + 1) * s) + 0.6 * (i + 1) for i in range(r)])

    errs = []
    for N in sizes:
        L = radii[1] + 0.1
        xs = np.linspace(-L, L, N)
        h = xs[1] - xs[0]
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        R = np.hypot(X, Y)
        with np.errstate(divide="ignore"):
            U = field_(np.where(R > 0, R, 1.0))
        lap = (U[:, 2:, 1:-1] + U[:, :-2, 1:-1] + U[:, 1:-1, 2:] + U[:, 1:-1, :-2]
               - 4 * U[:, 1:-1, 1:-1]) / (h * h)
        Rc = R[1:-1, 1:-1]
        mask = (Rc > radii[0]) & (Rc < radii[1])
        s = np.log(Rc[mask])
        lhs = 0.5 * lap[:, mask]
        rhs = 0.5 * np.exp(-2 * s) * radial_second(s)
        errs.append(float(np.max(np.abs(lhs - rhs))))
    return {"errors": errs, "ratio": errs[0] / errs[1], "approx": True}
