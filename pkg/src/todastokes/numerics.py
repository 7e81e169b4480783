"""Numerical transport for the explicit meromorphic connections.

A connection is given by a matrix G with ``nabla e = e G dz`` in a frame e.
A flat section s = e c then has coordinates obeying

    dc/dz = -G(z) c,

and transporting a fundamental matrix Y along a path z(t), t in [0, 1],
means integrating dY/dt = -G(z(t)) z'(t) Y.  This sign convention is used
everywhere in this module.

The integrator is a Dormand-Prince 5(4) pair with error control on the
propagated fifth-order solution.  The module also provides numerical
monodromy and a best-effort numerical Stokes factor computation that is
cross-checked against the exact Stokes data.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np

from .cyclotomic import char_poly_from_phases
from .weights import WeightTuple

__all__ = [
    "NumericFailure", "ConnectionSpec", "Segment", "PathSpec", "circle", "arc", "radial",
    "line", "connection_matrix", "integrate_path", "monodromy_numeric", "stokes_numeric",
    "MonodromyReport", "StokesReport", "raw_stokes_factor", "REALIZED_POSITIONS", "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-10


class NumericFailure(RuntimeError):
    """Integration or extraction failed; ``diagnostics`` holds details."""

    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


# CONNECTIONS ==========================================================================

def k_matrix(r: int, m: int, q: complex) -> np.ndarray:
    """K(r,m)(q): 1 at (j+1, j), q^m at (1, r)."""
    K = np.zeros((r, r), dtype=complex)
    for i in range(r - 1):
        K[i + 1, i] = 1.0
    K[0, r - 1] += q ** m
    return K


def upsilon(r: int) -> np.ndarray:
    idx = np.arange(1, r + 1)
    return np.exp(2j * np.pi * np.outer(idx, idx) / r)


@dataclass(frozen=True)
class ConnectionSpec:
    """One of the explicit connections.

    kind      matrix G (nabla e = e G dz)
    --------  -----------------------------------------------------------
    base      (K(r,1)(q) - diag a) / q,                       m = 1
    pullback  m (K(r,m)(q) - diag a) / q
    lambda_q  (-diag a + (m/lambda) K(r,m)(q)) / q
    lambda_dir (diag[1..r] + (r/m) diag a - (r/lambda) K(r,m)(q0)) / lambda,
               with lambda as the variable
    w_plane   r diag[tau^-1, ..., tau^-r] + B / w,
               B = -Upsilon^-1 (r diag a + diag[0..r-1]) Upsilon
    """

    kind: str
    r: int
    m: int
    a: tuple[Fraction, ...]
    lam: complex = 1.0
    q0: complex = 1.0

    KINDS = ("base", "pullback", "lambda_q", "lambda_dir", "w_plane")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown connection kind {self.kind!r}")
        if len(self.a) != self.r:
            raise ValueError("rank and weight count differ")
        if self.kind == "base" and self.m != 1:
            raise ValueError("the base connection has m = 1")
        if self.kind in ("lambda_q", "lambda_dir") and self.lam == 0:
            raise ValueError("lambda must be nonzero")

    @classmethod
    def from_weights(cls, kind: str, w: WeightTuple, **kw) -> "ConnectionSpec":
        m = 1 if kind == "base" else w.m
        return cls(kind, w.r, m, tuple(w.a), **kw)

    @property
    def diag_a(self) -> np.ndarray:
        return np.diag([float(x) for x in self.a]).astype(complex)

    @property
    def tau(self) -> complex:
        return cmath.exp(2j * math.pi / self.r)

    @property
    def B(self) -> np.ndarray:
        r = self.r
        U = upsilon(r)
        D = r * self.diag_a + np.diag(np.arange(r)).astype(complex)
        return -np.linalg.solve(U, D @ U)

    @property
    def Lambda(self) -> np.ndarray:
        return np.diag(self.tau ** -np.arange(1, self.r + 1))

    def irregular_values(self, w: complex) -> np.ndarray:
        return self.r * np.diag(self.Lambda) * w

    def matrix(self, z: complex) -> np.ndarray:
        if z == 0:
            raise ValueError("the connection has a pole at 0")
        r, m = self.r, self.m
        if self.kind in ("base", "pullback"):
            return m * (k_matrix(r, m, z) - self.diag_a) / z
        if self.kind == "lambda_q":
            return (-self.diag_a + (m / self.lam) * k_matrix(r, m, z)) / z
        if self.kind == "lambda_dir":
            D = np.diag(np.arange(1, r + 1)).astype(complex) + (r / m) * self.diag_a
            return (D - (r / z) * k_matrix(r, m, self.q0)) / z
        return r * self.Lambda + self.B / z


def connection_matrix(spec: ConnectionSpec, point: complex) -> np.ndarray:
    return spec.matrix(complex(point))


# PATHS ================================================================================

@dataclass(frozen=True)
class Segment:
    z: Callable[[float], complex]
    dz: Callable[[float], complex]
    start: complex
    end: complex
    label: str = ""


def arc(radius: float, theta0: float, theta1: float, center: complex = 0.0) -> Segment:
    d = theta1 - theta0
    z = lambda t: center + radius * cmath.exp(1j * (theta0 + d * t))
    dz = lambda t: 1j * d * radius * cmath.exp(1j * (theta0 + d * t))
    return Segment(z, dz, z(0.0), z(1.0), f"arc r={radius:g} {theta0:g}->{theta1:g}")


def circle(radius: float, theta0: float = 0.0, turns: int = 1) -> Segment:
    """Counter-clockwise loop (clockwise for negative turns) through radius*e^(i theta0)."""
    return arc(radius, theta0, theta0 + 2 * math.pi * turns)


def radial(theta: float, r0: float, r1: float) -> Segment:
    u = cmath.exp(1j * theta)
    z = lambda t: (r0 + (r1 - r0) * t) * u
    dz = lambda t: (r1 - r0) * u
    return Segment(z, dz, r0 * u, r1 * u, f"radial {theta:g} {r0:g}->{r1:g}")


def line(z0: complex, z1: complex) -> Segment:
    z = lambda t: z0 + (z1 - z0) * t
    dz = lambda t: z1 - z0
    return Segment(z, dz, z0, z1, "line")


@dataclass(frozen=True)
class PathSpec:
    segments: tuple[Segment, ...]
    rtol: float = DEFAULT_TOL
    atol: float = DEFAULT_TOL
    max_steps: int = 200_000
    fixed_steps: int | None = None  # fixed-step mode per segment (for order studies)

    @classmethod
    def of(cls, *segments: Segment, **kw) -> "PathSpec":
        return cls(tuple(segments), **kw)

    def reversed(self) -> "PathSpec":
        rev = []
        for s in reversed(self.segments):
            rev.append(Segment(lambda t, s=s: s.z(1.0 - t), lambda t, s=s: -s.dz(1.0 - t),
                               s.end, s.start, s.label + " reversed"))
        return PathSpec(tuple(rev), self.rtol, self.atol, self.max_steps, self.fixed_steps)

    def then(self, other: "PathSpec") -> "PathSpec":
        return PathSpec(self.segments + other.segments, self.rtol, self.atol,
                        self.max_steps, self.fixed_steps)


# DORMAND-PRINCE 5(4) ==================================================================

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))


@dataclass
class _Stats:
    accepted: int = 0
    rejected: int = 0
    evaluations: int = 0


def _dp_step(f, t, y, h, k1):
    ks = [k1]
    for i in range(1, 7):
        yi = y
        for a, k in zip(_A[i], ks):
            if a:
                yi = yi + (h * a) * k
        ks.append(f(t + _C[i] * h, yi))
    y5 = y
    for b, k in zip(_B5, ks):
        if b:
            y5 = y5 + (h * b) * k
    err = 0
    for e, k in zip(_E, ks):
        err = err + (h * e) * k
    return y5, err, ks[-1]


def _integrate_segment(seg: Segment, rhs_matrix, Y: np.ndarray, path: PathSpec, stats: _Stats):
    def f(t, y):
        stats.evaluations += 1
        return -(rhs_matrix(seg.z(t)) * seg.dz(t)) @ y

    t, y = 0.0, Y
    k1 = f(t, y)
    if path.fixed_steps:
        h = 1.0 / path.fixed_steps
        for _ in range(path.fixed_steps):
            y, _, k1 = _dp_step(f, t, y, h, k1)
            t += h
            stats.accepted += 1
        return y
    scale0 = path.atol + path.rtol * np.abs(y)
    d0 = np.max(np.abs(y) / scale0)
    d1 = np.max(np.abs(k1) / scale0)
    h = 0.01 if d0 < 1e-5 or d1 < 1e-5 else min(0.1, 0.01 * d0 / d1)
    steps = 0
    while t < 1.0:
        if steps >= path.max_steps:
            raise NumericFailure("step budget exhausted", t=t, h=h, segment=seg.label)
        steps += 1
        h = min(h, 1.0 - t)
        y_new, err, k_last = _dp_step(f, t, y, h, k1)
        scale = path.atol + path.rtol * np.maximum(np.abs(y), np.abs(y_new))
        en = float(np.max(np.abs(err) / scale))
        if not math.isfinite(en):
            raise NumericFailure("non-finite values during integration", t=t, h=h, segment=seg.label)
        if en <= 1.0:
            t = 1.0 if 1.0 - (t + h) < 1e-15 else t + h
            y, k1 = y_new, k_last
            stats.accepted += 1
            fac = 5.0 if en == 0 else min(5.0, max(0.2, 0.9 * en ** -0.2))
        else:
            stats.rejected += 1
            fac = max(0.2, 0.9 * en ** -0.2)
        h *= fac
        if h < 1e-14:
            raise NumericFailure("step size underflow", t=t, h=h, segment=seg.label)
    return y


def integrate_path(spec: ConnectionSpec | Callable[[complex], np.ndarray], path: PathSpec,
                   start: np.ndarray | None = None, stats: dict | None = None) -> np.ndarray:
    """Transport a fundamental matrix (columns are coordinate vectors) along ``path``."""
    G = spec.matrix if isinstance(spec, ConnectionSpec) else spec
    first = path.segments[0].start
    r = G(first).shape[0]
    Y = np.eye(r, dtype=complex) if start is None else np.array(start, dtype=complex)
    st = _Stats()
    for seg in path.segments:
        Y = _integrate_segment(seg, G, Y, path, st)
    if stats is not None:
        stats.update(accepted=st.accepted, rejected=st.rejected, evaluations=st.evaluations)
    return Y


# MONODROMY ============================================================================

@dataclass(frozen=True)
class MonodromyReport:
    M_num: np.ndarray
    eigenvalues: np.ndarray
    charpoly: np.ndarray            # low to high, numeric
    exact_plus: np.ndarray          # prod (T - exp(+2 pi i c_j))
    exact_minus: np.ndarray         # prod (T - exp(-2 pi i c_j))
    error_plus: float
    error_minus: float
    orientation_match: str          # "plus", "minus", "both", "none"
    steps: int


def _charpoly_numeric(M: np.ndarray) -> np.ndarray:
    return np.poly(M)[::-1]


def monodromy_phases(spec: ConnectionSpec) -> list[Fraction]:
    """Local exponents at 0 of the coordinate system: c ~ z^(s a_j)."""
    if spec.kind == "base":
        return list(spec.a)
    if spec.kind == "pullback":
        return [spec.m * x for x in spec.a]
    if spec.kind == "lambda_q":
        return list(spec.a)
    raise ValueError(f"no monodromy around 0 for kind {spec.kind!r}")


def monodromy_numeric(spec: ConnectionSpec, basepoint: complex = 1.0, tol: float = DEFAULT_TOL,
                      match_tol: float = 1e-6) -> MonodromyReport:
    """Transport once counter-clockwise around 0 through ``basepoint``."""
    rho, theta = abs(basepoint), cmath.phase(basepoint)
    if rho == 0:
        raise ValueError("basepoint must avoid the singularity")
    stats: dict = {}
    M = integrate_path(spec, PathSpec.of(circle(rho, theta), rtol=tol, atol=tol), stats=stats)
    cp = _charpoly_numeric(M)
    phases = monodromy_phases(spec)
    plus = np.array(char_poly_from_phases(phases).complex_coeffs())
    minus = np.array(char_poly_from_phases([-c for c in phases]).complex_coeffs())
    ep, em = float(np.max(np.abs(cp - plus))), float(np.max(np.abs(cp - minus)))
    hits = (ep < match_tol, em < match_tol)
    orient = {(True, True): "both", (True, False): "plus", (False, True): "minus"}.get(hits, "none")
    return MonodromyReport(M, np.linalg.eigvals(M), cp, plus, minus, ep, em, orient,
                           stats.get("accepted", 0))


# NUMERIC STOKES =======================================================================
#
# Work in the w-plane (q = w^r).  Canonical sections are seeded on a ray of S1
# from the optimally truncated formal solution
#     F(w) exp(-r Lambda w - b log w),  F = sum F_k w^-k,
# normalized like the rotation law (tau^-1)^* x_S1 = x_S2 C1, and carried to
# |w| = 1.  On the comparison ray inside S1 n S2 the frame of S2 is
# x_S1(tau^-1 w) C1^-1, so A = C1 X(w_B)^-1 X(w_A) with w_B = tau^-1 w_A.
#
# The truncation error of a dominant seed, of relative size exp(-|a_k - a_j|),
# turns into an admixture exp(-(|a_k - a_j| - Re(a_k - a_j))) of the recessive
# section, so the raw factor converges like exp(-kappa W).  Large seeds span
# exp(spread) in magnitude, beyond double precision; transport therefore runs
# in mpmath with a Taylor method, at a precision sized from the spread.

_SEED_RAY = {2: 0.5, 3: 1 / 3}          # in units of pi
_COMPARE_RAY = {2: 1.0, 3: 5 / 6}
# 0-based positions of the entries of A that are nonzero on the comparison ray,
# and the factors that turn them into (alpha, beta) through
# charpoly(C1^-1 A) = T^r - sum alpha_j T^(r-2j) - sum beta_j T^(r-2j+1) - omega^-1.
REALIZED_POSITIONS = {
    2: {"beta": [((0, 1), "omega_inv")], "alpha": []},
    3: {"beta": [((2, 1), "one")], "alpha": [((2, 0), "one")]},
}


@dataclass(frozen=True)
class StokesReport:
    beta_hat: tuple[complex, ...]
    alpha_hat: tuple[complex, ...]
    error_bar: float
    raw: dict                      # seed radius -> raw Stokes factor (complex r x r)
    kappa: float                   # predicted contamination rate
    off_pattern: float             # largest entry outside the realized positions (not asserted)
    path_defect: float             # X(w_A) against X(w_B) carried along the arc, relative
    dps: int
    best_effort: bool

    def as_dict(self) -> dict:
        def cx(z):
            return [z.real, z.imag]
        return {
            "approx": True,
            "beta_hat": [cx(z) for z in self.beta_hat],
            "alpha_hat": [cx(z) for z in self.alpha_hat],
            "error_bar": self.error_bar,
            "kappa": self.kappa,
            "off_pattern": self.off_pattern,
            "path_defect": self.path_defect,
            "dps": self.dps,
            "best_effort": self.best_effort,
        }


class _WPlane:
    """The w-plane system c' = -(r Lambda + B/w) c at working precision."""

    def __init__(self, w: WeightTuple, dps: int):
        self.ctx = ctx = mpmath.mp.clone()
        ctx.dps = dps
        r = self.r = w.r
        a = [ctx.mpf(x.numerator) / x.denominator for x in w.a]
        tau = ctx.expjpi(ctx.mpf(2) / r)
        self.tau = tau
        self.lam = [tau ** -(i + 1) for i in range(r)]
        D = [r * a[k] + k for k in range(r)]
        self.B = [[-ctx.fsum(tau ** (-(i + 1) * (k + 1)) * D[k] * tau ** ((k + 1) * (j + 1))
                             for k in range(r)) / r for j in range(r)] for i in range(r)]
        self.b = -ctx.fsum(a) - ctx.mpf(r - 1) / 2
        self.omega = ctx.expjpi(2 * self.b)
        self.eps = ctx.mpf(10) ** (-dps + 3)

    def formal(self, order: int) -> list:
        ctx, r, lam, B = self.ctx, self.r, self.lam, self.B
        Fs = [[[ctx.mpc(i == j) for j in range(r)] for i in range(r)]]
        for k in range(order):
            Fk = Fs[-1]
            R = [[(self.b + k) * Fk[i][j] - ctx.fsum(B[i][t] * Fk[t][j] for t in range(r))
                  for j in range(r)] for i in range(r)]
            Fn = [[R[i][j] / (r * (lam[i] - lam[j])) if i != j else ctx.mpc(0)
                   for j in range(r)] for i in range(r)]
            for i in range(r):
                Fn[i][i] = ctx.fsum(B[i][j] * Fn[j][i] for j in range(r) if j != i) / (k + 1)
            Fs.append(Fn)
        return Fs

    def seed(self, W: float, phi) -> list:
        """Frame x_1..x_r on the ray arg w = phi at |w| = W."""
        ctx, r, lam = self.ctx, self.r, self.lam
        Fs = self.formal(int(6 * W) + 20)
        ws = W * ctx.expj(phi)
        logw = ctx.log(W) + 1j * phi
        twist = self.tau ** -1 * ctx.expjpi(2 * self.b / r)
        P = [[None] * r for _ in range(r)]
        for j in range(r):
            terms = [[Fk[i][j] * ws ** -k for i in range(r)] for k, Fk in enumerate(Fs)]
            norms = [max(abs(x) for x in t) for t in terms]
            cut = max(1, min(range(len(norms)), key=norms.__getitem__))  # optimal truncation
            f = twist ** j * ctx.exp(-r * lam[j] * ws - self.b * logw)
            for i in range(r):
                P[i][j] = ctx.fsum(t[i] for t in terms[:cut]) * f
        # x_j = y_(j - 1 - r//2) with y_j = omega p_j for 1 <= j <= (r-1)//2, indices mod r
        h, hm = r // 2, (r - 1) // 2
        X = [[None] * r for _ in range(r)]
        for jx in range(1, r + 1):
            jy = (jx - h - 2) % r + 1
            for i in range(r):
                X[i][jx - 1] = P[i][jy - 1] * (self.omega if jy <= hm else 1)
        return X

    def _taylor_step(self, C, w0, h):
        # (w0 + h) c' = -(r Lambda (w0 + h) + B) c, expanded in h
        ctx, r, lam, B = self.ctx, self.r, self.lam, self.B
        ncol = len(C[0])
        prev = [[ctx.mpc(0)] * ncol for _ in range(r)]
        cur, out = C, [row[:] for row in C]
        hp, n, quiet = ctx.mpc(1), 0, 0
        while quiet < 2:
            nxt = [[-((n + r * lam[i] * w0) * cur[i][j]
                      + ctx.fsum(B[i][t] * cur[t][j] for t in range(r))
                      + r * lam[i] * prev[i][j]) / (w0 * (n + 1))
                    for j in range(ncol)] for i in range(r)]
            n += 1
            hp *= h
            big = 0
            for i in range(r):
                for j in range(ncol):
                    t = nxt[i][j] * hp
                    out[i][j] += t
                    big = max(big, abs(t))
            prev, cur = cur, nxt
            quiet = quiet + 1 if big < self.eps else 0
            if n > 600:
                raise NumericFailure("Taylor series failed to converge", w0=complex(w0), h=complex(h))
        return out

    def transport(self, C, points):
        for w0, w1 in zip(points, points[1:]):
            C = self._taylor_step(C, w0, w1 - w0)
        return C

    def radial_points(self, phi, r0: float, r1: float) -> list:
        u = self.ctx.expj(phi)
        pts, x = [self.ctx.mpf(r0)], self.ctx.mpf(r0)
        while x > r1:
            x = max(self.ctx.mpf(r1), x - min(1, x * 0.4))
            pts.append(x)
        return [p * u for p in pts]

    def arc_points(self, radius: float, t0, t1) -> list:
        n = max(2, int(abs(float(t1 - t0)) / 0.3) + 1)
        return [radius * self.ctx.expj(t0 + (t1 - t0) * k / n) for k in range(n + 1)]

    def e_coordinates(self, X, w) -> np.ndarray:
        r, tau = self.r, self.tau
        return np.array([[complex(self.ctx.fsum(w ** -i * tau ** ((i + 1) * (k + 1)) * X[k][j]
                                                for k in range(r)))
                          for j in range(r)] for i in range(r)])


def _seed_values(w: WeightTuple, W: float) -> np.ndarray:
    """Irregular values r tau^-j w at the seed point."""
    ray = cmath.exp(1j * math.pi * _SEED_RAY[w.r])
    return w.r * W * ray * np.exp(-2j * np.pi * np.arange(1, w.r + 1) / w.r)


def _kappa(w: WeightTuple) -> float:
    vals = _seed_values(w, 1.0)
    diffs = (vals[:, None] - vals[None, :]).ravel()
    return float(min(abs(d) - d.real for d in diffs if abs(d) > 1e-12))


def _spread(w: WeightTuple, W: float) -> float:
    return float(np.ptp(_seed_values(w, W).real))


def raw_stokes_factor(w: WeightTuple, W: float, extra_digits: int = 15, check_path: bool = False):
    """Raw Stokes factor from seeds at |w| = W; returns (A, path_defect, dps, omega)."""
    dps = int(_spread(w, W) / math.log(10)) + extra_digits
    sysw = _WPlane(w, dps)
    ctx, r = sysw.ctx, w.r
    phi = ctx.pi * ctx.mpf(_SEED_RAY[r])
    psiA = ctx.pi * ctx.mpf(_COMPARE_RAY[r])
    psiB = psiA - 2 * ctx.pi / r
    X = sysw.transport(sysw.seed(W, phi), sysw.radial_points(phi, W, 1))
    XA = sysw.transport(X, sysw.arc_points(1, phi, psiA))
    XB = sysw.transport(X, sysw.arc_points(1, phi, psiB))
    wA, wB = ctx.expj(psiA), ctx.expj(psiB)
    EA, EB = sysw.e_coordinates(XA, wA), sysw.e_coordinates(XB, wB)
    omega = complex(sysw.omega)
    C1 = np.diag(np.ones(r - 1, dtype=complex), -1)
    C1[0, r - 1] = omega
    A = C1 @ np.linalg.solve(EB, EA)
    defect = 0.0
    if check_path:
        XBA = sysw.transport(XB, sysw.arc_points(1, psiB, psiA))
        E2 = sysw.e_coordinates(XBA, wA)
        defect = float(np.linalg.norm(E2 - EA) / np.linalg.norm(EA))
    return A, defect, dps, omega


def stokes_numeric(w: WeightTuple, seed_radius: float = 8.0, tol: float = 1e-3) -> StokesReport:
    """Numerical Stokes factor of the pulled-back base connection, r in {2, 3}.

    The raw factor is computed from seeds at radii W and 2W and extrapolated
    at the predicted contamination rate; alpha, beta are read at the positions
    that are nonzero on the comparison ray.  ``tol`` is the error bar above
    which the result is flagged as best effort.
    """
    if w.r not in REALIZED_POSITIONS:
        raise ValueError("numerical Stokes factors are supported for r = 2, 3")
    if w.m != 1:
        raise ValueError("numerical Stokes factors need m = 1")
    W1, W2 = float(seed_radius), 2.0 * float(seed_radius)
    A1, _, _, omega = raw_stokes_factor(w, W1)
    A2, defect, dps, _ = raw_stokes_factor(w, W2, check_path=True)
    kappa = _kappa(w)
    rho = math.exp(-kappa * (W2 - W1))
    A = (A2 - rho * A1) / (1.0 - rho)
    factor = {"one": 1.0, "omega_inv": 1.0 / omega}
    realized = REALIZED_POSITIONS[w.r]
    beta = tuple(complex(A[p] * factor[f]) for p, f in realized["beta"])
    alpha = tuple(complex(A[p] * factor[f]) for p, f in realized["alpha"])
    mask = ~np.eye(w.r, dtype=bool)
    for p, _ in realized["beta"] + realized["alpha"]:
        mask[p] = False
    off = float(np.max(np.abs(A[mask]))) if mask.any() else 0.0
    diag = float(np.max(np.abs(np.diag(A) - 1)))
    # the off-pattern entries vanish exactly, so their size measures what is left of the contamination
    err = max(float(np.max(np.abs(A - A2))), off, diag)
    finite = bool(np.all(np.isfinite(A)))
    return StokesReport(beta, alpha, err, {W1: A1, W2: A2}, kappa, off, defect, dps,
                        best_effort=not finite or err > tol)
