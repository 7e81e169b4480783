"""Command-line front end: ``toda <subcommand> ...``.

Exit codes: 0 when the analysis completed (whatever the verdicts), 2 for
invalid input, 3 for numeric failure.  JSON output is key-sorted; exact values
are strings, numeric blocks carry ``"approx": true``.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .cyclotomic import CycNumber, CycPolynomial, format_poly
from .integrality import (gamma_decision, prime_oracle, pullback_check, r2_exceptional,
                          z_structure_base)
from .numerics import (DEFAULT_TOL, ConnectionSpec, NumericFailure, monodromy_numeric,
                       stokes_numeric)
from .stokes import build_system, rationality_transfer
from .toda import TodaProblem, solve_bvp, verify_solution
from .weights import (WeightTuple, asymptotic_profile, find_pairing, is_boundary,
                      normalize_weights, refined_pairing_holds, stable_decomposition,
                      toda_symmetry, validate_weights)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


class InputError(ValueError):
    pass


# SERIALIZATION ========================================================================

def exact(x):
    """JSON form of an exact value."""
    if isinstance(x, CycNumber):
        out = x.to_json()
        out["text"] = str(x)
        return out
    if isinstance(x, CycPolynomial):
        return {"coeffs": [exact(c) for c in x.coeffs], "text": str(x)}
    if isinstance(x, (Fraction, int)) and not isinstance(x, bool):
        return str(Fraction(x))
    if isinstance(x, (list, tuple)):
        return [exact(v) for v in x]
    return x


def cx(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def cmat(M) -> list:
    return [[cx(v) for v in row] for row in np.asarray(M)]


def dump_json(data: dict, path: str | None) -> str:
    text = json.dumps(data, sort_keys=True, indent=2)
    if path:
        Path(path).write_text(text + "\n")
    return text


# INPUT ================================================================================

def tolerance(default: float = DEFAULT_TOL) -> float:
    raw = os.environ.get("TODA_TOL")
    if raw is None:
        return default
    try:
        tol = float(raw)
    except ValueError:
        raise InputError(f"TODA_TOL={raw!r} is not a number")
    if not tol > 0:
        raise InputError("TODA_TOL must be positive")
    return tol


def parse_weights(args) -> WeightTuple:
    if not args.weights:
        raise InputError("weights are required (-a p/q,p/q,...)")
    parts = [p for p in args.weights.replace(" ", "").split(",") if p]
    try:
        vals = [Fraction(p) for p in parts]
    except (ValueError, ZeroDivisionError):
        raise InputError(f"cannot parse weights {args.weights!r}; use p/q strings")
    if any("." in p or "e" in p.lower() for p in parts):
        raise InputError("weights must be exact rationals like 1/3, not decimals")
    if args.r is not None and args.r != len(vals):
        raise InputError(f"-r {args.r} does not match {len(vals)} weights")
    m = args.m if args.m is not None else getattr(args, "default_m", None) or 1
    if m == "r":
        m = len(vals)
    try:
        return WeightTuple(vals, int(m))
    except ValueError as exc:
        raise InputError(str(exc))


def input_block(w: WeightTuple) -> dict:
    return {"r": w.r, "m": w.m, "a": exact(list(w.a))}


# SECTIONS =============================================================================

def classification(w: WeightTuple) -> dict:
    verdict = validate_weights(w)
    out = {"valid": verdict.valid, "violation": verdict.violation, "boundary": None}
    if not verdict.valid:
        return out
    out["boundary"] = is_boundary(w)
    norm, shift = normalize_weights(w)
    out["normalized"] = {"a": exact(list(norm.a)), "j": shift.j, "sum_change": exact(shift.sum_change)}
    dec = stable_decomposition(w)
    out["stable_decomposition"] = {
        "b": exact(list(dec.b)), "r1": dec.r1, "S": list(dec.S), "r0": dec.r0,
        "j0": dec.j0, "m0": exact(dec.m0), "a0": exact(list(dec.a0)), "stable": dec.stable,
    }
    certs = find_pairing(w)
    out["pairing"] = [
        {"k0": c.k0, "ell": c.ell, "nu": exact(c.nu), "refined": refined_pairing_holds(w, c)}
        for c in certs
    ]
    prof = asymptotic_profile(w)
    asym = {"slope_zero": exact(list(prof.slope_zero)), "k": list(prof.k),
            "slope_infty": exact(list(prof.slope_infty)), "loglog": exact(list(prof.loglog)),
            "boundary_case": prof.boundary_case}
    if prof.toda_slope_zero is not None:
        asym["toda_slope_zero"] = exact(list(prof.toda_slope_zero))
        asym["toda_slope_infty"] = exact(list(prof.toda_slope_infty))
    out["asymptotics"] = asym
    if w.m == w.r and certs:
        out["toda_symmetry"] = sorted({(i, j, c) for cert in certs for i, j, c in toda_symmetry(w, cert)})
        out["toda_symmetry"] = [{"i": i, "j": j, "slope": exact(c)} for i, j, c in out["toda_symmetry"]]
    return out


def stokes_section(w: WeightTuple) -> dict:
    s = build_system(w)
    return {
        "b": exact(s.b), "omega": exact(s.omega), "P": exact(s.P),
        "alpha": exact(list(s.alpha)), "beta": exact(list(s.beta)),
        "C1": exact(s.C1), "A": exact(s.A), "A1": exact(s.A1), "A2": exact(s.A2), "M": exact(s.M),
        "charpoly_identity": True,
        "rationality": rationality_transfer(s),
    }


def integrality_section(w: WeightTuple, flavor: str) -> dict:
    if flavor == "base":
        v = z_structure_base(w)
        out = {"criterion": v.criterion_used, "q_structure": v.q_structure,
               "z_structure": v.z_structure, "detail": v.detail}
    else:
        v = pullback_check(w, flavor)
        wit = v.certificate
        out = {"criterion": v.criterion_used, "flavor": flavor, "q_structure": v.q_structure,
               "z_structure": v.z_structure, "detail": v.detail, "g": wit.g,
               "constraints": list(wit.constraints)}
        if wit.exists:
            out["witness"] = {
                "gamma_power": wit.m, "radicand": exact(wit.radicand), "phase": exact(wit.phase),
                "theta": exact(wit.theta), "scale_q": exact(wit.scale_q),
                "polynomial": exact(list(wit.rational_poly)),
                "polynomial_text": format_poly(wit.rational_poly),
                "unit_polynomial": exact(list(wit.unit_poly)),
            }
    phases = list(w.a) if flavor != "harmonic" else [x / w.m for x in w.a]
    if w.r == 2 and flavor != "base":
        o = r2_exceptional(WeightTuple(phases, w.m))
        out["oracle"] = {"name": o.criterion_used, "verdict": o.q_structure, "detail": o.detail}
    elif w.r > 2 and all(w.r % p for p in range(2, w.r)) and flavor != "base" and w.m == w.r:
        o = prime_oracle(WeightTuple(phases, w.m))
        out["oracle"] = {"name": o.criterion_used, "verdict": o.q_structure, "detail": o.detail}
    return out


def monodromy_section(w: WeightTuple, kind: str, radius: float, tol: float) -> dict:
    spec = ConnectionSpec.from_weights(kind, w)
    rep = monodromy_numeric(spec, complex(radius), tol)
    return {"approx": True, "kind": kind, "orientation_match": rep.orientation_match,
            "error_plus": rep.error_plus, "error_minus": rep.error_minus,
            "charpoly": [cx(c) for c in rep.charpoly],
            "eigenvalues": sorted(cx(e) for e in rep.eigenvalues), "M": cmat(rep.M_num),
            "steps": rep.steps}


# COMMANDS =============================================================================

def cmd_classify(args) -> tuple[dict, list[str]]:
    w = parse_weights(args)
    cls = classification(w)
    lines = [f"weights {w}: {'valid' if cls['valid'] else 'invalid: ' + str(cls['violation'])}"]
    if cls["valid"]:
        d = cls["stable_decomposition"]
        lines.append(f"stable decomposition r0={d['r0']} j0={d['j0']} m0={d['m0']} S={d['S']}")
        lines.append(f"pairing certificates: {[(c['k0'], c['ell']) for c in cls['pairing']] or 'none'}")
    return {"input": input_block(w), "classification": cls}, lines


def cmd_stokes(args) -> tuple[dict, list[str]]:
    w = parse_weights(args)
    st = stokes_section(w)
    out = {"input": input_block(w), "stokes": st}
    lines = [f"b = {st['b']}, omega = {st['omega']['text']}",
             f"alpha = {[a['text'] for a in st['alpha']]}, beta = {[b['text'] for b in st['beta']]}",
             f"P_a = {st['P']['text']}"]
    if args.numeric:
        tol = tolerance()
        num = {"monodromy": monodromy_section(w, "base" if w.m == 1 else "pullback", 1.0, tol)}
        lines.append(f"numeric monodromy orientation: {num['monodromy']['orientation_match']}")
        if w.r in (2, 3) and w.m == 1:
            rep = stokes_numeric(w, args.seed_radius)
            num["stokes"] = rep.as_dict()
            lines.append(f"numeric beta = {[complex(round(z.real, 8), round(z.imag, 8)) for z in rep.beta_hat]}"
                         f", alpha = {[complex(round(z.real, 8), round(z.imag, 8)) for z in rep.alpha_hat]}"
                         f" (error bar {rep.error_bar:.1e})")
        out["numerics"] = num
    return out, lines


def cmd_zcheck(args) -> tuple[dict, list[str]]:
    w = parse_weights(args)
    flavor = args.flavor or ("base" if w.m == 1 else "connection")
    integ = integrality_section(w, flavor)
    verdict = "yes" if integ["q_structure"] else "no"
    lines = [f"{flavor} criterion: {verdict} ({integ['detail']})"]
    if "witness" in integ:
        wit = integ["witness"]
        lines.append(f"gamma^{wit['gamma_power']} = {wit['radicand']}, polynomial {wit['polynomial_text']}")
    if "oracle" in integ:
        lines.append(f"oracle {integ['oracle']['name']}: {'yes' if integ['oracle']['verdict'] else 'no'}")
    return {"input": input_block(w), "integrality": integ}, lines


def cmd_monodromy(args) -> tuple[dict, list[str]]:
    w = parse_weights(args)
    kind = args.kind or ("base" if w.m == 1 else "pullback")
    sec = monodromy_section(w, kind, args.radius, tolerance())
    lines = [f"{kind} monodromy: orientation {sec['orientation_match']}, "
             f"errors +{sec['error_plus']:.2e} / -{sec['error_minus']:.2e}"]
    return {"input": input_block(w), "numerics": {"monodromy": sec}}, lines


def cmd_solve(args) -> tuple[dict, list[str]]:
    args.default_m = "r"
    w = parse_weights(args)
    if w.m != w.r:
        raise InputError("solve needs m = r")
    if not validate_weights(w):
        raise InputError(f"weights {w} are not in R_{{r,m}}: {validate_weights(w).violation}")
    try:
        pb = TodaProblem(w, args.s_min, args.s_max, args.grid)
    except ValueError as exc:
        raise InputError(str(exc))
    sol = solve_bvp(pb, tol=tolerance(1e-9), max_iter=args.max_iter)
    rep = verify_solution(sol)
    solver = {"approx": True, "residual": sol.residual_norm, "iterations": sol.iterations,
              "grid": pb.n, "s_min": pb.s_min, "s_max": pb.s_max,
              "overflow_flag": sol.overflow_flag, "report": rep.as_dict()}
    summary = [f"residual {sol.residual_norm:.3e} after {sol.iterations} Newton steps",
               f"sum deviation {rep.sum_deviation:.3e}"]
    for i, j, c, d in rep.symmetry:
        summary.append(f"max|w_{i}+w_{j} - ({c})s| = {d:.3e}")
    summary.append(f"max end-slope relative error {rep.max_slope_error:.3e}")
    summary.append("log-log coefficients " + ", ".join(f"{f:.4f} (k/2={e})" for f, e in rep.loglog))
    if args.out:
        header = "s," + ",".join(f"w_{i + 1}" for i in range(w.r))
        with open(args.out, "w") as fh:
            fh.write(f"# toda solve r={w.r} a=({', '.join(str(x) for x in w.a)})\n")
            for line in summary:
                fh.write(f"# {line}\n")
            fh.write(header + "\n")
            for k in range(pb.n):
                fh.write(",".join(repr(float(v)) for v in (sol.s[k], *sol.w[:, k])) + "\n")
    return {"input": input_block(w), "solver": solver}, summary


def _random_tuple(rng: random.Random, r: int, den: int = 12) -> WeightTuple:
    # common denominator d keeps the cyclotomic modulus small; spread <= 1 puts it in R_{r,1}
    d = rng.randint(1, den)
    base = rng.randint(-d, d)
    k = sorted((rng.randint(base, base + d) for _ in range(r)), reverse=True)
    return WeightTuple([Fraction(x, d) for x in k], 1)


def cmd_selftest(args) -> tuple[dict, list[str]]:
    rng = random.Random(args.seed)
    checks = {}
    # exact identities
    ok = 0
    count = 0
    for r in range(2, 7):
        for _ in range(10):
            w = _random_tuple(rng, r)
            s = build_system(w)   # verifies A = A2 A1 and the charpoly identity
            z = z_structure_base(w)
            rt = rationality_transfer(s)
            ok += z.z_structure == rt["integral"]
            count += 1
    checks["charpoly_identity"] = {"cases": count, "passed": count}
    checks["integrality_transfer"] = {"cases": count, "passed": ok}
    # gamma criterion against the closed-form oracles
    agree = 0
    total = 0
    for r in (2, 3, 5):
        for _ in range(20):
            d = rng.randint(1, 12)
            a = [Fraction(rng.randint(-2 * d, 2 * d), d) for _ in range(r)]
            w = WeightTuple(a, r)
            g = gamma_decision(a, r).exists
            o = (r2_exceptional(w) if r == 2 else prime_oracle(w)).q_structure
            agree += g == o
            total += 1
    checks["gamma_oracles"] = {"cases": total, "passed": agree}
    # numerics
    tol = tolerance()
    mono = []
    for a in (["1/3"], ["1/4", "-1/8"], ["1/3", "1/6", "-1/4"]):
        w = WeightTuple(a, 1)
        rep = monodromy_numeric(ConnectionSpec.from_weights("base", w), 1.0, tol)
        mono.append({"a": a, "orientation": rep.orientation_match,
                     "error_plus": float(f"{rep.error_plus:.3e}")})
    checks["monodromy"] = {"approx": True, "cases": mono}
    sol = solve_bvp(TodaProblem(WeightTuple(["-1/2", "-1/2"], 2), -10.0, 2.0, 400), tol=1e-9)
    rep = verify_solution(sol)
    checks["toda"] = {"approx": True, "residual_below_tol": sol.residual_norm < 1e-9,
                      "symmetry_deviation": float(f"{rep.max_symmetry_deviation:.3e}"),
                      "sum_deviation": float(f"{rep.sum_deviation:.3e}")}
    passed = (checks["charpoly_identity"]["passed"] == count and ok == count and agree == total
              and all(m["orientation"] == "plus" for m in mono)
              and checks["toda"]["residual_below_tol"])
    out = {"input": {"seed": args.seed, "version": __version__}, "selftest": checks, "passed": passed}
    lines = [f"selftest seed={args.seed}: {'PASS' if passed else 'FAIL'}",
             f"  exact identities {count}/{count}, integrality transfer {ok}/{count}",
             f"  gamma vs oracles {agree}/{total}",
             f"  monodromy orientations {[m['orientation'] for m in mono]}",
             f"  toda symmetry deviation {rep.max_symmetry_deviation:.1e}"]
    return out, lines


# PARSER ===============================================================================

def _weights_args(p: argparse.ArgumentParser, m_default_text: str = "1"):
    p.add_argument("-r", type=int, default=None, help="rank; must match the number of weights")
    p.add_argument("-m", type=int, default=None, help=f"pole parameter (default {m_default_text})")
    p.add_argument("-a", "--weights", default=None, help="comma-separated rationals, e.g. -1/8,-7/8")
    p.add_argument("--json", default=None, help="write the JSON report here")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="toda", description="Toda weights, Stokes data and integral structures.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("classify", help="validate weights and report the combinatorial data")
    _weights_args(q)
    q.set_defaults(func=cmd_classify)

    q = sub.add_parser("stokes", help="exact Stokes factors and monodromy")
    _weights_args(q)
    q.add_argument("--numeric", action="store_true", help="add the numerical cross-check")
    q.add_argument("--seed-radius", type=float, default=8.0)
    q.set_defaults(func=cmd_stokes)

    q = sub.add_parser("zcheck", help="decide Z/Q-structures")
    _weights_args(q)
    q.add_argument("--flavor", choices=("base", "connection", "harmonic"), default=None,
                   help="default: base for m = 1, connection otherwise")
    q.set_defaults(func=cmd_zcheck)

    q = sub.add_parser("monodromy", help="numerical monodromy around the regular singularity")
    _weights_args(q)
    q.add_argument("--kind", choices=("base", "pullback", "lambda_q"), default=None)
    q.add_argument("--radius", type=float, default=1.0)
    q.set_defaults(func=cmd_monodromy)

    q = sub.add_parser("solve", help="radial Toda boundary value problem (m = r)")
    _weights_args(q, "r")
    q.add_argument("--s-min", type=float, default=-10.0)
    q.add_argument("--s-max", type=float, default=2.0)
    q.add_argument("--grid", type=int, default=2000)
    q.add_argument("--max-iter", type=int, default=100)
    q.add_argument("--out", default=None, help="CSV profile output")
    q.set_defaults(func=cmd_solve)

    q = sub.add_parser("selftest", help="run the invariant suite")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--json", default=None)
    q.set_defaults(func=cmd_selftest)
    return p


def _fix_negative_values(argv: list[str]) -> list[str]:
    # "-a -1/8,-7/8" would otherwise be read as an option
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in ("-a", "--weights", "--s-min", "--s-max") and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            name = "--weights" if tok == "-a" else tok
            out.append(f"{name}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def run_command(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_fix_negative_values(argv))
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        data, lines = args.func(args)
    except (InputError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericFailure as exc:
        print(f"numeric failure: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_NUMERIC
    dump_json(data, args.json)
    for line in lines:
        print(line)
    return EXIT_OK


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
