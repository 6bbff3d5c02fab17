"""Command-line driver: ``liouvillian-hill {kovacic,eigen,verify,plotdata}``.

Exit codes: 0 ok, 2 malformed input, 3 numerical non-convergence,
4 quantization or precondition failure, 5 failed certificate.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConditionNotMet,
    DivisionNearZero,
    HypothesisViolated,
    LiouvillianError,
    NonConvergence,
    OddHighOrder,
    PochhammerPole,
    SingularSystem,
)
from .kovacic import (
    case1_candidates,
    necessary_conditions,
    solve_step3,
    step1_table,
    step3_spectrum,
)
from .pbhe import (
    PBHEParams,
    build_solutions,
    eigenvalues_K1,
    quantization_n,
    quantization_value,
    to_normal_form,
)
from .poly_rational import INFINITY, Poly, RationalFn
from .verify import (
    double_orthogonality,
    fredholm_consistency,
    ode_residual,
    single_orthogonality,
    standard_grid,
)

SCHEMA = "liouvillian-hill/1"
EXIT_OK, EXIT_INPUT, EXIT_NONCONV, EXIT_PRECOND, EXIT_CERT = 0, 2, 3, 4, 5
DEFAULT_TOL = 1e-8
DEFAULT_Z0 = (0.1 + 0.3j, -0.2 + 1.0j, 0.3 - 0.5j, 0.05 + 2.0j, -0.4 + 0.2j)


class InputError(Exception):
    pass


class PreconditionError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    K0: complex | None = None
    K1: complex | None = None
    K2: complex | None = None
    K3: complex = 0.0
    eps0: int = 1
    eps_inf: int = -1
    n: int | None = None
    tol: float = DEFAULT_TOL
    fmt: str = "json"
    output: str | None = None
    extra: dict = field(default_factory=dict)

    def params_dict(self) -> dict:
        out = {}
        for key in ("K0", "K1", "K2", "K3"):
            v = getattr(self, key)
            if v is not None:
                out[key] = v
        out.update(eps0=self.eps0, eps_inf=self.eps_inf, n=self.n, tol=self.tol)
        out.update(self.extra)
        return out

    def pbhe(self, require_K1: bool = False) -> PBHEParams:
        if self.K2 is None:
            raise InputError("--K2 is required")
        K0 = self.K0
        if K0 is None:
            if self.n is None:
                raise InputError("give --K0, or --n to derive K0 from the quantization condition")
            root = -self.eps0 * self.eps_inf * ((self.K3**2 / 4 + self.K2) / 2 + self.eps_inf * (self.n + 1))
            if not (abs(complex(root).imag) < 1e-14 and complex(root).real > 0):
                raise PreconditionError(f"no K0 with positive sqrt(-K0) for n = {self.n} (got {root})")
            K0 = -complex(root).real ** 2
            self.K0 = K0
        if require_K1 and self.K1 is None:
            raise InputError("--K1 is required")
        return PBHEParams(K0, 0.0 if self.K1 is None else self.K1, self.K2, self.K3, self.eps0, self.eps_inf)


def _parse_complex(text: str) -> complex:
    try:
        v = complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    return v.real if v.imag == 0 else v


def parse_poles(text: str) -> tuple:
    """``"c:mult,c:mult"``; an empty string means no finite poles."""
    text = text.strip()
    if not text:
        return ()
    out = []
    for item in text.split(","):
        try:
            c, m = item.rsplit(":", 1)
            out.append((complex(_parse_complex(c)), int(m)))
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise InputError(f"bad pole spec {item!r}; expected c:mult") from exc
    return tuple(out)


def parse_grid(text: str) -> np.ndarray:
    """``"start:stop:count"`` on the real axis."""
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError as exc:
        raise InputError(f"bad grid spec {text!r}; expected start:stop:count") from exc
    if n <= 0 or not (math.isfinite(a) and math.isfinite(b)):
        raise InputError(f"grid {text!r} is empty")
    return np.linspace(a, b, n)


def _num(v):
    """JSON-safe scalar: shortest round-trip floats, strings for non-finite values."""
    if v is None:
        return None
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    f = float(v)
    if math.isfinite(f):
        return f + 0.0      # folds -0.0 into 0.0
    return "nan" if math.isnan(f) else ("inf" if f > 0 else "-inf")


def _cplx(v) -> dict:
    v = complex(v)
    return {"re": _num(v.real), "im": _num(v.imag)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return _cplx(obj)
    if isinstance(obj, (float, int, np.floating, np.integer, bool, np.bool_)) or obj is None:
        return _num(obj)
    if obj is INFINITY:
        return "oo"
    return str(obj)


def result(name, value, residual=0.0, passed=True, data=None) -> dict:
    out = {"name": name, "value": _cplx(value), "residual": _num(residual), "pass": bool(passed)}
    if data is not None:
        out["data"] = _jsonable(data)
    return out


def _poly_coeffs(p: Poly) -> list:
    return [complex(c) for c in p.coeffs]


def _sample_points(r: RationalFn, count: int = 20) -> np.ndarray:
    rng = np.random.default_rng(12345)
    pts = []
    while len(pts) < count:
        z = complex(rng.uniform(0.3, 1.5), rng.uniform(-0.5, 0.5))
        if all(abs(z - c) > 0.2 for c, _ in r.poles):
            pts.append(z)
    return np.array(pts)


def _solution_entries(r, sols, tol, label_extra=None):
    pts = _sample_points(r)
    out = []
    for i, s in enumerate(sols):
        res = float(np.max(s.residual(r, pts)))
        data = {
            "degree": s.degree,
            "poly": _poly_coeffs(s.poly),
            "omega_poly": _poly_coeffs(s.omega.poly),
            "omega_log_terms": [[complex(c), complex(a)] for c, a in s.log_terms],
            "signs": [["oo" if loc is INFINITY else complex(loc), sg] for loc, sg in s.signs],
        }
        value = s.degree
        if label_extra is not None:
            data.update(label_extra[i])
            value = label_extra[i].get("K1", s.degree)
        out.append(result(f"solution[{i}]", value, res, res < tol, data))
    return out


def cmd_kovacic(cfg: RunConfig) -> tuple[list, int]:
    ex = cfg.extra
    if ex.get("pbhe"):
        p = cfg.pbhe()
        r = to_normal_form(p)
    else:
        if ex.get("r_num") is None:
            raise InputError("give --pbhe with parameters, or --r-num/--poles")
        try:
            num = Poly([_parse_complex(c) for c in ex["r_num"].split(",") if c.strip()])
        except argparse.ArgumentTypeError as exc:
            raise InputError(str(exc)) from exc
        try:
            r = RationalFn(num, parse_poles(ex.get("poles") or ""))
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    labels = sorted(necessary_conditions(r))
    results = [result("necessary_conditions", len(labels), 0.0, True, {"cases": labels})]
    if 1 not in labels:
        results.append(result("degree_set", 0, 0.0, True, {"D": [], "note": "Case 1 ruled out"}))
        return results, EXIT_OK
    try:
        parts, cands = case1_candidates(r)
    except OddHighOrder as exc:
        results.append(result("degree_set", 0, 0.0, True, {"D": [], "note": str(exc)}))
        return results, EXIT_OK
    if ex.get("pbhe") and not ex.get("all_signs"):
        cands = [c for c in cands if c.sign_at(0j) == cfg.eps0 and c.sign_at(INFINITY) == cfg.eps_inf]
    results.append(result("step1", len(parts), 0.0, True, {"table": step1_table(parts)}))
    D = sorted({c.degree for c in cands})
    results.append(result("degree_set", len(D), 0.0, True, {"D": D}))
    sols, extra = [], []
    for cand in cands:
        if ex.get("pbhe") and cfg.K1 is None:
            r0 = to_normal_form(p.with_K1(0.0))
            r1 = RationalFn(Poly([-1.0]), ((0j, 1),))
            try:
                lams, _ = step3_spectrum(r0, r1, cand)
            except SingularSystem as exc:
                results.append(result(f"spectrum[m={cand.degree}]", 0, 0.0, False, {"error": str(exc)}))
                continue
            for lam in lams:
                lam = complex(lam)
                found = solve_step3(to_normal_form(p.with_K1(lam)), cand)
                for s in found:
                    sols.append((to_normal_form(p.with_K1(lam)), s))
                    extra.append({"K1": lam})
        else:
            for s in solve_step3(r, cand):
                sols.append((r, s))
                extra.append({})
    for i, (rr, s) in enumerate(sols):
        entry = _solution_entries(rr, [s], cfg.tol, [extra[i]] if extra[i] else None)[0]
        entry["name"] = f"solution[{i}]"
        results.append(entry)
    ok = all(e["pass"] for e in results)
    return results, EXIT_OK if ok else EXIT_CERT


def _quantized(cfg: RunConfig) -> tuple[PBHEParams, int]:
    p = cfg.pbhe()
    qn = quantization_n(p)
    if qn is None or (cfg.n is not None and qn != cfg.n):
        raise PreconditionError(
            f"quantization condition fails: K3^2/4 + K2 + 2 eps0 eps_inf sqrt(-K0) = -2 eps_inf (n+1) "
            f"gives n = {complex(quantization_value(p))}, not a non-negative integer"
            + ("" if cfg.n is None else f" equal to {cfg.n}")
        )
    return p, qn


def cmd_eigen(cfg: RunConfig) -> tuple[list, int]:
    p, n = _quantized(cfg)
    eig = eigenvalues_K1(p, n)
    results = []
    for nu, e in enumerate(eig.entries):
        scale = float(np.max(np.abs(e.A)))
        term = abs(e.A[-1]) / scale
        results.append(result(
            f"K1[{nu}]", e.K1, term, term < cfg.tol,
            {"nu": nu, "k1": e.k1, "A": list(e.A), "Y": _poly_coeffs(e.Y) if e.Y is not None else None,
             "multiplicity": e.multiplicity},
        ))
    return results, EXIT_OK


def cmd_verify(cfg: RunConfig) -> tuple[list, int]:
    ex = cfg.extra
    if ex.get("fredholm"):
        p0 = cfg.pbhe()
        m = p0.sqrtK0
        if abs(m.imag) > 1e-12 or m.real < 0.5 or abs(m.real - round(m.real)) > 1e-12:
            raise PreconditionError(f"Fredholm relation needs sqrt(-K0) a positive integer; got {m}")
    p, n = _quantized(cfg)
    sols = build_solutions(p, n)
    results = []
    for s in sols:
        rep = ode_residual(s, standard_grid(), cfg.tol)
        results.append(result(f"ode_residual[{n},{s.nu}]", s.K1, rep.rel_residual, rep.passed))
    try:
        for i in range(len(sols)):
            for j in range(i, len(sols)):
                rep = single_orthogonality(p, n, i, j, max(cfg.tol, 1e-7))
                results.append(result(rep.name, rep.value, rep.rel_residual, rep.passed, rep.path))
    except HypothesisViolated as exc:
        results.append(result("single_orthogonality", 0, None, True, {"skipped": str(exc)}))
    if ex.get("double"):
        K3, K2 = float(complex(cfg.K3).real), float(complex(cfg.K2).real)
        pairs = ex["double"]
        for i in range(len(pairs)):
            for j in range(i, len(pairs)):
                rep = double_orthogonality(K3, K2, pairs[i], pairs[j], tol=1e-6)
                results.append(result(rep.name, rep.value, rep.rel_residual, rep.passed, rep.data))
    if ex.get("fredholm"):
        for s in sols:
            try:
                rep = fredholm_consistency(p, n, s.nu, DEFAULT_Z0, tol=1e-6)
                results.append(result(rep.name, rep.value, rep.rel_residual, rep.passed, rep.data))
            except DivisionNearZero as exc:
                results.append(result(f"fredholm[{n},{s.nu}]", 0, None, False, {"error": str(exc)}))
    ok = all(e["pass"] for e in results)
    return results, EXIT_OK if ok else EXIT_CERT


def cmd_plotdata(cfg: RunConfig) -> tuple[list, int]:
    grid = parse_grid(cfg.extra.get("grid") or "")
    p, n = _quantized(cfg)
    sols = build_solutions(p, n)
    nu = cfg.extra.get("nu", 0)
    if not 0 <= nu < len(sols):
        raise InputError(f"--nu {nu} outside 0..{len(sols) - 1}")
    s = sols[nu]
    z = grid + 1j * cfg.extra.get("imag", 0.0)
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        logf = s.log_eval(z)
        f = np.exp(logf)
    rows = [[float(x), float(v.real), float(v.imag), float(abs(v))] for x, v in zip(grid, f)]
    return [result("plotdata", s.K1, 0.0, True, {"columns": ["x", "re_f", "im_f", "abs_f"], "rows": rows})], EXIT_OK


COMMANDS = {"kovacic": cmd_kovacic, "eigen": cmd_eigen, "verify": cmd_verify, "plotdata": cmd_plotdata}


def _csv_text(command: str, results: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if command == "plotdata":
        data = results[0]["data"]
        w.writerow(data["columns"])
        for row in data["rows"]:
            w.writerow([repr(_num(v)) if isinstance(_num(v), float) else _num(v) for v in row])
        return buf.getvalue()
    if command == "eigen":
        first = results[0]["data"] if results else {"A": [], "Y": []}
        nA, nY = len(first["A"]), len(first["Y"] or [])
        head = ["nu", "K1_re", "K1_im", "k1_re", "k1_im"]
        head += [f"A{k}_{part}" for k in range(nA) for part in ("re", "im")]
        head += [f"Y{k}_{part}" for k in range(nY) for part in ("re", "im")]
        w.writerow(head)
        for e in results:
            d = e["data"]
            row = [d["nu"], e["value"]["re"], e["value"]["im"], d["k1"]["re"], d["k1"]["im"]]
            row += [c[part] for c in d["A"] for part in ("re", "im")]
            row += [c[part] for c in (d["Y"] or []) for part in ("re", "im")]
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
        return buf.getvalue()
    w.writerow(["name", "re", "im", "residual", "pass"])
    for e in results:
        w.writerow([e["name"], e["value"]["re"], e["value"]["im"], e["residual"], e["pass"]])
    return buf.getvalue()


def render(cfg: RunConfig, results: list, code: int, error: str | None = None) -> str:
    if cfg.fmt == "csv" and error is None:
        return _csv_text(cfg.command, results)
    doc = {
        "schema": SCHEMA,
        "command": cfg.command,
        "params": _jsonable(cfg.params_dict()),
        "results": results,
        "exit": code,
    }
    if error is not None:
        doc["error"] = error
    return json.dumps(doc, allow_nan=False) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="liouvillian-hill", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--K0", type=_parse_complex)
        sp.add_argument("--K1", type=_parse_complex)
        sp.add_argument("--K2", type=_parse_complex)
        sp.add_argument("--K3", type=_parse_complex, default=0.0)
        sp.add_argument("--eps0", type=int, choices=(1, -1), default=1)
        sp.add_argument("--eps-inf", dest="eps_inf", type=int, choices=(1, -1), default=-1)
        sp.add_argument("--n", type=int)
        sp.add_argument("--tol", type=float)
        sp.add_argument("--format", dest="fmt", choices=("json", "csv"))
        sp.add_argument("--output", "-o")

    k = sub.add_parser("kovacic", help="run Case 1 of Kovacic's algorithm")
    common(k)
    k.add_argument("--pbhe", action="store_true", help="use the periodic Heun normal form")
    k.add_argument("--r-num", dest="r_num", help="numerator coefficients, ascending, comma separated")
    k.add_argument("--poles", default=None, help="declared poles as c:mult,c:mult")
    k.add_argument("--all-signs", dest="all_signs", action="store_true",
                   help="keep candidates for every sign choice, not only --eps0/--eps-inf")
    e = sub.add_parser("eigen", help="tabulate the admissible K1 values")
    common(e)
    v = sub.add_parser("verify", help="numerical certificates")
    common(v)
    v.add_argument("--double", help="pairs n,mu;m,nu for the double orthogonality check")
    v.add_argument("--fredholm", action="store_true")
    pl = sub.add_parser("plotdata", help="solution values on a grid, as CSV")
    common(pl)
    pl.add_argument("--grid", required=True, help="start:stop:count")
    pl.add_argument("--nu", type=int, default=0)
    pl.add_argument("--imag", type=float, default=0.0, help="constant imaginary part of the grid")
    return parser


def config_from_args(args) -> RunConfig:
    tol = args.tol
    if tol is None:
        env = os.environ.get("LH_TOL")
        try:
            tol = float(env) if env else DEFAULT_TOL
        except ValueError as exc:
            raise InputError(f"LH_TOL={env!r} is not a number") from exc
    extra = {}
    for key in ("pbhe", "r_num", "poles", "all_signs", "fredholm", "grid", "nu", "imag"):
        if hasattr(args, key):
            val = getattr(args, key)
            if val not in (None, False):
                extra[key] = val
    if getattr(args, "double", None):
        try:
            extra["double"] = [tuple(int(x) for x in item.split(",")) for item in args.double.split(";")]
        except ValueError as exc:
            raise InputError(f"bad --double spec {args.double!r}") from exc
        if any(len(pr) != 2 for pr in extra["double"]):
            raise InputError("--double pairs must be n,index")
    fmt = args.fmt or ("csv" if args.command == "plotdata" else "json")
    return RunConfig(
        command=args.command, K0=args.K0, K1=args.K1, K2=args.K2, K3=args.K3,
        eps0=args.eps0, eps_inf=args.eps_inf, n=args.n, tol=tol, fmt=fmt, output=args.output, extra=extra,
    )


def run(argv=None) -> tuple[int, str, str | None]:
    """Parse, execute and render; returns ``(exit code, text, output path)``."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), "", None
    try:
        cfg = config_from_args(args)
    except InputError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT, "", None
    try:
        results, code = COMMANDS[cfg.command](cfg)
        return code, render(cfg, results, code), cfg.output
    except InputError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        code, msg = EXIT_INPUT, str(exc)
    except NonConvergence as exc:
        code, msg = EXIT_NONCONV, str(exc)
    except (PreconditionError, ConditionNotMet, HypothesisViolated, PochhammerPole) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code, msg = EXIT_PRECOND, str(exc)
    except LiouvillianError as exc:
        code, msg = EXIT_CERT, f"{type(exc).__name__}: {exc}"
    return code, render(cfg, [], code, msg), cfg.output


def main(argv=None) -> int:
    code, text, path = run(argv)
    if text:
        if path:
            with open(path, "w", newline="\n") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
