"""Command-line front end.

    microcosm <command> --spec FILE [--u-min R --u-max R --samples N
                                     --tol R --order N --csv --out PATH]

The spec file is one JSON document, either
``{"n": 2, "form": "alekseevsky", "omega": [[...]], "p": [[...]]}`` or the
two-dimensional shorthand ``{"A": .., "B": .., "C": .., "w": ..}``
(Alekseevsky form).  An optional ``"s0"`` (n x n) sets the initial value
for ``sachs`` and ``verify``.

Exit status: 0 success, 2 invalid input, 3 numerical failure.
"""

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import dim2, oracle, orbit, planewave, riccati, sachs_flow, sachs_series
from .errors import InvalidInputError, MicrocosmError, NumericalError, PoleError
from .matcore import check_symmetric, mat_exp, subspace_gap

__all__ = ["JobSpec", "load_spec", "run", "main", "SCHEMA_VERSION", "COMMANDS"]

SCHEMA_VERSION = 1
COMMANDS = ("riccati", "sachs", "orbit", "conjugate", "series", "verify")
EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


@dataclass(frozen=True)
class JobSpec:
    spec: planewave.MicrocosmSpec
    command: str
    u_range: tuple = (0.0, 10.0)
    samples: int = 21
    tol: float = 1e-6
    output_path: str = None
    csv: bool = False
    order: int = 8
    s0: np.ndarray = None
    dim2_params: dim2.Dim2Params = None

    def __post_init__(self):
        lo, hi = self.u_range
        if not lo < hi:
            raise InvalidInputError("u-range requires u_min < u_max")
        if self.samples < 2:
            raise InvalidInputError("samples must be at least 2")
        if not self.tol > 0:
            raise InvalidInputError("tol must be positive")
        if self.command not in COMMANDS:
            raise InvalidInputError(f"unknown command {self.command!r}")


def _field_matrix(doc, key, n):
    try:
        arr = np.array(doc[key], dtype=float)
    except (TypeError, ValueError):
        raise InvalidInputError(f"field {key!r}: expected an {n}x{n} array of real numbers") from None
    if arr.shape != (n, n):
        raise InvalidInputError(f"field {key!r}: expected shape ({n}, {n}), got {arr.shape}")
    return arr


def _field_real(doc, key):
    val = doc[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise InvalidInputError(f"field {key!r}: expected a real number")
    return float(val)


def load_spec(text):
    """Parse a spec document.

    Returns ``(spec, s0, dim2_params)``; ``dim2_params`` is set for
    ``n = 2`` (from the shorthand or read off the matrices).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise InvalidInputError("parse error: the spec must be a JSON object")
    shorthand = {"A", "B", "C", "w"}
    if shorthand <= doc.keys():
        form = doc.get("form", "alekseevsky")
        vals = [_field_real(doc, k) for k in ("A", "B", "C", "w")]
        spec = planewave.dim2_spec(*vals, form=form)
        n = 2
    else:
        missing = [k for k in ("n", "omega", "p") if k not in doc]
        if missing:
            raise InvalidInputError(f"missing field {missing[0]!r} (or use the A, B, C, w shorthand)")
        n = doc["n"]
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise InvalidInputError("field 'n': expected a positive integer")
        form = doc.get("form", "brinkmann")
        spec = planewave.make_spec(_field_matrix(doc, "omega", n), _field_matrix(doc, "p", n), form)
    s0 = None
    if "s0" in doc:
        s0 = check_symmetric(_field_matrix(doc, "s0", n), "s0").real
    params = None
    if n == 2:
        pa = spec.p_alekseevsky
        params = dim2.Dim2Params(
            (pa[0, 0] + pa[1, 1]) / 2, (pa[0, 0] - pa[1, 1]) / 2, pa[0, 1], spec.omega[1, 0]
        )
    return spec, s0, params


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        if obj.imag == 0:
            return _jsonable(float(obj.real))
        return {"re": _jsonable(float(obj.real)), "im": _jsonable(float(obj.imag))}
    if isinstance(obj, (float, np.floating)):
        # + 0.0 folds -0.0 into 0.0
        return float(obj) + 0.0 if np.isfinite(obj) else None
    return obj


def _sigma(spec):
    return riccati.solve_algebraic_sachs(spec.omega, spec.p_brinkmann)


def _grid(job):
    return np.linspace(job.u_range[0], job.u_range[1], job.samples)


def _cmd_riccati(job):
    spec = job.spec
    if spec.n == 2:
        params = job.dim2_params
        sols = dim2.constant_solutions_2x2(params)
        rows = []
        for sol in sols:
            rows.append(
                {
                    "s": sol.s,
                    "t": sol.t,
                    "u0": sol.u0,
                    "S": sol.matrix(),
                    "residual": float(np.linalg.norm(sol.matrix_residual(params))),
                    "real": sol.is_real(),
                }
            )
        out = {"method": "dim2", "solutions": rows}
        if sols.family is not None:
            out["family"] = sols.family.description
        return out, None
    x = _sigma(spec)
    res = riccati.algebraic_residual(x, spec.omega, spec.p_brinkmann)
    return {
        "method": "hamiltonian",
        "solutions": [{"S": x, "residual": float(np.linalg.norm(res)), "real": bool(np.all(x.imag == 0))}],
    }, None


def _table_row(u, mat, residual):
    return {"u": float(u), "value": mat, "residual": residual}


def _cmd_sachs(job):
    spec = job.spec
    sigma = _sigma(spec)
    s0 = job.s0 if job.s0 is not None else np.zeros((spec.n, spec.n))
    ivp = sachs_flow.make_ivp(spec.omega, spec.p_brinkmann, sigma, s0)
    rows = []
    for u in _grid(job):
        try:
            s = sachs_flow.ivp_general(ivp, u)
            r = float(np.linalg.norm(sachs_flow.sachs_residual(ivp, u)))
            rows.append(_table_row(u, s, r))
        except PoleError:
            rows.append(_table_row(u, None, None))
    return {"sigma": sigma, "s0": s0, "table": rows}, rows


def _cmd_orbit(job):
    spec = job.spec
    sigma = _sigma(spec)
    g = orbit.build_generator(sigma, spec.omega)
    rows = []
    step = 1e-5
    for u in _grid(job):
        pt = orbit.orbit_point(g, u)
        if pt.at_infinity:
            rows.append(_table_row(u, None, None))
            continue
        try:
            dh = (orbit.orbit_h(g, u + step) - orbit.orbit_h(g, u - step)) / (2 * step)
            ea = mat_exp(u * g.a)
            r = float(np.linalg.norm(dh - ea @ ea.T))
        except MicrocosmError:
            r = None
        rows.append(_table_row(u, pt.h, r))
    out = {"S0": sigma, "A": g.a, "W": g.w, "H0": g.h0, "M0": g.m0, "residuals": g.residuals(), "table": rows}
    return out, rows


def _cmd_conjugate(job):
    spec = job.spec
    lo, hi = job.u_range
    # the wave is homogeneous, so conjugate points of lo are lo + those of 0
    span = hi - lo
    if spec.n == 2:
        params = job.dim2_params
        pts = dim2.find_conjugate_points(params, span)
        cond = dim2._condition_for(params)
        pred = dim2.existence_predicates(params)
        rows = [{"u": lo + u, "residual": float(abs(np.real(cond(u))))} for u in pts]
        out = {"method": "dim2", "points": rows, "exists": pred["exists"], "reasons": pred["reasons"]}
    else:
        pts = oracle.conjugate_points(spec.omega, spec.p_alekseevsky, span)
        rows = []
        for u in pts:
            run = oracle.integrate_jacobi(
                spec.omega, spec.p_alekseevsky, np.zeros((spec.n, spec.n)), np.eye(spec.n), [0.0, u]
            )
            rows.append({"u": lo + u, "residual": float(oracle.frame_degeneracy(run.states[-1:])[0])})
        e = spec.energy_trace
        reasons = [f"trace energy {e:.6g} > 0"] if e > 0 else []
        out = {"method": "oracle", "points": rows, "exists": True if e > 0 else None, "reasons": reasons}
    return out, [{"u": r["u"], "value": None, "residual": r["residual"]} for r in rows]


def _brinkmann_jets(spec, t, order):
    """Derivatives of ``exp(-uw) p exp(uw)`` at ``t``: ``p_{k+1} = [p_k, w]``."""
    pk = sachs_flow.tidal(spec.omega, spec.p_brinkmann, t).real
    jets = [pk]
    for _ in range(order):
        pk = pk @ spec.omega - spec.omega @ pk
        jets.append(pk)
    return jets


def _cmd_series(job):
    spec = job.spec
    t = job.u_range[0]
    jet = sachs_series.recursion_coeffs(_brinkmann_jets(spec, t, job.order), job.order, base=t)
    h = min(0.1, (job.u_range[1] - t) / 2)
    u = t + h
    s = sachs_series.eval_truncated(jet, u)
    ds = sachs_series.eval_truncated_derivative(jet, u)
    res = ds + s @ s + sachs_flow.tidal(spec.omega, spec.p_brinkmann, u)
    return {
        "base": t,
        "order": job.order,
        "coefficients": list(jet.coeffs),
        "residual_at": u,
        "residual": float(np.linalg.norm(res)),
    }, None


def _check(name, value, tol):
    return {"name": name, "value": value, "tol": tol, "passed": bool(value is not None and value <= tol)}


def _cmd_verify(job):
    spec = job.spec
    n = spec.n
    tol = job.tol
    checks = []
    sigma = _sigma(spec)
    checks.append(
        _check(
            "algebraic residual",
            float(np.linalg.norm(riccati.algebraic_residual(sigma, spec.omega, spec.p_brinkmann))),
            1e-8 * (1 + np.linalg.norm(spec.p)),
        )
    )
    # closed-form Sachs flow against RK4
    s0 = job.s0 if job.s0 is not None else np.zeros((n, n))
    ivp = sachs_flow.make_ivp(spec.omega, spec.p_brinkmann, sigma, s0)
    lo, hi = job.u_range
    grid = oracle.uniform_grid(lo, hi, 1e-3)
    run = oracle.integrate_sachs(lambda v: sachs_flow.tidal(spec.omega, spec.p_brinkmann, v - lo), s0, grid)
    worst = 0.0
    idx = np.linspace(0, len(run.grid) - 1, min(len(run.grid), 200)).astype(int)
    for k in idx:
        u = run.grid[k]
        if run.blowup is not None and abs(u - run.blowup) < 0.05:
            # the two solutions are ill-conditioned next to the pole
            continue
        try:
            s = sachs_flow.ivp_general(ivp, u - lo)
        except PoleError:
            continue
        worst = max(worst, float(np.max(np.abs(s - run.states[k]))))
    checks.append(_check("sachs closed form vs RK4", worst, tol))
    # orbit curve against the vanishing Jacobi subspaces
    g = orbit.build_generator(sigma, spec.omega)
    t = orbit.jacobi_basis_map(sigma, g.h0)
    m0 = orbit.to_alekseevsky_coords(spec.omega)
    samples = _grid(job) - lo
    qmat = oracle.jacobi_matrix(spec.omega, spec.p_alekseevsky)
    gap = 0.0
    for u in samples:
        frame = m0 @ t @ orbit.orbit_point(g, u).frame
        prop = mat_exp(u * qmat)
        top = prop[:n]
        ker = np.linalg.svd(top)[2][n:].conj().T
        gap = max(gap, subspace_gap(frame, ker))
    checks.append(_check("orbit vs vanishing Jacobi fields", gap, tol))
    if n == 2:
        params = job.dim2_params
        a = dim2.find_conjugate_points(params, hi - lo)
        b = oracle.conjugate_points(spec.omega, spec.p_alekseevsky, hi - lo)
        if len(a) == len(b):
            diff = float(np.max(np.abs(np.subtract(a, b)))) if a else 0.0
        else:
            diff = None
        checks.append(_check("analytic conjugate points vs oracle", diff, tol))
    out = {"checks": checks, "passed": all(c["passed"] for c in checks)}
    return out, None


_DISPATCH = {
    "riccati": _cmd_riccati,
    "sachs": _cmd_sachs,
    "orbit": _cmd_orbit,
    "conjugate": _cmd_conjugate,
    "series": _cmd_series,
    "verify": _cmd_verify,
}


def _csv_text(rows):
    width = None
    for r in rows:
        if r["value"] is not None:
            width = np.asarray(r["value"]).size
            is_cplx = any(np.iscomplexobj(np.asarray(q["value"])) for q in rows if q["value"] is not None)
            break
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["u"]
    if width:
        for k in range(width):
            header += [f"v{k}_re", f"v{k}_im"] if is_cplx else [f"v{k}"]
    header.append("residual")
    writer.writerow(header)
    for r in rows:
        line = [repr(float(r["u"]))]
        if width:
            if r["value"] is None:
                line += [""] * (width * (2 if is_cplx else 1))
            else:
                for v in np.asarray(r["value"]).ravel():
                    line += [repr(float(v.real)), repr(float(v.imag))] if is_cplx else [repr(float(np.real(v)))]
        line.append("" if r["residual"] is None else repr(float(r["residual"])))
        writer.writerow(line)
    return buf.getvalue()


def run(job):
    """Execute ``job``; returns ``(exit_status, text)``.

    The text is the JSON document (or CSV with ``job.csv``).  When
    ``job.output_path`` is set it is also written there.
    """
    result, rows = _DISPATCH[job.command](job)
    status = EXIT_OK
    if job.command == "verify" and not result["passed"]:
        status = EXIT_NUMERICAL
    if job.csv:
        if rows is None:
            raise InvalidInputError(f"--csv needs a tabulating command, not {job.command!r}")
        text = _csv_text(rows)
    else:
        doc = {"schema": SCHEMA_VERSION, "command": job.command, "result": result}
        doc["spec"] = {"n": job.spec.n, "form": job.spec.form.value, "omega": job.spec.omega, "p": job.spec.p}
        text = json.dumps(_jsonable(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"
    if job.output_path:
        with open(job.output_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return status, text


def build_parser():
    parser = argparse.ArgumentParser(
        prog="microcosm",
        description="Sachs solutions, symplectic orbits and conjugate points of homogeneous plane waves.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--spec", required=True, help="JSON spec file")
    parser.add_argument("--u-min", type=float, default=0.0, help="start of the u range")
    parser.add_argument("--u-max", type=float, default=10.0, help="end of the u range")
    parser.add_argument("--samples", type=int, default=21, help="number of tabulated u points")
    parser.add_argument("--tol", type=float, default=1e-6, help="tolerance for the verify checks")
    parser.add_argument("--order", type=int, default=8, help="series order (at most %d)" % sachs_series.MAX_ORDER)
    parser.add_argument("--csv", action="store_true", help="emit a CSV table instead of JSON")
    parser.add_argument("--out", default=None, help="output file; stdout when omitted")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        try:
            with open(args.spec, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InvalidInputError(f"cannot read spec file: {exc.strerror}") from None
        spec, s0, params = load_spec(text)
        job = JobSpec(
            spec=spec,
            command=args.command,
            u_range=(args.u_min, args.u_max),
            samples=args.samples,
            tol=args.tol,
            output_path=args.out,
            csv=args.csv,
            order=args.order,
            s0=s0,
            dim2_params=params,
        )
        status, out = run(job)
    except InvalidInputError as exc:
        print(f"microcosm: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalError, PoleError, np.linalg.LinAlgError) as exc:
        print(f"microcosm: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if not args.out:
        sys.stdout.write(out)
    return status


if __name__ == "__main__":
    sys.exit(main())
