"""Command-line front end (``choquetq``)."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import experiments as ex
from .bounds import partition_bounds, trace_bounds
from .choquet import choquet_integral
from .comonotone import OperatorPath, scan_intervals
from .hilbert import FiducialVector, coherent_family, make_context
from .phase_space import p_function, q_function
from .tolerances import ENV_VAR, Tolerances, default_tolerances


@dataclass(frozen=True, eq=False)
class MatrixFile:
    """A matrix read from ``{"d": n, "re": [[...]], "im": [[...]]}``, Hermitian-symmetrized."""

    d: int
    matrix: np.ndarray
    asymmetry: float

    @classmethod
    def from_json(cls, text: str) -> "MatrixFile":
        data = json.loads(text)
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data["im"], dtype=float) if "im" in data else np.zeros_like(re)
        if re.ndim != 2 or re.shape != im.shape or re.shape[0] != re.shape[1]:
            raise ValueError("matrix 're' and 'im' must be equal-size square arrays")
        d = int(data.get("d", re.shape[0]))
        if d != re.shape[0]:
            raise ValueError(f"matrix declares d={d} but is {re.shape[0]}x{re.shape[1]}")
        a = re + 1j * im
        asym = float(np.abs(a - a.conj().T).max())
        return cls(d, 0.5 * (a + a.conj().T), asym)

    @classmethod
    def load(cls, path: str | Path) -> "MatrixFile":
        return cls.from_json(Path(path).read_text())

    def to_json(self) -> str:
        return json.dumps({"d": self.d, "re": self.matrix.real.tolist(), "im": self.matrix.imag.tolist()})


def _family(args, d: int, tol: Tolerances):
    eta = FiducialVector.load(args.fiducial) if args.fiducial else None
    return coherent_family(make_context(d, args.convention), eta, tol=tol)


def _load(path: str) -> MatrixFile:
    m = MatrixFile.load(path)
    if m.asymmetry > 1e-10 * max(1.0, float(np.abs(m.matrix).max())):
        print(f"warning: {path}: max |A - A^H| = {m.asymmetry:.3g}; symmetrized", file=sys.stderr)
    return m


def cmd_qfunc(args, tol: Tolerances) -> int:
    m = _load(args.matrix)
    q = q_function(_family(args, m.d, tol), m.matrix, tol=tol)
    sys.stdout.write(q.to_csv() if args.out == "csv" else q.to_json() + "\n")
    return 0


def cmd_choquet(args, tol: Tolerances) -> int:
    m = _load(args.matrix)
    res = choquet_integral(_family(args, m.d, tol), m.matrix, tol=tol)
    if args.emit == "trace":
        print(repr(res.trace))
    elif args.emit == "ratio":
        print(repr(res.dominance_ratio))
    else:
        print(res.to_json())
    return 0


def cmd_pfunc(args, tol: Tolerances) -> int:
    m = _load(args.matrix)
    fam = _family(args, m.d, tol)
    p = p_function(fam, m.matrix, tol=tol)
    out = {
        "d": p.d,
        "values": [{"alpha": a, "beta": b, "P": float(p[(a, b)])} for a, b in fam.points],
        "condition_number": p.condition_number,
        "residual": p.residual,
    }
    print(json.dumps(out, indent=2))
    return 0


def cmd_scan(args, tol: Tolerances) -> int:
    t1, t2 = _load(args.theta1), _load(args.theta2)
    if t1.d != t2.d:
        raise ValueError("theta1 and theta2 have different dimensions")
    path = OperatorPath.affine(t1.matrix, t2.matrix, args.lmin, args.lmax, args.grid)
    rep = scan_intervals(_family(args, t1.d, tol), path, args.tol, tol=tol)
    sys.stdout.write(rep.to_csv() if args.out == "csv" else rep.to_json() + "\n")
    return 0


def cmd_bounds(args, tol: Tolerances) -> int:
    m = _load(args.matrix)
    fam = _family(args, m.d, tol)
    if args.kind == "partition":
        pb = partition_bounds(fam, m.matrix, args.lam, tol=tol)
        print(pb.to_json())
        return 0 if pb.ok else 1
    left, right = trace_bounds(fam, m.matrix, tol=tol)
    print(json.dumps([asdict(left), asdict(right)], indent=2))
    return 0 if left.satisfied and right.satisfied else 1


def run_reproduction(target: str, seed: int = 0, trials: int = 1000, tol: Tolerances | None = None) -> ex.Reproduction:
    if target == "students":
        return ex.reproduce_students()
    if target == "table1":
        return ex.reproduce_table1(ex.NoiseSpec(seed=seed, trials=trials), tol=tol)
    if target == "table2":
        return ex.reproduce_table2(tol=tol)
    if target == "table3":
        return ex.reproduce_table3(tol=tol)
    if target == "table4":
        return ex.reproduce_table4(tol=tol)
    if target == "partition":
        return ex.reproduce_partition(tol=tol)
    raise ValueError(f"unknown reproduction {target!r}")


def cmd_reproduce(args, tol: Tolerances) -> int:
    rep = run_reproduction(args.target, args.seed, args.trials, tol)
    if args.out:
        for p in rep.write(args.out):
            print(f"wrote {p}", file=sys.stderr)
    sys.stdout.write(rep.rows_csv())
    print(rep.report(), file=sys.stderr)
    return 0 if rep.passed else 1


def cmd_students(args, tol: Tolerances) -> int:
    rep = ex.reproduce_students()
    print(f"{'student':8}{'marks':>16}{'Choquet':>10}{'average':>10}")
    for row in rep.rows:
        avg = float(sum(row["marks"])) / len(row["marks"])
        print(f"{row['student']:8}{str(tuple(row['marks'])):>16}{row['choquet']:>10}{avg:>10.3f}")
    print(f"Choquet ordering: {' > '.join(rep.extras['choquet_order'])}")
    print(f"average ordering: {' > '.join(rep.extras['average_order'])}")
    return 0 if rep.passed else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--fiducial", help="fiducial vector JSON {d, re, im} (default: d=3 built-in)")
    common.add_argument("--convention", choices=["zx", "xz"], default="zx", help="phase-space labelling of displacements")

    p = argparse.ArgumentParser(
        prog="choquetq",
        description=f"Choquet integrals over finite coherent states. Tolerance overrides via ${ENV_VAR}.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("qfunc", parents=[common], help="Q-function of a PSD matrix")
    q.add_argument("--matrix", required=True)
    q.add_argument("--out", choices=["csv", "json"], default="csv")
    q.set_defaults(func=cmd_qfunc)

    c = sub.add_parser("choquet", parents=[common], help="operator Choquet integral")
    c.add_argument("--matrix", required=True)
    c.add_argument("--emit", choices=["operator", "trace", "ratio"], default="operator")
    c.set_defaults(func=cmd_choquet)

    pf = sub.add_parser("pfunc", parents=[common], help="P-function by least squares")
    pf.add_argument("--matrix", required=True)
    pf.set_defaults(func=cmd_pfunc)

    s = sub.add_parser("scan", parents=[common], help="comonotonicity intervals of theta1 + lambda theta2")
    s.add_argument("--theta1", required=True)
    s.add_argument("--theta2", required=True)
    s.add_argument("--lmin", type=float, required=True)
    s.add_argument("--lmax", type=float, required=True)
    s.add_argument("--grid", type=int, default=200)
    s.add_argument("--tol", type=float, default=1e-6, help="bisection tolerance in lambda")
    s.add_argument("--out", choices=["csv", "json"], default="json")
    s.set_defaults(func=cmd_scan)

    b = sub.add_parser("bounds", parents=[common], help="trace or partition-function bounds")
    b.add_argument("kind", choices=["partition", "trace"])
    b.add_argument("--matrix", required=True)
    b.add_argument("--lambda", dest="lam", type=float, default=1.0)
    b.set_defaults(func=cmd_bounds)

    r = sub.add_parser("reproduce", help="rerun a reference scenario; exit 1 if any check fails")
    r.add_argument("target", choices=["students", "table1", "table2", "table3", "table4", "partition"])
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--trials", type=int, default=1000)
    r.add_argument("--out", help="directory for CSV/JSON output")
    r.set_defaults(func=cmd_reproduce)

    sd = sub.add_parser("students-demo", help="print the classical students example")
    sd.set_defaults(func=cmd_students)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol = default_tolerances()
        return args.func(args, tol)
    except (ValueError, OSError, KeyError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
