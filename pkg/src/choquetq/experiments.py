"""Reference operators, noise harness and reproduction scenarios.

Each ``reproduce_*`` function returns a :class:`Reproduction`: a table of rows
plus a list of :class:`Check` items comparing computed values with tabulated
reference values.  A reproduction passes when every check passes.

Reference tables label phase points in one of two conventions (see
:mod:`choquetq.hilbert`); each scenario builds its family in the convention
its reference table uses.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from .capacity import (
    Capacity,
    additive_capacity,
    choquet_classical,
    choquet_layers,
    mobius_transform,
)
from .choquet import choquet_integral
from .comonotone import OperatorPath, scan_intervals
from .bounds import partition_bounds
from .hilbert import CoherentFamily, PhasePoint, coherent_family, make_context
from .phase_space import QFunction, dominance_ratio, q_function, wehrl_entropy
from .tolerances import Tolerances, default_tolerances

SQRT2, SQRT3, SQRT6 = math.sqrt(2), math.sqrt(3), math.sqrt(6)

# ---------------------------------------------------------------------------
# reference operators


def hermitian_from_upper(upper: Sequence[Sequence[complex]]) -> np.ndarray:
    """Complete a matrix from its diagonal and upper triangle by Hermitian conjugation."""
    a = np.array(upper, dtype=complex)
    lower = np.tril(np.ones(a.shape, dtype=bool), -1)
    a[lower] = a.conj().T[lower]
    a[np.diag_indices_from(a)] = a.diagonal().real
    return a


NOISE_BASE = np.array([[8, 1, -5], [1, 4, 2], [-5, 2, 7]], dtype=complex)
AFFINE_THETA1 = np.array([[6, 0, 1j], [0, 12, 0], [-1j, 0, 15]], dtype=complex)
AFFINE_THETA2 = np.array([[7, 3, 6], [3, 7, 0], [6, 0, 7]], dtype=complex)
PARTITION_HAMILTONIAN = np.array([[8, 1 + 1j, -5], [1 - 1j, 4, 2], [-5, 2, 7]], dtype=complex)


def quadratic_hamiltonian(lam: float) -> np.ndarray:
    """3x3 Hamiltonian with off-diagonal entries quadratic in lambda."""
    return hermitian_from_upper(
        [
            [7, 3j * lam + lam**2, 6j * lam + 2 * lam**2],
            [0, 9, 5 * lam + 4 * lam**2],
            [0, 0, 11],
        ]
    )


def degenerate_hamiltonian(lam: complex) -> np.ndarray:
    """3x3 Hamiltonian whose two lowest levels are degenerate at lambda = 0.

    ``lam`` may be complex; it enters the (0, 1) entry as sqrt(2) + lam.
    """
    return hermitian_from_upper(
        [
            [1.5, SQRT2 + lam, SQRT3],
            [0, 2.5, SQRT6],
            [0, 0, 3.5],
        ]
    )


# upper-triangle positions and whether each gets an imaginary part
NOISE_PATTERN: tuple[tuple[int, int, bool], ...] = (
    (0, 0, False),
    (0, 1, True),
    (0, 2, True),
    (1, 1, False),
    (1, 2, True),
    (2, 2, False),
)


@dataclass(frozen=True)
class NoiseSpec:
    seed: int = 0
    trials: int = 1000
    amplitude: float = 1.0

    def rng(self, trial: int) -> np.random.Generator:
        """Independent generator for one trial (stream ``seed + trial``)."""
        return np.random.default_rng(self.seed + trial)

    def perturbation(self, trial: int, d: int = 3) -> np.ndarray:
        """Hermitian noise: uniform(-a, a) real parts on the upper triangle and
        imaginary parts off the diagonal (nine numbers r1..r9 for d = 3)."""
        if d != 3:
            raise ValueError("noise pattern is defined for d = 3")
        draws = iter(self.rng(trial).uniform(-self.amplitude, self.amplitude, 9))
        upper = np.zeros((d, d), dtype=complex)
        for i, j, cplx in NOISE_PATTERN:
            upper[i, j] = next(draws) + (1j * next(draws) if cplx else 0)
        return hermitian_from_upper(upper)


@dataclass(frozen=True, eq=False)
class GroundState:
    projector: np.ndarray = field(repr=False)
    rank: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)

    @property
    def analysis_operator(self) -> np.ndarray:
        """Projector divided by its rank, so its Q-values sum to one."""
        return self.projector / self.rank

    @property
    def vector(self) -> np.ndarray:
        return self.eigenvectors[:, 0]


def ground_projector(h: np.ndarray, degeneracy_tol: float = 1e-8) -> GroundState:
    """Projector onto the eigenspace of eigenvalues within ``degeneracy_tol`` of the minimum."""
    w, v = np.linalg.eigh(0.5 * (h + np.conj(h).T))
    k = int((w - w[0] <= degeneracy_tol).sum())
    basis = v[:, :k]
    return GroundState(basis @ basis.conj().T, k, w, v)


# ---------------------------------------------------------------------------
# result containers


@dataclass
class Check:
    name: str
    computed: Any
    expected: Any
    tolerance: float | None = None   # None: exact comparison
    passed: bool = False
    note: str = ""

    @classmethod
    def close(cls, name: str, computed: float, expected: float, tolerance: float, note: str = "") -> "Check":
        ok = bool(abs(float(computed) - float(expected)) <= tolerance + 1e-12)
        return cls(name, float(computed), float(expected), tolerance, ok, note)

    @classmethod
    def exact(cls, name: str, computed: Any, expected: Any, note: str = "") -> "Check":
        return cls(name, computed, expected, None, computed == expected, note)

    @classmethod
    def at_least(cls, name: str, computed: float, threshold: float, note: str = "") -> "Check":
        return cls(name, float(computed), f">= {threshold}", None, bool(computed >= threshold), note)

    @classmethod
    def below(cls, name: str, computed: float, threshold: float, note: str = "") -> "Check":
        return cls(name, float(computed), f"< {threshold}", None, bool(computed < threshold), note)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        tol = f" (tol {self.tolerance})" if self.tolerance is not None else ""
        note = f"  [{self.note}]" if self.note else ""
        return f"{tag}  {self.name}: computed={_fmt(self.computed)} expected={_fmt(self.expected)}{tol}{note}"


def _fmt(x: Any) -> str:
    if isinstance(x, float):
        return f"{x:.6g}"
    if isinstance(x, tuple):
        return "(" + ", ".join(_fmt(v) for v in x) + ")"
    if isinstance(x, list):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    return str(x)


def _jsonable(x: Any) -> Any:
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    return x


@dataclass
class Reproduction:
    name: str
    rows: list[dict] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def rows_csv(self) -> str:
        buf = io.StringIO()
        if self.rows:
            cols = list(self.rows[0].keys())
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(cols)
            for r in self.rows:
                w.writerow([_csv_cell(r.get(c)) for c in cols])
        return buf.getvalue()

    def checks_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check", "computed", "expected", "tolerance", "passed", "note"])
        for c in self.checks:
            w.writerow([c.name, _csv_cell(c.computed), _csv_cell(c.expected), "" if c.tolerance is None else c.tolerance, int(c.passed), c.note])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return _jsonable(
            {
                "name": self.name,
                "passed": self.passed,
                "rows": self.rows,
                "checks": [c.__dict__ for c in self.checks],
                "extras": self.extras,
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def write(self, out_dir: str | Path) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = [out / f"{self.name}.csv", out / f"{self.name}_checks.csv", out / f"{self.name}.json"]
        paths[0].write_text(self.rows_csv())
        paths[1].write_text(self.checks_csv())
        paths[2].write_text(self.to_json() + "\n")
        return paths

    def report(self) -> str:
        lines = [f"== {self.name}: {'PASS' if self.passed else 'FAIL'} ({len(self.checks) - len(self.failures)}/{len(self.checks)} checks)"]
        lines += ["  " + c.line() for c in self.checks]
        return "\n".join(lines)


def _csv_cell(x: Any) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (list, tuple)):
        return " ".join(_csv_cell(v) for v in x)
    return "" if x is None else str(x)


# ---------------------------------------------------------------------------
# shared helpers


def _cell(tol: Tolerances, default: float) -> float:
    return default if tol.match is None else tol.match


def _family(convention: str = "zx") -> CoherentFamily:
    return coherent_family(make_context(3, convention))


def dominant_triple_checks(
    label: str, q: QFunction, expected: Sequence[tuple[tuple[int, int], float]], tol: float
) -> list[Check]:
    """Compare the ranked dominant values and the values at the tabulated points.

    The k-th largest computed Q must match the k-th tabulated value, and the
    computed Q at the k-th tabulated point must match it too.  This accepts any
    order among exactly tied points.
    """
    top = np.sort(q.values)[::-1]
    out = []
    for k, (pt, val) in enumerate(expected):
        out.append(Check.close(f"{label} rank-{k + 1} Q", top[k], val, tol))
        out.append(Check.close(f"{label} Q{PhasePoint(*pt)}", q[pt], val, tol))
    return out


def _triple_str(q: QFunction) -> str:
    return " ".join(f"{p}={q[p]:.4f}" for p in q.dominant_points)


# ---------------------------------------------------------------------------
# students


STUDENT_MARKS: dict[str, tuple[int, int, int]] = {
    "A": (70, 70, 30),
    "B": (90, 50, 80),
    "C": (50, 90, 70),
    "D": (70, 60, 50),
}


def student_capacity() -> Capacity:
    f = Fraction
    return Capacity.from_values(
        3,
        {
            (1,): f("0.3"),
            (2,): f("0.3"),
            (3,): f("0.2"),
            (1, 2): f(1),
            (1, 3): f("0.4"),
            (2, 3): f("0.4"),
            (1, 2, 3): f(1),
        },
    )


def reproduce_students() -> Reproduction:
    mu = student_capacity()
    coeffs = mobius_transform(mu)
    rep = Reproduction("students")
    expected_choquet = {"A": 70, "B": 65, "C": 64, "D": 63}
    expected_avg = {"A": Fraction(170, 3), "B": Fraction(220, 3), "C": Fraction(210, 3), "D": Fraction(180, 3)}
    values = {}
    for s, marks in STUDENT_MARKS.items():
        c = choquet_classical(marks, mu)
        layers = choquet_layers(marks, coeffs)
        avg = Fraction(sum(marks), len(marks))
        values[s] = c
        rep.rows.append(
            {
                "student": s,
                "marks": list(marks),
                "choquet": str(c),
                "layer1": str(layers[0]),
                "layer2": str(layers[1]),
                "layer3": str(layers[2]),
                "average": str(avg),
            }
        )
        rep.checks.append(Check.exact(f"Choquet {s}", c, expected_choquet[s]))
        rep.checks.append(Check.exact(f"Moebius-layer total {s}", sum(layers), expected_choquet[s]))
        rep.checks.append(Check.exact(f"average {s}", avg, expected_avg[s]))
    layers_a = choquet_layers(STUDENT_MARKS["A"], coeffs)
    rep.checks.append(Check.exact("Moebius layers A", tuple(layers_a), (48, 22, 0)))
    rep.checks.append(
        Check.exact(
            "Moebius coefficients d(12), d(13), d(23), d(123)",
            (coeffs((1, 2)), coeffs((1, 3)), coeffs((2, 3)), coeffs((1, 2, 3))),
            (Fraction("0.4"), Fraction("-0.1"), Fraction("-0.1"), Fraction(0)),
        )
    )
    choquet_order = "".join(sorted(values, key=lambda s: -values[s]))
    avg_order = "".join(sorted(values, key=lambda s: -sum(STUDENT_MARKS[s])))
    rep.checks.append(Check.exact("Choquet ordering", choquet_order, "ABCD"))
    rep.checks.append(Check.exact("average ordering", avg_order, "BCDA"))
    # additive control: Choquet integral collapses to the weighted mean
    w = (Fraction(1, 2), Fraction(1, 3), Fraction(1, 6))
    add = additive_capacity(w)
    ok = all(choquet_classical(m, add) == sum(wi * mi for wi, mi in zip(w, m)) for m in STUDENT_MARKS.values())
    rep.checks.append(Check.exact("additive capacity gives weighted means", ok, True))
    rep.extras = {"choquet_order": choquet_order, "average_order": avg_order}
    return rep


# ---------------------------------------------------------------------------
# noisy operator study


TABLE1_NOISELESS = {
    "dominant": [((1, 2), 3.023), ((1, 1), 3.023), ((0, 2), 2.095)],
    "eigenvalues": (0.942, 5.488, 12.569),
    "ratio": 0.428,
}


def reproduce_table1(spec: NoiseSpec | None = None, *, tol: Tolerances | None = None) -> Reproduction:
    spec = spec or NoiseSpec()
    tol = tol or default_tolerances()
    fam = _family("xz")
    rep = Reproduction("table1")
    cell = _cell(tol, 0.002)
    w0, v0 = np.linalg.eigh(NOISE_BASE)
    q0 = q_function(fam, NOISE_BASE, tol=tol)
    rep.rows.append(_table1_row(-1, q0, w0, np.ones(3)))
    rep.checks += dominant_triple_checks("noiseless", q0, TABLE1_NOISELESS["dominant"], cell)
    for i, e in enumerate(TABLE1_NOISELESS["eigenvalues"]):
        rep.checks.append(Check.close(f"noiseless eigenvalue e{i + 1}", w0[i], e, cell))
    rep.checks.append(Check.close("noiseless dominance ratio", dominance_ratio(q0), TABLE1_NOISELESS["ratio"], cell))

    in_band = top2 = 0
    ratios = []
    for t in range(spec.trials):
        theta = NOISE_BASE + spec.perturbation(t)
        w, v = np.linalg.eigh(theta)
        q = q_function(fam, theta, psd=False, tol=tol)
        tau = np.abs(np.einsum("ij,ij->j", v0.conj(), v)) ** 2
        rep.rows.append(_table1_row(t, q, w, tau))
        r = dominance_ratio(q)
        ratios.append(r)
        in_band += 0.40 <= r <= 0.47
        top2 += set(q.dominant_points[:2]) == {PhasePoint(1, 2), PhasePoint(1, 1)}
    if spec.trials:
        n = spec.trials
        rep.checks.append(Check.at_least("fraction of trials with r in [0.40, 0.47]", in_band / n, 0.90))
        rep.checks.append(Check.at_least("fraction of trials with top-2 {(1,2),(1,1)}", top2 / n, 0.80))
        rep.extras = {
            "trials": n,
            "seed": spec.seed,
            "ratio_mean": float(np.mean(ratios)),
            "ratio_std": float(np.std(ratios)),
            "fraction_ratio_in_band": in_band / n,
            "fraction_top2_match": top2 / n,
        }
    return rep


def _table1_row(trial: int, q: QFunction, w: np.ndarray, tau: np.ndarray) -> dict:
    row: dict = {"trial": "noiseless" if trial < 0 else trial}
    for k, p in enumerate(q.dominant_points):
        row[f"point{k + 1}"] = str(p)
        row[f"Q{k + 1}"] = q[p]
    for i in range(3):
        row[f"e{i + 1}"] = float(w[i])
    row["r"] = dominance_ratio(q)
    for i in range(3):
        row[f"tau{i + 1}"] = float(tau[i])
    return row


# ---------------------------------------------------------------------------
# comonotonicity intervals of an affine path


TABLE2_SIGNATURES = [
    ((1, 0), (0, 0), (2, 0)),
    ((0, 0), (1, 0), (2, 0)),
    ((0, 0), (1, 0), (0, 2)),
    ((0, 0), (0, 2), (1, 0)),
    ((0, 0), (0, 2), (0, 1)),
]
TABLE2_BOUNDARIES = (0.06, 0.44, 0.56, 0.60)
# (numerator constant, numerator slope) over denominator 99 + 63 lambda, per interval
TABLE2_RATIOS = [(13.5, 7.0), (13.5, 7.0), (12.62, 9.0), (12.62, 9.0), (11.0, 11.7)]

TABLE2_A1 = [[13.25, 0.04 - 0.16j, 0.01 + 0.14j], [0, 13.53, -0.05 - 0.17j], [0, 0, 13.70]]
TABLE2_B1 = [[6.28, 1.31 - 1j, 1.18 + 0.13j], [0, 8.01, 1.41 + 1.36j], [0, 0, 6.7]]
TABLE2_A2 = [[13.29, 0.08 - 0.23j, 0.01 + 0.15j], [0, 13.62, -0.11 - 0.07j], [0, 0, 13.57]]
TABLE2_B2 = [[5.65, 0.73, 1.10], [0, 6.75, 2.20], [0, 0, 8.59]]


def affine_decomposition(fam: CoherentFamily, path: OperatorPath, la: float, lb: float) -> tuple[np.ndarray, np.ndarray]:
    """C_Q(theta(lambda)) = A + lambda B on an interval, from two interior samples."""
    ca = choquet_integral(fam, path(la)).operator
    cb = choquet_integral(fam, path(lb)).operator
    b = (cb - ca) / (lb - la)
    return ca - la * b, b


def reproduce_table2(*, grid: int = 200, refine_tol: float = 1e-6, tol: Tolerances | None = None) -> Reproduction:
    tol = tol or default_tolerances()
    fam = _family("zx")
    path = OperatorPath.affine(AFFINE_THETA1, AFFINE_THETA2, 0.0, 0.7, grid)
    scan = scan_intervals(fam, path, refine_tol, tol=tol)
    rep = Reproduction("table2")
    sigs = [tuple(tuple(p) for p in iv.signature) for iv in scan.intervals]
    rep.checks.append(Check.exact("number of intervals", len(scan.intervals), 5))
    rep.checks.append(Check.exact("dominant-triple sequence", sigs, TABLE2_SIGNATURES))
    for k, (got, want) in enumerate(zip(scan.boundaries, TABLE2_BOUNDARIES)):
        note = "tabulated 0.06 vs exact-path crossing near 0.072" if k == 0 else ""
        rep.checks.append(Check.close(f"boundary {k + 1}", got, want, 0.02, note))

    for k, iv in enumerate(scan.intervals):
        c0, c1 = TABLE2_RATIOS[k] if k < len(TABLE2_RATIOS) else (float("nan"), float("nan"))
        for frac in (0.25, 0.5, 0.75):
            lam = iv.start + frac * (iv.end - iv.start)
            q = q_function(fam, path(lam), tol=tol)
            # tabulated expression is (sum of dominant Q) / (d Tr theta)
            got = float(q.dominant_values.sum() / (fam.d * q.trace))
            want = (c0 + c1 * lam) / (99 + 63 * lam)
            rep.checks.append(Check.close(f"interval {k + 1} ratio at lambda={lam:.4f}", got, want, 1e-3))
        rep.rows.append(
            {
                "interval": k + 1,
                "start": iv.start,
                "end": iv.end,
                "Q9": str(iv.signature[0]),
                "Q8": str(iv.signature[1]),
                "Q7": str(iv.signature[2]),
                "ratio_expression": f"({c0}+{c1}*lambda)/(99+63*lambda)",
            }
        )

    matrices = {}
    if len(scan.intervals) >= 2:
        for name, iv, refs in (("1", scan.intervals[0], (TABLE2_A1, TABLE2_B1)), ("2", scan.intervals[1], (TABLE2_A2, TABLE2_B2))):
            w = iv.end - iv.start
            a, b = affine_decomposition(fam, path, iv.start + 0.25 * w, iv.start + 0.75 * w)
            comm = float(np.linalg.norm(a @ b - b @ a))
            rep.checks.append(Check.below(f"[A{name}, B{name}] norm", comm, 1e-8))
            for label, got, ref in ((f"A{name}", a, refs[0]), (f"B{name}", b, refs[1])):
                err = float(np.abs(got - hermitian_from_upper(ref)).max())
                rep.checks.append(Check.close(f"{label} max entry deviation", err, 0.0, 0.02))
                matrices[label] = {"re": got.real.tolist(), "im": got.imag.tolist()}
            matrices[f"commutator{name}"] = comm
    rep.extras = {"scan": scan.to_dict(), "matrices": matrices}
    return rep


# ---------------------------------------------------------------------------
# ground-state studies


TABLE3_ROWS = [
    # lambda, dominant triple, r, entropy, overlap
    (0.0, [((1, 2), 0.214), ((1, 0), 0.214), ((1, 1), 0.214)], 0.642, 1.929, 1.0),
    (0.1, [((1, 2), 0.228), ((1, 0), 0.209), ((1, 1), 0.191)], 0.628, 1.948, 0.971),
    (0.2, [((1, 2), 0.245), ((1, 0), 0.202), ((1, 1), 0.166)], 0.613, 1.972, 0.929),
    (0.3, [((1, 2), 0.268), ((1, 0), 0.192), ((1, 1), 0.138)], 0.598, 1.980, 0.885),
    (0.4, [((1, 2), 0.297), ((1, 0), 0.176), ((2, 2), 0.120)], 0.593, 1.959, 0.812),
    (0.5, [((1, 2), 0.313), ((0, 2), 0.168), ((2, 2), 0.157)], 0.638, 1.889, 0.666),
    (0.6, [((1, 2), 0.298), ((0, 2), 0.216), ((2, 2), 0.187)], 0.701, 1.816, 0.477),
    (0.7, [((1, 2), 0.268), ((0, 2), 0.242), ((2, 2), 0.200)], 0.710, 1.825, 0.330),
    (0.8, [((0, 2), 0.252), ((1, 2), 0.241), ((2, 2), 0.202)], 0.695, 1.845, 0.240),
    (0.9, [((0, 2), 0.256), ((1, 2), 0.221), ((2, 2), 0.200)], 0.677, 1.862, 0.185),
    (1.0, [((0, 2), 0.257), ((1, 2), 0.207), ((2, 2), 0.198)], 0.662, 1.873, 0.149),
]
# class changes occur after these tabulated lambda values (within the next 0.1 step)
TABLE3_CLASS_CHANGES = (0.3, 0.4, 0.7)


def ground_state_path(hamiltonian: Callable[[float], np.ndarray], lambda_min: float, lambda_max: float, grid: int) -> OperatorPath:
    return OperatorPath.sampled(lambda lam: ground_projector(hamiltonian(lam)).analysis_operator, lambda_min, lambda_max, grid)


def reproduce_table3(*, grid: int = 100, refine_tol: float = 1e-6, tol: Tolerances | None = None) -> Reproduction:
    tol = tol or default_tolerances()
    fam = _family("xz")
    rep = Reproduction("table3")
    cell = _cell(tol, 0.005)
    g0 = ground_projector(quadratic_hamiltonian(0.0)).vector
    for lam, triple, r_ref, e_ref, ov_ref in TABLE3_ROWS:
        gs = ground_projector(quadratic_hamiltonian(lam))
        q = q_function(fam, gs.analysis_operator, tol=tol)
        r, e = dominance_ratio(q), wehrl_entropy(q)
        ov = float(abs(np.vdot(g0, gs.vector)) ** 2)
        label = f"lambda={lam:.1f}"
        rep.checks += dominant_triple_checks(label, q, triple, cell)
        rep.checks.append(Check.close(f"{label} r", r, r_ref, cell))
        rep.checks.append(Check.close(f"{label} entropy", e, e_ref, cell))
        rep.checks.append(Check.close(f"{label} overlap", ov, ov_ref, cell))
        rep.rows.append({"lambda": lam, "dominant": _triple_str(q), "r": r, "entropy": e, "overlap": ov})

    scan = scan_intervals(fam, ground_state_path(quadratic_hamiltonian, 0.0, 1.0, grid), refine_tol, tol=tol)
    lams = [c.lam for c in scan.crossings]
    for lo in TABLE3_CLASS_CHANGES:
        inside = [x for x in lams if lo < x <= lo + 0.1 + 1e-12]
        rep.checks.append(Check.at_least(f"crossings in ({lo:.1f}, {lo + 0.1:.1f}]", len(inside), 1))
    stray = [x for x in lams if not any(lo < x <= lo + 0.1 + 1e-12 for lo in TABLE3_CLASS_CHANGES)]
    rep.checks.append(Check.exact("crossings outside the tabulated class changes", stray, []))
    rep.extras = {"scan": scan.to_dict()}
    return rep


TABLE4_ROWS = [
    # label, lambda, eigenvalues, dominant triple, entropy
    ("-0.01", -0.01, (0.494, 0.509, 6.495), [((0, 1), 0.194), ((0, 2), 0.194), ((1, 1), 0.163)], 1.960),
    ("0", 0.0, (0.500, 0.500, 6.500), [((1, 1), 0.160), ((1, 2), 0.160), ((2, 1), 0.155)], 2.088),
    ("0.01", 0.01, (0.490, 0.505, 6.505), [((2, 1), 0.218), ((2, 2), 0.218), ((1, 1), 0.155)], 1.890),
    ("-0.01i", -0.01j, (0.492, 0.507, 6.500), [((2, 2), 0.292), ((1, 2), 0.291), ((0, 2), 0.255)], 1.627),
    ("0.01i", 0.01j, (0.493, 0.507, 6.500), [((2, 1), 0.292), ((1, 1), 0.291), ((0, 1), 0.255)], 1.627),
]


def reproduce_table4(*, degeneracy_tol: float = 1e-8, tol: Tolerances | None = None) -> Reproduction:
    tol = tol or default_tolerances()
    fam = _family("xz")
    rep = Reproduction("table4")
    cell = _cell(tol, 0.005)
    vectors = {}
    for label, lam, eig_ref, triple, e_ref in TABLE4_ROWS:
        gs = ground_projector(degenerate_hamiltonian(lam), degeneracy_tol)
        q = q_function(fam, gs.analysis_operator, tol=tol)
        e = wehrl_entropy(q)
        vectors[label] = gs.vector
        tag = f"lambda={label}"
        for i in range(3):
            rep.checks.append(Check.close(f"{tag} eigenvalue e{i + 1}", gs.eigenvalues[i], eig_ref[i], cell))
        rep.checks += dominant_triple_checks(tag, q, triple, cell)
        note = "ground space is two-dimensional; Q of the half-projector" if gs.rank > 1 else ""
        rep.checks.append(Check.close(f"{tag} entropy", e, e_ref, cell, note))
        rep.rows.append(
            {
                "lambda": label,
                "e1": float(gs.eigenvalues[0]),
                "e2": float(gs.eigenvalues[1]),
                "e3": float(gs.eigenvalues[2]),
                "ground_rank": gs.rank,
                "dominant": _triple_str(q),
                "entropy": e,
            }
        )
    cross = float(abs(np.vdot(vectors["0.01i"], vectors["0.01"])) ** 2)
    rep.checks.append(Check.close("|<g(0.01i)|g(0.01)>|^2", cross, 0.5, 0.01))
    return rep


# ---------------------------------------------------------------------------
# partition-function example


PARTITION_REFERENCE = {"Z": 0.440, "choquet_lower": 0.073, "q_lower": 0.013}


def reproduce_partition(lam: float = 1.0, *, tol: Tolerances | None = None) -> Reproduction:
    tol = tol or default_tolerances()
    fam = _family("zx")
    pb = partition_bounds(fam, PARTITION_HAMILTONIAN, lam, tol=tol)
    rep = Reproduction("partition")
    cell = _cell(tol, 0.002)
    rep.checks.append(Check.close("Z = Tr exp(-lambda theta)", pb.Z, PARTITION_REFERENCE["Z"], cell))
    rep.checks.append(Check.close("(1/d) Tr C_Q(exp(-lambda theta))", pb.choquet_lower, PARTITION_REFERENCE["choquet_lower"], cell))
    rep.checks.append(Check.close("(1/d) sum exp(-d lambda Q)", pb.q_lower, PARTITION_REFERENCE["q_lower"], cell))
    rep.checks.append(Check.exact("bounds hold", pb.ok, True))
    # the tabulated 0.073 coincides with (1/d^2) Tr C_Q; recorded for diagnosis only
    rep.extras = {"bounds": pb.__dict__, "trace_choquet_over_d_squared": pb.upper / fam.d**2}
    rep.rows.append({k: v for k, v in pb.__dict__.items()})
    return rep
