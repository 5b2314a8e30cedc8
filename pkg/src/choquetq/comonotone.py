"""Comonotonicity of operators, the trace preorder and lambda-interval scans.

Two PSD operators are comonotonic when their Q-functions are comonotonic on
the union of their dominant point sets:

    [Q(i|theta) - Q(j|theta)] [Q(i|phi) - Q(j|phi)] >= 0   for all i, j in that union.

Comonotonic operators share the varpi projectors, so their Choquet integrals
commute and add.  Along a path theta(lambda) the ordered dominant points (the
"signature") are piecewise constant; the scan locates the lambda values where
it changes.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .choquet import choquet_from_q, choquet_integral, trace_choquet
from .hilbert import CoherentFamily, PhasePoint
from .phase_space import NotPSDError, QFunction, as_operator, q_function
from .tolerances import Tolerances, default_tolerances


class GridTooCoarseWarning(UserWarning):
    pass


class PathNotPSDError(ValueError):
    def __init__(self, lam: float, cause: Exception):
        super().__init__(f"operator path leaves the PSD cone at lambda = {lam!r}: {cause}")
        self.lam = lam


def _product_condition(q1: QFunction, q2: QFunction, indices, tol: float) -> bool:
    idx = np.asarray(sorted(indices), dtype=int)
    a = q1.values[idx]
    b = q2.values[idx]
    prod = np.subtract.outer(a, a) * np.subtract.outer(b, b)
    scale = max(1.0, float(np.abs(a).max()) * float(np.abs(b).max()))
    return bool((prod >= -tol * scale).all())


def comonotonic_q(q1: QFunction, q2: QFunction, tol: float = 1e-12) -> bool:
    """Product condition over the union of both dominant point sets."""
    union = set(q1.dominant_indices.tolist()) | set(q2.dominant_indices.tolist())
    return _product_condition(q1, q2, union, tol)


@dataclass(frozen=True)
class ComonotonicityReport:
    comonotonic: bool
    varpi_residual: float | None = None      # max ||varpi_theta - varpi_phi|| over dominant steps
    commutator_norm: float | None = None     # ||[C_Q(theta), C_Q(phi)]||_F


def comonotonicity_report(family: CoherentFamily, theta, phi, *, tol: Tolerances | None = None) -> ComonotonicityReport:
    """Comonotonicity plus, when it holds, the shared-projector and commutator checks."""
    tol = tol or default_tolerances()
    q1 = q_function(family, theta, tol=tol)
    q2 = q_function(family, phi, tol=tol)
    if not comonotonic_q(q1, q2, tol.tie):
        return ComonotonicityReport(False)
    c1 = choquet_from_q(family, q1, tol=tol)
    c2 = choquet_from_q(family, q2, tol=tol)
    d = family.d
    # the top-d steps are the only nonzero ones for a generic family
    vres = max(
        float(np.linalg.norm(c1.chain.differences[j] - c2.chain.differences[j])) for j in range(d)
    )
    comm = c1.operator @ c2.operator - c2.operator @ c1.operator
    return ComonotonicityReport(True, vres, float(np.linalg.norm(comm)))


def comonotonic_operators(family: CoherentFamily, theta, phi, *, verify: bool = False, tol: Tolerances | None = None) -> bool:
    """Whether ``theta`` and ``phi`` are comonotonic.

    With ``verify`` the commutator [C_Q(theta), C_Q(phi)] is also required to
    vanish within 1e-9 (a ``RuntimeError`` otherwise).
    """
    tol = tol or default_tolerances()
    if not verify:
        q1 = q_function(family, theta, tol=tol)
        q2 = q_function(family, phi, tol=tol)
        return comonotonic_q(q1, q2, tol.tie)
    rep = comonotonicity_report(family, theta, phi, tol=tol)
    if rep.comonotonic and rep.commutator_norm > 1e-9:
        raise RuntimeError(f"comonotonic pair with non-commuting Choquet integrals ({rep.commutator_norm:.3g})")
    return rep.comonotonic


@dataclass(frozen=True)
class AdditivityCheck:
    residual: float
    comonotonic: bool
    status: Literal["checked", "skipped_not_comonotonic"]

    @property
    def passed(self) -> bool | None:
        return self.residual < 1e-9 if self.status == "checked" else None


def comonotonic_additivity_check(
    family: CoherentFamily, theta, phi, a: float = 1.0, b: float = 1.0, *, tol: Tolerances | None = None
) -> AdditivityCheck:
    """||C_Q(a theta + b phi) - a C_Q(theta) - b C_Q(phi)||_F.

    The residual is always computed; it is only expected to vanish (status
    "checked") for a comonotonic pair.
    """
    tol = tol or default_tolerances()
    if a < 0 or b < 0:
        raise ValueError("coefficients must be nonnegative")
    t = as_operator(theta, tol=tol).matrix
    p = as_operator(phi, tol=tol).matrix
    co = comonotonic_operators(family, t, p, tol=tol)
    lhs = choquet_integral(family, a * t + b * p, tol=tol).operator
    rhs = a * choquet_integral(family, t, tol=tol).operator + b * choquet_integral(family, p, tol=tol).operator
    return AdditivityCheck(float(np.linalg.norm(lhs - rhs)), co, "checked" if co else "skipped_not_comonotonic")


Order = Literal["succeeds", "precedes", "equivalent"]


def preorder_compare(family: CoherentFamily, theta, phi, *, eps: float = 1e-9, tol: Tolerances | None = None) -> Order:
    """Compare Tr C_Q(theta) with Tr C_Q(phi)."""
    tol = tol or default_tolerances()
    t1 = trace_choquet(q_function(family, theta, tol=tol))
    t2 = trace_choquet(q_function(family, phi, tol=tol))
    if abs(t1 - t2) <= eps * max(1.0, abs(t1), abs(t2)):
        return "equivalent"
    return "succeeds" if t1 > t2 else "precedes"


@dataclass(frozen=True, eq=False)
class OperatorPath:
    """theta(lambda) on [lambda_min, lambda_max]: affine theta1 + lambda theta2, or a callback."""

    lambda_min: float
    lambda_max: float
    grid_size: int = 100
    theta1: np.ndarray | None = field(default=None, repr=False)
    theta2: np.ndarray | None = field(default=None, repr=False)
    callback: Callable[[float], np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self):
        if (self.callback is None) == (self.theta1 is None or self.theta2 is None):
            raise ValueError("give either theta1 and theta2 (affine) or a callback")
        if self.grid_size < 2:
            raise ValueError("grid_size must be at least 2")
        if not self.lambda_max > self.lambda_min:
            raise ValueError("empty lambda range")

    @classmethod
    def affine(cls, theta1, theta2, lambda_min: float, lambda_max: float, grid_size: int = 100) -> "OperatorPath":
        return cls(lambda_min, lambda_max, grid_size, np.asarray(theta1, complex), np.asarray(theta2, complex))

    @classmethod
    def sampled(cls, fn: Callable[[float], np.ndarray], lambda_min: float, lambda_max: float, grid_size: int = 100) -> "OperatorPath":
        return cls(lambda_min, lambda_max, grid_size, callback=fn)

    @property
    def is_affine(self) -> bool:
        return self.callback is None

    def __call__(self, lam: float) -> np.ndarray:
        if self.callback is not None:
            return np.asarray(self.callback(lam), dtype=complex)
        return self.theta1 + lam * self.theta2

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.lambda_min, self.lambda_max, self.grid_size)


@dataclass(frozen=True)
class Crossing:
    lam: float
    points: tuple[PhasePoint, PhasePoint]


@dataclass(frozen=True)
class Interval:
    start: float
    end: float
    signature: tuple[PhasePoint, ...]     # dominant points, descending Q


@dataclass(frozen=True)
class ScanReport:
    intervals: tuple[Interval, ...]
    crossings: tuple[Crossing, ...]
    refine_tol: float
    coarse_cells: int = 0      # grid cells that needed subdivision

    @property
    def boundaries(self) -> list[float]:
        return [iv.end for iv in self.intervals[:-1]]

    def to_dict(self) -> dict:
        return {
            "refine_tol": self.refine_tol,
            "intervals": [
                {"start": iv.start, "end": iv.end, "signature": [[p.alpha, p.beta] for p in iv.signature]}
                for iv in self.intervals
            ],
            "crossings": [
                {"lambda": c.lam, "points": [[p.alpha, p.beta] for p in c.points]} for c in self.crossings
            ],
            "coarse_cells": self.coarse_cells,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["start", "end", "dominant_points"])
        for iv in self.intervals:
            w.writerow([repr(iv.start), repr(iv.end), " ".join(str(p) for p in iv.signature)])
        return buf.getvalue()


class _Evaluator:
    def __init__(self, family: CoherentFamily, path: OperatorPath, tol: Tolerances):
        self.family, self.path, self.tol = family, path, tol
        self.cache: dict[float, QFunction] = {}

    def q(self, lam: float) -> QFunction:
        lam = float(lam)
        if lam not in self.cache:
            try:
                op = as_operator(self.path(lam), tol=self.tol)
            except NotPSDError as exc:
                raise PathNotPSDError(lam, exc) from exc
            self.cache[lam] = q_function(self.family, op, tol=self.tol)
        return self.cache[lam]

    def signature(self, lam: float) -> tuple[int, ...]:
        return tuple(int(k) for k in self.q(lam).dominant_indices)

    def above(self, lam: float, a: int, b: int) -> bool:
        """Whether point a is ranked above point b at lam."""
        pos = np.empty(self.family.size, dtype=int)
        pos[self.q(lam).ranking] = np.arange(self.family.size)
        return bool(pos[a] > pos[b])


def _flipped_pairs(ev: _Evaluator, lo: float, hi: float) -> list[tuple[int, int]]:
    union = sorted(set(ev.signature(lo)) | set(ev.signature(hi)))
    return [(a, b) for a, b in itertools.combinations(union, 2) if ev.above(lo, a, b) != ev.above(hi, a, b)]


def _bisect_pair(ev: _Evaluator, lo: float, hi: float, a: int, b: int, refine_tol: float) -> float:
    start = ev.above(lo, a, b)
    while hi - lo > refine_tol:
        mid = 0.5 * (lo + hi)
        if ev.above(mid, a, b) == start:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _localize(ev: _Evaluator, lo: float, hi: float, refine_tol: float, depth: int, out: list, stats: dict) -> None:
    if ev.signature(lo) == ev.signature(hi):
        return
    pairs = _flipped_pairs(ev, lo, hi)
    if len(pairs) == 1 or (pairs and (depth >= 6 or hi - lo <= refine_tol)):
        for a, b in pairs:
            out.append((_bisect_pair(ev, lo, hi, a, b, refine_tol), a, b))
        return
    if depth == 0:
        stats["coarse"] += 1
    cuts = np.linspace(lo, hi, 9)
    for x, y in zip(cuts[:-1], cuts[1:]):
        _localize(ev, float(x), float(y), refine_tol, depth + 1, out, stats)


def scan_intervals(
    family: CoherentFamily,
    path: OperatorPath,
    refine_tol: float = 1e-6,
    *,
    tol: Tolerances | None = None,
) -> ScanReport:
    """Split the lambda range into intervals of constant dominant ordering.

    Every grid cell whose endpoint signatures differ is searched for the pair
    of phase points whose order flipped; a single flip is refined by bisection
    to ``refine_tol``.  Cells with several flips are subdivided (with a
    :class:`GridTooCoarseWarning`).  Crossings within ``refine_tol`` of the
    range ends (e.g. exact ties at an endpoint) are not reported.
    """
    tol = tol or default_tolerances()
    ev = _Evaluator(family, path, tol)
    grid = path.grid
    for lam in grid:
        ev.q(lam)
    found: list[tuple[float, int, int]] = []
    stats = {"coarse": 0}
    for lo, hi in zip(grid[:-1], grid[1:]):
        _localize(ev, float(lo), float(hi), refine_tol, 0, found, stats)
    if stats["coarse"]:
        warnings.warn(
            f"grid too coarse: {stats['coarse']} cell(s) contained several crossings and were subdivided",
            GridTooCoarseWarning,
            stacklevel=2,
        )
    lmin, lmax = path.lambda_min, path.lambda_max
    found = sorted(c for c in found if lmin + refine_tol < c[0] < lmax - refine_tol)
    crossings = [Crossing(lam, (family.points[a], family.points[b])) for lam, a, b in found]

    cuts: list[float] = []
    for lam, _, _ in found:
        if not cuts or lam - cuts[-1] > refine_tol:
            cuts.append(lam)
    edges = [lmin, *cuts, lmax]
    intervals = []
    for s, e in zip(edges[:-1], edges[1:]):
        sig = ev.signature(0.5 * (s + e))
        intervals.append(Interval(float(s), float(e), tuple(family.points[k] for k in sig)))
    # merge neighbours whose midpoint signatures agree (crossings among tied values)
    merged: list[Interval] = []
    for iv in intervals:
        if merged and merged[-1].signature == iv.signature:
            merged[-1] = Interval(merged[-1].start, iv.end, iv.signature)
        else:
            merged.append(iv)
    return ScanReport(tuple(merged), tuple(crossings), refine_tol, stats["coarse"])


def class_count(d: int) -> int:
    """Number of ordered choices of d dominant points among d^2: (d^2)! / (d^2 - d)!."""
    if d < 1 or d % 2 == 0:
        raise ValueError(f"odd dimension required, got {d}")
    return math.perm(d * d, d)


@dataclass(frozen=True)
class BoundedFamilyReport:
    lambda1: float
    lambda2: float
    lower: float
    upper: float
    samples: tuple[tuple[float, float], ...]   # (lambda, Tr C_Q)
    bounded: bool
    approximate: bool                          # path not affine: monotone bound is heuristic


def bounded_family_check(
    family: CoherentFamily,
    path: OperatorPath,
    lambda1: float,
    lambda2: float,
    samples: int = 10,
    *,
    eps: float = 1e-9,
    tol: Tolerances | None = None,
) -> BoundedFamilyReport:
    """Check Tr C_Q(theta(lambda)) lies between its endpoint values on [lambda1, lambda2].

    Requires theta(lambda1) and theta(lambda2) to be comonotonic.  For an
    affine path this is a theorem; for other paths the result is flagged
    ``approximate``.
    """
    tol = tol or default_tolerances()
    if lambda2 < lambda1:
        raise ValueError("lambda1 must not exceed lambda2")
    t1, t2 = path(lambda1), path(lambda2)
    if not comonotonic_operators(family, t1, t2, tol=tol):
        raise ValueError(f"theta({lambda1}) and theta({lambda2}) are not comonotonic")
    v1 = trace_choquet(q_function(family, t1, tol=tol))
    v2 = trace_choquet(q_function(family, t2, tol=tol))
    lo, hi = min(v1, v2), max(v1, v2)
    pts = []
    if lambda2 > lambda1:
        for lam in np.linspace(lambda1, lambda2, samples + 2)[1:-1]:
            pts.append((float(lam), trace_choquet(q_function(family, path(lam), tol=tol))))
    slack = eps * max(1.0, hi)
    ok = all(lo - slack <= v <= hi + slack for _, v in pts)
    return BoundedFamilyReport(lambda1, lambda2, lo, hi, tuple(pts), ok, not path.is_affine)
