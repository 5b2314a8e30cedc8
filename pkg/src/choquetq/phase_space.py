"""Q- and P-functions over the coherent-state phase space.

For a Hermitian PSD operator ``theta`` and a coherent family ``Pi(a, b)``:

    Q(a, b | theta) = Tr[Pi(a, b) theta] / d        (nonnegative, sums to Tr theta)
    theta = sum_{a,b} P(a, b | theta) Pi(a, b)      (P solved from a d^2 x d^2 system)

Rankings are ascending: ``ranking[0]`` is the smallest Q, ``ranking[-1]`` the
largest.  Values equal within the tie tolerance are ordered by flat index
``a * d + b``.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .hilbert import CoherentFamily, PhasePoint
from .tolerances import Tolerances, default_tolerances


class NotHermitianError(ValueError):
    pass


class NotPSDError(ValueError):
    def __init__(self, min_eigenvalue: float, bound: float):
        super().__init__(
            f"operator is not positive semidefinite: most negative eigenvalue "
            f"{min_eigenvalue:.6g} < {-bound:.3g}"
        )
        self.min_eigenvalue = min_eigenvalue


class ZeroTraceError(ValueError):
    pass


class IllConditionedError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True, eq=False)
class HermitianPSDOperator:
    """A d x d Hermitian matrix, symmetrized on ingest, optionally PSD-checked."""

    matrix: np.ndarray = field(repr=False)
    asymmetry: float = 0.0        # max |A - A^H| seen on ingest
    min_eigenvalue: float = 0.0
    psd_checked: bool = True

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @classmethod
    def from_matrix(
        cls,
        matrix: np.ndarray,
        *,
        psd: bool = True,
        tol: Tolerances | None = None,
    ) -> "HermitianPSDOperator":
        tol = tol or default_tolerances()
        a = np.asarray(matrix, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        scale = max(1.0, float(np.abs(a).max()))
        asym = float(np.abs(a - a.conj().T).max())
        if asym > tol.hermitian * scale:
            raise NotHermitianError(f"matrix is not Hermitian: max |A - A^H| = {asym:.3g}")
        h = 0.5 * (a + a.conj().T)
        lo = float(np.linalg.eigvalsh(h)[0])
        if psd:
            bound = tol.psd * max(float(np.linalg.norm(h, 2)), 1e-300)
            if lo < -bound:
                raise NotPSDError(lo, bound)
        return cls(h, asym, lo, psd)


def as_operator(theta, *, psd: bool = True, tol: Tolerances | None = None) -> HermitianPSDOperator:
    if isinstance(theta, HermitianPSDOperator):
        return theta
    return HermitianPSDOperator.from_matrix(theta, psd=psd, tol=tol)


def rank_values(values: np.ndarray, tie: float) -> np.ndarray:
    """Ascending permutation; values within ``tie`` of each other keep index order.

    Ties are resolved by grouping a sorted run whenever consecutive gaps stay
    within ``tie`` and then ordering each group by index.
    """
    order = np.argsort(values, kind="stable")
    out = []
    group = [order[0]]
    for prev, cur in zip(order[:-1], order[1:]):
        if values[cur] - values[prev] <= tie:
            group.append(cur)
        else:
            out.extend(sorted(group))
            group = [cur]
    out.extend(sorted(group))
    return np.array(out, dtype=int)


@dataclass(frozen=True, eq=False)
class QFunction:
    """Q values on the d^2 phase points (flat-indexed), with ascending ranking."""

    d: int
    values: np.ndarray
    ranking: np.ndarray
    tie_tolerance: float = 1e-12

    @property
    def trace(self) -> float:
        return float(self.values.sum())

    @property
    def points(self) -> tuple[PhasePoint, ...]:
        return tuple(PhasePoint(*divmod(k, self.d)) for k in range(self.d ** 2))

    def __getitem__(self, p) -> float:
        a, b = p
        return float(self.values[(a % self.d) * self.d + (b % self.d)])

    @property
    def dominant_indices(self) -> np.ndarray:
        """The d indices of largest Q, in descending Q order."""
        return self.ranking[::-1][: self.d]

    @property
    def dominant_points(self) -> tuple[PhasePoint, ...]:
        return tuple(PhasePoint(*divmod(int(k), self.d)) for k in self.dominant_indices)

    @property
    def dominant_values(self) -> np.ndarray:
        return self.values[self.dominant_indices]

    def tie_groups(self) -> list[list[int]]:
        """Runs of ranked indices whose consecutive Q values agree within tolerance."""
        groups: list[list[int]] = [[int(self.ranking[0])]]
        for prev, cur in zip(self.ranking[:-1], self.ranking[1:]):
            if self.values[cur] - self.values[prev] <= self.tie_tolerance:
                groups[-1].append(int(cur))
            else:
                groups.append([int(cur)])
        return groups

    def normalized(self) -> np.ndarray:
        t = self.trace
        if not t > 0:
            raise ZeroTraceError("Q-function of a zero-trace operator cannot be normalized")
        return self.values / t

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "values": [
                {"alpha": p.alpha, "beta": p.beta, "Q": float(v)}
                for p, v in zip(self.points, self.values)
            ],
            "ranking": [int(k) for k in self.ranking],
            "trace": self.trace,
            "tie_tolerance": self.tie_tolerance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "QFunction":
        data = json.loads(text)
        d = int(data["d"])
        vals = np.zeros(d * d)
        for row in data["values"]:
            vals[int(row["alpha"]) * d + int(row["beta"])] = float(row["Q"])
        return cls(d, vals, np.asarray(data["ranking"], dtype=int), float(data.get("tie_tolerance", 1e-12)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "beta", "Q"])
        for p, v in zip(self.points, self.values):
            w.writerow([p.alpha, p.beta, repr(float(v))])
        return buf.getvalue()


def q_function(
    family: CoherentFamily,
    theta,
    *,
    psd: bool = True,
    tol: Tolerances | None = None,
) -> QFunction:
    """Q(a, b | theta) at every phase point, with ascending ranking attached."""
    tol = tol or default_tolerances()
    op = as_operator(theta, psd=psd, tol=tol)
    if op.d != family.d:
        raise ValueError(f"operator dimension {op.d} does not match family dimension {family.d}")
    s = family.states
    # <C|theta|C> for every coherent state at once
    vals = np.einsum("ki,ij,kj->k", s.conj(), op.matrix, s).real / family.d
    if psd:
        vals = np.clip(vals, 0.0, None)
    return QFunction(family.d, vals, rank_values(vals, tol.tie), tol.tie)


@dataclass(frozen=True, eq=False)
class PFunction:
    d: int
    values: np.ndarray
    condition_number: float
    residual: float        # ||theta - sum P Pi||_F

    @property
    def trace(self) -> float:
        return float(self.values.sum())

    def __getitem__(self, p) -> float:
        a, b = p
        return float(self.values[(a % self.d) * self.d + (b % self.d)])


def p_kernel(family: CoherentFamily) -> np.ndarray:
    """Real 2d^2 x d^2 matrix mapping P to (Re, Im) of the entries of sum P Pi."""
    n = family.size
    flat = family.projectors.reshape(n, -1).T      # (d^2 entries, d^2 points)
    return np.vstack([flat.real, flat.imag])


def p_function(family: CoherentFamily, theta, *, tol: Tolerances | None = None) -> PFunction:
    """Solve theta = sum P(a, b) Pi(a, b) by least squares.

    Raises :class:`IllConditionedError` when the kernel condition number
    exceeds the tolerance (the kernel depends on the fiducial).
    """
    tol = tol or default_tolerances()
    op = as_operator(theta, psd=False, tol=tol)
    kernel = p_kernel(family)
    cond = float(np.linalg.cond(kernel))
    if not np.isfinite(cond) or cond > tol.condition:
        raise IllConditionedError(f"P-function kernel is singular or ill-conditioned (cond = {cond:.3g})")
    rhs = np.concatenate([op.matrix.real.ravel(), op.matrix.imag.ravel()])
    p, *_ = np.linalg.lstsq(kernel, rhs, rcond=None)
    recon = np.einsum("k,kij->ij", p, family.projectors)
    residual = float(np.linalg.norm(recon - op.matrix))
    return PFunction(family.d, p, cond, residual)


def wehrl_entropy(q: QFunction) -> float:
    """Shannon entropy (nats) of the trace-normalized Q distribution."""
    p = q.normalized()
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def dominance_ratio(q: QFunction) -> float:
    """Sum of the d largest Q values over the sum of all Q values."""
    t = q.trace
    if not t > 0:
        raise ZeroTraceError("dominance ratio undefined for zero trace")
    return float(q.dominant_values.sum() / t)


def displaced_operator(family: CoherentFamily, theta: np.ndarray, p: Sequence[int]) -> np.ndarray:
    """D(p) theta D(p)^dagger."""
    D = family.context.displacements[family.index(p)]
    return D @ np.asarray(theta) @ D.conj().T
