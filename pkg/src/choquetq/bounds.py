"""Inequalities involving Tr C_Q and partition-function bounds.

For PSD ``theta`` and a generic family:

    (1/d) Tr C_Q(theta) < Tr theta <= Tr C_Q(theta)
    Tr(rho theta) <= Tr C_Q(theta)                      (rho a density matrix)
    Tr(theta phi) <= Tr C_Q(theta) Tr C_Q(phi)
    Tr C_Q(theta + phi) <= Tr C_Q(theta) + Tr C_Q(phi)  (and convexity)

For a Hamiltonian ``theta`` and ``lambda >= 0`` with Z = Tr exp(-lambda theta):

    max((1/d) Tr C_Q(e^{-lambda theta}), (1/d) sum exp(-d lambda Q(theta))) <= Z <= Tr C_Q(e^{-lambda theta})

where the second lower bound comes from the pointwise Bogoliubov inequality
d Q(a, b | e^{-lambda theta}) >= exp(-d lambda Q(a, b | theta)).
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Iterable, Literal

import numpy as np

from .choquet import choquet_integral, trace_choquet
from .comonotone import comonotonic_q
from .hilbert import CoherentFamily
from .phase_space import as_operator, q_function
from .tolerances import Tolerances, default_tolerances

EPS = 1e-9


class InvalidDensityMatrixError(ValueError):
    pass


@dataclass(frozen=True)
class BoundReport:
    """Checks ``lhs <= rhs`` (or ``lhs < rhs`` when ``strict``)."""

    quantity: str
    lhs: float
    rhs: float
    satisfied: bool
    slack: float                 # rhs - lhs
    strict: bool = False
    status: Literal["checked", "not_applicable"] = "checked"
    tight: bool = False          # equality within tolerance

    @classmethod
    def compare(cls, quantity: str, lhs: float, rhs: float, *, strict: bool = False, eps: float = EPS) -> "BoundReport":
        slack = rhs - lhs
        scale = eps * max(1.0, abs(lhs), abs(rhs))
        ok = slack > 1e-12 if strict else slack >= -scale
        return cls(quantity, float(lhs), float(rhs), bool(ok), float(slack), strict, "checked", abs(slack) <= scale)


def _trace_c(family: CoherentFamily, theta, tol: Tolerances) -> float:
    return trace_choquet(q_function(family, theta, tol=tol))


def trace_bounds(family: CoherentFamily, theta, *, tol: Tolerances | None = None) -> tuple[BoundReport, BoundReport]:
    """(1/d) Tr C_Q(theta) < Tr theta  and  Tr theta <= Tr C_Q(theta).

    The left inequality is strict for a generic family; the right one is an
    equality for multiples of the identity.
    """
    tol = tol or default_tolerances()
    op = as_operator(theta, tol=tol)
    if not np.any(np.abs(op.matrix) > 0):
        raise ValueError("trace bounds need a nonzero operator")
    tc = _trace_c(family, op, tol)
    left = BoundReport.compare("(1/d) Tr C_Q <= Tr theta", tc / family.d, op.trace, strict=family.genericity.generic)
    right = BoundReport.compare("Tr theta <= Tr C_Q", op.trace, tc)
    return left, right


def expectation_bound(family: CoherentFamily, rho, theta, *, tol: Tolerances | None = None) -> BoundReport:
    """Tr(rho theta) <= Tr C_Q(theta)."""
    tol = tol or default_tolerances()
    try:
        r = as_operator(rho, tol=tol)
    except ValueError as exc:
        raise InvalidDensityMatrixError(f"not a density matrix: {exc}") from exc
    if abs(r.trace - 1.0) > EPS:
        raise InvalidDensityMatrixError(f"density matrix trace is {r.trace}, expected 1")
    op = as_operator(theta, tol=tol)
    return BoundReport.compare("Tr(rho theta) <= Tr C_Q", float(np.trace(r.matrix @ op.matrix).real), _trace_c(family, op, tol))


def product_bound(family: CoherentFamily, theta, phi, *, tol: Tolerances | None = None) -> BoundReport:
    """Tr(theta phi) <= Tr C_Q(theta) Tr C_Q(phi)."""
    tol = tol or default_tolerances()
    a, b = as_operator(theta, tol=tol), as_operator(phi, tol=tol)
    lhs = float(np.trace(a.matrix @ b.matrix).real)
    return BoundReport.compare("Tr(theta phi) <= Tr C_Q(theta) Tr C_Q(phi)", lhs, _trace_c(family, a, tol) * _trace_c(family, b, tol))


def subadditivity_convexity(
    family: CoherentFamily, theta, phi, a: float = 0.5, *, tol: Tolerances | None = None
) -> tuple[BoundReport, BoundReport]:
    """Subadditivity of Tr C_Q and convexity at weight ``a``."""
    tol = tol or default_tolerances()
    if not 0.0 <= a <= 1.0:
        raise ValueError("convex weight must lie in [0, 1]")
    t, p = as_operator(theta, tol=tol).matrix, as_operator(phi, tol=tol).matrix
    ct, cp = _trace_c(family, t, tol), _trace_c(family, p, tol)
    sub = BoundReport.compare("Tr C_Q(theta + phi) <= Tr C_Q(theta) + Tr C_Q(phi)", _trace_c(family, t + p, tol), ct + cp)
    conv = BoundReport.compare(
        "Tr C_Q(a theta + (1-a) phi) <= a Tr C_Q(theta) + (1-a) Tr C_Q(phi)",
        _trace_c(family, a * t + (1 - a) * p, tol),
        a * ct + (1 - a) * cp,
    )
    return sub, conv


def expm_hermitian(h: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """exp(scale * h) for Hermitian h via eigendecomposition."""
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (v * np.exp(scale * w)) @ v.conj().T


@dataclass(frozen=True)
class PartitionBounds:
    lam: float
    Z: float
    upper: float                   # Tr C_Q(exp(-lambda theta))
    choquet_lower: float           # upper / d
    q_lower: float                 # (1/d) sum exp(-d lambda Q(theta))
    lower: float                   # max of the two lower bounds
    bogoliubov_min_slack: float    # min over points of d Q(e^{-lambda theta}) - exp(-d lambda Q(theta))
    bogoliubov_violations: int
    upper_ok: bool
    lower_ok: bool

    @property
    def ok(self) -> bool:
        return self.upper_ok and self.lower_ok and self.bogoliubov_violations == 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def partition_bounds(family: CoherentFamily, theta, lam: float, *, tol: Tolerances | None = None) -> PartitionBounds:
    """Z = Tr exp(-lambda theta) with its Choquet upper bound and two lower bounds."""
    tol = tol or default_tolerances()
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    h = as_operator(theta, psd=False, tol=tol).matrix
    d = family.d
    e = expm_hermitian(h, -lam)
    z = float(np.trace(e).real)
    upper = trace_choquet(q_function(family, e, tol=tol))
    qh = q_function(family, h, psd=False, tol=tol).values
    qe = q_function(family, e, tol=tol).values
    bog = d * qe - np.exp(-d * lam * qh)
    q_lower = float(np.exp(-d * lam * qh).sum() / d)
    lower = max(upper / d, q_lower)
    eps = EPS * max(1.0, z)
    return PartitionBounds(
        lam=float(lam),
        Z=z,
        upper=upper,
        choquet_lower=upper / d,
        q_lower=q_lower,
        lower=lower,
        bogoliubov_min_slack=float(bog.min()),
        bogoliubov_violations=int((bog < -EPS * np.maximum(1.0, d * qe)).sum()),
        upper_ok=z <= upper + eps,
        lower_ok=lower <= z + eps,
    )


def operator_exp_bound(family: CoherentFamily, theta, lam: float, *, tol: Tolerances | None = None) -> BoundReport:
    """C_Q(exp(-lambda theta)) >= exp(-lambda C_Q(theta)) in operator order.

    Only asserted when theta and exp(-lambda theta) are comonotonic; otherwise
    the report carries status ``not_applicable``.  The check compares the
    smallest eigenvalue of the difference (``rhs``) against zero (``lhs``).
    """
    tol = tol or default_tolerances()
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    t = as_operator(theta, tol=tol).matrix
    e = expm_hermitian(t, -lam)
    qt, qe = q_function(family, t, tol=tol), q_function(family, e, tol=tol)
    name = "exp(-lambda C_Q(theta)) <= C_Q(exp(-lambda theta))"
    if not comonotonic_q(qt, qe, tol.tie):
        return BoundReport(name, 0.0, float("nan"), False, float("nan"), False, "not_applicable")
    diff = choquet_integral(family, e, tol=tol).operator - expm_hermitian(choquet_integral(family, t, tol=tol).operator, -lam)
    mineig = float(np.linalg.eigvalsh(diff)[0])
    return BoundReport(name, 0.0, mineig, mineig >= -1e-8, mineig, False, "checked", abs(mineig) <= 1e-8)


@dataclass(frozen=True)
class ApplicabilityStats:
    total: int
    applicable: int
    satisfied: int

    @property
    def fraction_applicable(self) -> float:
        return self.applicable / self.total if self.total else 0.0


def operator_exp_applicability(family: CoherentFamily, thetas: Iterable, lambdas: Iterable[float], *, tol: Tolerances | None = None) -> ApplicabilityStats:
    """How often the comonotonicity gate of :func:`operator_exp_bound` opens."""
    lambdas = list(lambdas)
    total = applicable = satisfied = 0
    for t in thetas:
        for lam in lambdas:
            rep = operator_exp_bound(family, t, lam, tol=tol)
            total += 1
            if rep.status == "checked":
                applicable += 1
                satisfied += rep.satisfied
    return ApplicabilityStats(total, applicable, satisfied)
