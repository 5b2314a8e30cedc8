"""Finite Weyl-Heisenberg machinery over Z(d) for odd d.

Position basis |X;m>, clock ``Z = sum_m w(m)|m><m|``, shift ``X = sum_m |m+1><m|``
with ``w(a) = exp(2 pi i a / d)``.  Displacements are

    convention "zx":  D(a, b) = Z^a X^b w(-a b / 2)
    convention "xz":  D(a, b) = X^a Z^b w(+a b / 2)

where ``1/2`` is the inverse of 2 in Z(d).  The two conventions produce the
same d^2 coherent states with the two phase-space labels exchanged
(``D_xz(a, b) == D_zx(b, a)``).
"""
from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Literal, NamedTuple

import numpy as np

from .tolerances import Tolerances, default_tolerances

Convention = Literal["zx", "xz"]


class DimensionError(ValueError):
    pass


class FiducialError(ValueError):
    pass


class PhasePoint(NamedTuple):
    alpha: int
    beta: int

    def shifted(self, other: "PhasePoint", d: int) -> "PhasePoint":
        return PhasePoint((self.alpha + other.alpha) % d, (self.beta + other.beta) % d)

    def __str__(self) -> str:
        return f"({self.alpha},{self.beta})"


@dataclass(frozen=True, eq=False)
class HilbertContext:
    """Dimension-d operator toolkit; build with :func:`make_context`."""

    d: int
    convention: Convention
    omega: np.ndarray = field(repr=False)
    fourier: np.ndarray = field(repr=False)
    clock: np.ndarray = field(repr=False)
    shift: np.ndarray = field(repr=False)
    half_inverse: int = 0

    def w(self, a: int) -> complex:
        return self.omega[a % self.d]

    def point(self, alpha: int, beta: int) -> PhasePoint:
        return PhasePoint(alpha % self.d, beta % self.d)

    @cached_property
    def points(self) -> tuple[PhasePoint, ...]:
        """All d^2 phase points in lexicographic order; position == flat index."""
        return tuple(PhasePoint(a, b) for a in range(self.d) for b in range(self.d))

    def index(self, p: Iterable[int]) -> int:
        a, b = p
        return (a % self.d) * self.d + (b % self.d)

    @cached_property
    def displacements(self) -> np.ndarray:
        """Array of shape (d^2, d, d); entry k is D(points[k])."""
        return np.stack([_displacement(self, p) for p in self.points])

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.d, dtype=complex)


def make_context(d: int, convention: Convention = "zx") -> HilbertContext:
    if not isinstance(d, (int, np.integer)) or d < 3 or d % 2 == 0:
        raise DimensionError(f"odd dimension required (d >= 3), got {d!r}")
    if convention not in ("zx", "xz"):
        raise ValueError(f"unknown convention {convention!r}")
    d = int(d)
    m = np.arange(d)
    omega = np.exp(2j * np.pi * m / d)
    fourier = np.exp(2j * np.pi * np.outer(m, m) / d) / math.sqrt(d)
    clock = np.diag(omega)
    shift = np.zeros((d, d), dtype=complex)
    shift[(m + 1) % d, m] = 1.0
    return HilbertContext(
        d=d,
        convention=convention,
        omega=omega,
        fourier=fourier,
        clock=clock,
        shift=shift,
        half_inverse=pow(2, -1, d),
    )


def _displacement(ctx: HilbertContext, p: Iterable[int]) -> np.ndarray:
    a, b = (int(x) % ctx.d for x in p)
    Za = np.linalg.matrix_power(ctx.clock, a)
    Xb = np.linalg.matrix_power(ctx.shift, b)
    if ctx.convention == "zx":
        return Za @ Xb * ctx.w(-ctx.half_inverse * a * b)
    Xa = np.linalg.matrix_power(ctx.shift, a)
    Zb = np.linalg.matrix_power(ctx.clock, b)
    return Xa @ Zb * ctx.w(ctx.half_inverse * a * b)


def displacement(ctx: HilbertContext, p: Iterable[int]) -> np.ndarray:
    """Unitary displacement operator D(alpha, beta)."""
    return ctx.displacements[ctx.index(p)].copy()


@dataclass(frozen=True, eq=False)
class FiducialVector:
    entries: np.ndarray

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    @classmethod
    def from_json(cls, text: str) -> "FiducialVector":
        data = json.loads(text)
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != im.shape or re.ndim != 1:
            raise FiducialError("fiducial 're' and 'im' must be equal-length lists")
        if "d" in data and int(data["d"]) != re.shape[0]:
            raise FiducialError(f"fiducial declares d={data['d']} but has {re.shape[0]} entries")
        return cls(re + 1j * im)

    @classmethod
    def load(cls, path: str | Path) -> "FiducialVector":
        return cls.from_json(Path(path).read_text())

    def to_json(self) -> str:
        return json.dumps({"d": self.d, "re": self.entries.real.tolist(), "im": self.entries.imag.tolist()})


def default_fiducial(d: int = 3) -> FiducialVector:
    """The generic fiducial (|0> + 2|1> + 3|2>)/sqrt(14); only defined for d = 3."""
    if d != 3:
        raise FiducialError(f"no default fiducial for d={d}; supply one explicitly")
    return FiducialVector(np.array([1.0, 2.0, 3.0], dtype=complex) / math.sqrt(14))


def position_state(d: int, m: int = 0) -> FiducialVector:
    e = np.zeros(d, dtype=complex)
    e[m % d] = 1.0
    return FiducialVector(e)


@dataclass(frozen=True)
class GenericityReport:
    generic: bool
    exhaustive: bool
    subsets_checked: int
    witness: tuple[PhasePoint, ...] | None = None
    min_ratio: float = float("nan")   # smallest sigma_min/sigma_max seen


@dataclass(frozen=True, eq=False)
class CoherentFamily:
    """The d^2 coherent states D(a, b)|eta> and their rank-1 projectors.

    ``states[k]`` and ``projectors[k]`` belong to ``context.points[k]``.
    """

    context: HilbertContext
    fiducial: FiducialVector
    states: np.ndarray = field(repr=False)
    projectors: np.ndarray = field(repr=False)
    genericity: GenericityReport

    @property
    def d(self) -> int:
        return self.context.d

    @property
    def size(self) -> int:
        return self.context.d ** 2

    @property
    def points(self) -> tuple[PhasePoint, ...]:
        return self.context.points

    def index(self, p: Iterable[int]) -> int:
        return self.context.index(p)

    def state(self, p: Iterable[int]) -> np.ndarray:
        return self.states[self.index(p)]

    def projector(self, p: Iterable[int]) -> np.ndarray:
        return self.projectors[self.index(p)]


def coherent_family(
    ctx: HilbertContext,
    eta: FiducialVector | np.ndarray | None = None,
    *,
    strict: bool = False,
    genericity_samples: int = 500,
    seed: int = 0,
    tol: Tolerances | None = None,
) -> CoherentFamily:
    """Build the coherent-state family for ``eta`` (default fiducial when d = 3).

    A fiducial that is not unit norm is normalized with a warning, or rejected
    when ``strict`` is set.
    """
    tol = tol or default_tolerances()
    if eta is None:
        eta = default_fiducial(ctx.d)
    if not isinstance(eta, FiducialVector):
        eta = FiducialVector(np.asarray(eta, dtype=complex))
    if eta.d != ctx.d:
        raise FiducialError(f"fiducial has {eta.d} entries, context has d={ctx.d}")
    n = eta.norm
    if n == 0:
        raise FiducialError("zero fiducial vector")
    if abs(n - 1.0) > 1e-12:
        if strict:
            raise FiducialError(f"fiducial norm is {n!r}, expected 1")
        warnings.warn(f"fiducial norm {n:.6g} != 1; normalizing", stacklevel=2)
        eta = FiducialVector(eta.entries / n)

    states = ctx.displacements @ eta.entries
    projectors = np.einsum("ki,kj->kij", states, states.conj())
    family = CoherentFamily(ctx, eta, states, projectors, GenericityReport(True, False, 0))
    report = check_generic(family, samples=genericity_samples, seed=seed, tol=tol)
    object.__setattr__(family, "genericity", report)
    return family


def check_generic(
    family: CoherentFamily,
    *,
    samples: int = 500,
    exhaustive: bool | None = None,
    seed: int = 0,
    tol: Tolerances | None = None,
) -> GenericityReport:
    """Test whether every d-subset of coherent states is linearly independent.

    Exhaustive over all C(d^2, d) subsets for d = 3 (or when ``exhaustive`` is
    set); otherwise ``samples`` random subsets are tested and dependencies are
    left to surface during projector-chain construction.
    """
    tol = tol or default_tolerances()
    d, n = family.d, family.size
    if exhaustive is None:
        exhaustive = d == 3
    if exhaustive:
        subsets = np.array(list(itertools.combinations(range(n), d)))
    else:
        rng = np.random.default_rng(seed)
        subsets = np.array([np.sort(rng.choice(n, size=d, replace=False)) for _ in range(samples)])
    # rows of each stacked block are the states of one subset
    sv = np.linalg.svd(family.states[subsets], compute_uv=False)
    ratio = sv[:, -1] / sv[:, 0]
    bad = np.flatnonzero(ratio <= tol.rank)
    witness = None
    if bad.size:
        witness = tuple(family.points[i] for i in subsets[bad[0]])
    return GenericityReport(
        generic=bad.size == 0,
        exhaustive=exhaustive,
        subsets_checked=len(subsets),
        witness=witness,
        min_ratio=float(ratio.min()),
    )
