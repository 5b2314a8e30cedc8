"""Operator Choquet integrals over a coherent-state family.

Given the ascending ranking sigma of Q(. | theta), the chain is built from the
top rank downward.  With Pi_cum the projector onto the span of the states
already visited,

    varpi_k = Pi_cum^perp Pi_k Pi_cum^perp / Tr[Pi_cum^perp Pi_k]   (0 if the trace vanishes)
    C_Q(theta) = sum_k d Q_k varpi_k.

For a generic family only the d dominant steps give nonzero varpi, and those
are mutually orthogonal rank-1 projectors summing to the identity.

Moebius operators D(B) = sum_{A subset B} (-1)^{|B|-|A|} Pi(A), where Pi(A)
projects onto the span of the states in A, give the alternative expansion
C_Q(theta) = d sum_A D(A) min_{i in A} Q_i.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .hilbert import CoherentFamily, PhasePoint
from .phase_space import QFunction, as_operator, dominance_ratio, q_function
from .tolerances import Tolerances, default_tolerances


class ChainError(RuntimeError):
    pass


class NonGenericFamilyError(ValueError):
    pass


def hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


@dataclass(frozen=True, eq=False)
class ProjectorChain:
    """Chain data in construction order (descending Q).

    ``order[j]`` is the flat point index handled at step ``j``; ``cumulative[j]``
    is the span projector of ``order[:j+1]`` and ``differences[j]`` the
    corresponding varpi.
    """

    d: int
    ranking: np.ndarray
    order: np.ndarray
    cumulative: np.ndarray = field(repr=False)
    differences: np.ndarray = field(repr=False)
    denominators: np.ndarray = field(repr=False)
    nonzero: np.ndarray       # boolean per step

    @property
    def nonzero_indices(self) -> np.ndarray:
        """Flat point indices whose varpi is nonzero, in construction order."""
        return self.order[self.nonzero]

    def varpi(self, index: int) -> np.ndarray:
        """varpi for flat point index ``index``."""
        j = int(np.flatnonzero(self.order == index)[0])
        return self.differences[j]


def projector_chain(
    family: CoherentFamily,
    ranking: Sequence[int],
    *,
    allow_dependent: bool = False,
    tol: Tolerances | None = None,
) -> ProjectorChain:
    """Build the cumulative projector chain for an ascending ranking.

    Unless ``allow_dependent`` is set, the d top-ranked states must be linearly
    independent (nonzero varpi at each of the first d steps); otherwise a
    :class:`ChainError` names the failing step.
    """
    tol = tol or default_tolerances()
    d, n = family.d, family.size
    ranking = np.asarray(ranking, dtype=int)
    if sorted(ranking.tolist()) != list(range(n)):
        raise ValueError(f"ranking is not a permutation of 0..{n - 1}")
    order = ranking[::-1].copy()
    ident = family.context.identity
    cum = np.zeros((d, d), dtype=complex)
    cumulative = np.empty((n, d, d), dtype=complex)
    differences = np.zeros((n, d, d), dtype=complex)
    denominators = np.zeros(n)
    nonzero = np.zeros(n, dtype=bool)
    for j, k in enumerate(order):
        pi = family.projectors[k]
        perp = ident - cum
        denom = float(np.trace(perp @ pi).real)
        denominators[j] = denom
        if denom >= tol.chain_zero:
            w = hermitize(perp @ pi @ perp / denom)
            differences[j] = w
            nonzero[j] = True
            cum = hermitize(cum + w)
        elif j < d and not allow_dependent:
            p = family.points[k]
            raise ChainError(
                f"chain step {j + 1} (point {p}): state lies in the span of the "
                f"higher-ranked states (Tr[Pi_perp Pi] = {denom:.3g}); family is not generic"
            )
        cumulative[j] = cum
    if not allow_dependent and nonzero.sum() != d:
        j = int(np.flatnonzero(nonzero)[-1])
        raise ChainError(
            f"chain step {j + 1}: {int(nonzero.sum())} nonzero differences, expected {d}"
        )
    return ProjectorChain(d, ranking, order, cumulative, differences, denominators, nonzero)


@dataclass(frozen=True, eq=False)
class ChoquetResult:
    operator: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray            # d * Q over nonzero chain steps, descending Q
    eigenprojectors: np.ndarray = field(repr=False)
    dominant_points: tuple[PhasePoint, ...]
    trace: float
    dominance_ratio: float
    q: QFunction = field(repr=False)
    chain: ProjectorChain = field(repr=False)

    @property
    def eigen_pairs(self) -> list[tuple[float, np.ndarray]]:
        return list(zip(self.eigenvalues.tolist(), self.eigenprojectors))

    def to_dict(self) -> dict:
        return {
            "d": self.q.d,
            "operator": {"re": self.operator.real.tolist(), "im": self.operator.imag.tolist()},
            "eigenvalues": self.eigenvalues.tolist(),
            "dominant_points": [[p.alpha, p.beta] for p in self.dominant_points],
            "trace": self.trace,
            "dominance_ratio": self.dominance_ratio,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def choquet_from_q(
    family: CoherentFamily,
    q: QFunction,
    *,
    allow_nongeneric: bool = False,
    tol: Tolerances | None = None,
) -> ChoquetResult:
    tol = tol or default_tolerances()
    if not family.genericity.generic and not allow_nongeneric:
        raise NonGenericFamilyError(
            f"family is not generic (witness {family.genericity.witness}); pass allow_nongeneric=True to override"
        )
    chain = projector_chain(family, q.ranking, allow_dependent=allow_nongeneric, tol=tol)
    idx = chain.order[chain.nonzero]
    weights = family.d * q.values[idx]
    projs = chain.differences[chain.nonzero]
    op = hermitize(np.einsum("k,kij->ij", weights, projs))
    return ChoquetResult(
        operator=op,
        eigenvalues=weights,
        eigenprojectors=projs,
        dominant_points=tuple(family.points[int(k)] for k in idx),
        trace=float(np.trace(op).real),
        dominance_ratio=dominance_ratio(q),
        q=q,
        chain=chain,
    )


def choquet_integral(
    family: CoherentFamily,
    theta,
    *,
    allow_nongeneric: bool = False,
    tol: Tolerances | None = None,
) -> ChoquetResult:
    """C_Q(theta) for a Hermitian PSD ``theta``."""
    tol = tol or default_tolerances()
    q = q_function(family, as_operator(theta, tol=tol), tol=tol)
    return choquet_from_q(family, q, allow_nongeneric=allow_nongeneric, tol=tol)


def trace_choquet(q: QFunction) -> float:
    """Tr C_Q = d times the sum of the d largest Q values (no projectors needed)."""
    return float(q.d * q.dominant_values.sum())


# ---------------------------------------------------------------------------
# Moebius operators


def span_projector(states: np.ndarray, cutoff: float = 1e-8) -> np.ndarray:
    """Orthogonal projector onto the row span of ``states`` (relative SVD cutoff)."""
    d = states.shape[1]
    if states.shape[0] == 0:
        return np.zeros((d, d), dtype=complex)
    _, s, vh = np.linalg.svd(states, full_matrices=False)
    r = int((s > cutoff * s[0]).sum())
    basis = vh[:r]                 # rows span the same space as the states
    return hermitize(basis.T @ basis.conj())


@dataclass(frozen=True, eq=False)
class MobiusOperatorTable:
    """D(A) for subsets A of the d^2 phase points (bit k <-> flat index k).

    ``full`` is set when every subset is present (d = 3); otherwise only subsets
    up to ``max_order`` points are stored.
    """

    family: CoherentFamily = field(repr=False)
    operators: dict = field(repr=False)
    span_projectors: dict = field(repr=False)
    max_order: int
    full: bool

    def __getitem__(self, subset) -> np.ndarray:
        return self.operators[self.mask(subset)]

    def mask(self, subset) -> int:
        if isinstance(subset, (int, np.integer)):
            return int(subset)
        m = 0
        for p in subset:
            k = p if isinstance(p, (int, np.integer)) else self.family.index(p)
            m |= 1 << int(k)
        return m

    def layer_sum(self, k: int) -> np.ndarray:
        """Sum of D(A) over all stored A with |A| = k."""
        d = self.family.d
        out = np.zeros((d, d), dtype=complex)
        for m, op in self.operators.items():
            if bin(m).count("1") == k:
                out += op
        return out


def mobius_operators(
    family: CoherentFamily,
    max_order: int | None = None,
    *,
    tol: Tolerances | None = None,
) -> MobiusOperatorTable:
    """Moebius operators over the coherent family.

    The full table (all 2^(d^2) subsets) is only built for d = 3; for larger d
    pass ``max_order`` (e.g. 2 or 3) to get the low-order operators only.
    """
    tol = tol or default_tolerances()
    d, n = family.d, family.size
    if max_order is None:
        if d != 3:
            raise ValueError(
                f"full Moebius table only supported for d=3 (2^{n} subsets); pass max_order for pairs/triples"
            )
        max_order = n
    full = max_order >= n
    if full:
        masks = range(1, 1 << n)
    else:
        masks = [
            sum(1 << k for k in combo)
            for size in range(1, max_order + 1)
            for combo in itertools.combinations(range(n), size)
        ]

    spans: dict[int, np.ndarray] = {0: np.zeros((d, d), dtype=complex)}
    for m in masks:
        idx = [k for k in range(n) if m >> k & 1]
        spans[m] = span_projector(family.states[idx], tol.rank)

    if full:
        # fast subset transform on a (2,)*n + (d, d) array
        arr = np.stack([spans[m] for m in range(1 << n)]).reshape((2,) * n + (d, d))
        for axis in range(n):
            hi = [slice(None)] * (n + 2)
            lo = [slice(None)] * (n + 2)
            hi[axis], lo[axis] = 1, 0
            arr[tuple(hi)] -= arr[tuple(lo)]
        flat = arr.reshape((1 << n, d, d))
        ops = {m: hermitize(flat[m]) for m in range(1, 1 << n)}
    else:
        ops = {}
        for m in masks:
            acc = np.zeros((d, d), dtype=complex)
            sub = m
            size = bin(m).count("1")
            while sub:
                sign = -1 if (size - bin(sub).count("1")) % 2 else 1
                acc += sign * spans[sub]
                sub = (sub - 1) & m
            ops[m] = hermitize(acc)
    return MobiusOperatorTable(family, ops, spans, int(max_order), full)


def subset_minima(values: np.ndarray) -> np.ndarray:
    """min over each nonempty subset mask of ``values`` (index 0 holds +inf)."""
    n = len(values)
    mins = np.full(1 << n, np.inf)
    for m in range(1, 1 << n):
        low = m & -m
        mins[m] = min(values[low.bit_length() - 1], mins[m ^ low])
    return mins


def mobius_choquet_layers(table: MobiusOperatorTable, q: QFunction) -> list[np.ndarray]:
    """[C_1, ..., C_{d^2}] with C_k = d sum_{|A|=k} D(A) min_{i in A} Q_i."""
    if not table.full:
        raise ValueError("the Moebius expansion of C_Q needs the full subset table")
    d, n = table.family.d, table.family.size
    mins = subset_minima(q.values)
    layers = [np.zeros((d, d), dtype=complex) for _ in range(n)]
    for m, op in table.operators.items():
        layers[bin(m).count("1") - 1] += d * mins[m] * op
    return layers


def choquet_via_mobius_ops(
    family: CoherentFamily,
    theta,
    *,
    table: MobiusOperatorTable | None = None,
    tol: Tolerances | None = None,
) -> np.ndarray:
    """C_Q(theta) as d * sum_A D(A) min_{i in A} Q_i over all subsets (d = 3)."""
    tol = tol or default_tolerances()
    table = table or mobius_operators(family, tol=tol)
    q = q_function(family, theta, tol=tol)
    return hermitize(sum(mobius_choquet_layers(table, q)))


@dataclass(frozen=True)
class WeakResolutionReport:
    full_residual: float          # || sum_{A nonempty} D(A) - I ||_F
    higher_order_residual: float  # || sum_{|A|>=2} D(A) - (1 - d) I ||_F
    subset_residual: float        # max over sampled d-subsets S of || sum_{A subset S} D(A) - I ||_F
    subsets_sampled: int

    @property
    def max_residual(self) -> float:
        return max(self.full_residual, self.higher_order_residual, self.subset_residual)


def weak_resolution_residual(
    table: MobiusOperatorTable,
    *,
    samples: int = 20,
    seed: int = 0,
) -> WeakResolutionReport:
    if not table.full:
        raise ValueError("weak resolution residual needs the full subset table")
    fam = table.family
    d, n = fam.d, fam.size
    ident = fam.context.identity
    total = sum(table.operators.values())
    higher = total - table.layer_sum(1)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        s = 0
        for k in rng.choice(n, size=d, replace=False):
            s |= 1 << int(k)
        acc = np.zeros((d, d), dtype=complex)
        sub = s
        while sub:
            acc += table.operators[sub]
            sub = (sub - 1) & s
        worst = max(worst, float(np.linalg.norm(acc - ident)))
    return WeakResolutionReport(
        full_residual=float(np.linalg.norm(total - ident)),
        higher_order_residual=float(np.linalg.norm(higher - (1 - d) * ident)),
        subset_residual=worst,
        subsets_sampled=samples,
    )


def displaced_pair_sum(table: MobiusOperatorTable, p1, p2) -> np.ndarray:
    """sum over all displacements (k, l) of D({p1 + (k, l), p2 + (k, l)})."""
    fam = table.family
    d = fam.d
    out = np.zeros((d, d), dtype=complex)
    a1, b1 = p1
    a2, b2 = p2
    for k in range(d):
        for l in range(d):
            out += table[[(a1 + k, b1 + l), (a2 + k, b2 + l)]]
    return out


def commutator_identity_residual(table: MobiusOperatorTable, p1, p2) -> float:
    """|| [Pi_1, Pi_2] - D({1, 2}) (Pi_1 - Pi_2) ||_F for two coherent projectors."""
    fam = table.family
    pi1, pi2 = fam.projector(p1), fam.projector(p2)
    lhs = pi1 @ pi2 - pi2 @ pi1
    rhs = table[[p1, p2]] @ (pi1 - pi2)
    return float(np.linalg.norm(lhs - rhs))
