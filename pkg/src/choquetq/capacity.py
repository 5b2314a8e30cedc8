"""Capacities on a finite ground set and their Choquet integrals.

Subsets of ``{1, ..., N}`` are bitmasks: element ``i`` (1-based) is bit
``i - 1``.  Set-function tables are length-``2**N`` sequences indexed by mask.
Values may be floats or :class:`fractions.Fraction` -- all routines here use
only ``+``, ``-``, ``*`` and comparisons, so rational inputs stay exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Iterable, Mapping, Sequence

import numpy as np

MAX_GROUND_SET = 20


class CapacityError(ValueError):
    pass


def mask_of(elements: Iterable[int]) -> int:
    """Bitmask of a collection of 1-based elements."""
    m = 0
    for e in elements:
        m |= 1 << (e - 1)
    return m


def elements_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def _check_size(n: int) -> None:
    if n < 1 or n > MAX_GROUND_SET:
        raise CapacityError(f"ground set size must be in 1..{MAX_GROUND_SET}, got {n}")


def _table_from(values, n: int) -> list:
    size = 1 << n
    if isinstance(values, Mapping):
        table = [0] * size
        for key, v in values.items():
            m = key if isinstance(key, int) else mask_of(key)
            table[m] = v
        return table
    table = list(values)
    if len(table) != size:
        raise CapacityError(f"expected {size} table entries for N={n}, got {len(table)}")
    return table


def _subset_transform(table: list, n: int, sign: int) -> list:
    """In-place zeta (sign=+1) or Moebius (sign=-1) transform over subsets."""
    if all(isinstance(v, (float, int, np.floating)) and not isinstance(v, bool) for v in table) and not any(
        isinstance(v, Fraction) for v in table
    ):
        a = np.asarray(table, dtype=float).reshape((2,) * n)
        # axis order: mask bit k is axis n-1-k in C order; each axis is independent anyway
        for axis in range(n):
            idx_hi = [slice(None)] * n
            idx_lo = [slice(None)] * n
            idx_hi[axis], idx_lo[axis] = 1, 0
            a[tuple(idx_hi)] += sign * a[tuple(idx_lo)]
        return a.ravel().tolist()
    out = list(table)
    for i in range(n):
        bit = 1 << i
        for m in range(1 << n):
            if m & bit:
                out[m] = out[m] + sign * out[m ^ bit]
    return out


@dataclass(frozen=True)
class Capacity:
    """A set function with mu(empty) = 0 and mu(Omega) = 1, monotone under inclusion."""

    n: int
    values: tuple

    def __post_init__(self):
        _check_size(self.n)
        if len(self.values) != 1 << self.n:
            raise CapacityError("capacity table has the wrong length")

    @classmethod
    def from_values(cls, n: int, values, *, validate: bool = True, tol: float = 1e-12) -> "Capacity":
        """Build from a full table or a ``{subset: value}`` mapping (missing sets are 0).

        Mapping keys may be bitmasks or iterables of 1-based elements.
        """
        _check_size(n)
        mu = cls(n, tuple(_table_from(values, n)))
        if validate:
            mu.validate(tol)
        return mu

    def __call__(self, subset) -> Real:
        m = subset if isinstance(subset, int) else mask_of(subset)
        return self.values[m]

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def validate(self, tol: float = 1e-12) -> None:
        v = self.values
        if abs(v[0]) > tol:
            raise CapacityError(f"mu(empty) = {v[0]} != 0")
        if abs(v[self.full] - 1) > tol:
            raise CapacityError(f"mu(Omega) = {v[self.full]} != 1")
        viol = self.monotonicity_violation(tol)
        if viol is not None:
            a, b = viol
            raise CapacityError(
                f"not monotone: mu({set(elements_of(a))}) = {v[a]} > mu({set(elements_of(b))}) = {v[b]}"
            )

    def monotonicity_violation(self, tol: float = 1e-12) -> tuple[int, int] | None:
        """First (A, A + {i}) pair with mu(A) > mu(A + {i}), else None.

        Checking single-element extensions suffices for monotonicity.
        """
        v = self.values
        for m in range(1 << self.n):
            for i in range(self.n):
                bit = 1 << i
                if not m & bit and v[m] > v[m | bit] + tol:
                    return m, m | bit
        return None

    def mix(self, other: "Capacity", p) -> "Capacity":
        """p * self + (1 - p) * other."""
        if other.n != self.n:
            raise CapacityError("ground sets differ")
        return Capacity(self.n, tuple(p * a + (1 - p) * b for a, b in zip(self.values, other.values)))


@dataclass(frozen=True)
class MobiusCoefficients:
    n: int
    values: tuple

    def __call__(self, subset) -> Real:
        m = subset if isinstance(subset, int) else mask_of(subset)
        return self.values[m]

    def total(self):
        return sum(self.values[1:])


def mobius_transform(mu: Capacity) -> MobiusCoefficients:
    """d(A) = sum_{B subset A} (-1)^{|A|-|B|} mu(B)."""
    _check_size(mu.n)
    return MobiusCoefficients(mu.n, tuple(_subset_transform(list(mu.values), mu.n, -1)))


def inverse_mobius(coeffs: MobiusCoefficients, *, validate: bool = False) -> Capacity:
    """mu(A) = sum_{B subset A} d(B)."""
    _check_size(coeffs.n)
    return Capacity.from_values(coeffs.n, _subset_transform(list(coeffs.values), coeffs.n, +1), validate=validate)


def _as_values(f: Sequence) -> list:
    vals = list(f)
    if not vals:
        raise CapacityError("empty function")
    return vals


def ascending_order(f: Sequence) -> list[int]:
    """0-based positions sorted by value; equal values keep index order."""
    return sorted(range(len(f)), key=lambda i: (f[i], i))


def choquet_weights(f: Sequence, mu: Capacity) -> list:
    """nu weights, aligned with the positions of ``f``.

    With f ascending along sigma and A_k = {sigma(k), ..., sigma(N)}:
    nu(sigma(k)) = mu(A_k) - mu(A_{k+1}).
    """
    vals = _as_values(f)
    if len(vals) != mu.n:
        raise CapacityError(f"function has {len(vals)} values, capacity has N={mu.n}")
    order = ascending_order(vals)
    weights = [0] * mu.n
    upper = mu.full
    for i in order:
        lower = upper & ~(1 << i)
        weights[i] = mu.values[upper] - mu.values[lower]
        upper = lower
    return weights


def choquet_classical(f: Sequence, mu: Capacity):
    """Rank-based Choquet integral sum_k f(sigma(k)) [mu(A_k) - mu(A_{k+1})]."""
    vals = _as_values(f)
    return sum(w * v for w, v in zip(choquet_weights(vals, mu), vals))


def choquet_layers(f: Sequence, coeffs: MobiusCoefficients) -> list:
    """Per-cardinality contributions ``[C1, ..., CN]`` with Ck = sum_{|A|=k} d(A) min f(A)."""
    vals = _as_values(f)
    n = coeffs.n
    if len(vals) != n:
        raise CapacityError(f"function has {len(vals)} values, coefficients have N={n}")
    layers = [0] * n
    mins = [None] * (1 << n)
    for m in range(1, 1 << n):
        low = m & -m
        i = low.bit_length() - 1
        rest = m ^ low
        mins[m] = vals[i] if rest == 0 else min(vals[i], mins[rest])
        k = popcount(m)
        layers[k - 1] = layers[k - 1] + coeffs.values[m] * mins[m]
    return layers


def choquet_via_mobius(f: Sequence, coeffs: MobiusCoefficients):
    """sum_A d(A) min_{i in A} f(i)."""
    return sum(choquet_layers(f, coeffs))


def comonotonic_functions(f: Sequence, g: Sequence) -> bool:
    """[f(i) - f(j)] [g(i) - g(j)] >= 0 for every pair i, j."""
    f, g = list(f), list(g)
    if len(f) != len(g):
        raise CapacityError("functions live on different ground sets")
    return all(
        (f[i] - f[j]) * (g[i] - g[j]) >= 0 for i in range(len(f)) for j in range(i + 1, len(f))
    )


def additive_capacity(weights: Sequence) -> Capacity:
    """mu(A) = sum_{i in A} w_i with sum w = 1."""
    n = len(weights)
    _check_size(n)
    table = [0] * (1 << n)
    for m in range(1, 1 << n):
        low = m & -m
        table[m] = table[m ^ low] + weights[low.bit_length() - 1]
    return Capacity.from_values(n, table)


def unanimity_capacity(n: int, subset) -> Capacity:
    """mu(B) = 1 if subset is contained in B, else 0; its Choquet integral is min f(subset)."""
    a = subset if isinstance(subset, int) else mask_of(subset)
    if a == 0:
        raise CapacityError("unanimity capacity needs a nonempty set")
    return Capacity.from_values(n, [1 if (m & a) == a else 0 for m in range(1 << n)])


def random_capacity(n: int, rng: np.random.Generator, *, rational: bool = False, denominator: int = 1000) -> Capacity:
    """A random monotone capacity.

    Draws nonnegative Moebius mass on every nonempty set (which guarantees
    monotonicity), normalizes to total 1 and takes the subset sums.  With
    ``rational`` the masses are Fractions with the given denominator.
    """
    _check_size(n)
    size = 1 << n
    if rational:
        raw = [0] + [Fraction(int(x), denominator) for x in rng.integers(0, denominator, size - 1)]
        total = sum(raw)
        if total == 0:
            raw[-1] = Fraction(1)
            total = Fraction(1)
        coeffs = [x / total for x in raw]
    else:
        raw = rng.random(size)
        raw[0] = 0.0
        coeffs = (raw / raw.sum()).tolist()
    table = _subset_transform(coeffs, n, +1)
    table[-1] = 1 if rational else 1.0
    return Capacity.from_values(n, table)


def modularity_defect(mu: Capacity, a, b):
    """delta(A, B) = mu(A u B) + mu(A n B) - mu(A) - mu(B) (>= 0 supermodular, <= 0 submodular)."""
    a = a if isinstance(a, int) else mask_of(a)
    b = b if isinstance(b, int) else mask_of(b)
    v = mu.values
    return v[a | b] + v[a & b] - v[a] - v[b]


def classify_modularity(mu: Capacity, tol: float = 0.0) -> str:
    """'additive', 'supermodular', 'submodular' or 'neither' over all pairs of sets."""
    sign_pos = sign_neg = False
    size = 1 << mu.n
    for a in range(size):
        for b in range(a + 1, size):
            dlt = modularity_defect(mu, a, b)
            sign_pos |= dlt > tol
            sign_neg |= dlt < -tol
    if not (sign_pos or sign_neg):
        return "additive"
    if sign_pos and sign_neg:
        return "neither"
    return "supermodular" if sign_pos else "submodular"
