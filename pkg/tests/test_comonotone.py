import itertools
import json
import warnings

import numpy as np
import pytest

from choquetq.choquet import choquet_integral
from choquetq.comonotone import (
    GridTooCoarseWarning,
    OperatorPath,
    PathNotPSDError,
    bounded_family_check,
    class_count,
    comonotonic_additivity_check,
    comonotonic_operators,
    comonotonicity_report,
    preorder_compare,
    scan_intervals,
)
from choquetq.experiments import (
    AFFINE_THETA1,
    AFFINE_THETA2,
    ground_projector,
    ground_state_path,
    quadratic_hamiltonian,
)
from choquetq.hilbert import displacement
from choquetq.phase_space import q_function

from conftest import random_psd


def affine(lam):
    return AFFINE_THETA1 + lam * AFFINE_THETA2


def linear_crossings(family, lo, hi):
    """Oracle: Q is affine in lambda, so every pairwise crossing is a root of a
    linear function; keep those where the ordered top-3 actually changes."""
    q1 = q_function(family, AFFINE_THETA1).values
    q2 = q_function(family, AFFINE_THETA2).values

    def top(lam):
        v = q1 + lam * q2
        return tuple(np.argsort(-v, kind="stable")[:3])

    roots = []
    for a, b in itertools.combinations(range(9), 2):
        if q2[a] != q2[b]:
            lam = (q1[b] - q1[a]) / (q2[a] - q2[b])
            if lo < lam < hi and top(lam - 1e-7) != top(lam + 1e-7):
                roots.append(lam)
    return sorted(roots)


def test_scan_affine_boundaries(family):
    rep = scan_intervals(family, OperatorPath.affine(AFFINE_THETA1, AFFINE_THETA2, 0, 0.7, 200), 1e-6)
    expected = linear_crossings(family, 0, 0.7)
    assert len(expected) == 4
    assert np.allclose(rep.boundaries, expected, atol=2e-6)
    assert np.allclose(rep.boundaries, [0.072, 0.438, 0.561, 0.598], atol=1e-3)
    sigs = [tuple(tuple(p) for p in iv.signature) for iv in rep.intervals]
    assert sigs[0] == ((1, 0), (0, 0), (2, 0))
    assert sigs[-1] == ((0, 0), (0, 2), (0, 1))
    # intervals partition the range
    assert rep.intervals[0].start == 0 and rep.intervals[-1].end == 0.7
    for a, b in zip(rep.intervals[:-1], rep.intervals[1:]):
        assert a.end == b.start


def test_scan_coarse_grid_warns_and_refines(family):
    path = OperatorPath.affine(AFFINE_THETA1, AFFINE_THETA2, 0, 0.7, 2)
    with pytest.warns(GridTooCoarseWarning):
        rep = scan_intervals(family, path, 1e-7)
    assert np.allclose(rep.boundaries, linear_crossings(family, 0, 0.7), atol=1e-6)


def test_scan_constant_path(family):
    rng = np.random.default_rng(0)
    th = random_psd(rng)
    rep = scan_intervals(family, OperatorPath.affine(th, np.zeros((3, 3)), 0, 1, 20))
    assert len(rep.intervals) == 1 and rep.crossings == ()


def test_scan_psd_violation(family):
    path = OperatorPath.affine(np.eye(3), -np.eye(3), 0, 2, 11)
    with pytest.raises(PathNotPSDError) as info:
        scan_intervals(family, path)
    assert info.value.lam > 1


def test_scan_ground_state_path(family_xz):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GridTooCoarseWarning)
        rep = scan_intervals(family_xz, ground_state_path(quadratic_hamiltonian, 0, 1, 100))
    lams = [c.lam for c in rep.crossings]
    for lo in (0.3, 0.4, 0.7):
        assert any(lo < x <= lo + 0.1 for x in lams)
    assert all(any(lo < x <= lo + 0.1 for lo in (0.3, 0.4, 0.7)) for x in lams)


def test_scan_serialization(family):
    rep = scan_intervals(family, OperatorPath.affine(AFFINE_THETA1, AFFINE_THETA2, 0, 0.7, 50))
    data = json.loads(rep.to_json())
    assert len(data["intervals"]) == 5 and len(data["crossings"]) == 4
    lines = rep.to_csv().strip().splitlines()
    assert lines[0] == "start,end,dominant_points" and len(lines) == 6


def test_operator_path_validation():
    with pytest.raises(ValueError):
        OperatorPath(0, 1, 10)
    with pytest.raises(ValueError):
        OperatorPath.affine(np.eye(3), np.eye(3), 1, 0)
    with pytest.raises(ValueError):
        OperatorPath.affine(np.eye(3), np.eye(3), 0, 1, grid_size=1)


def test_comonotonic_examples(family):
    rng = np.random.default_rng(1)
    th = random_psd(rng)
    assert comonotonic_operators(family, th, 2 * th, verify=True)
    assert comonotonic_operators(family, th, np.eye(3), verify=True)
    assert comonotonic_operators(family, affine(0.1), affine(0.2), verify=True)
    assert not comonotonic_operators(family, affine(0.02), affine(0.2))


def test_comonotonic_report(family):
    rep = comonotonicity_report(family, affine(0.1), affine(0.3))
    assert rep.comonotonic and rep.varpi_residual < 1e-10 and rep.commutator_norm < 1e-9
    assert comonotonicity_report(family, affine(0.0), affine(0.65)).commutator_norm is None


def test_comonotonicity_covariant(family):
    ctx = family.context
    t, p = affine(0.1), affine(0.3)
    for g in ctx.points:
        D = displacement(ctx, g)
        assert comonotonic_operators(family, D @ t @ D.conj().T, D @ p @ D.conj().T)


def test_comonotonic_additivity(family):
    rng = np.random.default_rng(2)
    th = random_psd(rng)
    chk = comonotonic_additivity_check(family, th, 3 * th + 2 * np.eye(3), 1.5, 0.5)
    assert chk.status == "checked" and chk.residual < 1e-9 and chk.passed
    chk = comonotonic_additivity_check(family, affine(0.1), affine(0.4))
    assert chk.status == "checked" and chk.residual < 1e-9
    # a generic random pair is usually not comonotonic: residual reported, not asserted
    chk = comonotonic_additivity_check(family, random_psd(rng), random_psd(rng))
    if not chk.comonotonic:
        assert chk.status == "skipped_not_comonotonic" and chk.passed is None
    with pytest.raises(ValueError):
        comonotonic_additivity_check(family, th, th, -1, 1)


def test_preorder(family, family_xz):
    rng = np.random.default_rng(3)
    th = random_psd(rng)
    assert preorder_compare(family, 2 * th, th) == "succeeds"
    assert preorder_compare(family, th, 2 * th) == "precedes"
    assert preorder_compare(family, th, th) == "equivalent"
    p5 = ground_projector(quadratic_hamiltonian(0.5)).projector
    p7 = ground_projector(quadratic_hamiltonian(0.7)).projector
    assert preorder_compare(family_xz, p5, p7) == "precedes"


def test_preorder_addition_compatible(family):
    rng = np.random.default_rng(4)
    for _ in range(20):
        th = random_psd(rng)
        a, b, c, e = rng.uniform(0.1, 3, 4)
        t1, t2, t3 = a * th, b * th, c * th + e * np.eye(3)
        order = preorder_compare(family, t1, t2)
        assert preorder_compare(family, t1 + t3, t2 + t3) == order


def test_comonotonicity_not_transitive(family):
    # I is comonotonic with everything, yet two operators need not be comonotonic
    t1, t3 = affine(0.0), affine(0.65)
    assert comonotonic_operators(family, t1, np.eye(3))
    assert comonotonic_operators(family, np.eye(3), t3)
    assert not comonotonic_operators(family, t1, t3)


def test_class_count():
    assert class_count(3) == 504
    assert class_count(5) == 6_375_600
    assert class_count(1) == 1
    assert class_count(7) == 49 * 48 * 47 * 46 * 45 * 44 * 43
    with pytest.raises(ValueError):
        class_count(4)


def test_bounded_family(family, family_xz):
    path = OperatorPath.affine(AFFINE_THETA1, AFFINE_THETA2, 0, 0.7)
    rep = bounded_family_check(family, path, 0.1, 0.4)
    assert rep.bounded and not rep.approximate and len(rep.samples) == 10
    assert bounded_family_check(family, path, 0.2, 0.2).bounded
    with pytest.raises(ValueError, match="comonotonic"):
        bounded_family_check(family, path, 0.02, 0.5)
    gpath = ground_state_path(quadratic_hamiltonian, 0, 1, 100)
    rep = bounded_family_check(family_xz, gpath, 0.5, 0.6)
    assert rep.approximate and rep.bounded


def test_choquet_integrals_commute_within_interval(family):
    cs = [choquet_integral(family, affine(l)).operator for l in (0.45, 0.5, 0.55)]
    for a, b in itertools.combinations(cs, 2):
        assert np.linalg.norm(a @ b - b @ a) < 1e-9
