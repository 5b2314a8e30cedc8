import itertools
import json

import numpy as np
import pytest

from choquetq.choquet import (
    ChainError,
    NonGenericFamilyError,
    choquet_integral,
    choquet_via_mobius_ops,
    commutator_identity_residual,
    displaced_pair_sum,
    mobius_choquet_layers,
    mobius_operators,
    projector_chain,
    span_projector,
    trace_choquet,
    weak_resolution_residual,
)
from choquetq.experiments import AFFINE_THETA1, AFFINE_THETA2, NOISE_BASE
from choquetq.hilbert import coherent_family, displacement, make_context, position_state
from choquetq.phase_space import q_function

from conftest import random_psd


def qr_choquet(family, theta):
    """Batch Gram-Schmidt oracle: orthonormalize the top-d states in descending Q order."""
    d = family.d
    q = np.real(np.einsum("ki,ij,kj->k", family.states.conj(), theta, family.states)) / d
    order = sorted(range(d * d), key=lambda k: (-q[k], -k))[:d]
    basis, _ = np.linalg.qr(family.states[order].T)
    return sum(d * q[k] * np.outer(basis[:, j], basis[:, j].conj()) for j, k in enumerate(order))


@pytest.fixture(scope="module")
def table(family):
    return mobius_operators(family)


def test_chain_invariants(family):
    rng = np.random.default_rng(0)
    I = np.eye(3)
    for _ in range(20):
        q = q_function(family, random_psd(rng))
        chain = projector_chain(family, q.ranking)
        assert chain.nonzero.tolist() == [True] * 3 + [False] * 6
        ws = chain.differences[chain.nonzero]
        for w in ws:
            assert np.linalg.norm(w @ w - w) < 1e-10 and abs(np.trace(w) - 1) < 1e-10
        for a, b in itertools.combinations(ws, 2):
            assert np.linalg.norm(a @ b) < 1e-10
        assert np.linalg.norm(chain.differences.sum(axis=0) - I) < 1e-10
        for j in range(1, 9):
            assert np.linalg.norm(chain.cumulative[j - 1] @ chain.differences[j]) < 1e-10


def test_two_state_step(family):
    ranking = [k for k in range(9) if k not in (4, 7)] + [4, 7]   # 7 on top, then 4
    chain = projector_chain(family, ranking)
    pair = span_projector(family.states[[7, 4]])
    assert np.linalg.norm(pair - (family.projectors[7] + chain.varpi(4))) < 1e-10
    assert np.linalg.norm(chain.varpi(7) - family.projectors[7]) < 1e-12


def test_chain_covariance(family):
    rng = np.random.default_rng(1)
    ctx = family.context
    th = random_psd(rng)
    base = projector_chain(family, q_function(family, th).ranking)
    for g in ctx.points:
        D = displacement(ctx, g)
        moved = projector_chain(family, q_function(family, D @ th @ D.conj().T).ranking)
        for k in base.nonzero_indices:
            p = family.points[k].shifted(g, 3)
            assert np.linalg.norm(moved.varpi(family.index(p)) - D @ base.varpi(k) @ D.conj().T) < 1e-10


def test_invalid_ranking(family):
    with pytest.raises(ValueError, match="permutation"):
        projector_chain(family, [0] * 9)


def test_choquet_matches_qr_oracle(family):
    rng = np.random.default_rng(2)
    for _ in range(50):
        th = random_psd(rng, rank=int(rng.integers(1, 4)))
        assert np.linalg.norm(choquet_integral(family, th).operator - qr_choquet(family, th)) < 1e-9


def test_choquet_identity(family):
    assert np.allclose(choquet_integral(family, np.eye(3)).operator, np.eye(3), atol=1e-12)


def test_choquet_diagonal_operator(family):
    th = np.diag([0.3, 1.7, 4.0])
    res = choquet_integral(family, th)
    q = q_function(family, th)
    assert np.allclose(res.operator, 3 * q.values.max() * np.eye(3), atol=1e-10)


def test_result_presentation(family):
    rng = np.random.default_rng(3)
    th = random_psd(rng)
    res = choquet_integral(family, th)
    recon = sum(v * P for v, P in res.eigen_pairs)
    assert np.linalg.norm(recon - res.operator) < 1e-10
    assert abs(res.trace - trace_choquet(res.q)) < 1e-9
    assert np.linalg.eigvalsh(res.operator).min() > -1e-10
    assert len(res.dominant_points) == 3
    data = json.loads(res.to_json())
    assert len(data["operator"]["re"]) == 3 and len(data["dominant_points"]) == 3


def test_homogeneity_and_shift(family):
    rng = np.random.default_rng(4)
    for _ in range(20):
        th = random_psd(rng)
        c = choquet_integral(family, th).operator
        a, lam = rng.uniform(0, 5), rng.uniform(0, 5)
        assert np.linalg.norm(choquet_integral(family, a * th).operator - a * c) < 1e-9 * (1 + a * np.abs(c).max())
        assert np.linalg.norm(choquet_integral(family, th + lam * np.eye(3)).operator - c - lam * np.eye(3)) < 1e-9


def test_choquet_covariance(family):
    rng = np.random.default_rng(5)
    ctx = family.context
    for _ in range(20):
        th = random_psd(rng)
        c = choquet_integral(family, th).operator
        for g in ctx.points:
            D = displacement(ctx, g)
            cd = choquet_integral(family, D @ th @ D.conj().T).operator
            assert np.linalg.norm(cd - D @ c @ D.conj().T) < 1e-9


def test_trace_choquet_reference_values(family, family_xz):
    assert abs(trace_choquet(q_function(family_xz, NOISE_BASE)) - 3 * (3.023 + 3.023 + 2.095)) < 6e-3
    assert abs(trace_choquet(q_function(family, AFFINE_THETA1)) - 40.5) < 3e-3
    assert abs(trace_choquet(q_function(family, np.eye(3))) - 3) < 1e-12


def test_equal_dominant_values(family_xz):
    # the noiseless base operator has its two largest Q values tied
    q = q_function(family_xz, NOISE_BASE)
    top = np.sort(q.values)[::-1]
    assert abs(top[0] - top[1]) < 1e-9


def test_nongeneric_family_rejected(ctx):
    fam = coherent_family(ctx, position_state(3))
    with pytest.raises(NonGenericFamilyError):
        choquet_integral(fam, np.eye(3) + 0.1 * np.diag([1, 2, 3]))
    # the position family has parallel states: same |X;m> up to phase along one label
    ranking = [k for k in range(9) if k not in (0, 3, 6)] + [6, 3, 0]
    with pytest.raises(ChainError, match="step 2"):
        projector_chain(fam, ranking)
    chain = projector_chain(fam, ranking, allow_dependent=True)
    assert np.linalg.norm(chain.differences.sum(axis=0) - np.eye(3)) < 1e-10


def test_mobius_singletons_and_pairs(family, table):
    for k in range(9):
        assert np.linalg.norm(table[1 << k] - family.projectors[k]) < 1e-12
    for i, j in itertools.combinations(range(9), 2):
        assert abs(np.trace(table[[i, j]])) < 1e-10


def test_weak_resolution(table):
    rep = weak_resolution_residual(table)
    assert rep.full_residual < 1e-8
    assert rep.higher_order_residual < 1e-8
    assert rep.subset_residual < 1e-8
    assert np.linalg.norm(sum(table.layer_sum(k) for k in range(2, 10)) + 2 * np.eye(3)) < 1e-8


def test_displaced_pair_sums(table, ctx):
    for p1, p2 in itertools.combinations(ctx.points, 2):
        assert np.linalg.norm(displaced_pair_sum(table, p1, p2)) < 1e-8


def test_commutator_identity(table, ctx):
    for p1, p2 in itertools.combinations(ctx.points, 2):
        assert commutator_identity_residual(table, p1, p2) < 1e-10


def test_choquet_via_mobius(family, table):
    rng = np.random.default_rng(6)
    for _ in range(30):
        th = random_psd(rng, rank=int(rng.integers(1, 4)))
        assert np.linalg.norm(choquet_via_mobius_ops(family, th, table=table) - choquet_integral(family, th).operator) < 1e-7
    layers = mobius_choquet_layers(table, q_function(family, np.eye(3)))
    assert np.allclose(sum(layers), np.eye(3), atol=1e-10)


def test_tie_swap_invariance(family_xz):
    q = q_function(family_xz, NOISE_BASE)
    tied = [int(k) for k in q.dominant_indices[:2]]
    ranking = q.ranking.tolist()
    swapped = ranking.copy()
    i, j = ranking.index(tied[0]), ranking.index(tied[1])
    swapped[i], swapped[j] = swapped[j], swapped[i]
    a = projector_chain(family_xz, ranking)
    b = projector_chain(family_xz, swapped)
    ca = sum(3 * q.values[k] * a.varpi(k) for k in a.nonzero_indices)
    cb = sum(3 * q.values[k] * b.varpi(k) for k in b.nonzero_indices)
    assert np.linalg.norm(ca - cb) < 1e-8


def test_mobius_table_limits():
    fam5 = coherent_family(make_context(5), np.ones(5) / np.sqrt(5) + 0.0, genericity_samples=10)
    with pytest.raises(ValueError, match="d=3"):
        mobius_operators(fam5)


def test_low_order_mobius_d5():
    rng = np.random.default_rng(7)
    v = rng.normal(size=5) + 1j * rng.normal(size=5)
    fam = coherent_family(make_context(5), v / np.linalg.norm(v), genericity_samples=50)
    tab = mobius_operators(fam, max_order=2)
    assert not tab.full and len(tab.operators) == 25 + 300
    for i, j in [(0, 1), (3, 17), (24, 5)]:
        P = span_projector(fam.states[[i, j]])
        assert np.linalg.norm(tab[[i, j]] - (P - fam.projectors[i] - fam.projectors[j])) < 1e-10
        assert commutator_identity_residual(tab, fam.points[i], fam.points[j]) < 1e-10
    assert np.linalg.norm(tab.layer_sum(1) / 5 - np.eye(5)) < 1e-10
    # the displaced-pair sum only needs pairs
    assert np.linalg.norm(displaced_pair_sum(tab, (0, 0), (1, 3))) < 1e-8


def test_affine_interval_matrices_commute(family):
    def c(lam):
        return choquet_integral(family, AFFINE_THETA1 + lam * AFFINE_THETA2).operator

    for la, lb in [(0.02, 0.05), (0.1, 0.4)]:
        b = (c(lb) - c(la)) / (lb - la)
        a = c(la) - la * b
        assert np.linalg.norm(a @ b - b @ a) < 1e-8
        mid = 0.5 * (la + lb)
        assert np.linalg.norm(c(mid) - (a + mid * b)) < 1e-9
