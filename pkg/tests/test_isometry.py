import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ckspectral.errors import CapacityError
from ckspectral.groupoid import BisectionIndex
from ckspectral.isometry import (GraphAutomorphism, IsometryElement, aut_group, decompose_monomial,
                                 is_in_G_A, isometry_verification, lie_algebra_check, phase,
                                 phi_u_images, random_element, unitary_U_u)
from ckspectral.markov import AdjacencyMatrix
from ckspectral.operators import TruncationWindow, spectral_norm

from conftest import random_primitive


def _random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_aut_group_orders():
    assert len(aut_group(AdjacencyMatrix.full_shift(3))) == 6
    assert len(aut_group(AdjacencyMatrix.full_shift(4))) == 24
    assert len(aut_group(AdjacencyMatrix.golden_mean())) == 1
    # free group on 2 generators: signed permutations of {a, b} and inversions, order 8
    assert len(aut_group(AdjacencyMatrix.free_group(2))) == 8
    with pytest.raises(CapacityError):
        aut_group(AdjacencyMatrix.full_shift(11))


@pytest.mark.parametrize("adjacency", [AdjacencyMatrix.free_group(2), random_primitive(3, 4)])
def test_aut_group_is_a_group(adjacency):
    group = aut_group(adjacency)
    images = {g.images for g in group}
    assert GraphAutomorphism.identity(adjacency.n).images in images
    for g, h in itertools.product(group, repeat=2):
        assert g.compose(h).images in images
    for g in group:
        assert g.inverse().images in images
        assert g.compose(g.inverse()) == GraphAutomorphism.identity(adjacency.n)
        assert np.array_equal(g.matrix @ adjacency.entries @ g.matrix.T, adjacency.entries)


def test_group_law_of_elements():
    a = AdjacencyMatrix.free_group(2)
    rng = np.random.default_rng(1)
    group = aut_group(a)
    for _ in range(10):
        x, y = random_element(group, rng), random_element(group, rng)
        assert np.allclose(x.compose(y).matrix, x.matrix @ y.matrix, atol=1e-14)
    with pytest.raises(ValueError):
        IsometryElement((2.0, 1.0), GraphAutomorphism((1, 2)))


def test_full_shift_accepts_all_unitaries():
    rng = np.random.default_rng(4)
    for n in (2, 3):
        a = AdjacencyMatrix.full_shift(n)
        for _ in range(5):
            assert is_in_G_A(a, _random_unitary(rng, n)).ok


def test_golden_rejects_with_named_condition():
    rng = np.random.default_rng(4)
    report = is_in_G_A(AdjacencyMatrix.golden_mean(), _random_unitary(rng, 2))
    assert not report.ok and not report
    assert any(v.startswith(("orthogonality", "range", "balance")) for v in report.violations)
    with pytest.raises(ValueError):
        is_in_G_A(AdjacencyMatrix.golden_mean(), np.ones((2, 2)))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 200), which=st.sampled_from(["free2", "rand4", "golden"]))
def test_monomial_membership_matches_automorphisms(seed, which):
    a = {"free2": AdjacencyMatrix.free_group(2), "rand4": random_primitive(3, 4),
         "golden": AdjacencyMatrix.golden_mean()}[which]
    rng = np.random.default_rng(seed)
    perm = tuple(int(k) + 1 for k in rng.permutation(a.n))
    q = GraphAutomorphism(perm)
    c = np.exp(2j * np.pi * rng.random(a.n))
    u = np.diag(c) @ q.matrix
    assert is_in_G_A(a, u).ok == q.preserves(a)


def test_lie_algebra():
    a = AdjacencyMatrix.full_shift(3)
    rng = np.random.default_rng(0)
    z = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert lie_algebra_check(a, z - z.conj().T)
    g = AdjacencyMatrix.golden_mean()
    assert lie_algebra_check(g, np.diag([1j, -2j]))
    assert not lie_algebra_check(g, np.array([[0, 1], [-1, 0]], dtype=complex))
    with pytest.raises(ValueError):
        lie_algebra_check(g, np.eye(2))


def test_lie_algebra_is_tangent_to_membership():
    # exp(eps X) stays in the group to first order exactly when X passes the check
    for a in (AdjacencyMatrix.golden_mean(), AdjacencyMatrix.free_group(2), random_primitive(5, 4)):
        rng = np.random.default_rng(2)
        for _ in range(5):
            z = rng.normal(size=(a.n, a.n)) + 1j * rng.normal(size=(a.n, a.n))
            x = z - z.conj().T
            w, v = np.linalg.eigh(1j * x)
            u = v @ np.diag(np.exp(-1j * 1e-3 * w)) @ v.conj().T
            assert is_in_G_A(a, u, tol=1e-9).ok == lie_algebra_check(a, x)


def test_decompose_monomial():
    a = AdjacencyMatrix.free_group(2)
    group = aut_group(a)
    el = random_element(group, np.random.default_rng(3))
    back = decompose_monomial(a, el.matrix)
    assert back.q == el.q and np.allclose(back.c, el.c)
    with pytest.raises(ValueError):
        decompose_monomial(a, _random_unitary(np.random.default_rng(0), 4))
    with pytest.raises(ValueError):
        decompose_monomial(a, GraphAutomorphism((3, 2, 1, 4)).matrix)


def test_phase():
    c = (1j, -1.0)
    assert phase(BisectionIndex((1,), (2, 1)), c) == pytest.approx(1j * -1.0)
    assert phase(BisectionIndex((), (2,)), c) == 1


@pytest.mark.parametrize("which,L", [("full3", 3), ("golden", 4), ("free2", 2)])
def test_isometry_commutators(which, L, request):
    pf = request.getfixturevalue(which)
    window = TruncationWindow(pf, L, L)
    group = aut_group(pf.adjacency)
    rng = np.random.default_rng(7)
    for _ in range(3):
        x, y = random_element(group, rng), random_element(group, rng)
        norms = isometry_verification(window, x)
        assert max(norms.values()) < 1e-10
        lhs = unitary_U_u(window, x).matrix @ unitary_U_u(window, y).matrix
        assert spectral_norm(lhs - unitary_U_u(window, x.compose(y)).matrix) < 1e-10


def test_fourier_family_transport(full3):
    window = TruncationWindow(full3, 2, 3, "fourier")
    el = random_element(aut_group(full3.adjacency), np.random.default_rng(5))
    assert max(isometry_verification(window, el).values()) < 1e-10


def test_phi_u_images_preserve_relations(full2):
    window = TruncationWindow(full2, 4, 4)
    u = _random_unitary(np.random.default_rng(9), 2)
    images, residual = phi_u_images(window, u)
    assert len(images) == 2 and residual.interior < 1e-12
    with pytest.raises(ValueError):
        phi_u_images(TruncationWindow(perron_golden(), 2, 2), _random_unitary(np.random.default_rng(1), 2))


def perron_golden():
    from ckspectral.markov import perron_frobenius
    return perron_frobenius(AdjacencyMatrix.golden_mean())


def test_unitary_requires_automorphism(golden):
    window = TruncationWindow(golden, 2, 2)
    with pytest.raises(ValueError):
        unitary_U_u(window, IsometryElement((1, 1), GraphAutomorphism((2, 1))))
