import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ckspectral.errors import InsufficientDepthError
from ckspectral.markov import (AdjacencyMatrix, ahlfors_constant, annulus_integral,
                               annulus_ratio_bounds, as_word, check_primitive, enumerate_words,
                               extensions, format_word, metric_params, monochain_count,
                               parry_measure, parse_word, perron_frobenius, transition_matrix,
                               ultrametric_distance)

from conftest import random_primitive


def test_word_round_trip():
    for w in [(), (1,), (1, 2, 2, 1), (3, 1, 4)]:
        assert parse_word(format_word(w)) == w
    assert format_word(()) == "-"
    assert format_word((10, 2)) == "10:2"
    assert parse_word("10:2") == (10, 2)
    assert as_word("121") == (1, 2, 1)


def test_non_primitive_rejected():
    with pytest.raises(ValueError):
        AdjacencyMatrix(np.array([[0, 1], [1, 0]]))
    with pytest.raises(ValueError):
        AdjacencyMatrix(np.array([[1, 1], [0, 1]]))
    with pytest.raises(ValueError):
        AdjacencyMatrix(np.array([[1, 2], [1, 1]]))
    ok, k = check_primitive(np.array([[1, 1], [1, 0]]))
    assert ok and k == 2


def test_pf_against_numpy_eig():
    for seed, n in [(3, 3), (5, 4), (7, 4), (6, 3)]:
        a = random_primitive(seed, n)
        pf = perron_frobenius(a)
        w, vr = np.linalg.eig(a.entries.astype(float))
        k = int(np.argmax(w.real))
        assert pf.lambda_max == pytest.approx(w[k].real, abs=1e-12)
        right = np.abs(vr[:, k].real)
        assert np.allclose(pf.u / np.linalg.norm(pf.u), right / np.linalg.norm(right), atol=1e-12)
        assert float(pf.u @ pf.v) == pytest.approx(1.0, abs=1e-14)


def test_golden_mean_pf():
    pf = perron_frobenius(AdjacencyMatrix.golden_mean())
    assert pf.lambda_max == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-15)
    pf2 = perron_frobenius(AdjacencyMatrix.full_shift(2))
    assert pf2.lambda_max == 2.0
    assert np.allclose(pf2.u, 2 ** -0.5)


def test_transition_matrix_stochastic(rand3):
    p = transition_matrix(rand3)
    assert np.allclose(p.sum(axis=1), 1.0, atol=1e-14)
    # stationary distribution of P is u * v
    assert np.allclose(rand3.p @ p, rand3.p, atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 50), n=st.integers(2, 4), depth=st.integers(1, 5))
def test_parry_additivity_random(seed, n, depth):
    pf = perron_frobenius(random_primitive(seed, n))
    for w in extensions(pf.adjacency, (), depth):
        children = sum(parry_measure(pf, w + (k,)) for k in range(1, n + 1))
        assert children == pytest.approx(parry_measure(pf, w), rel=1e-13)


def test_parry_shift_invariance(golden):
    # mu(sigma^-1 C(w)) = sum_a mu(C(aw))
    for w in extensions(golden.adjacency, (), 4):
        pre = sum(parry_measure(golden, (a,) + w) for a in (1, 2))
        assert pre == pytest.approx(parry_measure(golden, w), rel=1e-13)


def test_inadmissible_measure_zero(golden):
    assert parry_measure(golden, (2, 2)) == 0.0
    assert extensions(golden.adjacency, (2, 2), 3) == ()


def test_ultrametric_needs_depth(full2):
    params = metric_params(full2)
    with pytest.raises(InsufficientDepthError):
        ultrametric_distance((1, 2), (1, 2, 1), params)
    assert ultrametric_distance((1, 2, 1), (1, 1), params) == 0.5


def test_ahlfors_brute_force(golden, rand3):
    for pf in (golden, rand3):
        rep = ahlfors_constant(pf, 8)
        ratios = [parry_measure(pf, w) * pf.lambda_max ** n
                  for n in range(1, 9) for w in extensions(pf.adjacency, (), n)]
        lo, hi = min(ratios + [1.0]), max(ratios + [1.0])
        assert rep.min_ratio == pytest.approx(lo, rel=1e-12)
        assert rep.max_ratio == pytest.approx(hi, rel=1e-12)
        assert rep.constant == pytest.approx(max(hi, 1 / lo), rel=1e-12)


def _annulus_oracle(pf, params, x, n, s, extra):
    """Brute-force average over all continuations of ``x`` by ``extra`` letters.

    Strata are summed directly and the innermost ball is charged at its
    outer radius, so the error decays geometrically in ``extra``.
    """
    deep = extensions(pf.adjacency, tuple(x), len(x) + extra)
    total = 0.0
    for z in deep:
        w = parry_measure(pf, z) / parry_measure(pf, x)
        acc = 0.0
        for c in range(n, len(z)):
            acc += (params.lam ** (-c * (s - params.delta))
                    * (parry_measure(pf, z[:c]) - parry_measure(pf, z[:c + 1])))
        acc += params.lam ** (-len(z) * (s - params.delta)) * parry_measure(pf, z)
        total += w * acc
    return total


@pytest.mark.parametrize("name", ["full2", "golden", "rand3"])
def test_annulus_integral_oracle(name, request):
    pf = request.getfixturevalue(name)
    params = metric_params(pf, 2.0)
    s = 1.5
    for x in list(extensions(pf.adjacency, (), 3))[:4]:
        for n in range(0, 4):
            got = annulus_integral(pf, params, x, params.lam ** -n, s)
            ref = _annulus_oracle(pf, params, x, n, s, 12)
            assert got == pytest.approx(ref, rel=1e-4)


def test_annulus_integral_full_shift_exact(full2):
    params = metric_params(full2, 2.0)
    s = 0.7
    # full 2-shift with lam = 2: delta = 1, stratum c has mass 2**-(c+1)
    n = 2
    expected = sum(2.0 ** (-c * (s - 1)) * 2.0 ** (-(c + 1)) for c in range(n, 2000))
    assert annulus_integral(full2, params, (1, 2, 1), 0.25, s) == pytest.approx(expected, rel=1e-13)


def test_annulus_errors(full2):
    params = metric_params(full2)
    with pytest.raises(ValueError):
        annulus_integral(full2, params, (1,), 0.5, 0.0)
    with pytest.raises(InsufficientDepthError):
        annulus_integral(full2, params, (1,), 0.25, 1.0)


def test_annulus_ratio_bounded(golden):
    params = metric_params(golden, 2.0)
    lo4, hi4 = annulus_ratio_bounds(golden, params, 1.0, 4)
    lo6, hi6 = annulus_ratio_bounds(golden, params, 1.0, 6)
    assert 0 < lo6 <= lo4 <= hi4 <= hi6 < np.inf
    assert lo6 > 0.5 * lo4 and hi6 < 2 * hi4


def test_metric_params_validation(full2):
    with pytest.raises(ValueError):
        metric_params(full2, 1.0)
    p = metric_params(full2, None)
    assert p.lam == 2.0 and p.delta == pytest.approx(1.0)


def test_monochain_count(golden):
    assert monochain_count(golden.adjacency, (1, 2, 1, 1)) == 2
    for w in extensions(golden.adjacency, (), 9):
        if w[-1] == 1:
            assert monochain_count(golden.adjacency, w) > len(w) / 9


def test_enumerate_words_counts(golden):
    counts = [len(level) for level in enumerate_words(golden.adjacency, 6)]
    assert counts == [1, 2, 3, 5, 8, 13, 21]


def test_free_group_structure():
    a = AdjacencyMatrix.free_group(2)
    assert a.n == 4
    assert all(a.outdegree(i) == 3 for i in range(1, 5))
    assert not a.allowed(1, 2) and not a.allowed(3, 4)


def test_ultrametric_exhaustive_small(full2):
    params = metric_params(full2)
    words = extensions(full2.adjacency, (), 4)
    for x, y, z in itertools.product(words, repeat=3):
        if len({x, y, z}) < 3:
            continue
        assert ultrametric_distance(x, z, params) <= max(ultrametric_distance(x, y, params),
                                                         ultrametric_distance(y, z, params))
