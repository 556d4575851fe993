"""
The logarithmic Dirichlet Laplacian on a cylinder ``C(beta)``.

For functions on ``C(beta)`` the operator is

    (Delta f)(x) = int_{C(beta)} (f(x) - f(y)) d(x, y)**(-delta) dmu(y),

and ``d(x, y)**(-delta) = lambda_max**c`` with ``c`` the common prefix
length. On functions constant on depth-``m`` cells the integrand vanishes
inside a cell. The operator therefore maps the depth-``m`` space into itself
and is represented exactly by a finite matrix. No quadrature is involved.

The wavelet basis diagonalises ``Delta``. The eigenvalue of ``h_{nu, j}``
on ``C(beta)`` is

    lambda_max v[nu_1] ( u[nu_last]
        + sum_{k=0}^{|nu|-|beta|-1} u[nu_{|nu|-k-1}] (1 - P[nu_{|nu|-k-1}, nu_{|nu|-k}]) ).

The leading term ``lambda_max v[nu_1] u[nu_last]`` equals 1 whenever ``u``
and ``v`` are constant, as for the full shift. :func:`eigenvalue_reference_form`
keeps the variant with a constant leading 1 for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .markov import PerronFrobeniusData, Word, extensions, parry_measure, transition_matrix

__all__ = [
    "LaplacianMatrix",
    "common_prefix_matrix",
    "eigenvalue_closed_form",
    "eigenvalue_reference_form",
    "laplacian_matrix",
    "closed_form_spectrum",
    "spectrum_table",
    "eigenvalue_growth_check",
    "branching_extensions",
]


def _check_extension(pf: PerronFrobeniusData, beta: Word, nu: Word) -> None:
    if nu[:len(beta)] != beta:
        raise ValueError("nu must extend beta")
    if len(nu) == 0 or not pf.adjacency.is_admissible(nu):
        raise ValueError("nu must be a nonempty admissible word")


def _branch_sum(pf: PerronFrobeniusData, beta: Word, nu: Word) -> float:
    p = transition_matrix(pf)
    total = 0.0
    for k in range(len(nu) - len(beta)):
        a, b = nu[len(nu) - k - 2], nu[len(nu) - k - 1]
        total += pf.u[a - 1] * (1.0 - p[a - 1, b - 1])
    return total


def eigenvalue_closed_form(pf: PerronFrobeniusData, beta: Sequence[int], nu: Sequence[int]) -> float:
    """Eigenvalue of the wavelets at node ``nu`` for the Laplacian on ``C(beta)``."""
    beta, nu = tuple(beta), tuple(nu)
    _check_extension(pf, beta, nu)
    lead = pf.u[nu[-1] - 1] + _branch_sum(pf, beta, nu)
    return float(pf.lambda_max * pf.v[nu[0] - 1] * lead)


def eigenvalue_reference_form(pf: PerronFrobeniusData, beta: Sequence[int], nu: Sequence[int]) -> float:
    """Variant with leading term 1; agrees with the closed form when ``u``, ``v`` are constant."""
    beta, nu = tuple(beta), tuple(nu)
    _check_extension(pf, beta, nu)
    return float(1.0 + pf.lambda_max * pf.v[nu[0] - 1] * _branch_sum(pf, beta, nu))


def common_prefix_matrix(cells: Sequence[Word]) -> np.ndarray:
    """Matrix of common prefix lengths between equal-length words."""
    w = np.array(cells, dtype=np.int64)
    if w.ndim == 1:
        w = w[:, None]
    out = np.zeros((len(w), len(w)), dtype=np.int64)
    alive = np.ones((len(w), len(w)), dtype=bool)
    for col in w.T:
        alive &= col[:, None] == col[None, :]
        out += alive
    return out


@dataclass(frozen=True, eq=False)
class LaplacianMatrix:
    """Exact Laplacian on depth-``depth`` functions over ``C(base)``.

    ``matrix`` is symmetric and acts on the orthonormal cell basis
    ``chi_P / sqrt(mu(P))``. ``raw`` acts on coefficient vectors of
    locally constant functions.
    """

    base: Word
    depth: int
    cells: tuple[Word, ...]
    measures: np.ndarray
    matrix: np.ndarray

    @property
    def raw(self) -> np.ndarray:
        s = np.sqrt(self.measures)
        return self.matrix * (1.0 / s)[:, None] * s[None, :]


def laplacian_matrix(pf: PerronFrobeniusData, beta: Sequence[int], depth: int) -> LaplacianMatrix:
    """Build the Laplacian of ``C(beta)`` on depth-``depth`` functions.

    The kernel ``d**-delta = lambda_max**c`` does not involve the metric
    scale ``lam``. ``beta`` may be empty, which gives the Laplacian of the
    whole shift space.
    """
    beta = tuple(beta)
    if depth < len(beta) + 1:
        raise ValueError("depth must exceed |beta|")
    if not pf.adjacency.is_admissible(beta):
        raise ValueError("beta is not admissible")
    cells = extensions(pf.adjacency, beta, depth)
    mu = np.array([parry_measure(pf, c) for c in cells])
    weight = pf.lambda_max ** common_prefix_matrix(cells).astype(float)
    np.fill_diagonal(weight, 0.0)
    s = np.sqrt(mu)
    sym = -weight * s[:, None] * s[None, :]
    sym[np.diag_indices_from(sym)] = weight @ mu
    return LaplacianMatrix(beta, depth, cells, mu, sym)


def branching_extensions(pf: PerronFrobeniusData, beta: Sequence[int], max_len: int) -> Iterable[Word]:
    """Nodes ``nu`` with ``|beta| <= |nu| <= max_len`` and a branching last letter."""
    beta = tuple(beta)
    for level in range(len(beta), max_len + 1):
        for nu in extensions(pf.adjacency, beta, level):
            if pf.adjacency.outdegree(nu[-1]) >= 2:
                yield nu


def closed_form_spectrum(pf: PerronFrobeniusData, beta: Sequence[int], depth: int) -> np.ndarray:
    """Sorted eigenvalues predicted for the depth-``depth`` Laplacian on ``C(beta)``."""
    beta = tuple(beta)
    values = [0.0]
    for nu in branching_extensions(pf, beta, depth - 1):
        lam = eigenvalue_closed_form(pf, beta, nu)
        values.extend([lam] * (pf.adjacency.outdegree(nu[-1]) - 1))
    return np.sort(np.array(values))


def spectrum_table(pf: PerronFrobeniusData, beta: Sequence[int], depth: int,
                   family: str = "gram_schmidt") -> list[dict]:
    """Closed form against the matrix oracle, one row per node.

    The oracle value of a node is the Rayleigh quotient ``<h, Delta h>`` of
    its wavelets under the exact matrix. The reported error is the largest
    of ``|Delta h - lambda h|`` (entrywise) and the Rayleigh deviation over
    all channels at the node.
    """
    from .wavelets import build_basis

    beta = tuple(beta)
    lap = laplacian_matrix(pf, beta, depth)
    basis = build_basis(pf, beta, depth - 1, family)
    s = np.sqrt(lap.measures)
    images = lap.matrix @ (s[:, None] * basis.vectors)
    rows: dict[Word, dict] = {}
    for k, label in enumerate(basis.labels):
        if label is None:
            continue
        nu, _ = label
        vec = s * basis.vectors[:, k]
        norm2 = float(np.vdot(vec, vec).real)
        rayleigh = float(np.vdot(vec, images[:, k]).real / norm2)
        closed = eigenvalue_closed_form(pf, beta, nu)
        err = float(np.max(np.abs(images[:, k] - closed * vec)))
        row = rows.setdefault(nu, {"beta": beta, "nu": nu, "multiplicity": 0,
                                   "closed_form": closed, "oracle_value": rayleigh,
                                   "abs_error": 0.0})
        row["multiplicity"] += 1
        row["abs_error"] = max(row["abs_error"], err, abs(rayleigh - closed))
    return list(rows.values())


def eigenvalue_growth_check(pf: PerronFrobeniusData, beta: Sequence[int],
                            samples: Iterable[Sequence[int]]) -> tuple[float, float]:
    """Empirical extremes of ``lambda(nu) / (|nu| - |beta|)`` over the samples."""
    beta = tuple(beta)
    ratios = [eigenvalue_closed_form(pf, beta, tuple(nu)) / (len(nu) - len(beta))
              for nu in samples if len(nu) > len(beta)]
    if not ratios:
        raise ValueError("need at least one sample strictly extending beta")
    c0, c1 = min(ratios), max(ratios)
    assert 0 < c0 <= c1 < np.inf
    return float(c0), float(c1)
