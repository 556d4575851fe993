"""
Haar-type orthonormal bases on cylinders and their lift to bisections.

For a nonempty admissible word ``beta`` the space ``L^2(C(beta), mu)`` has
the orthonormal basis ``H(beta)``. It consists of the normalised indicator
``h_beta`` together with wavelets ``h_{nu, j}`` attached to every node
``nu`` that extends ``beta`` and has a branching last letter. A wavelet at
``nu`` is constant on each child cylinder ``C(nu k)``. It has zero mean and
unit norm, and wavelets at the same node are mutually orthogonal.

Wavelets depend on the node only, never on ``beta``. The same ``(nu, j)``
object therefore belongs to ``H(beta)`` for every prefix ``beta`` of ``nu``.

Two families are available:

``"gram_schmidt"``
    Orthonormalise ``[sqrt(m) / |sqrt(m)|, e_1, ..., e_{d-1}]`` in ``C^d``
    and drop the first vector, with ``m`` the child measures in letter
    order. Works for every primitive matrix.
``"fourier"``
    Roots of unity ``mu(C(nu))**-0.5 * exp(2 pi i j (k-1) / d)`` on the
    ``k``-th child. Valid only when all children of the node carry equal
    measure, as in the full shift and the free group.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .groupoid import BisectionIndex
from .markov import PerronFrobeniusData, Word, extensions, parry_measure

__all__ = [
    "FAMILIES",
    "node_wavelets",
    "WaveletFunction",
    "LocallyConstantFn",
    "HaarBasis",
    "build_basis",
    "inner_product",
    "lift_to_groupoid",
    "indicator",
]

FAMILIES = ("gram_schmidt", "fourier")


def _gram_schmidt_directions(weights: np.ndarray) -> np.ndarray:
    d = len(weights)
    w = weights / np.linalg.norm(weights)
    basis = [w.astype(complex)]
    for k in range(d - 1):
        e = np.zeros(d, dtype=complex)
        e[k] = 1.0
        for _ in range(2):
            for b in basis:
                e = e - np.vdot(b, e) * b
        basis.append(e / np.linalg.norm(e))
    return np.array(basis[1:])


@lru_cache(maxsize=None)
def _directions(pf: PerronFrobeniusData, last: int, family: str) -> np.ndarray:
    children = pf.adjacency.successors(last)
    d = len(children)
    weights = np.sqrt(np.array([pf.u[k - 1] for k in children]))
    if family == "gram_schmidt":
        return _gram_schmidt_directions(weights)
    if family == "fourier":
        if not np.allclose(weights, weights[0], rtol=1e-12, atol=0):
            raise ValueError("the fourier family needs children of equal measure")
        k = np.arange(d)
        return np.array([np.exp(2j * np.pi * j * k / d) / np.sqrt(d) for j in range(1, d)])
    raise ValueError(f"unknown wavelet family {family!r}; choose from {FAMILIES}")


def node_wavelets(pf: PerronFrobeniusData, nu: Sequence[int],
                  family: str = "gram_schmidt") -> tuple[tuple[int, ...], np.ndarray]:
    """Child letters of ``nu`` and the values of its wavelets on the children.

    Returns
    -------
    children : tuple of int
        Letters ``k`` with ``nu k`` admissible, increasing.
    values : ndarray, shape (d - 1, d)
        ``values[j - 1, i]`` is the value of ``h_{nu, j}`` on ``C(nu children[i])``.
    """
    nu = tuple(nu)
    if len(nu) == 0 or not pf.adjacency.is_admissible(nu):
        raise ValueError("nu must be a nonempty admissible word")
    children = pf.adjacency.successors(nu[-1])
    directions = _directions(pf, nu[-1], family)
    child_mass = np.array([parry_measure(pf, nu + (k,)) for k in children])
    return children, directions / np.sqrt(child_mass)[None, :]


def _cells(pf: PerronFrobeniusData, base, depth: int) -> tuple[Word, ...]:
    word = base.beta if isinstance(base, BisectionIndex) else tuple(base)
    return extensions(pf.adjacency, word, depth)


@dataclass(frozen=True, eq=False)
class LocallyConstantFn:
    """A function constant on the depth-``depth`` cylinders inside its base.

    ``base`` is a word (the cylinder ``C(base)``) or a bisection label, in
    which case the function lives on ``G_gamma`` and is carried to
    ``C(s(gamma))`` by the source map.
    """

    pf: PerronFrobeniusData
    base: Word | BisectionIndex
    depth: int
    coeffs: np.ndarray

    def __post_init__(self):
        if not isinstance(self.base, BisectionIndex):
            object.__setattr__(self, "base", tuple(self.base))
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.shape != (len(self.cells),):
            raise ValueError(f"expected {len(self.cells)} coefficients, got {coeffs.shape}")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def source_word(self) -> Word:
        return self.base.beta if isinstance(self.base, BisectionIndex) else self.base

    @property
    def cells(self) -> tuple[Word, ...]:
        return _cells(self.pf, self.base, self.depth)

    @property
    def cell_measures(self) -> np.ndarray:
        return np.array([parry_measure(self.pf, c) for c in self.cells])

    def refine(self, depth: int) -> "LocallyConstantFn":
        """Same function written at a finer depth."""
        if depth < self.depth:
            raise ValueError("refinement cannot decrease the depth")
        if depth == self.depth:
            return self
        position = {c: i for i, c in enumerate(self.cells)}
        new_cells = _cells(self.pf, self.base, depth)
        coeffs = np.array([self.coeffs[position[c[:self.depth]]] for c in new_cells])
        return LocallyConstantFn(self.pf, self.base, depth, coeffs)

    def extend_base(self, new_base: Sequence[int]) -> "LocallyConstantFn":
        """Zero-extend a cylinder function to the larger cylinder ``C(new_base)``."""
        if isinstance(self.base, BisectionIndex):
            raise ValueError("bisection functions cannot change base")
        new_base = tuple(new_base)
        if self.base[:len(new_base)] != new_base:
            raise ValueError("new base must be a prefix of the current base")
        position = {c: i for i, c in enumerate(self.cells)}
        new_cells = _cells(self.pf, new_base, self.depth)
        coeffs = np.array([self.coeffs[position[c]] if c in position else 0.0 for c in new_cells])
        return LocallyConstantFn(self.pf, new_base, self.depth, coeffs)

    def integral(self) -> complex:
        return complex(np.sum(self.coeffs * self.cell_measures))


def indicator(pf: PerronFrobeniusData, base, depth: int, cell: Sequence[int] | None = None) -> LocallyConstantFn:
    """Indicator of ``C(cell)`` (default the whole base) at the given depth."""
    cells = _cells(pf, base, depth)
    if cell is None:
        coeffs = np.ones(len(cells))
    else:
        cell = tuple(cell)
        coeffs = np.array([1.0 if c[:len(cell)] == cell else 0.0 for c in cells])
    return LocallyConstantFn(pf, base, depth, coeffs)


@dataclass(frozen=True, eq=False)
class WaveletFunction:
    """The wavelet ``h_{nu, j}``, stored by its values on the children of ``nu``."""

    pf: PerronFrobeniusData
    node: Word
    channel: int
    children: tuple[int, ...]
    values: np.ndarray

    @classmethod
    def build(cls, pf: PerronFrobeniusData, nu: Sequence[int], j: int,
              family: str = "gram_schmidt") -> "WaveletFunction":
        children, values = node_wavelets(pf, nu, family)
        if not 1 <= j <= len(children) - 1:
            raise ValueError(f"channel {j} out of range at node {tuple(nu)}")
        return cls(pf, tuple(nu), j, children, values[j - 1])

    def as_function(self) -> LocallyConstantFn:
        return LocallyConstantFn(self.pf, self.node, len(self.node) + 1, self.values)


def _align(f: LocallyConstantFn, g: LocallyConstantFn):
    if f.pf is not g.pf:
        raise ValueError("functions belong to different shift spaces")
    fb, gb = f.base, g.base
    if isinstance(fb, BisectionIndex) != isinstance(gb, BisectionIndex):
        raise ValueError("cannot pair a cylinder function with a bisection function")
    if isinstance(fb, BisectionIndex):
        if fb != gb:
            return None
    elif fb[:len(gb)] == gb:
        f = f.extend_base(gb)
    elif gb[:len(fb)] == fb:
        g = g.extend_base(fb)
    else:
        raise ValueError("cylinder bases are not nested")
    depth = max(f.depth, g.depth)
    return f.refine(depth), g.refine(depth)


def inner_product(f: LocallyConstantFn, g: LocallyConstantFn) -> complex:
    """Exact ``L^2(mu)`` pairing ``sum conj(f) g mu(cell)``, linear in ``g``.

    Functions on distinct bisections are orthogonal. Cylinder functions must
    have nested bases.
    """
    aligned = _align(f, g)
    if aligned is None:
        return 0j
    f, g = aligned
    return complex(np.sum(np.conj(f.coeffs) * g.coeffs * f.cell_measures))


@dataclass(frozen=True, eq=False)
class HaarBasis:
    """The basis ``H(beta)`` truncated at resolution ``max_res``.

    ``vectors[:, k]`` holds the values of the ``k``-th basis function on the
    depth-``max_res + 1`` cells. Column 0 is ``h_beta``. The other labels
    are ``(nu, j)`` in ``(|nu|, nu, j)`` order.
    """

    pf: PerronFrobeniusData
    base: Word
    max_res: int
    family: str
    cells: tuple[Word, ...]
    labels: tuple
    vectors: np.ndarray

    @property
    def depth(self) -> int:
        return self.max_res + 1

    def function(self, k: int) -> LocallyConstantFn:
        return LocallyConstantFn(self.pf, self.base, self.depth, self.vectors[:, k])

    def gram(self) -> np.ndarray:
        w = np.array([parry_measure(self.pf, c) for c in self.cells])
        return self.vectors.conj().T @ (w[:, None] * self.vectors)


def build_basis(pf: PerronFrobeniusData, beta: Sequence[int], max_res: int,
                family: str = "gram_schmidt") -> HaarBasis:
    """Assemble ``H(beta)`` with wavelet nodes ``|beta| <= |nu| <= max_res``.

    The result spans every function that is constant on depth
    ``max_res + 1`` cylinders inside ``C(beta)``.
    """
    beta = tuple(beta)
    if len(beta) == 0 or not pf.adjacency.is_admissible(beta):
        raise ValueError("beta must be a nonempty admissible word")
    if max_res < len(beta):
        raise ValueError("max_res must be at least |beta|")
    depth = max_res + 1
    cells = extensions(pf.adjacency, beta, depth)
    position = {c: i for i, c in enumerate(cells)}
    columns = [np.full(len(cells), parry_measure(pf, beta) ** -0.5, dtype=complex)]
    labels: list = [None]
    for level in range(len(beta), depth):
        for nu in extensions(pf.adjacency, beta, level):
            if pf.adjacency.outdegree(nu[-1]) < 2:
                continue
            children, values = node_wavelets(pf, nu, family)
            for j in range(1, len(children)):
                col = np.zeros(len(cells), dtype=complex)
                for k, val in zip(children, values[j - 1]):
                    for c in extensions(pf.adjacency, nu + (k,), depth):
                        col[position[c]] = val
                columns.append(col)
                labels.append((nu, j))
    return HaarBasis(pf, beta, max_res, family, cells, tuple(labels), np.column_stack(columns))


def lift_to_groupoid(gamma: BisectionIndex, h) -> LocallyConstantFn:
    """Carry ``h`` (a cylinder function or wavelet) onto ``G_gamma`` via the source map."""
    if isinstance(h, WaveletFunction):
        h = h.as_function()
    if isinstance(h.base, BisectionIndex):
        raise ValueError("h must be a cylinder function")
    beta = gamma.beta
    if h.base[:len(beta)] != beta:
        raise ValueError("the support of h is not inside C(s(gamma))")
    h = h.extend_base(beta)
    return LocallyConstantFn(h.pf, gamma, h.depth, h.coeffs)
