"""
Finite sections of the operators acting on ``L^2`` of the shift groupoid.

The orthonormal basis of ``L^2(G_A)`` consists of the normalised bisection
indicators ``e_gamma`` and the lifted wavelets ``e_(gamma, nu, j)``. A
:class:`TruncationWindow` keeps the vectors with ``|gamma| <= L`` and
``|nu| <= R``. Operators are stored as sparse matrices on that window,
together with a mask of columns whose image is computed without truncation
loss.

Action of the generator ``S_i``
-------------------------------
``S_i`` moves a function on ``G_gamma`` to one bisection, keeping its
source-coordinate profile:

* ``G_{i alpha . beta}`` when that label is a nonempty bisection;
* ``G_{∅.beta_hat}`` when ``alpha`` is empty, ``|beta| >= 2`` and
  ``beta[-2] == i``; the image of ``G_{∅.beta}`` is the part of
  ``G_{∅.beta_hat}`` with source in ``C(beta)``;
* nothing (image 0) otherwise.

Wavelets are node-local, so ``S_i e_(gamma, nu, j) = e_(tau, nu, j)`` with
``tau`` the target bisection. In the second case ``S_i e_gamma`` expands the
normalised indicator of ``C(beta)`` in ``H(beta_hat)``. That expansion
has a component on ``e_tau`` and on the wavelets at node ``beta_hat``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .groupoid import (BisectionIndex, WaveletIndex, enumerate_index_set,
                       enumerate_wavelet_indices, prefix_extend)
from .laplacian import common_prefix_matrix, eigenvalue_closed_form, laplacian_matrix
from .markov import PerronFrobeniusData, Word, extensions, parry_measure
from .wavelets import LocallyConstantFn, build_basis, node_wavelets

__all__ = [
    "TruncationWindow",
    "TruncatedOperator",
    "CKResidual",
    "spectral_norm",
    "sparse_rank",
    "generator_target",
    "generator_matrix",
    "ck_relation_residual",
    "ck_boundary_sweep",
    "fock_projection",
    "fock_projection_beta",
    "potential_matrix",
    "laplacian_window",
    "dirac_matrix",
    "commutator",
    "commutator_norm",
    "commutator_blocks",
    "old_metric_counterexample",
    "metric_block_norms",
    "kms_state",
]


# ---------------------------------------------------------------------------
# sparse linear algebra helpers


def _components(mat: sp.spmatrix):
    """Connected components of the bipartite row/column graph of ``mat``."""
    mat = sp.csr_matrix(mat)
    m, n = mat.shape
    pattern = sp.csr_matrix((np.ones(mat.nnz), mat.indices, mat.indptr), shape=(m, n))
    graph = sp.bmat([[None, pattern], [pattern.T, None]], format="csr")
    count, labels = connected_components(graph, directed=False)
    return count, labels[:m], labels[m:]


def _blocks(mat: sp.spmatrix):
    mat = sp.csr_matrix(mat)
    mat.eliminate_zeros()
    if mat.nnz == 0:
        return
    _, row_lab, col_lab = _components(mat)
    rows_by = {}
    for r, lab in enumerate(row_lab):
        rows_by.setdefault(lab, []).append(r)
    cols_by = {}
    for c, lab in enumerate(col_lab):
        cols_by.setdefault(lab, []).append(c)
    for lab, rows in rows_by.items():
        cols = cols_by.get(lab)
        if cols:
            yield mat[rows][:, cols].toarray()


def spectral_norm(mat) -> float:
    """Largest singular value, computed exactly block by block.

    The matrix splits into independent dense blocks along the connected
    components of its sparsity graph; the norm is the largest block norm.
    """
    if not sp.issparse(mat):
        mat = sp.csr_matrix(np.asarray(mat))
    best = 0.0
    for block in _blocks(mat):
        best = max(best, float(np.linalg.norm(block, 2)))
    return best


def sparse_rank(mat, tol: float = 1e-10) -> int:
    """Numerical rank, summed over independent blocks."""
    if not sp.issparse(mat):
        mat = sp.csr_matrix(np.asarray(mat))
    return int(sum(np.linalg.matrix_rank(b, tol=tol) for b in _blocks(mat)))


# ---------------------------------------------------------------------------
# windows and operators


class TruncationWindow:
    """Basis vectors with ``|gamma| <= L`` and wavelet resolution ``|nu| <= R``.

    The ordered basis lists every ``e_gamma`` (by length, alpha, beta)
    followed by every ``e_(gamma, nu, j)`` grouped by ``gamma``.
    """

    def __init__(self, pf: PerronFrobeniusData, L: int, R: int | None = None,
                 family: str = "gram_schmidt"):
        R = L if R is None else R
        if L < 1 or R < L:
            raise ValueError("need 1 <= L <= R")
        self.pf = pf
        self.L = L
        self.R = R
        self.family = family
        self.gammas = enumerate_index_set(pf.adjacency, L)
        wavelets = [w for g in self.gammas for w in enumerate_wavelet_indices(pf.adjacency, g, R)]
        self.labels: list = list(self.gammas) + wavelets
        self.index = {lab: k for k, lab in enumerate(self.labels)}
        if len(self.index) != len(self.labels):
            raise AssertionError("duplicate basis labels")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return len(self.labels)

    @staticmethod
    def gamma_of(label) -> BisectionIndex:
        return label.gamma if isinstance(label, WaveletIndex) else label

    @cached_property
    def lengths(self) -> np.ndarray:
        return np.array([self.gamma_of(lab).length for lab in self.labels])

    @cached_property
    def is_wavelet(self) -> np.ndarray:
        return np.array([isinstance(lab, WaveletIndex) for lab in self.labels])

    @cached_property
    def is_fock(self) -> np.ndarray:
        return np.array([not isinstance(lab, WaveletIndex) and len(lab.beta) == 1
                         for lab in self.labels])

    @cached_property
    def laplacian_eigenvalues(self) -> np.ndarray:
        cache: dict = {}
        out = np.zeros(self.dim)
        for k, lab in enumerate(self.labels):
            if isinstance(lab, WaveletIndex):
                key = (lab.gamma.beta, lab.nu)
                if key not in cache:
                    cache[key] = eigenvalue_closed_form(self.pf, *key)
                out[k] = cache[key]
        return out

    @cached_property
    def dirac_diagonal(self) -> np.ndarray:
        """Eigenvalues of ``D``: ``+|gamma|`` on the Fock part, ``-(|gamma| + lambda)`` elsewhere."""
        sign = np.where(self.is_fock, 1.0, -1.0)
        return sign * (self.lengths + self.laplacian_eigenvalues)

    def manifest(self) -> list[dict]:
        """One record per basis vector: position, bisection, node and channel."""
        rows = []
        for k, lab in enumerate(self.labels):
            g = self.gamma_of(lab)
            rows.append({"index": k, "gamma": str(g),
                         "nu": lab.nu if isinstance(lab, WaveletIndex) else None,
                         "j": lab.j if isinstance(lab, WaveletIndex) else 0})
        return rows


@dataclass(eq=False)
class TruncatedOperator:
    """Sparse matrix on a window plus the mask of exactly computed columns."""

    window: TruncationWindow
    matrix: sp.csr_matrix
    exact_columns: np.ndarray = field(default=None)

    def __post_init__(self):
        self.matrix = sp.csr_matrix(self.matrix, dtype=complex)
        if self.exact_columns is None:
            self.exact_columns = np.ones(self.window.dim, dtype=bool)

    @property
    def exact_on_window(self) -> bool:
        return bool(self.exact_columns.all())

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def adjoint(self) -> "TruncatedOperator":
        """Conjugate transpose.

        A column of the adjoint is exact when no basis vector outside the
        window maps onto it. For the shift generators that holds for every
        vector with ``|gamma| < L``.
        """
        if self.exact_on_window:
            mask = np.ones(self.window.dim, dtype=bool)
        else:
            mask = self.window.lengths < self.window.L
        return TruncatedOperator(self.window, self.matrix.conj().T.tocsr(), mask)

    def __matmul__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        prod = (self.matrix @ other.matrix).tocsr()
        return TruncatedOperator(self.window, prod, _product_mask(self, other))

    def __add__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        return TruncatedOperator(self.window, self.matrix + other.matrix,
                                 self.exact_columns & other.exact_columns)

    def __sub__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        return TruncatedOperator(self.window, self.matrix - other.matrix,
                                 self.exact_columns & other.exact_columns)

    def scaled(self, z: complex) -> "TruncatedOperator":
        return TruncatedOperator(self.window, self.matrix * z, self.exact_columns.copy())


def _product_mask(x: TruncatedOperator, y: TruncatedOperator) -> np.ndarray:
    """Columns ``c`` where ``X Y e_c`` is exact: ``Y e_c`` exact and supported on exact columns of X."""
    bad_rows = (~x.exact_columns).astype(float)
    touches_bad = np.asarray(abs(y.matrix).T @ bad_rows).ravel() > 0
    return y.exact_columns & ~touches_bad


def _diagonal(window: TruncationWindow, values) -> TruncatedOperator:
    return TruncatedOperator(window, sp.diags(np.asarray(values, dtype=complex), format="csr"))


def generator_target(adjacency, i: int, gamma: BisectionIndex):
    """Bisection receiving ``S_i`` applied to ``G_gamma`` and which rule applied.

    Returns ``(tau, "prefix")``, ``(tau, "hat")`` or ``(None, None)``.
    """
    tau = prefix_extend(adjacency, i, gamma)
    if tau is not None:
        return tau, "prefix"
    if not gamma.alpha and len(gamma.beta) >= 2 and gamma.beta[-2] == i:
        return BisectionIndex((), gamma.beta[:-1]), "hat"
    return None, None


def generator_matrix(window: TruncationWindow, i: int) -> TruncatedOperator:
    """Compression of ``S_i`` to the window.

    Images that leave the window (``|tau| > L``) are dropped and the column is
    marked inexact.
    """
    pf, adjacency = window.pf, window.pf.adjacency
    rows, cols, vals = [], [], []
    exact = np.ones(window.dim, dtype=bool)
    for col, lab in enumerate(window.labels):
        gamma = window.gamma_of(lab)
        tau, rule = generator_target(adjacency, i, gamma)
        if tau is None:
            continue
        if isinstance(lab, WaveletIndex):
            target = window.index.get(WaveletIndex(tau, lab.nu, lab.j))
            if target is None:
                exact[col] = False
            else:
                rows.append(target), cols.append(col), vals.append(1.0)
            continue
        if rule == "prefix":
            target = window.index.get(tau)
            if target is None:
                exact[col] = False
            else:
                rows.append(target), cols.append(col), vals.append(1.0)
            continue
        # rule "hat": expand mu(C(beta))^-1/2 chi_C(beta) in H(beta_hat)
        beta, beta_hat = gamma.beta, tau.beta
        mass, mass_hat = parry_measure(pf, beta), parry_measure(pf, beta_hat)
        rows.append(window.index[tau]), cols.append(col), vals.append(np.sqrt(mass / mass_hat))
        children, values = node_wavelets(pf, beta_hat, window.family)
        k = children.index(beta[-1])
        for j in range(1, len(children)):
            target = window.index[WaveletIndex(tau, beta_hat, j)]
            rows.append(target), cols.append(col)
            vals.append(np.conj(values[j - 1, k]) * np.sqrt(mass))
    mat = sp.csr_matrix((np.array(vals, dtype=complex), (rows, cols)),
                        shape=(window.dim, window.dim))
    return TruncatedOperator(window, mat, exact)


@dataclass(frozen=True)
class CKResidual:
    """Residual norms of the Cuntz-Krieger relations on a window.

    ``interior`` uses only basis vectors with ``|gamma| <= L - 2``; every
    operator product is exact on them. ``full`` uses every column.
    """

    interior_sum: float
    interior_products: float
    full_sum: float
    full_products: float
    n_interior: int
    n_boundary: int

    @property
    def interior(self) -> float:
        return max(self.interior_sum, self.interior_products)

    @property
    def full(self) -> float:
        return max(self.full_sum, self.full_products)


def _relation_matrices(window: TruncationWindow, generators=None):
    a = window.pf.adjacency.entries
    n = a.shape[0]
    if generators is None:
        generators = [generator_matrix(window, i).matrix for i in range(1, n + 1)]
    ranges = [g @ g.conj().T for g in generators]
    total = sum(ranges) - sp.identity(window.dim, dtype=complex, format="csr")
    products = []
    for i in range(n):
        expected = sum(a[i, j] * ranges[j] for j in range(n))
        for k in range(n):
            prod = generators[i].conj().T @ generators[k]
            products.append(prod - expected if i == k else prod)
    return total, products


def ck_relation_residual(window: TruncationWindow, generators=None) -> CKResidual:
    """Residuals of ``sum S_i S_i^* = 1`` and ``S_i^* S_k = delta_ik sum_j A_ij S_j S_j^*``.

    ``generators`` may supply alternative images of ``S_1..S_N`` as sparse
    matrices on the window (used for automorphism images).
    """
    total, products = _relation_matrices(window, generators)
    interior = np.flatnonzero(window.lengths <= window.L - 2)
    return CKResidual(
        interior_sum=spectral_norm(total[:, interior]),
        interior_products=max(spectral_norm(p[:, interior]) for p in products),
        full_sum=spectral_norm(total),
        full_products=max(spectral_norm(p) for p in products),
        n_interior=len(interior),
        n_boundary=window.dim - len(interior),
    )


def ck_boundary_sweep(pf: PerronFrobeniusData, L0: int, R: int, extra: Sequence[int] = (0, 1, 2),
                      family: str = "gram_schmidt") -> list[tuple[int, float]]:
    """Relation residual on the fixed vectors of the ``(L0, R)`` window under growing truncation.

    For each ``e`` in ``extra`` the operators are truncated at ``L0 + e``
    and the residual is restricted to the columns with ``|gamma| <= L0``.
    The residual vanishes once ``e >= 2``.
    """
    out = []
    for e in extra:
        window = TruncationWindow(pf, L0 + e, max(R, L0 + e), family)
        total, products = _relation_matrices(window)
        cols = np.flatnonzero(np.array([
            window.gamma_of(lab).length <= L0 and
            (not isinstance(lab, WaveletIndex) or len(lab.nu) <= R)
            for lab in window.labels]))
        res = max([spectral_norm(total[:, cols])] + [spectral_norm(p[:, cols]) for p in products])
        out.append((L0 + e, res))
    return out


def fock_projection(window: TruncationWindow) -> TruncatedOperator:
    """Projection onto ``span{e_gamma : |s(gamma)| = 1}``."""
    return _diagonal(window, window.is_fock.astype(float))


def fock_projection_beta(window: TruncationWindow, beta: Sequence[int]) -> TruncatedOperator:
    """Projection onto ``span{e_gamma : s(gamma) = beta}``."""
    beta = tuple(beta)
    values = [float(not isinstance(lab, WaveletIndex) and lab.beta == beta) for lab in window.labels]
    return _diagonal(window, values)


def potential_matrix(window: TruncationWindow) -> TruncatedOperator:
    """Multiplication by the length function ``|gamma|``."""
    return _diagonal(window, window.lengths.astype(float))


def laplacian_window(window: TruncationWindow, method: str = "closed_form") -> TruncatedOperator:
    """The Laplacian on the window.

    ``method="closed_form"`` uses the eigenvalue formula. ``"oracle"``
    projects the exact depth-``R + 1`` Laplacian matrix of each ``C(beta)``
    onto the window basis, so it is independent of the formula.
    """
    if method == "closed_form":
        return _diagonal(window, window.laplacian_eigenvalues)
    if method != "oracle":
        raise ValueError("method must be 'closed_form' or 'oracle'")
    pf = window.pf
    blocks: dict[Word, np.ndarray] = {}
    rows, cols, vals = [], [], []
    for gamma in window.gammas:
        beta = gamma.beta
        if beta not in blocks:
            lap = laplacian_matrix(pf, beta, window.R + 1)
            basis = build_basis(pf, beta, window.R, window.family)
            b = np.sqrt(lap.measures)[:, None] * basis.vectors
            blocks[beta] = b.conj().T @ lap.matrix @ b
        positions = [window.index[gamma]] + [window.index[w] for w in
                                             enumerate_wavelet_indices(pf.adjacency, gamma, window.R)]
        block = blocks[beta]
        for a, ra in enumerate(positions):
            for b_, cb in enumerate(positions):
                if block[a, b_] != 0:
                    rows.append(ra), cols.append(cb), vals.append(block[a, b_])
    mat = sp.csr_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(window.dim, window.dim))
    return TruncatedOperator(window, mat)


def dirac_matrix(window: TruncationWindow) -> TruncatedOperator:
    """The diagonal operator ``D`` built from its eigenvalue display."""
    return _diagonal(window, window.dirac_diagonal)


def commutator(x: TruncatedOperator, y: TruncatedOperator) -> TruncatedOperator:
    return (x @ y) - (y @ x)


def commutator_norm(x: TruncatedOperator, y: TruncatedOperator) -> float:
    """Norm of ``XY - YX`` restricted to its exactly computed columns."""
    c = commutator(x, y)
    cols = np.flatnonzero(c.exact_columns)
    return spectral_norm(c.matrix[:, cols])


def commutator_blocks(window: TruncationWindow, i: int, tol: float = 0.0) -> dict:
    """Nonzero bisection blocks of ``[Delta, S_i]`` on exact columns.

    Returns a mapping ``(row gamma, column gamma) -> block max-abs``. Blocks
    whose entries are all at most ``tol`` in absolute value are omitted.
    """
    s = generator_matrix(window, i)
    lap = laplacian_window(window)
    c = commutator(lap, s)
    coo = c.matrix.tocoo()
    out: dict = {}
    for r, col, v in zip(coo.row, coo.col, coo.data):
        if not c.exact_columns[col] or abs(v) <= tol:
            continue
        key = (window.gamma_of(window.labels[r]), window.gamma_of(window.labels[col]))
        out[key] = max(out.get(key, 0.0), abs(v))
    return out


# ---------------------------------------------------------------------------
# the merged-component counterexample


def _blockwise_laplacian(pf: PerronFrobeniusData, cells, block_len: int) -> np.ndarray:
    """Laplacian on depth-m cells, acting separately on each ``C(w)`` with ``|w| = block_len``."""
    mu = np.array([parry_measure(pf, c) for c in cells])
    cp = common_prefix_matrix(cells)
    weight = np.where(cp >= block_len, pf.lambda_max ** cp.astype(float), 0.0)
    np.fill_diagonal(weight, 0.0)
    s = np.sqrt(mu)
    sym = -weight * s[:, None] * s[None, :]
    sym[np.diag_indices_from(sym)] = weight @ mu
    return sym


def _check_counterexample_args(pf, i, k, depth):
    if k < 1:
        raise ValueError("k must be at least 1")
    if depth < k + 2:
        raise ValueError("depth must be at least k + 2")
    if not 1 <= i <= pf.n:
        raise ValueError("letter outside the alphabet")


def old_metric_counterexample(pf: PerronFrobeniusData, i: int, k: int, depth: int) -> tuple[float, float]:
    """Growth of the commutator when the metric ignores the bisection structure.

    Take ``f`` the normalised indicator of the merged component
    ``G_{∅,k} = union of G_{∅.beta}`` over ``|beta| = k + 1``. Its source
    image is the whole shift space. ``S_i f`` restricted to ``G_{∅,k-1}``
    is the indicator of ``{y : y_k = i}`` in source coordinates, and
    ``S_i Delta' f = 0``. The returned value is
    ``|Delta' chi_{y_k = i}|``, computed exactly at the given depth. The
    ratio divides it by ``k (1 - mu(C(i)))**0.5``.

    Returns
    -------
    value, ratio : float
    """
    _check_counterexample_args(pf, i, k, depth)
    cells = extensions(pf.adjacency, (), depth)
    lap = laplacian_matrix(pf, (), depth)
    g = np.array([1.0 if c[k - 1] == i else 0.0 for c in cells])
    value = float(np.linalg.norm(lap.matrix @ (np.sqrt(lap.measures) * g)))
    ratio = value / (k * np.sqrt(1.0 - parry_measure(pf, (i,))))
    return value, ratio


def metric_block_norms(pf: PerronFrobeniusData, i: int, k: int, depth: int) -> tuple[float, float]:
    """Operator norms of ``P_{∅,k-1} [Lap, S_i] P_{∅,k}`` on depth-``depth`` functions.

    The first value uses the merged-component Laplacian (one Laplacian on
    the whole shift space). The second uses the per-bisection Laplacians,
    i.e. one Laplacian for each cylinder ``C(beta)`` with ``|beta| = k + 1``
    on the source side and ``|beta| = k`` on the target side.
    """
    _check_counterexample_args(pf, i, k, depth)
    cells = extensions(pf.adjacency, (), depth)
    shift = np.array([1.0 if c[k - 1] == i else 0.0 for c in cells])
    merged = _blockwise_laplacian(pf, cells, 0)
    old = merged * shift[None, :] - shift[:, None] * merged
    del merged
    new = (_blockwise_laplacian(pf, cells, k) * shift[None, :]
           - shift[:, None] * _blockwise_laplacian(pf, cells, k + 1))
    return float(np.linalg.norm(old, 2)), float(np.linalg.norm(new, 2))


# ---------------------------------------------------------------------------
# KMS state


def kms_state(f, window: TruncationWindow | None = None) -> complex:
    """Integral of ``f`` over the unit space.

    ``f`` is either a coefficient vector on ``window`` or a
    :class:`LocallyConstantFn` on a bisection. Only bisections ``∅.b`` with
    ``|b| = 1`` meet the units, and wavelets integrate to zero.
    """
    if isinstance(f, LocallyConstantFn):
        g = f.base
        if not isinstance(g, BisectionIndex):
            raise ValueError("expected a function on a bisection")
        if g.alpha or len(g.beta) != 1:
            return 0j
        return f.integral()
    if window is None:
        raise ValueError("a window is needed to interpret a coefficient vector")
    vec = np.asarray(f, dtype=complex)
    total = 0j
    for k, lab in enumerate(window.labels):
        if isinstance(lab, BisectionIndex) and not lab.alpha and len(lab.beta) == 1:
            total += vec[k] * np.sqrt(parry_measure(window.pf, lab.beta))
    return total
