"""
Symmetries of the spectral triple: graph automorphisms, the torus, and the
unitaries they induce on the groupoid Hilbert space.

A unitary ``u`` in ``U(N)`` acts on the generators by
``phi_u(S_a) = sum_b u[b, a] S_b``. The unitaries for which this extends to
an automorphism of the Cuntz-Krieger algebra are characterised by a system
of scalar equations (:func:`is_in_G_A`). The monomial unitaries
``u = diag(c) Q_q`` with ``q`` a graph automorphism are implemented on
``L^2`` by explicit unitaries ``U_u`` that commute with the Dirac operator.

``U_u`` first transports functions along ``q`` (bisection ``gamma`` to
``q gamma``, wavelets matched through the transported construction). It
then multiplies ``G_tau`` by the phase
``c[alpha_1] ... c[alpha_n] * conj(c[beta_1] ... c[beta_{m-1}])`` of
``tau = alpha.beta``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError
from .groupoid import BisectionIndex, WaveletIndex
from .markov import AdjacencyMatrix, PerronFrobeniusData, parry_measure
from .operators import (TruncatedOperator, TruncationWindow, ck_relation_residual, commutator_norm,
                        dirac_matrix, fock_projection, generator_matrix, laplacian_window,
                        potential_matrix, spectral_norm)
from .wavelets import node_wavelets

__all__ = [
    "GraphAutomorphism",
    "IsometryElement",
    "MembershipReport",
    "aut_group",
    "is_in_G_A",
    "lie_algebra_check",
    "decompose_monomial",
    "phase",
    "phi_u_images",
    "unitary_U_u",
    "isometry_verification",
    "random_element",
]

MAX_AUT_N = 10


@dataclass(frozen=True)
class GraphAutomorphism:
    """A permutation ``q`` of the letters with ``A[q(i), q(j)] = A[i, j]``.

    ``images[i - 1]`` is ``q(i)``.
    """

    images: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def act(self, word: Sequence[int]) -> tuple[int, ...]:
        return tuple(self.images[a - 1] for a in word)

    def act_index(self, gamma: BisectionIndex) -> BisectionIndex:
        return BisectionIndex(self.act(gamma.alpha), self.act(gamma.beta))

    @property
    def matrix(self) -> np.ndarray:
        """Permutation matrix with ``Q e_i = e_{q(i)}``."""
        q = np.zeros((self.n, self.n))
        for i, image in enumerate(self.images):
            q[image - 1, i] = 1.0
        return q

    def compose(self, other: "GraphAutomorphism") -> "GraphAutomorphism":
        """``self o other``."""
        return GraphAutomorphism(tuple(self.images[other.images[i] - 1] for i in range(self.n)))

    def inverse(self) -> "GraphAutomorphism":
        inv = [0] * self.n
        for i, image in enumerate(self.images):
            inv[image - 1] = i + 1
        return GraphAutomorphism(tuple(inv))

    def preserves(self, adjacency: AdjacencyMatrix) -> bool:
        p = np.array(self.images) - 1
        return bool(np.array_equal(adjacency.entries[np.ix_(p, p)], adjacency.entries))

    @classmethod
    def identity(cls, n: int) -> "GraphAutomorphism":
        return cls(tuple(range(1, n + 1)))


def aut_group(adjacency: AdjacencyMatrix) -> list[GraphAutomorphism]:
    """All letter permutations preserving ``A``, by exhaustive search."""
    n = adjacency.n
    if n > MAX_AUT_N:
        raise CapacityError(f"automorphism search is limited to N <= {MAX_AUT_N}")
    out = []
    for perm in itertools.permutations(range(1, n + 1)):
        q = GraphAutomorphism(perm)
        if q.preserves(adjacency):
            out.append(q)
    return out


@dataclass(frozen=True)
class IsometryElement:
    """An element ``(c, q)`` of the torus-automorphism product, ``u = diag(c) Q_q``."""

    c: tuple[complex, ...]
    q: GraphAutomorphism

    def __post_init__(self):
        c = tuple(complex(z) for z in self.c)
        object.__setattr__(self, "c", c)
        if len(c) != self.q.n:
            raise ValueError("c and q must have the same size")
        if not np.allclose(np.abs(c), 1.0, atol=1e-12, rtol=0):
            raise ValueError("entries of c must have modulus 1")

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.c) @ self.q.matrix

    def compose(self, other: "IsometryElement") -> "IsometryElement":
        """Group law ``(c, q)(c', q') = (c * (c' o q^-1), q q')``."""
        qinv = self.q.inverse()
        moved = tuple(other.c[qinv(i) - 1] for i in range(1, self.q.n + 1))
        return IsometryElement(tuple(a * b for a, b in zip(self.c, moved)), self.q.compose(other.q))


def random_element(automorphisms: Sequence[GraphAutomorphism], rng: np.random.Generator) -> IsometryElement:
    q = automorphisms[int(rng.integers(len(automorphisms)))]
    c = np.exp(2j * np.pi * rng.random(q.n))
    return IsometryElement(tuple(c), q)


@dataclass(frozen=True)
class MembershipReport:
    """Outcome of the automorphism criterion, with the violated conditions."""

    ok: bool
    violations: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.ok


def _shares_successor(a: np.ndarray, k: int, l: int) -> bool:
    return bool(np.any(a[k] * a[l]))


def is_in_G_A(adjacency: AdjacencyMatrix, u: np.ndarray, tol: float = 1e-10) -> MembershipReport:
    """Decide whether ``phi_u`` extends to an automorphism.

    Three families of scalar equations are checked (indices 1-based in the
    messages):

    * ``orthogonality(a, b; b')``: ``sum_a' conj(u[a', a]) u[a', b] A[a', b'] = 0`` for ``a != b``;
    * ``range(b', b''; a)``: ``sum_a' conj(u[b'', a']) u[b', a'] A[a, a'] = 0`` for ``b' != b''``;
    * ``balance(a; b')``: ``sum_a' |u[b', a']|^2 A[a, a'] = sum_a' |u[a', a]|^2 A[a', b']``.

    A range equation is only required when ``S_b' S_b''^*`` is nonzero,
    i.e. when rows ``b'`` and ``b''`` of ``A`` share a successor.

    Raises
    ------
    ValueError
        If ``u`` is not unitary within ``tol``.
    """
    u = np.asarray(u, dtype=complex)
    n = adjacency.n
    if u.shape != (n, n) or np.max(np.abs(u.conj().T @ u - np.eye(n))) > tol:
        raise ValueError("u must be an N x N unitary")
    a = adjacency.entries.astype(float)
    violations = []
    # column Gram weighted by the successor pattern: G[a, b, b'] = sum_a' conj(u[a', a]) u[a', b] A[a', b']
    gram = np.einsum("ka,kb,kc->abc", u.conj(), u, a)
    for x, y in itertools.product(range(n), repeat=2):
        if x == y:
            continue
        for z in range(n):
            if abs(gram[x, y, z]) > tol:
                violations.append(f"orthogonality(a={x + 1}, b={y + 1}; b'={z + 1})")
    rng = np.einsum("yk,xk,ak->xya", u.conj(), u, a)  # rng[b', b'', a]
    for x, y in itertools.product(range(n), repeat=2):
        if x == y or not _shares_successor(adjacency.entries, x, y):
            continue
        for z in range(n):
            if abs(rng[x, y, z]) > tol:
                violations.append(f"range(b'={x + 1}, b''={y + 1}; a={z + 1})")
    mod2 = np.abs(u) ** 2
    left = a @ mod2.T        # left[a, b'] = sum_a' A[a, a'] |u[b', a']|^2
    right = mod2.T @ a       # right[a, b'] = sum_a' |u[a', a]|^2 A[a', b']
    for x, z in zip(*np.nonzero(np.abs(left - right) > tol)):
        violations.append(f"balance(a={x + 1}; b'={z + 1})")
    return MembershipReport(not violations, tuple(violations))


def lie_algebra_check(adjacency: AdjacencyMatrix, x: np.ndarray, tol: float = 1e-10) -> bool:
    """Whether the skew-hermitian ``X`` is tangent to the automorphism group.

    The bracket with the diagonal tensor reduces to two scalar families.
    ``X[i, j] (A[j, k] - A[i, k]) = 0`` must hold for ``i != j`` and all
    ``k``. ``X[k, l] (A[i, l] - A[i, k]) = 0`` must hold for ``k != l``
    whose rows share a successor, and all ``i``.

    Raises
    ------
    ValueError
        If ``X`` is not skew-hermitian within ``tol``.
    """
    x = np.asarray(x, dtype=complex)
    n = adjacency.n
    if x.shape != (n, n) or np.max(np.abs(x + x.conj().T)) > tol:
        raise ValueError("X must be an N x N skew-hermitian matrix")
    a = adjacency.entries.astype(float)
    for i, j in itertools.product(range(n), repeat=2):
        if i == j or abs(x[i, j]) <= tol:
            continue
        if np.any(a[j] != a[i]):
            return False
        if _shares_successor(adjacency.entries, i, j) and np.any(a[:, j] != a[:, i]):
            return False
    return True


def decompose_monomial(adjacency: AdjacencyMatrix, u: np.ndarray, tol: float = 1e-10) -> IsometryElement:
    """Write ``u = diag(c) Q_q`` with ``q`` an automorphism of ``A``.

    Raises
    ------
    ValueError
        If ``u`` is not monomial or its permutation does not preserve ``A``.
    """
    u = np.asarray(u, dtype=complex)
    n = adjacency.n
    images = []
    c = np.zeros(n, dtype=complex)
    for col in range(n):
        support = np.flatnonzero(np.abs(u[:, col]) > tol)
        if len(support) != 1 or abs(abs(u[support[0], col]) - 1) > tol:
            raise ValueError("u is not a phased permutation matrix, so no basis map U_u exists")
        images.append(int(support[0]) + 1)
        c[support[0]] = u[support[0], col]
    q = GraphAutomorphism(tuple(images))
    if len(set(images)) != n or not q.preserves(adjacency):
        raise ValueError("the permutation part of u is not an automorphism of A")
    return IsometryElement(tuple(c), q)


def phase(gamma: BisectionIndex, c: Sequence[complex]) -> complex:
    """Phase of ``G_gamma``: product over ``alpha`` times conjugate product over ``beta_hat``."""
    z = complex(1.0)
    for a in gamma.alpha:
        z *= c[a - 1]
    for b in gamma.beta[:-1]:
        z *= np.conj(c[b - 1])
    return z


def phi_u_images(window: TruncationWindow, u: np.ndarray, tol: float = 1e-10):
    """Images ``phi_u(S_a)`` on the window and the relation residuals they satisfy.

    Returns
    -------
    images : list of TruncatedOperator
    residual : CKResidual

    Raises
    ------
    ValueError
        If ``u`` fails the automorphism criterion.
    """
    report = is_in_G_A(window.pf.adjacency, u, tol)
    if not report:
        raise ValueError("u does not induce an automorphism: " + ", ".join(report.violations))
    gens = [generator_matrix(window, i) for i in range(1, window.pf.n + 1)]
    images = []
    for a in range(window.pf.n):
        mat = sum(u[b, a] * gens[b].matrix for b in range(window.pf.n))
        exact = np.logical_and.reduce([g.exact_columns for g in gens])
        images.append(TruncatedOperator(window, mat, exact))
    residual = ck_relation_residual(window, [img.matrix for img in images])
    return images, residual


def _channel_block(pf: PerronFrobeniusData, nu, q: GraphAutomorphism, family: str) -> np.ndarray:
    """``B[j', j] = <h_{q nu, j'}, h_{nu, j} o v_q^-1>``."""
    children, values = node_wavelets(pf, nu, family)
    qnu = q.act(nu)
    qchildren, qvalues = node_wavelets(pf, qnu, family)
    pos = {k: i for i, k in enumerate(qchildren)}
    d = len(children)
    moved = np.zeros((d - 1, d), dtype=complex)
    mass = np.zeros(d)
    for i, k in enumerate(children):
        moved[:, pos[q(k)]] = values[:, i]
        mass[pos[q(k)]] = parry_measure(pf, qnu + (q(k),))
    return qvalues.conj() @ (mass[:, None] * moved.T)


def unitary_U_u(window: TruncationWindow, element: IsometryElement) -> TruncatedOperator:
    """The unitary implementing ``(c, q)`` on the window.

    Raises
    ------
    ValueError
        If ``q`` does not preserve ``A``.
    """
    pf = window.pf
    q, c = element.q, element.c
    if q.n != pf.n or not q.preserves(pf.adjacency):
        raise ValueError("q is not an automorphism of A")
    rows, cols, vals = [], [], []
    blocks: dict = {}
    for col, lab in enumerate(window.labels):
        if isinstance(lab, BisectionIndex):
            tau = q.act_index(lab)
            rows.append(window.index[tau]), cols.append(col), vals.append(phase(tau, c))
            continue
        tau = q.act_index(lab.gamma)
        z = phase(tau, c)
        if lab.nu not in blocks:
            blocks[lab.nu] = _channel_block(pf, lab.nu, q, window.family)
        block = blocks[lab.nu]
        qnu = q.act(lab.nu)
        for jp in range(1, block.shape[0] + 1):
            v = block[jp - 1, lab.j - 1]
            if v != 0:
                rows.append(window.index[WaveletIndex(tau, qnu, jp)]), cols.append(col)
                vals.append(z * v)
    mat = sp.csr_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(window.dim, window.dim))
    return TruncatedOperator(window, mat)


def isometry_verification(window: TruncationWindow, element: IsometryElement) -> dict[str, float]:
    """Commutator norms of ``U_u`` with ``D``, ``Delta``, ``M_l`` and ``P_A``.

    Also reports ``unitarity`` (``||U*U - 1||``) and ``implements`` (the
    largest ``||U S_a U* - phi_u(S_a)||`` over interior columns).
    """
    uu = unitary_U_u(window, element)
    eye = sp.identity(window.dim, dtype=complex, format="csr")
    interior = np.flatnonzero(window.lengths <= window.L - 2)
    images, _ = phi_u_images(window, element.matrix)
    umat = uu.matrix
    implements = 0.0
    for a, image in enumerate(images, start=1):
        moved = umat @ generator_matrix(window, a).matrix @ umat.conj().T
        implements = max(implements, spectral_norm((moved - image.matrix)[:, interior]))
    return {
        "D": commutator_norm(uu, dirac_matrix(window)),
        "Delta": commutator_norm(uu, laplacian_window(window)),
        "M_l": commutator_norm(uu, potential_matrix(window)),
        "P_A": commutator_norm(uu, fock_projection(window)),
        "unitarity": spectral_norm(umat.conj().T @ umat - eye),
        "implements": implements,
    }
