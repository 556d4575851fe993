"""
Heat semigroups and Riesz potentials on bisections.

For the full shift on ``N`` letters the heat operator of the Laplacian on a
bisection ``G_gamma`` (source cylinder ``C(beta)``) has the kernel

    k(g1, g2) = h(t) + H(t) rho(t)**c,   rho(t) = N exp(-t (1 - 1/N)),

where ``c`` is the common prefix length of the source points. The
coefficients are

    h(t) = N**|beta| (1 - (N - 1) e**-t / (rho(t) - 1)),
    H(t) = (N - N e**(-t (1 - 1/N))) / (rho(t) - 1) * e**(-t (1 - (1 - 1/N) |beta|)).

Both have a simple pole where ``rho(t) = 1``, i.e. ``t = log N / (1 - 1/N)``.
The kernel stays bounded on the diagonal exactly when ``rho(t) < 1``.

For a general primitive matrix the heat operator is built spectrally from
the exact Laplacian matrix at a fixed depth. That space is invariant, so
no truncation error enters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import PoleError
from .groupoid import BisectionIndex
from .laplacian import common_prefix_matrix, laplacian_matrix
from .markov import (AdjacencyMatrix, MetricParams, PerronFrobeniusData, annulus_integral,
                     extensions, parry_measure, perron_frobenius)

__all__ = [
    "HeatKernelParams",
    "kernel_threshold",
    "heat_coefficients",
    "heat_kernel_value",
    "kernel_diagonal_finite",
    "kernel_heat_matrix",
    "heat_matrix_general",
    "constant_projection",
    "riesz_matrix",
    "riesz_projection_coefficient",
    "riesz_composition_coefficient",
    "heat_trace_D",
    "heat_trace_sweep",
    "full_shift_data",
]

POLE_TOL = 1e-12


def kernel_threshold(n: int) -> float:
    """The pole ``log N / (1 - 1/N)`` of the heat coefficients."""
    return math.log(n) / (1.0 - 1.0 / n)


def heat_coefficients(n: int, s_len: int, t: float) -> tuple[float, float]:
    """The coefficients ``(h, H)`` for source length ``s_len``.

    Raises
    ------
    PoleError
        If ``t`` is within ``POLE_TOL`` (relative) of the pole.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    decay = math.exp(-t * (1.0 - 1.0 / n))
    den = n * decay - 1.0
    if abs(den) <= POLE_TOL:
        raise PoleError(f"t = {t!r} is the pole of the heat coefficients for N = {n}")
    h = n ** s_len * (1.0 - (n - 1) * math.exp(-t) / den)
    big_h = (n - n * decay) / den * math.exp(-t * (1.0 - (1.0 - 1.0 / n) * s_len))
    return h, big_h


@dataclass(frozen=True)
class HeatKernelParams:
    """Coefficients of the full-shift heat kernel at one ``(N, |beta|, t)``."""

    n: int
    s_len: int
    t: float
    h: float
    big_h: float

    @classmethod
    def evaluate(cls, n: int, s_len: int, t: float) -> "HeatKernelParams":
        h, big_h = heat_coefficients(n, s_len, t)
        return cls(n, s_len, t, h, big_h)

    @property
    def rho(self) -> float:
        return self.n * math.exp(-self.t * (1.0 - 1.0 / self.n))

    @property
    def threshold(self) -> float:
        return kernel_threshold(self.n)


def kernel_diagonal_finite(n: int, t: float) -> bool:
    """Whether the kernel stays bounded as the points merge (``rho(t) < 1``)."""
    return n * math.exp(-t * (1.0 - 1.0 / n)) < 1.0


def heat_kernel_value(n: int, gamma: BisectionIndex, t: float, c: int,
                      other: BisectionIndex | None = None) -> float:
    """Kernel of ``exp(-t (Delta + M_l))`` between two points.

    ``c`` is the common prefix length of the source points, at least
    ``|s(gamma)|``. Points on different bisections (``other`` given and
    distinct from ``gamma``) do not interact.
    """
    if other is not None and other != gamma:
        return 0.0
    if c < len(gamma.beta):
        raise ValueError("points of one bisection share at least |s(gamma)| letters")
    p = HeatKernelParams.evaluate(n, len(gamma.beta), t)
    return math.exp(-t * gamma.length) * (p.h + p.big_h * p.rho ** c)


def kernel_heat_matrix(n: int, gamma: BisectionIndex, t: float, depth: int) -> np.ndarray:
    """Heat operator on ``G_gamma`` assembled from its kernel.

    Entries are in the orthonormal cell basis at the given depth.
    Off-diagonal entries are ``mu(P)`` times the kernel at the pair's
    common prefix. A diagonal entry integrates the kernel over the cell:
    the strata ``c >= depth`` contribute the geometric series
    ``(1 - 1/N) sum_c (rho / N)**c``.
    """
    beta = gamma.beta
    if depth < len(beta) + 1:
        raise ValueError("depth must exceed |s(gamma)|")
    p = HeatKernelParams.evaluate(n, len(beta), t)
    adjacency = AdjacencyMatrix.full_shift(n)
    cells = extensions(adjacency, beta, depth)
    cp = common_prefix_matrix(cells).astype(float)
    cell_mass = float(n) ** (-depth)
    mat = (p.h + p.big_h * p.rho ** cp) * cell_mass
    q = p.rho / n
    self_term = p.h * cell_mass + p.big_h * (1.0 - 1.0 / n) * q ** depth / (1.0 - q)
    np.fill_diagonal(mat, self_term)
    return math.exp(-t * gamma.length) * mat


def heat_matrix_general(pf: PerronFrobeniusData, beta: Sequence[int], t: float, depth: int,
                        shift: float = 0.0) -> np.ndarray:
    """``exp(-t (Delta + shift))`` on depth-``depth`` functions over ``C(beta)``.

    The result is in the orthonormal cell basis and comes from the
    eigendecomposition of the exact Laplacian matrix. ``shift`` adds a
    constant potential such as ``|gamma|``.
    """
    if not t >= 0:
        raise ValueError("t must be nonnegative")
    lap = laplacian_matrix(pf, beta, depth)
    w, v = np.linalg.eigh(lap.matrix)
    return (v * np.exp(-t * (w + shift))) @ v.T


def constant_projection(pf: PerronFrobeniusData, beta: Sequence[int], depth: int) -> np.ndarray:
    """Orthogonal projection onto constants on ``C(beta)``, in the orthonormal cell basis."""
    cells = extensions(pf.adjacency, tuple(beta), depth)
    s = np.sqrt([parry_measure(pf, c) for c in cells])
    s /= np.linalg.norm(s)
    return np.outer(s, s)


def riesz_matrix(pf: PerronFrobeniusData, params: MetricParams, beta: Sequence[int],
                 s: float, depth: int) -> np.ndarray:
    """Riesz potential ``f -> int f(y) d(x, y)**(s - delta) dmu(y)`` on ``C(beta)``.

    The result is in the orthonormal cell basis at the given depth.
    Off-diagonal entries come from the constant kernel between cells. The
    diagonal entry of a cell ``P`` is the average over ``x in P`` of the
    integral over ``P``, summed stratum by stratum (see
    :func:`ckspectral.markov.annulus_integral`). Depth-``depth`` functions
    form an invariant subspace when the child transition probabilities are
    uniform, as for the full shift. Otherwise the matrix is the compression
    to that subspace.
    """
    beta = tuple(beta)
    if depth < len(beta) + 1:
        raise ValueError("depth must exceed |beta|")
    if not s > 0:
        raise ValueError("s must be positive")
    cells = extensions(pf.adjacency, beta, depth)
    mu = np.sqrt([parry_measure(pf, c) for c in cells])
    cp = common_prefix_matrix(cells).astype(float)
    kernel = params.lam ** (-cp * (s - params.delta))
    mat = kernel * mu[:, None] * mu[None, :]
    radius = params.lam ** (-depth)
    diag = [annulus_integral(pf, params, c, radius, s) for c in cells]
    np.fill_diagonal(mat, diag)
    return mat


def riesz_projection_coefficient(n: int, s_len: int, s: float, delta_prime: float) -> float:
    """Scalar ``r`` with ``R_s P = r P``: ``(1 - h N**-|beta|) / H`` at ``t = s / delta'``."""
    h, big_h = heat_coefficients(n, s_len, s / delta_prime)
    return (1.0 - h * float(n) ** (-s_len)) / big_h


def riesz_composition_coefficient(n: int, s_len: int, s1: float, s2: float, delta_prime: float,
                                  form: str = "semigroup") -> float:
    """Coefficient ``c`` in ``H1 H2 R1 R2 = H12 R12 + c P``.

    ``form="semigroup"`` follows from composing the heat semigroup: with
    ``a = h N**-|beta|`` it is ``a12 - a1 - a2 + a1 a2``. ``form="reference"``
    is the variant ``N**-|beta| (h12 + h1 h2) - h1 - h2``. The two agree
    only when ``|beta| = 0``.
    """
    scale = float(n) ** (-s_len)
    h1 = heat_coefficients(n, s_len, s1 / delta_prime)[0]
    h2 = heat_coefficients(n, s_len, s2 / delta_prime)[0]
    h12 = heat_coefficients(n, s_len, (s1 + s2) / delta_prime)[0]
    if form == "semigroup":
        a1, a2, a12 = h1 * scale, h2 * scale, h12 * scale
        return a12 - a1 - a2 + a1 * a2
    if form == "reference":
        return scale * h12 + h1 * h2 * scale - h1 - h2
    raise ValueError("form must be 'semigroup' or 'reference'")


def heat_trace_D(window, t: float) -> float:
    """``sum exp(-t |D_kk|)`` over the window's basis vectors."""
    if not t > 0:
        raise ValueError("t must be positive")
    return float(np.sum(np.exp(-t * np.abs(window.dirac_diagonal))))


def heat_trace_sweep(pf: PerronFrobeniusData, t: float, levels: Sequence[int],
                     resolution_offset: int = 0, family: str = "gram_schmidt") -> list[dict]:
    """Windowed heat traces of ``|D|`` for windows ``(L, L + resolution_offset)``.

    Each row holds ``L``, the partial sum and its relative increment over
    the previous window.
    """
    from .operators import TruncationWindow

    rows = []
    prev = None
    for level in levels:
        window = TruncationWindow(pf, level, level + resolution_offset, family)
        value = heat_trace_D(window, t)
        inc = None if prev is None else (value - prev) / value
        rows.append({"t": t, "L": level, "R": level + resolution_offset,
                     "value": value, "relative_increment": inc})
        prev = value
    return rows


def full_shift_data(n: int) -> PerronFrobeniusData:
    """Perron-Frobenius data of the full shift on ``n`` letters."""
    return perron_frobenius(AdjacencyMatrix.full_shift(n))
