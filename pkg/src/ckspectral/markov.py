"""
Topological Markov chains as metric-measure spaces.

A primitive 0/1 matrix ``A`` on the alphabet ``{1, ..., N}`` defines the
one-sided shift space of infinite admissible words. Points are never stored;
everything is expressed through finite prefixes (cylinders ``C(w)``). This
module provides

* validation of the matrix and its Perron-Frobenius data,
* the Parry measure ``mu(C(w)) = v[w_1] u[w_n] / lambda_max**(n-1)``,
* the ultrametric ``d(x, y) = lam**(-c)`` with ``c`` the common prefix length,
* transition probabilities and Ahlfors-regularity diagnostics.

Letters are the integers ``1..N`` throughout; words are tuples of letters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import ConvergenceError, InsufficientDepthError

Word = tuple[int, ...]

__all__ = [
    "Word",
    "AdjacencyMatrix",
    "PerronFrobeniusData",
    "MetricParams",
    "AhlforsReport",
    "as_word",
    "format_word",
    "parse_word",
    "check_primitive",
    "perron_frobenius",
    "metric_params",
    "enumerate_words",
    "extensions",
    "parry_measure",
    "ultrametric_distance",
    "common_prefix_length",
    "transition_prob",
    "transition_matrix",
    "ahlfors_constant",
    "annulus_integral",
    "annulus_ratio_bounds",
    "monochain_count",
]


# ---------------------------------------------------------------------------
# words


def as_word(letters: Iterable[int] | str) -> Word:
    """Coerce a sequence of letters (or a digit string) to a word tuple."""
    if isinstance(letters, str):
        return parse_word(letters)
    return tuple(int(a) for a in letters)


def format_word(word: Sequence[int]) -> str:
    """Render a word as a digit string, ``"-"`` for the empty word.

    Alphabets with more than nine letters use ``:`` as a separator so the
    rendering stays unambiguous.
    """
    if len(word) == 0:
        return "-"
    if max(word) > 9:
        return ":".join(str(a) for a in word)
    return "".join(str(a) for a in word)


def parse_word(text: str) -> Word:
    """Inverse of :func:`format_word`."""
    text = text.strip()
    if text in ("", "-"):
        return ()
    if ":" in text:
        return tuple(int(a) for a in text.split(":"))
    return tuple(int(a) for a in text)


# ---------------------------------------------------------------------------
# adjacency matrices


def _validated_array(matrix) -> np.ndarray:
    a = np.asarray(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"adjacency matrix must be square, got shape {a.shape}")
    if a.shape[0] < 2:
        raise ValueError("alphabet size must be at least 2")
    if not np.all((a == 0) | (a == 1)):
        raise ValueError("adjacency matrix entries must be 0 or 1")
    return a.astype(np.int64)


def check_primitive(matrix) -> tuple[bool, int | None]:
    """Decide primitivity by boolean matrix powers.

    Parameters
    ----------
    matrix : array_like
        Square 0/1 matrix with at least two rows.

    Returns
    -------
    primitive : bool
    k : int or None
        Smallest ``k <= (N-1)**2 + 1`` with ``A**k > 0`` entrywise, or None.
    """
    a = _validated_array(matrix) > 0
    n = a.shape[0]
    power = a.copy()
    for k in range(1, (n - 1) ** 2 + 2):
        if power.all():
            return True, k
        power = (power.astype(np.int64) @ a.astype(np.int64)) > 0
    return False, None


@dataclass(frozen=True, eq=False)
class AdjacencyMatrix:
    """A primitive 0/1 transition matrix.

    Instances hash by identity, which lets the enumeration helpers cache
    per-matrix results.
    """

    entries: np.ndarray
    primitivity_exponent: int = field(init=False)

    def __post_init__(self):
        a = _validated_array(self.entries)
        if not (a.sum(axis=1) > 0).all() or not (a.sum(axis=0) > 0).all():
            raise ValueError("every row and column must contain a 1")
        ok, k = check_primitive(a)
        if not ok:
            raise ValueError("adjacency matrix is not primitive")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "primitivity_exponent", k)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def allowed(self, i: int, j: int) -> bool:
        """Whether the transition ``i -> j`` is allowed (1-based letters)."""
        return bool(self.entries[i - 1, j - 1])

    def successors(self, i: int) -> tuple[int, ...]:
        return tuple(int(k) + 1 for k in np.flatnonzero(self.entries[i - 1]))

    def outdegree(self, i: int) -> int:
        return int(self.entries[i - 1].sum())

    def is_admissible(self, word: Sequence[int]) -> bool:
        n = self.n
        if any(not 1 <= a <= n for a in word):
            return False
        return all(self.entries[a - 1, b - 1] for a, b in zip(word, word[1:]))

    @classmethod
    def full_shift(cls, n: int) -> "AdjacencyMatrix":
        return cls(np.ones((n, n), dtype=np.int64))

    @classmethod
    def golden_mean(cls) -> "AdjacencyMatrix":
        return cls(np.array([[1, 1], [1, 0]]))

    @classmethod
    def free_group(cls, d: int) -> "AdjacencyMatrix":
        """Reduced words in ``d`` free generators.

        Letter ``2m-1`` stands for ``a_m`` and ``2m`` for its inverse; the
        transition ``x -> y`` is forbidden exactly when ``y`` is the inverse
        of ``x``.
        """
        n = 2 * d
        a = np.ones((n, n), dtype=np.int64)
        for m in range(d):
            a[2 * m, 2 * m + 1] = 0
            a[2 * m + 1, 2 * m] = 0
        return cls(a)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, density: float = 0.6,
               max_tries: int = 1000) -> "AdjacencyMatrix":
        """Draw a random primitive matrix by rejection sampling."""
        for _ in range(max_tries):
            a = (rng.random((n, n)) < density).astype(np.int64)
            if a.sum(axis=1).min() == 0 or a.sum(axis=0).min() == 0:
                continue
            if check_primitive(a)[0]:
                return cls(a)
        raise RuntimeError("no primitive matrix found; raise the density")


# ---------------------------------------------------------------------------
# Perron-Frobenius data


@dataclass(frozen=True, eq=False)
class PerronFrobeniusData:
    """Perron-Frobenius eigenvalue and eigenvectors of ``A``.

    ``u`` is the right and ``v`` the left eigenvector, normalised jointly so
    that ``sum(u * v) == 1``. ``p = u * v`` is the stationary distribution.
    """

    adjacency: AdjacencyMatrix
    lambda_max: float
    u: np.ndarray
    v: np.ndarray
    p: np.ndarray

    @property
    def n(self) -> int:
        return self.adjacency.n


def _power_iteration(m: np.ndarray, tol: float, max_iter: int) -> tuple[float, np.ndarray]:
    x = np.ones(m.shape[0]) / m.shape[0]
    for _ in range(max_iter):
        y = m @ x
        y /= y.sum()
        change = np.max(np.abs(y - x))
        x = y
        if change <= tol:
            break
    else:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")
    # polish: keep iterating while the update still shrinks
    for _ in range(1000):
        y = m @ x
        y /= y.sum()
        new_change = np.max(np.abs(y - x))
        x = y
        if new_change == 0 or new_change >= change:
            break
        change = new_change
    lam = float((m @ x).sum() / x.sum())
    return lam, x


def perron_frobenius(adjacency: AdjacencyMatrix, tol: float = 1e-13,
                     max_iter: int = 200_000) -> PerronFrobeniusData:
    """Compute the Perron-Frobenius data by power iteration.

    Iteration starts from the all-ones vector. Both eigenvectors are scaled
    to unit Euclidean norm and then divided by ``sqrt(u @ v)``, which gives
    ``u = v = N**-0.5`` whenever ``A`` is symmetric with constant row sums.

    Raises
    ------
    ConvergenceError
        If either iteration does not settle within ``max_iter`` steps or the
        final eigen-residual exceeds ``100 * tol * lambda_max``.
    """
    a = adjacency.entries.astype(float)
    lam, u = _power_iteration(a, tol, max_iter)
    lam_t, v = _power_iteration(a.T, tol, max_iter)
    u /= np.linalg.norm(u)
    v /= np.linalg.norm(v)
    scale = math.sqrt(float(u @ v))
    u /= scale
    v /= scale
    bound = 100 * tol * max(lam, 1.0)
    if (np.max(np.abs(a @ u - lam * u)) > bound
            or np.max(np.abs(a.T @ v - lam * v)) > bound
            or abs(lam - lam_t) > bound):
        raise ConvergenceError("Perron-Frobenius residual check failed")
    for arr in (u, v):
        arr.setflags(write=False)
    p = u * v
    p.setflags(write=False)
    return PerronFrobeniusData(adjacency, lam, u, v, p)


@dataclass(frozen=True)
class MetricParams:
    """Scale parameter of the ultrametric and the derived exponents.

    ``delta = log(lambda_max) / log(lam)`` is the Ahlfors dimension and
    ``delta_prime = (1 - 1/N) / log(lam)`` is the full-shift heat exponent.
    """

    lam: float
    delta: float
    delta_prime: float


def metric_params(pf: PerronFrobeniusData, lam: float | None = 2.0) -> MetricParams:
    """Build metric parameters; ``lam=None`` selects ``lam = lambda_max``."""
    if lam is None:
        lam = pf.lambda_max
    if not lam > 1:
        raise ValueError("lam must exceed 1")
    delta = math.log(pf.lambda_max) / math.log(lam)
    delta_prime = (1.0 - 1.0 / pf.n) / math.log(lam)
    return MetricParams(float(lam), delta, delta_prime)


# ---------------------------------------------------------------------------
# enumeration


@lru_cache(maxsize=4096)
def extensions(adjacency: AdjacencyMatrix, base: Word, depth: int) -> tuple[Word, ...]:
    """All admissible words of length ``depth`` extending ``base``, in lex order."""
    base = tuple(base)
    if depth < len(base):
        raise ValueError("depth must be at least the base length")
    if not adjacency.is_admissible(base):
        return ()
    if depth == len(base):
        return (base,)
    if len(base) == 0:
        shorter = [(a,) for a in range(1, adjacency.n + 1)]
        if depth == 1:
            return tuple(shorter)
        return tuple(w for b in shorter for w in extensions(adjacency, b, depth))
    out = []
    for w in extensions(adjacency, base, depth - 1):
        for k in adjacency.successors(w[-1]):
            out.append(w + (k,))
    return tuple(out)


def enumerate_words(adjacency: AdjacencyMatrix, max_len: int) -> list[list[Word]]:
    """Admissible words grouped by length ``0..max_len``, lex order in each group."""
    if max_len < 0:
        raise ValueError("max_len must be nonnegative")
    return [list(extensions(adjacency, (), n)) for n in range(max_len + 1)]


# ---------------------------------------------------------------------------
# measure and metric


def parry_measure(pf: PerronFrobeniusData, word: Sequence[int]) -> float:
    """Parry measure of the cylinder ``C(word)``; 0 for inadmissible words."""
    word = tuple(word)
    if len(word) == 0:
        return 1.0
    if not pf.adjacency.is_admissible(word):
        return 0.0
    return float(pf.v[word[0] - 1] * pf.u[word[-1] - 1] / pf.lambda_max ** (len(word) - 1))


def common_prefix_length(x: Sequence[int], y: Sequence[int]) -> int:
    c = 0
    for a, b in zip(x, y):
        if a != b:
            break
        c += 1
    return c


def ultrametric_distance(x_word: Sequence[int], y_word: Sequence[int],
                         params: MetricParams) -> float:
    """Distance ``lam**(-c)`` between points with the given prefixes.

    Raises
    ------
    InsufficientDepthError
        When one prefix extends the other, so the points may agree further.
    """
    c = common_prefix_length(x_word, y_word)
    if c == min(len(x_word), len(y_word)):
        raise InsufficientDepthError(
            f"prefixes {format_word(x_word)} and {format_word(y_word)} do not separate the points")
    return params.lam ** (-c)


def transition_prob(pf: PerronFrobeniusData, i: int, j: int) -> float:
    """``P[i, j] = A[i, j] u[j] / (lambda_max u[i])`` for 1-based letters."""
    a = pf.adjacency.entries[i - 1, j - 1]
    return float(a * pf.u[j - 1] / (pf.lambda_max * pf.u[i - 1]))


def transition_matrix(pf: PerronFrobeniusData) -> np.ndarray:
    a = pf.adjacency.entries
    return a * pf.u[None, :] / (pf.lambda_max * pf.u[:, None])


@dataclass(frozen=True)
class AhlforsReport:
    """Result of the Ahlfors-regularity scan.

    ``per_depth[n]`` is the constant obtained from balls of radius
    ``lam**-m`` with ``m <= n``.
    """

    constant: float
    min_ratio: float
    max_ratio: float
    per_depth: tuple[float, ...]


def ahlfors_constant(pf: PerronFrobeniusData, max_depth: int) -> AhlforsReport:
    """Scan ``mu(B(x, r)) / r**delta`` over balls of radius ``lam**-n``, ``n <= max_depth``.

    Closed balls of radius ``lam**-n`` are depth-``n`` cylinders and
    ``r**delta = lambda_max**-n``, so the ratio of ``C(w)`` is
    ``v[w_1] u[w_n] lambda_max``. Which (first, last) pairs occur at length
    ``n`` is read off the support of ``A**(n-1)``. The result does not
    depend on ``lam``.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    a = pf.adjacency.entries
    pair_ratio = np.outer(pf.v, pf.u) * pf.lambda_max
    lo = hi = 1.0
    per_depth = [1.0]
    reach = np.eye(pf.n, dtype=np.int64)
    for _ in range(1, max_depth + 1):
        ratios = pair_ratio[reach > 0]
        lo = min(lo, float(ratios.min()))
        hi = max(hi, float(ratios.max()))
        per_depth.append(max(hi, 1.0 / lo))
        reach = ((reach @ a) > 0).astype(np.int64)
    return AhlforsReport(max(hi, 1.0 / lo), lo, hi, tuple(per_depth))


def _depth_of_radius(r: float, lam: float) -> int:
    n = round(-math.log(r) / math.log(lam))
    if n < 0 or not math.isclose(lam ** (-n), r, rel_tol=1e-9):
        raise ValueError(f"radius {r} is not of the form lam**-n")
    return n


def annulus_integral(pf: PerronFrobeniusData, params: MetricParams, x_word: Sequence[int],
                     r: float, s: float) -> float:
    """Exact value of ``int_{B(x, r)} d(x, y)**(s - delta) dmu(y)``, averaged over ``x``.

    The integrand is constant on the strata ``{y : common prefix with x = c}``.
    Strata with ``c < len(x_word)`` are summed directly. The remaining tail
    depends on the unknown continuation of ``x``. It is averaged against the
    Parry measure on ``C(x_word)`` with the transition matrix ``P``, which
    gives a geometric series summed by one linear solve. For the full shift
    the average is exact pointwise.

    Parameters
    ----------
    x_word : sequence of int
        Nonempty admissible prefix of ``x`` with ``len(x_word) >= n``.
    r : float
        Radius ``lam**-n``.
    s : float
        Positive exponent.
    """
    if not s > 0:
        raise ValueError("s must be positive")
    x = tuple(x_word)
    if not pf.adjacency.is_admissible(x):
        raise ValueError("x_word is not admissible")
    n = _depth_of_radius(r, params.lam)
    if len(x) < max(n, 1):
        raise InsufficientDepthError("x_word must have length at least max(n, 1)")
    lam, lmax = params.lam, pf.lambda_max
    total = 0.0
    for c in range(n, len(x)):
        weight = lam ** (-c * s) * lmax ** c
        total += weight * (parry_measure(pf, x[:c]) - parry_measure(pf, x[:c + 1]))
    m = len(x)
    p = transition_matrix(pf)
    rhs = lmax * pf.u - p @ pf.u
    tail = np.linalg.solve(np.eye(pf.n) - lam ** (-s) * p, rhs)
    total += lam ** (-m * s) * pf.v[x[0] - 1] * tail[x[-1] - 1]
    return float(total)


def annulus_ratio_bounds(pf: PerronFrobeniusData, params: MetricParams, s: float,
                         max_depth: int) -> tuple[float, float]:
    """Extremes of ``annulus_integral / r**s`` over cylinders of depth ``<= max_depth``."""
    lo, hi = math.inf, -math.inf
    for depth in range(1, max_depth + 1):
        for w in extensions(pf.adjacency, (), depth):
            for n in range(0, depth + 1):
                r = params.lam ** (-n)
                ratio = annulus_integral(pf, params, w, r, s) / r ** s
                lo, hi = min(lo, ratio), max(hi, ratio)
    return lo, hi


def monochain_count(adjacency: AdjacencyMatrix, nu: Sequence[int]) -> int:
    """Number of branching steps along ``nu``.

    A step ``nu_i -> nu_{i+1}`` is branching when ``nu_i`` has out-degree at
    least two, which is exactly when its transition probability is not 1.
    For words longer than ``3(N+1)`` that end at a branching letter the
    count must exceed ``len(nu) / (3(N+1))``; a violation raises
    AssertionError.
    """
    nu = tuple(nu)
    if not adjacency.is_admissible(nu):
        raise ValueError("nu is not admissible")
    count = sum(1 for a in nu[:-1] if adjacency.outdegree(a) >= 2)
    bound = 3 * (adjacency.n + 1)
    if len(nu) > bound and adjacency.outdegree(nu[-1]) >= 2 and not count > len(nu) / bound:
        raise AssertionError(f"monochain bound violated for {format_word(nu)}")
    return count
