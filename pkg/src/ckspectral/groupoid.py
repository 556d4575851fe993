"""
Index combinatorics of the shift groupoid.

Elements of the groupoid are triples ``(x, n, y)`` of infinite words with
``sigma^(n+k) x = sigma^k y`` for some ``k``. Writing ``kappa`` for the
smallest such ``k``, each element falls in exactly one clopen bisection
``G_{alpha.beta}``. Here ``alpha = x[:n+kappa]`` and ``beta = y[:kappa+1]``.
The pair ``alpha.beta`` is a :class:`BisectionIndex`.

A pair ``alpha.beta`` labels a nonempty bisection exactly when

* ``beta`` is nonempty and admissible and ``alpha`` is admissible,
* ``alpha`` is empty, or ``A[alpha_last, beta_last] = 1``, and
* when ``alpha`` is nonempty and ``len(beta) >= 2``, ``alpha_last`` differs
  from ``beta[-2]``. Otherwise ``kappa`` would be smaller than
  ``len(beta) - 1`` and the element lies in a shorter bisection.

The last condition rules out pairs such as ``1.11`` in the full shift. Their
bisections are empty.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import InsufficientDepthError
from .markov import AdjacencyMatrix, Word, extensions, format_word

__all__ = [
    "BisectionIndex",
    "WaveletIndex",
    "SymbolicGroupoidElement",
    "in_index_set",
    "enumerate_index_set",
    "compose",
    "invert",
    "prefix_extend",
    "hat",
    "classify_element",
    "realize",
    "enumerate_wavelet_indices",
    "sgn",
]


@dataclass(frozen=True)
class BisectionIndex:
    """The label ``alpha.beta`` of a bisection ``G_{alpha.beta}``."""

    alpha: Word
    beta: Word

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(self.alpha))
        object.__setattr__(self, "beta", tuple(self.beta))
        if len(self.beta) == 0:
            raise ValueError("the source part beta must be nonempty")

    @property
    def length(self) -> int:
        """Value ``|alpha| + |beta|`` of the length function on the bisection."""
        return len(self.alpha) + len(self.beta)

    @property
    def cocycle(self) -> int:
        """Value ``|alpha| - |beta| + 1`` of the cocycle ``n`` on the bisection."""
        return len(self.alpha) - len(self.beta) + 1

    @property
    def kappa(self) -> int:
        return len(self.beta) - 1

    def sort_key(self):
        return (self.length, self.alpha, self.beta)

    def __str__(self) -> str:
        return f"{format_word(self.alpha)}.{format_word(self.beta)}"

    @classmethod
    def parse(cls, text: str) -> "BisectionIndex":
        from .markov import parse_word
        a, b = text.split(".")
        return cls(parse_word(a), parse_word(b))


@dataclass(frozen=True)
class WaveletIndex:
    """Label ``(gamma, nu, j)`` of a wavelet basis vector on ``G_gamma``."""

    gamma: BisectionIndex
    nu: Word
    j: int

    def __str__(self) -> str:
        return f"({self.gamma},{format_word(self.nu)},{self.j})"


def sgn(gamma: BisectionIndex) -> int:
    """+1 on the Fock part (``|beta| = 1``), -1 otherwise."""
    return 1 if len(gamma.beta) == 1 else -1


def in_index_set(adjacency: AdjacencyMatrix, gamma: BisectionIndex) -> bool:
    """Whether ``gamma`` labels a nonempty bisection."""
    a, b = gamma.alpha, gamma.beta
    if not (adjacency.is_admissible(a) and adjacency.is_admissible(b)):
        return False
    if len(a) == 0:
        return True
    if not adjacency.allowed(a[-1], b[-1]):
        return False
    return len(b) == 1 or a[-1] != b[-2]


def enumerate_index_set(adjacency: AdjacencyMatrix, max_len: int) -> list[BisectionIndex]:
    """All bisection labels with ``|gamma| <= max_len``, ordered by (length, alpha, beta)."""
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    out = []
    for total in range(1, max_len + 1):
        for la in range(0, total):
            lb = total - la
            for alpha in extensions(adjacency, (), la):
                for beta in extensions(adjacency, (), lb):
                    g = BisectionIndex(alpha, beta)
                    if in_index_set(adjacency, g):
                        out.append(g)
    out.sort(key=BisectionIndex.sort_key)
    return out


def compose(g1: BisectionIndex, g2: BisectionIndex) -> BisectionIndex | None:
    """Label of the product bisection ``G_{g1} G_{g2}``, or None.

    Two patterns are composable. The first is ``alpha.beta`` followed by
    ``beta.beta2``, giving ``alpha beta_last . beta2``. The second is an
    inverse pair, whose product is a unit bisection ``∅.b``. For all other
    pairs the product is not a single bisection, or it is empty.
    """
    if g1 == invert(g2):
        # the product is the set of units over the range of G_{g1}
        return BisectionIndex((), (g1.alpha + g1.beta[-1:])[:1])
    if g2.alpha == g1.beta:
        return BisectionIndex(g1.alpha + g1.beta[-1:], g2.beta)
    return None


def invert(gamma: BisectionIndex) -> BisectionIndex:
    """Label of the inverse bisection: ``beta_hat . alpha beta_last``."""
    return BisectionIndex(gamma.beta[:-1], gamma.alpha + gamma.beta[-1:])


def prefix_extend(adjacency: AdjacencyMatrix, i: int, gamma: BisectionIndex) -> BisectionIndex | None:
    """``i alpha . beta`` when it labels a nonempty bisection, else None."""
    if not 1 <= i <= adjacency.n:
        raise ValueError(f"letter {i} outside the alphabet")
    g = BisectionIndex((i,) + gamma.alpha, gamma.beta)
    return g if in_index_set(adjacency, g) else None


def hat(gamma: BisectionIndex) -> BisectionIndex:
    """``∅.beta_hat`` for ``gamma = ∅.beta`` with ``|beta| >= 2``."""
    if gamma.alpha or len(gamma.beta) < 2:
        raise ValueError("hat needs an empty range part and |beta| >= 2")
    return BisectionIndex((), gamma.beta[:-1])


@dataclass(frozen=True)
class SymbolicGroupoidElement:
    """A groupoid element ``(x, n, y)`` given by prefixes sharing a common tail.

    The element is ``x = x_prefix t`` and ``y = y_prefix t`` for an
    unspecified infinite tail ``t``, so ``len(x_prefix) - len(y_prefix)``
    must equal ``n``.
    """

    x_prefix: Word
    n: int
    y_prefix: Word

    def __post_init__(self):
        object.__setattr__(self, "x_prefix", tuple(self.x_prefix))
        object.__setattr__(self, "y_prefix", tuple(self.y_prefix))
        if len(self.x_prefix) - len(self.y_prefix) != self.n:
            raise ValueError("prefix lengths must differ by n")


def classify_element(element: SymbolicGroupoidElement) -> BisectionIndex:
    """Bisection label of a symbolically given element.

    Raises
    ------
    InsufficientDepthError
        When the prefixes end before ``beta`` is determined.
    """
    x, n, y = element.x_prefix, element.n, element.y_prefix
    for k in range(max(0, -n), len(y) + 1):
        if x[n + k:] == y[k:]:
            kappa = k
            break
    if kappa + 1 > len(y):
        raise InsufficientDepthError("y prefix too short to determine the bisection")
    return BisectionIndex(x[:n + kappa], y[:kappa + 1])


def realize(gamma: BisectionIndex, tail: Sequence[int]) -> SymbolicGroupoidElement:
    """A representative of ``G_gamma`` with the given common tail."""
    tail = tuple(tail)
    x = gamma.alpha + gamma.beta[-1:] + tail
    y = gamma.beta + tail
    return SymbolicGroupoidElement(x, gamma.cocycle, y)


def enumerate_wavelet_indices(adjacency: AdjacencyMatrix, gamma: BisectionIndex,
                              max_res: int) -> list[WaveletIndex]:
    """Wavelet labels on ``G_gamma`` with resolution ``|nu| <= max_res``.

    Nodes ``nu`` extend ``s(gamma) = beta`` and need a branching last letter.
    Channels run over ``1..outdeg(nu_last) - 1``. Ordering is by
    ``(|nu|, nu, j)``.
    """
    beta = gamma.beta
    out = []
    for depth in range(len(beta), max_res + 1):
        for nu in extensions(adjacency, beta, depth):
            d = adjacency.outdegree(nu[-1])
            out.extend(WaveletIndex(gamma, nu, j) for j in range(1, d))
    return out
