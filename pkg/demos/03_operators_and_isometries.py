"""Generators, commutator bounds and the isometry group on small truncation windows."""

#### Setup
import numpy as np

from ckspectral.isometry import aut_group, is_in_G_A, isometry_verification, random_element
from ckspectral.markov import AdjacencyMatrix, ahlfors_constant, perron_frobenius
from ckspectral.operators import (TruncationWindow, ck_relation_residual, commutator_norm,
                                  generator_matrix, laplacian_window)

pf = perron_frobenius(AdjacencyMatrix.golden_mean())
window = TruncationWindow(pf, 4, 4)
print("window dimension:", window.dim)

#### Cuntz-Krieger relations hold away from the truncation boundary
res = ck_relation_residual(window)
print("interior residual:", res.interior, "with boundary columns:", res.full)

#### Commutators with the Laplacian stay below the Ahlfors constant
lap = laplacian_window(window)
c = ahlfors_constant(pf, 8).constant
for i in (1, 2):
    print(f"||[Lap, S_{i}]|| =", commutator_norm(lap, generator_matrix(window, i)), "<= C =", c)

#### Isometries of the full 3-shift
full3 = perron_frobenius(AdjacencyMatrix.full_shift(3))
group = aut_group(full3.adjacency)
print("|Aut| =", len(group))
rng = np.random.default_rng(0)
print(isometry_verification(TruncationWindow(full3, 2, 2), random_element(group, rng)))

#### A random unitary is admissible for the full shift but not the golden mean
z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
u, _ = np.linalg.qr(z)
print(bool(is_in_G_A(AdjacencyMatrix.full_shift(2), u)), is_in_G_A(AdjacencyMatrix.golden_mean(), u).violations)
