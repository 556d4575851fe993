"""Parry measure, wavelets and the closed-form Laplacian spectrum on the golden mean shift."""

#### Setup
import numpy as np

from ckspectral.laplacian import closed_form_spectrum, laplacian_matrix
from ckspectral.markov import AdjacencyMatrix, ahlfors_constant, extensions, parry_measure, perron_frobenius
from ckspectral.wavelets import build_basis

pf = perron_frobenius(AdjacencyMatrix.golden_mean())
print("lambda_max =", pf.lambda_max)

#### Cylinder measures and the Ahlfors constant
for w in extensions(pf.adjacency, (), 3):
    print(w, parry_measure(pf, w))
print("Ahlfors constant (depth 8):", ahlfors_constant(pf, 8).constant)

#### An orthonormal wavelet basis below the cylinder [1]
basis = build_basis(pf, (1,), 5, "gram_schmidt")
print("basis size:", basis.vectors.shape[1], "Gram error:", np.max(np.abs(basis.gram() - np.eye(basis.vectors.shape[1]))))

#### Closed-form eigenvalues against a dense eigensolver
exact = np.sort(np.linalg.eigvalsh(laplacian_matrix(pf, (1,), 6).matrix))
predicted = closed_form_spectrum(pf, (1,), 6)
print("max spectral mismatch:", np.max(np.abs(exact - predicted)))
