"""Heat kernel on the full 2-shift: spectral agreement, the diagonal pole and the Dirac heat trace."""

#### Setup
import numpy as np
from scipy.linalg import expm

from ckspectral.groupoid import BisectionIndex
from ckspectral.heat import (full_shift_data, heat_kernel_value, heat_trace_sweep,
                             kernel_heat_matrix, kernel_threshold)
from ckspectral.laplacian import laplacian_matrix

n, depth = 2, 6
gamma = BisectionIndex((), (1,))
lap = laplacian_matrix(full_shift_data(n), gamma.beta, depth).matrix

#### Kernel matrix against exp(-t(Laplacian + |gamma|))
for t in (1.5, 3.0):
    spectral = expm(-t * (lap + gamma.length * np.eye(len(lap))))
    print(t, np.max(np.abs(kernel_heat_matrix(n, gamma, t, depth) - spectral)))

#### Diagonal values blow up below the threshold time
t0 = kernel_threshold(n)
for t in (0.9 * t0, 1.1 * t0):
    print(f"t = {t:.4f}:", [heat_kernel_value(n, gamma, t, c) for c in (10, 50, 200)])

#### Heat trace of the truncated Dirac operator
for t in (0.1, 2.0):
    for row in heat_trace_sweep(full_shift_data(n), t, [2, 3, 4, 5]):
        print(t, row)
