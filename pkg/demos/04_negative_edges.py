# When does a Laplacian with one negative edge stay positive semidefinite?
import numpy as np

from flowgain import SignedGraph, WeightedGraph
from flowgain.analysis import numeric_psd_threshold, signed_psd_check
from flowgain.graph import effective_resistance, is_psd, signed_laplacian

g = WeightedGraph(5, [(0, 1, 1.0), (1, 2, 0.5), (2, 3, 2.0), (3, 4, 1.0), (4, 0, 0.7), (1, 3, 0.3)])

u, v = 0, 2
R = effective_resistance(g, u, v)
print(f"R_{u}{v} = {R:.6f}, so the limit is |w-| <= {1 / R:.6f}")
print("bisection on the smallest eigenvalue gives", numeric_psd_threshold(g, (u, v)))

# the spectrum always contains 0 (constant vector); the second eigenvalue is
# the one that crosses zero at the threshold
for w in (-0.5 / R, -0.999 / R, -1.001 / R, -2.0 / R):
    c = signed_psd_check(g, (u, v), w)
    two = np.linalg.eigvalsh(signed_laplacian(SignedGraph(g, [(u, v, w)])))[:2]
    print(f"w- = {w:+.5f}: psd = {c.psd}, two smallest eigenvalues = {np.round(two, 5) + 0.0}")

# with several negative edges there is no closed form; the eigenvalue test still applies
L = signed_laplacian(SignedGraph(g, [(0, 2, -0.2), (1, 4, -0.2)]))
print("two negative edges:", is_psd(L))
