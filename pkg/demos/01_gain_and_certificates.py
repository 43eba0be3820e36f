# Worst-case gain of a small flow network, and three ways to certify it.
import numpy as np

from flowgain import PortSet, WeightedGraph
from flowgain.analysis import (
    connectivity_bound,
    hinf_norm,
    lmi_feasible,
    riccati_feasible,
    schur_feasible,
    siso_gain_via_resistance,
)

# four storage nodes on a ring, pipes (0,1), (0,2), (1,3), (2,3)
pairs = [(0, 1), (0, 2), (1, 3), (2, 3)]
g = WeightedGraph.from_topology(4, pairs, [0.25, 0.25, 0.25, 0.25])

# two disturbances, both entering at node 0 and leaving at nodes 3 and 1
ports = PortSet(4, [(0, 3), (0, 1)])
print("E =\n", ports.matrix())

cert = hinf_norm(g, ports)
print("gain matrix E^T L^+ E =\n", np.round(cert.gain_matrix, 6))
print("gamma =", cert.gamma)
print("worst input direction:", np.round(cert.achieving_direction, 6))

# the block LMI, its Schur complement and the Riccati inequality with P = gamma I
# all switch from infeasible to feasible at the same gamma
for scale in (0.99, 1.0, 1.01):
    gam = scale * cert.gamma
    verdicts = [f(g, ports, gam)[0] for f in (lmi_feasible, schur_feasible, riccati_feasible)]
    print(f"gamma x {scale}: lmi/schur/riccati = {verdicts}")

# a single port sees exactly the effective resistance between its ends
for i, j in ports.ports:
    single = hinf_norm(g, PortSet(4, [(i, j)])).gamma
    print(f"port ({i},{j}): gamma = {single:.6f}, R = {siso_gain_via_resistance(g, (i, j)):.6f}")

# cheap bound from the spectral gap; loose here, tight on a single edge
b = connectivity_bound(g, ports)
print(f"bound lambda_max(EE^T)/lambda_2 = {b.lambda_max_EEt:.3f}/{b.lambda2:.3f} = {b.bound:.4f}")
