# Time-domain check of the gain bound on the optimally allocated network.
# Writes the running norms to step_response.csv for plotting.
import sys

import numpy as np

from flowgain import PortSet, WeightedGraph
from flowgain.analysis import hinf_norm, slowest_rate
from flowgain.io import trace_to_csv
from flowgain.simulator import PiecewiseConstantSignal, gain_check, simulate, worst_case_signal

pairs = [(0, 1), (0, 2), (1, 3), (2, 3)]
g = WeightedGraph.from_topology(4, pairs, [0.6, 0.0, 0.4, 0.0])
ports = PortSet(4, [(0, 3), (0, 1)])
gamma = hinf_norm(g, ports).gamma

# first disturbance on for two seconds, the second joins after one
d = PiecewiseConstantSignal([0.0, 1.0, 2.0], [[1.0, 0.0], [1.0, 1.0]], [0.0, 0.0])

# node 2 has no pipes left, so lambda_2 = 0; the horizon uses the slowest
# mode that actually decays
rate = slowest_rate(g)
t_final = 2.0 + 20.0 / rate
tr = simulate(g, ports, d, t_final, dt=1e-3)

holds, worst = gain_check(tr, gamma)
print(f"gamma = {gamma:.6f}, horizon = {t_final:.2f} s")
print(f"||d|| = {tr.running_input_l2[-1]:.9f}  (sqrt 3 = {np.sqrt(3):.9f})")
print(f"||y|| = {tr.running_output_l2[-1]:.6f} <= gamma ||d|| = {gamma * tr.running_input_l2[-1]:.6f}: {holds}")

for t in (0.5, 1.0, 2.0, 5.0, 10.0, t_final):
    s = int(round(t / (tr.times[1] - tr.times[0])))
    print(f"  t = {tr.times[s]:6.2f}  |y| = {tr.running_output_l2[s]:.5f}  gamma|d| = {gamma * tr.running_input_l2[s]:.5f}")

# holding the worst direction for a long time pushes the ratio up to gamma
cert = hinf_norm(g, ports)
long_hold = worst_case_signal(cert.achieving_direction, 50.0 / rate)
tw = simulate(g, ports, long_hold, 50.0 / rate, dt=1e-2)
print("worst-case ratio:", tw.running_output_l2[-1] / tw.running_input_l2[-1])

out = sys.argv[1] if len(sys.argv) > 1 else "step_response.csv"
with open(out, "w") as f:
    f.write(trace_to_csv(tr, gamma))
print("wrote", out)
