"""
Designed amplitudes and transmit signals
----------------------------------------

Compare the per-tone amplitudes chosen by each design at 10 W and the
resulting transmit signal over one period.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from multisine_wpt import build_grid, frequency_response, generate_channel
from multisine_wpt.experiments import waveform_report
from multisine_wpt.optimize import design
from multisine_wpt.quadrature import QuadratureSpec, sample_times
from multisine_wpt.rectenna import RectennaParams
from multisine_wpt.signal_model import eval_transmit

grid = build_grid(910e6, 920e6, 16)
resp = frequency_response(generate_channel(0, 18, 51.67, 0.3e-6), grid)
params = RectennaParams()
t = sample_times(grid, QuadratureSpec.evaluation(grid))

fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6))
for k, method in enumerate(["single_tone", "mrt", "scp_qclp"]):
    w, _ = design(method, resp, params, 10.0)
    ax1.bar(np.arange(1, 17) + 0.25 * (k - 1), w.amplitudes, width=0.25, label=method)
    ax2.plot(1e6 * t, eval_transmit(w, t), lw=0.8, label=method)
    print(f"{method:12s} PAPR = {waveform_report(w, resp).papr:.2f}")
ax1.set_xlabel("tone")
ax1.set_ylabel("$s_n$")
ax1.legend()
ax2.set_xlabel("t (us)")
ax2.set_ylabel("x(t)")
fig.tight_layout()
fig.savefig("waveforms.png", dpi=120)
