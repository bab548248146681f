"""
Harvested power versus transmit power
-------------------------------------

Sweep the transmit power at 16 tones on one fixed channel and compare the
single-tone, MRT and SCP designs. At low power the diode behaves like a
square-law device and one strong tone is hard to beat; as power grows the
peaky multisine designs pull ahead.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from multisine_wpt.experiments import ExperimentConfig, SweepConfig, run_power_sweep

powers = [0.5, 1, 2, 5, 10, 20]
cfg = ExperimentConfig(sweep=SweepConfig("p_t", powers))
rows = run_power_sweep(cfg)

for method in cfg.methods:
    sel = [r for r in rows if r["method"] == method]
    plt.semilogy([r["p_t_w"] for r in sel], [1e6 * r["p_out_w"] for r in sel], "o-", label=method)
plt.xlabel("$P_T$ (W)")
plt.ylabel("DC power (uW)")
plt.legend()
plt.savefig("power_sweep.png", dpi=120)

for r in rows:
    print(f"{r['p_t_w']:5.1f} W  {r['method']:12s} {1e6 * r['p_out_w']:.4g} uW")
