"""
Frequency-selective channel
---------------------------

Draw one equal-power multipath channel and look at its response over the
915 MHz band. Sixteen tones sample the curve.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from multisine_wpt import build_grid, frequency_response, generate_channel

channel = generate_channel(seed=0, n_paths=18, total_gain_db=51.67, delay_max=0.3e-6)

dense = frequency_response(channel, build_grid(910e6, 920e6, 1000))
tones = frequency_response(channel, build_grid(910e6, 920e6, 16))

plt.plot(dense.grid.frequencies / 1e6, dense.magnitudes, lw=1)
plt.plot(tones.grid.frequencies / 1e6, tones.magnitudes, "o")
plt.xlabel("frequency (MHz)")
plt.ylabel("$h_n$")
plt.savefig("channel_response.png", dpi=120)

print("strongest tone:", int(np.argmax(tones.magnitudes)) + 1)
print("gain spread (max/min):", tones.magnitudes.max() / tones.magnitudes.min())
