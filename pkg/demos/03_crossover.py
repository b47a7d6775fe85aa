"""From complex symmetric to Ginibre: M = (S + alpha A) / sqrt(1 + alpha^2).

The spacing variance drops from the symmetric value to the Ginibre value
already for alpha of order 1/sqrt(N).  A short run at N = 150 shows the
trend; the table command does the full-size version.
"""

import math

from dissipative_rmt.runner import TABLE2_REFERENCE, rmt_spectra, rmt_statistics

N, COUNT = 150, 60

print("alpha        sigma0   m1      reference sigma0 (N=300 table)")
for row, scaled in (("rmt-0", 0.0), ("rmt-0.9", 0.9), ("rmt-1.5", 1.5), ("rmt-1", None)):
    alpha = 1.0 if scaled is None else scaled / math.sqrt(N)
    stats = rmt_statistics(rmt_spectra(N, COUNT, seed=5, alpha=alpha), N)
    print(f"{alpha:8.4f}   {stats['sigma0']:.4f}  {stats['m1']:.4f}  "
          f"{TABLE2_REFERENCE[row][1]}")
