"""Monte-Carlo calibration of the volatility-clustering fixture.

For each series length and log-volatility memory exponent beta, fit the decay
exponent of the normalized |r| autocorrelation over lags [10, 1000] and
average over seeds.  Writes tests/data/volatility_calibration.csv with
columns log2_length,beta,fitted_gamma,sd.

    python scripts/calibrate_volatility.py
"""

import csv
import sys
from pathlib import Path

import numpy as np

from mfcca.stylized import fit_decay_exponent, volatility_autocorrelation
from mfcca.synthetic import volatility_returns

LOG2_LENGTHS = (16, 18, 20, 22)
BETAS = (0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7)
SEEDS = {16: 24, 18: 16, 20: 12, 22: 6}

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parents[1] / "tests/data/volatility_calibration.csv"
rows = []
for k in LOG2_LENGTHS:
    for beta in BETAS:
        g = []
        for seed in range(SEEDS[k]):
            x = volatility_returns(beta, 2**k, np.random.default_rng(10_000 + seed))
            g.append(fit_decay_exponent(volatility_autocorrelation(x, 1000))[0])
        rows.append((k, beta, round(float(np.mean(g)), 4), round(float(np.std(g)), 4)))
        print(*rows[-1], flush=True)
with open(out, "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["log2_length", "beta", "fitted_gamma", "sd"])
    w.writerows(rows)
