"""Statistical fidelity metrics under controlled corruption.

Starting from a synthetic dataset, we corrupt a copy in specific ways and
watch which metric reacts: MDD sees marginal shifts, ACD sees broken
temporal structure, SD/KD see reshaped value distributions.
"""

import numpy as np

from seriesbench import synthgen
from seriesbench.stat_metrics import HistogramSpec, acd, kd, mdd, sd

real = synthgen.build_synth_dataset("u", seed=1, n_per_combo=16, length=96).series.data
spec = HistogramSpec.from_training(real, n_bins=32)
rng = np.random.default_rng(0)


def row(name, gen):
    print(
        f"{name:>24}:  MDD {mdd(real, gen, spec):.4f}   ACD {acd(real, gen):.4f}"
        f"   SD {sd(real, gen):.4f}   KD {kd(real, gen):.4f}"
    )


row("identical copy", real.copy())
row("mean shifted by 0.5", real + 0.5)                       # MDD reacts, ACD does not
row("time-shuffled", real[:, rng.permutation(96), :])        # ACD reacts most
row("heavy-tailed noise", real + 0.3 * rng.standard_t(df=2, size=real.shape))  # KD reacts
skewed = real + rng.exponential(0.4, size=real.shape)
row("skewed noise", skewed)                                  # SD reacts
