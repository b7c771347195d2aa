"""Reference-anchored adherence metrics: best-of-K DTW and mean CRPS.

DTW uses the classic O(N*M) dynamic program with Euclidean point cost over
full feature vectors and no warping window; boundary cells carry +inf so they
never win a min.  CRPS is the empirical two-sample form
``mean|x - y| - mean|x - x'| / 2`` evaluated per (sample, timestep, feature)
via the sorted-prefix identity, which is exact and O(K log K) per cell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from seriesbench.core import ContractViolation, TimeSeriesTensor, as_series_array

_SMALL_DP_CELLS = 1024


@dataclass(frozen=True)
class GenerationBundle:
    """K generated series per reference sample; shape (n, K, L, F)."""

    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 4:
            raise ContractViolation(f"bundle must be (n, K, L, F), got shape {data.shape}")
        if data.shape[1] < 1:
            raise ContractViolation("bundle needs K >= 1 samples per reference")
        object.__setattr__(self, "data", data)

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]

    @property
    def k(self) -> int:
        return self.data.shape[1]

    @classmethod
    def from_flat(cls, flat: TimeSeriesTensor | np.ndarray, k: int) -> "GenerationBundle":
        """Regroup a (n*K, L, F) tensor stored grouped by sample."""
        arr = as_series_array(flat)
        if k < 1 or arr.shape[0] % k != 0:
            raise ContractViolation(f"flat bundle of {arr.shape[0]} rows not divisible by K={k}")
        return cls(data=arr.reshape(arr.shape[0] // k, k, arr.shape[1], arr.shape[2]))


def _as_points(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 1:
        raise ContractViolation(f"series must be non-empty (N,) or (N, F), got shape {x.shape}")
    return x


def dtw(x: np.ndarray, y: np.ndarray) -> float:
    """Dynamic time warping distance between two point sequences.

    Local cost is the Euclidean distance between feature vectors; the
    recurrence D(i, j) = c(i, j) + min(D(i-1, j), D(i, j-1), D(i-1, j-1))
    starts from D(0, 0) = 0 with +inf borders and returns D(N, M).
    """
    xp = _as_points(x)
    yp = _as_points(y)
    if xp.shape[1] != yp.shape[1]:
        raise ContractViolation(f"feature mismatch: {xp.shape[1]} vs {yp.shape[1]}")
    diff = xp[:, None, :] - yp[None, :, :]
    cost = np.sqrt((diff**2).sum(axis=2))
    n, m = cost.shape
    if n * m <= _SMALL_DP_CELLS:
        return _dtw_loop(cost)
    return _dtw_wavefront(cost)


def _dtw_loop(cost: np.ndarray) -> float:
    n, m = cost.shape
    inf = np.inf
    prev = [0.0] + [inf] * m
    for i in range(n):
        row = cost[i]
        cur = [inf] * (m + 1)
        for j in range(m):
            cur[j + 1] = row[j] + min(prev[j + 1], cur[j], prev[j])
        prev = cur
    return float(prev[m])


def _dtw_wavefront(cost: np.ndarray) -> float:
    # anti-diagonal sweep: cell (i, j) only needs diagonals s-1 and s-2
    n, m = cost.shape
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    for s in range(2, n + m + 1):
        i = np.arange(max(1, s - m), min(n, s - 1) + 1)
        j = s - i
        best = np.minimum(acc[i - 1, j], acc[i, j - 1])
        np.minimum(best, acc[i - 1, j - 1], out=best)
        acc[i, j] = cost[i - 1, j - 1] + best
    return float(acc[n, m])


def dtw_score(refs: TimeSeriesTensor | np.ndarray, bundle: GenerationBundle) -> float:
    """Mean over references of the best-of-K DTW distance."""
    r = as_series_array(refs)
    if r.shape[0] != bundle.n_samples or r.shape[1:] != bundle.data.shape[2:]:
        raise ContractViolation(
            f"refs {r.shape} do not align with bundle {bundle.data.shape}"
        )
    total = 0.0
    for i in range(r.shape[0]):
        total += min(dtw(r[i], bundle.data[i, k]) for k in range(bundle.k))
    return total / r.shape[0]


# ---------------------------------------------------------------------------
# CRPS
# ---------------------------------------------------------------------------


def _mean_abs_pairwise_sorted(sorted_vals: np.ndarray) -> np.ndarray:
    """sum_{i,j} |x_i - x_j| / K^2 along the last axis of pre-sorted values."""
    k = sorted_vals.shape[-1]
    weights = 2.0 * np.arange(k) - k + 1.0
    return 2.0 * (sorted_vals * weights).sum(axis=-1) / (k * k)


def crps_instance(samples: np.ndarray, y: float) -> float:
    """Empirical CRPS of one forecast ensemble against a scalar observation.

    ``mean_i |x_i - y| - (1 / 2K^2) sum_{i,j} |x_i - x_j|``; collapses to the
    absolute error when every sample is identical.
    """
    s = np.asarray(samples, dtype=np.float64).ravel()
    if s.size < 1:
        raise ContractViolation("need at least one forecast sample")
    term1 = np.abs(s - y).mean()
    term2 = 0.5 * _mean_abs_pairwise_sorted(np.sort(s))
    return float(term1 - term2)


def crps_score(refs: TimeSeriesTensor | np.ndarray, bundle: GenerationBundle) -> float:
    """CRPS per (sample, timestep, feature), averaged over timesteps, then features, then samples."""
    r = as_series_array(refs)
    if r.shape[0] != bundle.n_samples or r.shape[1:] != bundle.data.shape[2:]:
        raise ContractViolation(
            f"refs {r.shape} do not align with bundle {bundle.data.shape}"
        )
    # (n, K, L, F) -> sort forecasts along K
    sorted_k = np.sort(bundle.data, axis=1)
    term1 = np.abs(bundle.data - r[:, None, :, :]).mean(axis=1)  # (n, L, F)
    term2 = 0.5 * _mean_abs_pairwise_sorted(np.moveaxis(sorted_k, 1, -1))  # (n, L, F)
    cell = term1 - term2
    return float(cell.mean(axis=1).mean(axis=1).mean())
