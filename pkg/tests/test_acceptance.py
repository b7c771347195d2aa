"""Acceptance suite: one test per release criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines; tolerances are pinned here and nowhere else.
"""

import itertools
import math
import time

import numpy as np

from seriesbench import synthgen
from seriesbench.align_metrics import crps_instance, dtw
from seriesbench.cli import main
from seriesbench.core import MetricEntry, MetricReport, ReportContext
from seriesbench.embed_metrics import (
    GaussianSummary,
    fid,
    frechet_distance,
    gaussian_summary,
    j_ftsd,
    precision,
    recall,
)
from seriesbench.protocols import (
    RetrievalConfig,
    aggregate_ranks,
    dknn,
    drop_rate,
    hamming,
    retrieval_acc1,
    temporal_order_eval,
)
from seriesbench.schema_discovery import DiscoveryParams, canonicalize, discover
from seriesbench import tensorfile

from oracles import monotone_paths
from test_embed_metrics import brute_precision_recall
from test_schema_discovery import SCHEMA_A, AlternatingProposer, ConstantProposer


def _verdict(number: int, description: str, ok: bool) -> None:
    print(f"[criterion {number:02d}] {'PASS' if ok else 'FAIL'} - {description}")
    assert ok, f"criterion {number} failed: {description}"


def _unit_rows(x):
    return x / np.linalg.norm(x, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# 1. Fréchet oracle
# ---------------------------------------------------------------------------


def test_criterion_01_frechet_oracle():
    rng = np.random.default_rng(101)
    started = time.time()
    ok = True

    for _ in range(200):  # 1-D closed form
        mu = rng.normal(size=2)
        var = rng.uniform(0.1, 4.0, size=2)
        a = GaussianSummary(mean=mu[:1], covariance=np.array([[var[0]]]))
        b = GaussianSummary(mean=mu[1:], covariance=np.array([[var[1]]]))
        expected = (mu[0] - mu[1]) ** 2 + (math.sqrt(var[0]) - math.sqrt(var[1])) ** 2
        got = frechet_distance(a, b)
        ok &= abs(got - expected) <= 1e-10 * max(expected, 1e-30)

    for _ in range(200):  # commuting diagonal closed form
        d = int(rng.integers(2, 9))
        mu_a, mu_b = rng.normal(size=(2, d))
        var_a, var_b = rng.uniform(0.1, 4.0, size=(2, d))
        a = GaussianSummary(mean=mu_a, covariance=np.diag(var_a))
        b = GaussianSummary(mean=mu_b, covariance=np.diag(var_b))
        expected = float(((mu_a - mu_b) ** 2).sum() + ((np.sqrt(var_a) - np.sqrt(var_b)) ** 2).sum())
        got = frechet_distance(a, b)
        ok &= abs(got - expected) <= 1e-10 * max(expected, 1e-30)

    for _ in range(100):  # full covariance vs general eigendecomposition oracle
        d = int(rng.integers(2, 9))
        a = gaussian_summary(rng.normal(size=(60, d)) @ rng.normal(size=(d, d)))
        b = gaussian_summary(rng.normal(size=(60, d)) @ rng.normal(size=(d, d)) + rng.normal(size=d))
        eigs = np.linalg.eigvals(a.covariance @ b.covariance)
        cross = np.sqrt(np.clip(eigs.real, 0.0, None)).sum()
        expected = float(
            ((a.mean - b.mean) ** 2).sum()
            + np.trace(a.covariance)
            + np.trace(b.covariance)
            - 2.0 * cross
        )
        got = frechet_distance(a, b)
        ok &= abs(got - expected) <= 1e-8 * max(abs(expected), 1.0)

    elapsed = time.time() - started
    ok &= elapsed < 5.0
    _verdict(1, f"Fréchet closed forms and eigen oracle agree ({elapsed:.2f}s < 5s)", ok)


# ---------------------------------------------------------------------------
# 2. DTW exhaustive equivalence
# ---------------------------------------------------------------------------


def test_criterion_02_dtw_exhaustive():
    started = time.time()
    values = (0.0, 1.0, 2.0)
    seqs = {n: [np.array(s) for s in itertools.product(values, repeat=n)] for n in range(1, 6)}
    ok = True
    checked = 0
    for n in range(1, 6):
        for m in range(1, 6):
            xs = np.array(seqs[n])
            ys = np.array(seqs[m])
            cost = np.abs(xs[:, None, :, None] - ys[None, :, None, :])
            best = np.full((len(xs), len(ys)), np.inf)
            for path in monotone_paths(n, m):
                path_cost = np.zeros((len(xs), len(ys)))
                for i, j in path:
                    path_cost += cost[:, :, i, j]
                np.minimum(best, path_cost, out=best)
            for a in range(len(xs)):
                row = best[a]
                for b in range(len(ys)):
                    ok &= dtw(seqs[n][a], seqs[m][b]) == row[b]  # exact
                    checked += 1
    elapsed = time.time() - started
    ok &= checked == 363 * 363
    ok &= elapsed < 60.0
    _verdict(2, f"DP equals enumerated path minimum on all {checked} pairs ({elapsed:.1f}s < 60s)", ok)


# ---------------------------------------------------------------------------
# 3. CRPS analytic check
# ---------------------------------------------------------------------------


def test_criterion_03_crps_analytic():
    expected = 2.0 / math.sqrt(2.0 * math.pi) - 1.0 / math.sqrt(math.pi)  # ~0.23370
    ok = True
    for seed in range(20):
        rng = np.random.default_rng(seed)
        value = crps_instance(rng.standard_normal(100_000), 0.0)
        ok &= abs(value - expected) <= 0.01 * expected
    ok &= crps_instance(np.full(17, 3.25), 1.0) == 2.25  # degenerate bundle, exact
    _verdict(3, "empirical CRPS matches the Gaussian closed form within 1% over 20 seeds", ok)


# ---------------------------------------------------------------------------
# 4. Precision/recall oracle
# ---------------------------------------------------------------------------


def test_criterion_04_precision_recall_oracle():
    rng = np.random.default_rng(104)
    ok = True
    for trial in range(50):
        k = int(rng.choice([1, 3, 5]))
        n = int(rng.integers(k + 1, 21))
        d = int(rng.integers(1, 5))
        real = rng.normal(size=(n, d))
        gen = rng.normal(size=(n, d))
        expected = brute_precision_recall(real.tolist(), gen.tolist(), k)
        ok &= precision(real, gen, k=k) == expected[0]
        ok &= recall(real, gen, k=k) == expected[1]
    same = rng.normal(size=(12, 3))
    ok &= (precision(same, same, k=3), recall(same, same, k=3)) == (1.0, 1.0)
    far = same + 1e9
    ok &= (precision(same, far, k=3), recall(same, far, k=3)) == (0.0, 0.0)
    _verdict(4, "precision/recall equal the naive O(n^2) reference exactly", ok)


# ---------------------------------------------------------------------------
# 5. J-FTSD reductions
# ---------------------------------------------------------------------------


def test_criterion_05_jftsd_reductions():
    rng = np.random.default_rng(105)
    ts = rng.normal(size=(150, 6))
    gen = rng.normal(size=(150, 6)) * 1.3 + 0.2
    cond = rng.normal(size=(150, 4))
    ok = j_ftsd(ts, ts, cond) <= 1e-8
    constant = np.tile(rng.normal(size=4), (150, 1))
    ok &= abs(j_ftsd(ts, gen, constant) - fid(ts, gen)) <= 1e-8
    _verdict(5, "J-FTSD vanishes on identical data and collapses to FID under constant conditions", ok)


# ---------------------------------------------------------------------------
# 6. Synth-U contract
# ---------------------------------------------------------------------------


def test_criterion_06_synth_u_contract(tmp_path):
    started = time.time()
    dirs = [tmp_path / "run1", tmp_path / "run2"]
    for out in dirs:
        code = main(
            ["synth", "--variant", "u", "--seed", "0", "--n-per-combo", "1000", "--out", str(out)]
        )
        assert code == 0

    conditions = tensorfile.read_conditions(dirs[0] / "conditions.jsonl")
    series = tensorfile.read_tensor(dirs[0] / "series.tsb")
    splits = tensorfile.read_splits(dirs[0] / "splits.json")

    ok = series.n_samples == 32_000 and len(conditions) == 32_000
    labels = np.array([rec.label for rec in conditions])
    values, counts = np.unique(labels, return_counts=True)
    ok &= len(values) == 32 and bool(np.all(counts == 1000))
    ok &= (len(splits["train"]), len(splits["valid"]), len(splits["test"])) == (24_000, 4_000, 4_000)

    kind_counts = {k: 0 for k in synthgen.SHAPELET_KINDS}
    for rec in conditions:
        for seg in (1, 2, 3):
            kind_counts[synthgen.SHAPELET_KINDS[rec.attrs[f"segment_{seg}_shapelet"]]] += 1
    total = 3 * 32_000
    ok &= abs(kind_counts["none"] / total - 0.70) <= 0.02
    for kind in ("single_peak", "sag", "double_peaks"):
        ok &= abs(kind_counts[kind] / total - 0.10) <= 0.02

    # every injected single peak tops out inside [1.0, 1.2]
    seg_len = series.length // 3
    peaks_checked = 0
    for i, rec in enumerate(conditions):
        primary, secondary = synthgen.decode_attrs(rec.attrs)
        if "single_peak" not in secondary.segment_shapelets:
            continue
        local = synthgen.univariate_components(primary, secondary, 0, i, series.length)["local"]
        for seg, kind in enumerate(secondary.segment_shapelets):
            if kind == "single_peak":
                top = local[seg * seg_len : (seg + 1) * seg_len].max()
                ok &= 1.0 <= top <= 1.2
                peaks_checked += 1
    ok &= peaks_checked > 5_000

    for name in ("series.tsb", "conditions.jsonl", "schema.json", "splits.json"):
        ok &= (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()

    elapsed = time.time() - started
    ok &= elapsed < 120.0
    _verdict(
        6,
        f"synth --variant u: 32k samples, 32x1000 combos, 6:1:1 splits, "
        f"70/10/10/10 shapelets, peaks in range, byte-identical reruns ({elapsed:.0f}s < 120s)",
        ok,
    )


# ---------------------------------------------------------------------------
# 7. Rank protocol invariance
# ---------------------------------------------------------------------------


def test_criterion_07_rank_invariance():
    rng = np.random.default_rng(107)
    models = [f"model{i}" for i in range(8)]
    datasets = ["d1", "d2"]
    metrics = ["alpha", "beta", "gamma"]
    grouping = {"alpha": "fidelity", "beta": "fidelity", "gamma": "adherence"}
    raw = {
        (m, d): {k: float(rng.uniform(0.0, 1.0)) for k in metrics}
        for m in models
        for d in datasets
    }

    def reports(transform_metric=None, fn=None):
        out = []
        for (m, d), vals in raw.items():
            entries = []
            for k, v in vals.items():
                value = fn(v) if k == transform_metric else v
                entries.append(MetricEntry(k, value, "higher_better"))
            out.append(MetricReport(entries=tuple(entries), context=ReportContext(d, m, 0)))
        return out

    base_rows, base_table = aggregate_ranks(reports(), grouping)
    affine_rows, _ = aggregate_ranks(reports("beta", lambda x: 3.0 * x + 1.0), grouping)
    exp_rows, _ = aggregate_ranks(reports("beta", math.exp), grouping)
    ok = base_rows == affine_rows == exp_rows

    tied = [
        MetricReport(
            entries=(MetricEntry("m", 0.5 if m in ("model0", "model1") else 0.1, "higher_better"),),
            context=ReportContext("d", m, 0),
        )
        for m in models[:4]
    ]
    _, tied_table = aggregate_ranks(tied, {"m": "g"})
    column = tied_table.ranks[:, 0, 0]
    ok &= column.sum() == 4 * 5 / 2  # M(M+1)/2 with average ties
    ok &= sorted(column[:2]) == [1.5, 1.5] or set(column) == {1.5, 3.0, 4.0}
    _verdict(7, "ranks invariant under monotone transforms; average ties sum to M(M+1)/2", ok)


# ---------------------------------------------------------------------------
# 8. Retrieval protocol calibration
# ---------------------------------------------------------------------------


def test_criterion_08_retrieval_calibration():
    rng = np.random.default_rng(2024)
    gen = _unit_rows(rng.normal(size=(500, 16)))
    text = _unit_rows(rng.normal(size=(500, 16)))
    ok = retrieval_acc1(gen, text, RetrievalConfig(pool_size=1, repeats=3, seed=0)) == 1.0
    chance = retrieval_acc1(gen, text, RetrievalConfig(pool_size=10, repeats=100, seed=0))
    ok &= abs(chance - 0.10) <= 0.03

    seg = rng.normal(size=(3000, 4, 16))
    txt = rng.normal(size=(3000, 4, 16))
    confusion, accuracy = temporal_order_eval(seg, txt)
    ok &= bool(np.all(np.abs(confusion - 0.25) <= 0.03))
    ok &= abs(accuracy - 0.25) <= 0.03
    _verdict(
        8,
        f"pool-1 accuracy 1.0; chance-level retrieval {chance:.3f}~0.10; "
        f"temporal confusion uniform at 0.25",
        ok,
    )


# ---------------------------------------------------------------------------
# 9. Drop rate and compositional arithmetic
# ---------------------------------------------------------------------------


def test_criterion_09_droprate_and_compositional():
    ok = drop_rate(0.9, 0.7, 0.5) == 0.5  # exact

    rng = np.random.default_rng(109)
    vectors = rng.integers(0, 5, size=(2000, 6))
    for _ in range(10_000):
        a, b, c = vectors[rng.integers(0, len(vectors), size=3)]
        ok &= hamming(a, a) == 0
        ok &= hamming(a, b) == hamming(b, a) >= 0
        ok &= hamming(a, c) <= hamming(a, b) + hamming(b, c)

    for _ in range(1000):
        train = rng.integers(0, 3, size=(20, 5))
        test = rng.integers(0, 3, size=5)
        values = [dknn(test, train, k) for k in range(1, 21)]
        ok &= all(later >= earlier - 1e-12 for earlier, later in zip(values, values[1:]))
    _verdict(9, "drop rate exact; Hamming is a metric; dknn monotone in k", ok)


# ---------------------------------------------------------------------------
# 10. Schema discovery termination
# ---------------------------------------------------------------------------


def _fuzz_schema(rng) -> dict:
    n_attr = int(rng.integers(1, 5))
    attributes = []
    for i in range(n_attr):
        n_vals = int(rng.integers(2, 7))
        values = []
        for j in range(n_vals):
            token = f"value_{int(rng.integers(0, 8))}"
            style = int(rng.integers(0, 4))
            if style == 1:
                token = token.upper()
            elif style == 2:
                token = f"  {token} "
            elif style == 3:
                token = token.capitalize()
            values.append(token)
        if rng.random() < 0.5:
            values.insert(int(rng.integers(0, len(values) + 1)), "other")
        attributes.append(
            {
                "name": f" attr_{i} " if rng.random() < 0.3 else f"attr_{i}",
                "definition": "fuzzed",
                "values": values + ["fallback"],
            }
        )
    rng.shuffle(attributes)
    return {"attributes": attributes}


def test_criterion_10_schema_discovery_termination():
    corpus = [f"caption {i}" for i in range(400)]
    params = DiscoveryParams(batch_size=100, stability=3, max_iter=50, seed=0)

    constant = discover(corpus, ConstantProposer(SCHEMA_A), params)
    ok = constant.converged and constant.iterations == 4

    alternating = discover(corpus, AlternatingProposer(), params)
    ok &= (not alternating.converged) and alternating.iterations == 50

    rng = np.random.default_rng(110)
    for _ in range(1000):
        doc = _fuzz_schema(rng)
        once = canonicalize(doc, require_other=True)
        ok &= canonicalize(once) == once
    _verdict(
        10,
        "constant proposer stops at K+1=4 converged; alternating runs 50 rounds unconverged; "
        "canonicalize idempotent on 1000 fuzzed schemas",
        ok,
    )
