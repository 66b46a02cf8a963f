"""Acceptance suite: one test per criterion, summarised at the end of the run."""

import time

import numpy as np
import pytest

from energycp.agglo import e_agglo, goodness_of_fit
from energycp.cli import main
from energycp.divisive import DivisiveConfig, e_divisive, propose_next
from energycp.energy import best_split, empirical_divergence
from energycp.evaluation import (
    adjusted_rand,
    adjusted_rand_from_counts,
    pair_counts_from_table,
    rand_index,
)
from energycp.partition import Partition
from energycp.simlab import Scenario, run_study

from oracles import (
    adjusted_rand_hubert_arabie,
    coarsenings,
    direct_stat,
    divergence_loops,
    divergence_scale,
    exhaustive_split,
    labels_from_cps,
    rand_pairs,
)

pytestmark = pytest.mark.slow

STUDY = DivisiveConfig(num_permutations=199)


def random_samples(rng):
    n, m = (int(v) for v in rng.integers(2, 13, size=2))
    d = int(rng.integers(1, 4))
    alpha = float(rng.uniform(0.05, 1.95))
    return rng.normal(size=(n, d)), rng.normal(rng.uniform(-1, 1), rng.uniform(0.5, 2), (m, d)), alpha


@pytest.mark.criterion(1, "divergence matches triple-loop evaluation (1e-10 rel, 1000 cases, <10 s)")
def test_divergence_oracle(measured):
    rng = np.random.default_rng(101)
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(1000):
        X, Y, alpha = random_samples(rng)
        err = abs(empirical_divergence(X, Y, alpha) - divergence_loops(X, Y, alpha))
        worst = max(worst, err / divergence_scale(X, Y, alpha))
    elapsed = time.perf_counter() - t0
    measured(f"max rel err {worst:.2e}, {elapsed:.1f} s")
    assert worst <= 1e-10
    assert elapsed < 10


@pytest.mark.criterion(2, "split scan equals exhaustive search (200 series, T<=60, <30 s)")
def test_split_scan_oracle(measured):
    rng = np.random.default_rng(102)
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(200):
        T = int(rng.integers(4, 61))
        d = int(rng.integers(1, 4))
        ms = int(rng.integers(2, T // 2 + 1))
        alpha = float(rng.choice([0.5, 1.0, 1.5]))
        if i % 2:
            # univariate integer data at alpha=1: every distance and sum is an
            # exact integer, so values must match bitwise
            x = rng.integers(-5, 6, size=(T, 1)).astype(float)
            alpha = 1.0
        else:
            x = rng.normal(size=(T, d))
            x[int(rng.integers(1, T)):] += rng.uniform(0, 3)
        got = best_split(x, None, alpha, ms)
        tau, kappa, q = exhaustive_split(x, ms, alpha, stat=direct_stat(alpha))
        assert (got.tau, got.kappa) == (tau, kappa)
        if i % 2:
            assert got.qhat == q
        else:
            worst = max(worst, abs(got.qhat - q) / max(abs(q), 1e-300))
    elapsed = time.perf_counter() - t0
    measured(f"argmax exact, float max rel err {worst:.1e}, {elapsed:.1f} s")
    assert worst <= 1e-10
    assert elapsed < 30


@pytest.mark.criterion(3, "uni-mean T=300 mu=2 within 0.01 of 0.996; T=150 mu=4 within 0.005 of 1.000")
def test_univariate_mean_study(measured):
    t0 = time.perf_counter()
    a = run_study(Scenario("uni-mean", 2.0, 300, seed=3001), 100, STUDY)
    b = run_study(Scenario("uni-mean", 4.0, 150, seed=3002), 100, STUDY)
    elapsed = time.perf_counter() - t0
    measured(f"T=300: {a.mean_rand:.4f} (se {a.se_rand:.1e}); T=150: {b.mean_rand:.4f}; "
             f"{elapsed:.0f} s")
    assert abs(a.mean_rand - 0.996) <= 0.01
    assert abs(b.mean_rand - 1.000) <= 0.005
    assert elapsed < 600


@pytest.mark.criterion(4, "bi-mean T=300 mu=(2,2) within 0.01 of 0.992")
def test_bivariate_mean_study(measured):
    t0 = time.perf_counter()
    rep = run_study(Scenario("bi-mean", 2.0, 300, seed=4001), 100, STUDY)
    elapsed = time.perf_counter() - t0
    measured(f"{rep.mean_rand:.4f} (se {rep.se_rand:.1e}); {elapsed:.0f} s")
    assert abs(rep.mean_rand - 0.992) <= 0.01
    assert elapsed < 900


@pytest.mark.criterion(5, "dimension effect at T=600: rises without noise, falls with noise")
def test_dimension_study(measured):
    clean, noisy = [], []
    for d in (2, 5, 9):
        clean.append(run_study(Scenario("dim-correlation", 0.9, 600, seed=5000 + d, dim=d),
                               50, STUDY).mean_rand)
        noisy.append(run_study(Scenario("dim-correlation", 0.9, 600, seed=5100 + d, dim=d,
                                        noise=True), 50, STUDY).mean_rand)
    measured("no noise " + ", ".join(f"{v:.3f}" for v in clean)
             + "; noise " + ", ".join(f"{v:.3f}" for v in noisy))
    assert clean[0] < clean[1] < clean[2]
    assert noisy[0] > noisy[1] > noisy[2]
    assert abs(clean[2] - 0.997) <= 0.01


@pytest.mark.criterion(6, "median |tau/T - 0.5| non-increasing over T=150, 300, 600")
def test_location_consistency(measured):
    cfg = DivisiveConfig()
    medians = []
    for T in (150, 300, 600):
        errs = []
        for r in range(50):
            rng = np.random.default_rng([6000, T, r])
            x = np.r_[rng.standard_normal(T // 2), rng.standard_normal(T - T // 2) + 2.0]
            _, cand = propose_next(x, None, cfg)
            errs.append(abs(cand.tau / T - 0.5))
        medians.append(float(np.median(errs)))
    measured("medians " + ", ".join(f"{v:.4f}" for v in medians))
    assert medians[0] >= medians[1] >= medians[2]


@pytest.mark.criterion(7, "null false-positive fraction <= 0.08 (200 series, T=300)")
def test_null_false_positives(measured):
    hits = 0
    for r in range(200):
        x = np.random.default_rng([7000, r]).standard_normal(300)
        res = e_divisive(x, DivisiveConfig(num_permutations=199, sig_level=0.05, seed=r))
        hits += len(res.change_points) > 0
    measured(f"{hits}/200 = {hits / 200:.3f}")
    assert hits / 200 <= 0.08


@pytest.mark.criterion(8, "divergence invariances hold to 1e-12 relative (500 cases each)")
def test_invariances(measured):
    rng = np.random.default_rng(108)
    worst = {"symmetry": 0.0, "permutation": 0.0, "translation": 0.0, "scaling": 0.0}
    for _ in range(500):
        X, Y, alpha = random_samples(rng)
        base = empirical_divergence(X, Y, alpha)
        scale = divergence_scale(X, Y, alpha)
        worst["symmetry"] = max(worst["symmetry"],
                                abs(empirical_divergence(Y, X, alpha) - base) / scale)
        Xp, Yp = rng.permutation(X), rng.permutation(Y)
        worst["permutation"] = max(worst["permutation"],
                                   abs(empirical_divergence(Xp, Yp, alpha) - base) / scale)
        a = rng.normal(0, 3, size=X.shape[1])
        worst["translation"] = max(worst["translation"],
                                   abs(empirical_divergence(X + a, Y + a, alpha) - base) / scale)
        c = float(rng.uniform(-5, 5))
        k = abs(c) ** alpha
        got = empirical_divergence(c * X, c * Y, alpha)
        worst["scaling"] = max(worst["scaling"], abs(got - k * base) / (k * scale))
    measured(", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
    assert worst["symmetry"] == 0 and worst["permutation"] == 0
    assert max(worst.values()) <= 1e-12


@pytest.mark.criterion(9, "agglomerative fit updates match recomputation; example matches exhaustive")
def test_agglomerative_updates(measured):
    rng = np.random.default_rng(109)
    worst, done = 0.0, 0
    while done < 100:
        T = int(rng.integers(6, 121))
        cps, pos = [], 0
        while True:
            pos += int(rng.integers(2, 12))
            if pos > T - 2:
                break
            cps.append(pos)
        if not cps:
            continue
        x = rng.normal(size=(T, int(rng.integers(1, 4))))
        x[T // 2:] += rng.uniform(0, 2)
        alpha = float(rng.choice([0.5, 1.0, 1.5]))
        tr = e_agglo(x, Partition(tuple(cps), T), alpha)
        for g, part in zip(tr.gof, tr.partitions):
            want = goodness_of_fit(x, part, alpha)
            worst = max(worst, abs(g - want) / max(abs(want), 1e-12))
        done += 1
    x = np.array([0, 0, 0, 0, 5, 5, 5, 5], dtype=float)
    init = Partition((2, 4, 6), 8)
    tr = e_agglo(x, init)
    best = max((b for b in coarsenings(init.boundaries) if b),
               key=lambda b: goodness_of_fit(x, Partition(b, 8)))
    measured(f"max rel err {worst:.1e}; example best {tr.best_partition.boundaries}")
    assert worst <= 1e-9
    assert tr.best_partition.boundaries == best == (4,)


@pytest.mark.criterion(10, "Rand indices exact against pair enumeration; chance level near 0")
def test_rand_indices(measured):
    rng = np.random.default_rng(110)

    def draw(T):
        k = int(rng.integers(0, min(T - 1, 8) + 1))
        return Partition(tuple(sorted(rng.choice(np.arange(1, T), k, replace=False).tolist())), T)

    for _ in range(500):
        T = int(rng.integers(2, 51))
        u, v = draw(T), draw(T)
        lu, lv = labels_from_cps(u.boundaries, T), labels_from_cps(v.boundaries, T)
        agree, total = rand_pairs(lu, lv)
        assert rand_index(u, v) == agree / total
        assert adjusted_rand(u, v) == pytest.approx(adjusted_rand_hubert_arabie(lu, lv), abs=1e-12)
        assert adjusted_rand(u, u) == 1
    vals = []
    for _ in range(1000):
        T = int(rng.integers(20, 101))
        u, v = draw(T), draw(T)
        lu = labels_from_cps(u.boundaries, T)
        lv = rng.permutation(labels_from_cps(v.boundaries, T))
        table = np.zeros((u.n_clusters, v.n_clusters), dtype=np.int64)
        np.add.at(table, (lu, lv), 1)
        vals.append(adjusted_rand_from_counts(
            *pair_counts_from_table(table.ravel(), u.sizes(), v.sizes())))
    mean = float(np.mean(vals))
    measured(f"chance mean {mean:+.4f}")
    assert abs(mean) <= 0.02


@pytest.mark.criterion(11, "detect output byte-identical across thread counts")
def test_cli_determinism(tmp_path, measured, capsys):
    rng = np.random.default_rng(111)
    x = np.r_[rng.normal(0, 1, 60), rng.normal(3, 1, 60), rng.normal(0, 3, 60)]
    data = tmp_path / "series.csv"
    data.write_text("\n".join(repr(float(v)) for v in x) + "\n")
    outs = []
    for threads in (1, 4):
        out = tmp_path / f"out{threads}.json"
        code = main(["detect", "--input", str(data), "--min-size", "20", "--perms", "199",
                     "--seed", "11", "--threads", str(threads), "--no-timing",
                     "--output", str(out)])
        assert code == 0
        outs.append(out.read_bytes())
    measured(f"{len(outs[0])} bytes each")
    assert outs[0] == outs[1]
