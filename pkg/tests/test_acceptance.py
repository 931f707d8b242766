"""Acceptance criteria C1..C11, each run at its stated tolerance and time limit.

Every test prints one ``C<n> PASS|FAIL`` line; a summary of all lines is
printed again when the module finishes.  Run alone with
``pytest tests/test_acceptance.py -v -s``.
"""

import itertools
import math
import time
from dataclasses import replace

import numpy as np
import pytest

from pwot import experiments as exp
from pwot import quantizer as qz
from pwot.geometry import Rect
from pwot.grid import LayerSpec, instantiate_layer, preset
from pwot.rng import derive_seed
from pwot.tracker import TrackerConfig
from pwot.wnn import Discriminator, ParallelDiscriminator, make_input_mapping

VERDICTS: dict[int, str] = {}


@pytest.fixture(scope="module", autouse=True)
def summary(request):
    yield
    capman = request.config.pluginmanager.getplugin("capturemanager")
    with capman.global_and_fixture_disabled():
        print("\n--- acceptance summary ---")
        for n in sorted(VERDICTS):
            print(VERDICTS[n])


def verdict(request, n: int, ok: bool, detail: str, elapsed: float | None = None, limit: float | None = None):
    timed = elapsed is not None and limit is not None
    in_time = not timed or elapsed < limit
    passed = ok and in_time
    line = f"C{n} {'PASS' if passed else 'FAIL'}: {detail}"
    if elapsed is not None:
        line += f" [{elapsed:.1f} s" + (f" < {limit:.0f} s]" if limit else "]")
    VERDICTS[n] = line
    capman = request.config.pluginmanager.getplugin("capturemanager")
    with capman.global_and_fixture_disabled():
        print("\n" + line)
    assert ok, line
    assert in_time, line


def survival(report_or_cell) -> int:
    return report_or_cell.survival


# ----------------------------------------------------------------- C1

def test_c1_wisard_core(request):
    t0 = time.perf_counter()
    configs = 0
    problems = []
    for n, seed, total in itertools.product((1, 2, 3, 9, 15), range(4), (37, 200, 800)):
        configs += 1
        rng = np.random.default_rng([n, seed, total])
        m = make_input_mapping(total, n, seed)
        k = math.ceil(total / n)
        # partition: every input bit drives exactly one address line, the rest is padding
        used = m.assignment.ravel()
        real = np.sort(used[used != m.padding_index])
        if not (m.assignment.shape == (k, n) and np.array_equal(real, np.arange(total))
                and (used == m.padding_index).sum() == k * n - total):
            problems.append(f"partition N={n} seed={seed} bits={total}")
        if make_input_mapping(total, n, seed) != m:
            problems.append(f"determinism N={n} seed={seed}")
        d = Discriminator(m)
        if d.footprint_bits != k * 2 ** n:
            problems.append(f"footprint N={n}")
        trained = rng.integers(0, 2, (3, total), dtype=np.uint8)
        probes = rng.integers(0, 2, (64, total), dtype=np.uint8)
        before = d.respond_many(probes)
        if before.any():
            problems.append("untrained response nonzero")
        for p in trained:
            d.train(p)
            after = d.respond_many(probes)
            if (after < before).any() or (after > k).any() or (after < 0).any():
                problems.append(f"monotonicity/bounds N={n} seed={seed}")
            before = after
        if any(d.respond(p) != k for p in trained):
            problems.append(f"self-recognition N={n} seed={seed}")
    elapsed = time.perf_counter() - t0
    verdict(request, 1, configs >= 50 and not problems,
            f"{configs} configurations, N in {{1,2,3,9,15}}, {len(problems)} violations {problems[:3]}",
            elapsed, 10)


# ----------------------------------------------------------------- C2

def central_mask(w: int, h: int, p: float) -> np.ndarray:
    iw, ih = math.floor(w * math.sqrt(p) + 1e-9), math.floor(h * math.sqrt(p) + 1e-9)
    mask = np.zeros((h, w), bool)
    mask[(h - ih) // 2:(h - ih) // 2 + ih, (w - iw) // 2:(w - iw) // 2 + iw] = True
    return mask.ravel()


def test_c2_parallel_sum_exact(request):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    w, h, seed = 40, 20, 11
    train = rng.integers(0, 2, (2, h, w), dtype=np.uint8)
    probes = rng.integers(0, 2, (1000, h, w), dtype=np.uint8)
    probes[:50] = train[0] ^ (rng.random((50, h, w)) < 0.1)   # near-target patterns give nonzero sums
    mismatches = 0
    for p in (0.0, 0.3, 0.5, 1.0):
        pd = ParallelDiscriminator((w, h), p, 3, 15, seed=seed)
        for t in train:
            pd.train(t)
        mask = central_mask(w, h, p)
        flat = probes.reshape(len(probes), -1)
        expected = np.zeros(len(probes), np.int64)
        for bits, node_size, salt in ((flat[:, mask], 3, 1), (flat[:, ~mask], 15, 2)):
            if bits.shape[1] == 0:
                continue
            d = Discriminator(make_input_mapping(bits.shape[1], node_size, derive_seed(seed, salt)))
            for t in train:
                d.train(t.ravel()[mask if salt == 1 else ~mask])
            expected += d.respond_many(bits)
        got = pd.respond_many(probes)
        mismatches += int((got != expected).sum())
        if p in (0.0, 1.0):
            # collapse: one network over the whole window
            n = 3 if p == 1.0 else 15
            single = Discriminator(make_input_mapping(w * h, n, derive_seed(seed, 1 if p == 1.0 else 2)))
            for t in train:
                single.train(t.ravel())
            mismatches += int((got != single.respond_many(flat)).sum())
    elapsed = time.perf_counter() - t0
    verdict(request, 2, mismatches == 0,
            f"DR1+DR2 over 1000 patterns at P in {{0, .3, .5, 1}}, P=0/1 collapse; {mismatches} mismatches",
            elapsed, 5)


# ----------------------------------------------------------------- C3

def test_c3_quantizer(request):
    t0 = time.perf_counter()
    problems = []
    rng = np.random.default_rng(3)
    # threshold ordering
    for _ in range(500):
        t = qz.ThresholdSet(str(rng.choice(qz.COLORSPACES)), tuple(rng.uniform(0, 255, 3)),
                            tuple(rng.uniform(0, 40, 3)), tuple(rng.uniform(0, 5, 3)))
        lv = t.levels
        if not (lv[0] >= lv[1] and lv[2] >= lv[3] and lv[4] >= lv[5]):
            problems.append("ordering")
    # fixed-scale arithmetic: Cr +/- 3 sd, Y +/- 3 sd, Cb +/- 1.5 sd
    t = qz.thresholds_ycbcr(qz.ChannelStats(qz.YCBCR, (150.0, 120.0, 100.0), (10.0, 6.0, 4.0)))
    if t.levels != (112.0, 88.0, 180.0, 120.0, 129.0, 111.0):
        problems.append(f"levels {t.levels}")
    # BT.601 round trip
    rgb = rng.integers(0, 256, (100_000, 3))
    back = qz.ycbcr_to_rgb(qz.rgb_to_ycbcr(rgb)).astype(int)
    worst = int(np.abs(back - rgb).max())
    if worst > 1:
        problems.append(f"round trip off by {worst}")
    # 3-sigma coverage per channel on 1e5 Gaussian pixels
    pixels = np.clip(np.round(rng.normal((150, 110, 140), (8, 6, 5), (100_000, 3))), 0, 255)
    stats = qz.channel_stats(pixels, qz.YCBCR)
    three = qz.ThresholdSet(qz.YCBCR, stats.mean, stats.std, (3.0, 3.0, 3.0))
    values = qz.to_colorspace(pixels, qz.YCBCR)
    coverage = ((values >= three.lower) & (values <= three.upper)).mean(axis=0) * 100
    if coverage.min() < 99.0 or np.abs(coverage - 99.73).max() > 0.5:
        problems.append(f"coverage {coverage.round(2)}")
    # corruption flips exactly round(f * n) bits
    for f, n, seed in itertools.product((0.0, 0.1, 0.2, 0.3, 0.55, 1.0), (1, 7, 400, 800), range(5)):
        p = rng.integers(0, 2, n, dtype=np.uint8)
        q = qz.corrupt_bits(p, qz.CorruptionSpec(f, seed))
        if int((p != q).sum()) != math.floor(f * n + 0.5):
            problems.append(f"hamming f={f} n={n}")
    elapsed = time.perf_counter() - t0
    verdict(request, 3, not problems,
            f"ordering, (3,3,1.5) levels, BT.601 max error {worst}, 3-sigma coverage "
            f"{', '.join(f'{c:.2f}%' for c in coverage)}, Hamming exact; {problems[:3]}", elapsed, 30)


# ----------------------------------------------------------------- C4

def test_c4_grid_presets(request):
    t0 = time.perf_counter()
    published = {"GP1": 144, "GP2": 400, "GP3": 900, "GP4": 400, "GP5": 400, "GP7": 500, "GP11": 500}
    counts = {name: preset(name).center_count for name in published}
    equivariant = True
    rng = np.random.default_rng(4)
    for _ in range(200):
        layer = LayerSpec(*(int(v) for v in rng.integers(1, 12, 4)))
        a = (int(rng.integers(-300, 300)), int(rng.integers(-300, 300)))
        d = (int(rng.integers(-50, 50)), int(rng.integers(-50, 50)))
        pa = instantiate_layer(layer, a).points
        pb = instantiate_layer(layer, (a[0] + d[0], a[1] + d[1])).points
        equivariant &= np.array_equal(pb - pa, np.tile(d, (len(pa), 1)))
    elapsed = time.perf_counter() - t0
    verdict(request, 4, counts == published and equivariant,
            f"centre counts {counts}, translation equivariant over 200 lattices: {equivariant}", elapsed, 5)


# ----------------------------------------------------------------- C5

def test_c5_clean_tracking(request):
    t0 = time.perf_counter()
    cfg = exp.ExperimentConfig(tracker=TrackerConfig(layout="GP5", colorspace="ycbcr", node_size=3), scene="easy")
    failures = {}
    lengths = set()
    for s in range(5):
        report = exp.run_experiment(cfg.with_seed(s))
        lengths.add(report.frame_count)
        failures[s] = report.first_failure
    elapsed = time.perf_counter() - t0
    ok = lengths == {60} and all(v is None for v in failures.values())
    verdict(request, 5, ok, f"easy/GP5/YCbCr/N=3, first failure per seed {failures}", elapsed, 60)


# ----------------------------------------------------------------- C6

def test_c6_predictor_value(request):
    t0 = time.perf_counter()
    base = exp.ExperimentConfig(scene="maneuver")
    pairs = {}
    for s in range(5):
        seeded = base.with_seed(s)
        on = exp.run_experiment(replace(seeded, tracker=replace(seeded.tracker, layout="GP5")))
        off = exp.run_experiment(replace(seeded, tracker=replace(seeded.tracker, layout="GP4")))
        pairs[s] = (on.survival, off.survival)
    wins = sum(a >= b for a, b in pairs.values())
    elapsed = time.perf_counter() - t0
    verdict(request, 6, wins >= 4, f"maneuver survival (GP5, GP4) per seed {pairs}; GP5 >= GP4 in {wins}/5",
            elapsed)


# ----------------------------------------------------------------- C7

def test_c7_node_size_robustness(request):
    t0 = time.perf_counter()
    base = exp.ExperimentConfig(tracker=TrackerConfig(layout="GP7"), scene="easy")
    cells = []
    for corr, s in itertools.product((0.1, 0.2, 0.3), range(5)):
        seeded = replace(base, corruption=corr).with_seed(s)
        small, large = (exp.run_experiment(replace(seeded, tracker=replace(seeded.tracker, node_size=n)))
                        for n in (3, 15))
        cells.append((corr, s, small.survival, large.survival))
    share = sum(a >= b for _, _, a, b in cells) / len(cells)
    elapsed = time.perf_counter() - t0
    detail = ", ".join(f"{c}/{s}:{a}v{b}" for c, s, a, b in cells)
    verdict(request, 7, share >= 0.6, f"N=3 >= N=15 in {share:.0%} of cells (need 60%); {detail}", elapsed, 300)


# ----------------------------------------------------------------- C8

def test_c8_grid_density(request):
    t0 = time.perf_counter()
    base = exp.ExperimentConfig(scene="low-contrast", corruption=0.2)
    report = exp.sweep_grids(["GP8", "GP9", "GP10", "GP11"], [0.2], base, seeds=range(10))
    surv = {g: [report.lookup(g, 0.2, s).survival for s in range(10)] for g in ("GP8", "GP9", "GP10", "GP11")}
    w11 = sum(a >= b for a, b in zip(surv["GP11"], surv["GP10"]))
    w9 = sum(a >= b for a, b in zip(surv["GP9"], surv["GP8"]))
    elapsed = time.perf_counter() - t0
    verdict(request, 8, w11 > 5 and w9 > 5,
            f"GP11 >= GP10 in {w11}/10, GP9 >= GP8 in {w9}/10; survival {surv}", elapsed, 300)


# ----------------------------------------------------------------- C9

def test_c9_parallel_fraction(request):
    t0 = time.perf_counter()
    p_values = [round(0.1 * i, 1) for i in range(1, 10)]
    base = exp.ExperimentConfig(scene="low-contrast", corruption=0.2)
    report = exp.sweep_parallel_fraction(p_values, [0.2], base, seeds=range(5), layout="GP11")
    hits = {}
    for s in range(5):
        baseline = max(report.lookup("single-3", 0.2, s).survival, report.lookup("single-15", 0.2, s).survival)
        best = max(report.lookup(f"parallel-{p:.3f}", 0.2, s).survival for p in p_values)
        hits[s] = (best, baseline)
    wins = sum(b >= a for b, a in hits.values())
    elapsed = time.perf_counter() - t0
    verdict(request, 9, wins >= 4,
            f"best parallel vs max baseline survival per seed {hits}; P exists in {wins}/5", elapsed, 600)


# ----------------------------------------------------------------- C10

def test_c10_performance_shape(request):
    t0 = time.perf_counter()
    cfg = exp.ExperimentConfig(tracker=TrackerConfig(layout="GP7"), scene="easy")
    rows = {r.node_size: r for r in exp.bench_node_sizes(range(1, 21), cfg)}
    et = {n: rows[n].mean_et_ms for n in rows}
    mid = [et[n] for n in range(2, 15)]
    spread = max(mid) / min(mid)
    centres = preset("GP7").center_count
    slw = exp.load_input(cfg)[1][0]
    doubling = all(rows[n + 1].node_footprint_bits == 2 * rows[n].node_footprint_bits for n in range(1, 20))
    totals = all(r.footprint_bits == centres * math.ceil(slw.area / n) * 2 ** n for n, r in rows.items())
    statuses = {r.status for r in rows.values()}
    elapsed = time.perf_counter() - t0
    ok = statuses == {"ok"} and spread <= 2.0 and et[20] > et[8] and doubling and totals
    verdict(request, 10, ok,
            f"ET 2..14 spread {spread:.2f}x (min {min(mid):.2f}, max {max(mid):.2f} ms), ET(8)={et[8]:.2f} ms, "
            f"ET(20)={et[20]:.2f} ms, per-node footprint doubles: {doubling}, grid footprint = "
            f"centres*k*2^N: {totals}", elapsed, 180)


# ----------------------------------------------------------------- C11

def test_c11_determinism(request):
    t0 = time.perf_counter()
    cfg = exp.ExperimentConfig(tracker=TrackerConfig(layout="GP11"), scene="low-contrast",
                               corruption=0.2, frame_limit=30).with_seed(3)
    a, b = exp.run_experiment(cfg), exp.run_experiment(cfg)
    runs_equal = a.csv_text(timing=False) == b.csv_text(timing=False)
    pcfg = replace(cfg, frame_limit=12)
    s1 = exp.sweep_parallel_fraction([0.5], [0.2], pcfg, seeds=[0, 1])
    s2 = exp.sweep_parallel_fraction([0.5], [0.2], pcfg, seeds=[0, 1])
    sweeps_equal = s1.csv_text() == s2.csv_text()
    elapsed = time.perf_counter() - t0
    verdict(request, 11, runs_equal and sweeps_equal,
            f"rerun CSV (timing columns dropped) byte-identical: run {runs_equal}, sweep {sweeps_equal}", elapsed)
