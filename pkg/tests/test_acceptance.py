"""Acceptance criteria, one test each.

Every test prints a PASS/FAIL line in the "acceptance criteria" section of
the pytest summary. Run just these with::

    pytest tests/test_acceptance.py -v
"""

import json
import math
import time

import mpmath
import numpy as np

from cellrelay.allocation import (brute_force_optimum, closed_form_split, expected_errors,
                                  integerize, satisfying_packets, adaptive_split)
from cellrelay.channel import AwgnQam16, effective_per, per_from_ber
from cellrelay.cli import main
from cellrelay.engine import fixed_per_config, run
from cellrelay.experiments import (PUBLISHED_RELAY_GAINS, RatioSweepSpec, RelaySweepSpec,
                                   relay_gains, run_ratio_sweep, run_relay_sweep)


def criterion(label):
    def mark(fn):
        fn.criterion = label
        return fn
    return mark


def random_tuples(rng, n):
    per1 = rng.uniform(1e-6, 1e-2, n)
    per2 = rng.uniform(1e-6, 1e-2, n)
    a = rng.uniform(0.25, 4.0, n)
    k = rng.integers(2, 51, n)
    return per1, per2, a, k


@criterion("C1 closed-form split sums to K and falls with a")
def test_c1_closed_form(report):
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    per1, per2, a, k = random_tuples(rng, 10_000)
    worst = 0.0
    for p1, p2, r, kk in zip(per1, per2, a, k):
        n1, n2 = closed_form_split(p1, p2, r, int(kk))
        worst = max(worst, abs(n1 + n2 - kk) / kk)
    assert worst <= 1e-9
    # 100 slices of 100 tuples sharing (per1, per2, K), sorted by a
    for i in range(100):
        p1, p2, kk = per1[i], per2[i], int(k[i])
        n1 = [closed_form_split(p1, p2, r, kk)[0] for r in np.sort(a[100 * i:100 * (i + 1)])]
        assert all(x > y for x, y in zip(n1, n1[1:]))
    elapsed = time.perf_counter() - start
    report(f"max |sum-K|/K={worst:.1e}, {elapsed:.2f}s")
    assert elapsed < 5


@criterion("C2 symmetric case splits 5/5")
def test_c2_symmetry(report):
    for p in (1e-6, 5.5e-4, 1e-2):
        n1, _ = closed_form_split(p, p, 1.0, 10)
        assert integerize(n1, 10) == (5, 5)
        assert adaptive_split(p, p, 1.0, 10) == (5, 5)
    report("(5, 5)")


@criterion("C3 brute-force optimum dominates the closed form")
def test_c3_oracle_dominance(report):
    start = time.perf_counter()
    rng = np.random.default_rng(303)
    per1, per2, a, k = random_tuples(rng, 10_000)
    t1 = 10 ** rng.uniform(-4, -1, per1.size)
    gaps = []
    for p1, p2, r, kk, tt in zip(per1, per2, a, k, t1):
        kk = int(kk)
        counts = adaptive_split(p1, p2, r, kk)
        best = brute_force_optimum(p1, p2, tt, r * tt, kk)
        got = satisfying_packets(counts, p1, p2, tt, r * tt)
        assert best.objective >= got
        gaps.append(best.objective - got)
    elapsed = time.perf_counter() - start
    report(f"mean gap {np.mean(gaps):.3f} packets, max {max(gaps)}, {elapsed:.1f}s")
    assert elapsed < 30


@criterion("C4 adaptive errors <= uniform exactly when (p1-p2)(a*p1-p2) >= 0")
def test_c4_dominance_condition(report):
    rng = np.random.default_rng(404)
    per1, per2, a, k = random_tuples(rng, 10_000)
    holds = 0
    for p1, p2, r, kk in zip(per1, per2, a, k):
        kk = int(kk)
        adaptive = expected_errors(closed_form_split(p1, p2, r, kk), p1, p2)
        uniform = expected_errors((kk / 2, kk / 2), p1, p2)
        condition = (p1 - p2) * (r * p1 - p2) >= 0
        assert (adaptive <= uniform + 1e-12) == condition or abs(adaptive - uniform) <= 1e-12
        holds += condition
    report(f"condition held on {holds}/10000 tuples")


@criterion("C5 measured PER inside the 3-sigma binomial interval")
def test_c5_engine_fidelity(report):
    start = time.perf_counter()
    p = 0.001
    cfg = fixed_per_config(p, p, 3e-4, 3e-4, duration_bursts=100_000, allocator="uniform",
                           seed=2024)
    result = run(cfg)
    elapsed = time.perf_counter() - start
    parts = []
    for m in result.mobiles:
        sigma = math.sqrt(p * (1 - p) / m.sent_packets)
        parts.append(f"{m.measured_per:.6f} (z={(m.measured_per - p) / sigma:+.2f})")
        assert abs(m.measured_per - p) <= 3 * sigma
    report(f"PER {', '.join(parts)}, {elapsed:.1f}s")
    assert elapsed < 10


@criterion("C6 relay sweep matches enumeration and saturates")
def test_c6_relay_sweep(report):
    start = time.perf_counter()
    rows = run_relay_sweep(RelaySweepSpec(relay_counts=tuple(range(9)), samples_per_point=100_000,
                                          seed=1))
    elapsed = time.perf_counter() - start
    mc = [r.goodput1_bps for r in rows]
    errors = [abs(r.goodput1_bps - r.oracle_value) / r.oracle_value for r in rows[:5]]
    gains = relay_gains(mc)
    increments = [b - a for a, b in zip(mc, mc[1:])]
    tail = (mc[8] - mc[4]) / mc[4]
    published = "/".join(f"{100 * g:+.0f}%" for g in PUBLISHED_RELAY_GAINS)
    report(f"max MC-vs-oracle {100 * max(errors):.2f}%, gains 0->1 {100 * gains[0]:+.1f}%, "
           f"1->2 {100 * gains[1]:+.1f}% (published {published}), 4->8 {100 * tail:+.2f}%, "
           f"{elapsed:.1f}s")
    assert max(errors) <= 0.02
    assert all(x <= y for x, y in zip(mc, mc[1:]))
    assert increments[0] > increments[1] > increments[2] > increments[3]
    assert tail < 0.05
    assert elapsed < 60


@criterion("C7 ratio sweep: higher target earns more goodput, N1/N2 = 1/a")
def test_c7_ratio_sweep(report):
    start = time.perf_counter()
    spec = RatioSweepSpec(duration_bursts=100_000, seed=1)
    rows = run_ratio_sweep(spec)
    elapsed = time.perf_counter() - start
    assert len(spec.a_values) == 21
    adaptive = {r.coordinate: r for r in rows if r.scheme == "Adaptive"}
    uniform = {r.coordinate: r for r in rows if r.scheme == "Uniform"}
    per = effective_per(spec.link_models[0])
    worst_ratio, smallest_margin = 0.0, math.inf
    for a, row in adaptive.items():
        worst_ratio = max(worst_ratio, abs((row.n1 / row.n2) * a - 1))
        assert math.isclose(row.n1 / row.n2, 1 / a, rel_tol=1e-12)
        if a != 1.0:
            high, low = (row.goodput2_bps, row.goodput1_bps) if a > 1 else \
                        (row.goodput1_bps, row.goodput2_bps)
            smallest_margin = min(smallest_margin, (high - low) / low)
            assert high > low
        if (per - per) * (a * per - per) >= 0:
            assert row.expected_errors <= uniform[a].expected_errors + 1e-12
    report(f"max |N1/N2*a-1|={worst_ratio:.1e}, smallest goodput lead {100 * smallest_margin:.1f}%, "
           f"{elapsed:.0f}s")
    assert elapsed < 300


@criterion("C8 every subcommand is byte-for-byte reproducible")
def test_c8_determinism(report, tmp_path, capsys):
    run_cfg = tmp_path / "run.json"
    run_cfg.write_text(json.dumps(fixed_per_config(0.002, 0.001, 2e-4, 6e-4,
                                                   duration_bursts=3000, seed=5).to_dict()))
    relay_cfg = tmp_path / "relays.json"
    relay_cfg.write_text(json.dumps({"relay_counts": [0, 1, 2, 3], "samples_per_point": 3000}))
    ratio_cfg = tmp_path / "ratio.json"
    ratio_cfg.write_text(json.dumps({"a_values": [0.5, 1.0, 2.0], "duration_bursts": 1000,
                                     "per_feedback": "ack"}))
    commands = {
        "alloc": ["alloc", "--per1", "0.001", "--per2", "0.0005", "--t1", "2.5e-4", "--t2", "5e-4"],
        "run": ["run", "--config", str(run_cfg)],
        "sweep-relays": ["sweep-relays", "--config", str(relay_cfg), "--seed", "7"],
        "sweep-ratio": ["sweep-ratio", "--config", str(ratio_cfg), "--seed", "7"],
    }
    for name, argv in commands.items():
        outputs = []
        for attempt in range(2):
            target = tmp_path / f"{name}-{attempt}.out"
            assert main(argv + ["--out", str(target)]) == 0
            outputs.append(target.read_bytes())
        assert outputs[0] == outputs[1] and outputs[0]
    capsys.readouterr()
    report(", ".join(commands))


@criterion("C9 channel model monotone; PER(1e-5, 24576 bits) = 0.21783 +- 1e-4")
def test_c9_channel(report):
    grid = np.linspace(0.0, 30.0, 100)
    values = [effective_per(AwgnQam16(snr_db=float(s), packet_bits=24576)) for s in grid]
    assert all(x >= y for x, y in zip(values, values[1:]))
    mpmath.mp.dps = 60
    exact = float(1 - (1 - mpmath.mpf("1e-5")) ** 24576)
    got = per_from_ber(1e-5, 24576)
    assert abs(got - exact) <= 1e-12
    assert abs(got - 0.21783) <= 1e-4
    report(f"PER={got:.6f}, high-precision {exact:.6f}")
