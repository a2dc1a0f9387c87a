"""Parameter sweeps and their CSV output.

Two studies:

* relay sweep: mean best-route throughput against the number of candidate
  relays, by Monte Carlo over random rate tables, next to the exact value
  from enumerating every rate assignment;
* ratio sweep: per-mobile goodput, PER and delay against the target ratio
  ``a``, adaptive allocation paired with the uniform baseline on the same
  random stream.
"""

import csv
import io
import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Optional, Tuple

import numpy as np

from .allocation import expected_errors, floored_split, priority_winner, uniform_split
from .channel import FixedPer, effective_per
from .coop_route import (DEFAULT_RELAY_RATES, DEFAULT_SD_RATES, check_rate, sample_table,
                         select_route)
from .engine import INITIAL_PER_ESTIMATE, SimConfig, make_profiles, run
from .exceptions import ComplexityGuard, ConfigError, DegenerateDenominator

__all__ = [
    "CSV_COLUMNS",
    "MAX_OUTCOMES",
    "PUBLISHED_RELAY_GAINS",
    "MetricsRow",
    "RelaySweepSpec",
    "RatioSweepSpec",
    "default_a_values",
    "expected_throughput_oracle",
    "run_relay_sweep",
    "run_ratio_sweep",
    "run_row",
    "relay_gains",
    "relay_sweep_report",
    "write_csv",
    "format_csv",
]

CSV_COLUMNS = (
    "sweep", "coordinate", "scheme", "n1", "n2", "goodput1_bps", "goodput2_bps",
    "per1_measured", "per2_measured", "delay1_s", "delay2_s", "expected_errors",
    "violations", "oracle_value",
)
MAX_OUTCOMES = 10 ** 7
# Throughput gains quoted for the first two relays (0 -> 1, 1 -> 2); printed, not asserted.
PUBLISHED_RELAY_GAINS = (0.22, 0.09)


@dataclass
class MetricsRow:
    sweep: str
    coordinate: float
    scheme: str
    n1: Optional[float] = None
    n2: Optional[float] = None
    goodput1_bps: Optional[float] = None
    goodput2_bps: Optional[float] = None
    per1_measured: Optional[float] = None
    per2_measured: Optional[float] = None
    delay1_s: Optional[float] = None
    delay2_s: Optional[float] = None
    expected_errors: Optional[float] = None
    violations: Optional[float] = None
    oracle_value: Optional[float] = None
    # Not written to CSV.
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def csv_values(self):
        return [getattr(self, name) for name in CSV_COLUMNS]


def default_a_values(n=21, low=0.25, high=4.0):
    """``n`` log-spaced ratios from ``low`` to ``high`` (1 sits in the middle by default)."""
    if n == 1:
        return (math.sqrt(low * high),)
    return tuple(low * (high / low) ** (i / (n - 1)) for i in range(n))


# --------------------------------------------------------------------------
# relay sweep


@dataclass(frozen=True)
class RelaySweepSpec:
    relay_counts: Tuple[int, ...] = tuple(range(9))
    samples_per_point: int = 100_000
    packet_bits: int = 24576
    sd_rates: Tuple[float, ...] = DEFAULT_SD_RATES
    sr_rates: Tuple[float, ...] = DEFAULT_RELAY_RATES
    rd_rates: Tuple[float, ...] = DEFAULT_RELAY_RATES
    seed: int = 1
    max_outcomes: int = MAX_OUTCOMES

    def __post_init__(self):
        counts = tuple(int(n) for n in self.relay_counts)
        if not counts or any(n < 0 for n in counts):
            raise ConfigError("relay_counts must be a non-empty list of non-negative integers")
        if list(counts) != sorted(set(counts)):
            raise ConfigError("relay_counts must be sorted ascending and distinct")
        object.__setattr__(self, "relay_counts", counts)
        for name in ("sd_rates", "sr_rates", "rd_rates"):
            object.__setattr__(self, name, tuple(check_rate(r, name) for r in getattr(self, name)))
        if self.samples_per_point < 1 or self.packet_bits < 1:
            raise ConfigError("samples_per_point and packet_bits must be >= 1")

    @classmethod
    def from_dict(cls, data):
        return _spec_from_dict(cls, data)


def expected_throughput_oracle(n_relays, packet_bits, sd_rates=DEFAULT_SD_RATES,
                               sr_rates=DEFAULT_RELAY_RATES, rd_rates=DEFAULT_RELAY_RATES,
                               max_outcomes=MAX_OUTCOMES):
    """Exact mean best-route throughput (bits/s) by full enumeration.

    Every joint assignment of the direct rate and each relay's two hop rates
    is visited once; all are equally likely because every rate is drawn
    uniformly and independently.
    """
    pairs = [(s, d) for s in sr_rates for d in rd_rates]
    outcomes = len(sd_rates) * len(pairs) ** n_relays
    if outcomes > max_outcomes:
        raise ComplexityGuard(f"{outcomes} outcomes exceed the limit of {max_outcomes}")
    if not outcomes:
        raise ComplexityGuard("empty rate distribution")
    hop_times = [packet_bits / (s * 1e6) + packet_bits / (d * 1e6) for s, d in pairs]
    # The best relay time only depends on the multiset of relay choices, but the
    # enumeration stays literal: one term per joint outcome.
    relay_best = [min(c) if c else math.inf
                  for c in itertools.product(hop_times, repeat=n_relays)]
    terms = []
    for rate in sd_rates:
        direct = packet_bits / (rate * 1e6)
        terms.extend(packet_bits / min(direct, r) for r in relay_best)
    return math.fsum(terms) / len(terms)


def run_relay_sweep(spec):
    """Monte Carlo mean best-route throughput per relay count, with oracle.

    Each sample draws one table with ``max(relay_counts)`` relays; the point
    for ``n`` relays uses its first ``n`` relays. The points therefore share
    samples (common random numbers), which makes the Monte Carlo column
    non-decreasing in ``n`` sample by sample.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    top = spec.relay_counts[-1]
    bits = spec.packet_bits
    sums = {n: [] for n in spec.relay_counts}
    for _ in range(spec.samples_per_point):
        table = sample_table(top, rng, spec.sd_rates, spec.sr_rates, spec.rd_rates)
        for n in spec.relay_counts:
            sums[n].append(bits / select_route(table.prefix(n), bits).total_time_s)
    rows = []
    for n in spec.relay_counts:
        try:
            oracle = expected_throughput_oracle(n, bits, spec.sd_rates, spec.sr_rates,
                                                spec.rd_rates, spec.max_outcomes)
        except ComplexityGuard:
            oracle = None
        rows.append(MetricsRow(
            sweep="relays", coordinate=n, scheme="CoopMAC",
            goodput1_bps=math.fsum(sums[n]) / spec.samples_per_point,
            oracle_value=oracle,
        ))
    return rows


def relay_gains(values):
    """Relative gain between consecutive entries of ``values``."""
    return [(b - a) / a for a, b in zip(values, values[1:])]


def relay_sweep_report(rows):
    """Human-readable summary of a relay sweep, with the published gains."""
    lines = ["n_relays  monte_carlo_mbps  oracle_mbps  gain_vs_previous"]
    mc = [r.goodput1_bps for r in rows]
    gains = [None] + relay_gains(mc)
    for row, gain in zip(rows, gains):
        oracle = "-" if row.oracle_value is None else f"{row.oracle_value / 1e6:.4f}"
        g = "-" if gain is None else f"{100 * gain:+.1f}%"
        lines.append(f"{int(row.coordinate):8d}  {row.goodput1_bps / 1e6:16.4f}  {oracle:>11}  {g:>16}")
    published = ", ".join(f"{100 * g:+.0f}%" for g in PUBLISHED_RELAY_GAINS)
    lines.append(f"published gains for the first two relays: {published}")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# ratio sweep


@dataclass(frozen=True)
class RatioSweepSpec:
    a_values: Tuple[float, ...] = default_a_values()
    k: int = 10
    link_models: Tuple[object, object] = (FixedPer(INITIAL_PER_ESTIMATE),
                                          FixedPer(INITIAL_PER_ESTIMATE))
    # "geometric": t1 = anchor/sqrt(a), t2 = anchor*sqrt(a);  "mobile1": t1 = anchor, t2 = a*anchor.
    target_per_anchor: float = math.sqrt(1e-4 * 1e-3)
    anchor_mode: str = "geometric"
    duration_bursts: int = 100_000
    seed: int = 1
    retransmission: str = "retransmit"
    per_feedback: str = "ideal"
    carry_remainder: bool = True
    estimator_window_bursts: int = 50
    rd_rate: Tuple[float, float] = (11.0, 11.0)
    packet_bits: int = 24576
    workers: int = 1

    def __post_init__(self):
        a_values = tuple(float(a) for a in self.a_values)
        if not a_values or any(not a > 0 for a in a_values):
            raise ConfigError("a_values must be a non-empty list of positive numbers")
        object.__setattr__(self, "a_values", a_values)
        object.__setattr__(self, "link_models", tuple(self.link_models))
        if self.anchor_mode not in ("geometric", "mobile1"):
            raise ConfigError(f"anchor_mode must be 'geometric' or 'mobile1', got {self.anchor_mode!r}")
        if not 0 < self.target_per_anchor <= 1:
            raise ConfigError("target_per_anchor must lie in (0, 1]")
        # Builds one point eagerly so bad fields fail before any simulation.
        self.config_for(a_values[0], "adaptive")

    def targets(self, a):
        if self.anchor_mode == "geometric":
            root = math.sqrt(a)
            return self.target_per_anchor / root, self.target_per_anchor * root
        return self.target_per_anchor, a * self.target_per_anchor

    def config_for(self, a, scheme):
        t1, t2 = self.targets(a)
        return SimConfig(
            profiles=make_profiles(t1, t2),
            link_models=self.link_models,
            duration_bursts=self.duration_bursts,
            burst_len_k=self.k,
            rd_rate=self.rd_rate,
            packet_bits=self.packet_bits,
            allocator=scheme,
            retransmission=self.retransmission,
            estimator_window_bursts=self.estimator_window_bursts,
            seed=self.seed,
            per_feedback=self.per_feedback,
            carry_remainder=self.carry_remainder,
        )

    @classmethod
    def from_dict(cls, data):
        from .channel import link_model_from_dict

        data = dict(data)
        if "link_models" in data:
            data["link_models"] = tuple(link_model_from_dict(m) for m in data["link_models"])
        return _spec_from_dict(cls, data)


def planned_split(config):
    """Per-burst share the configured scheme aims for at the true link PERs."""
    winner = priority_winner(config.profiles)
    k = config.burst_len_k
    if config.allocator == "uniform":
        return tuple(float(n) for n in uniform_split(k, winner))
    p1, p2 = (effective_per(m) for m in config.link_models)
    try:
        return floored_split(p1, p2, config.ratio_a, k, config.per_floor)
    except DegenerateDenominator:
        return tuple(float(n) for n in uniform_split(k, winner))


def run_row(config, result, sweep="run", coordinate=None):
    """One MetricsRow summarising a finished engine run."""
    m1, m2 = result.mobiles
    counts = planned_split(config)
    link = [effective_per(m) for m in config.link_models]
    realized = result.mean_counts()
    return MetricsRow(
        sweep=sweep,
        coordinate=config.ratio_a if coordinate is None else coordinate,
        scheme=config.allocator.capitalize(),
        n1=counts[0], n2=counts[1],
        goodput1_bps=m1.goodput_bits_per_s, goodput2_bps=m2.goodput_bits_per_s,
        per1_measured=m1.measured_per, per2_measured=m2.measured_per,
        delay1_s=m1.mean_delay_s, delay2_s=m2.mean_delay_s,
        expected_errors=expected_errors(counts, link[0], link[1]),
        violations=result.violation_rate(),
        extra={
            "realized_n1": realized[0], "realized_n2": realized[1],
            "sent": (m1.sent_packets, m2.sent_packets),
            "errored": (m1.errored_packets, m2.errored_packets),
            "delivered": (m1.delivered_packets, m2.delivered_packets),
            "retransmissions": (m1.retransmissions, m2.retransmissions),
        },
    )


def _ratio_point(job):
    spec, a = job
    rows = []
    for scheme in ("adaptive", "uniform"):
        config = spec.config_for(a, scheme)
        rows.append(run_row(config, run(config), sweep="ratio", coordinate=a))
    return rows


def run_ratio_sweep(spec):
    """Adaptive and Uniform rows for every ``a``, both on the same seed."""
    jobs = [(spec, a) for a in spec.a_values]
    if spec.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_ratio_point, jobs))
    else:
        results = [_ratio_point(job) for job in jobs]
    return [row for pair in results for row in pair]


# --------------------------------------------------------------------------
# output


def _spec_from_dict(cls, data):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".9g")


def format_csv(rows):
    """CSV text for ``rows``: fixed header, 9 significant digits, LF endings."""
    rows = list(rows)
    if not rows:
        raise ValueError("refusing to write an empty result set")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(v) for v in row.csv_values()])
    return buf.getvalue()


def write_csv(rows, destination):
    """Write ``rows`` to a path or an open text stream."""
    text = format_csv(rows)
    if hasattr(destination, "write"):
        destination.write(text)
        return
    try:
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write CSV to {os.fspath(destination)!r}: "
                                 f"{exc.strerror}") from exc
