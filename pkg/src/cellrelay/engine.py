"""Burst-level simulation of one relay serving two cell-border mobiles.

Each cycle the relay reads its PER view of the two relay-to-mobile links,
splits a burst of ``k`` packets with the configured allocator, sends the
packets of the higher-priority mobile first, then collects one acknowledgment
per mobile carrying a windowed PER estimate. Sources are saturated and the
source-to-relay hop is assumed perfect, so only relay-to-mobile air time is
simulated.

Time is kept as an integer tick count (see ``coop_route.TICKS_PER_SECOND``)
so the clock equals the sum of packet air times exactly. Randomness comes from
one seeded stream, consumed one draw per transmitted packet in transmission
order.
"""

import collections
import json
from dataclasses import asdict, dataclass, field, replace
from typing import List, NamedTuple, Optional, Tuple

from ._validation import (check_choice, check_positive_int, check_positive_real,
                          check_probability)
from .allocation import (DEFAULT_PER_FLOOR, MobileProfile, TrafficClass, floored_split,
                         constraint_report, integerize, priority_winner, target_ratio,
                         uniform_split, validate_profiles)
from .channel import (FixedPer, effective_per, link_model_from_dict, link_model_to_dict,
                      UniformStream)
from .coop_route import TICKS_PER_SECOND, check_rate, tx_ticks
from .exceptions import ConfigError, DegenerateDenominator

__all__ = [
    "ALLOCATORS",
    "RETRANSMISSION_MODES",
    "PER_FEEDBACK_MODES",
    "SimConfig",
    "PerEstimator",
    "AckReport",
    "BurstRecord",
    "MobileStats",
    "SimResult",
    "RelaySimulation",
    "estimator_update",
    "run",
    "make_profiles",
    "fixed_per_config",
]

ALLOCATORS = ("adaptive", "uniform")
RETRANSMISSION_MODES = ("retransmit", "drop")
# "ack": the relay allocates on the estimates carried by acknowledgments.
# "ideal": the relay allocates on the true link PER (fully converged estimates).
PER_FEEDBACK_MODES = ("ack", "ideal")

INITIAL_PER_ESTIMATE = 5.5e-4


@dataclass(frozen=True)
class SimConfig:
    profiles: Tuple[MobileProfile, MobileProfile]
    link_models: Tuple[object, object]
    duration_bursts: int
    burst_len_k: int = 10
    rd_rate: Tuple[float, float] = (11.0, 11.0)
    packet_bits: int = 24576
    allocator: str = "adaptive"
    retransmission: str = "retransmit"
    estimator_window_bursts: int = 50
    per_floor: float = DEFAULT_PER_FLOOR
    initial_per_estimate: float = INITIAL_PER_ESTIMATE
    seed: int = 1
    per_feedback: str = "ack"
    carry_remainder: bool = True
    target_per_bounds: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        set_ = lambda name, value: object.__setattr__(self, name, value)  # noqa: E731
        set_("profiles", tuple(self.profiles))
        set_("link_models", tuple(self.link_models))
        rd = self.rd_rate
        if not isinstance(rd, (tuple, list)):
            rd = (rd, rd)
        set_("rd_rate", tuple(check_rate(r, "rd_rate") for r in rd))
        set_("allocator", check_choice(self.allocator, "allocator", ALLOCATORS))
        set_("retransmission",
             check_choice(self.retransmission, "retransmission", RETRANSMISSION_MODES))
        set_("per_feedback", check_choice(self.per_feedback, "per_feedback", PER_FEEDBACK_MODES))
        if self.target_per_bounds is not None:
            set_("target_per_bounds", tuple(float(b) for b in self.target_per_bounds))
        self.validate()

    def validate(self):
        """Raise :class:`ConfigError` on any invariant violation."""
        validate_profiles(self.profiles, self.target_per_bounds)
        if len(self.link_models) != 2 or len(self.rd_rate) != 2:
            raise ConfigError("link_models and rd_rate need one entry per mobile")
        for model in self.link_models:
            if not hasattr(model, "__dataclass_fields__"):
                raise ConfigError(f"not a link model: {model!r}")
        check_positive_int(self.burst_len_k, "burst_len_k", minimum=2, error=ConfigError)
        check_positive_int(self.duration_bursts, "duration_bursts", error=ConfigError)
        check_positive_int(self.packet_bits, "packet_bits", error=ConfigError)
        check_positive_int(self.estimator_window_bursts, "estimator_window_bursts",
                           error=ConfigError)
        check_positive_int(self.seed, "seed", minimum=0, error=ConfigError)
        if self.seed >= 2 ** 64:
            raise ConfigError("seed must fit in 64 bits")
        check_positive_real(self.per_floor, "per_floor", allow_zero=True, error=ConfigError)
        check_probability(self.per_floor, "per_floor", error=ConfigError)
        check_probability(self.initial_per_estimate, "initial_per_estimate", error=ConfigError)
        return self

    @property
    def ratio_a(self):
        return target_ratio(*self.profiles)

    def to_dict(self):
        data = {
            "burst_len_k": self.burst_len_k,
            "profiles": [
                {"id": p.id, "class": p.traffic_class.value, "target_per": p.target_per,
                 "priority": p.priority}
                for p in self.profiles
            ],
            "link_models": [link_model_to_dict(m) for m in self.link_models],
        }
        for name in ("rd_rate", "packet_bits", "allocator", "retransmission",
                     "estimator_window_bursts", "per_floor", "initial_per_estimate",
                     "duration_bursts", "seed", "per_feedback", "carry_remainder",
                     "target_per_bounds"):
            value = getattr(self, name)
            data[name] = list(value) if isinstance(value, tuple) else value
        return data

    @classmethod
    def from_dict(cls, data):
        """Build a config from its JSON form; unknown keys are rejected."""
        data = dict(data)
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        try:
            profiles = [
                MobileProfile(
                    id=p["id"],
                    traffic_class=p.get("class", p.get("traffic_class")),
                    target_per=p["target_per"],
                    priority=p["priority"],
                )
                for p in data.pop("profiles")
            ]
            links = [link_model_from_dict(m) for m in data.pop("link_models")]
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed profiles or link_models: {exc}") from None
        if "duration_bursts" not in data:
            raise ConfigError("duration_bursts is required")
        try:
            return cls(profiles=profiles, link_models=links, **data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


class PerEstimator:
    """Windowed PER estimate over the last ``window_bursts`` acknowledgments.

    The estimate is errored/sent over the window, floored at ``per_floor``.
    Before anything has been sent it is ``initial_estimate``; a window that
    holds no transmissions keeps the previous estimate.
    """

    def __init__(self, window_bursts=50, per_floor=DEFAULT_PER_FLOOR,
                 initial_estimate=INITIAL_PER_ESTIMATE):
        self.window_bursts = window_bursts
        self.per_floor = per_floor
        self.window = collections.deque()
        self.errored = 0
        self.sent = 0
        self.estimate = initial_estimate

    def update(self, errored, sent):
        if not 0 <= errored <= sent:
            raise ValueError(f"inconsistent report: errored={errored}, sent={sent}")
        self.window.append((errored, sent))
        self.errored += errored
        self.sent += sent
        if len(self.window) > self.window_bursts:
            old_err, old_sent = self.window.popleft()
            self.errored -= old_err
            self.sent -= old_sent
        if self.sent:
            self.estimate = max(self.errored / self.sent, self.per_floor)
        return self.estimate


class AckReport(NamedTuple):
    mobile_id: int
    burst_index: int
    errored_count: int
    sent_count: int
    per_estimate: float


def estimator_update(est, report):
    """Fold one acknowledgment into ``est`` and return it."""
    est.update(report.errored_count, report.sent_count)
    return est


class BurstRecord(NamedTuple):
    index: int
    n1: int
    n2: int
    per1_used: float
    per2_used: float
    margin1: float
    margin2: float

    @property
    def violated(self):
        return not (self.margin1 > 0 and self.margin2 > 0)


@dataclass
class MobileStats:
    mobile_id: int
    sent_packets: int = 0
    errored_packets: int = 0
    delivered_packets: int = 0
    fresh_packets: int = 0
    retransmissions: int = 0
    pending_retransmissions: int = 0
    delay_ticks: int = 0
    goodput_bits_per_s: float = 0.0
    measured_per: float = 0.0
    mean_delay_s: float = 0.0


@dataclass
class SimResult:
    mobiles: Tuple[MobileStats, MobileStats]
    sim_ticks: int
    sim_time_s: float
    burst_trace: List[BurstRecord] = field(repr=False)

    def violation_rate(self):
        if not self.burst_trace:
            return 0.0
        return sum(r.violated for r in self.burst_trace) / len(self.burst_trace)

    def mean_counts(self):
        n = len(self.burst_trace)
        return (sum(r.n1 for r in self.burst_trace) / n, sum(r.n2 for r in self.burst_trace) / n)

    def to_dict(self):
        return {
            "mobiles": [asdict(m) for m in self.mobiles],
            "sim_ticks": self.sim_ticks,
            "sim_time_s": self.sim_time_s,
            "burst_trace": [list(r) for r in self.burst_trace],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


class RelaySimulation:
    """Mutable simulation state; :meth:`run_burst_cycle` advances one burst.

    ``stream`` replaces the seeded draw source; it needs a ``take(n)`` method
    returning ``n`` uniforms in [0, 1).
    """

    def __init__(self, config, stream=None):
        self.config = config.validate()
        cfg = self.config
        self._stream = UniformStream(cfg.seed) if stream is None else stream
        self.link_per = tuple(effective_per(m) for m in cfg.link_models)
        self._tx = tuple(tx_ticks(cfg.packet_bits, r) for r in cfg.rd_rate)
        self.winner = priority_winner(cfg.profiles)
        self.a = target_ratio(*cfg.profiles)
        self._targets = tuple(p.target_per for p in cfg.profiles)
        self.estimators = [
            PerEstimator(cfg.estimator_window_bursts, cfg.per_floor, cfg.initial_per_estimate)
            for _ in range(2)
        ]
        if cfg.per_feedback == "ideal":
            self.relay_view = list(self.link_per)
        else:
            self.relay_view = [cfg.initial_per_estimate] * 2
        self.queues = [collections.deque(), collections.deque()]
        self.stats = [MobileStats(p.id) for p in cfg.profiles]
        self.clock = 0
        self.burst_index = 0
        self.carry = 0.0
        self.trace = []
        self.last_acks = ()

    def _allocate(self):
        cfg = self.config
        k = cfg.burst_len_k
        if cfg.allocator == "uniform":
            return uniform_split(k, self.winner)
        try:
            n1_real, _ = floored_split(*self.relay_view, self.a, k, cfg.per_floor)
        except DegenerateDenominator:
            return uniform_split(k, self.winner)
        if not cfg.carry_remainder:
            return integerize(n1_real, k, self.winner)
        wanted = n1_real + self.carry
        counts = integerize(wanted, k, self.winner)
        self.carry = wanted - counts[0]
        return counts

    def _send_block(self, i, n):
        """Transmit ``n`` packets to mobile ``i``; return how many errored."""
        st = self.stats[i]
        per = self.link_per[i]
        tx = self._tx[i]
        queue = self.queues[i]
        draws = self._stream.take(n)
        st.sent_packets += n
        if not queue and min(draws) >= per:
            self.clock += n * tx
            st.fresh_packets += n
            st.delivered_packets += n
            st.delay_ticks += n * tx
            return 0
        retransmit = self.config.retransmission == "retransmit"
        failed = []
        errors = 0
        for u in draws:
            if queue:
                first = queue.popleft()
                st.retransmissions += 1
            else:
                first = self.clock
                st.fresh_packets += 1
            self.clock += tx
            if u < per:
                errors += 1
                if retransmit:
                    failed.append(first)
            else:
                st.delivered_packets += 1
                st.delay_ticks += self.clock - first
        if failed:
            queue.extendleft(reversed(failed))
        st.errored_packets += errors
        return errors

    def run_burst_cycle(self):
        cfg = self.config
        floor = cfg.per_floor
        p1 = max(self.relay_view[0], floor)
        p2 = max(self.relay_view[1], floor)
        counts = self._allocate()

        first = self.winner - 1
        errors = [0, 0]
        for i in (first, 1 - first):
            if counts[i]:
                errors[i] = self._send_block(i, counts[i])

        acks = []
        for i in (0, 1):
            est = self.estimators[i].update(errors[i], counts[i])
            acks.append(AckReport(cfg.profiles[i].id, self.burst_index, errors[i], counts[i], est))
            if cfg.per_feedback == "ack":
                self.relay_view[i] = est
        self.last_acks = tuple(acks)

        (m1, m2), _ = constraint_report(counts, p1, p2, *self._targets)
        record = BurstRecord(self.burst_index, counts[0], counts[1], p1, p2, m1, m2)
        self.trace.append(record)
        self.burst_index += 1
        return record

    def result(self):
        bits = self.config.packet_bits
        sim_time = self.clock / TICKS_PER_SECOND
        mobiles = []
        for st, queue in zip(self.stats, self.queues):
            st = replace(st)
            st.pending_retransmissions = len(queue)
            st.measured_per = st.errored_packets / st.sent_packets if st.sent_packets else 0.0
            st.goodput_bits_per_s = st.delivered_packets * bits / sim_time if sim_time else 0.0
            st.mean_delay_s = (st.delay_ticks / st.delivered_packets / TICKS_PER_SECOND
                               if st.delivered_packets else 0.0)
            mobiles.append(st)
        return SimResult(tuple(mobiles), self.clock, sim_time, list(self.trace))


def run(config):
    """Run ``config.duration_bursts`` burst cycles and return the result."""
    sim = RelaySimulation(config)
    for _ in range(config.duration_bursts):
        sim.run_burst_cycle()
    return sim.result()


def make_profiles(target1, target2):
    """Profiles for mobiles 1 and 2; the higher target is real-time and goes first.

    Equal targets mean the same traffic type: both non-real-time, mobile 1 first.
    """
    if target1 == target2:
        classes, prio = (TrafficClass.NON_REAL_TIME,) * 2, (0, 1)
    elif target1 > target2:
        classes, prio = (TrafficClass.REAL_TIME, TrafficClass.NON_REAL_TIME), (0, 1)
    else:
        classes, prio = (TrafficClass.NON_REAL_TIME, TrafficClass.REAL_TIME), (1, 0)
    return (
        MobileProfile(1, classes[0], target1, prio[0]),
        MobileProfile(2, classes[1], target2, prio[1]),
    )


def fixed_per_config(per1, per2, target1, target2, **kwargs):
    """Shortcut for a two-mobile config on FixedPer links."""
    return SimConfig(profiles=make_profiles(target1, target2),
                     link_models=(FixedPer(per1), FixedPer(per2)), **kwargs)
