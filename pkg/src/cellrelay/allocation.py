"""Burst sharing between two mobiles behind one relay.

A relay sends bursts of ``k`` packets. Each mobile ``i`` reports a link PER
estimate ``per_i`` and asks for a target PER ``t_i``. The adaptive rule gives
mobile 1 ``k * per2 / (a * per1 + per2)`` packets, where ``a = t2 / t1``, and
mobile 2 the rest; it is the continuous solution of

    maximise  N1 + N2
    s.t.      N1 * per1 < t1,  N2 * per2 < t2,  N1 + N2 <= k

once only the ratio of the two PER budgets and the burst length are kept.
:func:`brute_force_optimum` solves the integer problem exactly by enumeration
and serves as the reference the closed form is measured against.

Mobile positions are 1 and 2 throughout: ``counts[0]`` is N1 and belongs to
the first profile of a scenario.
"""

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Tuple

from ._validation import check_positive_int, check_positive_real, check_probability
from .exceptions import ConfigError, DegenerateDenominator

__all__ = [
    "DEFAULT_PER_FLOOR",
    "TARGET_PER_RANGE",
    "TrafficClass",
    "MobileProfile",
    "LinkEstimate",
    "BurstPlan",
    "ConstraintReport",
    "OracleResult",
    "target_ratio",
    "validate_profiles",
    "priority_winner",
    "closed_form_split",
    "integerize",
    "uniform_split",
    "floored_split",
    "adaptive_split",
    "brute_force_optimum",
    "expected_errors",
    "constraint_report",
    "satisfying_packets",
    "build_plan",
]

DEFAULT_PER_FLOOR = 1e-6
TARGET_PER_RANGE = (1e-4, 1e-3)

# |frac - 0.5| below this counts as a half tie; absorbs closed-form rounding noise.
_TIE_TOL = 1e-9


class TrafficClass(enum.Enum):
    REAL_TIME = "real_time"
    NON_REAL_TIME = "non_real_time"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {"realtime": "real_time", "rt": "real_time",
                   "nonrealtime": "non_real_time", "nrt": "non_real_time"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ConfigError(f"unknown traffic class {value!r}") from None


@dataclass(frozen=True)
class MobileProfile:
    """A destination mobile: identity, traffic class, PER target, priority.

    ``priority`` is a rank; the lower value is transmitted first in a burst.
    """

    id: int
    traffic_class: TrafficClass
    target_per: float
    priority: int

    def __post_init__(self):
        object.__setattr__(self, "traffic_class", TrafficClass.parse(self.traffic_class))
        check_positive_int(self.id, "id", minimum=0, error=ConfigError)
        check_positive_int(self.priority, "priority", minimum=0, error=ConfigError)
        target = check_probability(self.target_per, "target_per", error=ConfigError)
        if target <= 0.0:
            raise ConfigError("target_per must be > 0")
        object.__setattr__(self, "target_per", target)


@dataclass(frozen=True)
class LinkEstimate:
    """The relay's current view of one relay-to-mobile link PER."""

    per: float

    def __post_init__(self):
        object.__setattr__(self, "per", check_probability(self.per, "per"))

    def floored(self, per_floor=DEFAULT_PER_FLOOR):
        return max(self.per, per_floor)


@dataclass(frozen=True)
class BurstPlan:
    k: int
    counts: Tuple[int, int]
    order: Tuple[int, ...] = field(repr=False)

    def __post_init__(self):
        if sum(self.counts) != self.k or min(self.counts) < 0:
            raise ValueError(f"counts {self.counts} do not split a burst of {self.k}")
        if len(self.order) != self.k:
            raise ValueError("order must list exactly k packets")


class ConstraintReport(NamedTuple):
    margins: Tuple[float, float]
    satisfied: Tuple[bool, bool]


class OracleResult(NamedTuple):
    n1: int
    n2: int
    objective: int
    feasible: bool


def target_ratio(profile1, profile2):
    """Return ``a = t2 / t1`` recomputed from the two profiles."""
    return profile2.target_per / profile1.target_per


def validate_profiles(profiles: Sequence[MobileProfile], target_bounds=None):
    """Check the scenario-level invariants of a pair of profiles.

    Raises :class:`ConfigError` when ids or priorities collide, when a
    real-time target does not exceed every non-real-time target, or when a
    target leaves ``target_bounds`` (inclusive) if bounds are given.
    """
    if len(profiles) != 2:
        raise ConfigError(f"exactly two mobiles are supported, got {len(profiles)}")
    if len({p.id for p in profiles}) != len(profiles):
        raise ConfigError("mobile ids must be distinct")
    if len({p.priority for p in profiles}) != len(profiles):
        raise ConfigError("mobile priorities must be distinct")
    rt = [p.target_per for p in profiles if p.traffic_class is TrafficClass.REAL_TIME]
    nrt = [p.target_per for p in profiles if p.traffic_class is TrafficClass.NON_REAL_TIME]
    if rt and nrt and min(rt) <= max(nrt):
        raise ConfigError("a real-time target PER must exceed every non-real-time target PER")
    if target_bounds is not None:
        lo, hi = target_bounds
        for p in profiles:
            if not lo <= p.target_per <= hi:
                raise ConfigError(
                    f"mobile {p.id}: target_per {p.target_per} outside [{lo}, {hi}]")


def priority_winner(profiles):
    """Position (1 or 2) of the profile transmitted first."""
    return 1 if profiles[0].priority < profiles[1].priority else 2


def closed_form_split(per1, per2, a, k):
    """Continuous adaptive split ``(n1_real, n2_real)`` of a ``k``-packet burst.

    The caller applies the PER floor. Raises :class:`DegenerateDenominator`
    when ``a * per1 + per2 == 0``; the caller is expected to fall back to
    :func:`uniform_split`.

    >>> closed_form_split(0.001, 0.0005, 2.0, 10)
    (2.0, 8.0)
    """
    per1 = check_positive_real(per1, "per1", allow_zero=True)
    per2 = check_positive_real(per2, "per2", allow_zero=True)
    a = check_positive_real(a, "a")
    k = check_positive_int(k, "k")
    weighted = a * per1
    denom = weighted + per2
    if denom == 0.0:
        raise DegenerateDenominator("a*per1 + per2 == 0; use the uniform split")
    return k * per2 / denom, k * weighted / denom


def integerize(n1_real, k, priority_winner=1):
    """Round the mobile-1 share to an integer split that keeps the total at ``k``.

    Rounds to nearest; an exact half goes to the priority winner, i.e. up for
    N1 when mobile 1 wins and down when mobile 2 wins.
    """
    k = check_positive_int(k, "k")
    x = min(max(float(n1_real), 0.0), float(k))
    low = math.floor(x)
    frac = x - low
    if abs(frac - 0.5) <= _TIE_TOL:
        n1 = low + 1 if priority_winner == 1 else low
    else:
        n1 = low + 1 if frac > 0.5 else low
    n1 = min(max(int(n1), 0), k)
    return n1, k - n1


def uniform_split(k, priority_winner=1):
    """Non-adaptive baseline: half the burst each, odd packet to the winner."""
    k = check_positive_int(k, "k")
    big, small = (k + 1) // 2, k // 2
    return (big, small) if priority_winner == 1 else (small, big)


def floored_split(per1, per2, a, k, per_floor=DEFAULT_PER_FLOOR):
    """Closed-form split on floored PERs.

    Two perfect links (both raw PERs zero) make the allocation irrelevant and
    raise :class:`DegenerateDenominator` even though the floor would hide the
    0/0, so every caller sees the same uniform fallback.
    """
    if per1 == 0 and per2 == 0:
        raise DegenerateDenominator("both link PERs are zero; use the uniform split")
    return closed_form_split(max(per1, per_floor), max(per2, per_floor), a, k)


def adaptive_split(per1, per2, a, k, *, priority_winner=1, per_floor=DEFAULT_PER_FLOOR):
    """Floor the PERs, split in closed form, integerize; uniform on 0/0."""
    try:
        n1_real, _ = floored_split(per1, per2, a, k, per_floor)
    except DegenerateDenominator:
        return uniform_split(k, priority_winner)
    return integerize(n1_real, k, priority_winner)


def brute_force_optimum(per1, per2, t1, t2, k):
    """Exact integer optimum of the burst-sharing problem by enumeration.

    Maximises ``N1 + N2`` subject to ``N1*per1 < t1``, ``N2*per2 < t2`` and
    ``N1 + N2 <= k``. Ties go to the pair with the larger smallest margin,
    then to the larger N1. ``feasible`` is always true since (0, 0) satisfies
    the strict constraints for positive targets.
    """
    k = check_positive_int(k, "k")
    best = None
    best_key = None
    for n1 in range(k + 1):
        m1 = t1 - n1 * per1
        if not m1 > 0:
            break
        for n2 in range(k - n1 + 1):
            m2 = t2 - n2 * per2
            if not m2 > 0:
                break
            key = (n1 + n2, min(m1, m2), n1)
            if best_key is None or key > best_key:
                best_key, best = key, (n1, n2)
    if best is None:
        return OracleResult(0, 0, 0, False)
    return OracleResult(best[0], best[1], best[0] + best[1], True)


def expected_errors(counts, per1, per2):
    """Expected errored packets in one burst, ``N1*per1 + N2*per2``."""
    n1, n2 = counts
    return n1 * per1 + n2 * per2


def constraint_report(counts, per1, per2, t1, t2):
    """Margins ``t_i - N_i*per_i`` and whether each strict constraint holds."""
    n1, n2 = counts
    m1 = t1 - n1 * per1
    m2 = t2 - n2 * per2
    return ConstraintReport((m1, m2), (m1 > 0, m2 > 0))


def satisfying_packets(counts, per1, per2, t1, t2):
    """Packets of a plan that belong to a mobile whose constraint holds."""
    _, (ok1, ok2) = constraint_report(counts, per1, per2, t1, t2)
    return counts[0] * ok1 + counts[1] * ok2


def build_plan(counts, winner=1, ids=(1, 2)):
    """Lay out a burst: the winner's packets first, as one contiguous block."""
    n1, n2 = counts
    first, second = ((ids[0], n1), (ids[1], n2)) if winner == 1 else ((ids[1], n2), (ids[0], n1))
    order = (first[0],) * first[1] + (second[0],) * second[1]
    return BurstPlan(k=n1 + n2, counts=(n1, n2), order=order)
