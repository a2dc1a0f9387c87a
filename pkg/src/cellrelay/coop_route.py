"""CoopMAC-style route choice between a direct link and two-hop relay routes.

Air time only: a packet of ``bits`` takes ``bits / rate`` on each hop and a
relay route costs the sum of its two hops. No preamble, ACK or contention
time is modelled.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .exceptions import ConfigError, EmptyDistribution

__all__ = [
    "RATES_MBPS",
    "TICKS_PER_SECOND",
    "DEFAULT_SD_RATES",
    "DEFAULT_RELAY_RATES",
    "RelayEntry",
    "CoopTable",
    "RouteChoice",
    "check_rate",
    "tx_time",
    "tx_ticks",
    "route_time",
    "select_route",
    "sample_table",
]

RATES_MBPS = (1.0, 2.0, 5.5, 11.0)
DEFAULT_SD_RATES = RATES_MBPS
DEFAULT_RELAY_RATES = (5.5, 11.0)

# 1/22 us resolution: every 802.11b rate moves an integer number of ticks per bit.
TICKS_PER_SECOND = 22_000_000
_TICKS_PER_BIT = {1.0: 22, 2.0: 11, 5.5: 4, 11.0: 2}


def check_rate(rate, name="rate"):
    try:
        rate = float(rate)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {rate!r}") from None
    if rate not in _TICKS_PER_BIT:
        raise ConfigError(f"{name} {rate} Mbps is not an 802.11b rate {RATES_MBPS}")
    return rate


@dataclass(frozen=True)
class RelayEntry:
    relay_id: int
    sr_rate: float
    rd_rate: float

    def __post_init__(self):
        object.__setattr__(self, "sr_rate", check_rate(self.sr_rate, "sr_rate"))
        object.__setattr__(self, "rd_rate", check_rate(self.rd_rate, "rd_rate"))


@dataclass(frozen=True)
class CoopTable:
    direct_rate: float
    relays: Tuple[RelayEntry, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "direct_rate", check_rate(self.direct_rate, "direct_rate"))
        object.__setattr__(self, "relays", tuple(self.relays))
        ids = [r.relay_id for r in self.relays]
        if len(set(ids)) != len(ids):
            raise ConfigError("relay ids in a CoopTable must be unique")

    def prefix(self, n):
        """The same table restricted to its first ``n`` relays."""
        return CoopTable(self.direct_rate, self.relays[:n])


@dataclass(frozen=True)
class RouteChoice:
    relay_id: Optional[int]
    total_time_s: float

    @property
    def is_direct(self):
        return self.relay_id is None


def tx_time(bits, rate):
    """Seconds to send ``bits`` at ``rate`` Mbps."""
    if bits < 1:
        raise ValueError(f"bits must be >= 1, got {bits}")
    return bits / (rate * 1e6)


def tx_ticks(bits, rate):
    """Integer air time in units of ``1 / TICKS_PER_SECOND`` seconds."""
    return bits * _TICKS_PER_BIT[check_rate(rate)]


def route_time(entry, bits):
    """Air time of a route: a direct rate (number) or a :class:`RelayEntry`."""
    if isinstance(entry, RelayEntry):
        return tx_time(bits, entry.sr_rate) + tx_time(bits, entry.rd_rate)
    return tx_time(bits, entry)


def select_route(table, bits):
    """Fastest route in ``table``; ties prefer direct, then the lowest relay id."""
    best = RouteChoice(None, route_time(table.direct_rate, bits))
    for relay in sorted(table.relays, key=lambda r: r.relay_id):
        t = route_time(relay, bits)
        if t < best.total_time_s:
            best = RouteChoice(relay.relay_id, t)
    return best


def _rate_set(rates, name):
    rates = tuple(check_rate(r, name) for r in rates)
    if not rates:
        raise EmptyDistribution(f"{name} is empty")
    return rates


def sample_table(n_relays, rng, sd_rates=DEFAULT_SD_RATES, sr_rates=DEFAULT_RELAY_RATES,
                 rd_rates=DEFAULT_RELAY_RATES):
    """Draw a random CoopTable with ``n_relays`` relays.

    Every rate is uniform over its set. Draws happen in one fixed order:
    direct, relay 0 S-R, relay 0 R-D, relay 1 S-R, and so on.
    """
    if n_relays < 0:
        raise ValueError(f"n_relays must be >= 0, got {n_relays}")
    sd = _rate_set(sd_rates, "sd_rates")
    sr = _rate_set(sr_rates, "sr_rates")
    rd = _rate_set(rd_rates, "rd_rates")
    highs = np.array([len(sd)] + [len(sr), len(rd)] * n_relays)
    idx = rng.integers(0, highs).tolist()
    relays = tuple(
        RelayEntry(i, sr[idx[1 + 2 * i]], rd[idx[2 + 2 * i]]) for i in range(n_relays)
    )
    return CoopTable(sd[idx[0]], relays)

