"""Relay-to-mobile link models.

A link either has a directly configured PER or derives one from SNR with a
16-QAM / AWGN bit-error model. Rate-1/2 convolutional coding is not simulated;
it enters as an SNR offset (``coding_gain_db``).
"""

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from ._validation import check_positive_int, check_probability
from .exceptions import ConfigError

__all__ = [
    "DEFAULT_CODING_GAIN_DB",
    "PacketOutcome",
    "FixedPer",
    "AwgnQam16",
    "LinkModel",
    "qfunc",
    "qam16_symbol_error",
    "per_from_ber",
    "effective_per",
    "draw_outcome",
    "UniformStream",
    "link_model_from_dict",
    "link_model_to_dict",
]

DEFAULT_CODING_GAIN_DB = 4.0
BITS_PER_SYMBOL = 4


class PacketOutcome(enum.Enum):
    DELIVERED = "delivered"
    ERRORED = "errored"


@dataclass(frozen=True)
class FixedPer:
    per: float

    def __post_init__(self):
        object.__setattr__(self, "per", check_probability(self.per, "per", error=ConfigError))


@dataclass(frozen=True)
class AwgnQam16:
    snr_db: float
    packet_bits: int = 24576
    coding_gain_db: float = DEFAULT_CODING_GAIN_DB

    def __post_init__(self):
        check_positive_int(self.packet_bits, "packet_bits", error=ConfigError)
        if not self.coding_gain_db >= 0:
            raise ConfigError(f"coding_gain_db must be >= 0, got {self.coding_gain_db!r}")
        if math.isnan(self.snr_db):
            raise ConfigError("snr_db must not be NaN")


LinkModel = Union[FixedPer, AwgnQam16]


def qfunc(x):
    """Gaussian tail probability Q(x)."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def qam16_symbol_error(snr_linear):
    """Square 16-QAM symbol error probability at per-symbol SNR ``snr_linear``."""
    if snr_linear < 0:
        raise ValueError(f"snr_linear must be >= 0, got {snr_linear!r}")
    q = qfunc(math.sqrt(snr_linear / 5.0))
    ser = 3.0 * q * (1.0 - 0.75 * q)
    return min(max(ser, 0.0), 1.0)


def per_from_ber(ber, bits):
    """Probability that at least one of ``bits`` independent bits is wrong."""
    ber = check_probability(ber, "ber")
    bits = check_positive_int(bits, "bits")
    if ber == 1.0:
        return 1.0
    return min(max(-math.expm1(bits * math.log1p(-ber)), 0.0), 1.0)


def effective_per(model):
    if isinstance(model, FixedPer):
        return model.per
    if isinstance(model, AwgnQam16):
        snr_linear = 10.0 ** ((model.snr_db + model.coding_gain_db) / 10.0)
        ber = qam16_symbol_error(snr_linear) / BITS_PER_SYMBOL
        return per_from_ber(ber, model.packet_bits)
    raise TypeError(f"not a link model: {model!r}")


def draw_outcome(per, rng):
    """Bernoulli packet outcome; consumes exactly one ``rng.random()`` draw."""
    return PacketOutcome.ERRORED if rng.random() < per else PacketOutcome.DELIVERED


class UniformStream:
    """Buffered U[0, 1) draws from a seeded numpy generator.

    Refilling in fixed-size blocks does not change the sequence: PCG64 emits
    one 64-bit word per double regardless of how the request is chunked.
    """

    def __init__(self, seed, block=1 << 16):
        self._rng = np.random.Generator(np.random.PCG64(seed))
        self._block = block
        self._buf = []
        self._pos = 0

    def _refill(self):
        self._buf = self._rng.random(self._block).tolist()
        self._pos = 0

    def random(self):
        if self._pos >= len(self._buf):
            self._refill()
        u = self._buf[self._pos]
        self._pos += 1
        return u

    def take(self, n):
        """Next ``n`` draws as a list, in stream order."""
        out = []
        while n > 0:
            if self._pos >= len(self._buf):
                self._refill()
            stop = min(self._pos + n, len(self._buf))
            out.extend(self._buf[self._pos:stop])
            n -= stop - self._pos
            self._pos = stop
        return out


def link_model_from_dict(data):
    """Build a link model from its JSON form (``{"type": "fixed_per", ...}``)."""
    if isinstance(data, (int, float)):
        return FixedPer(float(data))
    kind = str(data.get("type", "fixed_per")).lower().replace("-", "_")
    params = {k: v for k, v in data.items() if k != "type"}
    try:
        if kind in ("fixed_per", "fixedper"):
            return FixedPer(**params)
        if kind in ("awgn_qam16", "awgnqam16"):
            return AwgnQam16(**params)
    except TypeError as exc:
        raise ConfigError(f"bad link model fields for {kind!r}: {exc}") from None
    raise ConfigError(f"unknown link model type {data.get('type')!r}")


def link_model_to_dict(model):
    if isinstance(model, FixedPer):
        return {"type": "fixed_per", "per": model.per}
    return {"type": "awgn_qam16", "snr_db": model.snr_db,
            "packet_bits": model.packet_bits, "coding_gain_db": model.coding_gain_db}
