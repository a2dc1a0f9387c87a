"""Small scalar validation helpers shared by the public modules.

Array inputs go through :func:`sklearn.utils.check_array` in
:mod:`cellrelay.estimators`; these helpers cover the scalar paths, which are
hot inside the simulator and must stay cheap.
"""

import math
import numbers

from .exceptions import ConfigError


def check_probability(value, name, *, error=ValueError):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise error(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise error(f"{name} must lie in [0, 1], got {value!r}")
    return value


def check_positive_int(value, name, *, minimum=1, error=ValueError):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise error(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise error(f"{name} must be >= {minimum}, got {value}")
    return value


def check_positive_real(value, name, *, allow_zero=False, error=ValueError):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise error(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if math.isnan(value) or value < 0.0 or (value == 0.0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise error(f"{name} must be {bound}, got {value!r}")
    return value


def check_choice(value, name, choices, *, error=ConfigError):
    """Case-insensitive enum lookup; returns the canonical lower-case form."""
    key = str(value).strip().lower().replace("-", "_")
    if key not in choices:
        raise error(f"{name} must be one of {sorted(choices)}, got {value!r}")
    return key
