"""dB <-> linear conversions; every conversion in the package goes through here."""

import math


def db_to_linear(db: float) -> float:
    if not math.isfinite(db):
        raise ValueError(f"dB value must be finite, got {db!r}")
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    if not x > 0:
        raise ValueError(f"linear value must be positive, got {x!r}")
    return 10.0 * math.log10(x)
