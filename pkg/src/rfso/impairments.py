"""Relay amplifier nonlinearity and destination IQ imbalance.

Amplifier statistics use the Bussgang decomposition ``y = delta * x + d`` of
a memoryless AM/AM (and AM/PM) characteristic driven by a circular complex
Gaussian input of power ``sigma^2``. The input back-off ``IBO =
A_sat^2 / sigma^2`` is the only knob; ``sigma^2`` cancels everywhere except
in the waveform-level helpers.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConsistencyError, DegenerateReceiverError, DomainError
from .specfun import erfc, exp_ei_neg
from .units import db_to_linear, linear_to_db


class HpaKind(str, enum.Enum):
    SEL = "sel"
    TWTA = "twta"
    IDEAL = "ideal"


@dataclass(frozen=True)
class HpaModel:
    kind: HpaKind
    ibo: float = math.inf
    phi0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", HpaKind(self.kind))
        if self.kind is not HpaKind.IDEAL and not self.ibo > 0:
            raise DomainError(f"ibo must be positive for {self.kind.value}, got {self.ibo!r}")

    @classmethod
    def from_db(cls, kind, ibo_db=None, phi0=0.0):
        if HpaKind(kind) is HpaKind.IDEAL:
            return cls(HpaKind.IDEAL)
        return cls(HpaKind(kind), db_to_linear(ibo_db), phi0)

    @property
    def ibo_db(self) -> float:
        return linear_to_db(self.ibo)


class BussgangTriple(NamedTuple):
    delta: float
    dist_var_ratio: float
    clip: float


def hpa_apply(model: HpaModel, sample, input_power: float = 1.0):
    """Pass complex baseband sample(s) through the amplifier."""
    x = np.asarray(sample, dtype=complex)
    if model.kind is HpaKind.IDEAL:
        out = x.copy()
    else:
        a2 = model.ibo * input_power
        mag = np.abs(x)
        if model.kind is HpaKind.SEL:
            a_sat = math.sqrt(a2)
            scale = np.where(mag > a_sat, a_sat / np.where(mag > 0, mag, 1.0), 1.0)
            out = x * scale
        else:
            denom = a2 + mag * mag
            out = x * (a2 / denom) * np.exp(1j * model.phi0 * mag * mag / denom)
    return complex(out) if out.ndim == 0 else out


def _twta_asymptotic(ibo):
    # large-IBO expansions of the TWTA delta and clip factor; the direct
    # forms cancel catastrophically here
    u = 1.0 / ibo
    delta = clip = 0.0
    t_delta = 1.0   # (-1)^k (k+1)! u^k
    t_clip = 1.0    # (-1)^k (k+1)! (k+1) u^k
    for k in range(60):
        delta += t_delta
        clip += t_clip
        nxt = -t_delta * (k + 2) * u
        if abs(nxt) > abs(t_delta) or abs(nxt) < 1e-17:
            break
        t_clip = nxt * (k + 2)
        t_delta = nxt
    return delta, clip


def bussgang_coeffs(model: HpaModel) -> BussgangTriple:
    """Analytic ``(delta, sigma_d^2 / sigma^2, clip)`` for Gaussian input."""
    if model.kind is HpaKind.IDEAL:
        return BussgangTriple(1.0, 0.0, 1.0)
    ibo = model.ibo
    if math.isinf(ibo):
        return BussgangTriple(1.0, 0.0, 1.0)
    if model.kind is HpaKind.SEL:
        clip = -math.expm1(-ibo)
        delta = clip + 0.5 * math.sqrt(math.pi * ibo) * erfc(math.sqrt(ibo))
    elif ibo > 50.0:
        delta, clip = _twta_asymptotic(ibo)
    else:
        # Phi0 assumed ~0 for the statistics
        e = exp_ei_neg(ibo)
        delta = ibo * (1.0 + ibo * e)
        clip = -ibo * ibo * ((1.0 + ibo) * e + 1.0)
    ratio = clip - delta * delta
    if ratio < -1e-12:
        raise ConsistencyError(
            f"negative distortion variance {ratio:.3e} for {model.kind.value} at IBO {ibo:g}")
    return BussgangTriple(delta, max(ratio, 0.0), clip)


def bussgang_empirical(model: HpaModel, n: int, rng: np.random.Generator,
                       input_power: float = 1.0) -> tuple[float, float]:
    """Monte Carlo estimate of ``(delta, sigma_d^2 / sigma^2)``.

    ``delta`` is the real part of ``E[y x*] / E[|x|^2]``; the distortion
    power is ``E|y - delta x|^2``, expanded into moments so samples can be
    streamed in blocks.
    """
    n = int(n)
    if n < 100_000:
        raise DomainError(f"need at least 1e5 samples, got {n}")
    s_yx = s_xx = s_yy = 0.0
    done = 0
    while done < n:
        size = min(1 << 20, n - done)
        x = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) * math.sqrt(0.5 * input_power)
        y = hpa_apply(model, x, input_power)
        s_yx += float(np.sum((y * np.conj(x)).real))
        s_xx += float(np.sum(x.real ** 2 + x.imag ** 2))
        s_yy += float(np.sum(y.real ** 2 + y.imag ** 2))
        done += size
    delta_hat = s_yx / s_xx
    resid = s_yy - 2.0 * delta_hat * s_yx + delta_hat * delta_hat * s_xx
    return delta_hat, max(resid, 0.0) / n / input_power


@dataclass(frozen=True)
class IqImbalance:
    """Receiver IQ mismatch: amplitude ratio ``zeta`` and phase ``theta`` (rad)."""

    zeta: float = 1.0
    theta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.zeta) and self.zeta > 0):
            raise DomainError(f"zeta must be positive, got {self.zeta!r}")

    @classmethod
    def from_db_deg(cls, zeta_db, theta_deg):
        # amplitude ratio: half the power-ratio exponent
        return cls(math.sqrt(db_to_linear(zeta_db)), math.radians(theta_deg))


def iq_coeffs(imb: IqImbalance) -> tuple[complex, complex, float]:
    """Direct and mirror coefficients and the image-leakage ratio.

    ILR is ``|omega2 / omega1|^2`` so that an ideal receiver has ILR = 0.
    """
    w1 = 0.5 * (1.0 + imb.zeta * cmath.exp(-1j * imb.theta))
    w2 = 0.5 * (1.0 - imb.zeta * cmath.exp(1j * imb.theta))
    if abs(w1) < 1e-15:
        raise DegenerateReceiverError("direct IQ coefficient vanishes (zeta=1, theta=pi)")
    return w1, w2, abs(w2 / w1) ** 2


def iq_apply(omega1: complex, omega2: complex, sample):
    """``omega1 * s + omega2 * conj(s)``."""
    s = np.asarray(sample, dtype=complex)
    out = omega1 * s + omega2 * np.conj(s)
    return complex(out) if out.ndim == 0 else out
