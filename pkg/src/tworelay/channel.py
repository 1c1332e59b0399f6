"""BPSK over AWGN: link parameters, Q-function, sampling and hard decisions.

Noise variance is ``N0/2`` per real dimension with ``N0 = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, ndtri

N0 = 1.0
NOISE_VAR = N0 / 2


def q_function(x):
    """Gaussian tail probability P(Z > x)."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0)) if np.ndim(x) else 0.5 * math.erfc(x / math.sqrt(2.0))


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class NetworkParams:
    """Channel gains of the S1-S2, S1-R and S2-R links and symbol energies."""

    h: float = 1.0
    h1: float = 1.0
    h2: float = 1.0
    E: float = 1.0
    E_r: float = 1.0

    def __post_init__(self):
        for name in ("h", "h1", "h2", "E", "E_r"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")

    @classmethod
    def from_ebn0(cls, ebn0_db: float, rate: float, h=1.0, h1=1.0, h2=1.0, er_ratio=1.0) -> "NetworkParams":
        """Code-bit energy E = rate * Eb/N0; relay energy E_r = er_ratio * E."""
        E = rate * db_to_linear(ebn0_db)
        return cls(h=h, h1=h1, h2=h2, E=E, E_r=er_ratio * E)


@dataclass(frozen=True)
class LinkBers:
    p12: float
    p1r: float
    p2r: float
    pr2: float


def link_bers(params: NetworkParams) -> LinkBers:
    return LinkBers(
        p12=q_function(math.sqrt(2 * params.h**2 * params.E)),
        p1r=q_function(math.sqrt(2 * params.h1**2 * params.E)),
        p2r=q_function(math.sqrt(2 * params.h2**2 * params.E)),
        pr2=q_function(math.sqrt(2 * params.h2**2 * params.E_r)),
    )


def bpsk(bits: np.ndarray) -> np.ndarray:
    return 1.0 - 2.0 * np.asarray(bits, dtype=float)


def transmit(codeword, gain: float, energy: float, rng: np.random.Generator, noise_var: float = NOISE_VAR) -> np.ndarray:
    """Received samples gain*sqrt(energy)*(1-2c) + noise; works row-wise on 2-D input."""
    if energy <= 0:
        raise ValueError("energy must be positive")
    x = bpsk(codeword)
    y = gain * math.sqrt(energy) * x
    if noise_var > 0:
        y = y + math.sqrt(noise_var) * rng.standard_normal(x.shape)
    return y


def hard_decision(y) -> np.ndarray:
    """Bit 1 where the sample is negative; exact zeros decide for bit 0."""
    return (np.asarray(y) < 0).astype(np.uint8)


def sample_signed_amplitudes(mean: float, negative: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw N(mean, 1/2) samples conditioned on their sign.

    ``negative`` marks entries drawn from the left tail (below 0); the rest
    are drawn above 0.  The left tail uses inverse-CDF sampling so deep tails
    stay accurate; the right side (probability >= 1/2 for ``mean >= 0``) uses
    rejection.
    """
    if mean < 0:
        raise ValueError("mean must be non-negative")
    sigma = math.sqrt(NOISE_VAR)
    a = mean / sigma
    negative = np.asarray(negative, dtype=bool)
    w = np.empty(negative.shape)
    neg = np.flatnonzero(negative.ravel())
    pos = np.flatnonzero(~negative.ravel())
    flat = w.reshape(-1)
    # P(w < -a) = Q(a)
    flat[neg] = ndtri(rng.random(neg.size) * q_function(a))
    todo = pos
    while todo.size:
        draw = rng.standard_normal(todo.size)
        good = draw > -a
        flat[todo[good]] = draw[good]
        todo = todo[~good]
    z = mean + sigma * w
    # guard the measure-zero boundary against rounding
    return np.where(negative, np.minimum(z, -0.0), np.maximum(z, np.nextafter(0.0, 1.0)))
