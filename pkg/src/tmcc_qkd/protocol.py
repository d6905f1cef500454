"""Bit extraction, XOR half-code reconciliation and the analytic channel
error model.

Each pulse yields one bit: 0 if the count is at or below the integer part
of the expected mean, 1 above it.  Both parties split their bit string in
half and compare the XOR of the halves over a public channel; equal XOR
codes mean (up to the documented coincident-double-flip blind spot) equal
keys.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .photon_stats import IntensityParam, tmcc_distribution, tmcc_moments, tmcc_pn
from .source import PulseRecord

logger = logging.getLogger(__name__)


class Verdict(enum.Enum):
    MATCH = "match"
    MISMATCH = "mismatch"


class ReconcileResult(NamedTuple):
    verdict: Verdict
    detail: str = ""


@dataclass(frozen=True)
class KeyMaterial:
    """A generated key with its half-code decomposition.

    bits has even length (an odd trailing bit is dropped at construction).
    """

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("key bits must be 0 or 1")
        if len(self.bits) % 2 != 0:
            raise ValueError("key length must be even; build via from_bits")

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "KeyMaterial":
        bits = tuple(int(b) for b in bits)
        if len(bits) % 2 != 0:
            logger.info("dropping odd trailing key bit (length %d)", len(bits))
            bits = bits[:-1]
        return cls(bits)

    @property
    def half_a(self) -> tuple[int, ...]:
        return self.bits[: len(self.bits) // 2]

    @property
    def half_b(self) -> tuple[int, ...]:
        return self.bits[len(self.bits) // 2 :]

    @property
    def xor_code(self) -> tuple[int, ...]:
        return tuple(a ^ b for a, b in zip(self.half_a, self.half_b))

    def to_hex(self) -> str:
        if not self.bits:
            return ""
        value = int("".join(map(str, self.bits)), 2)
        return f"{value:0{(len(self.bits) + 3) // 4}x}"

    def to_bitstring(self) -> str:
        return "".join(map(str, self.bits))


@dataclass(frozen=True)
class ErrorModel:
    """Analytic error model: intensity, noise factor and the bit threshold
    (integer part of the expected mean)."""

    lam: IntensityParam
    epsilon: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.epsilon <= 0.5:
            raise ValueError("epsilon must be in [0, 0.5]")

    @property
    def threshold(self) -> int:
        return int(math.floor(tmcc_moments(self.lam).mean))


class ErrorReport(NamedTuple):
    p0: float
    error_factor: float
    p_err: float


def bit_from_count(n: int, threshold: int) -> int:
    """0 for counts at or below the threshold, 1 above it."""
    if n < 0:
        raise ValueError("photon count must be >= 0")
    return 1 if n > threshold else 0


def extract_keys(pulses: Sequence[PulseRecord], threshold: int) -> tuple[KeyMaterial, KeyMaterial]:
    """Alice's and Bob's keys from a shared pulse sequence."""
    if len(pulses) < 2:
        raise ValueError("need at least 2 pulses")
    alice = KeyMaterial.from_bits([bit_from_count(p.n_a, threshold) for p in pulses])
    bob = KeyMaterial.from_bits([bit_from_count(p.n_b, threshold) for p in pulses])
    return alice, bob


def reconcile(local: KeyMaterial, remote_xor_code: Sequence[int]) -> ReconcileResult:
    """Compare the local XOR half-code against the remote one.

    Equivalent to decoding the remote half-code with one local half and
    comparing with the other (XOR is an involution).  Coincident flips at
    the same position of both halves cancel and go undetected; that is a
    protocol property, not an implementation defect.
    """
    remote = tuple(int(b) for b in remote_xor_code)
    local_code = local.xor_code
    if len(remote) != len(local_code):
        return ReconcileResult(
            Verdict.MISMATCH, f"length mismatch: local {len(local_code)}, remote {len(remote)}"
        )
    if local_code == remote:
        return ReconcileResult(Verdict.MATCH)
    return ReconcileResult(Verdict.MISMATCH, "xor codes differ")


def error_probability(model: ErrorModel) -> ErrorReport:
    """Paper-style channel error quantities.

    p0: probability of registering a "0" bit; error_factor: probability,
    within the "0" outcomes, of sitting exactly at the threshold (one noise
    photon away from flipping); p_err = epsilon * error_factor.
    """
    t = model.threshold
    p0 = sum(tmcc_pn(model.lam, n) for n in range(t + 1))
    error_factor = tmcc_pn(model.lam, t) / p0
    return ErrorReport(p0, error_factor, model.epsilon * error_factor)


def expected_disagreement_rate(model: ErrorModel) -> float:
    """Exact per-pulse probability that Alice's and Bob's bits differ.

    Bits differ only when the shared count sits exactly at the threshold and
    exactly one mode gains a noise photon: 2 eps (1-eps) P_threshold.  This
    is the exact consequence of the per-mode single-photon noise model; the
    product eps * error_factor is its conditional-on-"0" approximation.
    """
    eps = model.epsilon
    return 2.0 * eps * (1.0 - eps) * tmcc_pn(model.lam, model.threshold)
