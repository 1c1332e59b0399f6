"""TW-SDF and TW-1bSF exchanges: relay processing, destination combining, case labels.

Everything is written for the S1 -> S2 direction.  Functions accept either a
single length-n vector or a batch with one trial per row.

The destination runs a CRC-checked decoding chain (``crc_checks=True``): it
first decodes the direct signal, then the relay-path signal when the relay
path carries a correct packet, and only then the combined statistic.  The
CRC is an ideal (genie) detector.  With ``crc_checks=False`` the destination
decodes the combined statistic alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import LinkBers, NetworkParams, bpsk, hard_decision, link_bers, sample_signed_amplitudes, transmit
from .codes import BlockCode, decode_batch, encode_batch

PROTOCOLS = ("tw_sdf", "tw_1bsf", "tw_1bsf_rel")
CASES = ("none", "I", "IIa", "IIb", "IIc", "III")
SAMPLERS = ("plain", "conditional")


# ----------------------------------------------------------------------
# reliability values


def _llr(p: float) -> float:
    return math.log1p(-p) - math.log(p)


@dataclass(frozen=True)
class ReliabilityDesign:
    """Reliability magnitudes used by the destination when the relay flags an error.

    ``original`` uses the relay-link BERs only; ``redesigned`` also caps the
    value by the direct-link LLR.
    """

    variant: str
    L: float
    L_minus: float

    @classmethod
    def from_bers(cls, bers: LinkBers, variant: str = "original") -> "ReliabilityDesign":
        if variant not in ("original", "redesigned"):
            raise ValueError(f"unknown reliability variant {variant!r}")
        L = min(_llr(bers.p1r), _llr(bers.p2r))
        if variant == "redesigned":
            L = min(L, _llr(bers.p12))
        # log(ab / (1 - ab)) with ab = (1-p1r)(1-p2r), written without cancellation
        either = bers.p1r + bers.p2r - bers.p1r * bers.p2r
        L_minus = math.log1p(-bers.p1r) + math.log1p(-bers.p2r) - math.log(either)
        return cls(variant, L, L_minus)

    @classmethod
    def from_params(cls, params: NetworkParams, variant: str = "original") -> "ReliabilityDesign":
        return cls.from_bers(link_bers(params), variant)


def protocol_variant(protocol: str) -> str:
    return "redesigned" if protocol == "tw_1bsf_rel" else "original"


# ----------------------------------------------------------------------
# case labels

_CASE_CODE = {name: i for i, name in enumerate(CASES)}


def case_codes(ok12, ok1r, ok2r, okr2) -> np.ndarray:
    """Vectorized Theta-set membership; 0 = none, then I, IIa, IIb, IIc, III."""
    ok12, ok1r, ok2r, okr2 = (np.asarray(a, dtype=bool) for a in (ok12, ok1r, ok2r, okr2))
    e12 = ~ok12
    relay_ok = ok1r & ok2r
    out = np.zeros(np.broadcast(ok12, ok1r, ok2r, okr2).shape, dtype=np.int8)
    out[e12 & relay_ok & ~okr2] = 1
    out[e12 & ~ok1r & ok2r & okr2] = 2
    out[e12 & ok1r & ~ok2r & okr2] = 3
    out[e12 & ~ok1r & ~ok2r & okr2] = 4
    out[e12 & ~relay_ok & ~okr2] = 5
    return out


def classify_case(ok12: bool, ok1r: bool, ok2r: bool, okr2: bool) -> str:
    return CASES[int(case_codes(ok12, ok1r, ok2r, okr2))]


# ----------------------------------------------------------------------
# relay and destination


@dataclass
class RelayOutput:
    forward: np.ndarray  # network-coded bits (rows of zeros where nothing is forwarded)
    forwarded: np.ndarray  # bool per trial
    flag_correct: np.ndarray  # bool per trial
    ok1r: np.ndarray
    ok2r: np.ndarray


def relay_process(y1r, y2r, code: BlockCode, protocol: str, c1, c2, decoder: str = "bm") -> RelayOutput:
    """Decode both uplinks and build the forwarded XOR.

    ``c1``/``c2`` are the true codewords, used as the ideal correctness check.
    """
    y1r, y2r, c1, c2 = (np.atleast_2d(a) for a in (y1r, y2r, c1, c2))
    est1, _ = decode_batch(code, hard_decision(y1r), decoder)
    est2, _ = decode_batch(code, hard_decision(y2r), decoder)
    ok1r = (est1 == c1).all(axis=1)
    ok2r = (est2 == c2).all(axis=1)
    flag = ok1r & ok2r
    xor = est1 ^ est2
    if protocol == "tw_sdf":
        forwarded = flag
        xor = np.where(flag[:, None], xor, 0).astype(np.uint8)
    elif protocol in ("tw_1bsf", "tw_1bsf_rel"):
        forwarded = np.ones(len(xor), dtype=bool)
    else:
        raise ValueError(f"unknown protocol {protocol!r}")
    return RelayOutput(xor, forwarded, flag, ok1r, ok2r)


def remove_own(y_r2, own_codeword) -> np.ndarray:
    """Self-interference removal: own BPSK symbols times the relay signal."""
    return bpsk(own_codeword) * np.asarray(y_r2, dtype=float)


def destination_llr(
    y12,
    y_r2,
    own_codeword,
    relay_flag,
    genie_case_ii,
    rel: ReliabilityDesign,
    params: NetworkParams,
    code: BlockCode | None = None,
    decoder: str = "bm",
    relay_decision=None,
) -> np.ndarray:
    """Combined LLR 4h sqrt(E) y12 + l_r2 for TW-1bSF.

    ``relay_decision`` is the decoded relay-path codeword D(y~_r2); it is
    computed with ``code``/``decoder`` when not supplied.  Rows with
    ``relay_flag`` use the scaled raw statistic; the others use the decided
    signs scaled by L (``genie_case_ii``) or L^- (otherwise).
    """
    y12 = np.asarray(y12, dtype=float)
    yt = remove_own(y_r2, own_codeword)
    if relay_decision is None:
        if code is None:
            raise ValueError("code is required to decode the relay-path signal")
        relay_decision, _ = decode_batch(code, hard_decision(np.atleast_2d(yt)), decoder)
        relay_decision = relay_decision.reshape(yt.shape)
    flag = np.asarray(relay_flag, dtype=bool)
    mag = np.where(np.asarray(genie_case_ii, dtype=bool), rel.L, rel.L_minus)
    if yt.ndim == 2:
        flag = flag[..., None] if flag.ndim else flag
        mag = mag[..., None] if mag.ndim else mag
    soft = 4 * params.h2 * math.sqrt(params.E_r) * yt
    hard = bpsk(relay_decision) * mag
    return 4 * params.h * math.sqrt(params.E) * y12 + np.where(flag, soft, hard)


# ----------------------------------------------------------------------
# vectorized block simulation


@dataclass
class SimOptions:
    decoder: str = "bm"
    crc_checks: bool = True
    genie_case_ii: bool = True  # False = "pessimistic": always L when the relay flags an error
    random_messages: bool = True
    sampler: str = "conditional"
    noise_var: float = 0.5

    def __post_init__(self):
        if self.sampler not in SAMPLERS:
            raise ValueError(f"unknown sampler {self.sampler!r}")
        if self.sampler == "conditional" and not self.crc_checks:
            raise ValueError("the conditional sampler needs crc_checks (errors must imply a direct-link error)")


@dataclass
class BlockResult:
    case: np.ndarray  # int8 case code per trial
    errors: dict  # protocol -> bool array


def _conditional_pmf(n: int, t: int, p: float) -> np.ndarray:
    k = np.arange(n + 1)
    logpmf = np.array([math.lgamma(n + 1) - math.lgamma(j + 1) - math.lgamma(n - j + 1) for j in k])
    with np.errstate(divide="ignore"):
        logpmf = logpmf + k * math.log(p) + (n - k) * math.log1p(-p)
    pmf = np.exp(logpmf)
    pmf[: t + 1] = 0.0
    total = pmf.sum()
    if total <= 0:
        raise ValueError("direct-link error probability underflows")
    return pmf / total


def direct_link_weight(code: BlockCode, params: NetworkParams) -> float:
    """P(d(y12) >= t+1): the probability mass covered by the conditional sampler."""
    from .bounds import bler_upper

    return bler_upper(link_bers(params).p12, code)


def _sample_direct(code, params, c1, rng, sampler, noise_var):
    n, B = code.n, len(c1)
    mean = params.h * math.sqrt(params.E)
    if sampler == "plain":
        return transmit(c1, params.h, params.E, rng, noise_var)
    p12 = link_bers(params).p12
    pmf = _conditional_pmf(n, code.t, p12)
    counts = rng.choice(n + 1, size=B, p=pmf)
    # uniform positions: rank of random keys
    keys = rng.random((B, n))
    ranks = np.argsort(np.argsort(keys, axis=1), axis=1)
    negative = ranks < counts[:, None]
    z = sample_signed_amplitudes(mean, negative, rng)
    return bpsk(c1) * z


def simulate_block(
    code: BlockCode,
    params: NetworkParams,
    protocols,
    rng: np.random.Generator,
    size: int,
    options: SimOptions = SimOptions(),
) -> BlockResult:
    """Run ``size`` independent exchanges sharing noise across protocols."""
    n, k = code.n, code.k
    dec = options.decoder
    if options.random_messages:
        m1 = rng.integers(0, 2, (size, k), dtype=np.uint8)
        m2 = rng.integers(0, 2, (size, k), dtype=np.uint8)
        c1, c2 = encode_batch(code, m1), encode_batch(code, m2)
    else:
        c1 = np.zeros((size, n), dtype=np.uint8)
        c2 = c1.copy()

    y12 = _sample_direct(code, params, c1, rng, options.sampler, options.noise_var)
    y1r = transmit(c1, params.h1, params.E, rng, options.noise_var)
    y2r = transmit(c2, params.h2, params.E, rng, options.noise_var)
    noise_r2 = math.sqrt(options.noise_var) * rng.standard_normal((size, n))

    d12, _ = decode_batch(code, hard_decision(y12), dec)
    ok12 = (d12 == c1).all(axis=1)

    relay = relay_process(y1r, y2r, code, "tw_1bsf", c1, c2, dec)
    # relay transmission of the 1bSF packet; for SDF it is only sent when flagged,
    # but evaluating it always lets every trial carry a case label
    y_r2 = params.h2 * math.sqrt(params.E_r) * bpsk(relay.forward) + noise_r2
    yt = remove_own(y_r2, c2)
    dr2, _ = decode_batch(code, hard_decision(yt), dec)
    okr2 = (dr2 == (relay.forward ^ c2)).all(axis=1)
    relay_path_ok = (dr2 == c1).all(axis=1)
    case = case_codes(ok12, relay.ok1r, relay.ok2r, okr2)

    bers = link_bers(params)
    direct = 4 * params.h * math.sqrt(params.E) * y12
    errors = {}
    for proto in protocols:
        if proto == "tw_sdf":
            use = relay.flag_correct
            stat = np.where(use[:, None], direct + 4 * params.h2 * math.sqrt(params.E_r) * yt, direct)
        else:
            rel = ReliabilityDesign.from_bers(bers, protocol_variant(proto))
            use = relay.flag_correct
            genie = okr2 if options.genie_case_ii else np.ones(size, dtype=bool)
            stat = destination_llr(y12, y_r2, c2, relay.flag_correct, genie, rel, params, relay_decision=dr2)
        final, _ = decode_batch(code, hard_decision(stat), dec)
        err = ~(final == c1).all(axis=1)
        if options.crc_checks:
            err &= ~ok12
            # relay-path packet is only usable when it carries correct data (SDF: forwarded)
            err &= ~(relay_path_ok & use)
        errors[proto] = err
    return BlockResult(case, errors)


@dataclass(frozen=True)
class TrialOutcome:
    protocol: str
    relay_ok_1r: bool
    relay_ok_2r: bool
    direct_ok_12: bool
    relay_path_ok_r2: bool
    case_label: str
    final_error: bool


def run_trial(
    protocol: str,
    code: BlockCode,
    params: NetworkParams,
    rng: np.random.Generator,
    decoder: str = "bm",
    rel: ReliabilityDesign | None = None,
    noise_var: float = 0.5,
    random_messages: bool = True,
    crc_checks: bool = True,
    genie_case_ii: bool = True,
) -> TrialOutcome:
    """One unconditioned exchange S1 -> S2 with full per-link diagnostics."""
    n, k = code.n, code.k
    if random_messages:
        c1 = encode_batch(code, rng.integers(0, 2, (1, k), dtype=np.uint8))
        c2 = encode_batch(code, rng.integers(0, 2, (1, k), dtype=np.uint8))
    else:
        c1 = np.zeros((1, n), dtype=np.uint8)
        c2 = c1.copy()
    y12 = transmit(c1, params.h, params.E, rng, noise_var)
    y1r = transmit(c1, params.h1, params.E, rng, noise_var)
    y2r = transmit(c2, params.h2, params.E, rng, noise_var)
    relay = relay_process(y1r, y2r, code, protocol, c1, c2, decoder)
    # the 1bSF packet is always transmitted; SDF sends it only when flagged
    sent = relay_process(y1r, y2r, code, "tw_1bsf", c1, c2, decoder).forward
    y_r2 = transmit(sent, params.h2, params.E_r, rng, noise_var)
    yt = remove_own(y_r2, c2)

    d12, _ = decode_batch(code, hard_decision(y12), decoder)
    dr2, _ = decode_batch(code, hard_decision(yt), decoder)
    ok12 = bool((d12 == c1).all())
    okr2 = bool((dr2 == (sent ^ c2)).all())
    path_ok = bool((dr2 == c1).all())
    usable = bool(relay.forwarded[0]) and bool(relay.flag_correct[0])

    if protocol == "tw_sdf":
        stat = 4 * params.h * math.sqrt(params.E) * y12
        if relay.forwarded[0]:
            stat = stat + 4 * params.h2 * math.sqrt(params.E_r) * yt
    else:
        if rel is None:
            rel = ReliabilityDesign.from_params(params, protocol_variant(protocol))
        genie = okr2 if genie_case_ii else True
        stat = destination_llr(y12, y_r2, c2, relay.flag_correct, np.array([genie]), rel, params, relay_decision=dr2)
        usable = bool(relay.flag_correct[0])
    final, _ = decode_batch(code, hard_decision(stat), decoder)
    err = not bool((final == c1).all())
    if crc_checks:
        err = err and not ok12 and not (path_ok and usable)
    label = classify_case(ok12, bool(relay.ok1r[0]), bool(relay.ok2r[0]), okr2)
    return TrialOutcome(protocol, bool(relay.ok1r[0]), bool(relay.ok2r[0]), ok12, okr2, label, err)
