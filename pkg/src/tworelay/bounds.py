"""Analytical BLER bounds for the S1 -> S2 direction of TW-SDF and TW-1bSF.

Link bounds assume a bounded-distance view of the hard decoder: the upper
bound is the probability of leaving the transmitted sphere, the lower bounds
count received words that land in wrong spheres (series form from the weight
distribution, intrinsic form adding the decoder's SPF).  The protocol bounds
combine these with per-bit overlap sums over the direct and relay signals.

Combinatorial sums run in the log domain with exact binomials, so long codes
do not overflow.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import xlog1py, xlogy

from .channel import LinkBers, NetworkParams, link_bers, q_function
from .codes import BlockCode, Spf, WeightDistribution

NEG_INF = -math.inf


class QuadratureError(ArithmeticError):
    """Numerical integration did not reach the requested tolerance."""


class DominanceWarning(UserWarning):
    """Asymptotic TW-1bSF form used outside its validity condition L/(4hE) < h."""


@dataclass(frozen=True)
class QuadratureSpec:
    tolerance: float = 1e-12
    width: float = 10.0  # integration window half-width, in standard deviations

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("quadrature tolerance must be positive")
        if self.width < 8:
            raise ValueError("quadrature width must be at least 8 standard deviations")


@lru_cache(maxsize=16)
def log_comb_table(n: int) -> np.ndarray:
    """``T[a, b] = log C(a, b)`` for 0 <= a, b <= n, -inf where b > a."""
    T = np.full((n + 1, n + 1), NEG_INF)
    for a in range(n + 1):
        for b in range(a + 1):
            T[a, b] = math.log(math.comb(a, b))
    T.setflags(write=False)
    return T


def _log_pow(k, p: float):
    """log(p^k) with 0^0 = 1."""
    return xlogy(k, p)


def _log_pow_c(k, p: float):
    """log((1-p)^k) with 0^0 = 1."""
    return xlog1py(k, -p)


# ----------------------------------------------------------------------
# link bounds


def bler_upper(p: float, code: BlockCode) -> float:
    """Probability of more than t channel errors in n bits."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    n, t = code.n, code.t
    if p == 0.0:
        return 0.0
    lc = log_comb_table(n)
    k = np.arange(t + 1, n + 1)
    terms = np.exp(lc[n, k] + _log_pow(k, p) + _log_pow_c(n - k, p))
    return min(1.0, math.fsum(terms))


def _beta_prime(p: float, code: BlockCode, k: int, A_k: int) -> float:
    if A_k == 0 or p == 0.0:
        return 0.0
    n, t = code.n, code.t
    lc = log_comb_table(n)
    terms = []
    for m in range(t + 1):
        for j in range(min(m, n - k) + 1):
            if m - j > k:
                continue
            e = k - m + 2 * j
            terms.append(lc[k, m - j] + lc[n - k, j] + _log_pow(e, p) + _log_pow_c(n - e, p))
    return A_k * math.fsum(np.exp(terms))


def beta_prime_terms(p: float, code: BlockCode, wd: WeightDistribution) -> dict[int, float]:
    """beta'_k(p) for 2t+1 <= k <= w_max."""
    lo = code.d_min
    return {k: _beta_prime(p, code, k, wd[k]) for k in range(lo, min(wd.w_max, code.n) + 1)}


def beta_terms(p: float, code: BlockCode, spf: Spf, wd: WeightDistribution) -> dict[int, float]:
    """Intrinsic terms beta_k(p): beta'_k plus the SPF correction.

    Weights above the weight-distribution cutoff keep only the SPF part.
    """
    n, t = code.n, code.t
    if spf.n != n or spf.t != t:
        raise ValueError("SPF does not belong to this code")
    base = beta_prime_terms(p, code, wd)
    corner = math.exp(_log_pow(t + 1, p) + _log_pow_c(n - t - 1, p)) if p > 0 else 0.0
    out = dict(base)
    for k, W in spf.wrong().items():
        if k < code.d_min:
            continue
        extra = W
        if k == code.d_min:
            extra -= wd[k] * math.comb(2 * t + 1, t)
            if extra < 0:
                raise ValueError(f"W_{k}={W} is below A_{k}*C({2 * t + 1},{t}); SPF and weights disagree")
        out[k] = out.get(k, 0.0) + extra * corner
    return out


def bler_lower_series(p: float, code: BlockCode, wd: WeightDistribution | None) -> float:
    if wd is None:
        raise ValueError("a weight distribution is required for the series lower bound")
    return math.fsum(beta_prime_terms(p, code, wd).values())


def bler_lower_intrinsic(p: float, code: BlockCode, spf: Spf | None, wd: WeightDistribution | None) -> float:
    if spf is None:
        raise ValueError("an SPF table is required for the intrinsic lower bound")
    if wd is None:
        raise ValueError("a weight distribution is required for the intrinsic lower bound")
    return math.fsum(beta_terms(p, code, spf, wd).values())


# ----------------------------------------------------------------------
# per-bit probabilities


def _quad(f, mean: float, spec: QuadratureSpec) -> float:
    sigma = math.sqrt(0.5)
    lo = max(0.0, mean - spec.width * sigma)
    hi = mean + spec.width * sigma
    if hi <= 0:
        return 0.0
    val, err = integrate.quad(f, lo, hi, epsabs=spec.tolerance / 10, epsrel=1e-13, limit=200)
    if err > spec.tolerance:
        raise QuadratureError(f"quadrature error estimate {err:.3e} exceeds tolerance {spec.tolerance:.1e}")
    return val


def _gauss(x, mean):
    return math.exp(-((x - mean) ** 2)) / math.sqrt(math.pi)


@dataclass(frozen=True)
class BitProbabilities:
    p: float  # both observations correct
    q: float  # both wrong
    p_dot: float  # relay-side bit wrong, direct right, combination wrong
    q_dot: float  # relay-side bit wrong, direct right, combination right
    p_ddot: float  # relay-side bit right, direct wrong, combination wrong
    q_ddot: float  # relay-side bit right, direct wrong, combination right


def case_i_bits(params: NetworkParams, quad: QuadratureSpec = QuadratureSpec()) -> BitProbabilities:
    """Per-bit probabilities when the relay path carries the raw statistic."""
    b = link_bers(params)
    a1 = params.h * math.sqrt(params.E)
    a2 = params.h2 * math.sqrt(params.E_r)
    s2 = math.sqrt(2.0)
    p_dot = _quad(lambda x: q_function(s2 * a2 + s2 * a1 * x / a2) * _gauss(x, a1), a1, quad)
    p_ddot = _quad(lambda x: q_function(s2 * a1 + s2 * a2 * x / a1) * _gauss(x, a2), a2, quad)
    return BitProbabilities(
        p=(1 - b.pr2) * (1 - b.p12),
        q=b.p12 * b.pr2,
        p_dot=p_dot,
        q_dot=b.pr2 * (1 - b.p12) - p_dot,
        p_ddot=p_ddot,
        q_ddot=b.p12 * (1 - b.pr2) - p_ddot,
    )


def case_ii_bits(params: NetworkParams, L: float) -> BitProbabilities:
    """Per-bit probabilities when the relay path carries hard signs of magnitude L."""
    E, h = params.E, params.h
    p12 = q_function(math.sqrt(2 * h * h * E))
    c = L / (4 * h * E)
    q_dot = q_function(math.sqrt(2 * E) * (c - h))
    p_ddot = q_function(math.sqrt(2 * E) * (c + h))
    return BitProbabilities(
        p=1 - p12,
        q=p12,
        p_dot=q_function(-math.sqrt(2 * h * h * E)) - q_dot,
        q_dot=q_dot,
        p_ddot=p_ddot,
        q_ddot=p12 - p_ddot,
    )


# ----------------------------------------------------------------------
# overlap sums


def _overlap_sum(n: int, t: int, log_weights: dict[int, float], bits: BitProbabilities) -> float:
    """Sum over relay-error weight k (with log weight), overlap m, direct errors i.

    Counts configurations with i >= t+1 direct errors whose combination keeps
    at most t errors.
    """
    lc = log_comb_table(n)
    lp, lq = math.log(bits.p) if bits.p > 0 else NEG_INF, math.log(bits.q) if bits.q > 0 else NEG_INF

    def lg(x):
        return math.log(x) if x > 0 else NEG_INF

    lpd, lqd, lpdd, lqdd = lg(bits.p_dot), lg(bits.q_dot), lg(bits.p_ddot), lg(bits.q_ddot)

    def lpow(e, lx):
        e = np.asarray(e)
        if lx != NEG_INF:
            return e * lx
        # 0 * log(0) counts as log(1)
        return np.where(e == 0, 0.0, NEG_INF)

    terms = []
    for k, lw in log_weights.items():
        if lw == NEG_INF or k > n - 1:
            continue
        for m in range(max(0, t + 1 - (n - k)), min(t, k) + 1):
            i = np.arange(t + 1, m + n - k + 1)
            if i.size == 0:
                continue
            a = i - m
            common = lw + lc[k, m] + lc[n - k, a] + lpow(n - k - a, lp) + lpow(m, lq)
            inner = np.full(i.shape, NEG_INF)
            for g in range(t - m + 1):
                for j in range(g + 1):
                    if j > k - m:
                        continue
                    b = g - j
                    val = (
                        lc[k - m, j] + lpow(j, lpd) + lpow(k - m - j, lqd)
                        + np.where(b <= a, lc[a, np.minimum(b, a)], NEG_INF)
                        + lpow(b, lpdd) + lpow(np.maximum(a - b, 0), lqdd)
                    )
                    inner = np.logaddexp(inner, val)
            terms.extend(np.exp(common + inner).tolist())
    return math.fsum(terms)


# ----------------------------------------------------------------------
# protocol bounds


@dataclass(frozen=True)
class LinkBounds:
    upper: float
    lower_series: float | None
    lower: float | None


def link_bounds(p: float, code: BlockCode, spf: Spf | None, wd: WeightDistribution | None) -> LinkBounds:
    up = bler_upper(p, code)
    ser = bler_lower_series(p, code, wd) if wd is not None else None
    intr = bler_lower_intrinsic(p, code, spf, wd) if (wd is not None and spf is not None) else None
    return LinkBounds(up, ser, intr)


def theorem1_case_i(
    params: NetworkParams,
    code: BlockCode,
    wd: WeightDistribution | None = None,
    quad: QuadratureSpec = QuadratureSpec(),
) -> dict[str, float]:
    """Case I terms: lower bound on correct decoding and the two error upper bounds.

    ``ub_err_I_bdd`` uses the BDD link factors; ``ub_err_I`` uses the
    series lower bounds of the relay links (needs ``wd``).
    """
    n, t = code.n, code.t
    b = link_bers(params)
    P12, P1r, P2r, Pr2 = (bler_upper(p, code) for p in (b.p12, b.p1r, b.p2r, b.pr2))
    bits = case_i_bits(params, quad)
    lc = log_comb_table(n)
    s = _overlap_sum(n, t, {k: lc[n, k] for k in range(t + 1, n)}, bits)
    lb = (1 - P1r) * (1 - P2r) * s
    out = {
        "lb_noerr_I": lb,
        "ub_err_I_bdd": max(0.0, P12 * (1 - P1r) * (1 - P2r) * Pr2 - lb),
        "p_dot_I": bits.p_dot,
        "q_dot_I": bits.q_dot,
        "p_ddot_I": bits.p_ddot,
        "q_ddot_I": bits.q_ddot,
    }
    if wd is not None:
        L1 = bler_lower_series(b.p1r, code, wd)
        L2 = bler_lower_series(b.p2r, code, wd)
        out["ub_err_I"] = max(0.0, P12 * (1 - L1) * (1 - L2) * Pr2 - lb)
    return out


def twsdf_upper(params: NetworkParams, code: BlockCode, wd: WeightDistribution, quad: QuadratureSpec = QuadratureSpec()) -> float:
    b = link_bers(params)
    P12, P1r, P2r = (bler_upper(p, code) for p in (b.p12, b.p1r, b.p2r))
    relay_fail = P12 * (P1r + P2r - P1r * P2r)
    return min(1.0, relay_fail + theorem1_case_i(params, code, wd, quad)["ub_err_I"])


def _case_ii(params, code, spf, wd, rel_L, p_wrong, p_other):
    n, t = code.n, code.t
    b = link_bers(params)
    bits = case_ii_bits(params, rel_L)
    beta = beta_terms(p_wrong, code, spf, wd)
    logw = {k: (math.log(v) if v > 0 else NEG_INF) for k, v in beta.items() if k <= n - 1}
    s = _overlap_sum(n, t, logw, bits)
    P12 = bler_upper(b.p12, code)
    Pw = bler_upper(p_wrong, code)
    Po = bler_upper(p_other, code)
    Pr2 = bler_upper(b.pr2, code)
    lb = (1 - Po) * (1 - Pr2) * s
    return lb, max(0.0, P12 * Pw * (1 - Po) * (1 - Pr2) - lb), bits


def theorem3_case_iia(params: NetworkParams, code: BlockCode, spf: Spf, wd: WeightDistribution, L: float) -> dict[str, float]:
    b = link_bers(params)
    lb, ub, bits = _case_ii(params, code, spf, wd, L, b.p1r, b.p2r)
    return {
        "lb_noerr_IIa": lb,
        "ub_err_IIa": ub,
        "p_dot_II": bits.p_dot,
        "q_dot_II": bits.q_dot,
        "p_ddot_II": bits.p_ddot,
        "q_ddot_II": bits.q_ddot,
    }


def corollary_case_iib(params: NetworkParams, code: BlockCode, spf: Spf, wd: WeightDistribution, L: float) -> dict[str, float]:
    b = link_bers(params)
    lb, ub, _ = _case_ii(params, code, spf, wd, L, b.p2r, b.p1r)
    return {"lb_noerr_IIb": lb, "ub_err_IIb": ub}


def remaining_case_terms(params: NetworkParams, code: BlockCode) -> dict[str, float]:
    b = link_bers(params)
    P12, P1r, P2r, Pr2 = (bler_upper(p, code) for p in (b.p12, b.p1r, b.p2r, b.pr2))
    return {
        "P_IIc": P12 * P1r * P2r * (1 - Pr2),
        "P_III": P12 * (P1r + P2r - P1r * P2r) * Pr2,
    }


def tw1bsf_upper(
    params: NetworkParams,
    code: BlockCode,
    spf: Spf,
    wd: WeightDistribution,
    L: float,
    quad: QuadratureSpec = QuadratureSpec(),
) -> dict[str, float]:
    """Five-term TW-1bSF upper bound with its breakdown under ``total``."""
    terms = {
        "ub_err_I_bdd": theorem1_case_i(params, code, None, quad)["ub_err_I_bdd"],
        "ub_err_IIa": theorem3_case_iia(params, code, spf, wd, L)["ub_err_IIa"],
        "ub_err_IIb": corollary_case_iib(params, code, spf, wd, L)["ub_err_IIb"],
        **remaining_case_terms(params, code),
    }
    terms["total"] = min(1.0, math.fsum(terms.values()))
    return terms


# ----------------------------------------------------------------------
# asymptotics and energy


def gain_ratio(code: BlockCode, spf: Spf) -> Fraction:
    """Exact asymptotic TW-SDF / TW-1bSF ratio from the SPF."""
    C = math.comb(code.n, code.t + 1)
    corr = sum(W * (C - math.comb(k, code.t + 1)) for k, W in spf.wrong().items() if k >= code.d_min)
    denom = C * C - corr
    if denom <= 0:
        raise ArithmeticError("SPF correction exceeds C(n,t+1)^2")
    return Fraction(C * C, denom)


def perfect_gain(code: BlockCode) -> Fraction:
    return Fraction(math.comb(code.n, code.t + 1), math.comb(2 * code.t + 1, code.t + 1))


def dominance_holds(params: NetworkParams, L: float) -> bool:
    return L / (4 * params.h * params.E) < params.h


def asymptotic_forms(params: NetworkParams, code: BlockCode, spf: Spf, L: float | None = None) -> dict[str, float]:
    """Leading-order TW-SDF and TW-1bSF BLER and their ratio.

    With ``L`` given, warns when the TW-1bSF form is outside its validity
    condition.
    """
    b = link_bers(params)
    n, t = code.n, code.t
    C = math.comb(n, t + 1)
    e = t + 1
    gain = gain_ratio(code, spf)
    bracket = C * C / float(gain)
    first = C * b.p12**e * b.pr2**e
    relay = (b.p1r**e + b.p2r**e) * b.p12**e
    if L is not None and not dominance_holds(params, L):
        warnings.warn(
            f"L/(4hE) = {L / (4 * params.h * params.E):.4g} >= h = {params.h}: "
            "the TW-1bSF asymptotic form is not valid at this point",
            DominanceWarning,
            stacklevel=2,
        )
    return {"sdf_asym": first + C * C * relay, "sf_asym": first + bracket * relay, "gain_asym": float(gain)}


def decoding_energy(p12_block: float, p_theta_i: float, p_theta_ii_iii: float, epsilon: float = 1.0) -> dict[str, float]:
    """Expected decoding energy at S2 for both protocols."""
    base = epsilon * (1 - p12_block) + 3 * epsilon * p_theta_i
    return {"energy_sdf": base + epsilon * p_theta_ii_iii, "energy_sf": base + 3 * epsilon * p_theta_ii_iii}


def case_probabilities(params: NetworkParams, code: BlockCode) -> dict[str, float]:
    """Occurrence probabilities of the case sets under the BDD link model."""
    b = link_bers(params)
    P12, P1r, P2r, Pr2 = (bler_upper(p, code) for p in (b.p12, b.p1r, b.p2r, b.pr2))
    return {
        "P_theta_I": P12 * (1 - P1r) * (1 - P2r) * Pr2,
        "P_theta_IIa": P12 * P1r * (1 - P2r) * (1 - Pr2),
        "P_theta_IIb": P12 * (1 - P1r) * P2r * (1 - Pr2),
        "P_theta_IIc": P12 * P1r * P2r * (1 - Pr2),
        "P_theta_III": P12 * (P1r + P2r - P1r * P2r) * Pr2,
        "P_theta_II_III": P12 * (P1r + P2r - P1r * P2r),
    }


# ----------------------------------------------------------------------
# full report


@dataclass
class BoundReport:
    code: str
    eb_n0_db: float | None
    h: float
    h1: float
    h2: float
    E: float
    E_r: float
    variant: str
    L: float
    L_minus: float
    values: dict[str, float] = field(default_factory=dict)
    meta: dict[str, object] = field(default_factory=dict)

    def row(self) -> dict[str, object]:
        head = {k: v for k, v in asdict(self).items() if k not in ("values", "meta")}
        return {**head, **self.values}

    def __getitem__(self, key: str) -> float:
        return self.values[key]


def bound_report(
    params: NetworkParams,
    code: BlockCode,
    spf: Spf,
    wd: WeightDistribution,
    variant: str = "original",
    eb_n0_db: float | None = None,
    quad: QuadratureSpec = QuadratureSpec(),
    epsilon: float = 1.0,
) -> BoundReport:
    from .protocols import ReliabilityDesign

    b = link_bers(params)
    rel = ReliabilityDesign.from_bers(b, variant)
    v: dict[str, float] = {}
    for name, p in (("12", b.p12), ("1r", b.p1r), ("2r", b.p2r), ("r2", b.pr2)):
        lk = link_bounds(p, code, spf, wd)
        v[f"p{name}"] = p
        v[f"P{name}_up"] = lk.upper
        v[f"P{name}_lo_series"] = lk.lower_series
        v[f"P{name}_lo"] = lk.lower
    t1 = theorem1_case_i(params, code, wd, quad)
    t3a = theorem3_case_iia(params, code, spf, wd, rel.L)
    t3b = corollary_case_iib(params, code, spf, wd, rel.L)
    rest = remaining_case_terms(params, code)
    v.update(t1)
    v.update(t3a)
    v.update(t3b)
    v.update(rest)
    relay_fail = v["P12_up"] * (v["P1r_up"] + v["P2r_up"] - v["P1r_up"] * v["P2r_up"])
    # composite bounds above 1 carry no information; clipping keeps them valid
    v["sdf_upper"] = min(1.0, relay_fail + t1["ub_err_I"])
    v["sf_upper"] = min(1.0, math.fsum([t1["ub_err_I_bdd"], t3a["ub_err_IIa"], t3b["ub_err_IIb"], rest["P_IIc"], rest["P_III"]]))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DominanceWarning)
        v.update(asymptotic_forms(params, code, spf, rel.L))
    v["dominance_ok"] = float(not caught)
    cp = case_probabilities(params, code)
    v.update(decoding_energy(v["P12_up"], cp["P_theta_I"], cp["P_theta_II_III"], epsilon))
    meta = {"decoder": spf.decoder_id, "w_max": wd.w_max, "quad_tol": quad.tolerance, "quad_width": quad.width}
    return BoundReport(code.name, eb_n0_db, params.h, params.h1, params.h2, params.E, params.E_r,
                       variant, rel.L, rel.L_minus, v, meta)


def reports_csv(reports: list[BoundReport], meta: dict[str, object] | None = None) -> str:
    if not reports:
        raise ValueError("no bound reports to write")
    buf = io.StringIO()
    merged = dict(reports[0].meta)
    merged.update(meta or {})
    for key, value in merged.items():
        buf.write(f"# {key}={value}\n")
    rows = [r.row() for r in reports]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(rows[0]))
    for row in rows:
        writer.writerow([_fmt(x) for x in row.values()])
    return buf.getvalue()


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)
