import itertools
import math
import warnings
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tworelay.bounds import (
    BitProbabilities,
    DominanceWarning,
    QuadratureError,
    QuadratureSpec,
    _overlap_sum,
    asymptotic_forms,
    beta_terms,
    bler_lower_intrinsic,
    bler_lower_series,
    bler_upper,
    bound_report,
    case_i_bits,
    case_ii_bits,
    case_probabilities,
    corollary_case_iib,
    decoding_energy,
    dominance_holds,
    gain_ratio,
    log_comb_table,
    perfect_gain,
    remaining_case_terms,
    reports_csv,
    theorem1_case_i,
    theorem3_case_iia,
    tw1bsf_upper,
    twsdf_upper,
)
from tworelay.channel import NetworkParams, link_bers
from tworelay.codes import compute_spf, compute_weight_distribution, decode_batch, make_code, perfect_spf
from tworelay.protocols import ReliabilityDesign

H7 = make_code("hamming-7-4")
H15 = make_code("hamming-15-11")
B15 = make_code("bch-15-7")
PS = (1e-4, 1e-3, 1e-2, 0.1, 0.3)


def mp_bler_upper(p, n, t):
    p = mpmath.mpf(p)
    return float(mpmath.fsum(mpmath.binomial(n, i) * p**i * (1 - p) ** (n - i) for i in range(t + 1, n + 1)))


# ----------------------------------------------------------------------
# link bounds


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-9, 0.5), st.sampled_from(["hamming-7-4", "bch-15-7", "bch-127-113"]))
def test_bler_upper_matches_mpmath(p, name):
    code = make_code(name)
    assert bler_upper(p, code) == pytest.approx(mp_bler_upper(p, code.n, code.t), rel=1e-11)


def test_bler_upper_value():
    assert bler_upper(0.1, H15) == pytest.approx(0.450956981, rel=1e-8)


@pytest.mark.parametrize("code", [H7, H15], ids=lambda c: c.name)
@pytest.mark.parametrize("p", PS)
def test_perfect_code_bounds_collapse(code, p):
    wd = compute_weight_distribution(code, w_max=code.n)
    spf = perfect_spf(code)
    up = bler_upper(p, code)
    assert bler_lower_series(p, code, wd) == pytest.approx(up, rel=1e-12)
    assert bler_lower_intrinsic(p, code, spf, wd) == pytest.approx(up, rel=1e-12)


def _bsc_bler(code, p, trials, seed):
    rng = np.random.default_rng(seed)
    r = (rng.random((trials, code.n)) < p).astype(np.uint8)
    out, _ = decode_batch(code, r, "bm")
    return out.any(axis=1).mean()


@pytest.mark.parametrize("p", [0.02, 0.05, 0.1])
def test_bch_link_bounds_bracket_simulation(p):
    wd = compute_weight_distribution(B15)
    spf = compute_spf(B15, "bm")
    N = 200_000
    est = _bsc_bler(B15, p, N, 1)
    sd = math.sqrt(est * (1 - est) / N)
    lo = bler_lower_intrinsic(p, B15, spf, wd)
    assert bler_lower_series(p, B15, wd) <= lo + 1e-15
    assert lo - 4 * sd <= est <= bler_upper(p, B15) + 4 * sd


def test_beta_terms_truncation():
    wd = compute_weight_distribution(B15, w_max=6)
    beta = beta_terms(0.05, B15, compute_spf(B15), wd)
    assert all(v >= 0 for v in beta.values())
    assert max(beta) <= B15.n


def test_log_comb_table():
    lc = log_comb_table(30)
    assert math.exp(lc[30, 7]) == pytest.approx(math.comb(30, 7), rel=1e-13)
    assert lc[5, 6] == -math.inf


# ----------------------------------------------------------------------
# per-bit probabilities: independent mpmath quadrature


def _mp_phi(x, mean):
    return mpmath.exp(-((x - mean) ** 2)) / mpmath.sqrt(mpmath.pi)


def _mp_Q(x):
    return mpmath.erfc(x / mpmath.sqrt(2)) / 2


def mp_case_i(params):
    a1 = mpmath.mpf(params.h) * mpmath.sqrt(params.E)
    a2 = mpmath.mpf(params.h2) * mpmath.sqrt(params.E_r)
    s2 = mpmath.sqrt(2)
    # relay-path sample z ~ N(a2, 1/2), direct sample y ~ N(a1, 1/2), combination a1*y + a2*z
    p_dot = mpmath.quad(lambda y: _mp_phi(y, a1) * _mp_Q(s2 * (a1 * y / a2 + a2)), [0, a1, mpmath.inf])
    q_dot = mpmath.quad(lambda z: _mp_phi(z, a2) * _mp_Q(s2 * (-a2 * z / a1 - a1)), [-mpmath.inf, 0])
    p_ddot = mpmath.quad(lambda z: _mp_phi(z, a2) * _mp_Q(s2 * (a2 * z / a1 + a1)), [0, a2, mpmath.inf])
    q_ddot = mpmath.quad(lambda y: _mp_phi(y, a1) * _mp_Q(s2 * (-a1 * y / a2 - a2)), [-mpmath.inf, 0])
    return tuple(float(v) for v in (p_dot, q_dot, p_ddot, q_ddot))


GRID = [NetworkParams(h=h, h2=h2, E=E, E_r=E) for E in (0.5, 2.0) for h, h2 in ((0.6, 1.0), (1.0, 1.0), (1.3, 0.7))]


@pytest.mark.parametrize("params", GRID)
def test_case_i_bits_match_mpmath(params):
    bits = case_i_bits(params)
    with mpmath.workdps(30):
        ref = mp_case_i(params)
    b = link_bers(params)
    for got, want in zip((bits.p_dot, bits.q_dot, bits.p_ddot, bits.q_ddot), ref):
        assert got == pytest.approx(want, rel=1e-9, abs=1e-15)
    assert ref[0] + ref[1] == pytest.approx(b.pr2 * (1 - b.p12), abs=1e-12)
    assert ref[2] + ref[3] == pytest.approx(b.p12 * (1 - b.pr2), abs=1e-12)


@pytest.mark.parametrize("params", GRID)
def test_case_ii_bits_totals_and_oracle(params):
    L = ReliabilityDesign.from_params(params).L
    bits = case_ii_bits(params, L)
    b = link_bers(params)
    assert bits.p_dot + bits.q_dot == pytest.approx(1 - b.p12, abs=1e-12)
    assert bits.p_ddot + bits.q_ddot == pytest.approx(b.p12, abs=1e-12)
    # conditioned on the relay sign: direct sample y ~ N(a1, 1/2), combination 4 a1 y -/+ L
    with mpmath.workdps(30):
        a1 = mpmath.mpf(params.h) * mpmath.sqrt(params.E)
        thr = mpmath.mpf(L) / (4 * a1)
        s2 = mpmath.sqrt(2)
        q_dot = _mp_Q(s2 * (thr - a1))
        p_ddot = _mp_Q(s2 * (thr + a1))
    assert bits.q_dot == pytest.approx(float(q_dot), rel=1e-12)
    assert bits.p_ddot == pytest.approx(float(p_ddot), rel=1e-12)


def test_quadrature_spec_validation_and_failure():
    with pytest.raises(ValueError):
        QuadratureSpec(tolerance=0)
    with pytest.raises(ValueError):
        QuadratureSpec(width=4)
    with pytest.raises(QuadratureError):
        case_i_bits(NetworkParams(), QuadratureSpec(tolerance=1e-300))


# ----------------------------------------------------------------------
# overlap sums: brute-force enumeration of per-bit outcomes


def brute_overlap(n, t, weights, bits):
    # per-bit outcomes: (relay wrong, direct wrong, combined wrong, prob)
    outcomes = [
        (0, 0, 0, bits.p), (1, 1, 1, bits.q), (1, 0, 1, bits.p_dot),
        (1, 0, 0, bits.q_dot), (0, 1, 1, bits.p_ddot), (0, 1, 0, bits.q_ddot),
    ]
    total = 0.0
    for combo in itertools.product(outcomes, repeat=n):
        k = sum(o[0] for o in combo)
        i = sum(o[1] for o in combo)
        e = sum(o[2] for o in combo)
        if i >= t + 1 and e <= t and k in weights and k <= n - 1:
            total += weights[k] / math.comb(n, k) * math.prod(o[3] for o in combo)
    return total


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_overlap_sum_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    raw = rng.random(6)
    p, q, pd, qd, pdd, qdd = raw / raw.sum()
    bits = BitProbabilities(p, q, pd, qd, pdd, qdd)
    n, t = 6, 1
    weights = {k: float(rng.random() * 10) for k in range(t + 1, n + 1)}
    got = _overlap_sum(n, t, {k: math.log(w) for k, w in weights.items()}, bits)
    assert got == pytest.approx(brute_overlap(n, t, weights, bits), rel=1e-12)


def test_overlap_sum_t2():
    bits = BitProbabilities(0.5, 0.05, 0.1, 0.15, 0.08, 0.12)
    n, t = 6, 2
    weights = {k: math.comb(n, k) for k in range(t + 1, n)}
    got = _overlap_sum(n, t, {k: math.log(w) for k, w in weights.items()}, bits)
    assert got == pytest.approx(brute_overlap(n, t, weights, bits), rel=1e-12)


# ----------------------------------------------------------------------
# composite bounds


def _setup(code, db, h=1.0):
    p = NetworkParams.from_ebn0(db, code.rate, h=h)
    spf = perfect_spf(code) if code.is_perfect else compute_spf(code)
    return p, spf, compute_weight_distribution(code)


def test_case_terms_are_probabilities():
    p, spf, wd = _setup(H15, 5.0)
    L = ReliabilityDesign.from_params(p).L
    vals = {**theorem1_case_i(p, H15, wd), **theorem3_case_iia(p, H15, spf, wd, L),
            **corollary_case_iib(p, H15, spf, wd, L), **remaining_case_terms(p, H15)}
    assert all(0 <= v <= 1 for v in vals.values())
    terms = tw1bsf_upper(p, H15, spf, wd, L)
    parts = [v for k, v in terms.items() if k != "total"]
    assert terms["total"] == pytest.approx(math.fsum(parts))
    b = link_bers(p)
    P = [bler_upper(x, H15) for x in (b.p12, b.p1r, b.p2r, b.pr2)]
    assert terms["P_IIc"] == pytest.approx(P[0] * P[1] * P[2] * (1 - P[3]))


def test_symmetric_links_make_iia_and_iib_equal():
    p, spf, wd = _setup(H15, 6.0)
    L = ReliabilityDesign.from_params(p).L
    assert theorem3_case_iia(p, H15, spf, wd, L)["ub_err_IIa"] == pytest.approx(
        corollary_case_iib(p, H15, spf, wd, L)["ub_err_IIb"], rel=1e-12)


def test_composite_bounds_clipped():
    p, spf, wd = _setup(make_code("bch-127-113"), 1.0)
    assert twsdf_upper(p, make_code("bch-127-113"), wd) <= 1.0


@pytest.mark.parametrize("db", [10.0, 14.0, 18.0])
def test_bounds_approach_asymptotic_forms(db):
    p, spf, wd = _setup(H15, db)
    L = ReliabilityDesign.from_params(p).L
    a = asymptotic_forms(p, H15, spf)
    assert twsdf_upper(p, H15, wd) / a["sdf_asym"] == pytest.approx(1.0, abs=2e-3)
    assert tw1bsf_upper(p, H15, spf, wd, L)["total"] / a["sf_asym"] == pytest.approx(1.0, abs=0.15)


def test_bch_bounds_finite_over_grid():
    code = make_code("bch-127-113")
    spf, wd = compute_spf(code), compute_weight_distribution(code)
    for db in range(2, 9):
        p = NetworkParams.from_ebn0(db, code.rate)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DominanceWarning)
            rep = bound_report(p, code, spf, wd, "original", db)
        assert all(math.isfinite(v) for v in rep.values.values() if v is not None)


# ----------------------------------------------------------------------
# asymptotics and energy


def test_perfect_gains():
    assert perfect_gain(H7) == 7
    assert perfect_gain(H15) == 35
    assert gain_ratio(H15, perfect_spf(H15)) == Fraction(35)


def test_gain_increases_with_length():
    gains = [perfect_gain(make_code("hamming", n, n - m)) for n, m in ((7, 3), (15, 4), (31, 5), (63, 6), (127, 7))]
    assert all(a < b for a, b in zip(gains, gains[1:]))


def test_dominance_warning():
    p = NetworkParams(h=0.2, E=1.0)
    L = ReliabilityDesign.from_params(p, "original").L
    assert not dominance_holds(p, L)
    with pytest.warns(DominanceWarning):
        asymptotic_forms(p, H15, perfect_spf(H15), L)
    strong = NetworkParams(h=1.0, E=10.0)
    assert dominance_holds(strong, ReliabilityDesign.from_params(strong).L)


def test_decoding_energy():
    e = decoding_energy(0.1, 0.01, 0.05, epsilon=2.0)
    assert e["energy_sdf"] == pytest.approx(2 * 0.9 + 6 * 0.01 + 2 * 0.05)
    assert e["energy_sf"] == pytest.approx(2 * 0.9 + 6 * 0.01 + 6 * 0.05)
    # both relay links fine costs one decode; every other case adds the relay-path decodes
    assert e["energy_sf"] > e["energy_sdf"]


def test_case_probabilities_partition():
    cp = case_probabilities(NetworkParams.from_ebn0(4.0, H15.rate), H15)
    b = link_bers(NetworkParams.from_ebn0(4.0, H15.rate))
    P12 = bler_upper(b.p12, H15)
    total = sum(cp[k] for k in ("P_theta_I", "P_theta_IIa", "P_theta_IIb", "P_theta_IIc", "P_theta_III"))
    Pr2 = bler_upper(b.pr2, H15)
    P1r, P2r = bler_upper(b.p1r, H15), bler_upper(b.p2r, H15)
    # events with a direct error, excluding "relay fine and relay path fine"
    assert total == pytest.approx(P12 * (1 - (1 - P1r) * (1 - P2r) * (1 - Pr2)), rel=1e-12)


def test_reports_csv_roundtrip():
    p, spf, _ = _setup(H15, 5.0)
    wd = compute_weight_distribution(H15, w_max=H15.n)
    reps = [bound_report(p, H15, spf, wd, v, 5.0) for v in ("original", "redesigned")]
    text = reports_csv(reps, {"tool": "x"})
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    assert len(lines) == 3 and "sdf_upper" in lines[0]
    assert reps[0]["P12_up"] == pytest.approx(reps[0]["P12_lo"], rel=1e-12)
    with pytest.raises(ValueError):
        reports_csv([])
