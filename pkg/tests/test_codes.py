import itertools
import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tworelay.codes import (
    DECODERS,
    CodeParameterError,
    EnumerationTooLarge,
    bdd_decode,
    bm_decode,
    compute_spf,
    compute_weight_distribution,
    decode_batch,
    encode,
    encode_batch,
    in_code,
    make_code,
    perfect_spf,
    spf_csv,
    supported_codes,
    syndromes,
)
from tworelay.gf import GF2m, field, poly_mod_gf2, poly_mul_gf2

# reference SPF columns for the t=2 BCH codes, keyed by decoded weight (0 then d_min, d_min+1, ...)
REFERENCE_SPF = {
    15: [36, 281, 89, 26, 11, 9, 3],
    31: [71, 2123, 540, 690, 616, 280, 126, 41, 7, 1],
    63: [170, 19316, 2557, 3600, 4102, 3916, 3550, 1594, 735, 136, 31, 4],
    127: [164, 161664, 5399, 15538, 25178, 32427, 34044, 28283, 17866, 8791, 3277, 656, 88],
    255: [336, 1351834, 19172, 49781, 103059, 183177, 249573, 266769, 222982, 156460, 83028, 31614,
          10672, 2387, 291],
}
BCH_T2 = {15: 7, 31: 21, 63: 51, 127: 113, 255: 239}


def table_counts(col):
    return {0: col[0], **{5 + i: c for i, c in enumerate(col[1:])}}


# ----------------------------------------------------------------------
# GF(2^m)


@pytest.mark.parametrize("m", range(2, 11))
def test_field_tables_are_consistent(m):
    gf = field(m)
    x = np.arange(1, gf.q)
    assert np.array_equal(gf.exp[gf.log[x]], x)
    assert np.all(gf.mul(x, gf.inv(x)) == 1)
    assert gf.alpha_pow(gf.order) == 1


def test_nonprimitive_polynomial_rejected():
    with pytest.raises(ValueError):
        GF2m(4, 0b11111)  # x^4+x^3+x^2+x+1 has order 5


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 10), st.data())
def test_field_axioms(m, data):
    gf = field(m)
    a, b, c = (data.draw(st.integers(0, gf.q - 1)) for _ in range(3))
    assert gf.mul(a, b) == gf.mul(b, a)
    assert gf.mul(a, gf.mul(b, c)) == gf.mul(gf.mul(a, b), c)
    assert gf.mul(a, b ^ c) == gf.mul(a, b) ^ gf.mul(a, c)
    if b:
        assert gf.mul(gf.div(a, b), b) == a


def test_gf16_known_products():
    gf = field(4)  # x^4 + x + 1
    assert int(gf.alpha_pow(4)) == 0b0011
    assert int(gf.mul(0b1000, 0b0010)) == 0b0011


def test_poly_helpers():
    a, b = 0b1011, 0b111
    assert poly_mod_gf2(poly_mul_gf2(a, b), a) == 0
    assert poly_mul_gf2(0b11, 0b11) == 0b101


# ----------------------------------------------------------------------
# construction


@pytest.mark.parametrize(
    "name,t",
    [("hamming-7-4", 1), ("hamming-15-11", 1), ("bch-15-7", 2), ("bch-15-5", 3), ("bch-31-21", 2),
     ("bch-63-51", 2), ("bch-127-113", 2), ("bch-255-239", 2)],
)
def test_make_code_parameters(name, t):
    code = make_code(name)
    assert code.t == t and code.d_min == 2 * t + 1
    assert code.name == name


@pytest.mark.parametrize("bad", ["bch-16-7", "bch-15-8", "hamming-15-7", "golay-23-12", "bch15"])
def test_make_code_rejects(bad):
    with pytest.raises(CodeParameterError):
        make_code(bad)


def test_perfect_flags():
    assert make_code("hamming-7-4").is_perfect
    assert make_code("hamming-15-11").is_perfect
    assert not make_code("bch-15-7").is_perfect


@pytest.mark.parametrize("name", ["hamming-15-11", "bch-15-7", "bch-31-21", "bch-63-51"])
def test_codewords_are_cyclic(name):
    code = make_code(name)
    rng = np.random.default_rng(1)
    words = encode_batch(code, rng.integers(0, 2, (50, code.k)))
    assert in_code(code, words).all()
    assert in_code(code, np.roll(words, 1, axis=1)).all()


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(["hamming-7-4", "hamming-15-11", "bch-15-7", "bch-31-21", "bch-63-51"]), st.data())
def test_encoding_is_linear(name, data):
    code = make_code(name)
    a = np.array(data.draw(st.lists(st.integers(0, 1), min_size=code.k, max_size=code.k)), dtype=np.uint8)
    b = np.array(data.draw(st.lists(st.integers(0, 1), min_size=code.k, max_size=code.k)), dtype=np.uint8)
    assert np.array_equal(encode(code, a) ^ encode(code, b), encode(code, a ^ b))
    assert np.array_equal(encode(code, a)[: code.k], a)


# ----------------------------------------------------------------------
# decoding


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(["hamming-15-11", "bch-15-7", "bch-31-21", "bch-63-51", "bch-127-113"]), st.data())
def test_decoders_correct_up_to_t(name, data):
    code = make_code(name)
    msg = np.array(data.draw(st.lists(st.integers(0, 1), min_size=code.k, max_size=code.k)), dtype=np.uint8)
    c = encode(code, msg)
    w = data.draw(st.integers(0, code.t))
    pos = data.draw(st.lists(st.integers(0, code.n - 1), min_size=w, max_size=w, unique=True))
    r = c.copy()
    r[pos] ^= 1
    for dec in DECODERS:
        out, ok = decode_batch(code, r[None, :], dec)
        assert ok[0] and np.array_equal(out[0], c)
    assert np.array_equal(bm_decode(code, r), c)
    assert np.array_equal(bdd_decode(code, r), c)


def test_bm_fallback_reencodes_message_bits():
    # three errors in parity positions: detected failure, the fallback gives back the zero codeword
    code = make_code("bch-15-7")
    found = 0
    for pos in itertools.combinations(range(code.k, code.n), 3):
        r = np.zeros(code.n, dtype=np.uint8)
        r[list(pos)] = 1
        out, ok = decode_batch(code, r[None, :], "bm")
        if not ok[0]:
            assert not out.any()
            assert bdd_decode(code, r) is None
            found += 1
    assert found > 0


def test_decode_batch_shape_check():
    code = make_code("bch-15-7")
    with pytest.raises(ValueError):
        decode_batch(code, np.zeros((2, 14), dtype=np.uint8))
    with pytest.raises(ValueError):
        decode_batch(code, np.zeros((1, 15), dtype=np.uint8), "ml")


def test_syndromes_of_codewords_vanish():
    code = make_code("bch-31-21")
    rng = np.random.default_rng(5)
    assert not syndromes(code, encode_batch(code, rng.integers(0, 2, (20, code.k)))).any()


# ----------------------------------------------------------------------
# weight distribution


def brute_weights(code, w_max):
    hist = np.zeros(code.n + 1, dtype=np.int64)
    for msg in itertools.product([0, 1], repeat=code.k):
        hist[int(encode(code, np.array(msg)).sum())] += 1
    return {w: int(hist[w]) for w in range(min(w_max, code.n) + 1) if hist[w]}


@pytest.mark.parametrize("name", ["hamming-7-4", "hamming-15-11", "bch-15-7", "bch-15-5"])
@pytest.mark.parametrize("method", ["codebook", "dual", "patterns"])
def test_weight_distribution_methods_agree_with_brute_force(name, method):
    code = make_code(name)
    wd = compute_weight_distribution(code, w_max=8, method=method)
    assert wd.entries == brute_weights(code, 8)


@pytest.mark.parametrize("n,k", [(7, 4), (15, 11), (31, 26), (63, 57), (127, 120)])
def test_hamming_low_weights_closed_form(n, k):
    # A_3 = n(n-1)/6 and A_4 = n(n-1)(n-3)/24 for Hamming codes
    wd = compute_weight_distribution(make_code("hamming", n, k), w_max=4)
    assert wd[0] == 1 and wd[1] == wd[2] == 0
    assert wd[3] == n * (n - 1) // 6
    assert wd[4] == n * (n - 1) * (n - 3) // 24


def test_weight_distribution_cutoff_raises():
    wd = compute_weight_distribution(make_code("bch-15-7"), w_max=5)
    assert wd[5] == 18
    with pytest.raises(KeyError):
        wd[6]


def test_patterns_method_respects_limit(monkeypatch):
    import tworelay.codes as codes

    monkeypatch.setattr(codes, "ENUM_LIMIT", 100)
    with pytest.raises(EnumerationTooLarge):
        compute_weight_distribution(make_code("bch-31-21"), w_max=5, method="patterns")


# ----------------------------------------------------------------------
# sphere partitioning function


@pytest.mark.parametrize("n", [15, 31, 63, 127])
def test_spf_reproduces_reference_columns(n):
    spf = compute_spf(make_code("bch", n, BCH_T2[n]), "bm")
    assert spf.counts == table_counts(REFERENCE_SPF[n])
    assert spf.total == math.comb(n, 3)


def test_spf_reference_n255():
    spf = compute_spf(make_code("bch-255-239"), "bm")
    assert spf.counts == table_counts(REFERENCE_SPF[255])


def test_spf_n15_runtime():
    start = time.perf_counter()
    compute_spf(make_code("bch-15-7"), "bm")
    assert time.perf_counter() - start < 1.0


@pytest.mark.parametrize("name", ["hamming-15-11", "bch-15-7", "bch-31-16", "bch-63-51", "bch-63-45"])
@pytest.mark.parametrize("decoder", DECODERS)
def test_spf_orbit_matches_exhaustive(name, decoder):
    code = make_code(name)
    assert compute_spf(code, decoder, method="orbit") == compute_spf(code, decoder, method="exhaustive")


def test_spf_bdd_counts_failures():
    code = make_code("bch-15-7")
    spf = compute_spf(code, "bdd")
    assert spf.failures > 0 and 0 not in spf.counts
    assert spf.total == 455
    assert "failures=" in spf_csv(code, spf)


def test_perfect_spf_matches_enumeration():
    for name in ("hamming-7-4", "hamming-15-11", "hamming-31-26"):
        code = make_code(name)
        assert perfect_spf(code).counts == compute_spf(code, "bdd").counts
    with pytest.raises(CodeParameterError):
        perfect_spf(make_code("bch-15-7"))


def test_spf_limit(monkeypatch):
    import tworelay.codes as codes

    monkeypatch.setattr(codes, "SPF_LIMIT", 1000)
    with pytest.raises(EnumerationTooLarge):
        compute_spf(make_code("bch-31-21"))


def test_spf_csv_footer():
    code = make_code("bch-15-7")
    text = spf_csv(code, compute_spf(code))
    assert "# sum=455" in text and "# expected=C(15,3)=455" in text
    assert "5,281" in text.splitlines()


def test_supported_codes_listing():
    names = [c.name for c in supported_codes(10**6)]
    assert "bch-15-7" in names and "hamming-15-11" in names and "bch-127-113" in names
    assert len(names) == len(set(names))
    assert all(math.comb(c.n, c.t + 1) <= 10**6 for c in supported_codes(10**6))
