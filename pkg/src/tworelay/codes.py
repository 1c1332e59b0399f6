"""Binary Hamming and narrow-sense BCH codes with hard decoders.

Codeword vectors are ``uint8`` arrays of length ``n``.  Position ``i`` holds the
coefficient of ``x^(n-1-i)``, so the systematic encoder puts the message in
positions ``0..k-1`` and the parity bits after it.  Batched routines take a
2-D array with one word per row.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from functools import lru_cache
from dataclasses import dataclass, field as dc_field

import numpy as np

from .gf import PRIMITIVE_POLYS, GF2m, field, poly_mod_gf2, poly_mul_gf2

HAMMING_PARAMS = {(7, 4), (15, 11), (31, 26), (63, 57), (127, 120)}

ENUM_LIMIT = 10**9
SPF_LIMIT = 10**8
CODEBOOK_LIMIT = 1 << 24


class CodeParameterError(ValueError):
    """Unsupported or inconsistent code parameters."""


class EnumerationTooLarge(ValueError):
    """An exhaustive enumeration exceeds its feasibility guard."""


@dataclass(frozen=True, eq=False)
class BlockCode:
    family: str
    n: int
    k: int
    t: int
    m: int
    generator: int  # generator polynomial, bit i = coefficient of x^i
    gf: GF2m = dc_field(repr=False)
    parity_matrix: np.ndarray = dc_field(repr=False)  # k x (n-k), systematic G = [I | P]

    @property
    def d_min(self) -> int:
        return 2 * self.t + 1

    @property
    def name(self) -> str:
        return f"{self.family}-{self.n}-{self.k}"

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def parity_positions(self) -> range:
        return range(self.k, self.n)

    @property
    def is_perfect(self) -> bool:
        sphere = sum(math.comb(self.n, i) for i in range(self.t + 1))
        return sphere * (1 << self.k) == 1 << self.n

    @property
    def generator_polynomial(self) -> np.ndarray:
        """Generator coefficients, highest degree first."""
        deg = self.n - self.k
        return np.array([(self.generator >> (deg - i)) & 1 for i in range(deg + 1)], dtype=np.uint8)

    def __repr__(self) -> str:
        return f"BlockCode({self.name}, t={self.t})"


def _bch_generator(gf: GF2m, t: int) -> int:
    for tt, _, g in _bch_table(gf.m):
        if tt == t:
            return g
    raise CodeParameterError(f"designed distance {2 * t + 1} exceeds n={gf.order}")


@lru_cache(maxsize=None)
def _bch_table(m: int) -> tuple[tuple[int, int, int], ...]:
    """(t, k, generator) of the narrow-sense BCH codes of length 2^m - 1, t ascending."""
    gf = field(m)
    n = gf.order
    seen: set[int] = set()
    g = 1
    rows = []
    for t in range(1, n // 2 + 1):
        for e in (2 * t - 1, 2 * t):
            mp = gf.minimal_polynomial(e)
            if mp not in seen:
                seen.add(mp)
                g = poly_mul_gf2(g, mp)
        k = n - (g.bit_length() - 1)
        if k < 1:
            break
        rows.append((t, k, g))
    return tuple(rows)


def _systematic_parity(n: int, k: int, g: int) -> np.ndarray:
    deg = n - k
    P = np.zeros((k, deg), dtype=np.uint8)
    for i in range(k):
        # message bit i multiplies x^(k-1-i); shifted by x^(n-k)
        rem = poly_mod_gf2(1 << (n - 1 - i), g)
        # parity positions k..n-1 hold x^(n-k-1)..x^0
        for j in range(deg):
            P[i, j] = (rem >> (deg - 1 - j)) & 1
    P.setflags(write=False)
    return P


def parse_code_name(name: str) -> tuple[str, int, int]:
    """``"bch-15-7"`` -> ``("bch", 15, 7)``."""
    try:
        family, n, k = name.strip().lower().split("-")
        return family, int(n), int(k)
    except ValueError:
        raise CodeParameterError(f"code name {name!r} is not of the form family-n-k") from None


def make_code(family: str, n: int | None = None, k: int | None = None) -> BlockCode:
    """Build a Hamming or narrow-sense binary BCH code.

    ``family`` may also be a full name such as ``"hamming-15-11"``.
    """
    if n is None and k is None:
        family, n, k = parse_code_name(family)
    family = family.lower()
    if family not in ("hamming", "bch"):
        raise CodeParameterError(f"unknown code family {family!r}")
    if n is None or k is None or n < 3 or k < 1 or k >= n:
        raise CodeParameterError(f"invalid code length/dimension n={n}, k={k}")
    m = (n + 1).bit_length() - 1
    if (1 << m) - 1 != n:
        raise CodeParameterError(f"n={n} is not of the form 2^m - 1")
    if family == "hamming" and (n, k) not in HAMMING_PARAMS:
        raise CodeParameterError(
            f"unsupported Hamming code ({n},{k}); expected one of {sorted(HAMMING_PARAMS)}"
        )
    try:
        gf = field(m)
    except ValueError as exc:
        raise CodeParameterError(str(exc)) from None

    # largest designed t that still yields dimension k
    best = None
    for tt, dim, g in _bch_table(m):
        if dim == k:
            best = (tt, g)
        elif dim < k:
            break
    if best is None:
        raise CodeParameterError(f"({n},{k}) is not a narrow-sense binary BCH code")
    t, g = best
    if family == "hamming" and t != 1:
        raise CodeParameterError(f"({n},{k}) is not a single-error-correcting code")
    return BlockCode(family, n, k, t, m, g, gf, _systematic_parity(n, k, g))


def supported_codes(max_spf_words: int | None = None) -> list[BlockCode]:
    """Every constructible code, BCH codes listed once per distinct (n, k).

    With ``max_spf_words`` only codes with C(n, t+1) at most that value are
    returned.
    """
    out = []
    for m in sorted(PRIMITIVE_POLYS):
        n = (1 << m) - 1
        by_k: dict[int, int] = {}
        for t, k, _ in _bch_table(m):
            by_k[k] = t  # largest designed t per dimension
        for k, t in sorted(by_k.items(), reverse=True):
            if max_spf_words is None or math.comb(n, t + 1) <= max_spf_words:
                out.append(make_code("bch", n, k))
    out.extend(make_code("hamming", n, k) for n, k in sorted(HAMMING_PARAMS))
    return out


# ----------------------------------------------------------------------
# encoding


def encode_batch(code: BlockCode, messages: np.ndarray) -> np.ndarray:
    msgs = np.asarray(messages, dtype=np.uint8)
    if msgs.ndim != 2 or msgs.shape[1] != code.k:
        raise ValueError(f"messages must have shape (N, {code.k}), got {msgs.shape}")
    parity = (msgs.astype(np.float32) @ code.parity_matrix.astype(np.float32)).astype(np.int64) & 1
    return np.concatenate([msgs, parity.astype(np.uint8)], axis=1)


def encode(code: BlockCode, message) -> np.ndarray:
    msg = np.asarray(message, dtype=np.uint8)
    if msg.shape != (code.k,):
        raise ValueError(f"message length {msg.size} != k={code.k}")
    return encode_batch(code, msg[None, :])[0]


# ----------------------------------------------------------------------
# syndromes and Berlekamp-Massey


def _syndrome_columns(code: BlockCode) -> np.ndarray:
    """(2t, n) table of alpha^(j * deg(i)) for j = 1..2t."""
    cached = _COLUMN_CACHE.get(id(code))
    if cached is not None:
        return cached[0]
    deg = code.n - 1 - np.arange(code.n)
    cols = np.stack([code.gf.alpha_pow(j * deg) for j in range(1, 2 * code.t + 1)])
    bits = np.zeros((code.n, 2 * code.t * code.m), dtype=np.float32)
    for j in range(2 * code.t):
        for b in range(code.m):
            bits[:, j * code.m + b] = (cols[j] >> b) & 1
    _COLUMN_CACHE[id(code)] = (cols, bits, code)
    return cols


_COLUMN_CACHE: dict[int, tuple] = {}


def syndromes(code: BlockCode, words: np.ndarray) -> np.ndarray:
    """Syndromes S_1..S_2t over GF(2^m) for each row, shape (N, 2t)."""
    words = np.atleast_2d(words)
    _syndrome_columns(code)
    bits = _COLUMN_CACHE[id(code)][1]
    acc = (words.astype(np.float32) @ bits).astype(np.int64) & 1
    acc = acc.reshape(len(words), 2 * code.t, code.m)
    weights = 1 << np.arange(code.m, dtype=np.int64)
    return acc @ weights


def berlekamp_massey(gf: GF2m, S: np.ndarray, t: int) -> tuple[np.ndarray, np.ndarray]:
    """Error-locator synthesis for a batch of syndrome rows.

    Returns ``(C, L)``: locator coefficients (lowest degree first, width 2t+1)
    and LFSR lengths.
    """
    N = S.shape[0]
    width = 2 * t + 1
    C = np.zeros((N, width), dtype=np.int64)
    B = np.zeros((N, width), dtype=np.int64)
    C[:, 0] = 1
    B[:, 0] = 1
    L = np.zeros(N, dtype=np.int64)
    shift = np.ones(N, dtype=np.int64)
    b = np.ones(N, dtype=np.int64)
    cols = np.arange(width)
    for r in range(2 * t):
        d = S[:, r].copy()
        for i in range(1, r + 1):
            d ^= gf.mul(C[:, i], S[:, r - i])
        nz = d != 0
        if not nz.any():
            shift += 1
            continue
        coef = np.where(nz, gf.div(d, np.where(nz, b, 1)), 0)
        src = cols[None, :] - shift[:, None]
        Bs = np.where(src >= 0, np.take_along_axis(B, np.clip(src, 0, width - 1), axis=1), 0)
        newC = C ^ gf.mul(coef[:, None], Bs)
        grow = nz & (2 * L <= r)
        B = np.where(grow[:, None], C, B)
        b = np.where(grow, d, b)
        L = np.where(grow, r + 1 - L, L)
        shift = np.where(grow, 1, shift + 1)
        C = np.where(nz[:, None], newC, C)
    return C, L


def chien_search(code: BlockCode, C: np.ndarray) -> np.ndarray:
    """Boolean (N, n) mask of positions whose locator evaluates to zero."""
    gf = code.gf
    deg = code.n - 1 - np.arange(code.n)
    acc = np.zeros((C.shape[0], code.n), dtype=np.int64)
    for j in range(C.shape[1]):
        cj = C[:, j]
        term = gf.exp[(gf.log[cj][:, None] + np.mod(-j * deg, gf.order)[None, :]) % gf.order]
        acc ^= np.where(cj[:, None] != 0, term, 0)
    return acc == 0


DECODERS = ("bm", "bm-strict", "bdd")


def _max_degree(code: BlockCode, decoder: str) -> int:
    if decoder == "bm":
        return 2 * code.t
    if decoder in ("bm-strict", "bdd"):
        return code.t
    raise ValueError(f"unknown decoder {decoder!r}; expected one of {DECODERS}")


def _locate_errors(code: BlockCode, S: np.ndarray, max_degree: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Error-position masks and success flags from syndromes.

    A locator is accepted when its Chien roots are as many as its degree and
    the degree is at most ``max_degree`` (default ``t``).
    """
    if max_degree is None:
        max_degree = code.t
    N = S.shape[0]
    clean = ~S.any(axis=1)
    errs = np.zeros((N, code.n), dtype=bool)
    ok = clean.copy()
    todo = np.flatnonzero(~clean)
    if todo.size:
        C, L = berlekamp_massey(code.gf, S[todo], code.t)
        small = L <= max_degree
        roots = chien_search(code, C)
        nroots = roots.sum(axis=1)
        good = small & (nroots == L)
        errs[todo] = roots & good[:, None]
        ok[todo] = good
    return errs, ok


def decode_batch(code: BlockCode, received: np.ndarray, decoder: str = "bm"):
    """Hard-decode each row with Berlekamp-Massey + Chien search.

    Returns ``(words, ok)``.  ``ok`` is False where decoding failure was
    detected.  For ``bm`` and ``bm-strict`` failed rows hold the re-encoded
    first ``k`` received bits; for ``bdd`` they hold the received word.

    ``bm`` accepts any locator whose root count equals its degree, so a few
    weight-(t+1) patterns are corrected when 3 divides 2^m - 1.  ``bm-strict``
    and ``bdd`` also require degree <= t.
    """
    R = np.atleast_2d(np.asarray(received, dtype=np.uint8))
    if R.shape[1] != code.n:
        raise ValueError(f"received words must have length n={code.n}")
    S = syndromes(code, R)
    errs, ok = _locate_errors(code, S, _max_degree(code, decoder))
    out = R ^ errs.astype(np.uint8)
    check = np.flatnonzero(ok & errs.any(axis=1))
    if check.size:
        bad = syndromes(code, out[check]).any(axis=1)
        ok[check[bad]] = False
        out[check[bad]] = R[check[bad]]
    fail = np.flatnonzero(~ok)
    if decoder != "bdd" and fail.size:
        out[fail] = encode_batch(code, R[fail, : code.k])
    return out, ok


def bm_decode(code: BlockCode, received) -> np.ndarray:
    """Total decoder: BM/Chien, re-encoding the first k bits on failure."""
    r = np.asarray(received, dtype=np.uint8)
    if r.shape != (code.n,):
        raise ValueError(f"received length {r.size} != n={code.n}")
    return decode_batch(code, r[None, :], "bm")[0][0]


def bdd_decode(code: BlockCode, received) -> np.ndarray | None:
    """Bounded-distance decoder; ``None`` signals decoding failure."""
    r = np.asarray(received, dtype=np.uint8)
    if r.shape != (code.n,):
        raise ValueError(f"received length {r.size} != n={code.n}")
    words, ok = decode_batch(code, r[None, :], "bdd")
    return words[0] if ok[0] else None


def in_code(code: BlockCode, words) -> np.ndarray:
    return ~syndromes(code, np.atleast_2d(words)).any(axis=1)


# ----------------------------------------------------------------------
# weight distribution


@dataclass(frozen=True)
class WeightDistribution:
    entries: dict[int, int]
    w_max: int
    method: str

    def __getitem__(self, w: int) -> int:
        if w > self.w_max:
            raise KeyError(f"A_{w} beyond enumeration cutoff w_max={self.w_max}")
        return self.entries.get(w, 0)

    def as_array(self) -> np.ndarray:
        return np.array([self.entries.get(w, 0) for w in range(self.w_max + 1)], dtype=float)


def _combos(n: int, w: int, chunk: int = 1 << 18):
    it = itertools.combinations(range(n), w)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.array(block, dtype=np.int64).reshape(len(block), w)


def _span_weights(gen_rows: np.ndarray) -> np.ndarray:
    """Histogram of Hamming weights over the GF(2) span of ``gen_rows``."""
    r, n = gen_rows.shape
    hist = np.zeros(n + 1, dtype=np.int64)
    G = gen_rows.astype(np.float32)
    step = min(1 << r, 1 << 16)
    for start in range(0, 1 << r, step):
        idx = np.arange(start, start + step, dtype=np.int64)
        coeffs = ((idx[:, None] >> np.arange(r)) & 1).astype(np.float32)
        words = (coeffs @ G).astype(np.int64) & 1
        hist += np.bincount(words.sum(axis=1), minlength=n + 1)
    return hist


def _krawtchouk(n: int, w: int, j: int) -> int:
    return sum((-1) ** s * math.comb(j, s) * math.comb(n - j, w - s) for s in range(0, w + 1))


def compute_weight_distribution(code: BlockCode, w_max: int | None = None, method: str = "auto") -> WeightDistribution:
    """Exact A_w for w <= w_max.

    ``method`` is ``"codebook"`` (enumerate all 2^k codewords), ``"dual"``
    (enumerate the 2^(n-k) dual codewords and apply the MacWilliams
    identity), ``"patterns"`` (enumerate weight-w words and test syndromes) or
    ``"auto"``.
    """
    if w_max is None:
        w_max = 2 * code.t + 3
    w_max = min(w_max, code.n)
    if method == "auto":
        if (1 << code.k) <= CODEBOOK_LIMIT:
            method = "codebook"
        elif (1 << (code.n - code.k)) <= CODEBOOK_LIMIT:
            method = "dual"
        else:
            method = "patterns"

    if method == "codebook":
        G = np.concatenate([np.eye(code.k, dtype=np.uint8), code.parity_matrix], axis=1)
        hist = _span_weights(G)
        entries = {w: int(hist[w]) for w in range(w_max + 1) if hist[w]}
    elif method == "dual":
        H = np.concatenate([code.parity_matrix.T, np.eye(code.n - code.k, dtype=np.uint8)], axis=1)
        B = _span_weights(H)
        size = 1 << (code.n - code.k)
        entries = {}
        for w in range(w_max + 1):
            total = sum(int(B[j]) * _krawtchouk(code.n, w, j) for j in range(code.n + 1) if B[j])
            if total % size:
                raise ArithmeticError("MacWilliams transform produced a non-integer count")
            if total:
                entries[w] = total // size
    elif method == "patterns":
        for w in range(w_max + 1):
            if math.comb(code.n, w) > ENUM_LIMIT:
                raise EnumerationTooLarge(
                    f"C({code.n},{w}) = {math.comb(code.n, w)} patterns exceeds {ENUM_LIMIT}"
                )
        cols = _syndrome_columns(code)
        entries = {0: 1}
        for w in range(1, w_max + 1):
            count = 0
            for pos in _combos(code.n, w):
                S = np.bitwise_xor.reduce(cols[:, pos], axis=2)
                count += int((~S.any(axis=0)).sum())
            if count:
                entries[w] = count
    else:
        raise ValueError(f"unknown weight-distribution method {method!r}")
    return WeightDistribution(entries, w_max, method)


# ----------------------------------------------------------------------
# sphere partitioning function


@dataclass(frozen=True)
class Spf:
    """Decoded-codeword weights of all weight-(t+1) words, zero codeword sent.

    ``counts[0]`` tallies words the decoder maps back to the zero codeword
    (fallback events); ``failures`` tallies detected failures of a decoder
    without fallback.
    """

    code_name: str
    n: int
    t: int
    counts: dict[int, int]
    decoder_id: str
    failures: int = 0
    includes_w0: bool = True

    @property
    def total(self) -> int:
        return sum(self.counts.values()) + self.failures

    def __getitem__(self, w: int) -> int:
        return self.counts.get(w, 0)

    def wrong(self) -> dict[int, int]:
        """Counts for nonzero decoded weights only."""
        return {w: c for w, c in self.counts.items() if w > 0}


def perfect_spf(code: BlockCode) -> Spf:
    """SPF of a perfect code: every weight-(t+1) word sits in a weight-(2t+1) sphere."""
    if not code.is_perfect:
        raise CodeParameterError(f"{code.name} is not a perfect code")
    return Spf(code.name, code.n, code.t, {code.d_min: math.comb(code.n, code.t + 1)}, "bdd")


def _decode_patterns(code: BlockCode, pos: np.ndarray, max_degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Decoded weights and success flags for the error patterns in ``pos``."""
    t = code.t
    cols = _syndrome_columns(code)
    S = np.bitwise_xor.reduce(cols[:, pos], axis=2).T
    errs, ok = _locate_errors(code, S, max_degree)
    # corrected word must be a codeword
    if ok.any():
        corr = np.flatnonzero(ok)
        e = errs[corr].astype(np.float32)
        bits = _COLUMN_CACHE[id(code)][1]
        Se = (e @ bits).astype(np.int64) & 1
        Se = Se.reshape(len(corr), 2 * t, code.m) @ (1 << np.arange(code.m, dtype=np.int64))
        bad = (Se != S[corr]).any(axis=1)
        ok[corr[bad]] = False
    nerr = errs.sum(axis=1)
    overlap = np.take_along_axis(errs, pos, axis=1).sum(axis=1)
    return pos.shape[1] + nerr - 2 * overlap, ok


def _parity_rows(code: BlockCode) -> np.ndarray:
    n, k = code.n, code.k
    if n - k > 63:
        raise CodeParameterError("parity length above 63 bits is not supported for SPF")
    prow = (code.parity_matrix.astype(np.uint64) << np.arange(n - k - 1, -1, -1, dtype=np.uint64)).sum(
        axis=1, dtype=np.uint64
    )
    return np.concatenate([prow, np.zeros(1, dtype=np.uint64)])


def _fallback_weights(pos: np.ndarray, prow: np.ndarray, k: int) -> np.ndarray:
    """Weight of the re-encoded first k bits for each pattern row."""
    msg = pos < k
    par = np.bitwise_xor.reduce(np.where(msg, prow[np.where(msg, pos, k)], np.uint64(0)), axis=1)
    return msg.sum(axis=1) + np.bitwise_count(par).astype(np.int64)


def _orbit_representatives(n: int, w: int, chunk: int = 1 << 16):
    """Canonical w-subsets of Z_n under rotation, with their orbit sizes.

    Every orbit has a member containing 0; among those members the
    representative is the one with the smallest lexicographic key.
    """
    scale = n ** np.arange(w - 1, -1, -1, dtype=np.int64)
    for rest in _combos(n - 1, w - 1, chunk):
        P = np.concatenate([np.zeros((len(rest), 1), dtype=np.int64), rest + 1], axis=1)
        key = P @ scale
        best = key.copy()
        fixed = np.zeros(len(P), dtype=np.int64)
        for j in range(w):
            R = np.sort((P - P[:, j : j + 1]) % n, axis=1)
            rk = R @ scale
            best = np.minimum(best, rk)
            fixed += rk == key
        keep = best == key
        yield P[keep], n // fixed[keep]


def compute_spf(code: BlockCode, decoder: str = "bm", chunk: int = 1 << 16, method: str = "auto") -> Spf:
    """Decode every weight-(t+1) word and tabulate output weights.

    ``method="exhaustive"`` decodes all C(n, t+1) words.  ``"orbit"`` uses
    that the code is cyclic and the algebraic decoder commutes with cyclic
    shifts: only one word per rotation orbit is decoded, and the fallback
    weights of failing orbits (which depend on absolute positions) are
    evaluated for every member.  ``"auto"`` picks orbits above 10^5 words.
    """
    max_degree = _max_degree(code, decoder)
    n, t, k = code.n, code.t, code.k
    total = math.comb(n, t + 1)
    if total > SPF_LIMIT:
        raise EnumerationTooLarge(f"C({n},{t + 1}) = {total} exceeds {SPF_LIMIT}")
    if method == "auto":
        method = "orbit" if total > 10**5 else "exhaustive"
    if method not in ("orbit", "exhaustive"):
        raise ValueError(f"unknown SPF method {method!r}")
    prow = _parity_rows(code)

    hist = np.zeros(n + 1, dtype=np.int64)
    failures = 0
    if method == "exhaustive":
        for pos in _combos(n, t + 1, chunk):
            w_ok, ok = _decode_patterns(code, pos, max_degree)
            hist += np.bincount(w_ok[ok], minlength=n + 1)
            if decoder == "bdd":
                failures += int((~ok).sum())
            elif not ok.all():
                hist += np.bincount(_fallback_weights(pos[~ok], prow, k), minlength=n + 1)
    else:
        for reps, size in _orbit_representatives(n, t + 1, chunk):
            w_ok, ok = _decode_patterns(code, reps, max_degree)
            hist += np.bincount(w_ok[ok], weights=size[ok], minlength=n + 1).astype(np.int64)
            if decoder == "bdd":
                failures += int(size[~ok].sum())
                continue
            bad, bad_size = reps[~ok], size[~ok]
            # orbit members are the first `size` rotations of the representative
            for s in np.unique(bad_size):
                group = bad[bad_size == s]
                step = max(1, chunk // int(s))
                for a in range(0, len(group), step):
                    g = group[a : a + step]
                    members = (g[:, None, :] + np.arange(s)[None, :, None]) % n
                    hist += np.bincount(_fallback_weights(members.reshape(-1, t + 1), prow, k), minlength=n + 1)
    counts = {w: int(c) for w, c in enumerate(hist) if c}
    return Spf(code.name, n, t, counts, decoder, failures)


# ----------------------------------------------------------------------
# CSV export


def table_csv(rows: dict[int, int], meta: dict[str, object], extra: list[str] | None = None) -> str:
    buf = io.StringIO()
    for key, value in meta.items():
        buf.write(f"# {key}={value}\n")
    for line in extra or []:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["weight", "count"])
    for w in sorted(rows):
        writer.writerow([w, rows[w]])
    return buf.getvalue()


def spf_csv(code: BlockCode, spf: Spf) -> str:
    rows = dict(spf.counts)
    meta = {"code": code.name, "decoder": spf.decoder_id, "n": code.n, "t": code.t,
            "prim_poly": hex(code.gf.prim_poly)}
    extra = []
    if spf.decoder_id == "bdd":
        extra.append(f"failures={spf.failures}")
    extra.append(f"sum={spf.total}")
    extra.append(f"expected=C({code.n},{code.t + 1})={math.comb(code.n, code.t + 1)}")
    return table_csv(rows, meta, extra)


def weight_distribution_csv(code: BlockCode, wd: WeightDistribution) -> str:
    meta = {"code": code.name, "w_max": wd.w_max, "method": wd.method}
    return table_csv({w: wd[w] for w in range(wd.w_max + 1)}, meta)
