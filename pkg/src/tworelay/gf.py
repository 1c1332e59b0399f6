"""GF(2^m) arithmetic on log/antilog tables.

Field elements are integers in ``[0, 2^m)`` holding the polynomial-basis
coefficients.  All multiplicative helpers accept numpy arrays.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

# Default primitive polynomials, bit i = coefficient of x^i.
PRIMITIVE_POLYS = {
    2: 0b111,  # x^2 + x + 1
    3: 0b1011,  # x^3 + x + 1
    4: 0b10011,  # x^4 + x + 1
    5: 0b100101,  # x^5 + x^2 + 1
    6: 0b1000011,  # x^6 + x + 1
    7: 0b10001001,  # x^7 + x^3 + 1
    8: 0b100011101,  # x^8 + x^4 + x^3 + x^2 + 1
    9: 0b1000010001,  # x^9 + x^4 + 1
    10: 0b10000001001,  # x^10 + x^3 + 1
}


class GF2m:
    """Finite field GF(2^m) with precomputed exp/log tables."""

    def __init__(self, m: int, prim_poly: int | None = None):
        if prim_poly is None:
            if m not in PRIMITIVE_POLYS:
                raise ValueError(f"no default primitive polynomial for m={m}")
            prim_poly = PRIMITIVE_POLYS[m]
        self.m = m
        self.q = 1 << m
        self.order = self.q - 1
        self.prim_poly = prim_poly

        exp = np.zeros(2 * self.order, dtype=np.int64)
        log = np.zeros(self.q, dtype=np.int64)
        x = 1
        for i in range(self.order):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & self.q:
                x ^= prim_poly
        if x != 1 or len(set(exp[: self.order].tolist())) != self.order:
            raise ValueError(f"polynomial {prim_poly:#b} is not primitive for m={m}")
        exp[self.order :] = exp[: self.order]
        self.exp = exp
        self.log = log

    def __repr__(self) -> str:
        return f"GF2m(m={self.m}, prim_poly={self.prim_poly:#x})"

    def alpha_pow(self, e):
        """alpha**e for any integer exponent (array or scalar)."""
        return self.exp[np.mod(e, self.order)]

    def mul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self.exp[self.log[a] + self.log[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def div(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if np.any(b == 0):
            raise ZeroDivisionError("division by zero in GF(2^m)")
        out = self.exp[self.log[a] - self.log[b] + self.order]
        return np.where(a == 0, 0, out)

    def inv(self, a):
        return self.div(np.ones_like(np.asarray(a)), a)

    def power(self, a, e: int):
        a = np.asarray(a, dtype=np.int64)
        out = self.exp[np.mod(self.log[a] * e, self.order)]
        if e == 0:
            return np.ones_like(out)
        return np.where(a == 0, 0, out)

    def minimal_polynomial(self, e: int) -> int:
        """Minimal polynomial of alpha**e over GF(2), as a bit mask."""
        coset = cyclotomic_coset(e, self.order)
        # prod (x - alpha^c) with coefficients in GF(2^m), lowest degree first
        poly = [1]
        for c in coset:
            root = int(self.alpha_pow(c))
            nxt = [0] * (len(poly) + 1)
            for i, coef in enumerate(poly):
                nxt[i + 1] ^= coef
                nxt[i] ^= int(self.mul(coef, root))
            poly = nxt
        if any(c not in (0, 1) for c in poly):
            raise ArithmeticError("minimal polynomial has non-binary coefficients")
        return sum(c << i for i, c in enumerate(poly))


def cyclotomic_coset(e: int, order: int) -> list[int]:
    e %= order
    coset = [e]
    x = (2 * e) % order
    while x != e:
        coset.append(x)
        x = (2 * x) % order
    return coset


@lru_cache(maxsize=None)
def field(m: int) -> GF2m:
    """Shared immutable field instance for the default primitive polynomial."""
    return GF2m(m)


def poly_mul_gf2(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_mod_gf2(a: int, mod: int) -> int:
    dm = mod.bit_length() - 1
    while a and a.bit_length() - 1 >= dm:
        a ^= mod << (a.bit_length() - 1 - dm)
    return a
