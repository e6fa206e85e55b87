"""Exact multivariate polynomials over Q in the phase variables.

Variables are ordered ``(g1..gn, p1..pn)``. A monomial is stored as a packed
integer holding one 8-bit exponent per variable, so multiplying monomials is
integer addition. Coefficients are :class:`fractions.Fraction`.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import cached_property
from math import lcm
from numbers import Rational

import numpy as np

BITS = 8
MASK = (1 << BITS) - 1
MAX_EXPONENT = MASK


def pack(exps) -> int:
    key = 0
    for k, e in enumerate(exps):
        if e < 0 or e > MAX_EXPONENT:
            raise OverflowError(f"exponent {e} out of range")
        key |= e << (BITS * k)
    return key


def unpack(key: int, nvars: int) -> tuple:
    return tuple((key >> (BITS * k)) & MASK for k in range(nvars))


def _coerce(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    if isinstance(c, float):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    return Fraction(float(c))


class DimensionMismatch(ValueError):
    pass


class Poly:
    """Immutable polynomial with exact rational coefficients."""

    __slots__ = ("terms", "nvars", "__dict__")

    def __init__(self, terms: dict | None = None, nvars: int = 0):
        self.nvars = nvars
        self.terms = {k: v for k, v in (terms or {}).items() if v != 0}

    # -- constructors ------------------------------------------------------
    @classmethod
    def const(cls, c, nvars: int) -> "Poly":
        return cls({0: _coerce(c)}, nvars)

    @classmethod
    def var(cls, k: int, nvars: int) -> "Poly":
        if not 0 <= k < nvars:
            raise IndexError(k)
        return cls({1 << (BITS * k): Fraction(1)}, nvars)

    @classmethod
    def from_exponents(cls, items, nvars: int) -> "Poly":
        terms: dict = {}
        for exps, c in items:
            if len(exps) != nvars:
                raise DimensionMismatch("exponent vector has wrong length")
            k = pack(exps)
            terms[k] = terms.get(k, 0) + _coerce(c)
        return cls(terms, nvars)

    # -- basic protocol ----------------------------------------------------
    def _lift(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise DimensionMismatch(f"{self.nvars} vs {other.nvars} variables")
            return other
        return Poly.const(other, self.nvars)

    def __add__(self, other):
        other = self._lift(other)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, 0) + c
        return Poly(terms, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return Poly({k: -c for k, c in self.terms.items()}, self.nvars)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = _coerce(other)
            return Poly({k: v * c for k, v in self.terms.items()}, self.nvars)
        other = self._lift(other)
        terms: dict = {}
        get = terms.get
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = k1 + k2
                terms[k] = get(k, 0) + c1 * c2
        return Poly(terms, self.nvars)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Poly):
            raise TypeError("polynomial division is not supported; use divmod_phi1")
        return self * (1 / _coerce(other))

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative power")
        out = Poly.const(1, self.nvars)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        if self.is_zero():
            return other == 0
        return self.terms == {0: _coerce(other)}

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self):
        return f"Poly({self.to_text()!r}, nvars={self.nvars})"

    # -- structure ---------------------------------------------------------
    def exponents(self):
        """Iterate over (exponent tuple, coefficient) pairs in canonical order."""
        items = [(unpack(k, self.nvars), c) for k, c in self.terms.items()]
        items.sort(key=lambda t: t[0])
        return items

    @cached_property
    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(unpack(k, self.nvars)) for k in self.terms)

    def diff(self, k: int) -> "Poly":
        shift = BITS * k
        unit = 1 << shift
        terms = {}
        for key, c in self.terms.items():
            e = (key >> shift) & MASK
            if e:
                terms[key - unit] = c * e
        return Poly(terms, self.nvars)

    @cached_property
    def gradient(self) -> tuple:
        return tuple(self.diff(k) for k in range(self.nvars))

    # -- evaluation --------------------------------------------------------
    def __call__(self, x):
        """Evaluate at a point; exact if the point is rational."""
        x = list(x)
        if len(x) != self.nvars:
            raise DimensionMismatch("point has wrong dimension")
        if x and all(isinstance(v, (int, Fraction)) for v in x):
            return self.eval_exact(x)
        return self.eval_float(np.asarray(x, dtype=float))

    @cached_property
    def _compiled(self):
        items = self.exponents()
        E = np.array([e for e, _ in items], dtype=float).reshape(len(items), self.nvars)
        c = np.array([float(v) for _, v in items])
        return E, c

    def eval_float(self, x: np.ndarray) -> np.ndarray | float:
        """Float evaluation; ``x`` may be a single point or an (N, nvars) stack."""
        E, c = self._compiled
        if not len(c):
            return 0.0 if np.ndim(x) == 1 else np.zeros(np.shape(x)[0])
        x = np.asarray(x, dtype=float)
        mono = np.prod(x[..., None, :] ** E, axis=-1)
        return mono @ c

    @cached_property
    def _integer_form(self):
        """(scale, [(coeff_int, degree, ((var, exp), ...)), ...])."""
        den = 1
        for c in self.terms.values():
            den = lcm(den, c.denominator)
        rows = []
        for exps, c in self.exponents():
            factors = tuple((k, e) for k, e in enumerate(exps) if e)
            rows.append((int(c * den), sum(exps), factors))
        return den, rows

    def eval_exact(self, x) -> Fraction:
        """Exact value at a rational point using integer arithmetic only."""
        if not self.terms:
            return Fraction(0)
        xs = [Fraction(v) for v in x]
        L = 1
        for v in xs:
            L = lcm(L, v.denominator)
        X = [v.numerator * (L // v.denominator) for v in xs]
        den, rows = self._integer_form
        D = self.degree
        Lpow = [1]
        for _ in range(D):
            Lpow.append(Lpow[-1] * L)
        cache: dict = {}
        total = 0
        for coeff, deg, factors in rows:
            t = coeff * Lpow[D - deg]
            for k, e in factors:
                key = (k, e)
                pw = cache.get(key)
                if pw is None:
                    pw = X[k] ** e
                    cache[key] = pw
                t *= pw
            total += t
        return Fraction(total, den * Lpow[D])

    def vanishes_at(self, x) -> bool:
        return self.eval_exact(x) == 0

    # -- text form ---------------------------------------------------------
    def to_text(self) -> str:
        """Canonical text: ``coeff*g1^a1*...*pn^bn`` terms sorted by exponents."""
        if not self.terms:
            return "0"
        n = self.nvars // 2
        names = [f"g{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)]
        parts = []
        for exps, c in self.exponents():
            mono = "*".join(names[k] if e == 1 else f"{names[k]}^{e}" for k, e in enumerate(exps) if e)
            parts.append(f"{c}*{mono}" if mono else f"{c}")
        return " + ".join(parts)

    @classmethod
    def parse(cls, text: str, nvars: int) -> "Poly":
        """Inverse of :meth:`to_text`."""
        text = text.strip()
        if text == "0":
            return cls({}, nvars)
        n = nvars // 2
        terms: dict = {}
        for part in text.split(" + "):
            factors = part.split("*")
            coeff = Fraction(factors[0])
            exps = [0] * nvars
            for f in factors[1:]:
                m = re.fullmatch(r"([gp])(\d+)(?:\^(\d+))?", f)
                if m is None:
                    raise ValueError(f"bad factor {f!r}")
                k = int(m.group(2)) - 1 + (n if m.group(1) == "p" else 0)
                exps[k] += int(m.group(3) or 1)
            key = pack(exps)
            terms[key] = terms.get(key, 0) + coeff
        return cls(terms, nvars)


class PhaseVars:
    """Coordinate polynomials for R^{2n}; ``V.g[i]`` and ``V.p[i]`` are 0-based."""

    def __init__(self, n: int):
        self.n = n
        self.nvars = 2 * n
        self.g = [Poly.var(i, 2 * n) for i in range(n)]
        self.p = [Poly.var(n + i, 2 * n) for i in range(n)]

    def const(self, c) -> Poly:
        return Poly.const(c, self.nvars)

    def zero(self) -> Poly:
        return Poly({}, self.nvars)

    @cached_property
    def phi1(self) -> Poly:
        return sum((g * g for g in self.g), self.zero())

    @cached_property
    def phi2(self) -> Poly:
        return sum((p * g for p, g in zip(self.p, self.g)), self.zero())


def divmod_phi1(poly: Poly) -> tuple:
    """Divide by phi1 = g1^2 + ... + gn^2; return (quotient, remainder).

    The remainder has degree at most one in g1, so it vanishes iff phi1
    divides the input.
    """
    n = poly.nvars // 2
    unit1_sq = 2
    others = [(1 << (BITS * k)) * 2 for k in range(1, n)]  # g_k^2 keys
    rem = dict(poly.terms)
    quot: dict = {}
    while True:
        keys = [k for k in rem if (k & MASK) >= 2]
        if not keys:
            break
        for key in keys:
            c = rem.pop(key, 0)
            if c == 0:
                continue
            q = key - unit1_sq
            quot[q] = quot.get(q, 0) + c
            for o in others:
                k2 = q + o
                rem[k2] = rem.get(k2, 0) - c
    return Poly(quot, poly.nvars), Poly(rem, poly.nvars)
