"""
Exact arithmetic in Z[v, v^-1].

>>> p = LaurentPoly({1: 1, -1: 1})
>>> print(p * p)
1:-2 2:0 1:2
>>> print(bar(LaurentPoly({2: 1, -1: 3})))
1:-2 3:1
"""

from __future__ import annotations

from typing import Iterable, Mapping

__all__ = [
    "CoefficientOverflowError", "LaurentPoly", "ZERO", "ONE", "V", "VINV",
    "QC", "arith", "bar", "in_lattice", "parse_poly",
]

# coefficients are held to signed 64-bit range
COEFF_MAX = (1 << 63) - 1


class CoefficientOverflowError(OverflowError):
    """A coefficient left the signed 64-bit range."""


def _check(c: int) -> int:
    if c > COEFF_MAX or c < -COEFF_MAX - 1:
        raise CoefficientOverflowError(f"coefficient {c} exceeds 64-bit range")
    return c


class LaurentPoly:
    """
    An immutable Laurent polynomial in `v` with integer coefficients.

    Terms are kept as an exponent -> coefficient map, sorted by exponent,
    with no zero coefficients.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        if isinstance(terms, Mapping):
            items = terms.items()
        else:
            items = terms
        acc: dict[int, int] = {}
        for e, c in items:
            acc[e] = acc.get(e, 0) + c
        self._terms = {e: _check(acc[e]) for e in sorted(acc) if acc[e]}
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict[int, int]) -> LaurentPoly:
        # trusted constructor: terms already sorted and nonzero
        p = object.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def const(cls, c: int) -> LaurentPoly:
        return cls._raw({0: _check(c)} if c else {})

    @classmethod
    def monomial(cls, exp: int, c: int = 1) -> LaurentPoly:
        return cls._raw({exp: _check(c)} if c else {})

    @property
    def terms(self) -> dict[int, int]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = LaurentPoly.const(other)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def coeff(self, exp: int) -> int:
        return self._terms.get(exp, 0)

    def min_exp(self) -> int | None:
        return next(iter(self._terms), None)

    def max_exp(self) -> int | None:
        return next(reversed(self._terms), None) if self._terms else None

    def _coerce(self, other) -> LaurentPoly:
        if isinstance(other, LaurentPoly):
            return other
        if isinstance(other, int):
            return LaurentPoly.const(other)
        return NotImplemented

    def __add__(self, other) -> LaurentPoly:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other._terms:
            return self
        if not self._terms:
            return other
        acc = dict(self._terms)
        for e, c in other._terms.items():
            acc[e] = acc.get(e, 0) + c
        return LaurentPoly._raw({e: _check(acc[e]) for e in sorted(acc) if acc[e]})

    __radd__ = __add__

    def __neg__(self) -> LaurentPoly:
        return LaurentPoly._raw({e: _check(-c) for e, c in self._terms.items()})

    def __sub__(self, other) -> LaurentPoly:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> LaurentPoly:
        return (-self) + other

    def __mul__(self, other) -> LaurentPoly:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self._terms or not other._terms:
            return ZERO
        acc: dict[int, int] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = e1 + e2
                acc[e] = acc.get(e, 0) + c1 * c2
        return LaurentPoly._raw({e: _check(acc[e]) for e in sorted(acc) if acc[e]})

    __rmul__ = __mul__

    def __pow__(self, n: int) -> LaurentPoly:
        if n < 0:
            raise ValueError("negative powers are not supported")
        out = ONE
        for _ in range(n):
            out = out * self
        return out

    def shift(self, k: int) -> LaurentPoly:
        """Multiply by v^k."""
        return LaurentPoly._raw({e + k: c for e, c in self._terms.items()})

    def bar(self) -> LaurentPoly:
        return LaurentPoly._raw({-e: c for e, c in reversed(self._terms.items())})

    def in_lattice(self, k: int = 0) -> bool:
        top = self.max_exp()
        return top is None or top <= -k

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        return " ".join(f"{c}:{e}" for e, c in self._terms.items())

    def __repr__(self) -> str:
        return f"LaurentPoly({self._terms!r})"

    def pretty(self) -> str:
        """Human-readable form, e.g. `v^2 + 2 + v^-2`."""
        if not self._terms:
            return "0"
        out = []
        for e, c in reversed(self._terms.items()):
            mono = "" if e == 0 else ("v" if e == 1 else f"v^{e}")
            if not mono:
                s = str(abs(c))
            elif abs(c) == 1:
                s = mono
            else:
                s = f"{abs(c)}{mono}"
            sign = "-" if c < 0 else "+"
            out.append((sign, s))
        first_sign, first = out[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, s in out[1:]:
            text += f" {sign} {s}"
        return text


ZERO = LaurentPoly._raw({})
ONE = LaurentPoly._raw({0: 1})
V = LaurentPoly._raw({1: 1})
VINV = LaurentPoly._raw({-1: 1})
# the scalar [2] = v + v^-1
QC = LaurentPoly._raw({-1: 1, 1: 1})


def arith(p: LaurentPoly, q: LaurentPoly, kind: str) -> LaurentPoly:
    if kind == "add":
        return p + q
    if kind == "sub":
        return p - q
    if kind == "mul":
        return p * q
    raise ValueError(f"unknown operation {kind!r}")


def bar(p: LaurentPoly) -> LaurentPoly:
    return p.bar()


def in_lattice(p: LaurentPoly, k: int = 0) -> bool:
    """True iff every exponent of `p` is at most `-k`."""
    return p.in_lattice(k)


def parse_poly(text: str) -> LaurentPoly:
    """
    Inverse of `str(LaurentPoly)`. Rejects anything not in canonical form.

    >>> parse_poly("1:-1 1:1") == QC
    True
    """
    text = text.strip()
    if text == "0":
        return ZERO
    if not text:
        raise ValueError("empty polynomial text")
    terms = {}
    last = None
    for tok in text.split(" "):
        c_str, sep, e_str = tok.partition(":")
        if not sep:
            raise ValueError(f"bad term {tok!r}")
        c, e = int(c_str), int(e_str)
        if c == 0 or (last is not None and e <= last):
            raise ValueError(f"non-canonical polynomial text {text!r}")
        terms[e] = _check(c)
        last = e
    return LaurentPoly._raw(terms)
