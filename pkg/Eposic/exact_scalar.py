"""
Exact arithmetic in the ring of Gaussian-rational combinations of square
roots of square-free positive integers.

An ``ExactScalar`` is a finite sum ``sum_d q_d * sqrt(d)`` where every
``q_d`` is a ``GaussianRational`` and every radicand ``d`` is square-free.
Distinct square-free radicals are linearly independent over the rationals,
so a normalized scalar is zero iff it has no terms and two scalars are equal
iff their term maps are equal.

Usage examples
--------------
    >>> x = sqrt_rational(8)            # 2*sqrt(2)
    >>> render(x * x)
    '(8/1)'
    >>> real_sign(sqrt_rational(2) - 1)
    <Sign.POSITIVE: 1>
"""

import math
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType
from typing import Dict, Mapping, Tuple, Union

from mpmath.libmp import (
    fzero,
    from_int,
    mpf_add,
    mpf_cmp,
    mpf_div,
    mpf_mul,
    mpf_sqrt,
    round_ceiling,
    round_floor,
)
from sympy import factorint

from Eposic.config import SIGN_MAX_PRECISION, SIGN_START_PRECISION
from Eposic.errors import NegativeRadicand, NotReal, ParseError

Rational = Fraction

# --------------------------------------------------------------------------- #
# Gaussian rationals
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class GaussianRational:
    """A complex number ``re + im*i`` with rational parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __add__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re + other.re, self.im + other.im)

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def scale(self, q: Fraction) -> "GaussianRational":
        return GaussianRational(self.re * q, self.im * q)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm_sq(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def inverse(self) -> "GaussianRational":
        n = self.norm_sq()
        if n == 0:
            raise ZeroDivisionError("inverse of zero Gaussian rational")
        return GaussianRational(self.re / n, -self.im / n)

    def to_complex(self) -> complex:
        return complex(float(self.re), float(self.im))


_GZERO = GaussianRational()
_GONE = GaussianRational(1)


# --------------------------------------------------------------------------- #
# Radicands
# --------------------------------------------------------------------------- #


@lru_cache(maxsize=4096)
def squarefree_decompose(n: int) -> Tuple[int, int]:
    """Split a positive integer as ``n = s**2 * d`` with ``d`` square-free.

    Returns
    -------
    tuple
        ``(s, d)``.
    """
    if n <= 0:
        raise ValueError(f"Radicand must be positive, got {n}")
    s, d = 1, 1
    for prime, exp in factorint(n).items():
        s *= prime ** (exp // 2)
        if exp % 2:
            d *= prime
    return s, d


def _radical_product(a: int, b: int) -> Tuple[int, int]:
    # sqrt(a)*sqrt(b) = g*sqrt((a/g)*(b/g)) for square-free a, b
    g = math.gcd(a, b)
    return g, (a // g) * (b // g)


# --------------------------------------------------------------------------- #
# ExactScalar
# --------------------------------------------------------------------------- #

Number = Union[int, Fraction, GaussianRational, "ExactScalar"]


class Sign(Enum):
    NEGATIVE = -1
    ZERO = 0
    POSITIVE = 1


class ExactScalar:
    """Immutable element ``sum_d q_d * sqrt(d)`` of the coefficient ring."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[int, Union[int, Fraction, GaussianRational]] = None):
        normalized: Dict[int, GaussianRational] = {}
        for d, q in (terms or {}).items():
            q = _as_gaussian(q)
            if q.is_zero():
                continue
            s, core = squarefree_decompose(int(d))
            if s != 1:
                q = q.scale(Fraction(s))
            prev = normalized.get(core)
            normalized[core] = q if prev is None else prev + q
        self._terms = {d: q for d, q in normalized.items() if not q.is_zero()}
        self._hash = None

    @classmethod
    def _trusted(cls, terms: Dict[int, GaussianRational]) -> "ExactScalar":
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    # constructors ---------------------------------------------------------
    @classmethod
    def zero(cls) -> "ExactScalar":
        return cls._trusted({})

    @classmethod
    def one(cls) -> "ExactScalar":
        return cls._trusted({1: _GONE})

    @classmethod
    def from_int(cls, n: int) -> "ExactScalar":
        return cls.from_fraction(Fraction(n))

    @classmethod
    def from_fraction(cls, q: Fraction) -> "ExactScalar":
        q = Fraction(q)
        return cls._trusted({1: GaussianRational(q)} if q else {})

    @classmethod
    def from_gaussian(cls, re: Fraction, im: Fraction = Fraction(0)) -> "ExactScalar":
        g = GaussianRational(re, im)
        return cls._trusted({1: g} if g else {})

    @classmethod
    def i(cls) -> "ExactScalar":
        return cls._trusted({1: GaussianRational(0, 1)})

    # inspection -----------------------------------------------------------
    @property
    def terms(self) -> Mapping[int, GaussianRational]:
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_real(self) -> bool:
        return all(q.im == 0 for q in self._terms.values())

    def is_rational(self) -> bool:
        return self.is_real() and set(self._terms) <= {1}

    def is_gaussian(self) -> bool:
        return set(self._terms) <= {1}

    def as_fraction(self) -> Fraction:
        """Return the value as a ``Fraction``; raises if it is not rational."""
        if not self.is_rational():
            raise NotReal(f"Scalar {render(self)} is not rational")
        q = self._terms.get(1)
        return q.re if q is not None else Fraction(0)

    def as_gaussian(self) -> GaussianRational:
        if not self.is_gaussian():
            raise ValueError(f"Scalar {render(self)} is not a Gaussian rational")
        return self._terms.get(1, _GZERO)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other: Number) -> "ExactScalar":
        other = as_scalar(other)
        if not other._terms:
            return self
        if not self._terms:
            return other
        out = dict(self._terms)
        for d, q in other._terms.items():
            prev = out.get(d)
            if prev is None:
                out[d] = q
            else:
                total = prev + q
                if total.is_zero():
                    del out[d]
                else:
                    out[d] = total
        return ExactScalar._trusted(out)

    __radd__ = __add__

    def __neg__(self) -> "ExactScalar":
        return ExactScalar._trusted({d: -q for d, q in self._terms.items()})

    def __sub__(self, other: Number) -> "ExactScalar":
        return self + (-as_scalar(other))

    def __rsub__(self, other: Number) -> "ExactScalar":
        return as_scalar(other) + (-self)

    def __mul__(self, other: Number) -> "ExactScalar":
        other = as_scalar(other)
        if not self._terms or not other._terms:
            return ExactScalar.zero()
        out: Dict[int, GaussianRational] = {}
        for a, qa in self._terms.items():
            for b, qb in other._terms.items():
                s, d = _radical_product(a, b)
                q = qa * qb
                if s != 1:
                    q = q.scale(Fraction(s))
                prev = out.get(d)
                out[d] = q if prev is None else prev + q
        return ExactScalar._trusted({d: q for d, q in out.items() if not q.is_zero()})

    __rmul__ = __mul__

    def inverse(self) -> "ExactScalar":
        """Multiplicative inverse of a single-term scalar ``q*sqrt(d)``."""
        if not self._terms:
            raise ZeroDivisionError("inverse of zero")
        if len(self._terms) != 1:
            raise ValueError(f"Only single-radical scalars are invertible here, got {render(self)}")
        ((d, q),) = self._terms.items()
        # 1/(q sqrt d) = sqrt(d) / (q d)
        return ExactScalar._trusted({d: q.inverse().scale(Fraction(1, d))})

    def __truediv__(self, other: Number) -> "ExactScalar":
        return self * as_scalar(other).inverse()

    def __rtruediv__(self, other: Number) -> "ExactScalar":
        return as_scalar(other) * self.inverse()

    def __pow__(self, exponent: int) -> "ExactScalar":
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result, base = ExactScalar.one(), self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def conjugate(self) -> "ExactScalar":
        return ExactScalar._trusted({d: q.conjugate() for d, q in self._terms.items()})

    def abs_sq(self) -> "ExactScalar":
        return self * self.conjugate()

    def real_part(self) -> "ExactScalar":
        return ExactScalar._trusted(
            {d: GaussianRational(q.re) for d, q in self._terms.items() if q.re}
        )

    def imag_part(self) -> "ExactScalar":
        return ExactScalar._trusted(
            {d: GaussianRational(q.im) for d, q in self._terms.items() if q.im}
        )

    # comparison -----------------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, GaussianRational)):
            other = as_scalar(other)
        if not isinstance(other, ExactScalar):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"ExactScalar({render(self)!r})"

    def __str__(self) -> str:
        return render(self)

    def __complex__(self) -> complex:
        return to_float(self)


def _as_gaussian(q) -> GaussianRational:
    if isinstance(q, GaussianRational):
        return q
    if isinstance(q, (int, Fraction)):
        return GaussianRational(Fraction(q))
    raise TypeError(f"Unsupported coefficient type: {type(q).__name__}")


def as_scalar(x: Number) -> ExactScalar:
    """Coerce ints, fractions and Gaussian rationals to ``ExactScalar``."""
    if isinstance(x, ExactScalar):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(x, (int, Fraction)):
        return ExactScalar.from_fraction(Fraction(x))
    if isinstance(x, GaussianRational):
        return ExactScalar._trusted({1: x} if x else {})
    raise TypeError(f"Cannot convert {type(x).__name__} to ExactScalar")


ZERO = ExactScalar.zero()
ONE = ExactScalar.one()
I = ExactScalar.i()


# --------------------------------------------------------------------------- #
# Module-level operations
# --------------------------------------------------------------------------- #


def add(x: ExactScalar, y: ExactScalar) -> ExactScalar:
    return as_scalar(x) + y


def mul(x: ExactScalar, y: ExactScalar) -> ExactScalar:
    return as_scalar(x) * y


def conjugate(x: ExactScalar) -> ExactScalar:
    return as_scalar(x).conjugate()


def is_zero(x: ExactScalar) -> bool:
    return as_scalar(x).is_zero()


def equals(x: ExactScalar, y: ExactScalar) -> bool:
    return as_scalar(x) == as_scalar(y)


@lru_cache(maxsize=8192)
def sqrt_rational(q: Union[int, Fraction]) -> ExactScalar:
    """Exact square root of a non-negative rational.

    ``p/s`` is rewritten as ``p*s / s**2`` so the result is
    ``(t/s) * sqrt(d)`` with ``p*s = t**2 * d`` and ``d`` square-free.

    Raises
    ------
    NegativeRadicand
        If ``q < 0``.
    """
    q = Fraction(q)
    if q < 0:
        raise NegativeRadicand(f"Cannot take the square root of {q}")
    if q == 0:
        return ExactScalar.zero()
    t, d = squarefree_decompose(q.numerator * q.denominator)
    return ExactScalar._trusted({d: GaussianRational(Fraction(t, q.denominator))})


def to_float(x: ExactScalar) -> complex:
    """Round-to-nearest evaluation as a Python complex."""
    total = 0j
    for d, q in as_scalar(x).terms.items():
        root = 1.0 if d == 1 else math.sqrt(d)
        total += complex(float(q.re) * root, float(q.im) * root)
    return total


def _enclosure(terms: Mapping[int, GaussianRational], prec: int):
    lo = hi = fzero
    for d, q in terms.items():
        p, s = from_int(q.re.numerator), from_int(q.re.denominator)
        if d == 1:
            root_lo = root_hi = from_int(1)
        else:
            root_lo = mpf_sqrt(from_int(d), prec, round_floor)
            root_hi = mpf_sqrt(from_int(d), prec, round_ceiling)
        if q.re > 0:
            small, large = root_lo, root_hi
        else:
            small, large = root_hi, root_lo
        t_lo = mpf_div(mpf_mul(p, small, prec, round_floor), s, prec, round_floor)
        t_hi = mpf_div(mpf_mul(p, large, prec, round_ceiling), s, prec, round_ceiling)
        lo = mpf_add(lo, t_lo, prec, round_floor)
        hi = mpf_add(hi, t_hi, prec, round_ceiling)
    return lo, hi


def real_sign(x: ExactScalar) -> Sign:
    """Exact sign of a real scalar.

    The value is enclosed in an outward-rounded interval whose precision
    doubles until the interval excludes zero.

    Raises
    ------
    NotReal
        If any coefficient has a nonzero imaginary part.
    """
    x = as_scalar(x)
    if not x.is_real():
        raise NotReal(f"real_sign needs a real scalar, got {render(x)}")
    if x.is_zero():
        return Sign.ZERO
    terms = x.terms
    if set(terms) == {1}:
        return Sign.POSITIVE if terms[1].re > 0 else Sign.NEGATIVE
    prec = SIGN_START_PRECISION
    while prec <= SIGN_MAX_PRECISION:
        lo, hi = _enclosure(terms, prec)
        if mpf_cmp(lo, fzero) > 0:
            return Sign.POSITIVE
        if mpf_cmp(hi, fzero) < 0:
            return Sign.NEGATIVE
        prec *= 2
    raise ArithmeticError(f"Sign of {render(x)} not resolved at {SIGN_MAX_PRECISION} bits")


def compare(x: Number, y: Number) -> Sign:
    """Exact sign of ``x - y`` for real scalars."""
    return real_sign(as_scalar(x) - as_scalar(y))


# --------------------------------------------------------------------------- #
# Canonical text form
# --------------------------------------------------------------------------- #


def _render_fraction(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _render_coeff(q: GaussianRational) -> str:
    if q.im == 0:
        return f"({_render_fraction(q.re)})"
    sign = "-" if q.im < 0 else "+"
    return f"({_render_fraction(q.re)}{sign}{_render_fraction(abs(q.im))} i)"


def render(x: ExactScalar) -> str:
    """Canonical rendering; terms in ascending radicand order."""
    x = as_scalar(x)
    if x.is_zero():
        return "0"
    parts = []
    for d in sorted(x.terms):
        coeff = _render_coeff(x.terms[d])
        parts.append(coeff if d == 1 else f"{coeff}*sqrt({d})")
    return " + ".join(parts)


_TERM_RE = re.compile(
    r"^(?P<sign>[+-]?)"
    r"\((?P<re>-?\d+)/(?P<red>\d+)"
    r"(?:(?P<isign>[+-])(?P<im>\d+)/(?P<imd>\d+) i)?\)"
    r"(?:\*sqrt\((?P<rad>\d+)\))?$"
)


def parse(text: str) -> ExactScalar:
    """Inverse of :func:`render`.

    Raises
    ------
    ParseError
        If ``text`` does not follow the canonical grammar.
    """
    text = text.strip()
    if text == "0":
        return ExactScalar.zero()
    terms: Dict[int, GaussianRational] = {}
    for chunk in text.split(" + "):
        match = _TERM_RE.match(chunk)
        if match is None:
            raise ParseError(f"Malformed exact scalar term: {chunk!r}")
        try:
            real = Fraction(int(match["re"]), int(match["red"]))
            imag = Fraction(0)
            if match["im"] is not None:
                imag = Fraction(int(match["im"]), int(match["imd"]))
                if match["isign"] == "-":
                    imag = -imag
        except ZeroDivisionError as exc:
            raise ParseError(f"Zero denominator in {chunk!r}") from exc
        q = GaussianRational(real, imag)
        if match["sign"] == "-":
            q = -q
        rad = int(match["rad"]) if match["rad"] else 1
        if rad == 0:
            raise ParseError(f"Radicand must be positive in {chunk!r}")
        prev = terms.get(rad)
        terms[rad] = q if prev is None else prev + q
    return ExactScalar(terms)
