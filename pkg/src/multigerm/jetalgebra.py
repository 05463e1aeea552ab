"""Truncated power series in one variable ``t`` with exact rational coefficients.

A :class:`Jet` stores only its nonzero coefficients together with a truncation
order ``N``; every coefficient of ``t^e`` with ``e > N`` is unknown.  Binary
operations truncate to the smaller of the two orders, so precision can never be
silently invented.

Coefficients are kept as ``int`` whenever they are integral and as
:class:`fractions.Fraction` otherwise; integer-only jets (the common case for
normal forms) therefore run on plain integer arithmetic.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Iterator, Mapping, Union

__all__ = [
    "INFINITY",
    "Jet",
    "JetSyntaxError",
    "as_rational",
    "parse_rational",
]

INFINITY = math.inf

Scalar = Union[int, Fraction]


def as_rational(value) -> Scalar:
    """Normalise ``value`` to an ``int`` or a non-integral ``Fraction``."""
    if isinstance(value, bool):
        raise TypeError("booleans are not coefficients")
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else value
    if isinstance(value, Rational):
        return as_rational(Fraction(value.numerator, value.denominator))
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"not an exact rational: {value!r}")


def parse_rational(text: str) -> Scalar:
    text = text.strip()
    if not re.fullmatch(r"[+-]?\d+(/\d+)?", text):
        raise JetSyntaxError(f"bad rational {text!r}", 0)
    value = Fraction(text)
    return value.numerator if value.denominator == 1 else value


class JetSyntaxError(ValueError):
    """Raised for malformed jet strings; ``column`` is 1-based."""

    def __init__(self, message: str, column: int):
        super().__init__(f"{message} (column {column})")
        self.message = message
        self.column = column


class Jet:
    """Immutable truncated polynomial ``sum c_e t^e`` with ``e <= truncation``.

    Germ jets have no constant term; pass ``allow_constant=True`` for the
    internal jets (units, function values) that need one.
    """

    __slots__ = ("_c", "_n", "_hash")

    def __init__(
        self,
        coeffs: Mapping[int, object] | Iterable[tuple[int, object]] = (),
        truncation: int = 1,
        *,
        allow_constant: bool = False,
    ):
        if truncation < 0 or (truncation < 1 and not allow_constant):
            raise ValueError(f"truncation order must be positive, got {truncation}")
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        c: dict[int, Scalar] = {}
        for e, v in items:
            if e < 0:
                raise ValueError("negative exponent")
            if e == 0 and not allow_constant:
                raise ValueError("germ jets have no constant term")
            if e > truncation:
                continue
            v = as_rational(v)
            if v:
                c[e] = c.get(e, 0) + v
                if not c[e]:
                    del c[e]
        self._c = c
        self._n = truncation
        self._hash = None

    @classmethod
    def _raw(cls, c: dict[int, Scalar], n: int) -> "Jet":
        # trusted constructor: c already truncated, normalised and zero-free
        jet = object.__new__(cls)
        jet._c = c
        jet._n = n
        jet._hash = None
        return jet

    @classmethod
    def zero(cls, truncation: int) -> "Jet":
        return cls._raw({}, truncation)

    @classmethod
    def monomial(cls, exponent: int, truncation: int, coeff=1) -> "Jet":
        return cls({exponent: coeff}, truncation, allow_constant=exponent == 0)

    @classmethod
    def t(cls, truncation: int) -> "Jet":
        return cls._raw({1: 1} if truncation >= 1 else {}, truncation)

    # -- accessors -------------------------------------------------------
    @property
    def truncation(self) -> int:
        return self._n

    @property
    def coeffs(self) -> dict[int, Scalar]:
        """A copy of the exponent -> coefficient map."""
        return dict(self._c)

    def items(self) -> Iterator[tuple[int, Scalar]]:
        return iter(sorted(self._c.items()))

    def coeff(self, exponent: int) -> Scalar:
        if exponent > self._n:
            raise ValueError(f"coefficient of t^{exponent} is beyond truncation {self._n}")
        return self._c.get(exponent, 0)

    def is_zero(self) -> bool:
        return not self._c

    def order(self):
        """Smallest exponent with nonzero coefficient, ``INFINITY`` for the zero jet."""
        return min(self._c) if self._c else INFINITY

    def leading(self) -> Scalar:
        return self._c[min(self._c)] if self._c else 0

    def degree(self) -> int:
        return max(self._c) if self._c else -1

    # -- truncation ------------------------------------------------------
    def truncate(self, m: int) -> "Jet":
        if m > self._n:
            raise ValueError(f"cannot truncate a {self._n}-jet at {m}")
        return Jet._raw({e: v for e, v in self._c.items() if e <= m}, m)

    def pad(self, n: int) -> "Jet":
        """Same coefficients, declared exact up to ``n`` (higher terms taken as zero)."""
        if n < self._n:
            return self.truncate(n)
        return Jet._raw(dict(self._c), n)

    # -- arithmetic ------------------------------------------------------
    def _other(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet({0: other}, self._n, allow_constant=True)

    def __add__(self, other) -> "Jet":
        other = self._other(other)
        n = min(self._n, other._n)
        c = {e: v for e, v in self._c.items() if e <= n}
        for e, v in other._c.items():
            if e > n:
                continue
            s = c.get(e, 0) + v
            if s:
                c[e] = as_rational(s) if isinstance(s, Fraction) else s
            else:
                c.pop(e, None)
        return Jet._raw(c, n)

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet._raw({e: -v for e, v in self._c.items()}, self._n)

    def __sub__(self, other) -> "Jet":
        return self + (-self._other(other))

    def __rsub__(self, other) -> "Jet":
        return self._other(other) + (-self)

    def scale(self, k) -> "Jet":
        k = as_rational(k)
        if not k:
            return Jet.zero(self._n)
        return Jet._raw({e: as_rational(v * k) for e, v in self._c.items()}, self._n)

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return self.scale(other)
        n = min(self._n, other._n)
        c: dict[int, Scalar] = {}
        for e1, v1 in self._c.items():
            if e1 > n:
                continue
            for e2, v2 in other._c.items():
                e = e1 + e2
                if e > n:
                    continue
                c[e] = c.get(e, 0) + v1 * v2
        return Jet._raw({e: as_rational(v) for e, v in c.items() if v}, n)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Jet":
        if k < 0:
            raise ValueError("negative powers are not jets")
        result = Jet({0: 1}, self._n, allow_constant=True)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def compose(self, inner: "Jet") -> "Jet":
        """``self(inner(t))``; ``inner`` must have no constant term."""
        if inner._c.get(0):
            raise ValueError("inner series has a nonzero constant term")
        n = min(self._n, inner._n)
        result = Jet._raw({}, n)
        if not self._c:
            return result
        power = Jet({0: 1}, n, allow_constant=True)
        prev = 0
        for e, v in sorted(self._c.items()):
            if e > n:
                break
            for _ in range(e - prev):
                power = power * inner
            prev = e
            if power.is_zero():
                break
            result = result + power.scale(v)
        return result

    __call__ = compose

    def derivative(self) -> "Jet":
        """Formal derivative, kept at the same truncation order.

        The coefficient of ``t^N`` in the result depends on the unknown
        ``t^(N+1)`` coefficient of ``self`` and is reported as zero; callers
        multiply by ``t^s`` (s >= 1) before relying on the top degree.
        """
        c = {e - 1: as_rational(e * v) for e, v in self._c.items() if e >= 1}
        return Jet._raw(c, self._n) if 0 not in c else Jet(c, self._n, allow_constant=True)

    def shift(self, s: int) -> "Jet":
        """Multiply by ``t^s``."""
        return Jet._raw({e + s: v for e, v in self._c.items() if e + s <= self._n}, self._n)

    # -- comparison / hashing -------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, Jet):
            return self._n == other._n and self._c == other._c
        if isinstance(other, int) and other == 0:
            return not self._c
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._n, frozenset(self._c.items())))
        return self._hash

    def same_terms(self, other: "Jet") -> bool:
        """Equality of coefficients up to the smaller truncation order."""
        n = min(self._n, other._n)
        return self.truncate(n)._c == other.truncate(n)._c

    # -- text ------------------------------------------------------------
    def __str__(self) -> str:
        return format_terms(self._c)

    def __repr__(self) -> str:
        return f"Jet({str(self)!r}, N={self._n})"

    @classmethod
    def parse(cls, text: str, truncation: int, *, allow_constant: bool = False) -> "Jet":
        return cls(parse_terms(text, allow_constant=allow_constant), truncation,
                   allow_constant=allow_constant)


def format_terms(c: Mapping[int, Scalar]) -> str:
    if not c:
        return "0"
    parts = []
    for e, v in sorted(c.items()):
        sign = "-" if v < 0 else "+"
        a = -v if v < 0 else v
        mono = "" if e == 0 else ("t" if e == 1 else f"t^{e}")
        if e == 0:
            body = str(a)
        elif a == 1:
            body = mono
        else:
            body = f"{a}{mono}"
        parts.append((sign, body))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


_TERM = re.compile(
    r"\s*(?P<sign>[+-])?\s*(?P<coef>\d+(?:/\d+)?)?\s*\*?\s*(?P<t>t(?:\s*\^\s*(?:\{\s*(?P<eb>\d+)\s*\}|(?P<e>\d+)))?)?\s*"
)


def parse_terms(text: str, *, allow_constant: bool = False) -> dict[int, Scalar]:
    """Parse ``"t^2 + 3/2t^5 - t^7"`` into an exponent map (``"0"`` is the zero jet)."""
    pos = 0
    out: dict[int, Scalar] = {}
    first = True
    stripped = text.strip()
    if not stripped:
        raise JetSyntaxError("empty jet", 1)
    while pos < len(text):
        if not text[pos:].strip():
            break
        m = _TERM.match(text, pos)
        if not m or m.end() == pos or not (m.group("coef") or m.group("t")):
            raise JetSyntaxError(f"unexpected input {text[pos:pos + 8].strip()!r}", pos + 1)
        if not first and not m.group("sign"):
            raise JetSyntaxError("missing '+' or '-' between terms", m.start() + 1)
        coef = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
        if m.group("sign") == "-":
            coef = -coef
        if m.group("t"):
            e = int(m.group("eb") or m.group("e") or 1)
        else:
            e = 0
        if e == 0 and coef and not allow_constant:
            raise JetSyntaxError("constant term in a germ jet", m.start() + 1)
        val = out.get(e, 0) + coef
        if val:
            out[e] = as_rational(val)
        else:
            out.pop(e, None)
        first = False
        pos = m.end()
    return out
