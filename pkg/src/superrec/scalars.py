"""Exact coefficient ring: rationals extended by named symbols.

Each symbol may carry a quadratic relation (symbol^2 = rational); symbols
without one are free (transcendental). Values are sparse sums of monomials
with Fraction coefficients, kept in a reduced canonical form: exponents of
relation-bearing symbols are always 0 or 1, and zero coefficients are never
stored.
"""

from __future__ import annotations

import re
from fractions import Fraction


class RingMismatch(Exception):
    pass


class NotInvertible(Exception):
    pass


class ScalarParseError(Exception):
    pass


class Ring:
    """A set of named symbols, each with an optional square relation."""

    def __init__(self, symbols=()):
        # symbols: iterable of (name, square) with square a Fraction or None
        self.squares = {}
        for name, square in symbols:
            if name in self.squares:
                raise ValueError(f"duplicate symbol {name!r}")
            if square is not None:
                square = Fraction(square)
                if square == 0:
                    raise ValueError(f"symbol {name!r} has zero square")
            self.squares[name] = square

    def symbol_names(self):
        return sorted(self.squares)

    def __eq__(self, other):
        return isinstance(other, Ring) and self.squares == other.squares

    def __hash__(self):
        return hash(tuple(sorted(
            (n, s) for n, s in self.squares.items())))

    def __repr__(self):
        return f"Ring({sorted(self.squares.items())})"

    # --- constructors -------------------------------------------------

    def zero(self):
        return Scalar(self, {})

    def one(self):
        return self.rational(1)

    def rational(self, value):
        value = Fraction(value)
        if value == 0:
            return Scalar(self, {})
        return Scalar(self, {(): value})

    def symbol(self, name):
        if name not in self.squares:
            raise KeyError(f"unknown symbol {name!r}")
        return Scalar(self, {((name, 1),): Fraction(1)})

    def parse(self, text):
        return _parse_scalar(self, text)


# monomial = tuple of (name, exponent) pairs sorted by name, exponents >= 1


def _reduce_monomial(ring, mono, coeff):
    """Apply square relations; return (mono, coeff)."""
    out = []
    for name, exp in mono:
        square = ring.squares.get(name)
        if square is None and name not in ring.squares:
            raise KeyError(f"unknown symbol {name!r}")
        if square is not None and exp >= 2:
            coeff *= square ** (exp // 2)
            exp %= 2
        if exp:
            out.append((name, exp))
    return tuple(sorted(out)), coeff


class Scalar:
    """An element of the ring: Fraction-linear combination of monomials."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring, terms):
        self.ring = ring
        self.terms = dict(terms)

    # --- basic queries -------------------------------------------------

    def is_zero(self):
        return not self.terms

    def is_rational(self):
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def as_rational(self):
        if not self.terms:
            return Fraction(0)
        if self.is_rational():
            return self.terms[()]
        raise ValueError(f"not a rational: {self}")

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.rational(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # --- arithmetic ----------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, (int, Fraction)):
            return self.ring.rational(other)
        if isinstance(other, Scalar):
            if other.ring != self.ring:
                raise RingMismatch("scalars from different rings")
            return other
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms = dict(self.terms)
        for mono, coeff in other.terms.items():
            new = terms.get(mono, Fraction(0)) + coeff
            if new:
                terms[mono] = new
            else:
                terms.pop(mono, None)
        return Scalar(self.ring, terms)

    __radd__ = __add__

    def __neg__(self):
        return Scalar(self.ring, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                merged = {}
                for name, exp in m1:
                    merged[name] = merged.get(name, 0) + exp
                for name, exp in m2:
                    merged[name] = merged.get(name, 0) + exp
                mono, coeff = _reduce_monomial(
                    self.ring, tuple(merged.items()), c1 * c2)
                if coeff:
                    new = terms.get(mono, Fraction(0)) + coeff
                    if new:
                        terms[mono] = new
                    else:
                        del terms[mono]
        return Scalar(self.ring, terms)

    __rmul__ = __mul__

    def invert(self):
        """Multiplicative inverse where decidable; NotInvertible otherwise.

        Invertible shapes: a nonzero rational; c*M with every symbol in the
        monomial M carrying a square relation; and binomials u + v*M with
        u, v rational, M^2 rational, u^2 - v^2*M^2 != 0.
        """
        if not self.terms:
            raise NotInvertible("zero is not invertible")
        ring = self.ring

        def monomial_square(mono):
            # rational value of M^2, or None if M contains a free symbol
            value = Fraction(1)
            for name, exp in mono:
                square = ring.squares[name]
                if square is None:
                    return None
                value *= square  # exp is 1 in reduced form
            return value

        if len(self.terms) == 1:
            (mono, coeff), = self.terms.items()
            if not mono:
                return ring.rational(1 / coeff)
            square = monomial_square(mono)
            if square is None:
                raise NotInvertible(f"free symbol in {self}")
            # 1/(c*M) = M/(c*M^2)
            return Scalar(ring, {mono: 1 / (coeff * square)})
        if len(self.terms) == 2 and () in self.terms:
            u = self.terms[()]
            mono = next(m for m in self.terms if m != ())
            v = self.terms[mono]
            square = monomial_square(mono)
            if square is None:
                raise NotInvertible(f"free symbol in {self}")
            norm = u * u - v * v * square
            if norm == 0:
                raise NotInvertible(f"zero norm: {self}")
            # (u + vM)(u - vM) = u^2 - v^2 M^2
            return Scalar(ring, {(): u / norm, mono: -v / norm})
        raise NotInvertible(f"shape not invertible: {self}")

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self * other.invert()

    # --- formatting ----------------------------------------------------

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for mono in sorted(self.terms, key=lambda m: (len(m), m)):
            coeff = self.terms[mono]
            factors = [str(coeff)]
            for name, exp in mono:
                factors.append(name if exp == 1 else f"{name}^{exp}")
            parts.append("*".join(factors))
        text = " + ".join(parts)
        return text.replace("+ -", "- ")

    def __repr__(self):
        return f"Scalar({self})"

    def literal(self):
        """Canonical text form parseable by Ring.parse."""
        if not self.terms:
            return "0"
        parts = []
        for mono in sorted(self.terms, key=lambda m: (len(m), m)):
            coeff = self.terms[mono]
            factors = [str(coeff)]
            for name, exp in mono:
                factors.append(name if exp == 1 else f"{name}^{exp}")
            parts.append("*".join(factors))
        return "+".join(parts).replace("+-", "-")


_TERM_RE = re.compile(
    r"""^\s*
        (?P<coeff>[+-]?\d+(?:/\d+)?)?
        (?P<rest>(?:\s*\*\s*[A-Za-z_][A-Za-z_0-9]*(?:\^\d+)?
                   |\s*[A-Za-z_][A-Za-z_0-9]*(?:\^\d+)?)*)
        \s*$""",
    re.VERBOSE,
)


def _parse_scalar(ring, text):
    text = text.strip().replace("−", "-")
    if not text:
        raise ScalarParseError("empty scalar literal")
    if "." in text:
        raise ScalarParseError(f"decimals not accepted: {text!r}")
    # split into signed terms at top level
    terms = []
    pos = 0
    sign = 1
    if text[0] in "+-":
        sign = -1 if text[0] == "-" else 1
        pos = 1
    start = pos
    while pos <= len(text):
        if pos == len(text) or text[pos] in "+-":
            chunk = text[start:pos]
            if not chunk.strip():
                raise ScalarParseError(f"bad literal: {text!r}")
            terms.append((sign, chunk))
            if pos < len(text):
                sign = -1 if text[pos] == "-" else 1
            start = pos + 1
        pos += 1
    result = ring.zero()
    for sign, chunk in terms:
        match = _TERM_RE.match(chunk)
        if not match:
            raise ScalarParseError(f"bad term {chunk!r} in {text!r}")
        coeff_text = match.group("coeff")
        coeff = Fraction(coeff_text) if coeff_text else Fraction(1)
        mono = {}
        rest = match.group("rest") or ""
        for factor in re.findall(
                r"[A-Za-z_][A-Za-z_0-9]*(?:\^\d+)?", rest):
            if "^" in factor:
                name, exp_text = factor.split("^")
                exp = int(exp_text)
            else:
                name, exp = factor, 1
            if name not in ring.squares:
                raise ScalarParseError(f"unknown symbol {name!r}")
            mono[name] = mono.get(name, 0) + exp
        if not coeff_text and not mono:
            raise ScalarParseError(f"bad term {chunk!r}")
        reduced, value = _reduce_monomial(
            ring, tuple(mono.items()), sign * coeff)
        if value:
            result = result + Scalar(ring, {reduced: value})
    return result
