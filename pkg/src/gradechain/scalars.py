"""Exact arithmetic for unit phases and their finite rational combinations.

A :class:`Phase` is the exponent ``t`` of a unit scalar ``e^{2 pi i t}``,
stored as a reduced rational in ``[0, 1)`` plus a rational combination of
named irrational generators drawn from a :class:`SymbolTable`.  Addition is
the group law mod 1 (the integers act on the rational part only).

An :class:`ExactScalar` is a finite formal sum ``sum_k c_k e^{2 pi i t_k}``
with rational coefficients.  Zero testing is decidable under the generic
model the table declares: ``{1} u symbols`` is Q-linearly independent, so
terms with distinct symbolic parts are independent and each purely rational
group reduces in the ring of integers of the N-th cyclotomic field (N the
lcm of the denominators).  Symbols whose exponential happens to be algebraic
are outside the contract.
"""

from __future__ import annotations

import cmath
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Iterable, Mapping, Union

from .errors import MissingAssignment, MixedSymbolTables, ParseError

Rational = Union[int, Fraction]

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*\Z")


@dataclass(frozen=True)
class SymbolTable:
    """Ordered table of irrational phase generators.

    The ``independent`` flag asserts that ``{1}`` together with the listed
    symbols is linearly independent over Q; it is fixed at creation.
    """

    symbols: tuple[str, ...] = ()
    independent: bool = True

    def __post_init__(self) -> None:
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("duplicate symbol names")
        for name in self.symbols:
            if not _NAME_RE.match(name):
                raise ValueError(f"bad symbol name: {name!r}")

    def __contains__(self, name: str) -> bool:
        return name in self.symbols


def _merge_tables(a: SymbolTable | None, b: SymbolTable | None) -> SymbolTable | None:
    if a is None:
        return b
    if b is None or a == b:
        return a
    raise MixedSymbolTables(f"{a} vs {b}")


class Phase:
    """Exponent of a unit scalar, i.e. an element of (Q + Q*symbols) mod 1."""

    __slots__ = ("rational", "symbolic", "table", "_hash")

    def __init__(
        self,
        rational: Rational = 0,
        symbolic: Mapping[str, Rational] | Iterable[tuple[str, Rational]] = (),
        table: SymbolTable | None = None,
    ) -> None:
        items = symbolic.items() if isinstance(symbolic, Mapping) else symbolic
        sym = tuple(sorted((n, Fraction(c)) for n, c in items if Fraction(c) != 0))
        if sym:
            if table is None:
                raise ValueError("symbolic phase needs a symbol table")
            for name, _ in sym:
                if name not in table:
                    raise ValueError(f"symbol {name!r} not in table")
        else:
            table = None
        object.__setattr__(self, "rational", Fraction(rational) % 1)
        object.__setattr__(self, "symbolic", sym)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "_hash", hash((self.rational, sym)))

    def __setattr__(self, *_):  # noqa: ANN002
        raise AttributeError("Phase is immutable")

    @classmethod
    def _raw(cls, rational: Fraction, symbolic: tuple, table: SymbolTable | None) -> Phase:
        """Internal constructor for pre-canonical fields (hot path)."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "rational", rational)
        object.__setattr__(obj, "symbolic", symbolic)
        object.__setattr__(obj, "table", table)
        object.__setattr__(obj, "_hash", hash((rational, symbolic)))
        return obj

    @classmethod
    def of(cls, value: Rational) -> Phase:
        return cls(Fraction(value))

    @classmethod
    def symbol(cls, name: str, table: SymbolTable, coeff: Rational = 1) -> Phase:
        return cls(0, {name: Fraction(coeff)}, table)

    def is_zero(self) -> bool:
        return self.rational == 0 and not self.symbolic

    def __add__(self, other: Phase) -> Phase:
        table = _merge_tables(self.table, other.table)
        r = self.rational + other.rational
        if r >= 1:
            r -= 1
        if not other.symbolic:
            sym = self.symbolic
        elif not self.symbolic:
            sym = other.symbolic
        else:
            coeffs = dict(self.symbolic)
            for name, c in other.symbolic:
                prev = coeffs.get(name)
                coeffs[name] = c if prev is None else prev + c
            sym = tuple(sorted((n, c) for n, c in coeffs.items() if c))
            if not sym:
                table = None
        return Phase._raw(r, sym, table)

    def __neg__(self) -> Phase:
        r = -self.rational % 1 if self.rational else self.rational
        return Phase._raw(r, tuple((n, -c) for n, c in self.symbolic), self.table)

    def __sub__(self, other: Phase) -> Phase:
        return self + (-other)

    def scale(self, k: int) -> Phase:
        """k * self for an integer k (only Z acts mod 1)."""
        if not isinstance(k, int):
            raise TypeError("phases scale by integers only")
        if k == 1:
            return self
        if k == 0:
            return ZERO_PHASE
        return Phase._raw(
            self.rational * k % 1,
            tuple((n, c * k) for n, c in self.symbolic),
            self.table,
        )

    def approx(self, assignment: Mapping[str, float] | None = None) -> float:
        """The real exponent under a numeric assignment of the symbols."""
        total = float(self.rational)
        for name, c in self.symbolic:
            if assignment is None or name not in assignment:
                raise MissingAssignment(name)
            total += float(c) * assignment[name]
        return total

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Phase):
            return NotImplemented
        _merge_tables(self.table, other.table)
        return self.rational == other.rational and self.symbolic == other.symbolic

    def __hash__(self) -> int:
        return self._hash

    def sort_key(self):
        return (self.rational, self.symbolic)

    def __str__(self) -> str:
        parts = []
        if self.rational:
            parts.append(str(self.rational))
        for name, c in self.symbolic:
            if c == 1:
                parts.append(name)
            else:
                parts.append(f"{c}*{name}")
        if not parts:
            return "0"
        return "+".join(parts).replace("+-", "-")

    def __repr__(self) -> str:
        return f"Phase({self})"


ZERO_PHASE = Phase(0)


def phase_equal(a: Phase, b: Phase) -> bool:
    """True iff a - b is 0 mod 1.  Raises MixedSymbolTables on foreign tables."""
    return a == b


# --- cyclotomic reduction -------------------------------------------------

@lru_cache(maxsize=None)
def cyclotomic_coeffs(n: int) -> tuple[int, ...]:
    """Coefficients of the n-th cyclotomic polynomial, constant term first.

    Computed by the exact division Phi_n = (x^n - 1) / prod_{d|n, d<n} Phi_d.
    """
    poly = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            poly = _polydiv_exact(poly, cyclotomic_coeffs(d))
    return tuple(poly)


def _polydiv_exact(num: list[int], den: tuple[int, ...]) -> list[int]:
    # both monic with integer coefficients; the division is exact
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1]
        out[i] = c
        if c:
            for j, d in enumerate(den):
                num[i + j] -= c * d
    return out


def _cyclotomic_residue(pairs: Iterable[tuple[Fraction, Fraction]]) -> bool:
    """True iff sum c * e^{2 pi i r} vanishes, for rational r in [0,1)."""
    pairs = list(pairs)
    n = lcm(*(r.denominator for r, _ in pairs)) if pairs else 1
    coeffs = [Fraction(0)] * n
    for r, c in pairs:
        coeffs[int(r * n)] += c
    phi = cyclotomic_coeffs(n)
    deg = len(phi) - 1
    # reduce mod Phi_n (monic), exact over Q
    for i in range(n - 1, deg - 1, -1):
        c = coeffs[i]
        if c:
            for j, d in enumerate(phi):
                coeffs[i - deg + j] -= c * d
    return all(c == 0 for c in coeffs[:deg])


class ExactScalar:
    """Finite formal Q-linear combination of unit phases."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[tuple[Phase, Rational]] = ()) -> None:
        acc: dict[Phase, Fraction] = {}
        for phase, coeff in terms:
            c = acc.get(phase, Fraction(0)) + Fraction(coeff)
            if c:
                acc[phase] = c
            elif phase in acc:
                del acc[phase]
        object.__setattr__(
            self, "terms", tuple(sorted(acc.items(), key=lambda t: t[0].sort_key()))
        )

    def __setattr__(self, *_):  # noqa: ANN002
        raise AttributeError("ExactScalar is immutable")

    @classmethod
    def _raw(cls, terms: tuple) -> ExactScalar:
        """Internal constructor for already-canonical term tuples."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "terms", terms)
        return obj

    @classmethod
    def zero(cls) -> ExactScalar:
        return cls()

    @classmethod
    def one(cls) -> ExactScalar:
        return cls([(ZERO_PHASE, 1)])

    @classmethod
    def rational(cls, q: Rational) -> ExactScalar:
        return cls([(ZERO_PHASE, Fraction(q))])

    @classmethod
    def unit(cls, phase: Phase) -> ExactScalar:
        """The unit scalar e^{2 pi i phase}."""
        return cls([(phase, 1)])

    @classmethod
    def of(cls, value: ExactScalar | Phase | Rational) -> ExactScalar:
        if isinstance(value, ExactScalar):
            return value
        if isinstance(value, Phase):
            return cls.unit(value)
        return cls.rational(value)

    def __add__(self, other: ExactScalar | Rational) -> ExactScalar:
        other = ExactScalar.of(other)
        return ExactScalar(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self) -> ExactScalar:
        return ExactScalar([(p, -c) for p, c in self.terms])

    def __sub__(self, other: ExactScalar | Rational) -> ExactScalar:
        return self + (-ExactScalar.of(other))

    def __mul__(self, other: ExactScalar | Phase | Rational) -> ExactScalar:
        if isinstance(other, (int, Fraction)):
            if not other:
                return ExactScalar._raw(())
            return ExactScalar._raw(tuple((p, c * other) for p, c in self.terms))
        if isinstance(other, Phase):
            return self.shift(other)
        if len(other.terms) == 1:
            q, d = other.terms[0]
            return (self * d).shift(q)
        return ExactScalar(
            [(p + q, c * d) for p, c in self.terms for q, d in other.terms]
        )

    __rmul__ = __mul__

    def shift(self, phase: Phase) -> ExactScalar:
        """Multiply by the unit scalar e^{2 pi i phase}."""
        if phase.is_zero():
            return self
        return ExactScalar._raw(
            tuple(
                sorted(((p + phase, c) for p, c in self.terms), key=lambda t: t[0].sort_key())
            )
        )

    def conjugate(self) -> ExactScalar:
        return ExactScalar._raw(
            tuple(sorted(((-p, c) for p, c in self.terms), key=lambda t: t[0].sort_key()))
        )

    def is_zero(self) -> bool:
        if not self.terms:
            return True
        groups: dict[tuple, list[tuple[Fraction, Fraction]]] = {}
        for phase, coeff in self.terms:
            groups.setdefault(phase.symbolic, []).append((phase.rational, coeff))
        for pairs in groups.values():
            if len(pairs) == 1:
                return False  # a single nonzero term never cancels
            if not _cyclotomic_residue(pairs):
                return False
        return True

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction, Phase, ExactScalar)):
            return (self - ExactScalar.of(other)).is_zero()
        return NotImplemented

    __hash__ = None  # equality is semantic (1 + z3 + z3^2 == 0); not hashable

    def __bool__(self) -> bool:
        return not self.is_zero()

    def approx(self, assignment: Mapping[str, float] | None = None) -> complex:
        """Double-precision value under a numeric assignment of the symbols."""
        return sum(
            (
                float(c) * cmath.exp(2j * cmath.pi * p.approx(assignment))
                for p, c in self.terms
            ),
            complex(0),
        )

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for phase, coeff in self.terms:
            if phase.is_zero():
                parts.append(str(coeff))
            elif coeff == 1:
                parts.append(f"e({phase})")
            else:
                parts.append(f"{coeff}*e({phase})")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"ExactScalar({self})"


def scalar_is_zero(s: ExactScalar) -> bool:
    return s.is_zero()


def scalar_eval(s: ExactScalar, assignment: Mapping[str, float] | None = None) -> complex:
    return s.approx(assignment)


# --- string grammar -------------------------------------------------------

def _split_terms(text: str) -> list[str]:
    """Split a sum on top-level +/-, keeping signs with the terms."""
    text = text.replace(" ", "")
    if not text:
        raise ParseError("empty expression")
    terms, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and i > start:
            terms.append(text[start:i])
            start = i
    terms.append(text[start:])
    return terms


def _parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {text!r}") from exc


def parse_phase(text: str, table: SymbolTable | None = None) -> Phase:
    """Parse strings like ``"1/3"``, ``"theta"``, ``"2*alpha+1/2"``."""
    rational = Fraction(0)
    coeffs: dict[str, Fraction] = {}
    for term in _split_terms(text):
        sign = Fraction(1)
        while term and term[0] in "+-":
            if term[0] == "-":
                sign = -sign
            term = term[1:]
        if not term:
            raise ParseError(f"dangling sign in {text!r}")
        if "*" in term:
            left, _, right = term.partition("*")
            if _NAME_RE.match(left):
                left, right = right, left
            name, coeff = right, _parse_rational(left)
        elif _NAME_RE.match(term):
            name, coeff = term, Fraction(1)
        else:
            rational += sign * _parse_rational(term)
            continue
        if not _NAME_RE.match(name):
            raise ParseError(f"bad symbol term {term!r}")
        if table is None or name not in table:
            raise ParseError(f"unknown symbol {name!r}")
        coeffs[name] = coeffs.get(name, Fraction(0)) + sign * coeff
    return Phase(rational, coeffs, table)


def parse_scalar(text: str, table: SymbolTable | None = None) -> ExactScalar:
    """Parse sums of ``coeff*e(phase)`` terms; bare rationals mean phase 0."""
    terms: list[tuple[Phase, Fraction]] = []
    for term in _split_terms(text):
        sign = Fraction(1)
        while term and term[0] in "+-":
            if term[0] == "-":
                sign = -sign
            term = term[1:]
        if not term:
            raise ParseError(f"dangling sign in {text!r}")
        coeff = Fraction(1)
        if "*" in term and not term.startswith("e("):
            left, _, term = term.partition("*")
            coeff = _parse_rational(left)
        if term.startswith("e(") and term.endswith(")"):
            phase = parse_phase(term[2:-1], table)
        else:
            phase, coeff = ZERO_PHASE, coeff * _parse_rational(term)
        terms.append((phase, sign * coeff))
    return ExactScalar(terms)
