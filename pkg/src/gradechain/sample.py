"""Monomial sample algebras: twisted group algebras with a grading.

A sample is spanned by unitaries ``b_m`` indexed by an exponent lattice M
(a finitely generated abelian group), with product
``b_m b_n = e^{2 pi i c(m, n)} b_{m+n}`` for a bilinear cocycle c, graded by
a homomorphism into the degree group.  This covers every concrete sample
used here: function algebras of a dual group (c = 0), the clock-shift
matrix algebra, the noncommutative 2-torus, and parafermion samples.

The adjoint is fixed by unitarity of the basis, (b_m)* b_m = 1, which gives
(b_m)* = e^{2 pi i c(m, m)} b_{-m}.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .degrees import DegreeGroup, Element, Subgroup
from .errors import AlgebraMismatch, BadParameter, WrongGroup
from .scalars import ZERO_PHASE, ExactScalar, Phase, SymbolTable


@dataclass(frozen=True)
class SampleAlgebra:
    exponents: DegreeGroup
    cocycle: tuple[tuple[Phase, ...], ...]
    degree_group: DegreeGroup
    degree_matrix: tuple[tuple[int, ...], ...]  # rows: exponent gens -> degree coords
    generator_names: tuple[str, ...]
    name: str = ""

    def __post_init__(self) -> None:
        rank = self.exponents.rank
        coc = tuple(tuple(row) for row in self.cocycle)
        deg = tuple(tuple(int(v) for v in row) for row in self.degree_matrix)
        if len(coc) != rank or any(len(r) != rank for r in coc):
            raise ValueError("cocycle matrix has wrong shape")
        if len(deg) != rank or any(len(r) != self.degree_group.rank for r in deg):
            raise ValueError("degree matrix has wrong shape")
        if len(self.generator_names) != rank:
            raise ValueError("need one generator name per exponent coordinate")
        object.__setattr__(self, "cocycle", coc)
        object.__setattr__(self, "degree_matrix", deg)
        # memo tables for the hot paths; not part of equality
        object.__setattr__(self, "_degree_cache", {})
        object.__setattr__(self, "_cocycle_cache", {})
        # both the cocycle and the grading must factor through the torsion
        for i in range(rank):
            n = self.exponents.generator_order(i)
            if n is None:
                continue
            for j in range(rank):
                if not coc[i][j].scale(n).is_zero() or not coc[j][i].scale(n).is_zero():
                    raise ValueError(f"cocycle entry ({i},{j}) breaks torsion")
            image = self.degree_group.scale(self.degree_group.reduce(deg[i]), n)
            if image != self.degree_group.zero():
                raise ValueError(f"degree of generator {i} breaks torsion")

    def cocycle_phase(self, m: Sequence[int], n: Sequence[int]) -> Phase:
        key = (tuple(m), tuple(n))
        hit = self._cocycle_cache.get(key)
        if hit is not None:
            return hit
        acc = ZERO_PHASE
        for i, mi in enumerate(m):
            if not mi:
                continue
            for j, nj in enumerate(n):
                if nj:
                    acc = acc + self.cocycle[i][j].scale(mi * nj)
        self._cocycle_cache[key] = acc
        return acc

    def degree(self, m: Sequence[int]) -> Element:
        key = tuple(m)
        hit = self._degree_cache.get(key)
        if hit is not None:
            return hit
        coords = [0] * self.degree_group.rank
        for i, mi in enumerate(m):
            if mi:
                for j, d in enumerate(self.degree_matrix[i]):
                    coords[j] += mi * d
        out = self.degree_group.reduce(coords)
        self._degree_cache[key] = out
        return out

    def star_phase(self, m: Sequence[int]) -> Phase:
        return self.cocycle_phase(m, m)

    def mul_basis(self, m: Sequence[int], n: Sequence[int]) -> tuple[Phase, Element]:
        return self.cocycle_phase(m, n), self.exponents.add(m, n)

    def basis(self, m: Sequence[int]) -> SampleElement:
        return SampleElement(self, {self.exponents.reduce(m): ExactScalar.one()})

    def generator(self, k: int) -> SampleElement:
        return self.basis(self.exponents.generators()[k])

    def one(self) -> SampleElement:
        return self.basis(self.exponents.zero())

    def zero_element(self) -> SampleElement:
        return SampleElement(self, {})

    def parse_exponent(self, text: str) -> Element:
        """Parse ``"u^1 w^-2"`` (or bare names for exponent 1)."""
        vec = [0] * self.exponents.rank
        for token in text.split():
            name, _, power = token.partition("^")
            if name not in self.generator_names:
                raise BadParameter(f"unknown generator {name!r}")
            vec[self.generator_names.index(name)] += int(power) if power else 1
        return self.exponents.reduce(vec)

    def format_exponent(self, m: Sequence[int]) -> str:
        parts = [
            f"{name}^{v}" for name, v in zip(self.generator_names, m) if v
        ]
        return " ".join(parts) if parts else "1"


class SampleElement:
    """Finite ExactScalar combination of basis unitaries of one sample."""

    __slots__ = ("algebra", "support")

    def __init__(self, algebra: SampleAlgebra, support: Mapping[Element, ExactScalar]) -> None:
        self.algebra = algebra
        self.support = {
            m: c for m, c in support.items() if not c.is_zero()
        }

    def _check(self, other: SampleElement) -> None:
        if self.algebra is not other.algebra and self.algebra != other.algebra:
            raise AlgebraMismatch("elements live in different samples")

    def __add__(self, other: SampleElement) -> SampleElement:
        self._check(other)
        out = dict(self.support)
        for m, c in other.support.items():
            out[m] = out.get(m, ExactScalar.zero()) + c
        return SampleElement(self.algebra, out)

    def __neg__(self) -> SampleElement:
        return SampleElement(self.algebra, {m: -c for m, c in self.support.items()})

    def __sub__(self, other: SampleElement) -> SampleElement:
        return self + (-other)

    def scale(self, scalar: ExactScalar | Phase | int | Fraction) -> SampleElement:
        s = ExactScalar.of(scalar)
        return SampleElement(self.algebra, {m: c * s for m, c in self.support.items()})

    def __mul__(self, other: SampleElement) -> SampleElement:
        self._check(other)
        alg = self.algebra
        out: dict[Element, ExactScalar] = {}
        for m, cm in self.support.items():
            for n, cn in other.support.items():
                phase, k = alg.mul_basis(m, n)
                term = (cm * cn).shift(phase)
                prev = out.get(k)
                out[k] = term if prev is None else prev + term
        return SampleElement(alg, out)

    def star(self) -> SampleElement:
        alg = self.algebra
        out: dict[Element, ExactScalar] = {}
        for m, c in self.support.items():
            k = alg.exponents.neg(m)
            term = c.conjugate().shift(alg.star_phase(m))
            prev = out.get(k)
            out[k] = term if prev is None else prev + term
        return SampleElement(alg, out)

    def degrees(self) -> set[Element]:
        return {self.algebra.degree(m) for m in self.support}

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def degree(self) -> Element:
        degs = self.degrees()
        if len(degs) != 1:
            raise ValueError("element is not homogeneous")
        return next(iter(degs))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SampleElement):
            return NotImplemented
        self._check(other)
        return not (self - other).support

    __hash__ = None

    def __repr__(self) -> str:
        if not self.support:
            return "0"
        return " + ".join(
            f"({c})*{self.algebra.format_exponent(m)}"
            for m, c in sorted(self.support.items())
        )


def spectral_projection(x: SampleElement, sub: Subgroup) -> SampleElement:
    """Conditional expectation onto degrees in ``sub``, realized dually."""
    if sub.parent != x.algebra.degree_group:
        raise WrongGroup("subgroup lives in a different degree group")
    return SampleElement(
        x.algebra,
        {m: c for m, c in x.support.items() if x.algebra.degree(m) in sub},
    )


class SampleState:
    """Finite-support linear functional on a sample, normalized and hermitian.

    Basis elements outside the table evaluate to zero.
    """

    def __init__(self, algebra: SampleAlgebra, values: Mapping[Element, ExactScalar | int | Fraction]) -> None:
        self.algebra = algebra
        zero = algebra.exponents.zero()
        table = {
            algebra.exponents.reduce(m): ExactScalar.of(c) for m, c in values.items()
        }
        table = {m: c for m, c in table.items() if not c.is_zero()}
        if table.get(zero) != ExactScalar.one():
            raise ValueError("state must send the unit to 1")
        for m, c in table.items():
            # omega(b_m^*) = e^{2 pi i s(m)} omega(b_{-m}) must equal conj(omega(b_m))
            neg = algebra.exponents.neg(m)
            lhs = ExactScalar.unit(algebra.star_phase(m)) * table.get(neg, ExactScalar.zero())
            if lhs != c.conjugate():
                raise ValueError(f"state is not hermitian at {m}")
        self.values = table

    def value(self, m: Sequence[int]) -> ExactScalar:
        return self.values.get(self.algebra.exponents.reduce(m), ExactScalar.zero())

    def evaluate(self, x: SampleElement) -> ExactScalar:
        if x.algebra != self.algebra:
            raise AlgebraMismatch("state and element from different samples")
        out = ExactScalar.zero()
        for m, c in x.support.items():
            v = self.values.get(m)
            if v is not None:
                out = out + c * v
        return out

    def spectral_support(self) -> frozenset[Element]:
        return frozenset(self.algebra.degree(m) for m in self.values)

    def __repr__(self) -> str:
        return f"SampleState({ {self.algebra.format_exponent(m): str(c) for m, c in sorted(self.values.items())} })"


def spectral_support(state: SampleState) -> frozenset[Element]:
    return state.spectral_support()


@dataclass(frozen=True)
class PositivityVerdict:
    positive: bool
    min_eigenvalue: float
    witness: tuple[complex, ...] | None = None


def generic_assignment(table: SymbolTable | None) -> dict[str, float]:
    """A fixed generic numeric assignment (fractional parts of sqrt(primes))."""
    primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    if table is None:
        return {}
    return {
        name: float(np.sqrt(primes[i % len(primes)]) % 1.0)
        for i, name in enumerate(table.symbols)
    }


def state_positivity(
    state: SampleState,
    window: Iterable[Sequence[int]],
    assignment: Mapping[str, float] | None = None,
    tolerance: float = 1e-9,
) -> PositivityVerdict:
    """Check the Gram matrix omega(b_m^* b_n) over a finite window numerically."""
    alg = state.algebra
    window = [alg.exponents.reduce(m) for m in window]
    if alg.exponents.zero() not in window:
        raise BadParameter("window must contain the zero exponent")
    if assignment is None:
        tables = {
            p.table
            for c in state.values.values()
            for p, _ in c.terms
            if p.table is not None
        }
        tables.update(
            p.table for row in alg.cocycle for p in row if p.table is not None
        )
        assignment = {}
        for t in sorted(tables, key=lambda t: t.symbols):
            assignment.update(generic_assignment(t))
    gram = np.empty((len(window), len(window)), dtype=complex)
    for i, m in enumerate(window):
        bm_star = alg.basis(m).star()
        for j, n in enumerate(window):
            gram[i, j] = state.evaluate(bm_star * alg.basis(n)).approx(assignment)
    eigvals, eigvecs = np.linalg.eigh((gram + gram.conj().T) / 2)
    lo = float(eigvals[0])
    if lo < -tolerance:
        return PositivityVerdict(False, lo, tuple(map(complex, eigvecs[:, 0])))
    return PositivityVerdict(True, lo)


# --- standard samples ------------------------------------------------------

def build_standard_sample(kind: str, **params) -> SampleAlgebra:
    """Named samples: function_algebra, clock_shift, parafermion, nc_torus."""
    if kind == "function_algebra":
        group: DegreeGroup = params["group"]
        names = params.get("names")
        if names is None:
            names = ("u",) if group.rank == 1 else tuple(
                f"x{i+1}" for i in range(group.rank)
            )
        zero_row = tuple(ZERO_PHASE for _ in range(group.rank))
        ident = tuple(
            tuple(1 if i == j else 0 for j in range(group.rank))
            for i in range(group.rank)
        )
        return SampleAlgebra(
            exponents=group,
            cocycle=tuple(zero_row for _ in range(group.rank)),
            degree_group=group,
            degree_matrix=ident,
            generator_names=tuple(names),
            name=f"C[{group}]",
        )
    if kind in ("clock_shift", "parafermion"):
        d = int(params["d"])
        if d < 2:
            raise BadParameter("clock-shift dimension must be >= 2")
        lattice = DegreeGroup(0, (d, d))
        q_inv = Phase.of(Fraction(-1, d))
        cocycle = (
            (ZERO_PHASE, ZERO_PHASE),
            (q_inv, ZERO_PHASE),
        )
        return SampleAlgebra(
            exponents=lattice,
            cocycle=cocycle,
            degree_group=DegreeGroup(0, (d,)),
            degree_matrix=((1,), (1,)),
            generator_names=("c1", "c2"),
            name=f"M{d}",
        )
    if kind == "nc_torus":
        alpha = params["alpha"]
        if not isinstance(alpha, Phase):
            raise BadParameter("nc_torus needs a Phase deformation parameter")
        lattice = DegreeGroup(2)
        cocycle = (
            (ZERO_PHASE, ZERO_PHASE),
            (-alpha, ZERO_PHASE),
        )
        ident = ((1, 0), (0, 1))
        return SampleAlgebra(
            exponents=lattice,
            cocycle=cocycle,
            degree_group=DegreeGroup(2),
            degree_matrix=ident,
            generator_names=("u", "w"),
            name="torus",
        )
    raise BadParameter(f"unknown sample kind {kind!r}")
