"""Finitely generated abelian degree groups, subgroups, and bicharacters.

A degree group is presented as Z^a + Z_{n_1} + ... + Z_{n_k}; elements are
integer vectors of length a+k with torsion coordinates reduced.  Subgroups
keep an integer row-echelon basis (generators plus the torsion relations
n_i e_i), which makes membership exact without enumeration.  A bicharacter
is a Phase-valued bilinear pairing given by its matrix on generator pairs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Sequence

from .errors import InfiniteGroup, WrongGroup
from .scalars import ZERO_PHASE, Phase

Element = tuple[int, ...]


@dataclass(frozen=True)
class DegreeGroup:
    """Z^free_rank plus one cyclic factor per torsion order."""

    free_rank: int = 0
    torsion_orders: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.free_rank < 0:
            raise ValueError("free_rank must be >= 0")
        if any(n < 2 for n in self.torsion_orders):
            raise ValueError("torsion orders must be >= 2")
        object.__setattr__(self, "torsion_orders", tuple(self.torsion_orders))

    @property
    def rank(self) -> int:
        return self.free_rank + len(self.torsion_orders)

    @property
    def is_finite(self) -> bool:
        return self.free_rank == 0

    def order(self) -> int:
        if not self.is_finite:
            raise InfiniteGroup(str(self))
        out = 1
        for n in self.torsion_orders:
            out *= n
        return out

    def zero(self) -> Element:
        return (0,) * self.rank

    def reduce(self, vec: Sequence[int]) -> Element:
        if len(vec) != self.rank:
            raise WrongGroup(f"expected length {self.rank}, got {len(vec)}")
        free = tuple(int(v) for v in vec[: self.free_rank])
        tors = tuple(
            int(v) % n for v, n in zip(vec[self.free_rank :], self.torsion_orders)
        )
        return free + tors

    def add(self, a: Sequence[int], b: Sequence[int]) -> Element:
        return self.reduce([x + y for x, y in zip(a, b, strict=True)])

    def neg(self, a: Sequence[int]) -> Element:
        return self.reduce([-x for x in a])

    def sub(self, a: Sequence[int], b: Sequence[int]) -> Element:
        return self.reduce([x - y for x, y in zip(a, b, strict=True)])

    def scale(self, a: Sequence[int], k: int) -> Element:
        return self.reduce([k * x for x in a])

    def generators(self) -> tuple[Element, ...]:
        return tuple(
            tuple(1 if i == j else 0 for j in range(self.rank))
            for i in range(self.rank)
        )

    def generator_order(self, i: int) -> int | None:
        """Order of the i-th generator, or None if infinite."""
        if i < self.free_rank:
            return None
        return self.torsion_orders[i - self.free_rank]

    def elements(self) -> Iterator[Element]:
        if not self.is_finite:
            raise InfiniteGroup(str(self))
        yield from itertools.product(*(range(n) for n in self.torsion_orders))

    def __str__(self) -> str:
        parts = ["Z"] * self.free_rank + [f"Z{n}" for n in self.torsion_orders]
        return " x ".join(parts) if parts else "0"


# --- integer row echelon over the lattice ---------------------------------

def _echelon_basis(rows: Iterable[Sequence[int]], ncols: int) -> list[tuple[int, list[int]]]:
    """Row-echelon basis (pivot column, row) of the integer row span."""
    work = [list(map(int, r)) for r in rows if any(r)]
    basis: list[tuple[int, list[int]]] = []
    for col in range(ncols):
        active = [r for r in work if r[col] != 0]
        work = [r for r in work if r[col] == 0]
        if not active:
            continue
        piv = active.pop()
        while active:
            r = active.pop()
            while r[col] != 0:
                q = piv[col] // r[col]
                for i in range(ncols):
                    piv[i] -= q * r[i]
                piv, r = r, piv
            if any(r):
                work.append(r)
        if piv[col] < 0:
            piv = [-v for v in piv]
        basis.append((col, piv))
    return basis


class Subgroup:
    """Subgroup of a DegreeGroup generated by a list of elements."""

    def __init__(self, parent: DegreeGroup, generators: Iterable[Sequence[int]]) -> None:
        self.parent = parent
        self.generators = tuple(parent.reduce(g) for g in generators)
        rows = [list(g) for g in self.generators]
        for i, n in enumerate(parent.torsion_orders):
            rel = [0] * parent.rank
            rel[parent.free_rank + i] = n
            rows.append(rel)
        self._basis = _echelon_basis(rows, parent.rank)
        self._elements: tuple[Element, ...] | None = None

    def __contains__(self, vec: Sequence[int]) -> bool:
        x = list(self.parent.reduce(vec))
        for col, row in self._basis:
            if x[col] % row[col] != 0:
                return False
            q = x[col] // row[col]
            for i in range(len(x)):
                x[i] -= q * row[i]
        return not any(x)

    def elements(self) -> tuple[Element, ...]:
        """All elements, sorted; only for finite parents."""
        if self._elements is None:
            if not self.parent.is_finite:
                raise InfiniteGroup(str(self.parent))
            seen = {self.parent.zero()}
            frontier = [self.parent.zero()]
            while frontier:
                x = frontier.pop()
                for g in self.generators:
                    y = self.parent.add(x, g)
                    if y not in seen:
                        seen.add(y)
                        frontier.append(y)
            self._elements = tuple(sorted(seen))
        return self._elements

    def order(self) -> int:
        return len(self.elements())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subgroup):
            return NotImplemented
        if self.parent != other.parent:
            return False
        if self.parent.is_finite:
            return self.elements() == other.elements()
        return all(g in other for g in self.generators) and all(
            g in self for g in other.generators
        )

    def __hash__(self) -> int:
        if self.parent.is_finite:
            return hash((self.parent, self.elements()))
        return hash(self.parent)

    def __le__(self, other: Subgroup) -> bool:
        return all(g in other for g in self.generators)

    def __repr__(self) -> str:
        if self.parent.is_finite:
            return f"Subgroup{list(self.elements())}"
        return f"Subgroup(gens={list(self.generators)})"


def subgroup_generated(parent: DegreeGroup, gens: Iterable[Sequence[int]]) -> Subgroup:
    return Subgroup(parent, gens)


def all_subgroups(group: DegreeGroup) -> list[Subgroup]:
    """The full subgroup lattice of a finite group, by closure search."""
    if not group.is_finite:
        raise InfiniteGroup(str(group))
    elems = list(group.elements())
    trivial = Subgroup(group, [])
    found: dict[tuple[Element, ...], Subgroup] = {trivial.elements(): trivial}
    frontier = [trivial]
    while frontier:
        sub = frontier.pop()
        for g in elems:
            if g not in sub:
                bigger = Subgroup(group, sub.generators + (g,))
                key = bigger.elements()
                if key not in found:
                    found[key] = bigger
                    frontier.append(bigger)
    return sorted(found.values(), key=lambda s: s.elements())


# --- bicharacters ----------------------------------------------------------

class Classification(NamedTuple):
    symmetric: bool
    antisymmetric: bool


class IsotropySet(NamedTuple):
    """The set of chi with v(chi, chi) = 1, plus a closure verdict."""

    elements: tuple[Element, ...]
    is_subgroup: bool


@dataclass(frozen=True)
class Bicharacter:
    """Phase-valued bilinear pairing on a degree group.

    matrix[i][j] holds the phase of v on the (i, j) generator pair; torsion
    consistency (n_i B[i][j] = 0 = n_j B[i][j] mod 1) is enforced, which is
    what keeps symbolic entries confined to free coordinates.
    """

    group: DegreeGroup
    matrix: tuple[tuple[Phase, ...], ...]

    def __post_init__(self) -> None:
        rank = self.group.rank
        mat = tuple(tuple(row) for row in self.matrix)
        if len(mat) != rank or any(len(row) != rank for row in mat):
            raise ValueError(f"matrix must be {rank}x{rank}")
        object.__setattr__(self, "matrix", mat)
        for i in range(rank):
            n = self.group.generator_order(i)
            if n is None:
                continue
            for j in range(rank):
                if not mat[i][j].scale(n).is_zero():
                    raise ValueError(
                        f"entry ({i},{j}) breaks torsion of order {n}"
                    )
                if not mat[j][i].scale(n).is_zero():
                    raise ValueError(
                        f"entry ({j},{i}) breaks torsion of order {n}"
                    )

    def evaluate(self, chi: Sequence[int], eta: Sequence[int]) -> Phase:
        chi = self.group.reduce(chi)
        eta = self.group.reduce(eta)
        acc = ZERO_PHASE
        for i, ci in enumerate(chi):
            if not ci:
                continue
            for j, ej in enumerate(eta):
                if ej:
                    acc = acc + self.matrix[i][j].scale(ci * ej)
        return acc

    def classify(self) -> Classification:
        rank = self.group.rank
        sym = all(
            self.matrix[i][j] == self.matrix[j][i]
            for i in range(rank)
            for j in range(rank)
        )
        anti = all(
            self.matrix[i][j] == -self.matrix[j][i]
            for i in range(rank)
            for j in range(rank)
        )
        return Classification(sym, anti)

    def symmetrized(self) -> Bicharacter:
        rank = self.group.rank
        return Bicharacter(
            self.group,
            tuple(
                tuple(self.matrix[i][j] + self.matrix[j][i] for j in range(rank))
                for i in range(rank)
            ),
        )

    def isotropy_set(self) -> IsotropySet:
        """All chi with v(chi, chi) = 0 as a phase; finite groups only."""
        if not self.group.is_finite:
            raise InfiniteGroup(str(self.group))
        members = tuple(
            chi for chi in self.group.elements() if self.evaluate(chi, chi).is_zero()
        )
        member_set = set(members)
        closed = all(
            self.group.add(a, b) in member_set
            for a in members
            for b in members
        )
        return IsotropySet(members, closed)

    def vanishes_on(self, sub: Subgroup) -> bool:
        """True iff v is trivial on sub x sub (generator pairs suffice)."""
        return all(
            self.evaluate(a, b).is_zero()
            for a in sub.generators
            for b in sub.generators
        )

    def maximal_isotropic_subgroups(self) -> list[Subgroup]:
        if not self.group.is_finite:
            raise InfiniteGroup(str(self.group))
        isotropic = [s for s in all_subgroups(self.group) if self.vanishes_on(s)]
        maximal = [
            s
            for s in isotropic
            if not any(s is not t and set(s.elements()) < set(t.elements()) for t in isotropic)
        ]
        return sorted(maximal, key=lambda s: s.elements())


def bicharacter_from_integer_matrix(
    group: DegreeGroup, entries: Sequence[Sequence[int]], denominator: int
) -> Bicharacter:
    """Bicharacter with matrix entries entries[i][j] / denominator."""
    from fractions import Fraction

    return Bicharacter(
        group,
        tuple(
            tuple(Phase.of(Fraction(entries[i][j], denominator)) for j in range(group.rank))
            for i in range(group.rank)
        ),
    )
