"""States on chains and the distributional-symmetry auditors.

States come in three flavours: a product state built from one sample state
(subject to the existence gate: the twist must vanish on the spectral
support squared), a pinned state with per-site sample states (gated on the
union of supports, which is what keeps evaluation hermitian), and finite
convex mixtures with exact rational weights.

Free monomials -- words i_{j1}(a_1) ... i_{jn}(a_n) with arbitrary site
sequences -- are evaluated by rewriting into the chain's normal form and
factorizing sitewise.  The auditors compare such evaluations against
site relabelings: permutations (exchangeability), strictly increasing maps
(spreadability), or the shift alone (stationarity).  Each audit runs a
deterministic canonical battery (all short two-site words in the sample
generators, which is where all the interesting failures live) plus a seeded
random battery.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

from .chain import (
    ChainContext,
    ChainElement,
    ChainMonomial,
    Site,
    as_site,
    dyadic_partial_shift,
    dyadic_shift,
    extend_to_permutation,
    partial_shift,
    shift,
    table_map,
)
from .degrees import Bicharacter, Element
from .errors import ContextMismatch, GateFailed
from .sample import SampleElement, SampleState, generic_assignment
from .scalars import ExactScalar, SymbolTable


# --- free monomials ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FreeMonomial:
    """A word of sample elements at sites, repeats allowed."""

    letters: tuple[tuple[Site, SampleElement], ...]

    @classmethod
    def of(cls, letters: Iterable[tuple[Site | int, SampleElement]]) -> FreeMonomial:
        return cls(tuple((as_site(s), a) for s, a in letters))

    def sites(self) -> tuple[Site, ...]:
        return tuple(sorted({s for s, _ in self.letters}))

    def star(self) -> FreeMonomial:
        return FreeMonomial(tuple((s, a.star()) for s, a in reversed(self.letters)))

    def relabel(self, fn: Callable[[Site], Site] | Mapping[Site, Site]) -> FreeMonomial:
        if isinstance(fn, Mapping):
            table = {as_site(k): as_site(v) for k, v in fn.items()}
            return FreeMonomial(tuple((table.get(s, s), a) for s, a in self.letters))
        return FreeMonomial(tuple((as_site(fn(s)), a) for s, a in self.letters))

    def to_chain(self, context: ChainContext) -> ChainElement:
        out = ChainElement.one(context)
        for site, a in self.letters:
            out = out * ChainElement.embed(context, site, a)
        return out

    def describe(self) -> str:
        if not self.letters:
            return "1"
        return " ".join(
            f"i[{s}]({a!r})" if len(a.support) != 1 else
            f"i[{s}]({a.algebra.format_exponent(next(iter(a.support)))})"
            for s, a in self.letters
        )


# --- the existence gate --------------------------------------------------------

class GateVerdict(NamedTuple):
    exists: bool
    witness: tuple[Element, Element] | None


def product_state_exists(omega: SampleState, twist: Bicharacter) -> GateVerdict:
    """Decide membership of omega in the gated family: the twist must be
    trivial on supp x supp for the product construction to give a state."""
    support = sorted(omega.spectral_support())
    for a in support:
        for b in support:
            if not twist.evaluate(a, b).is_zero():
                return GateVerdict(False, (a, b))
    return GateVerdict(True, None)


# --- chain states ---------------------------------------------------------------

class ChainState:
    """Base: evaluation by normal ordering plus sitewise factorization."""

    context: ChainContext

    def state_at(self, site: Site) -> SampleState:
        raise NotImplementedError

    def evaluate(self, x: ChainElement | FreeMonomial) -> ExactScalar:
        if isinstance(x, FreeMonomial):
            x = x.to_chain(self.context)
        if x.context != self.context:
            raise ContextMismatch("state and element from different chains")
        out = ExactScalar.zero()
        for mono, coeff in x.support.items():
            term = coeff
            for site, m in mono.factors:
                v = self.state_at(site).value(m)
                if v.is_zero():
                    term = ExactScalar.zero()
                    break
                term = term * v
            out = out + term
        return out

    def label(self) -> str:
        raise NotImplementedError


class ProductState(ChainState):
    """x omega: the same sample state at every site; requires the gate."""

    def __init__(self, context: ChainContext, omega: SampleState) -> None:
        if omega.algebra != context.sample:
            raise ContextMismatch("state on a different sample")
        verdict = product_state_exists(omega, context.twist)
        if not verdict.exists:
            raise GateFailed(f"twist not trivial on support pair {verdict.witness}")
        self.context = context
        self.omega = omega

    def state_at(self, site: Site) -> SampleState:
        return self.omega

    def label(self) -> str:
        return "product"


class PinnedState(ChainState):
    """Per-site sample states over a default, optionally periodic.

    The gate runs on the union of all spectral supports; without it the
    functional would not even be hermitian.
    """

    def __init__(
        self,
        context: ChainContext,
        table: Mapping[Site | int, SampleState],
        default: SampleState,
        period: int | None = None,
    ) -> None:
        self.context = context
        self.table = {as_site(k): v for k, v in table.items()}
        self.default = default
        self.period = period
        union: set[Element] = set(default.spectral_support())
        for st in self.table.values():
            if st.algebra != context.sample or default.algebra != context.sample:
                raise ContextMismatch("pinned state on a different sample")
            union |= st.spectral_support()
        for a in sorted(union):
            for b in sorted(union):
                if not context.twist.evaluate(a, b).is_zero():
                    raise GateFailed(f"twist not trivial on support pair {(a, b)}")

    def state_at(self, site: Site) -> SampleState:
        key = as_site(site)
        if self.period is not None:
            key = key % self.period
        return self.table.get(key, self.default)

    def label(self) -> str:
        return "pinned"


class MixtureState(ChainState):
    """Finite convex mixture with exact rational weights."""

    def __init__(
        self, context: ChainContext, components: Sequence[tuple[Fraction | int, ChainState]]
    ) -> None:
        self.context = context
        self.components = tuple((Fraction(w), s) for w, s in components)
        if any(w <= 0 for w, _ in self.components):
            raise ValueError("mixture weights must be positive")
        if sum(w for w, _ in self.components) != 1:
            raise ValueError("mixture weights must sum to 1")
        for _, s in self.components:
            if s.context != context:
                raise ContextMismatch("mixture component from a different chain")

    def evaluate(self, x: ChainElement | FreeMonomial) -> ExactScalar:
        if isinstance(x, FreeMonomial):
            x = x.to_chain(self.context)
        out = ExactScalar.zero()
        for w, s in self.components:
            out = out + s.evaluate(x) * w
        return out

    def label(self) -> str:
        return "mixture"


def eval_monomial(state: ChainState, monomial: FreeMonomial) -> ExactScalar:
    return state.evaluate(monomial)


# --- audit machinery -------------------------------------------------------------

@dataclass(frozen=True)
class AuditBudget:
    samples: int = 500
    max_sites: int = 5
    max_letters: int = 6
    exponent_bound: int = 2
    seed: int = 0


@dataclass(frozen=True)
class Witness:
    monomial: str
    map: str
    value: ExactScalar
    mapped_value: ExactScalar


@dataclass
class AuditReport:
    kind: str
    verdict: str
    witnesses: list[Witness]
    samples_run: int
    seed: int

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self, assignment: Mapping[str, float] | None = None) -> dict:
        def render(s: ExactScalar):
            out = {"exact": str(s)}
            try:
                z = s.approx(assignment)
                out["approx"] = [round(z.real, 12), round(z.imag, 12)]
            except Exception:
                pass
            return out

        return {
            "kind": self.kind,
            "verdict": self.verdict,
            "seed": self.seed,
            "samples": self.samples_run,
            "witnesses": [
                {
                    "monomial": w.monomial,
                    "map": w.map,
                    "value": render(w.value),
                    "mapped_value": render(w.mapped_value),
                }
                for w in self.witnesses
            ],
        }


def _stream_rng(seed: int, *parts: int) -> random.Random:
    """Independent deterministic stream per index, from integer mixing only."""
    state = seed & 0xFFFFFFFFFFFFFFFF
    for p in parts:
        state = (state * 6364136223846793005 + p + 1442695040888963407) % 2**64
    return random.Random(state)


def _generator_letters(context: ChainContext) -> list[SampleElement]:
    """Basis generators and their inverses, deduplicated after reduction."""
    sample = context.sample
    seen = []
    for g in sample.exponents.generators():
        for m in (g, sample.exponents.neg(g)):
            if m not in seen and m != sample.exponents.zero():
                seen.append(m)
    return [sample.basis(m) for m in seen]


def canonical_battery(context: ChainContext, max_len: int = 4) -> list[FreeMonomial]:
    """All two-site words of length <= max_len in the generator letters,
    with alternating sites (the canonical home of every known witness)."""
    letters = _generator_letters(context)
    out = []
    for length in range(1, max_len + 1):
        for start in (0, 1):
            sites = [as_site((start + i) % 2) for i in range(length)]
            for combo in itertools.product(letters, repeat=length):
                out.append(FreeMonomial.of(zip(sites, combo)))
    return out


def random_battery(context: ChainContext, budget: AuditBudget) -> list[FreeMonomial]:
    sample = context.sample
    rank = sample.exponents.rank
    out = []
    for index in range(budget.samples):
        rng = _stream_rng(budget.seed, 1, index)
        length = rng.randrange(1, budget.max_letters + 1)
        site = rng.randrange(budget.max_sites)
        letters = []
        for _ in range(length):
            m = sample.exponents.zero()
            while m == sample.exponents.zero():
                m = sample.exponents.reduce(
                    tuple(
                        rng.randrange(-budget.exponent_bound, budget.exponent_bound + 1)
                        for _ in range(rank)
                    )
                )
            letters.append((as_site(site), sample.basis(m)))
            if budget.max_sites > 1:
                step = rng.randrange(1, budget.max_sites)
                site = (site + step) % budget.max_sites
        out.append(FreeMonomial.of(letters))
    return out


def _spreading_maps(monomial: FreeMonomial, rng: random.Random, budget: AuditBudget):
    """Deterministic increasing maps plus seeded random ones."""
    maps = [
        shift(1),
        partial_shift(0),
        partial_shift(1),
        partial_shift(2),
        dyadic_partial_shift(0),
        dyadic_partial_shift(1),
        dyadic_shift(1, 1),
    ]
    occ = monomial.sites()
    for _ in range(2):
        images = sorted(rng.sample(range(0, 3 * budget.max_sites + 3), len(occ)))
        maps.append(table_map(dict(zip(occ, map(as_site, images)))))
    return [(m.name, m) for m in maps]


def _permutation_maps(monomial: FreeMonomial, rng: random.Random, budget: AuditBudget):
    """Adjacent transpositions, random permutations, and the extensions of
    every spreading map (so an exchangeable pass forces a spreadable pass
    on the same battery)."""
    occ = monomial.sites()
    maps = []
    for i in range(budget.max_sites):
        a, b = as_site(i), as_site(i + 1)
        maps.append((f"swap({i},{i + 1})", {a: b, b: a}))
    for _ in range(2):
        shuffled = list(occ)
        rng.shuffle(shuffled)
        maps.append(("random_permutation", dict(zip(occ, shuffled))))
    for name, f in _spreading_maps(monomial, rng, budget):
        maps.append((f"extends[{name}]", extend_to_permutation(occ, f)))
    return maps


def _run_audit(
    state: ChainState,
    kind: str,
    monomials: Sequence[FreeMonomial],
    maps_for: Callable[[FreeMonomial, random.Random], Iterable[tuple[str, object]]],
    budget: AuditBudget,
    max_witnesses: int = 25,
) -> AuditReport:
    witnesses: list[Witness] = []
    for index, monomial in enumerate(monomials):
        rng = _stream_rng(budget.seed, 2, index)
        value = state.evaluate(monomial)
        for name, fn in maps_for(monomial, rng):
            mapped = state.evaluate(monomial.relabel(fn))
            if mapped != value:
                witnesses.append(Witness(monomial.describe(), name, value, mapped))
                if len(witnesses) >= max_witnesses:
                    return AuditReport(kind, "fail", witnesses, index + 1, budget.seed)
    verdict = "fail" if witnesses else "pass"
    return AuditReport(kind, verdict, witnesses, len(monomials), budget.seed)


def _battery(state: ChainState, budget: AuditBudget) -> list[FreeMonomial]:
    return canonical_battery(state.context) + random_battery(state.context, budget)


def audit_exchangeable(state: ChainState, budget: AuditBudget | None = None) -> AuditReport:
    budget = budget or AuditBudget()
    return _run_audit(
        state,
        "exchangeable",
        _battery(state, budget),
        lambda m, rng: _permutation_maps(m, rng, budget),
        budget,
    )


def audit_spreadable(state: ChainState, budget: AuditBudget | None = None) -> AuditReport:
    budget = budget or AuditBudget()
    return _run_audit(
        state,
        "spreadable",
        _battery(state, budget),
        lambda m, rng: _spreading_maps(m, rng, budget),
        budget,
    )


def audit_under_maps(
    state: ChainState, maps: Sequence, budget: AuditBudget | None = None, kind: str = "custom"
) -> AuditReport:
    budget = budget or AuditBudget()
    named = [(getattr(f, "name", str(f)), f) for f in maps]
    return _run_audit(state, kind, _battery(state, budget), lambda m, rng: named, budget)


def audit_stationary(state: ChainState, budget: AuditBudget | None = None) -> AuditReport:
    return audit_under_maps(state, [shift(1)], budget, kind="stationary")


@dataclass
class RNReport:
    spreadable: AuditReport
    exchangeable: AuditReport
    antisymmetric: bool
    verdict: str

    @property
    def passed(self) -> bool:
        return self.spreadable.passed and self.exchangeable.passed

    def to_json(self, assignment=None) -> dict:
        return {
            "antisymmetric": self.antisymmetric,
            "verdict": self.verdict,
            "spreadable": self.spreadable.to_json(assignment),
            "exchangeable": self.exchangeable.to_json(assignment),
        }


def rn_audit(state: ChainState, budget: AuditBudget | None = None) -> RNReport:
    """Run both audits on one shared battery and reconcile the verdicts.

    For an antisymmetric twist a spreadable pass forces an exchangeable
    pass; a violation could only come from a bug in the evaluator.
    """
    budget = budget or AuditBudget()
    monomials = _battery(state, budget)
    spread = _run_audit(
        state, "spreadable", monomials, lambda m, rng: _spreading_maps(m, rng, budget), budget
    )
    exch = _run_audit(
        state, "exchangeable", monomials, lambda m, rng: _permutation_maps(m, rng, budget), budget
    )
    antisymmetric = state.context.twist.classify().antisymmetric
    if antisymmetric and spread.passed and not exch.passed:
        raise AssertionError(
            "spreadable passed but exchangeable failed on an antisymmetric twist; "
            "this indicates an evaluator bug"
        )
    if spread.passed and exch.passed:
        verdict = "spreadable and exchangeable"
    elif spread.passed:
        verdict = "spreadable and not exchangeable (twist not antisymmetric)"
    elif exch.passed:
        verdict = "exchangeable and not spreadable (battery artifact)"
    else:
        verdict = "neither spreadable nor exchangeable"
    return RNReport(spread, exch, antisymmetric, verdict)


# --- condition predicates ----------------------------------------------------------

class SufficiencyVerdict(NamedTuple):
    holds: bool
    pair: tuple[Element, Element] | None


def _finite_integer_pairing(twist: Bicharacter):
    """(N, values-on-delta, delta-elements) with entries in Z_N, or None.

    Finite groups with purely rational twists reduce to integer arithmetic
    mod the common denominator, which keeps the all-pairs scans cheap.
    """
    import numpy as np

    if not twist.group.is_finite:
        return None
    if any(p.symbolic for row in twist.matrix for p in row):
        return None
    from math import lcm

    denoms = [p.rational.denominator for row in twist.matrix for p in row]
    n = lcm(*denoms) if denoms else 1
    matrix = np.array(
        [[int(p.rational * n) for p in row] for row in twist.matrix], dtype=np.int64
    )
    elems = np.array(list(twist.group.elements()), dtype=np.int64)
    quad = np.einsum("ki,ij,kj->k", elems, matrix, elems) % n
    delta = elems[quad == 0]
    values = (delta @ matrix @ delta.T) % n
    return n, values, [tuple(int(v) for v in row) for row in delta]


def h_abelian_sufficient(twist: Bicharacter) -> SufficiencyVerdict:
    """For every pair in the isotropy set, either the twist is trivial on it
    or the symmetrized twist is not; the failing pair is returned otherwise."""
    import numpy as np

    data = _finite_integer_pairing(twist)
    if data is not None:
        n, values, delta = data
        bad = (values != 0) & ((values + values.T) % n == 0)
        if bad.any():
            i, j = map(int, np.argwhere(bad)[0])
            return SufficiencyVerdict(False, (delta[i], delta[j]))
        return SufficiencyVerdict(True, None)
    delta = twist.isotropy_set().elements
    sym = twist.symmetrized()
    for chi in delta:
        for eta in delta:
            if twist.evaluate(chi, eta).is_zero():
                continue
            if sym.evaluate(chi, eta).is_zero():
                return SufficiencyVerdict(False, (chi, eta))
    return SufficiencyVerdict(True, None)


def poulsen_condition(twist: Bicharacter) -> bool:
    """True iff the twist is trivial on the isotropy set squared."""
    data = _finite_integer_pairing(twist)
    if data is not None:
        _, values, _ = data
        return not values.any()
    delta = twist.isotropy_set().elements
    return all(
        twist.evaluate(chi, eta).is_zero() for chi in delta for eta in delta
    )


@dataclass
class WitnessSearchOutcome:
    witness: dict | None
    pairs_tested: int

    @property
    def conclusive(self) -> bool:
        # finding a witness settles the question; exhausting a family does not
        return self.witness is not None


def _block_monomials(
    context: ChainContext, sites: Sequence[Site], bound: int, max_factors: int = 2
) -> list[ChainMonomial]:
    sample = context.sample
    rank = sample.exponents.rank
    exps = [
        sample.exponents.reduce(v)
        for v in itertools.product(range(-bound, bound + 1), repeat=rank)
    ]
    exps = sorted(set(exps) - {sample.exponents.zero()})
    out = []
    for count in range(1, max_factors + 1):
        for chosen in itertools.combinations(sorted(sites), count):
            for combo in itertools.product(exps, repeat=count):
                out.append(context.monomial(zip(chosen, combo)))
    return out


def h_abelian_witness_search(
    context: ChainContext,
    states: Sequence[ChainState],
    bound: int = 1,
    block: int = 2,
) -> WitnessSearchOutcome:
    """Search the supplied states for localized homogeneous a, b with
    disjoint supports (a entirely left of b), isotropic degrees, nontrivial
    twist between them, and a nonzero joint value.

    Exhausting the family without a witness is inconclusive: the theorem
    this feeds quantifies over all invariant states, not a finite list.
    """
    twist = context.twist
    sample = context.sample
    left = _block_monomials(context, [as_site(i) for i in range(block)], bound)
    right = _block_monomials(
        context, [as_site(block + i) for i in range(block)], bound
    )
    tested = 0
    for a in left:
        da = a.total_degree(sample)
        if not twist.evaluate(da, da).is_zero():
            continue
        for b in right:
            db = b.total_degree(sample)
            if not twist.evaluate(db, db).is_zero():
                continue
            if twist.evaluate(da, db).is_zero():
                continue
            tested += 1
            ab = ChainElement(context, {a: ExactScalar.one()}) * ChainElement(
                context, {b: ExactScalar.one()}
            )
            for k, state in enumerate(states):
                value = state.evaluate(ab)
                if not value.is_zero():
                    return WitnessSearchOutcome(
                        {
                            "a": str(a),
                            "b": str(b),
                            "degrees": (da, db),
                            "state_index": k,
                            "value": str(value),
                        },
                        tested,
                    )
    return WitnessSearchOutcome(None, tested)


def audit_assignment(state: ChainState) -> dict[str, float]:
    """Generic numeric assignment for every symbol table reachable from the state."""
    tables: set[SymbolTable] = set()
    for row in state.context.twist.matrix:
        for p in row:
            if p.table is not None:
                tables.add(p.table)
    for row in state.context.sample.cocycle:
        for p in row:
            if p.table is not None:
                tables.add(p.table)
    out: dict[str, float] = {}
    for t in sorted(tables, key=lambda t: t.symbols):  # deterministic across runs
        out.update(generic_assignment(t))
    return out
