"""Acceptance battery: one test per criterion, each printing a pass/fail
line with its runtime against the stated budget.  All comparisons are
exact unless a numeric tolerance is explicitly part of the criterion."""

import random
import time
from fractions import Fraction
from math import gcd

import numpy as np

from gradechain.braid import (
    IndependenceModel,
    build_torus_braid_action,
    identity_action,
    obstruction_solve,
    verify_artin_relations,
    verify_braidability,
)
from gradechain.chain import (
    ChainElement,
    as_site,
    oracle_product,
    global_cocycle,
    standard_chain,
)
from gradechain.degrees import (
    Bicharacter,
    DegreeGroup,
    bicharacter_from_integer_matrix,
    subgroup_generated,
)
from gradechain.sample import SampleState
from gradechain.scalars import ExactScalar, Phase, SymbolTable
from gradechain.states import (
    AuditBudget,
    FreeMonomial,
    MixtureState,
    PinnedState,
    ProductState,
    audit_exchangeable,
    audit_spreadable,
    canonical_battery,
    eval_monomial,
    h_abelian_sufficient,
    poulsen_condition,
    product_state_exists,
    rn_audit,
)

Z3_SQ = DegreeGroup(0, (3, 3))
GOLDEN_TWIST = bicharacter_from_integer_matrix(Z3_SQ, [[0, 1], [1, 1]], 3)

CAR = standard_chain("car")
PF3 = standard_chain("parafermion", d=3)
GOLDEN = standard_chain("function", group=Z3_SQ, twist=GOLDEN_TWIST)

SYMBOLS = SymbolTable(("theta", "alpha"))
ALPHA = Phase.symbol("alpha", SYMBOLS)
THETA = Phase.symbol("theta", SYMBOLS)
TORUS = standard_chain("torus", alpha=ALPHA)
PAIR = standard_chain("torus_pair", theta=THETA, alpha=ALPHA)


class _Criterion:
    def __init__(self, number, description, limit):
        self.number = number
        self.description = description
        self.limit = limit
        self.start = None

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        status = "PASS" if exc_type is None else "FAIL"
        print(
            f"criterion {self.number}: {status} "
            f"({elapsed:.2f}s / limit {self.limit}s) {self.description}"
        )
        if exc_type is None:
            assert elapsed < self.limit, (
                f"criterion {self.number} exceeded its {self.limit}s budget "
                f"({elapsed:.2f}s)"
            )
        return False


def car_state(t: Fraction) -> SampleState:
    value = ExactScalar.unit(Phase.of(Fraction(1, 4))) * t
    return SampleState(CAR.sample, {(0, 0): 1, (1, 1): value})


def rand_chain_monomial(rng, ctx, max_sites=4, bound=2):
    rank = ctx.sample.exponents.rank
    sites = sorted(rng.sample(range(max_sites), rng.randrange(0, max_sites + 1)))
    return ctx.monomial(
        [
            (s, tuple(rng.randrange(-bound, bound + 1) for _ in range(rank)))
            for s in sites
        ]
    )


def test_criterion_1_golden_example():
    with _Criterion(1, "golden order-9 example, exact values", 1.0):
        iso = GOLDEN_TWIST.isotropy_set()
        assert set(iso.elements) == {(0, 0), (1, 1), (2, 2), (1, 0), (2, 0)}
        assert not iso.is_subgroup
        assert GOLDEN_TWIST.evaluate((1, 0), (1, 1)) == Phase.of(Fraction(1, 3))
        maximal = [s.elements() for s in GOLDEN_TWIST.maximal_isotropic_subgroups()]
        assert maximal == [
            ((0, 0), (1, 0), (2, 0)),
            ((0, 0), (1, 1), (2, 2)),
        ]
        assert poulsen_condition(GOLDEN_TWIST) is False
        assert h_abelian_sufficient(GOLDEN_TWIST).holds


def test_criterion_2_product_state_gate():
    with _Criterion(2, "existence gate with exact witness", 1.0):
        odd = SampleState(CAR.sample, {(0, 0): 1, (1, 0): Fraction(1, 2)})
        verdict = product_state_exists(odd, CAR.twist)
        assert not verdict.exists
        assert verdict.witness == ((1,), (1,))
        invariant = car_state(Fraction(1, 2))
        assert invariant.spectral_support() == {(0,)}
        assert product_state_exists(invariant, CAR.twist).exists


def test_criterion_3_spreadable_not_exchangeable():
    with _Criterion(3, "deformed chain: spreadable, not exchangeable", 10.0):
        trace = ProductState(TORUS, SampleState(TORUS.sample, {(0,): 1}))
        u = TORUS.sample.basis((1,))
        u_inv = TORUS.sample.basis((-1,))
        monomial = FreeMonomial.of([(1, u), (2, u), (1, u_inv), (2, u_inv)])
        value = eval_monomial(trace, monomial)
        assert value == ExactScalar.unit(ALPHA)
        swapped = monomial.relabel({as_site(1): as_site(2), as_site(2): as_site(1)})
        assert eval_monomial(trace, swapped) == value.conjugate()

        # the canonical battery alone must surface exactly this witness shape
        canonical_only = AuditBudget(samples=0, max_sites=4, max_letters=4,
                                     exponent_bound=1, seed=7)
        report = audit_exchangeable(trace, canonical_only)
        assert not report.passed
        wanted = "i[0](u^1) i[1](u^1) i[0](u^-1) i[1](u^-1)"
        hits = [w for w in report.witnesses if w.monomial == wanted]
        assert hits, [w.monomial for w in report.witnesses]
        expected_values = {str(ExactScalar.unit(ALPHA)), str(ExactScalar.unit(-ALPHA))}
        assert any(
            {str(w.value), str(w.mapped_value)} == expected_values for w in hits
        )

        full = AuditBudget(samples=500, max_sites=5, max_letters=6,
                           exponent_bound=2, seed=7)
        spread = audit_spreadable(trace, full)
        assert spread.passed
        assert spread.samples_run == len(canonical_battery(TORUS)) + 500


def test_criterion_4_finite_ryll_nardzewski():
    with _Criterion(4, "antisymmetric chain: spreadable implies exchangeable", 60.0):
        rng = random.Random(2718)
        states = []
        for _ in range(12):
            t = Fraction(rng.randrange(-4, 5), 8)
            states.append(ProductState(CAR, car_state(t)))
        for _ in range(8):
            a = ProductState(CAR, car_state(Fraction(rng.randrange(-4, 5), 8)))
            b = ProductState(CAR, car_state(Fraction(rng.randrange(-4, 5), 8)))
            w = Fraction(rng.randrange(1, 8), 8)
            states.append(MixtureState(CAR, [(w, a), (1 - w, b)]))
        assert len(states) == 20
        budget = AuditBudget(samples=100, max_sites=5, max_letters=6,
                             exponent_bound=2, seed=31)
        violations = 0
        for state in states:
            report = rn_audit(state, budget)  # raises on an RN violation
            assert report.antisymmetric
            if report.spreadable.passed and not report.exchangeable.passed:
                violations += 1
        assert violations == 0


def test_criterion_5_normal_ordering_oracle():
    with _Criterion(5, "merge vs closed-form cocycle, 1000+1000 per chain", 60.0):
        chains = [CAR, TORUS, PF3, GOLDEN]
        for ctx in chains:
            rng = random.Random(97)
            for _ in range(1000):
                x = rand_chain_monomial(rng, ctx)
                y = rand_chain_monomial(rng, ctx)
                phase, mono = oracle_product(ctx, x, y)
                got = ChainElement(ctx, {x: ExactScalar.one()}) * ChainElement(
                    ctx, {y: ExactScalar.one()}
                )
                assert got == ChainElement(ctx, {mono: ExactScalar.one().shift(phase)})
            for _ in range(1000):
                x, y, z = (rand_chain_monomial(rng, ctx) for _ in range(3))
                _, xy = oracle_product(ctx, x, y)
                _, yz = oracle_product(ctx, y, z)
                lhs = global_cocycle(ctx, x, y) + global_cocycle(ctx, xy, z)
                rhs = global_cocycle(ctx, y, z) + global_cocycle(ctx, x, yz)
                assert lhs == rhs


def test_criterion_6_odd_torsion_suite():
    with _Criterion(6, "200 random symmetric twists on odd torsion", 30.0):
        rng = random.Random(509)
        for _ in range(200):
            orders = tuple(rng.choice([3, 5, 7, 9]) for _ in range(rng.randrange(1, 4)))
            group = DegreeGroup(0, orders)
            mat = [[None] * len(orders) for _ in orders]
            for i in range(len(orders)):
                for j in range(i, len(orders)):
                    d = gcd(orders[i], orders[j])
                    mat[i][j] = mat[j][i] = Phase.of(Fraction(rng.randrange(d), d))
            twist = Bicharacter(group, tuple(tuple(row) for row in mat))
            assert twist.classify().symmetric
            assert h_abelian_sufficient(twist).holds
        # the even counter-case fails the predicate
        z2sq = DegreeGroup(0, (2, 2))
        counter = bicharacter_from_integer_matrix(z2sq, [[0, 1], [1, 0]], 2)
        verdict = h_abelian_sufficient(counter)
        assert not verdict.holds
        assert verdict.pair == ((0, 1), (1, 0))


def test_criterion_7_braid_obstruction():
    with _Criterion(7, "infeasibility trace for the doubled-torus braiding", 5.0):
        model = IndependenceModel(SYMBOLS)
        trace = obstruction_solve(model, 5)
        assert trace.infeasible
        assert [s.source for s in trace.steps] == [
            "rel3", "i_r", "i_42", "i_2bis", "i_2bis", "i_42", "i_3bis", "contradiction",
        ]
        by = {}
        for s in trace.steps:
            by.setdefault(s.source, []).append(dict(s.assignments))
        assert by["i_r"][0] == {f"q_{r}": Fraction(0) for r in range(2, 6)}
        assert by["i_42"][0] == {f"j_{r}": Fraction(0) for r in range(2, 6)}
        assert by["i_2bis"][0] == {"q_1": Fraction(0)}
        assert by["i_2bis"][1] == {"j_0": Fraction(-1)}
        assert by["i_42"][1] == {"j_1": Fraction(2)}
        assert by["i_3bis"][0] == {"j_1": Fraction(0)}
        assert trace.contradiction == ("j_1", "2", "0")


def test_criterion_8_torus_braid_action():
    with _Criterion(8, "torus braiding verifies; identity action does not", 30.0):
        chain = standard_chain("torus", alpha=THETA)
        action = build_torus_braid_action(THETA, window=4, context=chain)
        artin = verify_artin_relations(action, degree_bound=3)
        assert artin.passed, artin.failures
        haar = ProductState(chain, SampleState(chain.sample, {(0,): 1}))
        braidable = verify_braidability(action, haar, degree_bound=3)
        assert braidable.passed, braidable.to_json()
        ident = identity_action(chain, range(4), [1, 2, 3])
        report = verify_braidability(ident, None, degree_bound=1)
        assert not report.passed
        assert report.embedding_failures


def test_criterion_9_state_calculus():
    with _Criterion(9, "hermitian evaluation and PSD Gram windows", 60.0):
        rng = random.Random(1117)

        def rand_golden_state(gens):
            sub = subgroup_generated(Z3_SQ, gens)
            values = {Z3_SQ.zero(): ExactScalar.one()}
            for m in sub.elements():
                if m == Z3_SQ.zero() or m in values:
                    continue
                t = Fraction(rng.randrange(-2, 3), 6)
                values[m] = ExactScalar.rational(t)
                values[Z3_SQ.neg(m)] = ExactScalar.rational(t)
            return SampleState(GOLDEN.sample, values)

        product = ProductState(GOLDEN, rand_golden_state([(1, 1)]))
        pinned = PinnedState(
            GOLDEN,
            {0: rand_golden_state([(1, 0)]), 2: rand_golden_state([(1, 0)])},
            rand_golden_state([(1, 0)]),
        )
        mixture = MixtureState(
            GOLDEN,
            [(Fraction(1, 3), product),
             (Fraction(2, 3), ProductState(GOLDEN, rand_golden_state([(1, 0)])))],
        )
        for family in (product, pinned, mixture):
            for _ in range(500):
                letters = []
                for _ in range(rng.randrange(1, 5)):
                    site = rng.randrange(4)
                    m = (rng.randrange(3), rng.randrange(3))
                    letters.append((as_site(site), GOLDEN.sample.basis(m)))
                monomial = FreeMonomial.of(letters)
                lhs = eval_monomial(family, monomial.star())
                assert lhs == eval_monomial(family, monomial).conjugate()

        # PSD Gram windows over twenty gated product states
        for k in range(20):
            if k % 2 == 0:
                state = ProductState(CAR, car_state(Fraction(rng.randrange(-3, 4), 8)))
                ctx = CAR
            else:
                state = ProductState(
                    GOLDEN, rand_golden_state([(1, 1)] if k % 4 == 1 else [(1, 0)])
                )
                ctx = GOLDEN
            window = [
                ChainElement(ctx, {rand_chain_monomial(rng, ctx, 3, 1): ExactScalar.one()})
                for _ in range(8)
            ]
            gram = np.empty((8, 8), dtype=complex)
            for i, a in enumerate(window):
                a_star = a.star()
                for j, b in enumerate(window):
                    gram[i, j] = state.evaluate(a_star * b).approx({})
            eigvals = np.linalg.eigvalsh((gram + gram.conj().T) / 2)
            assert eigvals[0] >= -1e-9
