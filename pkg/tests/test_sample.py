import random
from fractions import Fraction

import pytest

from gradechain.degrees import DegreeGroup, subgroup_generated
from gradechain.errors import AlgebraMismatch, BadParameter
from gradechain.sample import (
    SampleElement,
    SampleState,
    build_standard_sample,
    spectral_projection,
    state_positivity,
)
from gradechain.scalars import ExactScalar, Phase, SymbolTable

TBL = SymbolTable(("alpha",))
ALPHA = Phase.symbol("alpha", TBL)

Z3_SQ = DegreeGroup(0, (3, 3))

CAR = build_standard_sample("clock_shift", d=2)
PF3 = build_standard_sample("parafermion", d=3)
TORUS = build_standard_sample("nc_torus", alpha=ALPHA)
FUNC = build_standard_sample("function_algebra", group=Z3_SQ)
LINE = build_standard_sample("function_algebra", group=DegreeGroup(1))


def rand_element(rng, alg, max_terms=3, bound=2):
    support = {}
    for _ in range(rng.randrange(1, max_terms + 1)):
        m = alg.exponents.reduce(
            tuple(rng.randrange(-bound, bound + 1) for _ in range(alg.exponents.rank))
        )
        support[m] = ExactScalar.rational(rng.randrange(-3, 4))
    return SampleElement(alg, support)


class TestConstruction:
    def test_clock_shift_2_anticommutes(self):
        c1, c2 = CAR.generator(0), CAR.generator(1)
        assert c1 * c2 == (c2 * c1).scale(Phase.of(Fraction(1, 2)))
        assert (c1 * c2 + c2 * c1).support == {}

    def test_parafermion_3_torsion_and_q(self):
        c1 = PF3.generator(0)
        assert c1 * c1 * c1 == PF3.one()
        c2 = PF3.generator(1)
        # c1 c2 = q c2 c1 with q = e^{2 pi i / 3}
        assert c1 * c2 == (c2 * c1).scale(Phase.of(Fraction(1, 3)))

    def test_torus_commutation(self):
        u, w = TORUS.generator(0), TORUS.generator(1)
        assert u * w == (w * u).scale(ALPHA)

    def test_torus_basis_is_u_w_normal_form(self):
        u, w = TORUS.generator(0), TORUS.generator(1)
        assert (u * w).support == {(1, 1): ExactScalar.one()}

    def test_function_algebra_is_commutative(self):
        a, b = FUNC.basis((1, 2)), FUNC.basis((2, 1))
        assert a * b == b * a

    def test_unknown_kind(self):
        with pytest.raises(BadParameter):
            build_standard_sample("free_group")
        with pytest.raises(BadParameter):
            build_standard_sample("clock_shift", d=1)

    def test_unit(self):
        x = rand_element(random.Random(1), TORUS)
        assert TORUS.one() * x == x
        assert x * TORUS.one() == x


class TestAlgebraLaws:
    @pytest.mark.parametrize("alg", [CAR, PF3, TORUS, FUNC], ids=lambda a: a.name)
    def test_associativity(self, alg):
        rng = random.Random(7)
        for _ in range(40):
            x, y, z = (rand_element(rng, alg) for _ in range(3))
            assert (x * y) * z == x * (y * z)

    @pytest.mark.parametrize("alg", [CAR, PF3, TORUS, FUNC], ids=lambda a: a.name)
    def test_star_involutive_antiautomorphism(self, alg):
        rng = random.Random(9)
        for _ in range(40):
            x, y = rand_element(rng, alg), rand_element(rng, alg)
            assert x.star().star() == x
            assert (x * y).star() == y.star() * x.star()

    @pytest.mark.parametrize("alg", [CAR, PF3, TORUS, FUNC], ids=lambda a: a.name)
    def test_basis_unitarity(self, alg):
        rng = random.Random(11)
        for _ in range(20):
            m = tuple(
                rng.randrange(-2, 3) for _ in range(alg.exponents.rank)
            )
            b = alg.basis(m)
            assert b.star() * b == alg.one()

    def test_star_negates_degree(self):
        rng = random.Random(13)
        for _ in range(20):
            m = tuple(rng.randrange(-2, 3) for _ in range(2))
            b = TORUS.basis(m)
            assert b.star().degree() == TORUS.degree_group.neg(b.degree())

    def test_mismatched_algebras(self):
        with pytest.raises(AlgebraMismatch):
            CAR.one() * PF3.one()

    @pytest.mark.parametrize("alg", [CAR, PF3, TORUS, FUNC], ids=lambda a: a.name)
    def test_cocycle_two_cocycle_identity(self, alg):
        # c(m,n) + c(m+n,p) = c(n,p) + c(m,n+p); automatic for bilinear c,
        # asserted anyway
        rng = random.Random(29)
        E = alg.exponents
        for _ in range(60):
            m, n, p = (
                E.reduce(tuple(rng.randrange(-3, 4) for _ in range(E.rank)))
                for _ in range(3)
            )
            lhs = alg.cocycle_phase(m, n) + alg.cocycle_phase(E.add(m, n), p)
            rhs = alg.cocycle_phase(n, p) + alg.cocycle_phase(m, E.add(n, p))
            assert lhs == rhs


class TestSpectralProjection:
    def test_degree_zero_part(self):
        x = LINE.one().scale(2) + LINE.generator(0).scale(3)
        p = spectral_projection(x, subgroup_generated(DegreeGroup(1), []))
        assert p == LINE.one().scale(2)

    def test_full_group_identity(self):
        x = rand_element(random.Random(3), FUNC)
        whole = subgroup_generated(Z3_SQ, [(1, 0), (0, 1)])
        assert spectral_projection(x, whole) == x

    def test_golden_subgroup(self):
        g1 = subgroup_generated(Z3_SQ, [(1, 1)])
        x = FUNC.basis((1, 1)) + FUNC.basis((1, 0))
        assert spectral_projection(x, g1) == FUNC.basis((1, 1))

    def test_idempotent_unital_bimodule(self):
        rng = random.Random(17)
        g1 = subgroup_generated(Z3_SQ, [(1, 1)])
        for _ in range(30):
            x, y = rand_element(rng, FUNC), rand_element(rng, FUNC)
            px = spectral_projection(x, g1)
            assert spectral_projection(px, g1) == px
            assert spectral_projection(FUNC.one(), g1) == FUNC.one()
            # bimodule property over the fixed subalgebra
            assert spectral_projection(px * y, g1) == px * spectral_projection(y, g1)

    def test_full_spectrum_of_function_algebra(self):
        # every degree carries a basis monomial by construction
        degrees = {FUNC.degree(m) for m in Z3_SQ.elements()}
        assert degrees == set(Z3_SQ.elements())


class TestStates:
    def test_trace_support_trivial(self):
        tr = SampleState(TORUS, {(0, 0): 1})
        assert tr.spectral_support() == {(0, 0)}

    def test_point_evaluation_full_support(self):
        values = {m: 1 for m in Z3_SQ.elements()}
        omega = SampleState(FUNC, values)
        assert omega.spectral_support() == frozenset(Z3_SQ.elements())

    def test_invariant_state_support(self):
        omega = SampleState(CAR, {(0, 0): 1, (1, 1): ExactScalar.unit(Phase.of(Fraction(1, 4))) * Fraction(1, 2)})
        assert omega.spectral_support() == {(0,)}

    def test_normalization_required(self):
        with pytest.raises(ValueError):
            SampleState(CAR, {(1, 0): 1})

    def test_hermitianity_required(self):
        # omega(u) = 2 forces omega(u^-1) = 2 on the line sample
        with pytest.raises(ValueError):
            SampleState(LINE, {(0,): 1, (1,): 2})
        SampleState(LINE, {(0,): 1, (1,): 2, (-1,): 2})

    def test_hermitianity_with_star_phase(self):
        # on M2, (c1 c2)^* = -c1 c2, so the value must be purely imaginary
        i_half = ExactScalar.unit(Phase.of(Fraction(1, 4))) * Fraction(1, 2)
        SampleState(CAR, {(0, 0): 1, (1, 1): i_half})
        with pytest.raises(ValueError):
            SampleState(CAR, {(0, 0): 1, (1, 1): Fraction(1, 2)})


class TestPositivity:
    def test_clock_trace_positive(self):
        tr = SampleState(PF3, {(0, 0): 1})
        window = [(0, 0), (1, 0), (0, 1), (1, 1), (2, 2)]
        verdict = state_positivity(tr, window)
        assert verdict.positive

    def test_all_ones_point_mass(self):
        omega = SampleState(FUNC, {m: 1 for m in Z3_SQ.elements()})
        verdict = state_positivity(omega, list(Z3_SQ.elements()))
        assert verdict.positive

    def test_too_large_value_fails(self):
        omega = SampleState(LINE, {(0,): 1, (1,): 2, (-1,): 2})
        verdict = state_positivity(omega, [(0,), (1,)])
        assert not verdict.positive
        assert verdict.min_eigenvalue < -1e-9
        assert verdict.witness is not None

    def test_window_needs_unit(self):
        tr = SampleState(PF3, {(0, 0): 1})
        with pytest.raises(BadParameter):
            state_positivity(tr, [(1, 0)])
