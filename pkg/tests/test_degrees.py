import random
from fractions import Fraction

import pytest

from gradechain.degrees import (
    Bicharacter,
    DegreeGroup,
    Subgroup,
    all_subgroups,
    bicharacter_from_integer_matrix,
    subgroup_generated,
)
from gradechain.errors import InfiniteGroup, WrongGroup
from gradechain.scalars import Phase, SymbolTable

TBL = SymbolTable(("theta", "alpha"))

Z2 = DegreeGroup(0, (2,))
Z = DegreeGroup(1)
Z3_SQ = DegreeGroup(0, (3, 3))

CAR_V = bicharacter_from_integer_matrix(Z2, [[1]], 2)
GOLDEN_V = bicharacter_from_integer_matrix(Z3_SQ, [[0, 1], [1, 1]], 3)


def torus_v(coeff=1):
    return Bicharacter(Z, ((Phase.symbol("alpha", TBL, coeff),),))


class TestGroupArithmetic:
    def test_reduce_and_add(self):
        g = DegreeGroup(1, (3,))
        assert g.reduce((5, 7)) == (5, 1)
        assert g.add((1, 2), (1, 2)) == (2, 1)
        assert g.neg((1, 1)) == (-1, 2)

    def test_order(self):
        assert Z3_SQ.order() == 9
        with pytest.raises(InfiniteGroup):
            Z.order()

    def test_elements(self):
        assert sorted(Z3_SQ.elements())[:3] == [(0, 0), (0, 1), (0, 2)]
        assert len(list(Z3_SQ.elements())) == 9

    def test_wrong_length(self):
        with pytest.raises(WrongGroup):
            Z2.reduce((1, 2))


class TestSubgroups:
    def test_generated_diagonal(self):
        s = subgroup_generated(Z3_SQ, [(1, 1)])
        assert s.elements() == ((0, 0), (1, 1), (2, 2))

    def test_trivial(self):
        assert subgroup_generated(Z3_SQ, []).elements() == ((0, 0),)

    def test_even_integers(self):
        evens = subgroup_generated(Z, [(2,)])
        assert (4,) in evens
        assert (0,) in evens
        assert (3,) not in evens

    def test_membership_with_torsion(self):
        g = DegreeGroup(1, (4,))
        s = subgroup_generated(g, [(2, 1)])
        assert (2, 1) in s
        assert (4, 2) in s
        assert (0, 4) in s  # reduces to zero
        assert (2, 3) not in s
        assert (1, 0) not in s

    def test_order_divides_parent(self):
        rng = random.Random(2)
        for _ in range(30):
            orders = tuple(rng.choice([2, 3, 4]) for _ in range(rng.randrange(1, 3)))
            g = DegreeGroup(0, orders)
            gens = [
                tuple(rng.randrange(n) for n in orders)
                for _ in range(rng.randrange(0, 3))
            ]
            s = subgroup_generated(g, gens)
            assert g.order() % s.order() == 0

    def test_lattice_size_known_case(self):
        # Z3 x Z3 has 6 subgroups: 1, four order-3 lines, the whole group
        assert len(all_subgroups(Z3_SQ)) == 6


class TestBicharacterEval:
    def test_car_value(self):
        assert CAR_V.evaluate((1,), (1,)) == Phase.of(Fraction(1, 2))

    def test_torus_bilinearity_in_exponents(self):
        v = torus_v()
        assert v.evaluate((2,), (3,)) == Phase.symbol("alpha", TBL, 6)

    def test_zero_argument(self):
        assert GOLDEN_V.evaluate((0, 0), (2, 1)).is_zero()

    def test_bilinear_random(self):
        rng = random.Random(23)
        for _ in range(100):
            chi, chi2, eta = (
                tuple(rng.randrange(3) for _ in range(2)) for _ in range(3)
            )
            lhs = GOLDEN_V.evaluate(Z3_SQ.add(chi, chi2), eta)
            rhs = GOLDEN_V.evaluate(chi, eta) + GOLDEN_V.evaluate(chi2, eta)
            assert lhs == rhs

    def test_torsion_consistency_enforced(self):
        with pytest.raises(ValueError):
            Bicharacter(Z2, ((Phase.of(Fraction(1, 3)),),))
        with pytest.raises(ValueError):
            Bicharacter(Z2, ((Phase.symbol("theta", TBL),),))


class TestClassification:
    def test_car_is_both(self):
        assert CAR_V.classify() == (True, True)

    def test_torus_symmetric_only(self):
        assert torus_v().classify() == (True, False)

    def test_golden_symmetric_only(self):
        c = GOLDEN_V.classify()
        assert c.symmetric and not c.antisymmetric

    def test_symmetrized(self):
        assert all(p.is_zero() for row in CAR_V.symmetrized().matrix for p in row)
        assert torus_v().symmetrized().matrix == torus_v(2).matrix
        anti = bicharacter_from_integer_matrix(DegreeGroup(2), [[0, 1], [-1, 0]], 5)
        assert anti.classify().antisymmetric
        assert all(p.is_zero() for row in anti.symmetrized().matrix for p in row)


class TestIsotropy:
    def test_golden_set(self):
        iso = GOLDEN_V.isotropy_set()
        assert set(iso.elements) == {(0, 0), (1, 1), (2, 2), (1, 0), (2, 0)}
        assert not iso.is_subgroup

    def test_trivial_bicharacter(self):
        v = bicharacter_from_integer_matrix(Z2, [[0]], 2)
        iso = v.isotropy_set()
        assert iso.elements == ((0,), (1,))
        assert iso.is_subgroup

    def test_car_isotropy(self):
        iso = CAR_V.isotropy_set()
        assert iso.elements == ((0,),)
        assert iso.is_subgroup

    def test_infinite_rejected(self):
        with pytest.raises(InfiniteGroup):
            torus_v().isotropy_set()

    def test_subgroup_iff_symmetrized_trivial_on_delta(self):
        rng = random.Random(31)
        for _ in range(40):
            orders = tuple(rng.choice([2, 3, 4]) for _ in range(rng.randrange(1, 3)))
            g = DegreeGroup(0, orders)
            entries = [
                [rng.randrange(orders[min(i, j)]) for j in range(len(orders))]
                for i in range(len(orders))
            ]
            # force torsion consistency: entry (i,j) is a multiple of 1/gcd
            from math import gcd

            mat = []
            for i in range(len(orders)):
                row = []
                for j in range(len(orders)):
                    d = gcd(orders[i], orders[j])
                    row.append(Phase.of(Fraction(entries[i][j] % d, d)))
                mat.append(tuple(row))
            v = Bicharacter(g, tuple(mat))
            iso = v.isotropy_set()
            vs = v.symmetrized()
            sym_trivial = all(
                vs.evaluate(a, b).is_zero()
                for a in iso.elements
                for b in iso.elements
            )
            assert iso.is_subgroup == sym_trivial

    def test_antisymmetric_always_subgroup(self):
        rng = random.Random(37)
        for _ in range(20):
            n = rng.choice([2, 3, 4, 5])
            k = rng.randrange(n)
            g = DegreeGroup(0, (n, n))
            mat = (
                (Phase.of(0), Phase.of(Fraction(k, n))),
                (Phase.of(Fraction(-k, n)), Phase.of(0)),
            )
            v = Bicharacter(g, mat)
            assert v.classify().antisymmetric
            assert v.isotropy_set().is_subgroup


class TestMaximalIsotropic:
    def test_golden_pair(self):
        subs = GOLDEN_V.maximal_isotropic_subgroups()
        assert [s.elements() for s in subs] == [
            ((0, 0), (1, 0), (2, 0)),
            ((0, 0), (1, 1), (2, 2)),
        ]

    def test_trivial_bicharacter_whole_group(self):
        v = bicharacter_from_integer_matrix(Z2, [[0]], 2)
        subs = v.maximal_isotropic_subgroups()
        assert len(subs) == 1 and subs[0].elements() == ((0,), (1,))

    def test_car_only_trivial(self):
        subs = CAR_V.maximal_isotropic_subgroups()
        assert len(subs) == 1 and subs[0].elements() == ((0,),)

    def test_every_isotropic_is_dominated(self):
        # brute force on groups up to order 81
        from math import gcd

        rng = random.Random(41)
        shapes = [(2, 2), (3, 3), (2, 3), (9, 9), (3, 3, 3)]
        for trial in range(12):
            orders = shapes[trial % len(shapes)]
            g = DegreeGroup(0, orders)
            k = len(orders)
            mat = [[None] * k for _ in range(k)]
            for i in range(k):
                for j in range(k):
                    d = gcd(orders[i], orders[j])
                    mat[i][j] = Phase.of(Fraction(rng.randrange(d), d))
            v = Bicharacter(g, tuple(tuple(row) for row in mat))
            maximal = v.maximal_isotropic_subgroups()
            for s in all_subgroups(g):
                if v.vanishes_on(s):
                    assert any(
                        set(s.elements()) <= set(t.elements()) for t in maximal
                    )
            for t in maximal:
                assert v.vanishes_on(t)

    def test_maximal_isotropic_rejects_infinite_groups(self):
        with pytest.raises(InfiniteGroup):
            torus_v().maximal_isotropic_subgroups()
