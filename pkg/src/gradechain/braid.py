"""Braid-group machinery on chain windows.

A braid action is a table of generator images on single-site basis
monomials over a working window, extended to arbitrary exponents by
multiplicativity and to words by composition.  The checks are local:
Artin relations (far commutation and the Yang-Baxter relation) on bounded
basis monomials, the braidability relations tying the generator images to
the site embeddings, and invariance of a given state.

The infeasibility solver reproduces the obstruction argument for the
doubled-torus chain: it expands the would-be image of the first braid
generator over the monomial basis of a finite window, derives linear
constraints on the exponents by matching coefficients in the free Q-basis
{1, theta, alpha}, and eliminates.  The conjugation coefficients and the
target phases are computed from the chain algebra itself, not transcribed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .chain import ChainContext, ChainElement, ChainMonomial, Site, as_site, standard_chain
from .degrees import Element
from .errors import BadChain, ModelMismatch, WindowTooSmall
from .scalars import ExactScalar, Phase, SymbolTable
from .states import ChainState

GenKey = tuple[Site, int]  # (site, exponent-lattice generator index)


@dataclass
class BraidAction:
    """Generator images on a window, one table entry per (site, generator)."""

    context: ChainContext
    window: tuple[Site, ...]
    images: dict[int, dict[GenKey, ChainElement]]
    inverse_images: dict[int, dict[GenKey, ChainElement]] | None = None
    name: str = "braid-action"

    def __post_init__(self) -> None:
        self.window = tuple(sorted(as_site(s) for s in self.window))
        one = ChainElement.one(self.context)
        rank = self.context.sample.exponents.rank
        for i, table in self.images.items():
            for site in self.window:
                for k in range(rank):
                    if (site, k) not in table:
                        raise WindowTooSmall(
                            f"generator {i} image missing at site {site}"
                        )
            for img in table.values():
                if img.star() * img != one:
                    raise ValueError(f"generator {i} image is not unitary")

    def generators(self) -> tuple[int, ...]:
        return tuple(sorted(self.images))

    def _factor_image(self, i: int, site: Site, m: Element, inverse: bool) -> ChainElement:
        """Image of i_site(b_m), built multiplicatively from generator images."""
        ctx = self.context
        sample = ctx.sample
        tables = self.inverse_images if inverse else self.images
        if tables is None:
            raise WindowTooSmall(f"no inverse table for generator {i}")
        try:
            table = tables[i]
        except KeyError:
            raise WindowTooSmall(f"generator {i} outside the action") from None
        gens = sample.exponents.generators()
        result = ChainElement.one(ctx)
        current = sample.exponents.zero()
        correction = Phase.of(0)
        for k, power in enumerate(m):
            if not power:
                continue
            if power > 0:
                step = gens[k]
                img = table.get((site, k))
                if img is None:
                    raise WindowTooSmall(f"site {site} outside the window")
                step_img = img
            else:
                step = sample.exponents.neg(gens[k])
                img = table.get((site, k))
                if img is None:
                    raise WindowTooSmall(f"site {site} outside the window")
                # b_{-e} = e^{-2 pi i s(e)} (b_e)^*, and the action is a *-map
                step_img = img.star().scale(-sample.star_phase(gens[k]))
            for _ in range(abs(power)):
                correction = correction + sample.cocycle_phase(current, step)
                current = sample.exponents.add(current, step)
                result = result * step_img
        # the generator word equals e^{2 pi i correction} b_m
        return result.scale(-correction)

    def apply_generator(self, i: int, x: ChainElement, inverse: bool = False) -> ChainElement:
        ctx = self.context
        out = ChainElement.zero(ctx)
        for mono, coeff in x.support.items():
            acc = ChainElement.one(ctx)
            for site, m in mono.factors:
                acc = acc * self._factor_image(i, site, m, inverse)
            out = out + acc.scale(coeff)
        return out

    def apply_word(self, word: Sequence[int], x: ChainElement) -> ChainElement:
        """Apply the braid word (left to right composition: word[0] outermost).

        Negative entries denote inverse generators.
        """
        for i in reversed(word):
            x = self.apply_generator(abs(i), x, inverse=i < 0)
        return x


def identity_action(context: ChainContext, window: Iterable[Site | int], generators: Iterable[int]) -> BraidAction:
    window = tuple(as_site(s) for s in window)
    rank = context.sample.exponents.rank
    gens = context.sample.exponents.generators()
    table = {
        (s, k): ChainElement.basis(context, [(s, gens[k])])
        for s in window
        for k in range(rank)
    }
    images = {i: dict(table) for i in generators}
    return BraidAction(context, window, images, dict(images), name="identity")


def transposition_action(context: ChainContext, window: Iterable[Site | int]) -> BraidAction:
    """sigma_i acts as the transposition of sites i-1 and i (needs an
    antisymmetric twist to be an action at all)."""
    window = tuple(sorted(as_site(s) for s in window))
    rank = context.sample.exponents.rank
    gens = context.sample.exponents.generators()

    def embed(site, k):
        return ChainElement.basis(context, [(site, gens[k])])

    images: dict[int, dict[GenKey, ChainElement]] = {}
    for idx in range(1, len(window)):
        lo, hi = window[idx - 1], window[idx]
        table = {}
        for s in window:
            target = hi if s == lo else lo if s == hi else s
            for k in range(rank):
                table[(s, k)] = embed(target, k)
        images[idx] = table
    return BraidAction(context, window, images, {i: dict(t) for i, t in images.items()}, name="transpositions")


def build_torus_braid_action(
    theta: Phase, window: int | Iterable[Site | int] = 4, context: ChainContext | None = None
) -> BraidAction:
    """The braidable action on the one-generator torus chain: sigma_i sends
    u_{i-1} to u_i, u_i to c * u_{i-1}^* u_i^2, and fixes every other site.

    The Yang-Baxter relation pins the scalar up to sign: computing
    sigma_i sigma_{i+1} sigma_i and its mirror on u_{i+1} forces
    c^2 = e^{4 pi i theta}; the positive root c = e^{2 pi i theta} is taken.
    """
    if context is None:
        context = standard_chain("torus", alpha=theta)
    sample = context.sample
    if (
        sample.exponents.rank != 1
        or sample.exponents.free_rank != 1
        or any(not p.is_zero() for row in sample.cocycle for p in row)
        or context.twist.matrix[0][0] != theta
    ):
        raise BadChain("need the single-unitary torus chain twisted by theta")
    sites = (
        tuple(as_site(s) for s in range(window))
        if isinstance(window, int)
        else tuple(as_site(s) for s in window)
    )
    sites = tuple(sorted(sites))

    def u(site, power=1):
        return ChainElement.basis(context, [(site, (power,))])

    images: dict[int, dict[GenKey, ChainElement]] = {}
    inverses: dict[int, dict[GenKey, ChainElement]] = {}
    for idx in range(1, len(sites)):
        lo, hi = sites[idx - 1], sites[idx]
        fwd: dict[GenKey, ChainElement] = {}
        bwd: dict[GenKey, ChainElement] = {}
        for s in sites:
            if s == lo:
                fwd[(s, 0)] = u(hi)
                # sigma^{-1}(u_{i-1}) = c u_{i-1}^2 u_i^{-1}
                bwd[(s, 0)] = ChainElement.basis(
                    context, [(lo, (2,)), (hi, (-1,))]
                ).scale(theta)
            elif s == hi:
                fwd[(s, 0)] = ChainElement.basis(
                    context, [(lo, (-1,)), (hi, (2,))]
                ).scale(theta)
                bwd[(s, 0)] = u(lo)
            else:
                fwd[(s, 0)] = u(s)
                bwd[(s, 0)] = u(s)
        images[idx] = fwd
        inverses[idx] = bwd
    return BraidAction(context, sites, images, inverses, name="torus-braiding")


# --- relation verification ----------------------------------------------------

def bounded_monomials(
    context: ChainContext, sites: Sequence[Site], weight: int
) -> list[ChainMonomial]:
    """All basis monomials on the given sites with total |exponent| <= weight."""
    import itertools

    sample = context.sample
    rank = sample.exponents.rank
    vectors = [(0, (0,) * rank)]
    for vec in itertools.product(range(-weight, weight + 1), repeat=rank):
        w = sum(abs(v) for v in vec)
        if 0 < w <= weight:
            vectors.append((w, vec))
    out = []
    for combo in itertools.product(vectors, repeat=len(sites)):
        if sum(w for w, _ in combo) > weight:
            continue
        factors = [
            (s, sample.exponents.reduce(vec))
            for s, (w, vec) in zip(sites, combo)
            if w
        ]
        mono = context.monomial(factors)
        if mono not in out:
            out.append(mono)
    return out


@dataclass
class RelationReport:
    passed: bool
    checked: int
    failures: list[str]

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "checked": self.checked,
            "failures": self.failures,
        }


def verify_artin_relations(action: BraidAction, degree_bound: int = 2) -> RelationReport:
    """Far commutation and Yang-Baxter, exactly, on bounded basis monomials."""
    gens = action.generators()
    yb_pairs = [(i, i + 1) for i in gens if i + 1 in gens]
    if not yb_pairs:
        raise WindowTooSmall("window supports no adjacent generator pair")
    far_pairs = [(i, j) for i in gens for j in gens if j - i >= 2]
    monomials = bounded_monomials(action.context, action.window, degree_bound)
    failures: list[str] = []
    checked = 0
    for mono in monomials:
        x = ChainElement(action.context, {mono: ExactScalar.one()})
        for i, j in far_pairs:
            checked += 1
            if action.apply_word([i, j], x) != action.apply_word([j, i], x):
                failures.append(f"[{i},{j}] commutation fails on {mono}")
        for i, j in yb_pairs:
            checked += 1
            if action.apply_word([i, j, i], x) != action.apply_word([j, i, j], x):
                failures.append(f"yang-baxter ({i},{j}) fails on {mono}")
    return RelationReport(not failures, checked, failures[:20])


@dataclass
class BraidabilityReport:
    passed: bool
    embedding_failures: list[str]
    fixing_failures: list[str]
    invariance_failures: list[str]

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "embedding_failures": self.embedding_failures,
            "fixing_failures": self.fixing_failures,
            "invariance_failures": self.invariance_failures,
        }


def verify_braidability(
    action: BraidAction,
    state: ChainState | None = None,
    degree_bound: int = 2,
) -> BraidabilityReport:
    """The two defining relations on sample generators, plus state invariance.

    Relation one: the composite word sigma_n ... sigma_1 carries the site-0
    embedding onto the site-n embedding.  Relation two: sigma_n fixes the
    site-0 embedding for n >= 2.
    """
    ctx = action.context
    sample = ctx.sample
    sites = action.window
    gens = sample.exponents.generators()
    base = sites[0]
    embedding_failures = []
    fixing_failures = []
    for k, g in enumerate(gens):
        x0 = ChainElement.basis(ctx, [(base, g)])
        for n in action.generators():
            word = list(range(n, 0, -1))
            got = action.apply_word(word, x0)
            want = ChainElement.basis(ctx, [(sites[n], g)])
            if got != want:
                embedding_failures.append(
                    f"word {word} on generator {k} at site {base}: got {got!r}"
                )
            if n >= 2 and action.apply_generator(n, x0) != x0:
                fixing_failures.append(f"sigma_{n} moves site {base} generator {k}")
    invariance_failures = []
    if state is not None:
        for mono in bounded_monomials(ctx, sites, degree_bound):
            x = ChainElement(ctx, {mono: ExactScalar.one()})
            base_value = state.evaluate(x)
            for i in action.generators():
                if state.evaluate(action.apply_generator(i, x)) != base_value:
                    invariance_failures.append(f"sigma_{i} moves the state on {mono}")
    passed = not (embedding_failures or fixing_failures or invariance_failures)
    return BraidabilityReport(
        passed,
        embedding_failures[:20],
        fixing_failures[:20],
        invariance_failures[:20],
    )


# --- the obstruction solver -----------------------------------------------------

@dataclass(frozen=True)
class IndependenceModel:
    """Declared Q-linear independence of {1} u {theta, alpha}."""

    table: SymbolTable
    theta: str = "theta"
    alpha: str = "alpha"

    def validate(self) -> None:
        if set(self.table.symbols) != {self.theta, self.alpha} or not self.table.independent:
            raise ModelMismatch(
                f"solver needs exactly {{1, {self.theta}, {self.alpha}}} independent"
            )


@dataclass(frozen=True)
class ObstructionStep:
    source: str
    statement: str
    assignments: tuple[tuple[str, Fraction], ...] = ()

    def to_json(self) -> dict:
        return {
            "source": self.source,
            "statement": self.statement,
            "assignments": {v: str(x) for v, x in self.assignments},
        }


@dataclass
class ObstructionTrace:
    window: int
    sites: tuple[int, ...]
    steps: list[ObstructionStep]
    verdict: str
    witness: dict[str, Fraction] | None = None
    contradiction: tuple[str, str, str] | None = None  # (variable, value, value)

    @property
    def infeasible(self) -> bool:
        return self.verdict == "infeasible"

    def to_json(self) -> dict:
        out = {
            "window": self.window,
            "sites": list(self.sites),
            "verdict": self.verdict,
            "steps": [s.to_json() for s in self.steps],
        }
        if self.witness is not None:
            out["witness"] = {v: str(x) for v, x in sorted(self.witness.items())}
        if self.contradiction is not None:
            out["contradiction"] = list(self.contradiction)
        return out


Var = tuple[str, int]  # ("j" | "q", site)


def _fmt_var(var: Var) -> str:
    return f"{var[0]}_{var[1]}"


class _Eliminator:
    """Tracks assignments; reports the first conflicting rederivation."""

    def __init__(self) -> None:
        self.values: dict[Var, Fraction] = {}
        self.conflict: tuple[Var, Fraction, Fraction] | None = None

    def substitute(self, form: dict[Var, Fraction], rhs: Fraction):
        left = {}
        for var, coef in form.items():
            if var in self.values:
                rhs -= coef * self.values[var]
            else:
                left[var] = coef
        return left, rhs

    def assign(self, var: Var, value: Fraction) -> bool:
        if var in self.values and self.values[var] != value:
            self.conflict = (var, self.values[var], value)
            return False
        self.values[var] = value
        return True


def _symbol_parts(phase: Phase, theta: str, alpha: str) -> tuple[Fraction, Fraction]:
    coeffs = dict(phase.symbolic)
    if phase.rational:
        raise AssertionError("conjugation phases here are pure symbol multiples")
    return coeffs.get(theta, Fraction(0)), coeffs.get(alpha, Fraction(0))


def _commutation_phase(a: ChainElement, b: ChainElement) -> Phase:
    """The phase p with a b = e^{2 pi i p} b a, for basis elements."""
    ((mono_l, coeff_l),) = (a * b).support.items()
    ((mono_r, coeff_r),) = (b * a).support.items()
    if mono_l != mono_r:
        raise AssertionError("products do not match up to a phase")
    ((phase, c),) = (coeff_l * coeff_r.conjugate()).terms
    if c != 1:
        raise AssertionError("ratio is not a unit phase")
    return phase


def _ad_phase(conj: ChainElement, target: ChainElement) -> Phase:
    """The phase p with conj target conj^* = e^{2 pi i p} target."""
    lhs = conj * target * conj.star()
    ((mono_t, coeff_t),) = target.support.items()
    ((mono_l, coeff_l),) = lhs.support.items()
    if mono_l != mono_t:
        raise AssertionError("conjugation does not preserve the basis line")
    ((phase, c),) = (coeff_l * coeff_t.conjugate()).terms
    if c != 1:
        raise AssertionError("ratio is not a unit phase")
    return phase


def obstruction_solve(
    model: IndependenceModel,
    window: int,
    sites: Sequence[int] | None = None,
) -> ObstructionTrace:
    """Decide whether the first braid generator could act on the doubled
    torus chain compatibly with the braidability relations and the product
    trace.

    The unknown expansion of the image of the second-site generator runs
    over basis monomials with u-exponents j_i and w-exponents q_i supported
    on ``sites`` (default 0..window).  Each admissible conjugation relation
    pins the expansion's phases; matching coefficients over the independent
    basis {1, theta, alpha} produces integer linear constraints which are
    eliminated in the order of the derivation.
    """
    model.validate()
    site_list = tuple(sorted(set(range(window + 1) if sites is None else map(int, sites))))
    steps: list[ObstructionStep] = []
    if window < 1:
        return ObstructionTrace(window, site_list, steps, "feasible", witness={})

    theta = Phase.symbol(model.theta, model.table)
    alpha = Phase.symbol(model.alpha, model.table)
    ctx = standard_chain("torus_pair", theta=theta, alpha=alpha)

    def u(site, power=1):
        return ChainElement.basis(ctx, [(site, (power, 0))])

    def w(site, power=1):
        return ChainElement.basis(ctx, [(site, (0, power))])

    # relations: conjugators with their target phases, all computed in the
    # chain: conjugating by sigma_1(x) must scale the unknown image by the
    # phase with which x commutes past the second-site generator.
    relations: list[tuple[str, ChainElement, Phase]] = []
    for r in range(2, window + 2):
        relations.append((f"u_{r}", u(r), _commutation_phase(u(r), u(1))))
    relations.append(("u_1", u(1), _commutation_phase(u(0), u(1))))
    relations.append(("w_1", w(1), _commutation_phase(w(0), u(1))))
    steps.append(
        ObstructionStep(
            "rel3",
            f"conjugation relations from sites 2..{window + 1} and from the "
            "first site's generators, targets taken from the chain's "
            "commutation phases",
        )
    )

    # coefficient extraction: theta- and alpha-parts of every Ad phase
    theta_eqs: dict[str, tuple[dict[Var, Fraction], Fraction]] = {}
    alpha_eqs: dict[str, tuple[dict[Var, Fraction], Fraction]] = {}
    for name, conj, target in relations:
        th_form: dict[Var, Fraction] = {}
        al_form: dict[Var, Fraction] = {}
        for i in site_list:
            for kind, gen_elem in (("j", u(i)), ("q", w(i))):
                p = _ad_phase(conj, gen_elem)
                th, al = _symbol_parts(p, model.theta, model.alpha)
                if th:
                    th_form[(kind, i)] = th
                if al:
                    al_form[(kind, i)] = al
        th_t, al_t = _symbol_parts(target, model.theta, model.alpha)
        theta_eqs[name] = (th_form, th_t)
        alpha_eqs[name] = (al_form, al_t)

    elim = _Eliminator()

    def finish_contradiction(step_source: str, statement: str, var=None, a=None, b=None):
        steps.append(ObstructionStep(step_source, statement))
        con = (
            (_fmt_var(var), str(a), str(b)) if var is not None else None
        )
        return ObstructionTrace(window, site_list, steps, "infeasible", contradiction=con)

    # (a) alpha-parts of the far conjugations: q_r = 0 for r >= 2
    q_assigned = []
    for r in range(2, window + 2):
        form, rhs = alpha_eqs[f"u_{r}"]
        left, rhs = elim.substitute(form, rhs)
        if len(left) == 1:
            ((var, coef),) = left.items()
            elim.assign(var, rhs / coef)
            q_assigned.append(var)
        elif not left and rhs != 0:
            return finish_contradiction("i_r", f"empty alpha-part forces 0 = {rhs}")
    if q_assigned:
        steps.append(
            ObstructionStep(
                "i_r",
                "alpha-coefficients vanish: q_r = 0 for every r >= 2",
                tuple((_fmt_var(v), elim.values[v]) for v in q_assigned),
            )
        )

    # (b) telescoping the theta-parts of the far conjugations: j_r = 0, r >= 2
    j_assigned = []
    for r in range(window, 1, -1):
        f1, rhs1 = theta_eqs[f"u_{r}"]
        f2, rhs2 = theta_eqs[f"u_{r + 1}"]
        diff = dict(f1)
        for var, coef in f2.items():
            diff[var] = diff.get(var, Fraction(0)) - coef
        diff = {v: c for v, c in diff.items() if c}
        left, rhs = elim.substitute(diff, rhs1 - rhs2)
        if len(left) == 1:
            ((var, coef),) = left.items()
            if not elim.assign(var, rhs / coef):
                var, a, b = elim.conflict
                return finish_contradiction(
                    "i_42", f"{_fmt_var(var)} rederived inconsistently", var, a, b
                )
            j_assigned.append(var)
        elif not left and rhs != 0:
            return finish_contradiction("i_42", f"telescoped difference forces 0 = {rhs}")
    if j_assigned:
        steps.append(
            ObstructionStep(
                "i_42",
                "telescoping consecutive relations: j_r = 0 for every r >= 2",
                tuple((_fmt_var(v), elim.values[v]) for v in sorted(j_assigned, key=lambda v: v[1])),
            )
        )

    # (c) the first-site u-conjugation: q_1 = 0, then j_0 = -1
    form, rhs = alpha_eqs["u_1"]
    left, rhs = elim.substitute(form, rhs)
    if len(left) == 1:
        ((var, coef),) = left.items()
        elim.assign(var, rhs / coef)
        steps.append(
            ObstructionStep("i_2bis", "alpha-coefficient: q_1 = 0", ((_fmt_var(var), elim.values[var]),))
        )
    elif not left and rhs != 0:
        return finish_contradiction("i_2bis", f"alpha-part forces 0 = {rhs}")
    form, rhs = theta_eqs["u_1"]
    left, rhs = elim.substitute(form, rhs)
    if len(left) == 1:
        ((var, coef),) = left.items()
        if not elim.assign(var, rhs / coef):
            var, a, b = elim.conflict
            return finish_contradiction("i_2bis", f"{_fmt_var(var)} rederived inconsistently", var, a, b)
        steps.append(
            ObstructionStep(
                "i_2bis",
                f"theta-coefficient: {_fmt_var(var)} = {elim.values[var]}",
                ((_fmt_var(var), elim.values[var]),),
            )
        )
    elif not left and rhs != 0:
        return finish_contradiction(
            "i_2bis", f"j_0 = -1 unsatisfiable with site 0 excluded (0 = {rhs})"
        )

    # (d) back-substituting into the first far conjugation pins j_1
    form, rhs = theta_eqs[f"u_{2}"]
    left, rhs = elim.substitute(form, rhs)
    if len(left) == 1:
        ((var, coef),) = left.items()
        if not elim.assign(var, rhs / coef):
            var, a, b = elim.conflict
            return finish_contradiction("i_42", f"{_fmt_var(var)} rederived inconsistently", var, a, b)
        steps.append(
            ObstructionStep(
                "i_42",
                f"substituting into the r = 2 relation: {_fmt_var(var)} = {elim.values[var]}",
                ((_fmt_var(var), elim.values[var]),),
            )
        )
    elif not left and rhs != 0:
        return finish_contradiction("i_42", f"r = 2 relation forces 0 = {rhs}")

    # (e) the first-site w-conjugation: the alpha-part rederives j_1 as 0,
    # clashing with the value forced above
    for part, eqs in (("alpha", alpha_eqs), ("theta", theta_eqs)):
        form, rhs = eqs["w_1"]
        left, rhs2 = elim.substitute(form, rhs)
        if not left and form:
            # every variable already known: rederive the distinguished one
            keep = min(form)
            rest_rhs = rhs - sum(
                c * elim.values[v] for v, c in form.items() if v != keep
            )
            value = rest_rhs / form[keep]
            steps.append(
                ObstructionStep(
                    "i_3bis",
                    f"{part}-coefficient: {_fmt_var(keep)} = {value}",
                    ((_fmt_var(keep), value),),
                )
            )
            if not elim.assign(keep, value):
                cvar, a, b = elim.conflict
                steps.append(
                    ObstructionStep(
                        "contradiction",
                        f"{_fmt_var(cvar)} = {a} and {_fmt_var(cvar)} = {b}",
                    )
                )
                return ObstructionTrace(
                    window,
                    site_list,
                    steps,
                    "infeasible",
                    contradiction=(_fmt_var(cvar), str(a), str(b)),
                )
        elif len(left) == 1:
            ((var, coef),) = left.items()
            value = rhs2 / coef
            elim.assign(var, value)
            steps.append(
                ObstructionStep(
                    "i_3bis",
                    f"{part}-coefficient: {_fmt_var(var)} = {value}",
                    ((_fmt_var(var), value),),
                )
            )
        elif not left and rhs2 != 0:
            return finish_contradiction("i_3bis", f"{part}-part forces 0 = {rhs2}")

    witness = {_fmt_var(v): x for v, x in elim.values.items()}
    return ObstructionTrace(window, site_list, steps, "feasible", witness=witness)
