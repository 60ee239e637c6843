"""Finite windows of the twisted chain over a sample algebra.

Chain basis monomials are normal-ordered words ``i_{s1}(b_{m1}) ... i_{sp}(b_{mp})``
with strictly increasing dyadic sites.  Factors at distinct sites commute up
to the twist evaluated on their degrees: for sites k < l,

    i_k(a) i_l(b) = e^{2 pi i v(da, db)} i_l(b) i_k(a),

so moving a factor leftwards past a factor at a larger site contributes the
inverse phase -v(moving, passed).  Same-site collisions resolve through the
sample cocycle.  Site maps (shifts, partial shifts, dyadic thickenings,
dilations) act by relabeling; permutations act only when the twist is
antisymmetric.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .degrees import Bicharacter, Element, Subgroup
from .errors import (
    ContextMismatch,
    NotMonotone,
    NotPermutable,
    ParseError,
    WrongGroup,
)
from .sample import SampleAlgebra, SampleElement
from .scalars import ZERO_PHASE, ExactScalar, Phase

Site = Fraction


def as_site(value) -> Site:
    """Coerce to a dyadic rational site label."""
    s = Fraction(value)
    d = s.denominator
    if d & (d - 1):
        raise ValueError(f"site {s} is not dyadic")
    return s


Factor = tuple[Site, Element]


@dataclass(frozen=True)
class ChainMonomial:
    """Normal-ordered word: strictly ascending sites, no identity factors."""

    factors: tuple[Factor, ...] = ()

    def __post_init__(self) -> None:
        sites = [s for s, _ in self.factors]
        if any(a >= b for a, b in zip(sites, sites[1:])):
            raise ValueError("factor sites must be strictly ascending")

    def sites(self) -> tuple[Site, ...]:
        return tuple(s for s, _ in self.factors)

    def total_degree(self, sample: SampleAlgebra) -> Element:
        deg = sample.degree_group.zero()
        for _, m in self.factors:
            deg = sample.degree_group.add(deg, sample.degree(m))
        return deg

    def __str__(self) -> str:
        if not self.factors:
            return "1"
        return " ".join(f"i[{s}](m{list(m)})" for s, m in self.factors)


EMPTY_MONOMIAL = ChainMonomial()


@dataclass(frozen=True)
class ChainContext:
    """A sample algebra together with a twist on its degree group."""

    sample: SampleAlgebra
    twist: Bicharacter

    def __post_init__(self) -> None:
        if self.twist.group != self.sample.degree_group:
            raise WrongGroup("twist is not defined on the sample's degree group")
        object.__setattr__(self, "_swap_cache", {})

    def swap_phase(self, moving: Element, passed: Element) -> Phase:
        """Phase for moving a factor left past one at a larger site."""
        key = (moving, passed)
        hit = self._swap_cache.get(key)
        if hit is None:
            hit = -self.twist.evaluate(
                self.sample.degree(moving), self.sample.degree(passed)
            )
            self._swap_cache[key] = hit
        return hit

    def monomial(self, factors: Iterable[tuple[Site | int | str, Sequence[int]]]) -> ChainMonomial:
        reduced = []
        for site, m in factors:
            m = self.sample.exponents.reduce(m)
            if m != self.sample.exponents.zero():
                reduced.append((as_site(site), m))
        return ChainMonomial(tuple(reduced))

    def merge(self, x: ChainMonomial, y: ChainMonomial) -> tuple[Phase, ChainMonomial]:
        """Normal-order the concatenation x*y; returns (phase, monomial)."""
        sample = self.sample
        zero = sample.exponents.zero()
        out = list(x.factors)
        phase = ZERO_PHASE
        for site, n in y.factors:
            i = len(out)
            while i > 0 and out[i - 1][0] > site:
                phase = phase + self.swap_phase(n, out[i - 1][1])
                i -= 1
            if i > 0 and out[i - 1][0] == site:
                m = out[i - 1][1]
                phase = phase + sample.cocycle_phase(m, n)
                s = sample.exponents.add(m, n)
                if s == zero:
                    del out[i - 1]
                else:
                    out[i - 1] = (site, s)
            else:
                out.insert(i, (site, n))
        return phase, ChainMonomial(tuple(out))

    def order_word(self, factors: Sequence[Factor]) -> tuple[Phase, ChainMonomial]:
        """Normal-order a word of factors at pairwise distinct sites."""
        out: list[Factor] = []
        phase = ZERO_PHASE
        for site, n in factors:
            i = len(out)
            while i > 0 and out[i - 1][0] > site:
                phase = phase + self.swap_phase(n, out[i - 1][1])
                i -= 1
            if i > 0 and out[i - 1][0] == site:
                raise ValueError("word has repeated sites")
            out.insert(i, (site, n))
        return phase, ChainMonomial(tuple(out))


class ChainElement:
    """Finite ExactScalar combination of normal-ordered chain monomials."""

    __slots__ = ("context", "support")

    def __init__(self, context: ChainContext, support: Mapping[ChainMonomial, ExactScalar]) -> None:
        self.context = context
        self.support = {m: c for m, c in support.items() if not c.is_zero()}

    @classmethod
    def zero(cls, context: ChainContext) -> ChainElement:
        return cls(context, {})

    @classmethod
    def one(cls, context: ChainContext) -> ChainElement:
        return cls(context, {EMPTY_MONOMIAL: ExactScalar.one()})

    @classmethod
    def basis(cls, context: ChainContext, factors) -> ChainElement:
        return cls(context, {context.monomial(factors): ExactScalar.one()})

    @classmethod
    def embed(cls, context: ChainContext, site, element: SampleElement) -> ChainElement:
        """The image of a sample element under the embedding at ``site``."""
        if element.algebra != context.sample:
            raise ContextMismatch("element from a different sample")
        s = as_site(site)
        support = {}
        zero = context.sample.exponents.zero()
        for m, c in element.support.items():
            mono = EMPTY_MONOMIAL if m == zero else ChainMonomial(((s, m),))
            support[mono] = support.get(mono, ExactScalar.zero()) + c
        return cls(context, support)

    def _check(self, other: ChainElement) -> None:
        if self.context != other.context:
            raise ContextMismatch("elements from different chain contexts")

    def __add__(self, other: ChainElement) -> ChainElement:
        self._check(other)
        out = dict(self.support)
        for m, c in other.support.items():
            out[m] = out.get(m, ExactScalar.zero()) + c
        return ChainElement(self.context, out)

    def __neg__(self) -> ChainElement:
        return ChainElement(self.context, {m: -c for m, c in self.support.items()})

    def __sub__(self, other: ChainElement) -> ChainElement:
        return self + (-other)

    def scale(self, scalar: ExactScalar | Phase | int | Fraction) -> ChainElement:
        s = ExactScalar.of(scalar)
        return ChainElement(self.context, {m: c * s for m, c in self.support.items()})

    def __mul__(self, other: ChainElement) -> ChainElement:
        self._check(other)
        ctx = self.context
        out: dict[ChainMonomial, ExactScalar] = {}
        for mx, cx in self.support.items():
            for my, cy in other.support.items():
                phase, mono = ctx.merge(mx, my)
                term = (cx * cy).shift(phase)
                prev = out.get(mono)
                out[mono] = term if prev is None else prev + term
        return ChainElement(ctx, out)

    def star(self) -> ChainElement:
        """Antilinear involutive anti-automorphism."""
        ctx = self.context
        sample = ctx.sample
        out = ChainElement.zero(ctx)
        for mono, coeff in self.support.items():
            acc = ChainElement.one(ctx)
            for site, m in reversed(mono.factors):
                starred = ExactScalar.one().shift(sample.star_phase(m))
                factor = ChainElement(
                    ctx, {ChainMonomial(((site, sample.exponents.neg(m)),)): starred}
                )
                acc = acc * factor
            out = out + acc.scale(coeff.conjugate())
        return out

    def apply_sitemap(self, site_map: SiteMap | Callable[[Site], Site]) -> ChainElement:
        """Relabel sites by a strictly increasing map (an endomorphism)."""
        fn = site_map
        occurring = sorted({s for m in self.support for s, _ in m.factors})
        images = [as_site(fn(s)) for s in occurring]
        if any(a >= b for a, b in zip(images, images[1:])):
            raise NotMonotone(f"map is not strictly increasing on {occurring}")
        lookup = dict(zip(occurring, images))
        out = {
            ChainMonomial(tuple((lookup[s], m) for s, m in mono.factors)): c
            for mono, c in self.support.items()
        }
        return ChainElement(self.context, out)

    def apply_permutation(self, sigma: Mapping[Site, Site] | Callable[[Site], Site]) -> ChainElement:
        """Relabel sites by a finitary bijection; twist must be antisymmetric."""
        if not self.context.twist.classify().antisymmetric:
            raise NotPermutable("permutations only act for antisymmetric twists")
        if isinstance(sigma, Mapping):
            table = {as_site(k): as_site(v) for k, v in sigma.items()}
            fn = lambda s: table.get(s, s)  # noqa: E731
        else:
            fn = sigma
        out: dict[ChainMonomial, ExactScalar] = {}
        for mono, c in self.support.items():
            relabeled = [(as_site(fn(s)), m) for s, m in mono.factors]
            if len({s for s, _ in relabeled}) != len(relabeled):
                raise NotPermutable("site map is not injective on occurring sites")
            phase, new_mono = self.context.order_word(relabeled)
            term = c * ExactScalar.unit(phase)
            out[new_mono] = out.get(new_mono, ExactScalar.zero()) + term
        return ChainElement(self.context, out)

    def expectation(self, sub: Subgroup) -> ChainElement:
        """Keep monomials all of whose factor degrees lie in ``sub``."""
        if sub.parent != self.context.sample.degree_group:
            raise WrongGroup("subgroup lives in a different degree group")
        sample = self.context.sample
        return ChainElement(
            self.context,
            {
                mono: c
                for mono, c in self.support.items()
                if all(sample.degree(m) in sub for _, m in mono.factors)
            },
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ChainElement):
            return NotImplemented
        self._check(other)
        return not (self - other).support

    __hash__ = None

    def __repr__(self) -> str:
        if not self.support:
            return "0"
        sample = self.context.sample
        parts = []
        for mono, c in sorted(self.support.items(), key=lambda t: t[0].factors):
            word = " ".join(
                f"i[{s}]({sample.format_exponent(m)})" for s, m in mono.factors
            )
            parts.append(f"({c})*{word or '1'}")
        return " + ".join(parts)


# --- site maps --------------------------------------------------------------

@dataclass(frozen=True)
class SiteMap:
    """A named site relabeling; composition via ``after``."""

    name: str
    fn: Callable[[Site], Site]

    def __call__(self, s: Site) -> Site:
        return as_site(self.fn(as_site(s)))

    def after(self, other: SiteMap) -> SiteMap:
        return SiteMap(f"{self.name}.{other.name}", lambda s: self.fn(other.fn(s)))


def shift(k: int = 1) -> SiteMap:
    return SiteMap(f"shift({k})", lambda s: s + k)


def partial_shift(h: int) -> SiteMap:
    """Identity below h, shift by one from h upward."""
    return SiteMap(f"partial_shift({h})", lambda s: s if s < h else s + 1)


def dyadic_partial_shift(n: int = 0) -> SiteMap:
    """The dyadic extension of the partial shift at 0, conjugated by 2^n."""

    def theta0(d: Site) -> Site:
        if d <= -1:
            return d
        if d <= 0:
            return 2 * d + 1
        return d + 1

    if n == 0:
        return SiteMap("dyadic_partial_shift(0)", theta0)
    scale = Fraction(2) ** n
    return SiteMap(f"dyadic_partial_shift({n})", lambda s: theta0(s * scale) / scale)


def dyadic_shift(k: int, n: int) -> SiteMap:
    return SiteMap(f"dyadic_shift({k},{n})", lambda s: s + Fraction(k, 2**n))


def dilation(n: int) -> SiteMap:
    return SiteMap(f"dilation({n})", lambda s: s * Fraction(2) ** n)


def table_map(table: Mapping[Site, Site]) -> SiteMap:
    lookup = {as_site(k): as_site(v) for k, v in table.items()}
    return SiteMap(f"table({sorted(lookup.items())})", lambda s: lookup.get(s, s))


def extend_to_permutation(sites: Sequence[Site], increasing: Callable[[Site], Site]) -> dict[Site, Site]:
    """A finitary permutation agreeing with an injective map on ``sites``.

    Points of image(sites) that are not themselves occurring sites are sent
    back onto the unmatched occurring sites, so the result is a bijection
    moving only finitely many sites.
    """
    sites = sorted({as_site(s) for s in sites})
    image = [as_site(increasing(s)) for s in sites]
    if len(set(image)) != len(image):
        raise ValueError("map is not injective on the occurring sites")
    mapping = dict(zip(sites, image))
    missing = [s for s in sites if s not in set(image)]  # need preimages
    extra = [t for t in image if t not in mapping]  # currently unmapped points
    for t, s in zip(sorted(extra), sorted(missing)):
        mapping[t] = s
    return mapping


# --- left regular representation oracle -------------------------------------

def global_cocycle(ctx: ChainContext, x: ChainMonomial, y: ChainMonomial) -> Phase:
    """The chain's 2-cocycle on basis words, computed in closed form.

    Inter-site contributions are counted over inversion pairs (site of x
    above site of y); same-site pairs contribute the sample cocycle.
    """
    phase = ZERO_PHASE
    for s, m in x.factors:
        for t, n in y.factors:
            if s == t:
                phase = phase + ctx.sample.cocycle_phase(m, n)
            elif s > t:
                phase = phase + ctx.swap_phase(n, m)
    return phase


def oracle_product(ctx: ChainContext, x: ChainMonomial, y: ChainMonomial) -> tuple[Phase, ChainMonomial]:
    """Product of basis words via the global cocycle (independent of merge)."""
    exponents: dict[Site, Element] = {s: m for s, m in x.factors}
    sample = ctx.sample
    for t, n in y.factors:
        if t in exponents:
            exponents[t] = sample.exponents.add(exponents[t], n)
        else:
            exponents[t] = n
    zero = sample.exponents.zero()
    factors = tuple(
        (s, m) for s, m in sorted(exponents.items()) if m != zero
    )
    return global_cocycle(ctx, x, y), ChainMonomial(factors)


def regular_rep_table(
    ctx: ChainContext, window: Mapping[Site, Sequence[Element]]
) -> dict[tuple[ChainMonomial, ChainMonomial], tuple[Phase, ChainMonomial]]:
    """Multiplication table of the basis monomials drawn from a finite window.

    ``window`` maps each site to the candidate exponents there; each basis
    monomial takes at most one exponent per site.
    """
    if not window:
        return {}
    sites = sorted(window)
    choices = []
    for s in sites:
        opts = [None] + [ctx.sample.exponents.reduce(m) for m in window[s]]
        choices.append([(s, m) for m in opts])
    basis = []
    for combo in itertools.product(*choices):
        factors = tuple(
            (s, m) for s, m in combo if m is not None and m != ctx.sample.exponents.zero()
        )
        basis.append(ChainMonomial(factors))
    return {
        (x, y): oracle_product(ctx, x, y) for x in basis for y in basis
    }


# --- monomial grammar --------------------------------------------------------

def parse_monomial(ctx: ChainContext, text: str) -> ChainMonomial:
    """Parse ``"i[0](u^1 w^0) i[1/2](u^-1)"`` into a normal-ordered monomial."""
    factors = []
    text = text.strip()
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        if not text.startswith("i[", pos):
            raise ParseError(f"expected 'i[' at {text[pos:]!r}")
        close = text.find("]", pos)
        open_paren = text.find("(", close)
        close_paren = text.find(")", open_paren)
        if -1 in (close, open_paren, close_paren) or text[close + 1] != "(":
            raise ParseError(f"malformed factor near {text[pos:]!r}")
        try:
            site = as_site(Fraction(text[pos + 2 : close]))
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad site in {text[pos:close + 1]!r}") from exc
        exponent = ctx.sample.parse_exponent(text[open_paren + 1 : close_paren])
        factors.append((site, exponent))
        pos = close_paren + 1
    return ctx.monomial(factors)


def parse_chain_element(ctx: ChainContext, text: str) -> ChainElement:
    """Parse sums of ``(scalar) monomial`` terms, e.g.
    ``"(e(theta)) i[0](u^-1) i[1](u^2) + (1/2) i[0](u^1)"``.

    The parenthesized scalar prefix is optional; an omitted monomial means
    the unit.  Only '+' joins terms; signs live inside the scalar.
    """
    from .scalars import parse_scalar

    terms = []
    depth = 0
    start = 0
    text = text.strip()
    if not text:
        raise ParseError("empty chain element")
    for i, ch in enumerate(text):
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        elif ch == "+" and depth == 0:
            terms.append(text[start:i])
            start = i + 1
    terms.append(text[start:])
    out = ChainElement.zero(ctx)
    for term in terms:
        term = term.strip()
        coeff = ExactScalar.one()
        if term.startswith("("):
            depth = 0
            for i, ch in enumerate(term):
                depth += ch == "("
                depth -= ch == ")"
                if depth == 0:
                    coeff = parse_scalar(term[1:i], _tables_of(ctx))
                    term = term[i + 1 :].strip()
                    break
        mono = parse_monomial(ctx, term) if term else EMPTY_MONOMIAL
        out = out + ChainElement(ctx, {mono: coeff})
    return out


def _tables_of(ctx: ChainContext):
    for row in ctx.twist.matrix:
        for p in row:
            if p.table is not None:
                return p.table
    for row in ctx.sample.cocycle:
        for p in row:
            if p.table is not None:
                return p.table
    return None


# --- standard chains ----------------------------------------------------------

def standard_chain(kind: str, **params) -> ChainContext:
    """Named chains used throughout: car, torus, parafermion, function, torus_pair."""
    from .degrees import DegreeGroup, bicharacter_from_integer_matrix
    from .sample import build_standard_sample

    if kind == "car":
        sample = build_standard_sample("clock_shift", d=2)
        twist = bicharacter_from_integer_matrix(sample.degree_group, [[1]], 2)
        return ChainContext(sample, twist)
    if kind == "parafermion":
        d = int(params["d"])
        sample = build_standard_sample("parafermion", d=d)
        twist = bicharacter_from_integer_matrix(sample.degree_group, [[1]], d)
        return ChainContext(sample, twist)
    if kind == "torus":
        # one unitary generator per site: u_j u_k = e^{2 pi i alpha} u_k u_j, j < k
        alpha: Phase = params["alpha"]
        sample = build_standard_sample("function_algebra", group=DegreeGroup(1))
        twist = Bicharacter(sample.degree_group, ((alpha,),))
        return ChainContext(sample, twist)
    if kind == "torus_pair":
        # two generators per site; cross-site twist theta on matching generators
        theta: Phase = params["theta"]
        alpha: Phase = params["alpha"]
        sample = build_standard_sample("nc_torus", alpha=alpha)
        twist = Bicharacter(
            sample.degree_group,
            ((theta, ZERO_PHASE), (ZERO_PHASE, theta)),
        )
        return ChainContext(sample, twist)
    if kind == "function":
        group: DegreeGroup = params["group"]
        twist: Bicharacter = params["twist"]
        sample = build_standard_sample("function_algebra", group=group)
        return ChainContext(sample, twist)
    raise ValueError(f"unknown chain kind {kind!r}")
