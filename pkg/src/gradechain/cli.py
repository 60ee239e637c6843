"""Batch front door: load a configuration, run an analysis, emit a report.

Exit codes: 0 every check passed, 1 at least one fail/infeasible verdict,
2 configuration error.  Reports are deterministic for a fixed config and
seed; ``--json`` switches the output encoding, ``--out`` writes to a file.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .braid import (
    IndependenceModel,
    build_torus_braid_action,
    identity_action,
    obstruction_solve,
    transposition_action,
    verify_artin_relations,
    verify_braidability,
)
from .chain import ChainElement, standard_chain
from .config import SCHEMA, ExperimentConfig, load_config
from .degrees import DegreeGroup, bicharacter_from_integer_matrix
from .errors import ConfigError, GradechainError
from .sample import SampleState
from .scalars import ExactScalar, Phase, SymbolTable, parse_phase
from .states import (
    AuditBudget,
    FreeMonomial,
    ProductState,
    audit_assignment,
    audit_exchangeable,
    audit_spreadable,
    audit_stationary,
    h_abelian_sufficient,
    h_abelian_witness_search,
    poulsen_condition,
    product_state_exists,
    rn_audit,
)

OK, FAILED, BAD_CONFIG = 0, 1, 2


def _analyze_bicharacter(cfg: ExperimentConfig) -> tuple[dict, bool]:
    if cfg.twist is None:
        raise ConfigError("analyze-bicharacter needs a bicharacter section")
    twist = cfg.twist
    cls = twist.classify()
    out = {
        "group": str(twist.group),
        "symmetric": cls.symmetric,
        "antisymmetric": cls.antisymmetric,
    }
    if twist.group.is_finite:
        iso = twist.isotropy_set()
        verdict = h_abelian_sufficient(twist)
        out.update(
            {
                "isotropy_set": [list(e) for e in iso.elements],
                "isotropy_is_subgroup": iso.is_subgroup,
                "maximal_isotropic_subgroups": [
                    [list(e) for e in s.elements()]
                    for s in twist.maximal_isotropic_subgroups()
                ],
                "h_abelian_sufficient": verdict.holds,
                "h_abelian_failing_pair": (
                    [list(verdict.pair[0]), list(verdict.pair[1])]
                    if verdict.pair
                    else None
                ),
                "poulsen_condition": poulsen_condition(twist),
            }
        )
        ok = True
    else:
        out["note"] = "isotropy enumeration skipped: group has free rank"
        ok = True
    return out, ok


def _product_exists(cfg: ExperimentConfig) -> tuple[dict, bool]:
    if cfg.twist is None or not cfg.sample_states:
        raise ConfigError("product-exists needs a bicharacter and product states")
    results = {}
    ok = True
    for name in sorted(cfg.sample_states):
        verdict = product_state_exists(cfg.sample_states[name], cfg.twist)
        results[name] = {
            "exists": verdict.exists,
            "witness": [list(w) for w in verdict.witness] if verdict.witness else None,
        }
        ok = ok and verdict.exists
    return {"states": results}, ok


def _audit(cfg: ExperimentConfig, kind: str, only: str | None) -> tuple[dict, bool]:
    if not cfg.states:
        raise ConfigError("audit needs at least one state")
    names = sorted(cfg.states) if only is None else [only]
    if only is not None and only not in cfg.states:
        raise ConfigError(f"unknown state {only!r}")
    runners = {
        "exchangeable": audit_exchangeable,
        "spreadable": audit_spreadable,
        "stationary": audit_stationary,
        "rn": rn_audit,
    }
    if kind not in runners:
        raise ConfigError(f"unknown audit kind {kind!r}")
    results = {}
    ok = True
    for name in names:
        state = cfg.states[name]
        assignment = audit_assignment(state)
        report = runners[kind](state, cfg.budget)
        results[name] = report.to_json(assignment)
        # exit-code contract: 1 on any fail verdict, even an expected one
        ok = ok and report.passed
    return {"kind": kind, "states": results}, ok


def _build_action(cfg: ExperimentConfig, spec) -> tuple:
    if spec.kind == "torus":
        theta = parse_phase(spec.theta, cfg.symbols)
        chain = standard_chain("torus", alpha=theta)
        return build_torus_braid_action(theta, spec.window, chain), chain
    if cfg.chain is None:
        raise ConfigError("braid-verify needs a chain (sample + bicharacter)")
    window = range(spec.window)
    if spec.kind == "identity":
        return identity_action(cfg.chain, window, range(1, spec.window)), cfg.chain
    if spec.kind == "transpositions":
        return transposition_action(cfg.chain, window), cfg.chain
    if spec.kind == "table":
        return _table_action(cfg, spec), cfg.chain
    raise ConfigError(f"unknown braid kind {spec.kind!r}")


def _table_action(cfg: ExperimentConfig, spec):
    """Custom action: per-generator tables of chain-element strings keyed
    by "site:generator-name"."""
    from fractions import Fraction

    from .braid import BraidAction
    from .chain import parse_chain_element

    if not spec.images:
        raise ConfigError("braid kind 'table' needs an images table")
    chain = cfg.chain
    names = chain.sample.generator_names
    images = {}
    for gen, table in spec.images.items():
        entry = {}
        for key, text in table.items():
            site_text, _, gname = str(key).partition(":")
            if gname not in names:
                raise ConfigError(f"unknown generator {gname!r} in braid table")
            try:
                site = Fraction(site_text)
                entry[(site, names.index(gname))] = parse_chain_element(chain, str(text))
            except (ValueError, GradechainError) as exc:
                raise ConfigError(f"bad braid image at {key!r}: {exc}") from exc
        images[int(gen)] = entry
    window = sorted({site for table in images.values() for site, _ in table})
    try:
        return BraidAction(chain, tuple(window), images, name="table")
    except GradechainError as exc:
        raise ConfigError(f"bad braid table: {exc}") from exc


def _braid_verify(cfg: ExperimentConfig) -> tuple[dict, bool]:
    if cfg.braid is None:
        raise ConfigError("braid-verify needs a braid section")
    action, chain = _build_action(cfg, cfg.braid)
    artin = verify_artin_relations(action, cfg.braid.degree_bound)
    state = None
    if cfg.braid.state is not None:
        if cfg.braid.state not in cfg.states:
            raise ConfigError(f"unknown state {cfg.braid.state!r}")
        state = cfg.states[cfg.braid.state]
    elif cfg.braid.kind == "torus":
        state = ProductState(chain, SampleState(chain.sample, {(0,): 1}))
    braidable = verify_braidability(action, state, cfg.braid.degree_bound)
    out = {
        "action": action.name,
        "artin": artin.to_json(),
        "braidability": braidable.to_json(),
    }
    return out, artin.passed and braidable.passed


def _braid_obstruct(cfg: ExperimentConfig) -> tuple[dict, bool]:
    if cfg.braid is None:
        raise ConfigError("braid-obstruct needs a braid section")
    theta = cfg.braid.theta
    names = [theta, "alpha" if theta != "alpha" else "alpha2"]
    model = IndependenceModel(SymbolTable(tuple(names)), theta=names[0], alpha=names[1])
    trace = obstruction_solve(model, cfg.braid.obstruct_window)
    return trace.to_json(), not trace.infeasible


# --- the golden battery -----------------------------------------------------

def run_selftest() -> tuple[dict, bool]:
    """Exact checks of the worked examples; every line must pass."""
    checks: list[tuple[str, bool]] = []

    def check(name: str, condition: bool) -> None:
        checks.append((name, bool(condition)))

    # the order-9 example with two maximal isotropic lines
    g9 = DegreeGroup(0, (3, 3))
    golden = bicharacter_from_integer_matrix(g9, [[0, 1], [1, 1]], 3)
    iso = golden.isotropy_set()
    check(
        "golden isotropy set",
        set(iso.elements) == {(0, 0), (1, 1), (2, 2), (1, 0), (2, 0)}
        and not iso.is_subgroup,
    )
    check(
        "golden cross value 1/3",
        golden.evaluate((1, 0), (1, 1)) == Phase.of(Fraction(1, 3)),
    )
    check(
        "golden maximal isotropic pair",
        [s.elements() for s in golden.maximal_isotropic_subgroups()]
        == [((0, 0), (1, 0), (2, 0)), ((0, 0), (1, 1), (2, 2))],
    )
    check("golden poulsen false", not poulsen_condition(golden))
    check("golden sufficiency holds", h_abelian_sufficient(golden).holds)

    # the gate on the two-dimensional sample with odd support
    car = standard_chain("car")
    odd = SampleState(car.sample, {(0, 0): 1, (1, 0): Fraction(1, 2)})
    verdict = product_state_exists(odd, car.twist)
    check("gate rejects odd support", not verdict.exists and verdict.witness == ((1,), (1,)))
    invariant = SampleState(car.sample, {(0, 0): 1})
    check("gate accepts invariant", product_state_exists(invariant, car.twist).exists)

    # the deformed-commutation witness monomial
    table = SymbolTable(("alpha",))
    alpha = Phase.symbol("alpha", table)
    torus = standard_chain("torus", alpha=alpha)
    tr = ProductState(torus, SampleState(torus.sample, {(0,): 1}))
    m = FreeMonomial.of(
        [
            (1, torus.sample.basis((1,))),
            (2, torus.sample.basis((1,))),
            (1, torus.sample.basis((-1,))),
            (2, torus.sample.basis((-1,))),
        ]
    )
    check("witness monomial value", tr.evaluate(m) == ExactScalar.unit(alpha))
    swapped = m.relabel({Fraction(1): Fraction(2), Fraction(2): Fraction(1)})
    check("swapped witness conjugate", tr.evaluate(swapped) == ExactScalar.unit(-alpha))
    small = AuditBudget(samples=60, max_sites=4, max_letters=4, exponent_bound=1, seed=11)
    check("deformed chain not exchangeable", not audit_exchangeable(tr, small).passed)
    check("deformed chain spreadable", audit_spreadable(tr, small).passed)

    # normal ordering against the closed-form cocycle
    import random

    from .chain import oracle_product

    rng = random.Random(2024)
    agree = True
    for ctx in (car, torus):
        rank = ctx.sample.exponents.rank
        for _ in range(200):
            monos = []
            for _ in range(2):
                sites = sorted(rng.sample(range(4), rng.randrange(0, 4)))
                monos.append(
                    ctx.monomial(
                        [
                            (s, tuple(rng.randrange(-2, 3) for _ in range(rank)))
                            for s in sites
                        ]
                    )
                )
            x, y = monos
            phase, mono = oracle_product(ctx, x, y)
            lhs = ChainElement(ctx, {x: ExactScalar.one()}) * ChainElement(
                ctx, {y: ExactScalar.one()}
            )
            agree = agree and lhs == ChainElement(ctx, {mono: ExactScalar.one().shift(phase)})
    check("normal ordering matches the regular representation", agree)

    # odd-torsion symmetric twists satisfy the sufficiency predicate
    from math import gcd

    from .degrees import Bicharacter

    holds = True
    for _ in range(30):
        orders = tuple(rng.choice([3, 5, 7, 9]) for _ in range(rng.randrange(1, 4)))
        gg = DegreeGroup(0, orders)
        mat = [[None] * len(orders) for _ in orders]
        for i in range(len(orders)):
            for j in range(i, len(orders)):
                d = gcd(orders[i], orders[j])
                mat[i][j] = mat[j][i] = Phase.of(Fraction(rng.randrange(d), d))
        holds = holds and h_abelian_sufficient(
            Bicharacter(gg, tuple(tuple(r) for r in mat))
        ).holds
    check("odd-torsion symmetric suite", holds)

    # the infeasibility trace ends in the j_1 clash
    model = IndependenceModel(SymbolTable(("theta", "alpha")))
    trace = obstruction_solve(model, 5)
    check(
        "obstruction trace",
        trace.infeasible and trace.contradiction == ("j_1", "2", "0"),
    )

    # the braidable torus action verifies; the identity action does not
    tbl = SymbolTable(("theta",))
    theta = Phase.symbol("theta", tbl)
    tchain = standard_chain("torus", alpha=theta)
    action = build_torus_braid_action(theta, 3, tchain)
    haar = ProductState(tchain, SampleState(tchain.sample, {(0,): 1}))
    check("torus action artin", verify_artin_relations(action, 2).passed)
    check("torus action braidable", verify_braidability(action, haar, 2).passed)
    ident = identity_action(tchain, range(3), [1, 2])
    check("identity action fails", not verify_braidability(ident, None, 1).passed)

    out = {
        "checks": [{"name": n, "passed": p} for n, p in checks],
        "passed": all(p for _, p in checks),
    }
    return out, out["passed"]


# --- entry point --------------------------------------------------------------

def _emit(report: dict, args) -> None:
    if args.json:
        text = json.dumps(report, indent=2, sort_keys=True)
    else:
        lines = [f"# {report['command']} ({report['schema']})"]

        def walk(prefix: str, value) -> None:
            if isinstance(value, dict):
                for k in value:
                    walk(f"{prefix}{k}.", value[k])
            elif isinstance(value, list) and value and all(
                isinstance(v, dict) and set(v) == {"name", "passed"} for v in value
            ):
                for v in value:
                    lines.append(f"{'PASS' if v['passed'] else 'FAIL'}  {v['name']}")
            elif isinstance(value, list):
                lines.append(f"{prefix[:-1]} = {json.dumps(value, sort_keys=True)}")
            else:
                lines.append(f"{prefix[:-1]} = {value}")

        walk("", report["result"])
        text = "\n".join(lines)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="gradechain",
        description="exact checks of distributional symmetries on twisted chains",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.add_argument("--config", help="TOML or JSON experiment file")
        p.add_argument("--json", action="store_true", help="emit a JSON report")
        p.add_argument("--seed", type=int, default=None, help="override the audit seed")
        p.add_argument("--out", default=None, help="write the report to a file")
        return p

    add("analyze-bicharacter", help="classification, isotropy set, predicates")
    add("product-exists", help="existence gate for the named product states")
    audit_p = add("audit", help="distributional-symmetry audits on named states")
    audit_p.add_argument(
        "kind",
        choices=["exchangeable", "spreadable", "stationary", "rn"],
        help="which audit to run",
    )
    audit_p.add_argument("--state", default=None, help="restrict to one named state")
    add("braid-verify", help="Artin relations and braidability of the configured action")
    add("braid-obstruct", help="infeasibility trace for the doubled-torus braiding")
    add("selftest", help="run the golden worked-example battery")

    args = parser.parse_args(argv)

    try:
        if args.command == "selftest":
            result, ok = run_selftest()
        else:
            if not args.config:
                raise ConfigError(f"{args.command} requires --config")
            cfg = load_config(args.config, seed_override=args.seed)
            if args.command == "analyze-bicharacter":
                result, ok = _analyze_bicharacter(cfg)
            elif args.command == "product-exists":
                result, ok = _product_exists(cfg)
            elif args.command == "audit":
                result, ok = _audit(cfg, args.kind, args.state)
            elif args.command == "braid-verify":
                result, ok = _braid_verify(cfg)
            elif args.command == "braid-obstruct":
                result, ok = _braid_obstruct(cfg)
            else:  # pragma: no cover
                raise ConfigError(f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return BAD_CONFIG
    except GradechainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_CONFIG

    report = {"schema": SCHEMA, "command": args.command, "result": result}
    _emit(report, args)
    return OK if ok else FAILED


if __name__ == "__main__":
    sys.exit(main())
