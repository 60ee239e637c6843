"""Experiment configuration: one TOML (or JSON) file describing the group,
the twist, the sample, named states, audit budget, and an optional braid
section.

Value tables map exponent vectors (comma-separated integers) to scalar
strings like ``"1"``, ``"1/2*e(1/4)"``, ``"e(theta)"``; bicharacter matrix
entries are phase strings like ``"1/3"`` or ``"2*alpha+1/2"``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .chain import ChainContext
from .degrees import Bicharacter, DegreeGroup
from .errors import ConfigError, GateFailed, GradechainError, ParseError
from .sample import SampleAlgebra, SampleState, build_standard_sample
from .scalars import SymbolTable, parse_phase, parse_scalar
from .states import AuditBudget, ChainState, MixtureState, PinnedState, ProductState

SCHEMA = "gradechain/1"


@dataclass
class BraidSpec:
    kind: str = "torus"  # torus | identity | transpositions | table
    theta: str = "theta"
    window: int = 4
    degree_bound: int = 3
    obstruct_window: int = 5
    state: str | None = None
    # for kind = "table": generator index -> {"site:generator" -> element string}
    images: dict | None = None


@dataclass
class ExperimentConfig:
    symbols: SymbolTable
    group: DegreeGroup
    twist: Bicharacter | None
    chain: ChainContext | None
    sample_states: dict[str, SampleState]
    states: dict[str, ChainState]
    budget: AuditBudget
    braid: BraidSpec | None
    path: str = "<memory>"


def _load_raw(path: str | Path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if path.suffix == ".json":
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: bad JSON: {exc}") from exc
    try:
        import tomllib  # Python >= 3.11
    except ModuleNotFoundError:
        import tomli as tomllib
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: bad TOML: {exc}") from exc


def _parse_exponent(text: str, rank: int) -> tuple[int, ...]:
    try:
        vec = tuple(int(part.strip()) for part in str(text).split(","))
    except ValueError as exc:
        raise ConfigError(f"bad exponent vector {text!r}") from exc
    if len(vec) != rank:
        raise ConfigError(f"exponent {text!r} must have {rank} coordinates")
    return vec


def _parse_values(table: dict, sample: SampleAlgebra, symbols: SymbolTable) -> dict:
    out = {}
    for key, value in table.items():
        vec = _parse_exponent(key, sample.exponents.rank)
        try:
            out[vec] = parse_scalar(str(value), symbols)
        except ParseError as exc:
            raise ConfigError(f"bad scalar {value!r} at {key!r}: {exc}") from exc
    return out


def _parse_fraction(text) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad rational {text!r}") from exc


def load_config(path: str | Path, seed_override: int | None = None) -> ExperimentConfig:
    raw = _load_raw(path)
    if raw.get("schema", SCHEMA) != SCHEMA:
        raise ConfigError(f"unsupported schema {raw.get('schema')!r}")

    symbols = SymbolTable(tuple(raw.get("symbols", {}).get("names", ())))

    group_raw = raw.get("group", {})
    try:
        group = DegreeGroup(
            int(group_raw.get("free_rank", 0)),
            tuple(int(n) for n in group_raw.get("torsion", ())),
        )
    except (ValueError, GradechainError) as exc:
        raise ConfigError(f"bad group section: {exc}") from exc

    sample = None
    sample_raw = raw.get("sample")
    if sample_raw is not None:
        kind = sample_raw.get("kind")
        try:
            if kind == "function_algebra":
                sample = build_standard_sample("function_algebra", group=group)
            elif kind in ("clock_shift", "parafermion"):
                sample = build_standard_sample(kind, d=int(sample_raw["d"]))
            elif kind == "nc_torus":
                alpha = parse_phase(str(sample_raw["alpha"]), symbols)
                sample = build_standard_sample("nc_torus", alpha=alpha)
            else:
                raise ConfigError(f"unknown sample kind {kind!r}")
        except (KeyError, ValueError, ParseError, GradechainError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad sample section: {exc}") from exc

    degree_group = sample.degree_group if sample is not None else group

    twist = None
    bichar_raw = raw.get("bicharacter")
    if bichar_raw is not None:
        matrix = bichar_raw.get("matrix")
        if not isinstance(matrix, list):
            raise ConfigError("bicharacter.matrix must be a list of rows")
        try:
            rows = tuple(
                tuple(parse_phase(str(entry), symbols) for entry in row)
                for row in matrix
            )
            twist = Bicharacter(degree_group, rows)
        except (ParseError, ValueError, GradechainError) as exc:
            raise ConfigError(f"bad bicharacter: {exc}") from exc

    chain = None
    if sample is not None and twist is not None:
        chain = ChainContext(sample, twist)

    sample_states: dict[str, SampleState] = {}
    states: dict[str, ChainState] = {}
    for name, spec in raw.get("states", {}).items():
        kind = spec.get("kind", "product")
        if sample is None:
            raise ConfigError("states need a sample section")
        try:
            if kind == "product":
                omega = SampleState(sample, _parse_values(spec["values"], sample, symbols))
                sample_states[name] = omega
                if chain is not None:
                    # a failing gate is a reportable verdict (product-exists),
                    # not a config error; the state is just not auditable
                    try:
                        states[name] = ProductState(chain, omega)
                    except GateFailed:
                        pass
            elif kind == "pinned":
                if chain is None:
                    raise ConfigError("pinned states need a bicharacter")
                default = SampleState(
                    sample, _parse_values(spec["default"], sample, symbols)
                )
                table = {
                    Fraction(site): SampleState(
                        sample, _parse_values(tab, sample, symbols)
                    )
                    for site, tab in spec.get("table", {}).items()
                }
                states[name] = PinnedState(
                    chain, table, default, period=spec.get("period")
                )
            elif kind == "mixture":
                if chain is None:
                    raise ConfigError("mixture states need a bicharacter")
                components = []
                for comp in spec.get("components", ()):
                    ref = comp.get("state")
                    if ref not in states:
                        raise ConfigError(f"mixture {name!r}: unknown state {ref!r}")
                    components.append((_parse_fraction(comp.get("weight")), states[ref]))
                states[name] = MixtureState(chain, components)
            else:
                raise ConfigError(f"unknown state kind {kind!r}")
        except GateFailed as exc:
            # pinned/mixture constructions have no verdict surface; fail loudly
            raise ConfigError(f"state {name!r} fails the existence gate: {exc}") from exc
        except (KeyError, ValueError, GradechainError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad state {name!r}: {exc}") from exc

    audit_raw = raw.get("audit", {})
    try:
        budget = AuditBudget(
            samples=int(audit_raw.get("samples", 500)),
            max_sites=int(audit_raw.get("max_sites", 5)),
            max_letters=int(audit_raw.get("max_letters", 6)),
            exponent_bound=int(audit_raw.get("exponent_bound", 2)),
            seed=int(audit_raw.get("seed", 0)),
        )
    except ValueError as exc:
        raise ConfigError(f"bad audit section: {exc}") from exc
    if seed_override is not None:
        budget = AuditBudget(
            budget.samples,
            budget.max_sites,
            budget.max_letters,
            budget.exponent_bound,
            seed_override,
        )

    braid = None
    braid_raw = raw.get("braid")
    if braid_raw is not None:
        braid = BraidSpec(
            kind=braid_raw.get("kind", "torus"),
            theta=braid_raw.get("theta", "theta"),
            window=int(braid_raw.get("window", 4)),
            degree_bound=int(braid_raw.get("degree_bound", 3)),
            obstruct_window=int(braid_raw.get("obstruct_window", 5)),
            state=braid_raw.get("state"),
            images=braid_raw.get("images"),
        )

    return ExperimentConfig(
        symbols=symbols,
        group=degree_group,
        twist=twist,
        chain=chain,
        sample_states=sample_states,
        states=states,
        budget=budget,
        braid=braid,
        path=str(path),
    )
