"""Exact-arithmetic finite windows of twisted tensor chains of graded algebras.

The package models chains built from a monomial sample algebra and a
bicharacter twist on its degree group, evaluates states on them exactly,
and mechanically audits distributional symmetries: exchangeability,
spreadability, stationarity, and braidability.
"""

from .chain import (
    ChainContext,
    ChainElement,
    ChainMonomial,
    SiteMap,
    as_site,
    oracle_product,
    parse_monomial,
    regular_rep_table,
    standard_chain,
)
from .degrees import Bicharacter, DegreeGroup, Subgroup, subgroup_generated
from .sample import (
    SampleAlgebra,
    SampleElement,
    SampleState,
    build_standard_sample,
    spectral_projection,
    state_positivity,
)
from .scalars import ExactScalar, Phase, SymbolTable, parse_phase, parse_scalar
from .states import (
    AuditBudget,
    FreeMonomial,
    MixtureState,
    PinnedState,
    ProductState,
    audit_exchangeable,
    audit_spreadable,
    audit_stationary,
    eval_monomial,
    h_abelian_sufficient,
    h_abelian_witness_search,
    poulsen_condition,
    product_state_exists,
    rn_audit,
)

__version__ = "0.1.0"

__all__ = [
    "AuditBudget",
    "Bicharacter",
    "ChainContext",
    "ChainElement",
    "ChainMonomial",
    "DegreeGroup",
    "ExactScalar",
    "FreeMonomial",
    "MixtureState",
    "Phase",
    "PinnedState",
    "ProductState",
    "SampleAlgebra",
    "SampleElement",
    "SampleState",
    "SiteMap",
    "Subgroup",
    "SymbolTable",
    "as_site",
    "audit_exchangeable",
    "audit_spreadable",
    "audit_stationary",
    "build_standard_sample",
    "eval_monomial",
    "h_abelian_sufficient",
    "h_abelian_witness_search",
    "oracle_product",
    "parse_monomial",
    "parse_phase",
    "parse_scalar",
    "poulsen_condition",
    "product_state_exists",
    "regular_rep_table",
    "rn_audit",
    "spectral_projection",
    "standard_chain",
    "state_positivity",
    "subgroup_generated",
]
