"""geoclose: a finite workbench for leveled closure systems.

Represents finite universes with level-tagged elements and a validated
closure operator, computes level-n ranks with replayable certificates,
builds (canonical) coordinatization sequences, checks the exchange
property, evaluates n-independence, and runs verification suites for the
independence-relation axioms plus dividing-style probes.
"""

__version__ = "0.1.0"

from .closure import (
    Element,
    LeveledClosureSystem,
    OrbitClosure,
    RulesClosure,
    TableClosure,
    ValidationReport,
    acl_n,
    level_monotone_check,
    system_from_spec,
    system_to_spec,
    validate,
)
from .groups import PermGroup
from .indep import IndependenceQuery
from .pregeom import ExchangeWitness, check_exchange, exchange_status, rank1_slice
from .rank import (
    CoordSequence,
    RankCertificate,
    RankQuery,
    build_nccs,
    build_ncs,
    greedy_rank,
    rank_by_sequences,
    rank_recursive,
    transform_ncs_to_nccs,
)

__all__ = [
    "CoordSequence",
    "Element",
    "ExchangeWitness",
    "IndependenceQuery",
    "LeveledClosureSystem",
    "OrbitClosure",
    "PermGroup",
    "RankCertificate",
    "RankQuery",
    "RulesClosure",
    "TableClosure",
    "ValidationReport",
    "acl_n",
    "build_nccs",
    "build_ncs",
    "check_exchange",
    "exchange_status",
    "greedy_rank",
    "level_monotone_check",
    "rank1_slice",
    "rank_by_sequences",
    "rank_recursive",
    "system_from_spec",
    "system_to_spec",
    "transform_ncs_to_nccs",
    "validate",
    "__version__",
]
