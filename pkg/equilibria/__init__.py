"""
Equilibrium catalog, random-start sweep and vaccination checks.
"""
from equilibria.catalog import (
    EquilibriumCatalog,
    SupportOrderReport,
    equilibrium_for_antichain,
    equilibrium_catalog,
    order_by_supports,
)
from equilibria.sweep import SweepOutcome, SweepReport, random_starts, random_start_sweep
from equilibria.vaccination import (
    VaccinationReport,
    MonatomicityReport,
    EscapeReport,
    critical_vaccination_check,
    monatomicity_by_equilibrium_counts,
    escape_from_equilibrium,
)

__all__ = [
    "EquilibriumCatalog",
    "SupportOrderReport",
    "equilibrium_for_antichain",
    "equilibrium_catalog",
    "order_by_supports",
    "SweepOutcome",
    "SweepReport",
    "random_starts",
    "random_start_sweep",
    "VaccinationReport",
    "MonatomicityReport",
    "EscapeReport",
    "critical_vaccination_check",
    "monatomicity_by_equilibrium_counts",
    "escape_from_equilibrium",
]
