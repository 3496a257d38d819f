"""
Grid conformity check of incidence functions.

A conforming phi is nonnegative and decreasing on [0, 1] with phi(0) = 1
and phi(1) = 0.
"""
import logging
from typing import Optional

import numpy as np

from config.constants import MIN_CONFORMITY_GRID, NORMALIZATION_TOL, PLATEAU_TOL
from config.settings import get_settings
from core.errors import InputError
from incidence.base import ConformityReport, IncidenceFunction

logger = logging.getLogger(__name__)

# Number of offending grid points quoted in a violation message
_MAX_QUOTED = 3


def _quote(grid: np.ndarray, idx: np.ndarray) -> str:
    shown = ", ".join(f"{grid[i]:.6g}" for i in idx[:_MAX_QUOTED])
    more = f" (+{idx.size - _MAX_QUOTED} more)" if idx.size > _MAX_QUOTED else ""
    return shown + more


def check_conformity(phi: IncidenceFunction, grid_size: Optional[int] = None) -> ConformityReport:
    """
    Check phi on a uniform grid of grid_size + 1 points over [0, 1].

    Args:
        phi: Incidence function
        grid_size: Number of grid intervals (>= 16), defaults to settings

    Returns:
        ConformityReport; violations never raise
    """
    if grid_size is None:
        grid_size = get_settings().structure.conformity_grid
    if grid_size < MIN_CONFORMITY_GRID:
        raise InputError(f"grid_size must be at least {MIN_CONFORMITY_GRID}, got {grid_size}")

    grid = np.linspace(0.0, 1.0, grid_size + 1)
    values = np.asarray(phi(grid), dtype=float)
    violations: list[str] = []
    warnings: list[str] = []

    if not np.all(np.isfinite(values)):
        bad = np.flatnonzero(~np.isfinite(values))
        violations.append(f"phi is not finite at u = {_quote(grid, bad)}")
        values = np.nan_to_num(values, nan=0.0, posinf=0.0, neginf=0.0)

    phi0, phi1 = float(values[0]), float(values[-1])
    if abs(phi0 - 1.0) > NORMALIZATION_TOL:
        violations.append(f"phi(0) must equal 1, got {phi0:.12g}")
    if abs(phi1) > NORMALIZATION_TOL:
        violations.append(f"phi(1) must equal 0, got {phi1:.12g}")

    negative = np.flatnonzero(values < 0.0)
    if negative.size:
        violations.append(f"phi is negative at u = {_quote(grid, negative)}")

    diffs = np.diff(values)
    increases = np.flatnonzero(diffs > PLATEAU_TOL)
    if increases.size:
        violations.append(f"phi is not decreasing after u = {_quote(grid, increases)}")
    plateaus = np.flatnonzero((diffs >= 0.0) & (diffs <= PLATEAU_TOL))
    if plateaus.size:
        warnings.append(f"phi is flat within {PLATEAU_TOL:g} after u = {_quote(grid, plateaus)}")

    lipschitz = float(np.max(np.abs(diffs)) * grid_size) if diffs.size else 0.0

    report = ConformityReport(
        passed=not violations,
        family=phi.name,
        grid_size=grid_size,
        phi_at_zero=phi0,
        phi_at_one=phi1,
        lipschitz_estimate=lipschitz,
        violations=violations,
        warnings=warnings,
    )
    if violations:
        logger.warning(f"Incidence {phi.name} is non-conforming: {'; '.join(violations)}")
    else:
        logger.debug(f"Incidence {phi.name} conforming, Lipschitz ~ {lipschitz:.6g}")
    return report
