"""
Random-start sweep: integrate from many initial states and match every
terminal state to the catalog and to predict_limit.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from config.constants import SWEEP_ZERO_OUT_PROB
from config.settings import get_settings
from core.model import SISModel, indicator, mask_bits
from dynamics.equilibrium import predict_limit
from dynamics.integrator import integrate
from equilibria.catalog import EquilibriumCatalog
from structure.atoms import AtomDecomposition

logger = logging.getLogger(__name__)


@dataclass
class SweepOutcome:
    """One start of the sweep."""
    origin: str
    start: np.ndarray
    matched: Optional[str]
    predicted: str
    agrees: bool
    distance: float
    terminal_reason: str

    def to_dict(self) -> dict:
        return {
            "origin": self.origin,
            "start": self.start.tolist(),
            "matched": self.matched,
            "predicted": self.predicted,
            "agrees": self.agrees,
            "distance": self.distance,
            "terminal_reason": self.terminal_reason,
        }


@dataclass
class SweepReport:
    """Coverage of the catalog by integrated limits."""
    model_name: str
    seed: int
    outcomes: list[SweepOutcome] = field(default_factory=list)

    @property
    def unmatched(self) -> list[SweepOutcome]:
        return [o for o in self.outcomes if o.matched is None]

    @property
    def disagreements(self) -> list[SweepOutcome]:
        return [o for o in self.outcomes if not o.agrees]

    @property
    def agreement_rate(self) -> float:
        if not self.outcomes:
            return 1.0
        return sum(o.agrees for o in self.outcomes) / len(self.outcomes)

    @property
    def passed(self) -> bool:
        return not self.unmatched and not self.disagreements

    def basin_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for o in self.outcomes:
            key = o.matched or "unmatched"
            counts[key] = counts.get(key, 0) + 1
        return counts

    def to_dict(self) -> dict:
        return {
            "model": self.model_name,
            "seed": self.seed,
            "starts": len(self.outcomes),
            "unmatched": len(self.unmatched),
            "agreement_rate": self.agreement_rate,
            "basins": self.basin_counts(),
            "outcomes": [o.to_dict() for o in self.outcomes],
        }

    def format_report(self) -> str:
        lines = [
            f"Random-start sweep of '{self.model_name}' (seed {self.seed}): {len(self.outcomes)} starts, "
            f"{len(self.unmatched)} unmatched, agreement {self.agreement_rate:.1%}",
        ]
        for name, count in sorted(self.basin_counts().items()):
            lines.append(f"  {name}: {count}")
        for o in self.disagreements:
            lines.append(f"  DISAGREEMENT from {o.origin}: observed {o.matched}, predicted {o.predicted}")
        return "\n".join(lines)


def random_starts(model: SISModel, num_starts: int, rng: np.random.Generator) -> list[np.ndarray]:
    """
    Uniform states; with probability 1/2 a uniformly random subset of
    features is set to zero.
    """
    starts = []
    for _ in range(num_starts):
        h = rng.uniform(0.0, 1.0, size=model.n)
        if rng.random() < SWEEP_ZERO_OUT_PROB:
            h[rng.random(model.n) < 0.5] = 0.0
        starts.append(h)
    return starts


def random_start_sweep(
    model: SISModel,
    decomposition: AtomDecomposition,
    catalog: EquilibriumCatalog,
    num_starts: int = 32,
    seed: int = 0,
    match_tol: Optional[float] = None,
) -> SweepReport:
    """
    Integrate from random and extreme starts and match every limit.

    Starts are 0, 1, the indicator of every atom, then num_starts random
    states drawn from a generator seeded with seed.
    """
    config = get_settings().dynamics
    match_tol = config.sweep_match_tol if match_tol is None else match_tol
    rng = np.random.default_rng(seed)

    origins: list[tuple[str, np.ndarray]] = [("zeros", np.zeros(model.n)), ("ones", np.ones(model.n))]
    origins += [(f"atom {atom.name}", indicator(atom.mask)) for atom in decomposition.atoms]
    origins += [(f"random #{k}", h) for k, h in enumerate(random_starts(model, num_starts, rng))]

    report = SweepReport(model_name=model.name, seed=seed)
    for origin, h in origins:
        trajectory = integrate(model, h)
        final = trajectory.final_state
        matched = catalog.match(final, config.support_tol, match_tol)
        prediction = predict_limit(model, decomposition, h)
        agrees = matched is not None and np.array_equal(matched.support, prediction.support)
        nearest = min(catalog.records, key=lambda r: float(np.max(np.abs(r.state - final))))
        report.outcomes.append(SweepOutcome(
            origin=origin,
            start=h,
            matched=None if matched is None else matched.antichain_name,
            predicted=prediction.antichain_name,
            agrees=agrees,
            distance=float(np.max(np.abs(nearest.state - final))),
            terminal_reason=trajectory.terminal_reason.value,
        ))
        if matched is None:
            logger.warning(f"Start {origin} of '{model.name}' ended at support {mask_bits(final > config.support_tol)} "
                           f"matching no catalog entry")

    logger.info(f"Sweep of '{model.name}': {len(report.outcomes)} starts, {len(report.unmatched)} unmatched")
    return report
