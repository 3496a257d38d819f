"""
CSV export of trajectories and equilibrium catalogs.

Floats are written with 17 significant digits so that files read back to
the same doubles and identical runs produce identical bytes.
"""
import logging
from pathlib import Path
from typing import Optional, Union

import pandas as pd

from config.settings import get_settings
from dynamics.integrator import Trajectory
from equilibria.catalog import EquilibriumCatalog

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def dataframe_to_csv(df: pd.DataFrame, path: Optional[PathLike] = None, float_format: Optional[str] = None) -> str:
    """Write df without index; returns the CSV text."""
    float_format = get_settings().run.float_format if float_format is None else float_format
    text = df.to_csv(index=False, float_format=float_format, lineterminator="\n")
    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info(f"Wrote {len(df)} rows to {path}")
    return text


def write_trajectory_csv(trajectory: Trajectory, path: PathLike, stride: Optional[int] = None) -> Path:
    """Columns t, one per feature, residual."""
    stride = get_settings().run.trajectory_stride if stride is None else stride
    dataframe_to_csv(trajectory.to_dataframe(stride), path)
    return Path(path)


def write_catalog_csv(catalog: EquilibriumCatalog, path: PathLike) -> Path:
    """Columns antichain, support, one per feature, residual, re_phi."""
    dataframe_to_csv(catalog.to_dataframe(), path)
    return Path(path)
