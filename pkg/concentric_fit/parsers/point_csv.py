"""
Point CSV Parser
Parses headered x,y,ring CSV files of observed points into a DataSet
"""

from pathlib import Path
from typing import Union
import logging

import numpy as np
import pandas as pd

from concentric_fit.design_matrices import DataSet
from concentric_fit.exceptions import PointFileError

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ('x', 'y', 'ring')


class PointCSVParser:
    """Parser for point files with columns x, y and a 1-based ring index"""

    def parse(self, csv_path: Union[str, Path], f0: float) -> DataSet:
        """
        Parse a point file

        Args:
            csv_path: Path to the CSV file
            f0: carrier scale of the returned DataSet

        Returns:
            DataSet with one ring per distinct ring index

        Raises:
            PointFileError: unreadable file, missing columns, bad values or ring labels
            InsufficientPoints: fewer than 6 + K rows
        """
        try:
            frame = pd.read_csv(csv_path, skipinitialspace=True, float_precision='round_trip')
        except FileNotFoundError as e:
            raise PointFileError(f"point file not found: {csv_path}") from e
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
            raise PointFileError(f"cannot read {csv_path}: {e}") from e

        data = self.parse_frame(frame, f0)
        logger.info(f"Parsed {csv_path}: {data.n_total} points on {data.K} ring(s), counts={data.counts}")
        return data

    def parse_frame(self, frame: pd.DataFrame, f0: float) -> DataSet:
        """Validate a frame with x, y, ring columns and build a DataSet"""
        frame = frame.rename(columns=lambda c: str(c).strip().lower())
        missing = [c for c in REQUIRED_COLUMNS if c not in frame.columns]
        if missing:
            raise PointFileError(f"missing column(s): {', '.join(missing)}")

        coords = frame[['x', 'y']].apply(pd.to_numeric, errors='coerce')
        # NaN from coercion fails isfinite too
        bad_rows = np.flatnonzero(~np.isfinite(coords.to_numpy(dtype=float)).all(axis=1))
        if bad_rows.size:
            raise PointFileError(f"non-numeric coordinate near row {bad_rows[0] + 1}")

        rings = pd.to_numeric(frame['ring'], errors='coerce')
        if rings.isna().any() or (rings != rings.round()).any():
            raise PointFileError("ring column must hold integers")
        rings = rings.astype(int)

        labels = sorted(set(rings))
        if not labels or labels[0] < 1:
            raise PointFileError("ring indices start at 1")
        if labels != list(range(1, len(labels) + 1)):
            raise PointFileError(f"non-contiguous ring indices: {labels}")

        data = DataSet.from_labeled(coords['x'], coords['y'], rings, f0)
        data.require_fittable()
        return data
