"""
CSV parsers for obstacle clouds and sampled trajectories.
Reads the files written by the output generators back into model objects.
"""
import re
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from ..models.jet import Trajectory
from ..models.obstacle import ObstacleCloud


class CloudParserError(Exception):
    """Custom exception for cloud and trajectory CSV errors."""
    pass


def _read(path: str) -> pd.DataFrame:
    try:
        return pd.read_csv(path, float_precision="round_trip")
    except FileNotFoundError:
        raise CloudParserError(f"CSV file not found: {path}")
    except Exception as e:
        raise CloudParserError(f"Error reading CSV file: {str(e)}")


def _indexed_columns(columns, prefix: str) -> List[str]:
    """Columns named prefix<index> in index order, whatever the first index."""
    pattern = re.compile(rf"^{prefix}(\d+)$")
    found = sorted(
        (int(m.group(1)), c) for c in columns for m in [pattern.match(str(c))] if m
    )
    return [c for _, c in found]


class CloudParser:
    """
    Parser for obstacle cloud CSV files.

    One point per row. Columns x0, x1, ... are used when present, otherwise
    every column is taken as a coordinate.
    """

    def __init__(self, csv_path: str, name: Optional[str] = None):
        """
        Initialize cloud parser.

        Args:
            csv_path: Path to CSV file
            name: Label of the cloud (defaults to the path)
        """
        self.csv_path = csv_path
        self.name = name or csv_path
        self.df = None

    def parse(self) -> ObstacleCloud:
        """
        Parse the CSV file into an ObstacleCloud.

        Raises:
            CloudParserError: If the file is missing, empty or non-numeric
        """
        self.df = _read(self.csv_path)
        columns = _indexed_columns(self.df.columns, "x") or list(self.df.columns)
        if self.df.empty or not columns:
            raise CloudParserError(f"No points found in {self.csv_path}")
        try:
            points = self.df[columns].to_numpy(dtype=float)
        except ValueError as e:
            raise CloudParserError(f"Non-numeric cloud coordinates in {self.csv_path}: {str(e)}")
        try:
            return ObstacleCloud(points=points, name=self.name)
        except ValueError as e:
            raise CloudParserError(str(e))


class TrajectoryParser:
    """
    Parser for trajectory CSV files.

    Expected columns:
    - t: Sample time
    - q1.., v1.., a1.., j1..: Jet components
    - piece_id: Optional, present in hybrid trajectories
    """

    def __init__(self, csv_path: str):
        """
        Initialize trajectory parser.

        Args:
            csv_path: Path to CSV file
        """
        self.csv_path = csv_path
        self.df = None

    def _columns(self) -> Dict[str, List[str]]:
        if "t" not in self.df.columns:
            raise CloudParserError(f"Missing required column 't' in {self.csv_path}")
        groups = {key: _indexed_columns(self.df.columns, key) for key in ("q", "v", "a", "j")}
        dims = {key: len(cols) for key, cols in groups.items()}
        if dims["q"] == 0 or len(set(dims.values())) != 1:
            raise CloudParserError(f"Inconsistent jet columns in {self.csv_path}: {dims}")
        return groups

    def _build(self, frame: pd.DataFrame, groups: Dict[str, List[str]], shift: float = 0.0) -> Trajectory:
        try:
            return Trajectory(
                times=frame["t"].to_numpy(dtype=float) - shift,
                q=frame[groups["q"]].to_numpy(dtype=float),
                v=frame[groups["v"]].to_numpy(dtype=float),
                a=frame[groups["a"]].to_numpy(dtype=float),
                j=frame[groups["j"]].to_numpy(dtype=float),
            )
        except ValueError as e:
            raise CloudParserError(f"Invalid trajectory in {self.csv_path}: {str(e)}")

    def parse(self) -> Trajectory:
        """
        Parse a single-piece trajectory.

        Raises:
            CloudParserError: If columns are missing or the samples are invalid
        """
        self.df = _read(self.csv_path)
        return self._build(self.df, self._columns())

    def parse_pieces(self) -> List[Trajectory]:
        """
        Parse a hybrid trajectory into its pieces, each in local time.

        Raises:
            CloudParserError: If the piece_id column is missing
        """
        self.df = _read(self.csv_path)
        groups = self._columns()
        if "piece_id" not in self.df.columns:
            raise CloudParserError(f"Missing 'piece_id' column in {self.csv_path}")
        pieces = []
        for _, frame in self.df.groupby("piece_id", sort=True):
            pieces.append(self._build(frame, groups, shift=float(frame["t"].iloc[0])))
        return pieces
