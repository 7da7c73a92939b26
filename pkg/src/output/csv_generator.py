"""
CSV output generator for trajectories and point sets.
Every file is written to a temporary name and renamed into place.
"""
import csv
import os
import tempfile
from pathlib import Path
from typing import List, Optional

import numpy as np

from ..models.hybrid import HybridTrajectory
from ..models.jet import Trajectory


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def atomic_write_text(filepath: Path, write_fn) -> Path:
    """
    Write a file through a temporary sibling and rename it into place.

    Args:
        filepath: Final path
        write_fn: Callable receiving the open text handle

    Returns:
        The final path
    """
    filepath = Path(filepath)
    filepath.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=filepath.parent, prefix=f".{filepath.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as handle:
            write_fn(handle)
        os.replace(tmp, filepath)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    return filepath


class CSVGenerator:
    """
    Generates CSV files for sampled trajectories, hybrid trajectories and clouds.

    Numbers are written with 17 significant digits so files re-parse to the
    same doubles.
    """

    def __init__(self, output_dir: str = "results"):
        """
        Initialize the CSV generator.

        Args:
            output_dir: Directory receiving the files
        """
        self.output_dir = Path(output_dir)

    @staticmethod
    def trajectory_headers(dim: int, with_piece: bool = False) -> List[str]:
        headers = ["piece_id", "vertex"] if with_piece else []
        headers.append("t")
        for key in ("q", "v", "a", "j"):
            headers.extend(f"{key}{i}" for i in range(1, dim + 1))
        return headers

    @staticmethod
    def _rows(traj: Trajectory, offset: float = 0.0):
        for i in range(traj.num_samples):
            row = [_fmt(traj.times[i] + offset)]
            for block in (traj.q, traj.v, traj.a, traj.j):
                row.extend(_fmt(x) for x in block[i])
            yield row

    def generate_trajectory(self, traj: Trajectory, filename: str = "trajectory") -> Path:
        """
        Write one trajectory.

        Args:
            traj: Sampled trajectory
            filename: Name without extension

        Returns:
            Path to the generated CSV file
        """
        def write(handle):
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(self.trajectory_headers(traj.dim))
            writer.writerows(self._rows(traj))

        return atomic_write_text(self.output_dir / f"{filename}.csv", write)

    def generate_hybrid(self, hybrid: HybridTrajectory, filename: str = "hybrid_trajectory") -> Path:
        """
        Write every piece of a hybrid trajectory in absolute time.

        Pieces of different dimension share the widest header; missing
        components are left empty.

        Args:
            hybrid: Hybrid trajectory
            filename: Name without extension

        Returns:
            Path to the generated CSV file

        Raises:
            ValueError: If the trajectory has no pieces
        """
        if not hybrid.pieces:
            raise ValueError("Cannot generate CSV for an empty hybrid trajectory")
        dim = max(p.trajectory.dim for p in hybrid.pieces)

        def write(handle):
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(self.trajectory_headers(dim, with_piece=True))
            for piece_id, piece in enumerate(hybrid.pieces):
                pad = dim - piece.trajectory.dim
                for row in self._rows(piece.trajectory, piece.start_time):
                    if pad:
                        # one block of n per jet level after the time column
                        blocks = [row[1 + b * piece.trajectory.dim:1 + (b + 1) * piece.trajectory.dim]
                                  for b in range(4)]
                        row = [row[0]] + [x for blk in blocks for x in blk + [""] * pad]
                    writer.writerow([piece_id, piece.vertex] + row)

        return atomic_write_text(self.output_dir / f"{filename}.csv", write)

    def generate_points(
        self,
        points,
        filename: str = "points",
        extra: Optional[dict] = None,
    ) -> Path:
        """
        Write a point set with columns x1, x2, ... and optional extra columns.

        Args:
            points: Array of shape (m, n)
            filename: Name without extension
            extra: Column name → length-m sequence appended after the coordinates

        Returns:
            Path to the generated CSV file
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        extra = extra or {}

        def write(handle):
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow([f"x{i}" for i in range(1, points.shape[1] + 1)] + list(extra))
            for idx, p in enumerate(points):
                writer.writerow([_fmt(x) for x in p] + [_fmt(col[idx]) for col in extra.values()])

        return atomic_write_text(self.output_dir / f"{filename}.csv", write)
