"""
JSON report generator.
Reports carry the seed and the resolved settings of the run.
"""
import json
import math
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from ..config.settings import Settings
from .csv_generator import atomic_write_text


def to_serializable(value: Any) -> Any:
    """Convert numpy values and non-finite floats into JSON-safe values."""
    if isinstance(value, dict):
        return {str(k): to_serializable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_serializable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_serializable(value.tolist())
    if isinstance(value, np.generic):
        return to_serializable(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


class JSONGenerator:
    """
    Generates JSON reports for solver runs.
    """

    def __init__(self, output_dir: str = "results", seed: Optional[int] = None,
                 settings: Optional[Settings] = None):
        """
        Initialize the JSON generator.

        Args:
            output_dir: Directory receiving the reports
            seed: Seed recorded in every report
            settings: Settings recorded in every report
        """
        self.output_dir = Path(output_dir)
        self.seed = seed
        self.settings = settings

    def generate(self, report: Dict, filename: str = "report") -> Path:
        """
        Write a report.

        Args:
            report: Report body
            filename: Name without extension

        Returns:
            Path to the generated JSON file
        """
        body = dict(report)
        body["seed"] = self.seed
        if self.settings is not None:
            body["settings"] = self.settings.to_dict()
        text = json.dumps(to_serializable(body), indent=2, sort_keys=True)
        return atomic_write_text(self.output_dir / f"{filename}.json", lambda h: h.write(text + "\n"))
