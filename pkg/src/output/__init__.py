"""
Output module for the trajectory planner.
Handles generation of CSV trajectories and JSON reports.
"""
from .csv_generator import CSVGenerator
from .json_generator import JSONGenerator

__all__ = ["CSVGenerator", "JSONGenerator"]
