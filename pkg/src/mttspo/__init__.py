"""Moving-target TSP with obstacles: planner, tour search, baseline and tools."""

__version__ = "0.1.0"
