"""Bundled graph fixtures."""

from importlib import resources

from ..graph import Dag, loads_graph


def sachs_truth_text() -> str:
    return resources.files(__name__).joinpath("sachs_truth.json").read_text(encoding="utf-8")


def sachs_truth() -> tuple[list[str], Dag]:
    """Expert consensus signalling network for the Sachs et al. (2005) protein data."""
    return loads_graph(sachs_truth_text())
