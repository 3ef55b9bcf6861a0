"""Locations of the data files shipped with the package.

The bundle holds a compact taxonomy, three export/ontology fixture
pairs with gold mappings, a ready-made half agreement, a sweep grid,
and a three-peer scenario. These back the test suite and give the CLI
working defaults.
"""

from __future__ import annotations

from importlib.resources import files
from pathlib import Path


def data_dir() -> Path:
    return Path(str(files("semmatch").joinpath("data")))


def taxonomy_path() -> Path:
    return data_dir() / "taxonomy" / "mini.txt"


def fixture_dir(name: str) -> Path:
    return data_dir() / "fixtures" / name


def fixture_names() -> list[str]:
    root = data_dir() / "fixtures"
    return sorted(p.name for p in root.iterdir() if p.is_dir())


def scenario_path(name: str = "three_peer") -> Path:
    return data_dir() / "scenarios" / f"{name}.txt"


def grid_path(name: str = "default") -> Path:
    return data_dir() / "grids" / f"{name}.json"


def agreement_path(name: str) -> Path:
    return data_dir() / "agreements" / f"{name}.json"


def default_common_ontology_path() -> Path:
    return fixture_dir("po") / "co.json"
