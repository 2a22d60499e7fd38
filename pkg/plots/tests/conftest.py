"""Fixture trajectory CSVs for the plots tests.

The real multi-constraint CSV is produced by the simulation CLI so the tests
exercise the exact file contract; the plots package itself never imports the
simulation code.
"""
import pathlib

import pytest

CONFIG = (pathlib.Path(__file__).resolve().parents[2] / "configs"
          / "multi_constraint_adaptive.json")


@pytest.fixture(scope="session")
def adaptive_csv(tmp_path_factory):
    from geoatt.cli import main

    out = tmp_path_factory.mktemp("traj")
    code = main(["simulate", "--config", str(CONFIG), "--out", str(out),
                 "--duration", "0.3"])
    assert code == 0
    return out / "multi_constraint_adaptive.csv"
