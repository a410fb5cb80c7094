"""Shared fixtures.

Equilibrium solves are the expensive step (seconds each at solver
tolerance), so a session-wide memoized solver is shared by every test that
needs a floating height; repeated conditions are solved once per session.
"""

from concurrent.futures import ThreadPoolExecutor

import pytest

from casifp.equilibrium import cavity_equilibrium
from casifp.materials import default_materials
from casifp.stack import make_geometry


@pytest.fixture(scope="session")
def materials():
    return default_materials()


@pytest.fixture(scope="session")
def solve_equilibrium(materials):
    """Memoized (voltage, temperature, silica) -> EquilibriumPoint."""
    cache = {}

    def solver(voltage=0.0, temperature=300.0, silica=150e-9):
        key = (float(voltage), float(temperature), float(silica))
        if key not in cache:
            geometry = make_geometry(
                materials,
                voltage=key[0],
                temperature=key[1],
                silica_thickness=key[2],
            )
            cache[key] = cavity_equilibrium(geometry)
        return cache[key]

    return solver


@pytest.fixture(scope="session")
def thread_map():
    """Order-preserving concurrent map for sweep-style calls."""
    with ThreadPoolExecutor(max_workers=4) as pool:

        def map_fn(fn, items):
            return list(pool.map(fn, items))

        yield map_fn
