"""Shared fixtures: assembled complexes are expensive, so build each (p, gt)
pair once per session.  `elasticity_assembly.build_complex` already caches by
(p, faces) process-wide; the fixtures only give the builds a shared name."""

import pytest

from elacomplex import elasticity_assembly as ea

BOUNDARY_CONFIGS = ("none", "X0", "X0,X1", "all")


@pytest.fixture(scope="session")
def complexes_p4():
    return {gt: ea.build_complex(4, gt) for gt in BOUNDARY_CONFIGS}


@pytest.fixture(scope="session")
def complexes_p5():
    return {gt: ea.build_complex(5, gt) for gt in BOUNDARY_CONFIGS}
