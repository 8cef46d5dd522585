"""Shared fixtures: PEG codes are expensive, so session-scoped graphs are
built once and cached on disk between runs."""

import os

import pytest

from asymde.codes import DegreeDistribution, TannerGraph, build_encoder, peg_construct

CACHE_DIR = os.path.join(os.path.dirname(__file__), ".code_cache")


def _cached_graph(name: str, n: int, dv: int, dc: int, seed: int = 0) -> TannerGraph:
    os.makedirs(CACHE_DIR, exist_ok=True)
    path = os.path.join(CACHE_DIR, f"{name}.alist")
    if os.path.exists(path):
        return TannerGraph.load_alist(path)
    graph = peg_construct(n, DegreeDistribution.regular(dv, dc), seed=seed)
    graph.save_alist(path)
    return graph


@pytest.fixture(scope="session")
def code_3_6_small():
    """(3,6) PEG code, n=504."""
    return _cached_graph("peg_3_6_504", 504, 3, 6)


@pytest.fixture(scope="session")
def code_3_6_large():
    """(3,6) PEG code, n=10000 (shared by the acceptance simulations)."""
    return _cached_graph("peg_3_6_10000", 10000, 3, 6)


@pytest.fixture(scope="session")
def code_5_10_large():
    """(5,10) PEG code, n=10000."""
    return _cached_graph("peg_5_10_10000", 10000, 5, 10)


@pytest.fixture(scope="session")
def encoder_3_6_small(code_3_6_small):
    return build_encoder(code_3_6_small, cache_dir=CACHE_DIR)


@pytest.fixture(scope="session")
def encoder_3_6_large(code_3_6_large):
    return build_encoder(code_3_6_large, cache_dir=CACHE_DIR)


@pytest.fixture(scope="session")
def encoder_5_10_large(code_5_10_large):
    return build_encoder(code_5_10_large, cache_dir=CACHE_DIR)
