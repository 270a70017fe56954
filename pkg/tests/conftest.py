import functools

import pytest

from painleve_stokes.geometry import build_stokes_graph
from painleve_stokes.painleve_catalog import PainleveInstance, PainleveTag, rational_surface
from painleve_stokes.saddle_detector import detect_segments


@functools.lru_cache(maxsize=None)
def uplane_detection(tag: str, c: complex):
    inst = PainleveInstance(PainleveTag.parse(tag), {"c": c})
    graph = build_stokes_graph(rational_surface(inst).qd)
    return graph, detect_segments(graph)


@functools.lru_cache(maxsize=None)
def transform(tag: str, params: tuple, **kw):
    from painleve_stokes.transform_builder import build_transform

    inst = PainleveInstance(PainleveTag.parse(tag), dict(params))
    return build_transform(inst, **kw)


@pytest.fixture(scope="session")
def p2_graph():
    return uplane_detection("II", 1j)


@pytest.fixture(scope="session")
def d7_graph():
    return uplane_detection("D7", 1j)


ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
