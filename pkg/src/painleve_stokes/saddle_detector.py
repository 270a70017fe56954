"""Certified saddle connections (segments) of a Stokes graph, ray adjacency at a
double turning point, and parameter scans for degenerate configurations."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import (INF, StokesGraph, TraceOptions,
                       TurningPoint, build_stokes_graph, emit_rays)
from .numeric_core import NumericError
from .painleve_catalog import PainleveInstance, PainleveTag, rational_surface
from .periods import sqrt_period


class CertificationFailed(NumericError):
    def __init__(self, segment, residual):
        super().__init__(f"period not real: residual {residual:.3e}")
        self.segment = segment
        self.residual = residual


class NotTwoSegments(NumericError):
    pass


@dataclass
class Segment:
    endpoints: tuple
    kind: str  # two_point | loop
    period: complex
    certified_residual: float
    enclosed_poles: list = field(default_factory=list)
    trajectory: int = -1
    points: np.ndarray | None = None
    windings: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        loc = lambda tp: [tp.location.real, tp.location.imag]
        return {"kind": self.kind, "from": loc(self.endpoints[0]), "to": loc(self.endpoints[1]),
                "endpoint_kinds": [self.endpoints[0].kind, self.endpoints[1].kind],
                "period": [self.period.real, self.period.imag],
                "certified_residual": self.certified_residual,
                "enclosed_poles": [[p.real, p.imag] for p in self.enclosed_poles],
                "trajectory": self.trajectory}


@dataclass
class NearMiss:
    trajectory: int
    target: complex
    residual: float


@dataclass
class Detection:
    segments: list
    near_degenerate: list

    def __iter__(self):
        return iter(self.segments)

    def __len__(self):
        return len(self.segments)


def winding_number(points: np.ndarray, p: complex) -> int:
    """Winding number of the closed polyline around p."""
    pts = np.asarray(points, dtype=complex)
    if abs(pts[0] - pts[-1]) > 1e-12 * max(1.0, abs(pts[0])):
        pts = np.append(pts, pts[0])
    ang = np.angle((pts[1:] - p) / (pts[:-1] - p))
    return int(round(ang.sum() / (2 * np.pi)))


def _tp_at(graph: StokesGraph, loc) -> TurningPoint:
    return min(graph.turning_points, key=lambda tp: abs(tp.location - loc))


def detect_segments(graph: StokesGraph, cert_tol: float = 1e-8) -> Detection:
    """Certify every connection of the graph by an independent period integral.

    The period is the integral of sqrt(q) along the traced polyline (pinning
    the homotopy class) with the branch of the trajectory's start; it must be
    real within cert_tol and have |Re| > 10 cert_tol.  Connections whose
    residual lies in (cert_tol, 1e-4] are returned as near-degenerate.
    """
    qd = graph.qd
    segs, near = [], []
    poles = [p for p, _ in qd.poles if p != INF]
    for i in graph.connections:
        tr = graph.trajectories[i]
        if hasattr(qd, "period"):
            period = qd.period(tr, 1e-13)
        else:
            period = sqrt_period(qd, tr.path(), tr.sqrt_branch_seed, tol=1e-13)
        scale = max(1.0, abs(period))
        res = abs(period.imag) / scale
        a, b = tr.source, _tp_at(graph, tr.end)
        windings = {}
        enclosed = []
        if a.location == b.location:
            windings = {p: winding_number(tr.points, p) for p in poles}
            enclosed = [p for p, w in windings.items() if w != 0]
        kind = "loop" if (a.location == b.location and enclosed) else "two_point"
        seg = Segment((a, b), kind, complex(period.real, period.imag), float(res), enclosed, i,
                      tr.points, windings)
        if res < cert_tol and abs(period.real) > 10 * cert_tol:
            segs.append(seg)
        elif res <= 1e-4:
            near.append(NearMiss(i, b.location, float(res)))
    for i, tr in enumerate(graph.trajectories):
        for nm in tr.terminus.get("near_misses", []):
            if nm["residual"] > cert_tol:
                near.append(NearMiss(i, nm["location"], float(nm["residual"])))
    key = lambda s: (round(s.endpoints[0].location.real, 9), round(s.endpoints[0].location.imag, 9),
                     round(s.endpoints[1].location.real, 9), round(s.endpoints[1].location.imag, 9),
                     round(s.period.real, 9))
    segs.sort(key=key)
    return Detection(segs, near)


# -------------------------------------------------------------- adjacency


@dataclass
class AdjacencyReport:
    double_tp: TurningPoint
    ray_angles: list
    termini: list  # label per ray in counter-clockwise order
    segment_rays: tuple
    segments_adjacent: bool
    orientation: str  # "A": second segment ray follows the first counter-clockwise

    def to_json(self) -> dict:
        return {"double_tp": self.double_tp.to_json(), "ray_angles": self.ray_angles,
                "termini": self.termini, "segment_rays": list(self.segment_rays),
                "segments_adjacent": self.segments_adjacent, "orientation": self.orientation}


def _label(tr) -> str:
    t = tr.terminus
    if t["kind"] == "turning_point":
        z = t["location"]
        return f"tp({z.real:.6g},{z.imag:.6g})"
    if t["kind"] == "singular_point":
        z = t["location"]
        return f"sing({z.real:.6g},{z.imag:.6g})"
    return t["kind"]


def adjacency_at_double(graph: StokesGraph, double_tp: TurningPoint | None = None,
                        first=None, first_ray: int | None = None) -> AdjacencyReport:
    """Cyclic order of the 4 rays at a double turning point and whether the two
    segment rays are neighbours.

    ``first`` (a location) selects which segment is gamma_1 for the
    orientation label, or ``first_ray`` (a ray index) when both segments end
    at the same point; default is the segment ray with the smaller index.
    """
    if double_tp is None:
        dbl = [tp for tp in graph.turning_points if tp.kind == "double"]
        if len(dbl) != 1:
            raise NotTwoSegments(f"expected one double turning point, found {len(dbl)}")
        double_tp = dbl[0]
    angles = emit_rays(double_tp, graph.qd)
    if len(angles) != 4:
        raise NotTwoSegments("a double turning point has 4 rays")
    rays = {tr.ray_index: tr for tr in graph.trajectories if tr.source.location == double_tp.location}
    order = sorted(range(4), key=lambda k: angles[k])
    termini = [_label(rays[k]) for k in order]
    seg_pos = [pos for pos, k in enumerate(order) if rays[k].ends_at_turning_point]
    if len(seg_pos) != 2:
        raise NotTwoSegments(f"{len(seg_pos)} segment rays at {double_tp.location}")
    if first_ray is not None:
        i1 = order.index(first_ray)
        if i1 not in seg_pos:
            raise NotTwoSegments(f"ray {first_ray} is not a segment ray")
        i2 = seg_pos[0] if i1 == seg_pos[1] else seg_pos[1]
    elif first is not None:
        i1 = min(seg_pos, key=lambda pos: abs(rays[order[pos]].end - first))
        i2 = seg_pos[0] if i1 == seg_pos[1] else seg_pos[1]
    else:
        i1, i2 = seg_pos
    adjacent = (i2 - i1) % 4 in (1, 3)
    orientation = "A" if (i2 - i1) % 4 == 1 else "B"
    return AdjacencyReport(double_tp, [float(angles[k]) for k in order], termini,
                           (order[i1], order[i2]), adjacent, orientation)


# -------------------------------------------------------------- scanning


@dataclass
class ScanRecord:
    value: complex
    count: int
    kinds: list
    periods: list
    near_degenerate: int
    error: str | None = None

    def to_json(self) -> str:
        return json.dumps({"value": [self.value.real, self.value.imag], "count": self.count,
                           "kinds": self.kinds,
                           "periods": [[p.real, p.imag] for p in self.periods],
                           "near_degenerate": self.near_degenerate, "error": self.error})


def scan_parameter(tag, param_name: str, grid, fixed: dict | None = None,
                   cert_tol: float = 1e-8, opts: TraceOptions | None = None,
                   t_window=None) -> list[ScanRecord]:
    """Segment counts of the P-Stokes geometry along a grid of one parameter.

    Tags with a rational lambda0-surface use its u-plane differential; the
    others trace F1 dt^2 on the t-plane (``t_window`` bounds the traced region).
    """
    tag = PainleveTag.parse(tag) if isinstance(tag, str) else tag
    out = []
    for v in grid:
        v = complex(v)
        try:
            params = dict(fixed or {})
            params[param_name] = v
            inst = PainleveInstance(tag, params)
            graph = p_stokes_graph(inst, opts, t_window)
            det = detect_segments(graph, cert_tol)
            out.append(ScanRecord(v, len(det.segments), [s.kind for s in det.segments],
                                  [s.period for s in det.segments], len(det.near_degenerate)))
        except (NumericError, ValueError, ZeroDivisionError) as exc:
            out.append(ScanRecord(v, -1, [], [], 0, f"{type(exc).__name__}: {exc}"))
    return out


def p_stokes_graph(inst: PainleveInstance, opts: TraceOptions | None = None, t_window=None) -> StokesGraph:
    try:
        surf = rational_surface(inst)
    except ValueError:
        from .geometry import tplane_stokes_graph
        return tplane_stokes_graph(inst, opts, t_window)
    return build_stokes_graph(surf.qd, opts)
