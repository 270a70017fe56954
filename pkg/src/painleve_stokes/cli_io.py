"""Command-line interface, canonical JSON output and SVG rendering of Stokes graphs.

Exit codes: 0 success, 1 a verification check failed, 2 invalid arguments,
3 computation error (message on stderr).
"""
from __future__ import annotations

import argparse
import os
import json
import re
import sys
from dataclasses import dataclass, field

import numpy as np

from .geometry import INF, QuadraticDifferential, StokesGraph, TraceOptions, build_stokes_graph
from .numeric_core import NumericError
from .painleve_catalog import (PARAMS, PainleveInstance, PainleveTag, build_Q0,
                               lambda0_candidates, rational_surface)
from .saddle_detector import (adjacency_at_double, detect_segments, p_stokes_graph,
                              scan_parameter)

SIG = 12
_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(rf"^([+-]?{_NUM})([+-]{_NUM})i$")
_REAL_RE = re.compile(rf"^[+-]?{_NUM}$")


class UsageError(ValueError):
    pass


def parse_complex(s: str) -> complex:
    """`a+bi` with a mandatory sign before the imaginary part; plain reals allowed."""
    s = str(s).strip()
    m = _COMPLEX_RE.match(s)
    if m:
        return complex(float(m.group(1)), float(m.group(2)))
    if _REAL_RE.match(s):
        return complex(float(s), 0.0)
    raise UsageError(f"not a complex literal of the form a+bi: {s!r}")


def format_complex(z: complex) -> str:
    z = complex(z)
    re_, im = _num(z.real), _num(z.imag)
    sign = "-" if str(im).startswith("-") else "+"
    return f"{re_}{sign}{str(im).lstrip('-')}i"


def _num(x: float) -> float:
    x = float(x)
    if not np.isfinite(x):
        return x
    v = float(f"{x:.{SIG}g}")
    return 0.0 if v == 0 else v


def canonical(obj):
    """Round every float to 12 significant digits; complex becomes [re, im]."""
    if isinstance(obj, (complex, np.complexfloating)):
        return [_num(obj.real), _num(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [canonical(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(canonical(obj), allow_nan=True)


# ------------------------------------------------------------------ SVG


@dataclass
class RenderSpec:
    center: complex = 0j
    half_width: float = 2.0
    size_px: int = 600
    legend: bool = True
    stroke: dict = field(default_factory=lambda: {
        "trajectory": "#1f4e9a", "segment": "#c0392b", "turning_point": "#000000",
        "singular_point": "#000000"})

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("viewport half-width must be positive")

    @classmethod
    def fit(cls, graph_json: dict, margin: float = 1.6, **kw) -> "RenderSpec":
        pts = [complex(*tp["loc"]) for tp in graph_json["turning_points"]]
        pts += [complex(*s["loc"]) for s in graph_json["singular_points"] if s["loc"] != INF]
        if not pts:
            return cls(**kw)
        arr = np.array(pts)
        c = complex(_num(arr.real.mean()), _num(arr.imag.mean()))
        hw = margin * max(np.abs(arr - c).max(), 0.5)
        return cls(center=c, half_width=_num(hw), **kw)


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def render_svg(graph_json: dict, spec: RenderSpec | None = None) -> str:
    """Deterministic SVG of a graph JSON: trajectories thin, segments double weight,
    simple turning points x, double turning points filled dots, singular points hollow."""
    spec = spec or RenderSpec.fit(graph_json)
    n, hw, c = spec.size_px, spec.half_width, spec.center

    def xy(z):
        z = complex(*z) if isinstance(z, (list, tuple)) else complex(z)
        return ((z.real - c.real) / hw + 1) * n / 2, (1 - (z.imag - c.imag) / hw) * n / 2

    seg_idx = {s["trajectory"] for s in graph_json.get("segments", [])}
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{n}" height="{n}" '
           f'viewBox="0 0 {n} {n}">',
           f'<rect width="{n}" height="{n}" fill="white"/>',
           f'<clipPath id="v"><rect width="{n}" height="{n}"/></clipPath>',
           '<g clip-path="url(#v)" fill="none">']
    for i, tr in enumerate(graph_json["trajectories"]):
        pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in (xy(p) for p in tr["points"]))
        if i in seg_idx:
            out.append(f'<polyline class="segment" points="{pts}" '
                       f'stroke="{spec.stroke["segment"]}" stroke-width="3"/>')
        else:
            out.append(f'<polyline class="trajectory" points="{pts}" '
                       f'stroke="{spec.stroke["trajectory"]}" stroke-width="1.5"/>')
    out.append("</g>")
    r = 6
    for tp in graph_json["turning_points"]:
        x, y = xy(tp["loc"])
        col = spec.stroke["turning_point"]
        if tp["kind"] == "double":
            out.append(f'<circle class="turning_point double" cx="{_fmt(x)}" cy="{_fmt(y)}" '
                       f'r="{r}" fill="{col}"/>')
        else:
            out.append(f'<path class="turning_point {tp["kind"]}" d="M{_fmt(x - r)},{_fmt(y - r)}'
                       f'L{_fmt(x + r)},{_fmt(y + r)}M{_fmt(x - r)},{_fmt(y + r)}L{_fmt(x + r)},'
                       f'{_fmt(y - r)}" stroke="{col}" stroke-width="2"/>')
    for sp in graph_json["singular_points"]:
        if sp["loc"] == INF:
            continue
        x, y = xy(sp["loc"])
        out.append(f'<circle class="singular_point" cx="{_fmt(x)}" cy="{_fmt(y)}" r="{r}" '
                   f'fill="white" stroke="{spec.stroke["singular_point"]}" stroke-width="2"/>')
    if spec.legend:
        out.append(f'<text x="8" y="18" font-family="monospace" font-size="12">'
                   f'{_xml(graph_json.get("label", ""))} segments={len(seg_idx)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _xml(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


# ------------------------------------------------------------ graph payloads


def parse_tag(eq: str) -> PainleveTag:
    if not eq:
        raise UsageError("--eq is required")
    try:
        return PainleveTag.parse(eq)
    except ValueError as exc:
        raise UsageError(f"unknown equation {eq!r}") from exc


def instance_from_args(eq: str, params: list[str], cfg_params: dict | None = None) -> PainleveInstance:
    tag = parse_tag(eq)
    vals = {}
    for k, v in (cfg_params or {}).items():
        vals[k] = parse_complex(v) if isinstance(v, str) else complex(*v) if isinstance(v, list) else complex(v)
    for p in params or []:
        if "=" not in p:
            raise UsageError(f"--param expects name=value, got {p!r}")
        k, v = p.split("=", 1)
        vals[k.strip()] = parse_complex(v)
    missing = set(PARAMS[tag]) - set(vals)
    if missing:
        raise UsageError(f"{tag.label} needs parameters {sorted(PARAMS[tag])}")
    return PainleveInstance(tag, vals)


def graph_payload(graph: StokesGraph, cert_tol: float = 1e-8, extra: dict | None = None) -> dict:
    d = graph.to_json()
    det = detect_segments(graph, cert_tol)
    d["certified_segments"] = [s.to_json() for s in det.segments]
    d["near_degenerate"] = [{"trajectory": m.trajectory, "target": m.target, "residual": m.residual}
                            for m in det.near_degenerate]
    # only certified connections are drawn as segments
    keep = {s.trajectory for s in det.segments}
    d["segments"] = [s for s in d["segments"] if s["trajectory"] in keep]
    if extra:
        d.update(extra)
    return canonical(d)


def sl_graph(inst: PainleveInstance, t: complex, lam0: complex | None = None,
             opts: TraceOptions | None = None) -> tuple[StokesGraph, complex]:
    cands = lambda0_candidates(inst, t)
    lam = cands[0] if lam0 is None else min(cands, key=lambda z: abs(z - lam0))
    pot = build_Q0(inst, t, lam)
    qd = QuadraticDifferential.from_rational(pot.Q0, f"SL {inst.tag.label} t={format_complex(t)}")
    return build_stokes_graph(qd, opts), lam


# ------------------------------------------------------------ verify suites


def _rec(check: str, residual: float, tolerance: float, **info) -> dict:
    return {"check": check, "residual": float(residual), "tolerance": tolerance,
            "pass": bool(residual < tolerance), **info}


def suite_residues(tag: PainleveTag, seed: int = 0, draws: int = 3) -> list[dict]:
    """Residues of sqrt(Q0) at every listed pole, at random parameter/t draws."""
    from .periods import table5_check

    rng = np.random.default_rng(seed)
    out = []
    for _ in range(draws):
        params = {k: complex(*rng.uniform(0.3, 1.5, 2)) for k in PARAMS[tag]}
        inst = PainleveInstance(tag, params)
        t = complex(*rng.uniform(0.4, 1.6, 2))
        for ck in table5_check(inst, t):
            out.append(_rec(ck.check, ck.residual, ck.tolerance, got=ck.lhs, want=ck.rhs,
                            params=params, t=t))
    return out


def half_period_samples(inst: PainleveInstance, fractions=(0.1, 0.3, 0.5, 0.7, 0.9)):
    """(t, lam0, a(t), r, lam_r, sqrt F1, lam_path) at points of the first certified
    segment where the accumulated phase is the given fraction of the period."""
    from .periods import merging_turning_point
    from .transform_builder import certified_sides

    side = certified_sides(inst)[0]
    surf, nodes, psi = side.surf, side.fwd.nodes, side.fwd.psi
    r_u = nodes[0]
    out = []
    for f in fractions:
        j = int(np.argmin(np.abs(psi.real - f * side.period)))
        u = complex(nodes[j])
        lam_path = np.asarray(surf.lam_of(nodes[:j + 1]), dtype=complex)
        ts = np.asarray(surf.t_of(nodes[:j + 1]), dtype=complex)
        a = merging_turning_point(inst, ts, lam_path)[-1]
        out.append((complex(surf.t_of(u)), complex(surf.lam_of(u)), a, complex(surf.t_of(r_u)),
                    complex(surf.lam_of(r_u)), complex(side.sqrt_F1(u)), lam_path))
    return out


def suite_half_period(tag: PainleveTag, inst: PainleveInstance | None = None) -> list[dict]:
    from .periods import half_period_check

    out = []
    if tag is PainleveTag.I:
        inst = PainleveInstance(tag, {})
        for t in (-6, -1 + 2j, 3 + 1j, -0.5 - 0.5j, 2j):
            lam0 = lambda0_candidates(inst, t)[0]
            ck = half_period_check(inst, t, lam0, -2 * lam0, 0j, 0j)
            out.append(_rec(f"half-period P_I t={format_complex(t)}", ck.residual, 1e-6,
                            lhs=ck.lhs, rhs=ck.rhs))
        return out
    inst = inst or PainleveInstance(tag, {"c": 1j})
    for t, lam0, a, r, lam_r, s, lp in half_period_samples(inst):
        ck = half_period_check(inst, t, lam0, a, r, lam_r, s, lam_path=lp)
        out.append(_rec(f"half-period {tag.label} t={format_complex(t)}", ck.residual, 1e-6,
                        lhs=ck.lhs, rhs=ck.rhs))
    return out


def suite_segment_sum(inst: PainleveInstance) -> list[dict]:
    """Each certified segment's period against +-2 pi i c."""
    from .periods import segment_phase_identity

    graph = p_stokes_graph(inst)
    det = detect_segments(graph)
    out = []
    c = inst.p("c")
    # segments ending at a simple-pole-type point carry half the period; excluded
    for s in det.segments:
        if not all(e.kind == "simple" for e in s.endpoints):
            continue
        ck = segment_phase_identity(s.period, c, 1e-7)
        out.append(_rec(f"segment period {inst.tag.label} {s.kind}", ck.residual, ck.tolerance,
                        period=s.period, target=ck.rhs))
    if not out:
        out.append(_rec(f"segment period {inst.tag.label}: no certified segment", np.inf, 1e-7))
        return out
    ck = segment_sum_at_mid(inst)
    out.append(_rec(f"segment sum {inst.tag.label} SL vs P", ck.residual, ck.tolerance,
                    lhs=ck.lhs, rhs=ck.rhs))
    return out


def segment_sum_at_mid(inst: PainleveInstance):
    """int_{a1}^{a2} sqrt(Q0) against half the P-integral between the segment ends,
    at the midpoint of the first certified segment."""
    from .periods import segment_sum_identity
    from .transform_builder import SLSide, certified_sides

    side = certified_sides(inst)[0]
    surf, n = side.surf, side.fwd.nodes
    j = side.mid_node()
    u = complex(n[j])
    sl = SLSide(inst, complex(surf.t_of(u)), complex(surf.lam_of(u)), side.sqrt_F1(u))
    sl.identify({1: side.phi(1, u)[0], 2: side.phi(2, u)[0]})
    lp1 = np.asarray(surf.lam_of(n[:j + 1]), dtype=complex)
    lp2 = np.asarray(surf.lam_of(n[j:][::-1]), dtype=complex)
    r1, r2 = n[0], n[-1]
    return segment_sum_identity(inst, sl.t, sl.lam0, sl.gammas[1].points, sl.gammas[2].points,
                                complex(surf.t_of(r1)), complex(surf.lam_of(r1)),
                                complex(surf.t_of(r2)), complex(surf.lam_of(r2)),
                                sl.sqrt_F1, lp1, lp2)


AIRY_CLOSED_FORMS = {
    # grade -> (coef, power) with S_odd at that grade equal to coef * x^power;
    # sympy-derived from S' + S^2 = eta^2 x (tests/test_wkb_riccati.py)
    -2: (1.0, 0.5),
    2: (-5 / 32, -2.5),
    6: (-1105 / 2048, -5.5),
}


def suite_riccati(grades: int = 6, seed: int = 0) -> list[dict]:
    from .wkb_riccati import (GradedPotential, odd_part, predicted_slope, richardson_slope,
                              sodd_residue, wkb_pair)

    out = []
    # Airy: odd part is b(x) sqrt(x) with a = 0; compare both ring components
    pot = GradedPotential.airy()
    sp, sm = wkb_pair(pot, grades)
    so = odd_part(sp, sm)
    xs = np.array([0.7 + 0.2j, 1.3 - 0.4j, 2.1 + 1.1j, -1.5 + 0.5j])
    for g in range(-2, min(grades, 6) + 1):
        coef, pw = AIRY_CLOSED_FORMS.get(g, (0.0, 0.5))
        e = so[g]
        want_b = coef * xs ** (pw - 0.5)
        res = max(float(np.max(np.abs(e.a(xs)))), float(np.max(np.abs(e.b(xs) - want_b))))
        out.append(_rec(f"airy S_odd grade {g}", res, 1e-10))
    # residues at the even-order pole
    rng = np.random.default_rng(seed)
    from .painleve_catalog import PainleveInstance as PI

    c = 1j
    II = PI(PainleveTag.II, {"c": c})
    t = complex(*rng.uniform(0.3, 1.0, 2))
    cases = [("weber", GradedPotential.weber(c), 1j * c),
             ("Q_II0", GradedPotential.from_instance(II, t, lambda0_candidates(II, t)[0]), c)]
    for name, gp, lead in cases:
        sp, sm = wkb_pair(gp, grades)
        res = sodd_residue(odd_part(sp, sm), INF)
        for g, r in res:
            if g == -2:
                out.append(_rec(f"{name} residue grade {g}", min(abs(r - lead), abs(r + lead)), 1e-10,
                                got=r, want=lead))
            elif g >= 0:
                out.append(_rec(f"{name} residue grade {g}", abs(r), 1e-10, got=r))
    # truncation slopes
    sp, _ = wkb_pair(pot, grades)
    for N in (1, 3, 5):
        rep = richardson_slope(pot, sp, N, xs)
        out.append(_rec(f"airy richardson N={N}", abs(rep.slope - rep.predicted), 0.3,
                        slope=rep.slope, predicted=predicted_slope(N)))
    return out


def suite_transform_identity(tag: PainleveTag) -> list[dict]:
    from .transform_builder import build_transform

    inst = PainleveInstance(tag, {"c": 1j})
    top = build_transform(inst)
    ch = top.checks()
    out = [_rec("t0 identity", max(abs(a.t0 - a.t_src) for a in top.t0_anchors), 1e-8),
           _rec("x0 identity", top.x0_report.identity_residual, 1e-8)]
    if "monodromy_defect" in ch:
        out.append(_rec("loop monodromy defect", ch["monodromy_defect"], 1e-9))
        neg = build_transform(inst, target_c=1.1j, check_k=False)
        out.append({"check": "perturbed-c monodromy defect", "residual": neg.monodromy,
                    "tolerance": 1e-3, "pass": bool(neg.monodromy > 1e-3)})
    return out


NONTRIVIAL_SOURCE = {"tag": "III_D6", "params": {"c0": 0.5j, "c_inf": 1j}, "segment": 1}


def transform_invariant_records(top, label: str) -> list[dict]:
    from .transform_builder import verify_nonvanishing_jacobians

    ch = top.checks()
    nv = verify_nonvanishing_jacobians(top)
    return [_rec(f"{label} phase correspondence", ch["phase_correspondence"], 1e-7),
            _rec(f"{label} dt0/dt identity", ch["dt0_dt"], 1e-6),
            _rec(f"{label} turning-point correspondence", ch["turning_point_correspondence"], 1e-6),
            _rec(f"{label} jacobian identity", ch["jacobian_identity"], 1e-5),
            {"check": f"{label} nonvanishing dt0", "residual": nv["min_dt0"],
             "tolerance": 1e-4 * ch["max_dt0"], "pass": bool(nv["dt0_pass"])},
            {"check": f"{label} nonvanishing dx0", "residual": nv["min_dx0"],
             "tolerance": 1e-4 * ch["max_dx0"], "pass": bool(nv["dx0_pass"])}]


def suite_transform_cross() -> list[dict]:
    from .transform_builder import build_transform

    src = NONTRIVIAL_SOURCE
    inst = PainleveInstance(PainleveTag.parse(src["tag"]), src["params"])
    out = transform_invariant_records(build_transform(inst, src_index=src["segment"]), "D6->II")
    II = PainleveInstance(PainleveTag.II, {"c": 2j})
    out += transform_invariant_records(build_transform(II, tgt_index=1), "II(2i)->II rotated")
    return out


SUITES = ("residues", "half-period", "segment-sum", "riccati", "transform-identity", "transform-cross")


# ------------------------------------------------------------------ commands


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _graph_for(args):
    inst = instance_from_args(args.eq, args.param, getattr(args, "params", None))
    if args.sl:
        if args.t is None:
            raise UsageError("--sl needs --t")
        t = parse_complex(args.t)
        lam0 = parse_complex(args.lam0) if args.lam0 else None
        g, lam = sl_graph(inst, t, lam0)
        return inst, g, {"instance": inst.to_json(), "plane": "SL", "t": t, "lambda0": lam}
    if args.uplane:
        surf = rational_surface(inst)
        g = build_stokes_graph(surf.qd)
        return inst, g, {"instance": inst.to_json(), "plane": "u"}
    return inst, p_stokes_graph(inst), {"instance": inst.to_json(), "plane": "t"}


def cmd_graph(args) -> int:
    _, g, extra = _graph_for(args)
    payload = graph_payload(g, args.tol or 1e-8, extra)
    _emit(args, dumps(payload))
    if args.svg:
        with open(args.svg, "w") as fh:
            fh.write(render_svg(payload))
    return 0


def cmd_render(args) -> int:
    with open(args.graph_json) as fh:
        payload = json.load(fh)
    svg = render_svg(payload)
    if args.svg:
        with open(args.svg, "w") as fh:
            fh.write(svg)
    else:
        sys.stdout.write(svg)
    return 0


def cmd_segments(args) -> int:
    _, g, extra = _graph_for(args)
    payload = graph_payload(g, args.tol or 1e-8, extra)
    lines = [dumps(s) for s in payload["certified_segments"]]
    _emit(args, "\n".join(lines) if lines else "")
    if args.sl:
        try:
            rep = adjacency_at_double(g)
            sys.stdout.write(dumps({"adjacency": rep.to_json()}) + "\n")
        except NumericError:
            pass
    return 0


def cmd_scan(args) -> int:
    tag = parse_tag(args.eq)
    try:
        a, b, n = args.line.split(":")
        a, b, n = parse_complex(a), parse_complex(b), int(n)
    except ValueError as exc:
        raise UsageError(f"--line expects a:b:n, got {args.line!r}") from exc
    if n < 1:
        raise UsageError("--line needs n >= 1")
    fixed = {}
    for p in args.fixed or []:
        k, v = p.split("=", 1)
        fixed[k] = parse_complex(v)
    recs = scan_parameter(tag, args.param, np.linspace(a, b, n), fixed, args.tol or 1e-8)
    _emit(args, "\n".join(dumps(json.loads(r.to_json())) for r in recs))
    return 0


def cmd_period(args) -> int:
    from .periods import segment_phase_identity

    inst = instance_from_args(args.eq, args.param)
    det = detect_segments(p_stokes_graph(inst), args.tol or 1e-8)
    lines = []
    for s in det.segments:
        rec = {"kind": s.kind, "period": s.period, "certified_residual": s.certified_residual}
        if "c" in inst.params:
            ck = segment_phase_identity(s.period, inst.p("c"))
            rec.update({"target": ck.rhs, "residual": ck.residual})
        lines.append(dumps(rec))
    _emit(args, "\n".join(lines))
    return 0


def cmd_residue(args) -> int:
    from .periods import table5_check

    inst = instance_from_args(args.eq, args.param)
    t = parse_complex(args.t) if args.t else 0.7 + 0.4j
    lam0 = parse_complex(args.lam0) if args.lam0 else None
    if lam0 is not None:
        lam0 = min(lambda0_candidates(inst, t), key=lambda z: abs(z - lam0))
    checks = table5_check(inst, t, lam0)
    _emit(args, "\n".join(dumps(json.loads(ck.to_json())) for ck in checks))
    return 0 if all(ck.passed for ck in checks) else 1


def cmd_verify(args) -> int:
    s = args.suite
    tag = parse_tag(args.eq) if args.eq else None
    if s == "residues":
        tags = [tag] if tag else [PainleveTag.II, PainleveTag.III_D6, PainleveTag.III_D7,
                                  PainleveTag.IV, PainleveTag.V, PainleveTag.VI]
        recs = [r for tg in tags for r in suite_residues(tg, args.seed)]
    elif s == "half-period":
        recs = []
        for tg in ([tag] if tag else [PainleveTag.I, PainleveTag.II]):
            inst = instance_from_args(tg.value, args.param) if (args.param and tg is not PainleveTag.I) else None
            recs += suite_half_period(tg, inst)
    elif s == "segment-sum":
        insts = ([instance_from_args(args.eq, args.param)] if tag else
                 [PainleveInstance(tg, {"c": c}) for tg in (PainleveTag.II, PainleveTag.III_D7)
                  for c in (0.5j, 1j, 2j)])
        recs = [r for i in insts for r in suite_segment_sum(i)]
    elif s == "riccati":
        recs = suite_riccati(args.grades, args.seed)
    elif s == "transform-identity":
        recs = [r for tg in ([tag] if tag else [PainleveTag.II, PainleveTag.III_D7])
                for r in suite_transform_identity(tg)]
    else:
        recs = suite_transform_cross()
    _emit(args, "\n".join(dumps(r) for r in recs))
    return 0 if all(r["pass"] for r in recs) else 1


def cmd_wkb(args) -> int:
    from .wkb_riccati import GradedPotential, odd_part, sodd_residue, wkb_pair

    c = parse_complex(args.c) if args.c else 1j
    if args.potential == "airy":
        pot = GradedPotential.airy()
    elif args.potential == "weber":
        pot = GradedPotential.weber(c)
    elif args.potential == "bessel":
        pot = GradedPotential.bessel(c, regular=args.regular)
    else:
        inst = instance_from_args(args.eq, args.param)
        t = parse_complex(args.t) if args.t else 0.7 + 0.3j
        pot = GradedPotential.from_instance(inst, t, lambda0_candidates(inst, t)[0])
    sp, sm = wkb_pair(pot, args.grades)
    so = odd_part(sp, sm)
    out = {"potential": pot.label, "series": sp.to_json()}
    if args.residue_at:
        p = INF if args.residue_at in ("inf", "infinity") else parse_complex(args.residue_at)
        out["residues"] = [{"grade": g, "eta_power": -g / 2, "residue": r}
                           for g, r in sodd_residue(so, p)]
    _emit(args, dumps(out))
    return 0


def cmd_transform(args) -> int:
    from .transform_builder import build_transform

    inst = instance_from_args(args.source, args.param)
    target_c = None
    if args.to not in ("self", "canonical"):
        target_c = parse_complex(args.to)
    t_star = parse_complex(args.t_star) if args.t_star else None
    top = build_transform(inst, src_index=args.segment, target_c=target_c,
                          check_k=target_c is None, t_star=t_star,
                          monodromy=True if args.monodromy else None)
    _emit(args, dumps(top.to_json()))
    return 0


# ------------------------------------------------------------------ parser


def _common(p):
    p.add_argument("--tol", type=float, default=None, help="certification tolerance")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true", help="JSON output (the default)")
    p.add_argument("--svg", default=None, help="also write an SVG rendering here")
    p.add_argument("--config", default=None, help="JSON file of defaults; CLI flags override")


# options required after the config file is merged (argparse would check too early)
REQUIRED = {"graph": ["eq"], "segments": ["eq"], "scan": ["eq", "param", "line"],
            "period": ["eq"], "residue": ["eq"], "wkb": ["potential"], "transform": ["source"]}


def _instance_args(p):
    p.add_argument("--eq", default=None, help="tag, e.g. P_II, P_III_D7")
    p.add_argument("--param", action="append", default=[], help="name=a+bi (repeatable)")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    ap = argparse.ArgumentParser(prog="painleve-stokes", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    subs = {}

    def add(name, fn, **kw):
        p = sub.add_parser(name, **kw)
        _common(p)
        p.set_defaults(func=fn)
        subs[name] = p
        return p

    for name, fn in (("graph", cmd_graph), ("segments", cmd_segments)):
        p = add(name, fn, help=f"P-Stokes or SL Stokes {name}")
        _instance_args(p)
        p.add_argument("--uplane", action="store_true", help="trace on the rational lambda0-surface")
        p.add_argument("--sl", action="store_true", help="Stokes graph of the SL potential at --t")
        p.add_argument("--t", default=None)
        p.add_argument("--lam0", default=None, help="lambda0 branch nearest this value")
    p = add("render", cmd_render, help="re-render a graph JSON as SVG")
    p.add_argument("graph_json")
    p = add("scan", cmd_scan, help="segment counts along a parameter line")
    p.add_argument("--eq")
    p.add_argument("--param", help="name of the scanned parameter")
    p.add_argument("--line", help="a:b:n")
    p.add_argument("--fixed", action="append", default=[], help="other parameters name=a+bi")
    p = add("period", cmd_period, help="certified segment periods")
    _instance_args(p)
    p = add("residue", cmd_residue, help="residues of sqrt(Q0) at the listed poles")
    _instance_args(p)
    p.add_argument("--t", default=None)
    p.add_argument("--lam0", default=None)
    p = add("verify", cmd_verify, help="run an identity suite")
    p.add_argument("suite", choices=SUITES)
    _instance_args(p)
    p.add_argument("--grades", type=int, default=6)
    p = add("wkb", cmd_wkb, help="Riccati coefficients and S_odd residues")
    p.add_argument("--potential", choices=("airy", "weber", "bessel", "instance"))
    p.add_argument("--c", default=None)
    p.add_argument("--regular", action="store_true", help="bessel: add the regularizing eta^-2 term")
    _instance_args(p)
    p.add_argument("--t", default=None)
    p.add_argument("--grades", type=int, default=6)
    p.add_argument("--residue-at", default=None, help="pole (a+bi) or inf")
    p = add("transform", cmd_transform, help="top-order transformation to the canonical target")
    p.add_argument("--from", dest="source")
    p.add_argument("--param", action="append", default=[])
    p.add_argument("--to", default="canonical", help="self, canonical, or a target c (a+bi)")
    p.add_argument("--t-star", default=None)
    p.add_argument("--segment", type=int, default=0)
    p.add_argument("--monodromy", action="store_true")
    return ap, subs


def parse_args(argv=None):
    ap, subs = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            ap.error(f"cannot read config: {exc}")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        params = cfg.pop("params", None)
        subs[args.command].set_defaults(**cfg)
        args = ap.parse_args(argv)
        if params is not None:
            args.params = params
    missing = [d for d in REQUIRED.get(args.command, []) if getattr(args, d, None) in (None, [])]
    if missing:
        subs[args.command].error("missing required options: "
                                 + ", ".join("--" + m.replace("_", "-") for m in missing))
    return ap, args


def main(argv=None) -> int:
    ap, args = parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        ap.print_usage(sys.stderr)
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (NumericError, ZeroDivisionError, ValueError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"computation error: {type(exc).__name__}: {exc}\n")
        return 3
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head); silence the flush at exit
        sys.stdout = open(os.devnull, "w")
        return 0


if __name__ == "__main__":
    sys.exit(main())
