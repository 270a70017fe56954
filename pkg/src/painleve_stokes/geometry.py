"""Turning points and horizontal trajectories of rational quadratic differentials.

A trajectory leaving a turning point a is the curve Im zeta = 0 with
zeta(z) = int_a^z sqrt(q) dz.  It is followed by stepping along
dz/dl = conj(sqrt q)/|sqrt q| and re-projecting onto Im zeta = 0 after every
step with a transverse Newton correction.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .numeric_core import (GK_NODES, GK_WEIGHTS, ComplexPath, Line,
                           NumericError, RationalFunction, SqrtIntegrand,
                           continue_signs, path_integral)

INF = "infinity"


class RootFindingFailed(NumericError):
    pass


class StepCollapse(NumericError):
    pass


@dataclass
class QuadraticDifferential:
    """q(z) dz^2 with q rational; zeros/poles carry orders (poles positive)."""

    q: RationalFunction
    zeros: list = field(default_factory=list)
    poles: list = field(default_factory=list)
    label: str = ""
    p_simple: set = field(default_factory=set)  # zero locations known to be P-simple

    @classmethod
    def from_rational(cls, q: RationalFunction, label: str = "") -> "QuadraticDifferential":
        try:
            zeros = [(complex(z), m) for z, m in q.root_list()]
        except NumericError as exc:
            raise RootFindingFailed(str(exc)) from exc
        poles = [(complex(p), m) for p, m in q.poles]
        inf_order = 4 - q.order_at_infinity()
        if inf_order > 0:
            poles.append((INF, inf_order))
        return cls(q, zeros, poles, label)

    def __call__(self, z):
        return self.q(z)

    def integrand(self) -> SqrtIntegrand:
        return SqrtIntegrand(self.q)

    @property
    def finite_features(self) -> list[tuple[complex, int]]:
        """(location, signed order) for finite zeros (+) and poles (-)."""
        out = [(z, m) for z, m in self.zeros]
        out += [(p, -m) for p, m in self.poles if p != INF]
        return out

    @property
    def infinity_is_pole(self) -> bool:
        return any(p == INF for p, _ in self.poles)

    def local_coefficient(self, a: complex, order: int) -> complex:
        """q_m with q ~ q_m (z - a)^m near a (m may be negative)."""
        k0, c = self.q.laurent(a, order - self.q.laurent(a, 1)[0] + 2)
        return complex(c[order - k0])

    def feature_distance(self, z) -> float:
        return min((abs(z - p) for p, _ in self.finite_features), default=np.inf)

    def min_feature_separation(self) -> float:
        pts = [p for p, _ in self.finite_features]
        d = [abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1:]]
        return min(d) if d else 1.0

    # -- continuation protocol used by the tracer.  The state is the last
    # accepted value of sqrt(q); the t-plane differential carries lambda too.
    @staticmethod
    def sval(state) -> complex:
        return state

    def step_state(self, z, state):
        s = cmath.sqrt(complex(self.q(z)))
        return s if (s * state.conjugate()).real >= 0 else -s

    def chord(self, z0, z1, state):
        """int_{z0}^{z1} sqrt(q) on the chord (15-point Kronrod) and the end state."""
        half = 0.5 * (z1 - z0)
        zs = z0 + half * (GK_NODES + 1)
        vals = continue_signs(np.sqrt(self.q(zs).astype(complex)), state)
        return half * np.dot(GK_WEIGHTS, vals), complex(vals[-1])

    def integral_to(self, z, state, tp: "TurningPoint", tol: float) -> complex:
        """int_z^{tp} sqrt(q), continued from state at z."""
        return path_integral(self.integrand(), ComplexPath((Line(z, tp.location, end_power=2),)),
                             tol, seed=state)

    def ray_starts(self, tp: "TurningPoint", rho: float) -> list:
        """(angle, z, state) for each ray, at distance rho from tp."""
        out = []
        for th in emit_rays(tp, self):
            e = cmath.exp(1j * th)
            z = tp.location + rho * e
            s = cmath.sqrt(complex(self.q(z)))
            out.append((th, z, s if (s * e).real >= 0 else -s))
        return out

    def on_sheet(self, tp: "TurningPoint", z, state) -> bool:
        return True

    def stop_points(self) -> list:
        """Finite points where trajectories end as 'singular_point'."""
        return [p for p, m in self.poles if p != INF and m >= 2]


@dataclass(frozen=True)
class TurningPoint:
    location: complex
    order: int  # zero order, or -1 for a simple pole
    kind: str  # simple | double | higher | simple_pole_type
    sheet: complex | None = None  # lambda0 value, for t-plane turning points

    def to_json(self):
        d = {"loc": [self.location.real, self.location.imag], "order": self.order, "kind": self.kind}
        if self.sheet is not None:
            d["lambda"] = [self.sheet.real, self.sheet.imag]
        return d


def classify_turning_points(qd: QuadraticDifferential) -> list[TurningPoint]:
    if hasattr(qd, "turning_points"):
        return qd.turning_points()
    out = []
    for z, m in qd.zeros:
        if m == 1 or any(abs(z - s) < 1e-8 * max(1, abs(z)) for s in qd.p_simple):
            kind = "simple"
        elif m == 2:
            kind = "double"
        else:
            kind = "higher"
        out.append(TurningPoint(complex(z), int(m), kind))
    for p, m in qd.poles:
        if p != INF and m == 1:
            out.append(TurningPoint(complex(p), -1, "simple_pole_type"))
    out.sort(key=lambda tp: (round(tp.location.real, 10), round(tp.location.imag, 10)))
    return out


def emit_rays(tp: TurningPoint, qd: QuadraticDifferential) -> list[float]:
    """Initial angles of the horizontal trajectories leaving tp.

    With q ~ q_m (z - a)^m, zeta ~ 2 sqrt(q_m) (z-a)^((m+2)/2) / (m+2) is real
    along theta_k = (2 pi k - arg q_m) / (m + 2).
    """
    if hasattr(qd, "ray_angles"):
        return qd.ray_angles(tp)
    m = tp.order
    qm = qd.local_coefficient(tp.location, m)
    n = m + 2
    base = -cmath.phase(qm) / n
    return [float((base + 2 * np.pi * k / n) % (2 * np.pi)) for k in range(n)]


@dataclass
class TraceOptions:
    max_zeta_length: float = 1e8
    phase_tol: float = 1e-7
    stop_radius: float | None = None  # default 1e-4 * min feature separation
    capture_tol: float = 1e-6
    max_steps: int = 20000
    step_fraction: float = 0.08
    start_fraction: float = 1e-3
    escape_radius: float | None = None


@dataclass
class Trajectory:
    points: np.ndarray
    source: TurningPoint
    ray_index: int
    terminus: dict
    sqrt_branch_seed: complex
    arclength_in_zeta: float
    max_phase_drift: float = 0.0
    states: list | None = None  # continuation state at points[1:-1]; not serialized

    @property
    def ends_at_turning_point(self) -> bool:
        return self.terminus["kind"] == "turning_point"

    @property
    def end(self):
        return self.terminus.get("location")

    def path(self) -> ComplexPath:
        sp = 2 if self.source.order != 0 else 1
        ep = 2 if self.ends_at_turning_point else 1
        return ComplexPath.polyline(self.points, singular_start=sp, singular_end=ep)

    def to_json(self):
        c = lambda z: [z.real, z.imag] if isinstance(z, complex) else z
        term = {k: c(v) for k, v in self.terminus.items()}
        if "near_misses" in term:
            term["near_misses"] = [{"location": c(m["location"]), "residual": m["residual"]}
                                   for m in term["near_misses"]]
        return {"points": [[p.real, p.imag] for p in self.points],
                "source": self.source.to_json(), "ray": self.ray_index,
                "terminus": term, "zeta_length": self.arclength_in_zeta}


def trace(qd, tp: TurningPoint, ray_index: int,
          opts: TraceOptions | None = None, turning_points=None) -> Trajectory:
    opts = opts or TraceOptions()
    tps = turning_points if turning_points is not None else classify_turning_points(qd)
    a = tp.location
    feats = qd.finite_features
    sep = qd.min_feature_separation()
    stop_radius = opts.stop_radius or 1e-4 * sep
    maxabs = max((abs(p) for p, _ in feats), default=0.0)
    escape = opts.escape_radius or 10 * (maxabs + 1)
    d_src = min((abs(a - p) for p, _ in feats if p != a), default=1.0)
    rho = opts.start_fraction * d_src
    starts = qd.ray_starts(tp, rho)
    if not 0 <= ray_index < len(starts):
        raise IndexError("ray_index out of range")
    _, z, st = starts[ray_index]

    # project the start point onto Im zeta = 0
    for _ in range(4):
        zeta = -qd.integral_to(z, st, tp, 1e-12 * abs(qd.sval(st)) * rho)
        z = z - 1j * zeta.imag / qd.sval(st)
        st = qd.step_state(z, st)
    zeta = -qd.integral_to(z, st, tp, 1e-12 * abs(qd.sval(st)) * rho)
    seed = qd.sval(st)
    pts = [a, z]
    states = [st]
    zeta_re = zeta.real
    drift = abs(zeta.imag)
    left_source = False
    cap_radius = {t: 0.3 * min((abs(t.location - p) for p, _ in feats if p != t.location), default=1.0)
                  for t in tps}
    stops = qd.stop_points()
    captured, cap_res = None, 0.0
    terminus = None
    near_misses: list = []

    for _step in range(opts.max_steps):
        d = qd.feature_distance(z)
        if captured is not None:
            dist_b = abs(z - captured.location)
            if dist_b <= max(0.02 * cap_radius[captured], stop_radius):
                tail = qd.integral_to(z, st, captured, 1e-13 * max(1.0, abs(zeta_re)))
                pts.append(captured.location)
                zeta_re += tail.real
                drift = max(drift, abs(tail.imag))
                terminus = {"kind": "turning_point", "location": captured.location, "period": zeta_re,
                            "capture_residual": cap_res}
                if captured.sheet is not None:
                    terminus["sheet"] = captured.sheet
                break
        h = opts.step_fraction * d
        if captured is not None:
            h = min(h, 0.5 * abs(z - captured.location))
        try:
            z_new, st_new = _rk4(qd, z, st, h)
        except ZeroDivisionError:
            raise StepCollapse(f"direction undefined at {z}")
        # transverse correction onto Im zeta = 0
        for _ in range(3):
            dz, st_end = qd.chord(z, z_new, st)
            err = zeta_re + dz
            if abs(err.imag) <= 1e-15 * max(1.0, abs(err)):
                break
            z_new = z_new - 1j * err.imag / qd.sval(st_end)
        dz, st_end = qd.chord(z, z_new, st)
        if dz.real <= 0:
            raise StepCollapse(f"trajectory reversed near {z}")
        drift = max(drift, abs((zeta_re + dz).imag))
        zeta_re += dz.real
        z, st = z_new, qd.step_state(z_new, st_end)
        pts.append(z)
        states.append(st)

        if not left_source and abs(z - a) > cap_radius.get(tp, d_src):
            left_source = True
        if captured is None:
            # among turning points in reach, the smallest phase residual wins
            best = None
            for t in tps:
                b = t.location
                if t == tp and not left_source:
                    continue
                if abs(z - b) < cap_radius[t] and qd.on_sheet(t, z, st):
                    try:
                        tail = qd.integral_to(z, st, t, 1e-13 * max(1.0, abs(zeta_re)))
                    except NumericError:
                        continue
                    total = zeta_re + tail
                    res = abs(total.imag) / max(1.0, abs(total))
                    if tail.real > 0 and res <= opts.capture_tol and (best is None or res < best[1]):
                        best = (t, res)
                    elif tail.real > 0 and res <= 1e-4:
                        near_misses.append({"location": b, "residual": res})
            if best is not None:
                captured, cap_res = best
        for p in stops:
            if abs(z - p) < stop_radius:
                terminus = {"kind": "singular_point", "location": complex(p)}
        if terminus:
            break
        if abs(z) > escape and qd.infinity_is_pole:
            terminus = {"kind": "escaped", "location": INF}
            break
        if zeta_re > opts.max_zeta_length:
            terminus = {"kind": "max_length"}
            break
    if terminus is None:
        terminus = {"kind": "max_length"}
    if near_misses:
        terminus["near_misses"] = near_misses
    return Trajectory(np.array(pts), tp, ray_index, terminus, seed, float(zeta_re), drift, states)


def _direction(qd, z, st):
    st = qd.step_state(z, st)
    s = qd.sval(st)
    if s == 0:
        raise ZeroDivisionError
    return s.conjugate() / abs(s), st


def _rk4(qd, z, st, h):
    k1, s1 = _direction(qd, z, st)
    k2, s2 = _direction(qd, z + 0.5 * h * k1, s1)
    k3, s3 = _direction(qd, z + 0.5 * h * k2, s2)
    k4, s4 = _direction(qd, z + h * k3, s3)
    z_new = z + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
    return z_new, qd.step_state(z_new, s4)


# ------------------------------------------------------------------- graph


@dataclass
class StokesGraph:
    qd: QuadraticDifferential
    turning_points: list
    trajectories: list
    connections: list  # indices of trajectories ending at turning points (deduplicated)

    def to_json(self) -> dict:
        sing = [{"loc": ([p.real, p.imag] if p != INF else "infinity"), "order": m}
                for p, m in self.qd.poles if m >= 2]
        return {"label": self.qd.label,
                "turning_points": [t.to_json() for t in self.turning_points],
                "singular_points": sing,
                "trajectories": [t.to_json() for t in self.trajectories],
                "segments": [{"trajectory": i,
                              "from": [self.trajectories[i].source.location.real,
                                       self.trajectories[i].source.location.imag],
                              "to": [self.trajectories[i].end.real, self.trajectories[i].end.imag]}
                             for i in self.connections]}


def _point_to_polyline(pts: np.ndarray, line: np.ndarray) -> np.ndarray:
    a, b = line[:-1], line[1:]
    d = b - a
    L2 = np.maximum(np.abs(d) ** 2, 1e-300)
    s = np.clip(((pts[:, None] - a[None, :]) * np.conj(d)[None, :]).real / L2[None, :], 0, 1)
    return np.abs(pts[:, None] - (a[None, :] + s * d[None, :])).min(axis=1)


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Hausdorff distance between two polylines (vertices against segments)."""
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    if len(a) < 2 or len(b) < 2:
        d = np.abs(a[:, None] - b[None, :])
        return float(max(d.min(axis=1).max(), d.min(axis=0).max()))
    return float(max(_point_to_polyline(a, b).max(), _point_to_polyline(b, a).max()))


def build_stokes_graph(qd: QuadraticDifferential, opts: TraceOptions | None = None) -> StokesGraph:
    tps = classify_turning_points(qd)
    trajs = []
    for tp in tps:
        for k in range(len(emit_rays(tp, qd))):
            trajs.append(trace(qd, tp, k, opts, tps))
    conns: list[int] = []
    scale = qd.min_feature_separation()
    for i, tr in enumerate(trajs):
        if not tr.ends_at_turning_point:
            continue
        dup = False
        for j in conns:
            other = trajs[j]
            same_ends = ({tr.source.location, tr.end} == {other.source.location, other.end})
            if same_ends and hausdorff(tr.points, other.points) < 0.05 * scale:
                dup = True
                break
        if not dup:
            conns.append(i)
    return StokesGraph(qd, tps, trajs, conns)


# ------------------------------------------------------------ t-plane tracing
#
# Tags without a rational lambda0-surface are traced on the t-plane.  The
# continuation state is (lambda0, sqrt F1): lambda0 is followed by Newton
# from the previous node, so each trajectory lives on one sheet.  P-turning
# points and simple-pole-type points carry the lambda0 value of their sheet.


@dataclass
class TPlaneDifferential:
    """F1(t) dt^2 on the sheets of lambda0(t) for a Painleve instance."""

    instance: object  # PainleveInstance
    p_points: list = field(default_factory=list)  # [(t, lambda)]
    pole_points: list = field(default_factory=list)  # [(s, lambda_s)] simple-pole type
    sing: list = field(default_factory=list)  # finite singular points
    label: str = ""

    @classmethod
    def build(cls, inst, radius: float | None = None) -> "TPlaneDifferential":
        from .painleve_catalog import p_turning_points, singular_points

        pts = [(complex(t), complex(l)) for t, l in p_turning_points(inst, radius=radius)]
        sing = [complex(s.location) for s in singular_points(inst) if s.location != INF]
        qd = cls(inst, pts, [], sing, f"{inst.tag.label} t-plane")
        qd.pole_points = [pp for s in sing for pp in qd._simple_pole_sheets(s)]
        return qd

    # -- features
    @property
    def finite_features(self):
        return [(t, 1) for t, _ in self.p_points] + [(s, -2) for s in self.sing]

    @property
    def poles(self):
        return [(s, 2) for s in self.sing] + [(INF, 4)]

    @property
    def infinity_is_pole(self) -> bool:
        return True

    def feature_distance(self, z) -> float:
        return min((abs(z - p) for p, _ in self.finite_features), default=np.inf)

    def min_feature_separation(self) -> float:
        pts = list(dict.fromkeys(p for p, _ in self.finite_features))
        d = [abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1:]]
        return min(d) if d else 1.0

    def stop_points(self) -> list:
        return list(self.sing)

    def turning_points(self) -> list[TurningPoint]:
        out = [TurningPoint(t, 1, "simple", l) for t, l in self.p_points]
        out += [TurningPoint(s, -1, "simple_pole_type", l) for s, l in self.pole_points]
        out.sort(key=lambda tp: (round(tp.location.real, 10), round(tp.location.imag, 10),
                                 round(tp.sheet.real, 10), round(tp.sheet.imag, 10)))
        return out

    # -- sheets
    def _roots(self, t) -> np.ndarray:
        from .painleve_catalog import lambda0_candidates
        return np.array(lambda0_candidates(self.instance, t), dtype=complex)

    def _F1(self, lam, t):
        from .painleve_catalog import F1_and_slope
        return F1_and_slope(self.instance, lam, t)[0]

    def _newton(self, lam, t):
        from .painleve_catalog import newton_lambda_vec
        return newton_lambda_vec(self.instance, lam, t)

    def _simple_pole_sheets(self, s: complex) -> list:
        """Sheets on which F1 ~ (t - s)^(-3/2): two roots swapping around s."""
        feats = [p for p, _ in self.finite_features if abs(p - s) > 1e-12]
        rho = 1e-3 * min([abs(p - s) for p in feats] + [1.0])
        perm, tracks = self._monodromy(s, rho)
        out = []
        for i, j in enumerate(perm):
            if j <= i or perm[j] != i:
                continue
            l1 = tracks[i]
            f_big = abs(self._F1(l1, s + rho))
            perm2, tracks2 = self._monodromy(s, rho / 16)
            k = int(np.argmin(np.abs(tracks2 - l1)))
            f_small = abs(self._F1(tracks2[k], s + rho / 16))
            expo = math.log(f_small / f_big) / math.log(1 / 16)
            if abs(expo + 1.5) < 0.25:
                out.append((s, complex(0.5 * (tracks[i] + tracks[j]))))
        return out

    def _monodromy(self, s, rho, n: int = 96):
        start = self._roots(s + rho)
        cur = start.copy()
        for k in range(1, n + 1):
            t = s + rho * cmath.exp(2j * np.pi * k / n)
            roots = self._roots(t)
            cur = np.array([roots[np.argmin(np.abs(roots - c))] for c in cur])
        perm = [int(np.argmin(np.abs(start - c))) for c in cur]
        return perm, start

    def _pair(self, tp: TurningPoint, t) -> np.ndarray:
        roots = self._roots(t)
        return roots[np.argsort(np.abs(roots - tp.sheet))[:2]]

    # -- continuation protocol
    @staticmethod
    def sval(state) -> complex:
        return state[1]

    def step_state(self, z, state):
        """State (lambda, sqrt F1, t): Newton in lambda from a tangent prediction."""
        from .painleve_catalog import _bi_eval
        lam = state[0]
        if len(state) > 2 and z != state[2]:
            Nm, _ = self.instance.bivariate()
            lam = lam - complex(_bi_eval(Nm, lam, state[2], dt=1) / _bi_eval(Nm, lam, state[2], dlam=1)) * (z - state[2])
        lam = complex(self._newton(lam, z))
        s = cmath.sqrt(complex(self._F1(lam, z)))
        return (lam, s if (s * state[1].conjugate()).real >= 0 else -s, z)

    def chord(self, z0, z1, state):
        half = 0.5 * (z1 - z0)
        zs = z0 + half * (GK_NODES + 1)
        from .painleve_catalog import F1_and_slope, _bi_eval
        Nm, _ = self.instance.bivariate()
        # linear predictor from the start, then vectorized Newton
        lam0 = state[0]
        dl = -_bi_eval(Nm, lam0, z0, dt=1) / _bi_eval(Nm, lam0, z0, dlam=1)
        lams = self._newton(lam0 + dl * (zs - z0), zs)
        vals = continue_signs(np.sqrt(F1_and_slope(self.instance, lams, zs)[0]), state[1])
        return half * np.dot(GK_WEIGHTS, vals), (complex(lams[-1]), complex(vals[-1]), complex(zs[-1]))

    def integral_to(self, z, state, tp: TurningPoint, tol: float) -> complex:
        """int_z^{tp} sqrt(F1) dt, integrated in lambda from lambda(z) to the sheet value."""
        from .painleve_catalog import PhaseInLambda
        path = ComplexPath((Line(state[0], tp.sheet, end_power=2),))
        val, (t_end, _) = path_integral(PhaseInLambda(self.instance), path, tol,
                                        seed=(complex(z), state[1]), return_state=True)
        if abs(t_end - tp.location) > 1e-6 * max(1.0, abs(tp.location)):
            raise NumericError(f"lambda path did not reach t={tp.location}")
        return val

    def on_sheet(self, tp: TurningPoint, z, state) -> bool:
        roots = self._roots(z)
        mine = roots[np.argmin(np.abs(roots - state[0]))]
        return bool(np.min(np.abs(self._pair(tp, z) - mine)) < 1e-9 * max(1.0, abs(mine)))

    def ray_angles(self, tp: TurningPoint) -> list[float]:
        return [th for th, _, _ in self.ray_starts(tp, 1e-3 * self._dist(tp))]

    def _dist(self, tp):
        return min((abs(tp.location - p) for p, _ in self.finite_features if p != tp.location), default=1.0)

    def period(self, tr: Trajectory, tol: float = 1e-13) -> complex:
        """int sqrt(F1) dt along a connection, integrated over its lambda-image.

        In lambda the integrand vanishes quadratically at P-turning points, so
        only the simple-pole-type ends are singular.  Both halves start from
        the first traced node, where the branch of the trace is known.
        """
        from .painleve_catalog import PhaseInLambda

        if not tr.ends_at_turning_point or not tr.states:
            raise ValueError("period needs a traced connection")
        end = min((t for t in self.turning_points() if t.location == tr.end),
                  key=lambda t: abs(t.sheet - tr.states[-1][0]))
        t1, st1 = complex(tr.points[1]), tr.states[0]
        f = PhaseInLambda(self.instance)
        back = ComplexPath.polyline([st1[0], tr.source.sheet], singular_end=2)
        lams = [st[0] for st in tr.states] + [end.sheet]
        fwd = ComplexPath.polyline(lams, singular_end=2)
        scale = max(1.0, abs(tr.arclength_in_zeta))
        ia, (ta, _) = path_integral(f, back, tol * scale, seed=(t1, st1[1]), return_state=True)
        ib, (tb, _) = path_integral(f, fwd, tol * scale, seed=(t1, st1[1]), return_state=True)
        for got, want in ((ta, tr.source.location), (tb, end.location)):
            if abs(got - want) > 1e-6 * max(1.0, abs(want)):
                raise NumericError(f"lambda-image reached t={got}, not {want}")
        return ib - ia

    def ray_starts(self, tp: TurningPoint, rho: float) -> list:
        """Local model: with w = (t - a)^(1/2), lambda is analytic in w and
        F1 ~ kappa w^m (m = 1 at P-turning points, -3 at simple-pole type);
        zeta = 4 sqrt(kappa) w^((m+4)/2) / (m+4) is real along the m + 4
        directions arg w = (2 pi k - arg kappa) / (m + 4)."""
        a = tp.location
        m = 1 if tp.order == 1 else -3
        w0 = math.sqrt(rho)
        la, lb = self._pair(tp, a + rho)
        kappa = complex(self._F1(la, a + rho)) / w0 ** m
        out = []
        for k in range(m + 4):
            phi = (2 * np.pi * k - cmath.phase(kappa)) / (m + 4)
            phi = phi % (2 * np.pi)
            # continue lambda along the w-circle from phi = 0 (where it is la)
            lam = la
            nsteps = max(8, int(64 * phi / np.pi))
            for j in range(1, nsteps + 1):
                t = a + rho * cmath.exp(2j * phi * j / nsteps)
                lam = complex(self._newton(lam, t))
            t = a + rho * cmath.exp(2j * phi)
            th = (2 * phi) % (2 * np.pi)
            s = cmath.sqrt(complex(self._F1(lam, t)))
            e = cmath.exp(1j * th)
            out.append((float(th), t, (lam, s if (s * e).real >= 0 else -s, t)))
        return out


def tplane_stokes_graph(inst, opts: TraceOptions | None = None, t_window=None) -> "StokesGraph":
    qd = TPlaneDifferential.build(inst)
    if t_window is not None:
        opts = opts or TraceOptions()
        opts.escape_radius = float(t_window)
    return build_stokes_graph(qd, opts)
