"""Top-order transformation data between a Painleve instance with a certified
P-Stokes segment and the canonical P_II (two-point segment) or P_III'(D7)
(loop) instance: the matched constant c, the map t0 and the map x0.

The P-side lives on rational lambda0-surfaces (u-planes), where phases
phi_k(u) = int_{r_k}^u sqrt(q) du are integrals of a single-valued
differential.  t0 and x0 are anchor tables refined by Newton.
"""
from __future__ import annotations

import cmath
import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import (QuadraticDifferential, TraceOptions, build_stokes_graph,
                       hausdorff)
from .numeric_core import (GK_NODES, GK_WEIGHTS, ComplexPath, NumericError, SqrtIntegrand,
                           continue_signs, path_integral)
from .painleve_catalog import (PainleveInstance, PainleveTag, RationalSurface, build_Q0,
                               rational_surface)
from .periods import sl_integral
from .saddle_detector import Segment, adjacency_at_double, detect_segments


class NotPureImaginary(NumericError):
    pass


class NewtonDivergence(NumericError):
    pass


class KMismatch(NumericError):
    pass


class BranchInconsistency(NumericError):
    pass


class MonodromyFailure(NumericError):
    def __init__(self, defect):
        super().__init__(f"x0 not single-valued: defect {defect:.3e}")
        self.defect = defect


class AssumptionViolation(NumericError):
    pass


SL_TRACE = TraceOptions(step_fraction=0.01)


# ------------------------------------------------------------------ P side


@dataclass
class PhaseTrack:
    """Cumulative int sqrt(q) du along a polyline starting at a zero of q."""

    q: object  # RationalFunction
    nodes: np.ndarray
    psi: np.ndarray
    s: np.ndarray

    @classmethod
    def build(cls, q, nodes, seed: complex, tol: float = 1e-13) -> "PhaseTrack":
        nodes = np.asarray(nodes, dtype=complex)
        n = len(nodes)
        psi = np.zeros(n, dtype=complex)
        s = np.zeros(n, dtype=complex)
        f = SqrtIntegrand(q)
        prev = complex(seed)
        for j in range(1, n):
            sp = 2 if j == 1 else 1
            ep = 2 if j == n - 1 else 1
            path = ComplexPath.polyline([nodes[j - 1], nodes[j]], singular_start=sp, singular_end=ep)
            val, prev = path_integral(f, path, tol * max(1.0, abs(psi[j - 1])), seed=prev,
                                      return_state=True)
            psi[j] = psi[j - 1] + val
            # the returned state is at the last quadrature node; take the exact node value
            prev = _match_sqrt(q(nodes[j]), prev)
            s[j] = prev
        return cls(q, nodes, psi, s)

    def value(self, u: complex, j: int | None = None) -> tuple[complex, complex]:
        """(int to u, sqrt(q(u))): via node j (default nearest interior node), then straight."""
        if j is None:
            d = np.abs(self.nodes[1:-1] - u)
            j = 1 + int(np.argmin(d))
        if u == self.nodes[j]:
            return complex(self.psi[j]), complex(self.s[j])
        val, s_end = _chord(self.q, self.nodes[j], u, self.s[j])
        return complex(self.psi[j] + val), s_end


def _match_sqrt(v, ref) -> complex:
    r = cmath.sqrt(complex(v))
    return -r if (r * complex(ref).conjugate()).real < 0 else r


def _chord(q, z0, z1, s0, tol: float = 1e-14):
    f = SqrtIntegrand(q)
    path = ComplexPath.polyline([z0, z1])
    val, last = path_integral(f, path, tol * max(1.0, abs(s0 * (z1 - z0))), seed=complex(s0),
                              return_state=True)
    return val, _match_sqrt(q(z1), last)


@dataclass
class PSide:
    """A certified segment on a rational surface with labelled ends r1, r2.

    sigma = +1 labels the traced start as r1.  phi_k(u) = int_{r_k}^u sigma sqrt(q)
    with the branch for which phi_1 increases along the segment from r1.
    """

    instance: PainleveInstance
    surf: RationalSurface
    segment: Segment
    period: float
    fwd: PhaseTrack
    bwd: PhaseTrack
    sigma: int = 1

    @classmethod
    def from_segment(cls, inst, surf, seg: Segment, seed: complex) -> "PSide":
        q = surf.qd.q
        pts = np.asarray(seg.points, dtype=complex)
        fwd = PhaseTrack.build(q, pts, seed)
        # independent integration from the far end, on the same branch
        bwd = PhaseTrack.build(q, pts[::-1], fwd.s[-2])
        P = fwd.psi[-1]
        if abs(P.imag) > 1e-7 * max(1.0, abs(P)):
            raise NotPureImaginary(f"segment period {P} is not real")
        return cls(inst, surf, seg, float(P.real), fwd, bwd, 1)

    @property
    def loop(self) -> bool:
        return self.segment.kind == "loop"

    def r(self, k: int) -> complex:
        ends = (self.fwd.nodes[0], self.fwd.nodes[-1])
        return ends[(k - 1) if self.sigma > 0 else (2 - k)]

    def phi(self, k: int, u: complex, j: int | None = None) -> tuple[complex, complex]:
        """(phi_k(u), dphi_k/du).

        fwd measures int_{r_a}^u and bwd int_{r_b}^u, both on the traced branch;
        phi_k uses the track starting at r_k, times sigma.
        """
        track = self.fwd if (k == 1) == (self.sigma > 0) else self.bwd
        v, s = track.value(u, j)
        return self.sigma * v, self.sigma * s

    def sqrt_F1(self, u: complex) -> complex:
        return self.phi(1, u)[1] / complex(self.surf.dt_du(u))

    def mid_node(self) -> int:
        target = self.period / 2
        return int(np.argmin(np.abs(self.fwd.psi.real - target)))

    def solve(self, k: int, value: complex, guess: complex | None = None, tol: float = 1e-14) -> complex:
        """u with phi_k(u) = value, Newton seeded on the segment."""
        if guess is None:
            vals = np.array([self.phi(k, u, j)[0].real for j, u in
                             enumerate(self.fwd.nodes) if 0 < j < len(self.fwd.nodes) - 1])
            guess = self.fwd.nodes[1 + int(np.argmin(np.abs(vals - value.real)))]
        u = complex(guess)
        for _ in range(50):
            v, d = self.phi(k, u)
            du = (v - value) / d
            u -= du
            if abs(du) <= tol * max(1.0, abs(u)):
                return u
        raise NewtonDivergence(f"phi_{k}(u) = {value} did not converge (last step {abs(du):.2e})")


def certified_sides(inst: PainleveInstance, kind: str | None = None) -> list[PSide]:
    """PSide objects for every certified segment of an instance's rational surface."""
    surf = rational_surface(inst)
    graph = build_stokes_graph(surf.qd)
    det = detect_segments(graph)
    out = []
    for seg in det.segments:
        if kind is not None and seg.kind != kind:
            continue
        if not all(tp.kind == "simple" for tp in seg.endpoints):
            continue
        tr = graph.trajectories[seg.trajectory]
        out.append(PSide.from_segment(inst, surf, seg, tr.sqrt_branch_seed))
    return out


def match_constant(side: PSide, tol: float = 1e-7) -> complex:
    """c = (1/2 pi i) int_Gamma sqrt(F1) dt, orientation chosen so that Im c > 0."""
    P = complex(side.fwd.psi[-1])
    if abs(P.imag) > tol * max(1.0, abs(P)):
        raise NotPureImaginary(f"period {P} not real")
    return 1j * abs(P.real) / (2 * np.pi)


# ----------------------------------------------------------------- SL side


@dataclass
class SLSide:
    """SL_J leading potential at (t, lambda0) with sqrt(R(lambda0)) = sqrt(F1)."""

    instance: PainleveInstance
    t: complex
    lam0: complex
    sqrt_F1: complex
    pot: object = None
    graph: object = None
    gammas: dict = field(default_factory=dict)  # k -> Trajectory from lambda0
    rays: dict = field(default_factory=dict)  # k -> ray index at lambda0
    orientation: str = ""

    def __post_init__(self):
        self.pot = build_Q0(self.instance, self.t, self.lam0)
        C0 = complex(self.pot.C(self.lam0))
        self.kappa = 0.5 * C0 * self.sqrt_F1  # Z ~ kappa (x - lam0)^2
        self.sqrt_kappa = cmath.sqrt(self.kappa)

    # sqrt(Q0) = C(x) (x - lam0) sqrt(R(x)); the continued quantity is sqrt(R)
    def _R(self, x):
        return self.pot.R(x)

    def sqrtQ(self, x, sR):
        return complex(self.pot.C(x)) * (x - self.lam0) * sR

    def chord(self, x0, x1, sR0):
        """(int_x0^x1 sqrt(Q0), sqrt(R(x1))) by one GK15 panel."""
        half = 0.5 * (x1 - x0)
        xs = x0 + half * (GK_NODES + 1)
        sR = continue_signs(np.sqrt(self._R(xs).astype(complex)), sR0)
        vals = np.asarray(self.pot.C(xs)) * (xs - self.lam0) * sR
        end = cmath.sqrt(complex(self._R(x1)))
        if (end * sR[-1].conjugate()).real < 0:
            end = -end
        return complex(half * np.dot(GK_WEIGHTS, vals)), end

    def chord_precise(self, x0, x1, sR0, tol: float = 1e-13):
        """Adaptive version of chord, for chords ending at or next to a zero of R."""
        R = self.pot.R
        f = SqrtIntegrand(lambda x: R(x), lambda x: self.pot.C(x) * (x - self.lam0))
        path = ComplexPath.polyline([x0, x1], singular_end=2)
        val, s_last = path_integral(f, path, tol * max(1.0, abs(x1 - x0)), seed=complex(sR0),
                                    return_state=True)
        end = cmath.sqrt(complex(R(x1)))
        if (end * complex(s_last).conjugate()).real < 0:
            end = -end
        return complex(val), end

    def Z_path(self, pts, tol: float = 1e-13, singular_end: int = 1):
        """(Z(pts[-1]), sqrt R there) along the polyline pts starting at lambda0."""
        if abs(pts[0] - self.lam0) > 0:
            raise ValueError("Z paths start at lambda0")
        if len(pts) < 2 or pts[-1] == self.lam0:
            return 0j, self.sqrt_F1
        R = self.pot.R
        f = SqrtIntegrand(lambda x: R(x), lambda x: self.pot.C(x) * (x - self.lam0))
        path = ComplexPath.polyline(pts, singular_end=singular_end)
        val, last = path_integral(f, path, tol, seed=self.sqrt_F1, return_state=True)
        return val, _match_sqrt(R(pts[-1]), last)

    def W_of(self, x, Z):
        """Z^(1/2) near lambda0 on the branch ~ sqrt(kappa) (x - lambda0)."""
        d = x - self.lam0
        if d == 0:
            return 0j
        h = cmath.sqrt(Z / (d * d))
        if (h * self.sqrt_kappa.conjugate()).real < 0:
            h = -h
        return d * h

    def build_graph(self, opts: TraceOptions = SL_TRACE):
        qd = QuadraticDifferential.from_rational(self.pot.Q0, f"SL {self.instance.tag.label}")
        self.graph = build_stokes_graph(qd, opts)
        return self.graph

    def identify(self, phi: dict, tol: float = 1e-6):
        """Assign gamma_k: the SL segment with int_{a}^{lambda0} sqrt(Q0) = phi_k / 2."""
        if self.graph is None:
            self.build_graph()
        dbl = [tp for tp in self.graph.turning_points if tp.kind == "double"]
        if len(dbl) != 1:
            raise AssumptionViolation(f"expected one double turning point, found {len(dbl)}")
        cands = [tr for tr in self.graph.trajectories
                 if tr.source.location == dbl[0].location and tr.ends_at_turning_point]
        for k, ph in phi.items():
            best = None
            for tr in cands:
                J = sl_integral(self.instance, self.t, self.lam0, tr.end, self.sqrt_F1,
                                via=tr.points[1:-1][::-1])
                res = abs(J - 0.5 * ph) / max(1.0, abs(ph))
                if best is None or res < best[0]:
                    best = (res, tr)
            if best is None or best[0] > tol:
                raise AssumptionViolation(f"no SL segment matches phi_{k}/2 (best residual "
                                          f"{best[0] if best else np.inf:.2e})")
            self.gammas[k] = best[1]
            self.rays[k] = best[1].ray_index
        rep = adjacency_at_double(self.graph, dbl[0], first_ray=self.rays[1])
        if not rep.segments_adjacent:
            raise AssumptionViolation("SL segments are not adjacent at the double turning point")
        self.orientation = rep.orientation
        return rep


# ------------------------------------------------------------------ t0


@dataclass
class T0Anchor:
    t_src: complex
    u_src: complex
    t0: complex
    u0: complex
    t0_k2: complex
    phase_residual: float
    difference_residual: float
    dt0: complex = 0j
    dt0_residual: float = 0.0


def _u_anchor_disk(side: PSide, j: int, n: int = 5, frac: float = 0.05):
    u = complex(side.fwd.nodes[j])
    qd = side.surf.qd
    rad = frac * min(abs(u - side.r(1)), abs(u - side.r(2)), qd.feature_distance(u))
    return [u] + [u + rad * cmath.exp(2j * np.pi * (k + 0.25) / n) for k in range(n)]


def _map_u(src: PSide, tgt: PSide, u_src: complex, guess=None, k: int = 1) -> complex:
    return tgt.solve(k, src.phi(k, u_src)[0], guess)


def build_t0(src: PSide, tgt: PSide, j_star: int | None = None, check_k: bool = True,
             h: float = 1e-5) -> list[T0Anchor]:
    """t0 on a disk of anchors around the source point with node index j_star."""
    j_star = src.mid_node() if j_star is None else j_star
    anchors = []
    u0_prev = None
    for u in _u_anchor_disk(src, j_star):
        u0 = _map_u(src, tgt, u, u0_prev)
        u0_2 = _map_u(src, tgt, u, u0, k=2)
        t0, t0_2 = complex(tgt.surf.t_of(u0)), complex(tgt.surf.t_of(u0_2))
        if check_k and abs(t0 - t0_2) > 1e-7 * max(1.0, abs(t0)):
            raise KMismatch(f"t0^(1) = {t0} but t0^(2) = {t0_2}")
        ph_res = abs(src.phi(1, u)[0] - tgt.phi(1, u0)[0])
        diff = abs((src.phi(1, u)[0] - src.phi(2, u)[0]) - (tgt.phi(1, u0)[0] - tgt.phi(2, u0)[0]))
        # central difference in t_src
        t = complex(src.surf.t_of(u))
        tp, tm = [], []
        for sgn, store in ((1, tp), (-1, tm)):
            us = src.surf.u_of(t + sgn * h, u)
            store.append(complex(tgt.surf.t_of(_map_u(src, tgt, us, u0))))
        dt0 = (tp[0] - tm[0]) / (2 * h)
        lhs = src.sqrt_F1(u)
        rhs = dt0 * tgt.sqrt_F1(u0)
        dres = abs(lhs - rhs) / max(1.0, abs(lhs))
        anchors.append(T0Anchor(t, u, t0, u0, t0_2, float(ph_res), float(diff), dt0, float(dres)))
        u0_prev = u0
    return anchors


# ------------------------------------------------------------------ x0


@dataclass
class X0Map:
    """x0 continued along the SL segments of the source at one t."""

    src: SLSide
    tgt: SLSide
    eps: int
    w_radius: float
    images: dict = field(default_factory=dict)  # k -> (x_src nodes, x0 nodes)

    def _newton(self, xs, Zs, x_guess, ref, W_mode: bool, mult: float = 1.0,
                iters: int = 60, precise: bool = False):
        """Solve Z_tgt(x) = Zs (or W) from reference (x_ref, Z_ref, sR_ref)."""
        tgt = self.tgt
        x_ref, Z_ref, sR_ref = ref
        x = complex(x_guess)
        Ws = self.src.W_of(xs, Zs) * self.eps if W_mode else None
        for _ in range(iters):
            if x == x_ref:
                Z, sR = Z_ref, sR_ref
            else:
                dZ, sR = (tgt.chord_precise if precise else tgt.chord)(x_ref, x, sR_ref)
                Z = Z_ref + dZ
            sq = tgt.sqrtQ(x, sR)
            if W_mode:
                W = tgt.W_of(x, Z)
                G, dG = W - Ws, sq / (2 * W) if W != 0 else tgt.sqrt_kappa
            else:
                G, dG = Z - Zs, sq
            if dG == 0:
                raise NewtonDivergence(f"zero derivative at {x}")
            dx = mult * G / dG
            x -= dx
            if abs(dx) <= 1e-15 * max(1.0, abs(x)):
                break
        else:
            if abs(dx) > 1e-9 * max(1.0, abs(x)):
                raise NewtonDivergence(f"x0 Newton stalled at {x} (step {abs(dx):.2e})")
        dZ, sR = (tgt.chord_precise if precise else tgt.chord)(x_ref, x, sR_ref)
        return x, Z_ref + dZ, sR

    def continue_along(self, xs_path, start, max_sub: int = 8):
        """Continue x0 along source points xs_path from start = (x_src, Z_src, sR_src,
        x0, Z0, sR0).  Returns lists of source states and x0 states."""
        src = self.src
        xs0, Zs0, sRs0, x00, Z00, sR00 = start
        out_src = [(xs0, Zs0, sRs0)]
        out_tgt = [(x00, Z00, sR00)]
        for xs1 in xs_path:
            steps = 1
            while True:
                try:
                    cur_s = out_src[-1]
                    cur_t = out_tgt[-1]
                    x_from = cur_s[0]
                    new_s, new_t = [], []
                    for m in range(1, steps + 1):
                        xa = x_from + (xs1 - x_from) * m / steps
                        dZs, sRs = src.chord(cur_s[0], xa, cur_s[2])
                        Zs = cur_s[1] + dZs
                        # predictor from the Jacobian ratio
                        ratio = src.sqrtQ(cur_s[0], cur_s[2]) / tgt_sqrtQ(self.tgt, cur_t)
                        guess = cur_t[0] + ratio * (xa - cur_s[0]) if np.isfinite(ratio) else cur_t[0]
                        W_mode = abs(xa - src.lam0) < self.w_radius
                        x0, Z0, sR0 = self._newton(xa, Zs, guess, cur_t, W_mode)
                        cur_s, cur_t = (xa, Zs, sRs), (x0, Z0, sR0)
                        new_s.append(cur_s)
                        new_t.append(cur_t)
                    break
                except NewtonDivergence:
                    steps *= 2
                    if steps > 2 ** max_sub:
                        raise
            out_src.append(new_s[-1])
            out_tgt.append(new_t[-1])
        return out_src, out_tgt


def tgt_sqrtQ(tgt: SLSide, state):
    x, _, sR = state
    sq = tgt.sqrtQ(x, sR)
    return sq if sq != 0 else np.nan


def _start_state(src: SLSide, tgt: SLSide, eps: int, d: complex):
    """States a small step d from lambda0 on both sides (first-order W map)."""
    xs = src.lam0 + d
    Zs, sRs = src.Z_path([src.lam0, xs])
    ratio = eps * src.sqrt_kappa / tgt.sqrt_kappa
    x0 = tgt.lam0 + ratio * d
    Z0, sR0 = tgt.Z_path([tgt.lam0, x0])
    return xs, Zs, sRs, x0, Z0, sR0


def build_x0(src: SLSide, tgt: SLSide) -> X0Map:
    """x0 along gamma~_1 and gamma~_2 (source SL segments, identified beforehand)."""
    g1s, g1t = src.gammas[1], tgt.gammas[1]
    d_s = g1s.points[1] - src.lam0
    d_t = g1t.points[1] - tgt.lam0
    ratio = src.sqrt_kappa / tgt.sqrt_kappa
    eps = 1 if (ratio * d_s * np.conj(d_t)).real > 0 else -1
    a1 = src.gammas[1].end
    xm = X0Map(src, tgt, eps, 0.1 * abs(src.lam0 - a1))
    for k in (1, 2):
        pts = np.asarray(src.gammas[k].points, dtype=complex)
        d = 1e-3 * (pts[1] - pts[0]) / abs(pts[1] - pts[0]) * abs(src.lam0 - a1)
        start = _start_state(src, tgt, eps, d)
        # refine the start by Newton on W
        x0, Z0, sR0 = xm._newton(start[0], start[1], start[3],
                                 (tgt.lam0, 0j, tgt.sqrt_F1), W_mode=True)
        start = start[:3] + (x0, Z0, sR0)
        inner = [p for p in pts[1:-1] if abs(p - src.lam0) > abs(d)]
        s_states, t_states = xm.continue_along(inner, start)
        # end point a_k: Z has a 3/2-power zero there, so Newton runs with multiplicity 3/2
        a_src = complex(pts[-1])
        Za, _ = src.Z_path([src.lam0] + list(pts[1:-1]) + [a_src], singular_end=2)
        xa, _, _ = xm._newton(a_src, Za, 2 * t_states[-1][0] - t_states[-2][0] if len(t_states) > 1
                              else t_states[-1][0], t_states[-1], False, mult=1.5, precise=True)
        xs_list = [src.lam0] + [s[0] for s in s_states] + [a_src]
        x0_list = [tgt.lam0] + [t[0] for t in t_states] + [xa]
        xm.images[k] = (np.array(xs_list), np.array(x0_list), s_states, t_states)
    return xm


@dataclass
class X0Report:
    tp_residuals: dict
    hausdorff: dict
    jacobian_residual: float
    min_jacobian: float
    max_jacobian: float
    identity_residual: float | None = None


def verify_x0(xm: X0Map, h: float = 1e-5) -> X0Report:
    src, tgt = xm.src, xm.tgt
    tp = {"lambda0": 0.0}
    hd = {}
    jres, jac = [], []
    for k, (xs, x0, s_states, t_states) in xm.images.items():
        tp[f"a{k}"] = float(abs(x0[-1] - tgt.gammas[k].end))
        hd[k] = hausdorff(x0, tgt.gammas[k].points)
        for (xs_, Zs, sRs), tst in zip(s_states[1:], t_states[1:]):
            if abs(xs_ - src.lam0) < 2 * xm.w_radius or abs(xs_ - xs[-1]) < 0.05 * abs(xs[-1] - src.lam0):
                continue
            vals = []
            for sgn in (1, -1):
                xa = xs_ + sgn * h
                dZs, _ = src.chord(xs_, xa, sRs)
                xn, _, _ = xm._newton(xa, Zs + dZs, tst[0], tst, False)
                vals.append(xn)
            d = (vals[0] - vals[1]) / (2 * h)
            lhs = d * tgt.sqrtQ(tst[0], tst[2])
            rhs = src.sqrtQ(xs_, sRs)
            jres.append(abs(lhs - rhs) / max(abs(rhs), 1e-300))
            jac.append(abs(d))
    ident = max(float(np.max(np.abs(x0 - xs))) for xs, x0, _, _ in xm.images.values())
    return X0Report(tp, hd, float(max(jres)), float(min(jac)), float(max(jac)), ident)


def _closed_curve(src: SLSide, shift_frac: float = 0.05, n: int = 240) -> np.ndarray:
    """gamma~_1 followed by gamma~_2 reversed, shifted towards the enclosed region
    and resampled to n points by arclength."""
    p1 = np.asarray(src.gammas[1].points, dtype=complex)
    p2 = np.asarray(src.gammas[2].points, dtype=complex)
    loop = np.concatenate([p1, p2[::-1][1:-1]])
    area = 0.5 * np.sum((np.conj(loop) * np.roll(loop, -1)).imag)
    if area < 0:
        loop = loop[::-1]
    seg = np.abs(np.diff(np.append(loop, loop[0])))
    s = np.concatenate([[0], np.cumsum(seg)])
    L = s[-1]
    closed = np.append(loop, loop[0])
    ts = np.linspace(0, L, n, endpoint=False)
    pts = np.interp(ts, s, closed.real) + 1j * np.interp(ts, s, closed.imag)
    tang = np.roll(pts, -1) - np.roll(pts, 1)
    normal = 1j * tang / np.abs(tang)  # left of a ccw curve = interior
    scale = shift_frac * abs(src.lam0 - src.gammas[1].end)
    return pts + scale * normal


def monodromy_defect(xm: X0Map, n_probes: int = 8, n: int = 240) -> float:
    """Continue x0 once around a closed curve near gamma~_1 + gamma~_2 from n_probes
    starting points; the largest |x0(end) - x0(start)|."""
    src = xm.src
    curve = _closed_curve(src, n=n)
    # x0 at the first curve point: continue from gamma~_1 image node nearest to it
    xs_nodes, x0_nodes, s_states, t_states = xm.images[1]
    defects = []
    for p in range(n_probes):
        i0 = p * n // n_probes
        start_pt = curve[i0]
        jn = int(np.argmin([abs(st[0] - start_pt) for st in s_states]))
        try:
            s_states_, t_states_ = xm.continue_along([start_pt], s_states[jn] + t_states[jn])
            st = s_states_[-1] + t_states_[-1]
            path = list(np.roll(curve, -i0)[1:]) + [start_pt]
            ss, ts = xm.continue_along(path, st)
        except NumericError:
            # no single-valued continuation exists along this loop
            defects.append(float("inf"))
            continue
        defects.append(abs(ts[-1][0] - ts[0][0]))
    return float(max(defects))


# ------------------------------------------------------------------ driver


@dataclass
class TransformTopTerms:
    source: PSide
    target: PSide
    c: complex
    orientation_case: str
    t_star: complex
    t0_anchors: list
    x0: X0Map | None = None
    x0_report: X0Report | None = None
    monodromy: float | None = None
    sl_src: SLSide | None = None
    sl_tgt: SLSide | None = None

    def checks(self) -> dict:
        a = self.t0_anchors
        out = {
            "phase_correspondence": max(x.phase_residual for x in a),
            "difference_identity": max(x.difference_residual for x in a),
            "dt0_dt": max(x.dt0_residual for x in a),
            "k_agreement": max(abs(x.t0 - x.t0_k2) for x in a),
            "min_dt0": min(abs(x.dt0) for x in a),
            "max_dt0": max(abs(x.dt0) for x in a),
        }
        if self.x0_report is not None:
            r = self.x0_report
            out.update({"turning_point_correspondence": max(r.tp_residuals.values()),
                        "segment_hausdorff": max(r.hausdorff.values()),
                        "jacobian_identity": r.jacobian_residual,
                        "min_dx0": r.min_jacobian, "max_dx0": r.max_jacobian})
        if self.monodromy is not None:
            out["monodromy_defect"] = self.monodromy
        return out

    def to_json(self) -> dict:
        c = lambda z: [float(np.real(z)), float(np.imag(z))]
        d = {"c": c(self.c), "orientation": self.orientation_case, "t_star": c(self.t_star),
             "t0_anchors": [[c(x.t_src) for x in self.t0_anchors], [c(x.t0) for x in self.t0_anchors]],
             "checks": self.checks()}
        if self.x0 is not None:
            d["x0_anchors"] = {str(k): [[c(v) for v in xs], [c(v) for v in x0]]
                               for k, (xs, x0, _, _) in self.x0.images.items()}
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def _label_side(side: PSide, u: complex) -> SLSide:
    """Choose sigma (which end is r1) so that gamma_2 follows gamma_1 counter-clockwise."""
    for sigma in (side.sigma, -side.sigma):
        side.sigma = sigma
        t = complex(side.surf.t_of(u))
        sl = SLSide(side.instance, t, complex(side.surf.lam_of(u)), side.sqrt_F1(u))
        sl.identify({1: side.phi(1, u)[0], 2: side.phi(2, u)[0]})
        if sl.orientation == "A":
            return sl
    raise AssumptionViolation("no labelling gives orientation A")


def verify_nonvanishing_jacobians(top: TransformTopTerms, rel: float = 1e-4) -> dict:
    ch = top.checks()
    out = {"min_dt0": ch["min_dt0"], "dt0_pass": ch["min_dt0"] > rel * ch["max_dt0"]}
    if "min_dx0" in ch:
        out.update({"min_dx0": ch["min_dx0"], "dx0_pass": ch["min_dx0"] > rel * ch["max_dx0"]})
    return out


def _nearest_node(sides: list, t_star: complex) -> tuple[int, int]:
    """(side index, interior node index) whose t-image is closest to t_star."""
    best = (np.inf, 0, 0)
    for i, sd in enumerate(sides):
        ts = np.asarray(sd.surf.t_of(sd.fwd.nodes[1:-1]), dtype=complex)
        j = int(np.argmin(np.abs(ts - t_star)))
        best = min(best, (float(abs(ts[j] - t_star)), i, j + 1))
    return best[1], best[2]


def build_transform(source: PainleveInstance, src_index: int = 0, target_c: complex | None = None,
                    check_k: bool = True, with_x0: bool = True, monodromy: bool | None = None,
                    t_star: complex | None = None, tgt_index: int | None = None
                    ) -> TransformTopTerms:
    """Match the segment src_index of the source to the canonical target and build t0, x0.

    Two-point segments map to P_II, loops to P_III'(D7).  target_c overrides the
    matched constant (negative controls).  t_star picks the segment and anchor
    node nearest to it instead of src_index and the segment midpoint;
    tgt_index picks the target segment explicitly.
    """
    sides = certified_sides(source)
    if not sides:
        raise AssumptionViolation("source has no certified segment between simple P-turning points")
    j = None
    if t_star is not None:
        src_index, j = _nearest_node(sides, complex(t_star))
    src = sides[src_index]
    c = match_constant(src)
    tag = PainleveTag.III_D7 if src.loop else PainleveTag.II
    tc = c if target_c is None else complex(target_c)
    target = PainleveInstance(tag, {"c": tc})
    same = source.tag is tag and abs(source.p("c") - tc) == 0
    tsides = [s for s in certified_sides(target) if s.loop == src.loop]
    if not tsides:
        raise AssumptionViolation("target has no matching segment")
    if tgt_index is not None:
        tgt = tsides[tgt_index]
    elif same:
        key = lambda s: abs(s.fwd.nodes[0] - src.fwd.nodes[0]) + abs(s.fwd.nodes[-1] - src.fwd.nodes[-1])
        tgt = min(tsides, key=key)
    else:
        tgt = tsides[0]
    j = src.mid_node() if j is None else j
    u_star = complex(src.fwd.nodes[j])
    sl_src = _label_side(src, u_star) if with_x0 else None
    # target labelling: try both, keep the one with orientation A at t0(t*)
    sl_tgt = None
    for sigma in (1, -1):
        tgt.sigma = sigma
        u0 = _map_u(src, tgt, u_star)
        if not with_x0:
            break
        t0s = complex(tgt.surf.t_of(u0))
        cand = SLSide(target, t0s, complex(tgt.surf.lam_of(u0)), tgt.sqrt_F1(u0))
        cand.identify({1: tgt.phi(1, u0)[0], 2: tgt.phi(2, u0)[0]})
        if cand.orientation == "A":
            sl_tgt = cand
            break
    if with_x0 and sl_tgt is None:
        raise AssumptionViolation("target orientation never matches")
    anchors = build_t0(src, tgt, j, check_k)
    top = TransformTopTerms(src, tgt, c, "A", complex(src.surf.t_of(u_star)), anchors,
                            sl_src=sl_src, sl_tgt=sl_tgt)
    if with_x0:
        xm = build_x0(sl_src, sl_tgt)
        top.x0 = xm
        top.x0_report = verify_x0(xm)
        if monodromy or (monodromy is None and src.loop):
            top.monodromy = monodromy_defect(xm)
    return top
