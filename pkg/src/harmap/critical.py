"""Critical set computation: isolated points and closed oriented critical curves.

The curves solve omega(gamma(t)) = e^{it} and are traced by a
predictor-corrector scheme along gamma' = i omega / omega'.  Components on
which omega' vanishes are split into arcs at those vertices and re-joined
into a single closed curve by an Euler circuit of the directed arc graph.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateDilatation,
    HitBranchPoint,
    MaxSteps,
    NonConvergence,
    UnbalancedVertex,
)
from .numerics import Poly, cluster_roots, poly_roots

N_SEED_PHASES = 8
T_STEP_MIN = 1e-4
T_STEP_MAX = 0.1
T_STEP_GROW = 1.3
CORRECTOR_TOL = 1e-11
CORRECTOR_MAX_ITER = 12
CLOSE_Z_TOL = 1e-8
CLOSE_T_TOL = 1e-6
BRANCH_RADIUS = 1e-5
OMEGA_PRIME_FLOOR = 1e-7
MAX_TRACE_STEPS = 200_000
ON_CURVE_TOL = 1e-6        # |omega| distance from 1 accepted as "on the critical set"
SEED_REACH_TOL = 1e-6
TWO_PI = 2.0 * math.pi


@dataclass
class Vertex:
    """Self-intersection point of the critical set: omega'(z) = 0, |omega(z)| = 1."""

    z: complex
    order: int      # n with omega^(n) the first non-vanishing derivative; 2n arcs meet
    id: int = -1
    radius: float = BRANCH_RADIUS   # arc truncation distance, order-dependent
    c_lead: complex = 0j            # omega^(n)(z) / (n! omega(z))


@dataclass
class Arc:
    """Maximal traced piece of a critical curve between vertices.

    For a Jordan component the whole closed curve is a single arc with
    v_from = v_to = None.
    """

    ts: np.ndarray
    zs: np.ndarray
    v_from: int | None = None
    v_to: int | None = None
    curve_id: int = -1


@dataclass
class CriticalCurve:
    """Closed oriented parametrization of one component of the critical set."""

    component_id: int
    ts: np.ndarray
    zs: np.ndarray
    vertices: list = field(default_factory=list)   # [(z, order)] on this component
    seam_indices: tuple = ()                       # sample indices at vertex joins

    @property
    def closed(self):
        return True

    @property
    def t_span(self):
        return float(self.ts[-1] - self.ts[0])

    def enclosed_area(self):
        """Signed area of the sampled polyline (shoelace)."""
        x, y = self.zs.real, self.zs.imag
        return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))


@dataclass
class IsolatedCriticalPoint:
    """Common zero of both Wirtinger derivatives with non-unimodular dilatation."""

    z: complex
    omega_limit_abs: float


@dataclass
class CriticalSet:
    curves: list
    arcs: list
    vertices: list
    isolated: list


def _wrap_pi(x):
    return (x + math.pi) % TWO_PI - math.pi


class _Tracer:
    """Predictor-corrector machinery shared by curve and arc tracing."""

    def __init__(self, omega, scale=1.0):
        self.omega = omega
        self.omega_prime = omega.derivative()
        self.scale = scale
        self.vertices = []

    def gamma_prime(self, z):
        w = self.omega(z)
        wp = self.omega_prime(z)
        if abs(wp) < OMEGA_PRIME_FLOOR * max(1.0, abs(w)):
            raise HitBranchPoint(z)
        return 1j * w / wp

    def correct(self, z, t):
        """Newton in z on omega(z) - e^{it} = 0 for fixed t."""
        target = cmath.exp(1j * t)
        for it in range(CORRECTOR_MAX_ITER):
            res = self.omega(z) - target
            if abs(res) <= CORRECTOR_TOL:
                return z, it
            wp = self.omega_prime(z)
            if abs(wp) < 1e-300:
                return None, it
            z = z - res / wp
        res = self.omega(z) - target
        if abs(res) <= CORRECTOR_TOL:
            return z, CORRECTOR_MAX_ITER
        return None, CORRECTOR_MAX_ITER

    def _nearest_vertex(self, z):
        """Vertex with the smallest distance-to-truncation-radius ratio."""
        best, ratio = None, math.inf
        for v in self.vertices:
            q = abs(z - v.z) / v.radius
            if q < ratio:
                best, ratio = v, q
        return best, ratio

    def _segment_shell_hit(self, za, zb):
        """Vertex whose truncation shell the segment za -> zb enters, if any."""
        for v in self.vertices:
            ab = zb - za
            denom = abs(ab) ** 2
            s = ((v.z - za) * ab.conjugate()).real / denom if denom > 0 else 0.0
            s = min(max(s, 0.0), 1.0)
            if abs(v.z - (za + s * ab)) <= v.radius:
                return v
        return None

    def trace(self, z0, *, stop_at_vertices=True, max_steps=MAX_TRACE_STEPS):
        """March along the level set from z0.

        Returns (ts, zs, end_vertex, closed).  The trace runs until it either
        returns to its start with a parameter span that is a multiple of 2*pi
        (closed = True) or, when stop_at_vertices is set, enters the branch
        neighborhood of a vertex.
        """
        w0 = self.omega(z0)
        t = math.atan2(w0.imag, w0.real)
        z, _ = self.correct(z0, t)
        if z is None:
            raise NonConvergence(f"could not settle seed {z0} onto the level set")
        t0 = t
        zstart = z
        ts = [t]
        zs = [z]
        h = 0.01
        for _ in range(max_steps):
            gp = self.gamma_prime(z)
            speed = abs(gp)
            # spatial caps: global resolution plus geometric approach to vertices
            ds_cap = 0.05 * (1.0 + abs(z))
            if stop_at_vertices and self.vertices:
                v, ratio = self._nearest_vertex(z)
                ds_cap = min(ds_cap, max(v.radius / 4.0, ratio * v.radius / 5.0))
            dt = min(h, ds_cap / speed) if speed > 0 else h
            while True:
                # land exactly on a 2*pi multiple when stepping across one
                k = math.floor((t + dt - t0) / TWO_PI + 1e-12)
                t_next = t + dt
                hit_wrap = False
                if k >= 1 and (t - t0) < k * TWO_PI - 1e-12:
                    t_next = t0 + k * TWO_PI
                    hit_wrap = True
                z_pred = z + (t_next - t) * gp
                z_corr, iters = self.correct(z_pred, t_next)
                ok = z_corr is not None and abs(z_corr - z_pred) <= max(
                    0.5 * abs(t_next - t) * speed, 1e-9
                )
                if ok:
                    break
                dt *= 0.5
                if dt < T_STEP_MIN * 1e-4:
                    raise MaxSteps(
                        f"corrector stalled near z = {z} (step underflow)"
                    )
            if iters <= 3:
                h = min(h * T_STEP_GROW, T_STEP_MAX)
            else:
                h = max(h * 0.7, T_STEP_MIN)
            if stop_at_vertices and self.vertices and len(ts) > 3:
                # segment test: the shell cannot be jumped over in one step
                vhit = self._segment_shell_hit(z, z_corr)
                if vhit is not None:
                    return np.array(ts), np.array(zs), vhit, False
            t, z = t_next, z_corr
            ts.append(t)
            zs.append(z)
            if hit_wrap and abs(z - zstart) <= CLOSE_Z_TOL * max(1.0, abs(zstart)):
                zs[-1] = zstart  # snap the closure point
                return np.array(ts), np.array(zs), None, True
        raise MaxSteps(f"no closure after {max_steps} steps from seed {z0}")


def critical_seeds(omega, n_phases=N_SEED_PHASES):
    """Points with omega(z) on each of n_phases unit-modulus probe values."""
    if omega.is_constant():
        val = omega.constant_value()
        if abs(abs(val) - 1.0) <= 1e-12:
            raise DegenerateDilatation(
                "dilatation is a unimodular constant; critical set is not a curve"
            )
        return []
    seeds = []
    for k in range(n_phases):
        u = cmath.exp(2j * math.pi * (k + 0.5) / n_phases)
        p = omega.num - u * omega.den
        if p.degree < 1:
            continue
        for r in poly_roots(p):
            r = complex(r)
            w = omega(r)
            if not cmath.isfinite(w):
                continue
            if abs(abs(w) - 1.0) <= ON_CURVE_TOL:
                seeds.append(r)
    dedup = []
    for s in seeds:
        if not any(abs(s - t) <= 1e-9 * max(1.0, abs(t)) for t in dedup):
            dedup.append(s)
    return dedup


def branch_vertices(omega):
    """Zeros of omega' that lie on the unit-modulus level set, with arc order.

    The local data (order n and leading Taylor ratio c_n) come from the
    series expansion of omega at the vertex, which needs no further root
    finding.
    """
    from .numerics import laurent_coeffs, polished_clusters

    op = omega.derivative()
    if op.num.degree < 1:
        return []
    verts = []
    for z, mult in polished_clusters(op.num):
        z = complex(z)
        w = omega(z)
        if not (cmath.isfinite(w) and abs(abs(w) - 1.0) <= ON_CURVE_TOL):
            continue
        tay = laurent_coeffs(omega, z, 0, mult + 2)
        w0 = tay[0]
        top = max(abs(v) for v in tay.values())
        n = None
        for k in range(1, mult + 3):
            if abs(tay.get(k, 0j)) > 1e-9 * top:
                n = k
                break
        if n is None or n < 2:
            continue  # simple level-set point; clustering overestimated
        cn = tay[n] / w0
        # keep arcs outside the flat zone where |omega'| ~ n |c_n| r^(n-1)
        # is too small for the corrector to be stable
        r = (1e-4 / (n * abs(cn))) ** (1.0 / (n - 1))
        radius = min(max(r, BRANCH_RADIUS), 0.05)
        verts.append(Vertex(z=z, order=n, radius=radius, c_lead=cn))
    for i, v in enumerate(verts):
        v.id = i
    return verts


def _outgoing_directions(vertex):
    """Unit directions of the n outgoing level-set rays at a vertex.

    Near the vertex omega(z) ~ omega(v) (1 + c_n (z-v)^n); rays with
    c_n e^{i n phi} = +i |c_n| leave with increasing parameter.
    """
    n = vertex.order
    base = (math.pi / 2.0 - cmath.phase(vertex.c_lead)) / n
    return [cmath.exp(1j * (base + TWO_PI * k / n)) for k in range(n)]


def trace_curve(fmap, seed):
    """Trace the closed critical curve through a seed point.

    Raises HitBranchPoint when the component self-intersects (the caller
    should build arcs and stitch instead).
    """
    omega = fmap.dilatation()
    tracer = _Tracer(omega)
    tracer.vertices = branch_vertices(omega)
    ts, zs, vertex, closed = tracer.trace(seed, stop_at_vertices=True)
    if not closed:
        raise HitBranchPoint(vertex.z)
    return CriticalCurve(component_id=0, ts=ts, zs=zs)


def _trace_arcs(tracer):
    """Trace every arc by launching from each vertex along its outgoing rays."""
    arcs = []
    for v in tracer.vertices:
        for u in _outgoing_directions(v):
            z_launch = v.z + 3.0 * v.radius * u
            ts, zs, v_end, closed = tracer.trace(z_launch, stop_at_vertices=True)
            if closed or v_end is None:
                raise UnbalancedVertex(
                    f"arc from vertex {v.z} did not terminate at a vertex"
                )
            arcs.append(Arc(ts=ts, zs=zs, v_from=v.id, v_to=v_end.id))
    return arcs


def stitch_component(omega, arcs, vertices):
    """Join directed arcs of one component into a single closed curve.

    Uses Hierholzer's Euler-circuit construction on the directed multigraph
    whose vertices are the omega' zeros and whose edges are the arcs.  Arc
    orientation (increasing parameter) is preserved, and the vertex itself is
    inserted as a sample at every seam so the assembled curve closes exactly.
    """
    vmap = {v.id: v for v in vertices}
    out = {}
    for i, a in enumerate(arcs):
        out.setdefault(a.v_from, []).append(i)
    indeg = {}
    for a in arcs:
        indeg[a.v_to] = indeg.get(a.v_to, 0) + 1
    for vid, lst in out.items():
        if indeg.get(vid, 0) != len(lst):
            raise UnbalancedVertex(
                f"vertex {vmap[vid].z}: in-degree {indeg.get(vid, 0)} != "
                f"out-degree {len(lst)}"
            )
    # Hierholzer with edge tracking: entries are (vertex, edge used to arrive)
    start = arcs[0].v_from
    stack = [(start, None)]
    edge_circuit = []
    while stack:
        v, e_in = stack[-1]
        if out.get(v):
            e = out[v].pop()
            stack.append((arcs[e].v_to, e))
        else:
            stack.pop()
            if e_in is not None:
                edge_circuit.append(e_in)
    edge_order = edge_circuit[::-1]
    if len(edge_order) != len(arcs):
        raise UnbalancedVertex("Euler circuit did not exhaust all arcs")

    def vertex_phase_gap(z_from, z_to):
        """Positive parameter increment between two nearby on-curve points."""
        d = _wrap_pi(cmath.phase(omega(z_to)) - cmath.phase(omega(z_from)))
        return max(d, 1e-12)

    ts_out = []
    zs_out = []
    seams = []
    t_run = 0.0
    first = arcs[edge_order[0]]
    v0 = vmap[first.v_from]
    ts_out.append(0.0)
    zs_out.append(v0.z)
    seams.append(0)
    for e in edge_order:
        a = arcs[e]
        local = a.ts - a.ts[0]
        t_run += vertex_phase_gap(zs_out[-1], a.zs[0])
        ts_out.extend((local + t_run).tolist())
        zs_out.extend(a.zs.tolist())
        t_run += float(local[-1])
        vnext = vmap[a.v_to]
        t_run += vertex_phase_gap(a.zs[-1], vnext.z)
        seams.append(len(ts_out))
        ts_out.append(t_run)
        zs_out.append(vnext.z)
    vids = {a.v_from for a in arcs} | {a.v_to for a in arcs}
    curve = CriticalCurve(
        component_id=-1,
        ts=np.array(ts_out),
        zs=np.array(zs_out, dtype=complex),
        vertices=[(vmap[i].z, vmap[i].order) for i in sorted(vids)],
        seam_indices=tuple(seams),
    )
    return curve, edge_order


def isolated_points(fmap):
    """Common zeros of both Wirtinger derivatives off the unit-modulus set."""
    hd = fmap.analytic_derivative()
    gd = fmap.coanalytic_derivative()
    out = []
    if hd.is_zero() and gd.is_zero():
        return out
    primary = hd if not hd.is_zero() else gd
    other = gd if not hd.is_zero() else hd
    if primary.num.degree < 1:
        return out
    for z, _mult in cluster_roots(poly_roots(primary.num)):
        z = complex(z)
        if not other.is_zero():
            ov = other(z)
            oscale = max(other.num.magnitude_bound(z), 1.0) / max(
                abs(other.den(z)), 1e-300
            )
            if not (cmath.isfinite(ov) and abs(ov) <= 1e-8 * oscale):
                continue
        try:
            w = fmap.dilatation()(z)
            wabs = abs(w) if cmath.isfinite(w) else math.inf
        except Exception:
            wabs = math.inf
        if abs(wabs - 1.0) > ON_CURVE_TOL:
            out.append(IsolatedCriticalPoint(z=z, omega_limit_abs=wabs))
    return out


def compute_critical_set(fmap):
    """Full critical set: stitched closed curves plus isolated points."""
    from .errors import DegenerateAnalyticPart

    isolated = isolated_points(fmap)
    try:
        omega = fmap.dilatation()
    except DegenerateAnalyticPart:
        return CriticalSet(curves=[], arcs=[], vertices=[], isolated=isolated)
    if omega.is_zero() or omega.is_constant():
        seeds = critical_seeds(omega)  # raises DegenerateDilatation if |const| = 1
        return CriticalSet(curves=[], arcs=[], vertices=[], isolated=isolated)
    seeds = critical_seeds(omega)
    vertices = branch_vertices(omega)
    tracer = _Tracer(omega)
    tracer.vertices = vertices
    curves = []
    arcs_all = []
    if vertices:
        arcs = _trace_arcs(tracer)
        # connected components of the vertex graph
        parent = {v.id: v.id for v in vertices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a in arcs:
            ra, rb = find(a.v_from), find(a.v_to)
            if ra != rb:
                parent[ra] = rb
        groups = {}
        for a in arcs:
            groups.setdefault(find(a.v_from), []).append(a)
        for group_arcs in groups.values():
            vids = {a.v_from for a in group_arcs} | {a.v_to for a in group_arcs}
            group_vertices = [v for v in vertices if v.id in vids]
            curve, _ = stitch_component(omega, group_arcs, group_vertices)
            curve.component_id = len(curves)
            for a in group_arcs:
                a.curve_id = curve.component_id
            curves.append(curve)
            arcs_all.extend(group_arcs)
    # Jordan components: trace seeds not already on a known curve
    for seed in seeds:
        if _near_any_vertex(seed, vertices) or _near_any_curve(omega, seed, curves):
            continue
        ts, zs, vertex, closed = tracer.trace(seed, stop_at_vertices=True)
        if not closed:
            # seed's component has a vertex; it is already covered by stitching
            continue
        curve = CriticalCurve(component_id=len(curves), ts=ts, zs=zs)
        arc = Arc(ts=ts, zs=zs, v_from=None, v_to=None, curve_id=curve.component_id)
        curves.append(curve)
        arcs_all.append(arc)
    return CriticalSet(curves=curves, arcs=arcs_all, vertices=vertices, isolated=isolated)


def polyline_distance(z, zs):
    """Distance from a point to a sampled polyline (segment-accurate)."""
    if len(zs) < 2:
        return abs(z - zs[0]) if len(zs) else math.inf
    a = zs[:-1]
    b = zs[1:]
    ab = b - a
    denom = np.abs(ab) ** 2
    denom = np.where(denom == 0, 1.0, denom)
    s = np.clip(((z - a) * np.conj(ab)).real / denom, 0.0, 1.0)
    proj = a + s * ab
    return float(np.min(np.abs(z - proj)))


def distance_to_curve(omega, curve, z, n_probe=4):
    """Distance from an on-level-set point to the exact curve through the samples.

    Polyline distance only resolves to the chord sagitta; here the nearest
    samples are Newton-corrected to the phase of z, which collapses to ~1e-11
    when z lies on this component.
    """
    tracer = _Tracer(omega)
    idx = np.argsort(np.abs(curve.zs - z))[:n_probe]
    target = cmath.phase(omega(z))
    best = math.inf
    for i in idx:
        t_i = float(curve.ts[i])
        t_corr = t_i + _wrap_pi(target - t_i)
        zc, _ = tracer.correct(complex(curve.zs[i]), t_corr)
        if zc is not None:
            best = min(best, abs(zc - z))
    return best


def _near_any_curve(omega, z, curves, tol=SEED_REACH_TOL):
    return any(
        distance_to_curve(omega, c, z) <= tol * max(1.0, abs(z)) for c in curves
    )


def _near_any_vertex(z, vertices):
    return any(abs(z - v.z) <= 5.0 * v.radius for v in vertices)


def seed_coverage(fmap, critical_set):
    """Max distance from any probe seed to the traced curves (0 when no seeds)."""
    omega = fmap.dilatation()
    seeds = critical_seeds(omega)
    worst = 0.0
    for s in seeds:
        if _near_any_vertex(s, critical_set.vertices):
            continue
        d = min(
            (distance_to_curve(omega, c, s) for c in critical_set.curves),
            default=math.inf,
        )
        worst = max(worst, d)
    return worst
