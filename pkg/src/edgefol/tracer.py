"""Integral-curve tracing on the lifted surface M and local portrait oracles.

Curves are integrated in ambient (u, v, p) with classical fixed-step RK4 on
the lifted field, which is exactly tangent to every level set of F, so the
on-surface residual is pure roundoff; a periodic Newton projection in p mops
that up.  Charts are handled by one integrator core: the chart-q field of
(A, B, C) equals the chart-p field of the u<->v swapped tensor, so a single
code path serves both, and whole portraits integrate as one batch per chart
and time direction.

The module also provides the two independent oracles used to validate the
classifier: a sector-count probe around each lifted singular point and a
cusp-order detector for projected curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .bde import (
    BdeField,
    CHART_P,
    CHART_Q,
    Case,
    CubicAnalysis,
    LiftedEquation,
    NODE,
    SADDLE,
    cubic_analysis,
    delta_and_case,
    lift,
    restricted_jacobian,
    solve_fiber_coordinate,
)
from .errors import (
    ChartBreakdown,
    EdgefolError,
    FitIllConditioned,
    SeedOffSurface,
    WindowTooSmall,
)
from .geometry import surface_polynomials
from .jets import EdgeJet
from .poly import CompiledPolySet

SEED_RESIDUAL_TOL = 1e-8
CHART_BOUND = 1e3

TERM_BOX = "box_exit"
TERM_CAP = "step_cap"
TERM_SINGULAR = "singular_point"
TERM_CHART = "chart_breakdown"
TERM_LANDED = "landed"
TERM_EXITED = "exited"


@dataclass(frozen=True)
class TraceConfig:
    box: float = 0.5
    step: float = 1e-3
    max_steps: int = 6000
    seeds_per_side: int = 24
    separatrix_offset: float = 1e-4
    project_every: int = 50
    singular_stop: float = 1e-5
    chart_bound: float = CHART_BOUND
    grid: int = 512


@dataclass
class TracedCurve:
    """One integral curve of the lifted field, both time directions joined."""

    samples: np.ndarray          # (n, 3) rows (u, v, chart variable)
    t: np.ndarray                # chordal arclength along the samples
    chart: str
    termination: str             # forward-time stop reason
    termination_backward: str
    is_separatrix: bool = False
    max_residual: float = 0.0
    seed_index: int = -1
    seed_sample: int = 0         # position of the seed within samples

    @property
    def projected(self) -> np.ndarray:
        return self.samples[:, :2]

    def __len__(self):
        return len(self.samples)


@dataclass
class Portrait:
    curves: list
    singular_points: tuple       # ((chart value, lifted type), ...) over the origin
    discriminant_locus: list     # polylines of {delta = 0}
    box: float
    case: Case
    analysis: CubicAnalysis | None = None
    warnings: int = 0

    @property
    def separatrices(self):
        return [c for c in self.curves if c.is_separatrix]


# --- batched integrator core ---

class _ChartCore:
    """Compiled chart-p field of a BDE, with u/v swapping for chart q."""

    def __init__(self, bde: BdeField, chart: str):
        work = bde if chart == CHART_P else bde.swapped()
        self.chart = chart
        self.cset = CompiledPolySet([
            work.A, work.B, work.C,
            work.A.diff("u"), work.B.diff("u"), work.C.diff("u"),
            work.A.diff("v"), work.B.diff("v"), work.C.diff("v"),
        ])

    def to_internal(self, states):
        states = np.atleast_2d(np.asarray(states, dtype=float)).copy()
        if self.chart == CHART_Q:
            states[:, [0, 1]] = states[:, [1, 0]]
        return states

    def to_public(self, states):
        states = np.asarray(states, dtype=float).copy()
        if self.chart == CHART_Q:
            states[:, [0, 1]] = states[:, [1, 0]]
        return states

    def rhs(self, S, normalize=False):
        u, v, p = S[:, 0], S[:, 1], S[:, 2]
        A, B, C, Au, Bu, Cu, Av, Bv, Cv = self.cset.values(u, v)
        Fp = 2.0 * (A * p + B)
        Fu = (Au * p + 2.0 * Bu) * p + Cu
        Fv = (Av * p + 2.0 * Bv) * p + Cv
        out = np.empty_like(S)
        out[:, 0] = Fp
        out[:, 1] = p * Fp
        out[:, 2] = -(Fu + p * Fv)
        if normalize:
            norms = np.sqrt(np.einsum("ij,ij->i", out, out))
            out /= (norms + 1e-300)[:, None]
        return out

    def residual(self, S):
        u, v, p = S[:, 0], S[:, 1], S[:, 2]
        A, B, C = self.cset.values(u, v)[:3]
        return (A * p + 2.0 * B) * p + C

    def residual_and_fp(self, S):
        u, v, p = S[:, 0], S[:, 1], S[:, 2]
        A, B, C = self.cset.values(u, v)[:3]
        return (A * p + 2.0 * B) * p + C, 2.0 * (A * p + B)

    def project_gradient(self, S):
        """One Newton step for F = 0 along the full gradient (in place).

        Unlike the p-only projection this also works where F_p vanishes
        (near the discriminant and in slow channels along the edge)."""
        u, v, p = S[:, 0], S[:, 1], S[:, 2]
        A, B, C, Au, Bu, Cu, Av, Bv, Cv = self.cset.values(u, v)
        F = (A * p + 2.0 * B) * p + C
        Fu = (Au * p + 2.0 * Bu) * p + Cu
        Fv = (Av * p + 2.0 * Bv) * p + Cv
        Fp = 2.0 * (A * p + B)
        gn2 = Fu * Fu + Fv * Fv + Fp * Fp
        ok = gn2 > 1e-24
        scale = np.where(ok, F / np.where(ok, gn2, 1.0), 0.0)
        S[:, 0] -= scale * Fu
        S[:, 1] -= scale * Fv
        S[:, 2] -= scale * Fp


@dataclass
class _BatchResult:
    status: np.ndarray           # termination string per state
    final: np.ndarray            # (n, 3) internal coordinates
    steps: np.ndarray
    paths: list | None           # per-state (k, 3) internal samples incl. seed


_RECORD_BUDGET = 6_000_000  # state rows held in the trajectory buffer


def _integrate_batch(core: _ChartCore, states, *, step, max_steps,
                     box=None, singular=(), singular_stop=1e-5,
                     chart_bound=CHART_BOUND, project_every=50,
                     normalize=False, record=True, project_mode="p",
                     ball_center=None, ball_land=None, ball_exit=None,
                     ball_transform=None):
    """Fixed-step RK4 on the lifted field for a batch of internal states.

    Stopping tests per state: box exit on the base coordinates, proximity to
    singular points (0, 0, p_i), chart-variable blowup, and optionally
    land/exit radii around `ball_center` measured in the surface-graph
    coordinates (first base coordinate, chart variable), after an optional
    2x2 `ball_transform` (used to measure in eigencoordinates, where the
    linearized flow has no transient growth).  Terminated states freeze; the
    loop ends when none remain.
    """
    states = np.array(states, dtype=float)
    n = len(states)
    if record and n * (max_steps + 1) > _RECORD_BUDGET:
        chunk = max(1, _RECORD_BUDGET // (max_steps + 1))
        parts = [
            _integrate_batch(
                core, states[i:i + chunk], step=step, max_steps=max_steps,
                box=box, singular=singular, singular_stop=singular_stop,
                chart_bound=chart_bound, project_every=project_every,
                normalize=normalize, record=record, project_mode=project_mode,
                ball_center=ball_center, ball_land=ball_land,
                ball_exit=ball_exit, ball_transform=ball_transform)
            for i in range(0, n, chunk)
        ]
        return _BatchResult(
            status=np.concatenate([p.status for p in parts]),
            final=np.vstack([p.final for p in parts]),
            steps=np.concatenate([p.steps for p in parts]),
            paths=[path for p in parts for path in p.paths],
        )

    S = states
    status = np.array([""] * n, dtype=object)
    steps_used = np.zeros(n, dtype=int)
    buffer = None
    if record:
        buffer = np.empty((n, max_steps + 1, 3))
        buffer[:, 0] = S
    active = np.arange(n)
    sing = np.asarray(singular, dtype=float)
    h = step

    # Near a vertical direction the chart variable escapes to infinity in
    # finite time and RK4 steps grow without bound.  A step larger than a few
    # percent of the current chart value is rejected rather than recorded:
    # the curve freezes at its last accepted sample (re-projected onto M)
    # with a chart-breakdown status so the caller can continue in the dual
    # chart, where the motion is slow again.
    cap_base = max(0.05, 50.0 * abs(step))

    def _freeze_breakdown(rows, cur):
        frozen = cur[rows]
        f, fp = core.residual_and_fp(frozen)
        ok = np.abs(fp) > 1e-12
        frozen[ok, 2] -= f[ok] / fp[ok]
        for local, row in enumerate(rows):
            idx = active[row]
            status[idx] = TERM_CHART
            S[idx] = frozen[local]
            if record:
                buffer[idx, steps_used[idx]] = frozen[local]

    for k in range(1, max_steps + 1):
        cur = S[active]
        k1 = core.rhs(cur, normalize)
        k2 = core.rhs(cur + 0.5 * h * k1, normalize)
        k3 = core.rhs(cur + 0.5 * h * k2, normalize)
        k4 = core.rhs(cur + h * k3, normalize)
        nxt = cur + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        move = np.abs(nxt - cur)
        # scheduled projection, plus a safety projection wherever the chart
        # variable is moving fast (stiff approach to a vertical direction,
        # where the 50-step cadence provably undershoots)
        stiff = move[:, 2] > 5.0 * abs(step)
        scheduled = bool(project_every and k % project_every == 0)
        if scheduled and project_mode == "gradient":
            core.project_gradient(nxt)
        elif scheduled or np.any(stiff):
            rows = np.arange(len(nxt)) if scheduled else np.nonzero(stiff)[0]
            f, fp = core.residual_and_fp(nxt[rows])
            ok = np.abs(fp) > 1e-12
            sel = rows[ok]
            nxt[sel, 2] -= f[ok] / fp[ok]
        wild = (
            ~np.all(np.isfinite(nxt), axis=1)
            | (np.abs(nxt[:, 2]) > chart_bound)
            | (move[:, 2] > np.maximum(20.0 * abs(step),
                                       0.02 * (1.0 + np.abs(cur[:, 2]))))
            | (np.maximum(move[:, 0], move[:, 1]) > cap_base)
        )
        if np.any(wild):
            _freeze_breakdown(np.nonzero(wild)[0], cur)
            good = ~wild
            S[active[good]] = nxt[good]
            steps_used[active[good]] = k
            if record:
                buffer[active[good], k] = nxt[good]
            active = active[good]
            nxt = nxt[good]
            if active.size == 0:
                break
        else:
            S[active] = nxt
            steps_used[active] = k
            if record:
                buffer[active, k] = nxt

        done = np.zeros(len(active), dtype=bool)

        def _finish(mask, term):
            nonlocal done
            for row in np.nonzero(mask & ~done)[0]:
                status[active[row]] = term
            done |= mask

        if box is not None:
            _finish((np.abs(nxt[:, 0]) > box) | (np.abs(nxt[:, 1]) > box), TERM_BOX)
        if sing.size:
            d2 = (nxt[:, 0, None] ** 2 + nxt[:, 1, None] ** 2
                  + (nxt[:, 2, None] - sing[None, :]) ** 2)
            _finish(d2.min(axis=1) < singular_stop**2, TERM_SINGULAR)
        if ball_center is not None:
            dw = nxt[:, 0] - ball_center[0]
            dp = nxt[:, 2] - ball_center[1]
            if ball_transform is not None:
                dw, dp = (ball_transform[0, 0] * dw + ball_transform[0, 1] * dp,
                          ball_transform[1, 0] * dw + ball_transform[1, 1] * dp)
            r2 = dw * dw + dp * dp
            if ball_land is not None:
                _finish(r2 < ball_land**2, TERM_LANDED)
            if ball_exit is not None:
                _finish(r2 > ball_exit**2, TERM_EXITED)

        active = active[~done]
        if active.size == 0:
            break

    for idx in active:
        status[idx] = TERM_CAP
    paths = None
    if record:
        paths = [buffer[i, :steps_used[i] + 1].copy() for i in range(n)]
    return _BatchResult(status=status, final=S, steps=steps_used, paths=paths)


def _clip_to_box(path: np.ndarray, box: float, core: _ChartCore) -> np.ndarray:
    """Replace an out-of-box final sample by its interpolation to the boundary.

    The interpolated chart variable is Newton-polished back onto {F = 0} so
    the clipped sample satisfies the on-surface residual bound like every
    other sample.
    """
    if len(path) < 2:
        return path
    last, prev = path[-1], path[-2]
    if max(abs(last[0]), abs(last[1])) <= box:
        return path
    spans = []
    for i in range(2):
        if abs(last[i]) > box and abs(last[i] - prev[i]) > 0:
            target = math.copysign(box, last[i])
            spans.append((target - prev[i]) / (last[i] - prev[i]))
    s = min((x for x in spans if 0.0 <= x <= 1.0), default=1.0)
    path = path.copy()
    clipped = prev + s * (last - prev)
    for _ in range(8):
        f, fp = core.residual_and_fp(clipped[None, :])
        if abs(fp[0]) < 1e-12 or abs(f[0]) < 1e-15:
            break
        clipped[2] -= f[0] / fp[0]
    path[-1] = clipped
    return path


def _arclength(samples: np.ndarray) -> np.ndarray:
    if len(samples) == 1:
        return np.zeros(1)
    d = np.sqrt(np.sum(np.diff(samples, axis=0) ** 2, axis=1))
    return np.concatenate([[0.0], np.cumsum(d)])


def _stitch(core, back_path, fwd_path, back_status, fwd_status, box, chart,
            seed_index=-1, is_separatrix=False) -> TracedCurve:
    if back_status == TERM_BOX:
        back_path = _clip_to_box(back_path, box, core)
    if fwd_status == TERM_BOX:
        fwd_path = _clip_to_box(fwd_path, box, core)
    if len(fwd_path) > 1:
        samples_internal = np.vstack([back_path[::-1], fwd_path[1:]])
    else:
        samples_internal = back_path[::-1]
    samples = core.to_public(samples_internal)
    return TracedCurve(
        samples=samples,
        t=_arclength(samples),
        chart=chart,
        termination=fwd_status,
        termination_backward=back_status,
        is_separatrix=is_separatrix,
        max_residual=float(np.max(np.abs(core.residual(samples_internal)))),
        seed_index=seed_index,
        seed_sample=len(back_path) - 1,
    )


def integrate_lifted(eq: LiftedEquation, seed, step: float, max_steps: int,
                     box: float, *, singular_points=(), singular_stop=1e-5,
                     project_every=50, chart_bound=CHART_BOUND,
                     seed_tol=SEED_RESIDUAL_TOL) -> TracedCurve:
    """Trace both time directions of the lifted field through one seed.

    The seed must satisfy |F(seed)| <= seed_tol (SeedOffSurface otherwise);
    the two half-curves are concatenated with the seed in the middle.  A
    chart-variable blowup past `chart_bound` raises ChartBreakdown carrying
    the partial curve, so the caller can re-seed in the dual chart.
    """
    seed = np.asarray(seed, dtype=float)
    fval = float(eq.F(*seed))
    scale = max(1.0, eq.bde.coefficient_scale())
    if abs(fval) > seed_tol * scale:
        raise SeedOffSurface(f"|F(seed)| = {abs(fval):.3e} exceeds {seed_tol:.1e}")

    core = _ChartCore(eq.bde, eq.chart)
    internal = core.to_internal(seed[None, :])
    results = {}
    for direction in (-1.0, +1.0):
        results[direction] = _integrate_batch(
            core, internal, step=direction * step, max_steps=max_steps,
            box=box, singular=singular_points, singular_stop=singular_stop,
            chart_bound=chart_bound, project_every=project_every,
        )
    back, fwd = results[-1.0], results[+1.0]
    curve = _stitch(core, np.array(back.paths[0]), np.array(fwd.paths[0]),
                    back.status[0], fwd.status[0], box, eq.chart)
    if TERM_CHART in (curve.termination, curve.termination_backward):
        src = fwd if curve.termination == TERM_CHART else back
        state = core.to_public(src.final)[0]
        raise ChartBreakdown(
            f"chart variable exceeded {chart_bound:g}",
            partial=curve, state=tuple(state),
        )
    return curve


# --- seeding ---

def _quad_roots(a, b, c):
    """Real roots of a x^2 + b x + c, numerically stable."""
    if a == 0.0:
        return [] if b == 0.0 else [-c / b]
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return []
    s = math.sqrt(disc)
    q = -(b + math.copysign(s, b)) / 2.0 if b != 0.0 else s / 2.0
    return [q / a, c / q] if q != 0.0 else [0.0, -b / a]


def direction_roots(bde: BdeField, u: float, v: float):
    """Projective solution directions of the BDE at one base point.

    Returns (chart, value) pairs, each in the chart where the direction
    coordinate has magnitude <= 1, so seeds stay well conditioned.
    """
    a = float(bde.A(u, v))
    b = float(bde.B(u, v))
    c = float(bde.C(u, v))
    if max(abs(a), abs(b), abs(c)) == 0.0:
        return []
    if b * b - a * c < 0.0:
        return []
    dirs = []
    if abs(a) >= abs(c) and a != 0.0:
        for p in _quad_roots(a, 2.0 * b, c):
            dirs.append((1.0, p))
    elif c != 0.0:
        for s in _quad_roots(c, 2.0 * b, a):
            dirs.append((s, 1.0))
    else:
        dirs = [(1.0, 0.0), (0.0, 1.0)]
    seeds = []
    for du, dv in dirs:
        if abs(dv) <= abs(du):
            seeds.append((CHART_P, dv / du))
        else:
            seeds.append((CHART_Q, du / dv))
    return sorted(set(seeds))


def _separatrix_seeds(bde: BdeField, analysis: CubicAnalysis, offset: float):
    """Four seeds per saddle: +-offset along each eigenvector of the lifted
    linearization, pushed back onto M by a Newton solve."""
    eq = lift(bde, analysis.chart)
    seeds = []
    for data in analysis.per_root:
        if data.lifted_type != SADDLE:
            continue
        jac = restricted_jacobian(eq, data.root)
        _, eigvecs = np.linalg.eig(jac)
        for col in range(2):
            vec = np.real(eigvecs[:, col])
            norm = np.linalg.norm(vec)
            if norm == 0.0:
                continue
            vec = vec / norm
            for sign in (+1.0, -1.0):
                dv, dp = sign * offset * vec
                p = data.root + dp
                if abs(dv) < 1e-14:
                    seeds.append((analysis.chart, (0.0, 0.0, p)))
                    continue
                w = solve_fiber_coordinate(eq, dv, p, start=data.root * dv)
                state = (w, dv, p) if eq.chart == CHART_Q else (dv, w, p)
                seeds.append((eq.chart, state))
    return seeds


def _trace_worklist(bde: BdeField, worklist, config: TraceConfig,
                    singular_by_chart) -> tuple[list, int]:
    """Batched two-direction integration of (chart, state, is_separatrix)."""
    curves_at = {}
    warnings = 0
    continuations = []
    by_chart = {}
    for index, (chart, state, is_sep) in enumerate(worklist):
        by_chart.setdefault(chart, []).append((index, state, is_sep))

    for chart, entries in sorted(by_chart.items()):
        core = _ChartCore(bde, chart)
        states = core.to_internal(np.array([e[1] for e in entries]))
        resid = np.abs(core.residual(states))
        scale = max(1.0, bde.coefficient_scale())
        ok = resid <= SEED_RESIDUAL_TOL * scale
        warnings += int(np.sum(~ok))
        entries = [e for e, good in zip(entries, ok) if good]
        if not entries:
            continue
        states = states[ok]
        sing = singular_by_chart.get(chart, ())
        runs = {}
        for direction in (-1.0, +1.0):
            runs[direction] = _integrate_batch(
                core, states, step=direction * config.step,
                max_steps=config.max_steps, box=config.box, singular=sing,
                singular_stop=config.singular_stop,
                chart_bound=config.chart_bound,
                project_every=config.project_every,
            )
        back, fwd = runs[-1.0], runs[+1.0]
        for row, (index, _state, is_sep) in enumerate(entries):
            curve = _stitch(core, np.array(back.paths[row]),
                            np.array(fwd.paths[row]), back.status[row],
                            fwd.status[row], config.box, chart,
                            seed_index=index, is_separatrix=is_sep)
            curves_at[index] = curve
            for run in (back, fwd):
                if run.status[row] == TERM_CHART:
                    state = core.to_public(run.final[row][None, :])[0]
                    # the exceptional fiber projects to a point: nothing to
                    # continue there
                    on_fiber = max(abs(state[0]), abs(state[1])) < 1e-12
                    if abs(state[2]) > 0 and not on_fiber:
                        dual = CHART_P if chart == CHART_Q else CHART_Q
                        continuations.append(
                            (dual, (state[0], state[1], 1.0 / state[2]), is_sep))
    curves = [curves_at[i] for i in sorted(curves_at)]
    return curves, warnings, continuations


def trace_portrait(bde: BdeField, config: TraceConfig = TraceConfig(),
                   analysis: CubicAnalysis | None = None) -> Portrait:
    """Phase portrait of a BDE.

    Seeds a uniform grid on each box side (one seed per direction branch),
    adds four separatrix seeds per lifted saddle, traces everything in
    batched RK4, and extracts the discriminant locus by marching squares.
    Failed seeds are dropped and counted in `warnings`.
    """
    delta, case = delta_and_case(bde)
    warnings = 0
    if case is Case.CASE3 and analysis is None:
        try:
            analysis = cubic_analysis(lift(bde, CHART_Q))
        except EdgefolError:
            analysis = None
            warnings += 1

    worklist = []
    b = config.box
    offsets = -b + 2.0 * b * (np.arange(config.seeds_per_side) + 0.5) \
        / config.seeds_per_side
    sides = ([(float(t), -b) for t in offsets] + [(float(t), b) for t in offsets]
             + [(-b, float(t)) for t in offsets] + [(b, float(t)) for t in offsets])
    for u, v in sides:
        for chart, value in direction_roots(bde, u, v):
            if abs(value) <= config.chart_bound:
                worklist.append((chart, (u, v, value), False))

    singular_points = ()
    singular_by_chart = {}
    if analysis is not None:
        singular_points = tuple((r.root, r.lifted_type) for r in analysis.per_root)
        roots = [r.root for r in analysis.per_root]
        singular_by_chart[analysis.chart] = tuple(roots)
        dual = CHART_P if analysis.chart == CHART_Q else CHART_Q
        singular_by_chart[dual] = tuple(1.0 / r for r in roots if r != 0.0)
        try:
            for chart, state in _separatrix_seeds(bde, analysis,
                                                  config.separatrix_offset):
                worklist.append((chart, state, True))
        except EdgefolError:
            warnings += 1

    curves, warn2, continuations = _trace_worklist(
        bde, worklist, config, singular_by_chart)
    warnings += warn2
    if continuations:
        more, warn3, _ = _trace_worklist(bde, continuations, config,
                                         singular_by_chart)
        for c in more:
            c.seed_index = -1
        curves.extend(more)
        warnings += warn3

    locus = discriminant_locus(delta, config.box, config.grid)
    return Portrait(curves=curves, singular_points=singular_points,
                    discriminant_locus=locus, box=config.box, case=case,
                    analysis=analysis, warnings=warnings)


# --- discriminant locus by marching squares ---

def discriminant_locus(delta, box: float, grid: int = 512):
    """Polylines of {delta = 0} inside the box, by marching squares."""
    xs = np.linspace(-box, box, grid)
    cp = delta.compiled()
    U = np.vander(xs, cp.du + 1, increasing=True)
    V = np.vander(xs, cp.dv + 1, increasing=True)
    vals = U @ cp.mat @ V.T       # vals[i, j] = delta(xs[i], xs[j])
    segments = []
    pos = vals > 0.0

    def interp(x0, y0, f0, x1, y1, f1):
        s = f0 / (f0 - f1)
        return (x0 + s * (x1 - x0), y0 + s * (y1 - y0))

    mixed = np.nonzero(
        (pos[:-1, :-1] != pos[1:, :-1]) | (pos[:-1, :-1] != pos[:-1, 1:])
        | (pos[:-1, :-1] != pos[1:, 1:])
    )
    for i, j in zip(*mixed):
        x0, x1 = xs[i], xs[i + 1]
        y0, y1 = xs[j], xs[j + 1]
        f00, f10 = vals[i, j], vals[i + 1, j]
        f01, f11 = vals[i, j + 1], vals[i + 1, j + 1]
        crossings = []
        if (f00 > 0) != (f10 > 0):
            crossings.append(interp(x0, y0, f00, x1, y0, f10))
        if (f10 > 0) != (f11 > 0):
            crossings.append(interp(x1, y0, f10, x1, y1, f11))
        if (f01 > 0) != (f11 > 0):
            crossings.append(interp(x0, y1, f01, x1, y1, f11))
        if (f00 > 0) != (f01 > 0):
            crossings.append(interp(x0, y0, f00, x0, y1, f01))
        if len(crossings) == 2:
            segments.append((crossings[0], crossings[1]))
        elif len(crossings) == 4:
            segments.append((crossings[0], crossings[1]))
            segments.append((crossings[2], crossings[3]))
    return _chain_segments(segments, tol=(xs[1] - xs[0]) * 1e-6)


def _chain_segments(segments, tol):
    """Join segments sharing endpoints into polylines."""
    if not segments:
        return []

    def key(pt):
        return (round(pt[0] / tol), round(pt[1] / tol))

    adjacency = {}
    for idx, (p0, p1) in enumerate(segments):
        adjacency.setdefault(key(p0), []).append((idx, 0))
        adjacency.setdefault(key(p1), []).append((idx, 1))

    used = [False] * len(segments)
    polylines = []
    for start in range(len(segments)):
        if used[start]:
            continue
        used[start] = True
        chain = [segments[start][0], segments[start][1]]
        for endwise in (1, 0):
            while True:
                tail = chain[-1] if endwise else chain[0]
                hits = [
                    (idx, end) for idx, end in adjacency.get(key(tail), [])
                    if not used[idx]
                ]
                if not hits:
                    break
                idx, end = hits[0]
                used[idx] = True
                nxt = segments[idx][1 - end]
                if endwise:
                    chain.append(nxt)
                else:
                    chain.insert(0, nxt)
        polylines.append(np.array(chain))
    return polylines


# --- surface projection ---

@dataclass
class SurfaceCurve:
    points: np.ndarray           # (n, 3)
    kind: str                    # curve | separatrix | edge | discriminant
    domain: np.ndarray | None = None


def project_to_surface(jet: EdgeJet, portrait: Portrait,
                       edge_samples: int = 301) -> list:
    """Map every portrait curve through the parametrization; the singular
    edge curve f(u, 0) is always included."""
    f1, f2, f3 = surface_polynomials(jet)
    cset = CompiledPolySet([f1, f2, f3])

    def image(domain):
        pts = cset.values(domain[:, 0], domain[:, 1])
        return np.stack(pts, axis=1)

    out = []
    for curve in portrait.curves:
        dom = curve.projected
        out.append(SurfaceCurve(
            points=image(dom),
            kind="separatrix" if curve.is_separatrix else "curve",
            domain=dom,
        ))
    for line in portrait.discriminant_locus:
        out.append(SurfaceCurve(points=image(line), kind="discriminant",
                                domain=line))
    us = np.linspace(-portrait.box, portrait.box, edge_samples)
    edge_dom = np.stack([us, np.zeros_like(us)], axis=1)
    out.append(SurfaceCurve(points=image(edge_dom), kind="edge",
                            domain=edge_dom))
    return out


# --- cusp-order detection ---

class CuspClass(str, Enum):
    NO_CUSP = "NoCusp"
    CUSP_23 = "Cusp23"
    CUSP_34 = "Cusp34"
    CUSP_345 = "Cusp345"


VANISH_TOL = 1e-3
INDEPENDENCE_TOL = 1e-3
MIN_WINDOW = 25


def _independent(vectors, tol=INDEPENDENCE_TOL):
    rows = []
    for vec in vectors:
        n = np.linalg.norm(vec)
        if n == 0.0:
            return False
        rows.append(vec / n)
    sv = np.linalg.svd(np.array(rows), compute_uv=False)
    return bool(np.all(sv[1:] / sv[:-1] > tol)) if len(sv) > 1 else True


def detect_cusp_order(points, t=None, t0: float = 0.0,
                      window: int | None = None,
                      vanish_tol: float = VANISH_TOL,
                      independence_tol: float = INDEPENDENCE_TOL) -> CuspClass:
    """Classify the local singularity of a sampled curve at parameter t0.

    A degree-5 least-squares fit per coordinate over a centered window gives
    the derivative vectors; vanishing is tested against the window scale and
    independence by singular-value ratios.  Recognizes ordinary (2,3)-cusps
    and the two space-cusp orders (3,4) and (3,4,5).
    """
    pts = np.asarray(points, dtype=float)
    n, dim = pts.shape
    t = np.arange(n, dtype=float) if t is None else np.asarray(t, dtype=float)
    split = int(np.searchsorted(t, t0))
    if window is not None:
        lo, hi = max(0, split - window), min(n, split + window)
        pts, t = pts[lo:hi], t[lo:hi]
        split = int(np.searchsorted(t, t0))
    if split < MIN_WINDOW or len(t) - split < MIN_WINDOW:
        raise WindowTooSmall(
            f"need >= {MIN_WINDOW} samples each side of t0, have "
            f"{split} / {len(t) - split}"
        )

    s = t - t0
    width = float(np.max(np.abs(s)))
    if width == 0.0:
        raise FitIllConditioned("degenerate parameter window")
    sn = s / width
    V = np.vander(sn, 6, increasing=True)
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond > 1e8:
        raise FitIllConditioned(f"Vandermonde condition number {cond:.3e}")
    spread = float(np.max(pts.max(axis=0) - pts.min(axis=0)))
    if spread == 0.0:
        return CuspClass.NO_CUSP
    coef, *_ = np.linalg.lstsq(V, pts / spread, rcond=None)

    # scaled derivative vectors: d_k = k! c_k, dimensionless
    fact = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0]
    d = [fact[k] * coef[k] for k in range(6)]
    vanish = [np.linalg.norm(dk) < vanish_tol for dk in d]

    if not vanish[1]:
        return CuspClass.NO_CUSP
    if not vanish[2]:
        if not vanish[3] and _independent([d[2], d[3]], independence_tol):
            return CuspClass.CUSP_23
        return CuspClass.NO_CUSP
    if vanish[3] or vanish[4] or not _independent([d[3], d[4]], independence_tol):
        return CuspClass.NO_CUSP
    if dim == 2 or vanish[5] or not _independent([d[3], d[4], d[5]],
                                                 independence_tol):
        return CuspClass.CUSP_34
    return CuspClass.CUSP_345


# --- sector-count oracle ---

def _edge_zero_distance(bde: BdeField) -> float:
    """Distance from the origin to the nearest other degenerate fiber on the
    edge v = 0.

    For the geometric BDEs the dv^2 and dudv coefficients vanish identically
    on the edge, so the whole fiber over (u, 0) lies in the lifted surface
    exactly where the du^2 coefficient vanishes; probes must stay well inside
    the nearest such point or they drain toward its zeros instead."""
    on_edge = {i: c for (i, j), c in bde.C.terms.items() if j == 0}
    if not on_edge:
        return math.inf
    degree = max(on_edge)
    coeffs = np.array([float(on_edge.get(k, 0.0)) for k in range(degree + 1)])
    scale = np.max(np.abs(coeffs))
    if scale == 0.0:
        return math.inf
    # deflate the root at the origin itself (present when the origin is the
    # degenerate point under study)
    while abs(coeffs[0]) <= 1e-12 * scale and len(coeffs) > 1:
        coeffs = coeffs[1:]
    if len(coeffs) <= 1:
        return math.inf
    roots = np.roots(coeffs[::-1])
    real = [abs(r.real) for r in roots
            if abs(r.imag) <= 1e-9 * max(1.0, abs(r)) and abs(r) > 1e-12]
    return min(real, default=math.inf)


@dataclass(frozen=True)
class SectorCount:
    """Local behavior census around one lifted singular point.

    For a saddle every probe sweeps past the point (hyperbolic behavior) and
    the projected separatrices split each side of the edge direction in two:
    four hyperbolic sectors.  For a node every probe converges in one time
    direction: two landing fans, one on each side.
    """

    sectors: int | None
    pattern: str                 # saddle | node | ambiguous
    landings_forward: int
    landings_backward: int
    exits_both: int
    probes: int

    def matches(self, lifted_type: str) -> bool:
        return (self.pattern == SADDLE and lifted_type == SADDLE
                and self.sectors == 4) or \
               (self.pattern == NODE and lifted_type == NODE
                and self.sectors == 2)


def local_sector_count(bde: BdeField, analysis: CubicAnalysis, root_index: int,
                       *, radius: float = 0.02, probes_per_side: int = 8,
                       land_fraction: float = 0.05,
                       exit_fraction: float = 3.0) -> SectorCount:
    """Probe the flow near one lifted singular point and count local sectors.

    Probes seed on a small circle around (0, 0, p_i) in the eigencoordinates
    of the restricted linearization (so anisotropy and shear cause no
    spurious transient exits) and integrate the unit-speed field both ways.
    All probes escaping both ways is the saddle pattern (4 hyperbolic
    sectors); all probes converging in a common time direction is the node
    pattern (2 landing fans).
    """
    root = analysis.roots[root_index]
    chart = analysis.chart
    if abs(root) > 1.0:
        chart = CHART_P if chart == CHART_Q else CHART_Q
        root = 1.0 / root
        others = [1.0 / r for r in analysis.roots if r != analysis.roots[root_index]
                  and r != 0.0]
    else:
        others = [r for r in analysis.roots if r != analysis.roots[root_index]]
    gap = min((abs(root - o) for o in others), default=math.inf)

    eq = lift(bde, chart)
    core = _ChartCore(bde, chart)

    # eigenbasis of the restricted Jacobian in (graph coordinate, chart
    # variable); columns normalized, fall back to identity if degenerate
    jac = restricted_jacobian(eq, root)
    eigvals, eigvecs = np.linalg.eig(jac)
    basis = np.real(eigvecs)
    norms = np.linalg.norm(basis, axis=0)
    if np.any(np.abs(np.imag(eigvals)) > 1e-9 * np.abs(eigvals).max()) \
            or np.any(norms == 0.0) or abs(np.linalg.det(basis / norms)) < 1e-3:
        basis = np.eye(2)
    else:
        basis = basis / norms
    inverse = np.linalg.inv(basis)

    # the probe circle must sit inside the linearization region of the WEAK
    # eigenvalue, past which quadratic terms redirect the slow manifold,
    # and inside the basin boundary set by the nearest other degenerate
    # fiber on the edge
    second_order = max(
        (abs(float(c)) for poly in (bde.A, bde.B, bde.C)
         for (i, j), c in poly.terms.items() if i + j == 2), default=0.0)
    lam_min = float(np.min(np.abs(np.real(eigvals))))
    rho = max(1e-6, min(radius, 0.3 * gap, 0.3 * _edge_zero_distance(bde),
                        0.2 * lam_min / max(second_order, 1e-9)))

    angles = []
    span = 0.38 * math.pi
    for k in range(probes_per_side):
        base = -span + 2 * span * (k + 0.5) / probes_per_side
        angles.extend([base, base + math.pi])

    states = []
    for psi in angles:
        dw, dp = basis @ (rho * math.cos(psi), rho * math.sin(psi))
        p = root + dp
        w = solve_fiber_coordinate(eq, dw, p, start=root * dw)
        state = (w, dw, p) if chart == CHART_Q else (dw, w, p)
        states.append(state)
    internal = core.to_internal(np.array(states))
    resid = np.abs(core.residual(internal))
    keep = resid <= 1e-9 * max(1.0, bde.coefficient_scale())
    internal = internal[keep]
    n = len(internal)
    if n < probes_per_side:
        return SectorCount(None, "ambiguous", 0, 0, 0, n)

    def _eigencoords(states):
        delta = np.stack([states[:, 0], states[:, 2] - root], axis=0)
        return inverse @ delta

    y_seed = _eigencoords(internal)
    weak_index = int(np.argmin(np.abs(np.real(eigvals)))) \
        if basis.shape == (2, 2) else 0

    outcomes = {}
    for direction in (+1.0, -1.0):
        res = _integrate_batch(
            core, internal, step=direction * rho / 60.0,
            max_steps=24000, box=None, record=False, normalize=True,
            project_every=10, project_mode="gradient",
            chart_bound=CHART_BOUND,
            ball_center=(0.0, root), ball_land=land_fraction * rho,
            ball_exit=exit_fraction * rho, ball_transform=inverse,
        )
        status = list(res.status)
        # step-capped probes creep along the weak manifold too slowly for
        # the arclength budget; classify them by whether the weak
        # eigencoordinate contracted (inward fan) or expanded (slow escape)
        if TERM_CAP in status:
            y_final = _eigencoords(res.final)
            for i, s in enumerate(status):
                if s != TERM_CAP:
                    continue
                w0 = abs(y_seed[weak_index, i])
                wT = abs(y_final[weak_index, i])
                inside = np.hypot(y_final[0, i], y_final[1, i]) <= rho
                if wT <= 0.6 * max(w0, 1e-30) and inside:
                    status[i] = TERM_LANDED
                elif wT >= 1.8 * w0:
                    status[i] = TERM_EXITED
        outcomes[direction] = status

    fwd_land = sum(1 for s in outcomes[+1.0] if s == TERM_LANDED)
    bwd_land = sum(1 for s in outcomes[-1.0] if s == TERM_LANDED)
    both_exit = sum(
        1 for sf, sb in zip(outcomes[+1.0], outcomes[-1.0])
        if sf == TERM_EXITED and sb == TERM_EXITED
    )
    if both_exit >= n - 1 and fwd_land + bwd_land <= 1:
        return SectorCount(4, SADDLE, fwd_land, bwd_land, both_exit, n)
    if fwd_land >= n - 1 and bwd_land == 0:
        return SectorCount(2, NODE, fwd_land, bwd_land, both_exit, n)
    if bwd_land >= n - 1 and fwd_land == 0:
        return SectorCount(2, NODE, fwd_land, bwd_land, both_exit, n)
    return SectorCount(None, "ambiguous", fwd_land, bwd_land, both_exit, n)
