"""Hamiltonian flows on moment phase space and tunneling experiments."""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .core import CanonicalChart, ChartFunction, ChartPoint, _field_from_gradient, gradient
from .effective import (
    EffectiveModel,
    all_orders_hamiltonian,
    taylor_effective_hamiltonian,
)
from .errors import NonFinite, SingularityStop, StepFailure
from .potentials import quartic_barrier

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass
class Event:
    """Zero crossing of ``fn(state_vector)``; ``direction`` +1 rising, -1 falling, 0 both."""

    kind: str
    fn: Callable
    direction: int = 1
    terminal: bool = True


@dataclass
class Trajectory:
    chart: CanonicalChart
    times: np.ndarray
    states: np.ndarray
    energies: np.ndarray
    events: list = field(default_factory=list)

    def column(self, name):
        return self.states[:, self.chart.index(name)]

    def point(self, i) -> ChartPoint:
        return self.chart.from_array(self.states[i])

    @property
    def energy_drift(self):
        e0 = self.energies[0]
        return float(np.max(np.abs(self.energies - e0)) / max(abs(e0), 1e-300))

    @property
    def casimir_drift(self):
        idx = [self.chart.index(c) for c in self.chart.casimirs]
        if not idx:
            return 0.0
        return float(np.max(np.abs(self.states[:, idx] - self.states[0, idx])))

    def first_event(self, kind):
        for t, k in self.events:
            if k == kind:
                return t
        return None

    def header(self):
        return ["t", *self.chart.names, "E"]

    def rows(self):
        for t, y, e in zip(self.times, self.states, self.energies):
            yield [float(t), *map(float, y), float(e)]


def _rhs(H, chart):
    def f(y):
        g = gradient(H, chart.from_array(y))
        return _field_from_gradient(chart, g)

    return f


def _step(f, y, h, k1):
    ks = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * k for a, k in zip(_A[i], ks))
        ks.append(f(yi))
    y5 = y + h * sum(b * k for b, k in zip(_B5, ks) if b)
    err = h * sum(e * k for e, k in zip(_E, ks) if e)
    return y5, err, ks[6]


def integrate(
    H: ChartFunction,
    x0: ChartPoint,
    t_max,
    tol=1e-10,
    h0=None,
    max_steps=200000,
    events=(),
    h_min=1e-13,
):
    """Adaptive Dormand-Prince 5(4) integration of Hamilton's equations.

    A step whose stage evaluation leaves the chart (NonFinite) is rejected and
    retried with a smaller step; if that shrinks below ``h_min`` the run stops
    with SingularityStop carrying the partial trajectory.  Terminal events end
    the run at the located crossing time.  Negative ``t_max`` integrates backward.
    """
    chart = H.chart
    f = _rhs(H, chart)
    direction = 1.0 if t_max >= 0 else -1.0
    t_end = abs(t_max)
    y = x0.array()
    ts, ys, es = [0.0], [y.copy()], [H(x0)]
    log = []

    def energy(v):
        return H(chart.from_array(v))

    def partial():
        return Trajectory(chart, np.array(ts) * direction, np.array(ys), np.array(es), log)

    try:
        k1 = f(y) * direction
    except NonFinite as exc:
        raise SingularityStop(f"initial point is singular: {exc}", partial()) from exc
    fd = lambda v: f(v) * direction  # noqa: E731
    h = h0 or min(0.01, t_end / 10) or 0.01
    t = 0.0
    steps = 0
    gvals = [ev.fn(y) for ev in events]
    while t < t_end:
        if steps >= max_steps:
            raise StepFailure(f"step budget {max_steps} exhausted at t={t * direction}")
        h = min(h, t_end - t)
        try:
            y_new, err, k7 = _step(fd, y, h, k1)
            scale = tol + tol * np.maximum(np.abs(y), np.abs(y_new))
            en = math.sqrt(float(np.mean((err / scale) ** 2)))
            if not math.isfinite(en):
                raise NonFinite("non-finite error estimate")
        except NonFinite as exc:
            h *= 0.25
            if h < h_min:
                log.append((t * direction, "singularity_stop"))
                raise SingularityStop(f"chart boundary reached at t={t * direction}: {exc}", partial()) from exc
            continue
        if en > 1.0:
            h *= max(0.2, 0.9 * en ** -0.2)
            if h < h_min:
                raise StepFailure(f"step size underflow at t={t * direction}")
            continue
        steps += 1
        # events: locate the crossing by root-finding on the step length
        hit = None
        new_g = [ev.fn(y_new) for ev in events]
        for i, ev in enumerate(events):
            g0, g1 = gvals[i], new_g[i]
            crossed = (g0 < 0 <= g1 and ev.direction >= 0) or (g0 > 0 >= g1 and ev.direction <= 0)
            if crossed:
                tau = brentq(lambda s: ev.fn(_step(fd, y, s, k1)[0]), 0.0, h, xtol=1e-14, rtol=1e-14) if g0 != 0 else 0.0
                if hit is None or tau < hit[0]:
                    hit = (tau, ev)
        if hit is not None:
            tau, ev = hit
            y_ev = _step(fd, y, tau, k1)[0] if tau > 0 else y
            t_ev = t + tau
            log.append((t_ev * direction, ev.kind))
            if ev.terminal:
                ts.append(t_ev)
                ys.append(y_ev)
                es.append(energy(y_ev))
                return partial()
        t += h
        y, k1 = y_new, k7
        gvals = new_g
        ts.append(t)
        ys.append(y.copy())
        es.append(energy(y))
        h *= min(5.0, max(0.2, 0.9 * (en if en > 0 else 1e-10) ** -0.2))
    return partial()


# --- tunneling --------------------------------------------------------------


@dataclass(frozen=True)
class BarrierSpec:
    V_top: float = 1.0
    gamma: float = 0.1
    U: float = 0.25
    m: float = 1.0

    def __post_init__(self):
        if not (self.V_top > 0 and self.gamma > 0):
            raise ValueError("BarrierSpec needs V_top > 0 and gamma > 0")
        if not (self.U > 0 and self.m > 0):
            raise ValueError("BarrierSpec needs U > 0 and m > 0")

    def potential(self):
        return quartic_barrier(self.V_top, self.gamma)


def barrier_top(spec: BarrierSpec):
    """Position of the barrier maximum: smaller nonzero root of V'(q) = 0."""
    a = 1.0 / spec.gamma
    disc = 9 * (1 + a) ** 2 - 32 * a
    return (3 * (1 + a) - math.sqrt(disc)) / 8


def global_minimum(spec: BarrierSpec):
    a = 1.0 / spec.gamma
    disc = 9 * (1 + a) ** 2 - 32 * a
    return (3 * (1 + a) + math.sqrt(disc)) / 8


@dataclass(frozen=True)
class InitialConditions:
    point: ChartPoint
    V0_estimate: float
    s0: float


def tunneling_initial_conditions(spec: BarrierSpec, model="all_orders") -> InitialConditions:
    """Start at rest at the minimum of the quadratic approximation of V_eff near q = 0.

    ``V0_estimate`` is the closed-form energy estimate
    (3/8) sqrt(3U/V_top)(V_top + 2), recorded for reference.
    """
    s0 = (2 * spec.U / (27 * spec.V_top)) ** 0.25
    v0 = 3 / 8 * math.sqrt(3 * spec.U / spec.V_top) * (spec.V_top + 2)
    H = tunneling_hamiltonian(spec, model)
    chart = H.chart
    values = {n: 0.0 for n in chart.names}
    values["U"] = spec.U
    if model in ("all_orders", "order2"):
        values["s"] = s0
    elif model == "order3_ansatz":
        values.update(_ansatz_ground_spread(spec))
    else:
        raise ValueError(f"unknown tunneling model {model!r}")
    return InitialConditions(chart.point(values), v0, s0)


def _ansatz_ground_spread(spec):
    """Minimum of the harmonic part of the third-order potential at q = 0.

    With V ~ V''(0) q^2/2 the ansatz energy F/2 + V''(0) sum s_i^2 / 2 is
    minimized by (-a, 0, a), a^4 = (9/8) U / (m V''(0)).  The cubic term
    V'''(0)/6 sum s_i^3 leaves the full third-order potential without a local
    minimum near q = 0, so the start comes from the quadratic approximation.
    """
    v2 = spec.potential().derivatives(0.0, 2)[2]
    a = (1.125 * spec.U / (spec.m * v2)) ** 0.25
    return {"s1": -a, "s2": 0.0, "s3": a}


def tunneling_hamiltonian(spec: BarrierSpec, model="all_orders") -> ChartFunction:
    V = spec.potential()
    if model == "all_orders":
        return all_orders_hamiltonian(V, spec.m)
    if model in ("order2", "order3_ansatz"):
        return taylor_effective_hamiltonian(EffectiveModel(V, model, m=spec.m))
    raise ValueError(f"unknown tunneling model {model!r}")


@dataclass
class TunnelingResult:
    escaped: bool
    tunneling_time: float
    exit_position: float
    exit_momentum: float
    q_top: float
    E0: float
    trajectory: Trajectory
    model: str
    time_definition: str = "first crossing of q(t) through the barrier-top position q_top"

    @property
    def status(self):
        return "escape" if self.escaped else "no_escape"


def tunneling_run(spec: BarrierSpec, model="all_orders", t_max=50.0, tol=1e-10, x0=None):
    """Integrate from the metastable minimum until q first crosses q_top (or t_max)."""
    H = tunneling_hamiltonian(spec, model)
    if x0 is None:
        x0 = tunneling_initial_conditions(spec, model).point
    q_top = barrier_top(spec)
    qi = H.chart.index("q")
    escape = Event("escape", lambda y: y[qi] - q_top, direction=1, terminal=True)
    traj = integrate(H, x0, t_max, tol=tol, events=[escape])
    t_esc = traj.first_event("escape")
    if t_esc is None:
        return TunnelingResult(False, math.nan, math.nan, math.nan, q_top, traj.energies[0], traj, model)
    last = traj.states[-1]
    return TunnelingResult(
        True, t_esc, float(last[qi]), float(last[H.chart.index("pi")]), q_top, traj.energies[0], traj, model
    )


def effective_potential_along(traj: Trajectory, H: ChartFunction):
    """Momentum-free part of H at every stored state (H with all momenta zeroed)."""
    chart = traj.chart
    out = []
    mom = [chart.index(p) for p in chart.momenta]
    for y in traj.states:
        z = y.copy()
        z[mom] = 0.0
        out.append(H(chart.from_array(z)))
    return np.array(out)


def barrier_interval(spec: BarrierSpec, level=0.5):
    """q-range on the rising flank where V_poly(q) >= level * V_poly(q_top).

    The default (half the barrier height) is the half-maximum width of the barrier.
    """
    if not 0 < level <= 1:
        raise ValueError("level must lie in (0, 1]")
    V = spec.potential()
    q_top = barrier_top(spec)
    energy = level * V(q_top)
    if level == 1:
        return (q_top, q_top)
    q_in = brentq(lambda q: V(q) - energy, 0.0, q_top, xtol=1e-14)
    return (q_in, q_top)


def barrier_correlation(result: TunnelingResult, spec: BarrierSpec, level=0.5):
    """Max relative deviation |s - q|/q over trajectory samples inside the barrier interval."""
    traj = result.trajectory
    if "s" not in traj.chart.names:
        raise ValueError("correlation check needs a single fluctuation variable s")
    lo, hi = barrier_interval(spec, level)
    q, s = traj.column("q"), traj.column("s")
    mask = (q >= lo) & (q <= hi)
    if not np.any(mask):
        return math.nan
    return float(np.max(np.abs(s[mask] - q[mask]) / np.abs(q[mask])))


@dataclass
class SweepRow:
    param: float
    time: float
    exit_q: float
    exit_pi: float
    status: str


def tunneling_sweep(base: BarrierSpec, param, values, model="all_orders", t_max=50.0, tol=1e-10):
    """One tunneling_run per grid value of ``param`` ('gamma', 'V_top', 'U' or 'q0').

    Failures are recorded per row and the sweep continues.
    """
    rows = []
    for v in values:
        try:
            if param == "q0":
                spec = base
                init = tunneling_initial_conditions(spec, model).point.replace(q=float(v))
                res = tunneling_run(spec, model, t_max, tol, x0=init)
            else:
                spec = BarrierSpec(**{**base.__dict__, param: float(v)})
                res = tunneling_run(spec, model, t_max, tol)
            rows.append(SweepRow(float(v), res.tunneling_time, res.exit_position, res.exit_momentum, res.status))
        except (SingularityStop, StepFailure, ValueError, ArithmeticError) as exc:
            rows.append(SweepRow(float(v), math.nan, math.nan, math.nan, f"error: {type(exc).__name__}"))
    return rows
