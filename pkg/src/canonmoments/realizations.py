"""Casimir-Darboux realizations: moments as explicit functions of canonical pairs.

Each realization is a chart plus a map from moment indices to ChartFunctions.
``closure_certificate`` checks that canonical brackets of the realized moments
reproduce the truncated moment algebra (computed by the Weyl oracle), which is
how transcription mistakes in the closed forms are caught.
"""

import math
import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import autodiff as ad
from .core import CanonicalChart, ChartFunction, ChartPoint, gradient, poisson_bracket
from .errors import MissingPredecessor, NegativeDiscriminant, NonFinite, SingularChart
from .moments import MomentIndex, MomentState, truncate
from .weyl import weyl_bracket_oracle


@dataclass(eq=False)
class Realization:
    name: str
    chart: CanonicalChart
    order: int
    dof: int
    moments: dict
    domain: Callable
    sampler: Callable
    hbar: float = 1.0
    _generated: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def index(self, key):
        return key if isinstance(key, MomentIndex) else MomentIndex.parse(key, self.dof)

    def __getitem__(self, key):
        idx = self.index(key)
        if idx in self.moments:
            return self.moments[idx]
        if idx in self._generated:
            return self._generated[idx]
        raise KeyError(idx.label)

    def __contains__(self, key):
        idx = self.index(key)
        return idx in self.moments or idx in self._generated

    def point(self, values=None, **kw) -> ChartPoint:
        return self.chart.point(values, **kw)

    def check_domain(self, x):
        vals = x.as_dict() if isinstance(x, ChartPoint) else dict(x)
        self.domain(vals)

    def state(self, x, hbar=None) -> MomentState:
        """Evaluate every realized moment at a regular chart point."""
        if not isinstance(x, ChartPoint):
            x = self.chart.point(x)
        self.check_domain(x)
        vals = {idx: f(x) for idx, f in self.moments.items()}
        return MomentState(vals, hbar=self.hbar if hbar is None else hbar, dof=self.dof)

    def random_point(self, rng) -> ChartPoint:
        return self.chart.point(self.sampler(rng))

    def with_scaled_pairs(self, x, lam, casimir_weights=None):
        """Point with every canonical pair multiplied by ``lam``.

        ``casimir_weights`` maps Casimir names to the power of ``lam`` they are
        scaled with (unlisted Casimirs stay fixed).
        """
        d = x.as_dict()
        for s, p in self.chart.pairs:
            d[s] *= lam
            d[p] *= lam
        for name, power in (casimir_weights or {}).items():
            d[name] *= lam**power
        return self.chart.point(d)


# --- order 2, one DOF -----------------------------------------------------

ORDER2_CHART = CanonicalChart((("s", "p"),), ("U",))


def _positive(vals, *names):
    for n in names:
        if not vals[n] > 0:
            raise SingularChart(f"{n} = {vals[n]} must be positive")


def _order2_domain(vals):
    _positive(vals, "s")


def _order2_sampler(rng):
    return {"s": rng.uniform(0.3, 2.0), "p": rng.uniform(-1, 1), "U": rng.uniform(0.25, 1.5)}


def _build_order2():
    m = MomentIndex.single
    ch = ORDER2_CHART
    moments = {
        m(2, 0): ChartFunction(ch, lambda x: x["s"] * x["s"], "s^2"),
        m(1, 1): ChartFunction(ch, lambda x: x["s"] * x["p"], "s*p"),
        m(0, 2): ChartFunction(ch, lambda x: x["p"] * x["p"] + x["U"] / (x["s"] * x["s"]), "p^2+U/s^2"),
    }
    return Realization("order2", ch, 2, 1, moments, _order2_domain, _order2_sampler)


# --- order 3, systematic --------------------------------------------------

ORDER3_SYSTEMATIC_CHART = CanonicalChart(
    (("s1", "p1"), ("s2", "p2"), ("s3", "p3")), ("U1",)
)


def _o3s_domain(vals):
    _positive(vals, "s1", "s2")
    if not abs(vals["p3"]) < 0.5:
        raise SingularChart(f"|p3| = {abs(vals['p3'])} must be below 1/2")


def _o3s_sampler(rng):
    return {
        "s1": rng.uniform(0.4, 2.0),
        "p1": rng.uniform(-1, 1),
        "s2": rng.uniform(0.3, 2.0),
        "p2": rng.uniform(-1, 1),
        "s3": rng.uniform(-1, 1),
        "p3": rng.uniform(-0.4, 0.4),
        "U1": rng.uniform(0.3, 1.5),
    }


def _o3s_parts(x):
    s1, p1, s2, p2, p3 = x["s1"], x["p1"], x["s2"], x["p2"], x["p3"]
    rs2 = ad.sqrt(s2)
    denom = ad.sqrt(2 * s2 * rs2 * ad.sqrt(1 - 4 * p3 * p3))
    P = p1 * s1 + p3 * rs2 + 4 * s2 * p2
    return s1, rs2, denom, P


def _o3s_pi2(x):
    s1, p1, s2, p2, s3, p3 = (x[k] for k in ("s1", "p1", "s2", "p2", "s3", "p3"))
    rs2 = ad.sqrt(s2)
    f1 = 3 * rs2 * (4 * p3 * p3 - 1) * s3 + 0.5 * s2 * (7 - 10 * p3 * p3) - 16 * s2 * s2 * p2 * p2
    return p1 * p1 + f1 / (s1 * s1)


def _o3s_q3(x):
    s1, _, denom, _ = _o3s_parts(x)
    return x["U1"] * s1**3 / denom


def _o3s_q2pi(x):
    s1, _, denom, P = _o3s_parts(x)
    return x["U1"] * s1 * P / denom


def _o3s_qpi2(x):
    s1, _, denom, P = _o3s_parts(x)
    return x["U1"] * (P * P - x["s2"]) / (s1 * denom)


def _o3s_pi3(x):
    s1, rs2, denom, P = _o3s_parts(x)
    s2 = x["s2"]
    return x["U1"] * (P**3 - 3 * s2 * P - 4 * x["p3"] * s2 * rs2) / (s1**3 * denom)


def order3_systematic_pi3_long(x):
    """Third momentum moment from the fully expanded polynomial (cross-check only)."""
    s1, p1, s2, p2, p3 = (x[k] for k in ("s1", "p1", "s2", "p2", "p3"))
    rs2 = ad.sqrt(s2)
    phi = (
        p1**3 * s1**3
        + 3 * p1**2 * p3 * s1**2 * rs2
        + 3 * p1 * s1 * s2 * (-1 + p3**2 + 4 * p1 * s1 * p2)
        + 64 * p2**3 * s2**3
        + p3 * s2 * rs2 * (-7 + p3**2 + 24 * p1 * p2 * s1)
        + 48 * p3 * p2**2 * s2**2 * rs2
        + 12 * p2 * s2**2 * (-1 + p3**2 + 4 * p1 * s1 * p2)
    )
    _, _, denom, _ = _o3s_parts(x)
    return x["U1"] * phi / (s1**3 * denom)


def third_order_casimir(A, B, C, D):
    """Quartic invariant of the third-order moments; equals -U1^4 on the systematic chart.

    A..D are Delta(q^3), Delta(q^2 pi), Delta(q pi^2), Delta(pi^3).
    """
    return (B * C - A * D) ** 2 - 4 * (C * C - B * D) * (B * B - A * C)


def _build_order3_systematic():
    m = MomentIndex.single
    ch = ORDER3_SYSTEMATIC_CHART
    moments = {
        m(2, 0): ChartFunction(ch, lambda x: x["s1"] * x["s1"], "s1^2"),
        m(1, 1): ChartFunction(ch, lambda x: x["s1"] * x["p1"], "s1*p1"),
        m(0, 2): ChartFunction(ch, _o3s_pi2, "pi2"),
        m(3, 0): ChartFunction(ch, _o3s_q3, "q3"),
        m(2, 1): ChartFunction(ch, _o3s_q2pi, "q2pi"),
        m(1, 2): ChartFunction(ch, _o3s_qpi2, "qpi2"),
        m(0, 3): ChartFunction(ch, _o3s_pi3, "pi3"),
    }
    return Realization("order3_systematic", ch, 3, 1, moments, _o3s_domain, _o3s_sampler)


# --- pairwise inverse-square repulsion used by the ansatz realizations ------


def _distinct(vals, names):
    _positive_count = len(names)
    for i in range(_positive_count):
        for j in range(i + 1, _positive_count):
            if vals[names[i]] == vals[names[j]]:
                raise SingularChart(f"{names[i]} = {names[j]}")


def repulsion(s, U):
    """F = U * sum_{i<j} 1/(s_i - s_j)^2."""
    total = 0.0
    for i in range(len(s)):
        for j in range(i + 1, len(s)):
            d = s[i] - s[j]
            total = total + U / (d * d)
    return total


def repulsion_gradient(s, U):
    n = len(s)
    out = []
    for i in range(n):
        g = 0.0
        for j in range(n):
            if j != i:
                d = s[i] - s[j]
                g = g - 2 * U / (d * d * d)
        out.append(g)
    return out


def repulsion_hessian(s, U):
    n = len(s)
    h = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i != j:
                d = s[i] - s[j]
                term = 6 * U / (d * d * d * d)
                h[i][j] = -term
                h[i][i] = h[i][i] + term
    return h


def _ansatz_sampler(n, extra):
    def sample(rng):
        s = np.sort(rng.uniform(-2.0, 2.0, n))
        while np.min(np.diff(s)) < 0.3:
            s = np.sort(rng.uniform(-2.0, 2.0, n))
        out = {}
        for i in range(n):
            out[f"s{i + 1}"] = s[i]
            out[f"p{i + 1}"] = rng.uniform(-1, 1)
        out.update(extra(rng))
        return out

    return sample


def _ansatz_chart(n, casimirs):
    return CanonicalChart(tuple((f"s{i}", f"p{i}") for i in range(1, n + 1)), casimirs)


ORDER3_ANSATZ_CHART = _ansatz_chart(3, ("U",))
ORDER4_ANSATZ_CHART = _ansatz_chart(5, ("U", "C"))


def _sp(x, n):
    return [x[f"s{i}"] for i in range(1, n + 1)], [x[f"p{i}"] for i in range(1, n + 1)]


def _build_order3_ansatz():
    m = MomentIndex.single
    ch = ORDER3_ANSATZ_CHART
    n = 3
    names = tuple(f"s{i}" for i in range(1, n + 1))

    def q2(x):
        s, _ = _sp(x, n)
        return ad.sum_(si * si for si in s)

    def qpi(x):
        s, p = _sp(x, n)
        return ad.sum_(si * pi for si, pi in zip(s, p))

    def pi2(x):
        s, p = _sp(x, n)
        return ad.sum_(pi * pi for pi in p) + repulsion(s, x["U"])

    def q3(x):
        s, _ = _sp(x, n)
        return ad.sum_(si**3 for si in s)

    def q2pi(x):
        s, p = _sp(x, n)
        return ad.sum_(pi * si * si for si, pi in zip(s, p))

    def qpi2(x):
        s, p = _sp(x, n)
        g = repulsion_gradient(s, x["U"])
        return ad.sum_(pi * pi * si for si, pi in zip(s, p)) - 0.25 * ad.sum_(
            si * si * gi for si, gi in zip(s, g)
        )

    def pi3(x):
        s, p = _sp(x, n)
        g = repulsion_gradient(s, x["U"])
        h = repulsion_hessian(s, x["U"])
        inner = ad.sum_(
            p[i] * (6 * s[i] * g[i] + ad.sum_(s[j] * s[j] * h[i][j] for j in range(n)))
            for i in range(n)
        )
        return ad.sum_(pi**3 for pi in p) - 0.25 * inner

    moments = {
        m(2, 0): ChartFunction(ch, q2, "sum s^2"),
        m(1, 1): ChartFunction(ch, qpi, "sum s p"),
        m(0, 2): ChartFunction(ch, pi2, "sum p^2 + F"),
        m(3, 0): ChartFunction(ch, q3, "sum s^3"),
        m(2, 1): ChartFunction(ch, q2pi, "sum p s^2"),
        m(1, 2): ChartFunction(ch, qpi2, "qpi2"),
        m(0, 3): ChartFunction(ch, pi3, "pi3"),
    }
    sampler = _ansatz_sampler(n, lambda rng: {"U": rng.uniform(0.1, 1.0)})
    return Realization(
        "order3_ansatz", ch, 3, 1, moments, lambda v: _distinct(v, names), sampler
    )


def _build_order4_ansatz():
    m = MomentIndex.single
    ch = ORDER4_ANSATZ_CHART
    n = 5
    names = tuple(f"s{i}" for i in range(1, n + 1))

    def q2(x):
        s, _ = _sp(x, n)
        return ad.sum_(si * si for si in s)

    def pi2(x):
        s, p = _sp(x, n)
        return ad.sum_(pi * pi for pi in p) + repulsion(s, x["U"])

    def q3(x):
        s, _ = _sp(x, n)
        return x["C"] * ad.sum_(si**3 for si in s)

    def q4(x):
        s, _ = _sp(x, n)
        sq = ad.sum_(si * si for si in s)
        return x["C"] ** 2 * ad.sum_(si**4 for si in s) + sq * sq

    moments = {
        m(2, 0): ChartFunction(ch, q2, "sum s^2"),
        m(0, 2): ChartFunction(ch, pi2, "sum p^2 + F"),
        m(3, 0): ChartFunction(ch, q3, "C sum s^3"),
        m(4, 0): ChartFunction(ch, q4, "C^2 sum s^4 + (sum s^2)^2"),
    }
    sampler = _ansatz_sampler(
        n, lambda rng: {"U": rng.uniform(0.1, 1.0), "C": rng.uniform(-1.0, 1.0)}
    )
    return Realization(
        "order4_ansatz", ch, 4, 1, moments, lambda v: _distinct(v, names), sampler
    )


# --- two DOF, order 2 -----------------------------------------------------

TWODOF_CHART = CanonicalChart(
    (("s1", "p1"), ("s2", "p2"), ("beta", "pbeta"), ("alpha", "palpha")), ("U1", "U2")
)


def twodof_discriminant(U1, U2, palpha):
    return U2 - U1 * U1 + (U1 - 4 * palpha * palpha) ** 2


def _twodof_domain(vals):
    _positive(vals, "s1", "s2")
    if math.sin(vals["beta"]) == 0:
        raise SingularChart("sin(beta) = 0")
    if twodof_discriminant(vals["U1"], vals["U2"], vals["palpha"]) < 0:
        raise NegativeDiscriminant("U2 - U1^2 + (U1 - 4 palpha^2)^2 < 0")


def _twodof_sampler(rng):
    U1 = rng.uniform(0.5, 1.5)
    return {
        "s1": rng.uniform(0.4, 2.0),
        "p1": rng.uniform(-1, 1),
        "s2": rng.uniform(0.4, 2.0),
        "p2": rng.uniform(-1, 1),
        "beta": rng.uniform(0.3, math.pi - 0.3),
        "pbeta": rng.uniform(-1, 1),
        "alpha": rng.uniform(-math.pi, math.pi),
        "palpha": rng.uniform(-1, 1),
        "U1": U1,
        "U2": U1 * U1 + rng.uniform(0.0, 1.0),
    }


def twodof_phi_gamma(beta, pbeta, alpha, palpha, U1, U2):
    """The two angular functions entering Delta(pi_1^2) and Delta(pi_2^2)."""
    root = ad.sqrt(twodof_discriminant(U1, U2, palpha))
    sb = ad.sin(beta)
    base = U1 - 4 * palpha * palpha
    phi = (palpha - pbeta) ** 2 + (base - root * ad.sin(alpha + beta)) / (2 * sb * sb)
    gam = (palpha + pbeta) ** 2 + (base - root * ad.sin(alpha - beta)) / (2 * sb * sb)
    return phi, gam


def _twodof_pi1pi2(x):
    s1, p1, s2, p2 = x["s1"], x["p1"], x["s2"], x["p2"]
    b, pb, a, pa = x["beta"], x["pbeta"], x["alpha"], x["palpha"]
    U1, U2 = x["U1"], x["U2"]
    cb, sb = ad.cos(b), ad.sin(b)
    cot_csc = cb / (sb * sb)
    root = ad.sqrt(twodof_discriminant(U1, U2, pa))
    return (
        p1 * p2 * cb
        - cb * pb * pb / (s1 * s2)
        + (cb + 2 * cot_csc) * pa * pa / (s1 * s2)
        - sb * pb * (p2 / s1 + p1 / s2)
        + pa * sb * (p2 / s1 - p1 / s2)
        - 0.5 * cot_csc * U1 / (s1 * s2)
        + ad.sin(a) * root / (2 * sb * sb * s1 * s2)
    )


def _build_twodof():
    ch = TWODOF_CHART
    M = lambda label: MomentIndex.parse(label, 2)  # noqa: E731

    def angular(x):
        return twodof_phi_gamma(x["beta"], x["pbeta"], x["alpha"], x["palpha"], x["U1"], x["U2"])

    moments = {
        M("q1^2"): ChartFunction(ch, lambda x: x["s1"] * x["s1"], "s1^2"),
        M("q1pi1"): ChartFunction(ch, lambda x: x["s1"] * x["p1"], "s1*p1"),
        M("pi1^2"): ChartFunction(ch, lambda x: x["p1"] ** 2 + angular(x)[0] / (x["s1"] * x["s1"]), "pi1^2"),
        M("q2^2"): ChartFunction(ch, lambda x: x["s2"] * x["s2"], "s2^2"),
        M("q2pi2"): ChartFunction(ch, lambda x: x["s2"] * x["p2"], "s2*p2"),
        M("pi2^2"): ChartFunction(ch, lambda x: x["p2"] ** 2 + angular(x)[1] / (x["s2"] * x["s2"]), "pi2^2"),
        M("q1q2"): ChartFunction(ch, lambda x: x["s1"] * x["s2"] * ad.cos(x["beta"]), "q1q2"),
        M("q2pi1"): ChartFunction(
            ch,
            lambda x: x["p1"] * x["s2"] * ad.cos(x["beta"])
            + ad.sin(x["beta"]) * x["s2"] / x["s1"] * (x["palpha"] - x["pbeta"]),
            "q2pi1",
        ),
        M("q1pi2"): ChartFunction(
            ch,
            lambda x: x["p2"] * x["s1"] * ad.cos(x["beta"])
            - ad.sin(x["beta"]) * x["s1"] / x["s2"] * (x["pbeta"] + x["palpha"]),
            "q1pi2",
        ),
        M("pi1pi2"): ChartFunction(ch, _twodof_pi1pi2, "pi1pi2"),
    }
    return Realization("twodof_order2", ch, 2, 2, moments, _twodof_domain, _twodof_sampler)


# --- catalog ----------------------------------------------------------------

_BUILDERS = {
    "order2": _build_order2,
    "order3_systematic": _build_order3_systematic,
    "order3_ansatz": _build_order3_ansatz,
    "order4_ansatz": _build_order4_ansatz,
    "twodof_order2": _build_twodof,
}
_CATALOG = {}
_CATALOG_LOCK = threading.Lock()


def realization_names():
    return tuple(_BUILDERS)


def get_realization(name) -> Realization:
    with _CATALOG_LOCK:
        if name not in _CATALOG:
            if name not in _BUILDERS:
                raise KeyError(f"unknown realization {name!r}; choose from {sorted(_BUILDERS)}")
            _CATALOG[name] = _BUILDERS[name]()
        return _CATALOG[name]


def _realize(name, x, kw):
    R = get_realization(name)
    if not isinstance(x, ChartPoint):
        d = dict(x or {})
        d.update(kw)
        x = R.chart.point(d)
    return R.state(x)


def realize_order2(x=None, **kw):
    return _realize("order2", x, kw)


def realize_order3_systematic(x=None, **kw):
    return _realize("order3_systematic", x, kw)


def realize_order3_ansatz(x=None, **kw):
    return _realize("order3_ansatz", x, kw)


def realize_order4_ansatz(x=None, **kw):
    return _realize("order4_ansatz", x, kw)


def realize_twodof(x=None, **kw):
    return _realize("twodof_order2", x, kw)


# --- recursive generation -------------------------------------------------


def generate_moment(R: Realization, target) -> ChartFunction:
    """Delta(q^(m-1) pi^(n+1)) = -(1/2m) {Delta(pi^2), Delta(q^m pi^n)}, recursively."""
    idx = R.index(target)
    if idx.dof != 1:
        raise ValueError("moment generation is defined for one DOF")
    if idx in R.moments:
        return R.moments[idx]
    with R._lock:
        if idx in R._generated:
            return R._generated[idx]
    k, l = idx.powers[0]
    pi2 = MomentIndex.single(0, 2)
    if l < 1 or pi2 not in R.moments:
        raise MissingPredecessor(f"no recursion base for {idx.label} in {R.name}")
    base_idx = MomentIndex.single(k + 1, l - 1)
    try:
        base = generate_moment(R, base_idx)
    except MissingPredecessor as exc:
        raise MissingPredecessor(f"{idx.label} needs {base_idx.label}: {exc}") from exc
    fn = poisson_bracket(R.moments[pi2], base) * (-1.0 / (2 * (k + 1)))
    fn.label = idx.label
    with R._lock:
        return R._generated.setdefault(idx, fn)


def moment_function(R: Realization, key) -> ChartFunction:
    """Realized moment, generating it from Delta(pi^2) if it is not displayed."""
    idx = R.index(key)
    if idx in R.moments:
        return R.moments[idx]
    return generate_moment(R, idx)


# --- certificates -----------------------------------------------------------


class _FunctionLookup:
    """Maps MomentIndex -> value at a point, generating moments on demand."""

    def __init__(self, R, x):
        self.R, self.x, self.cache = R, x, {}

    def __getitem__(self, idx):
        if idx.order == 0:
            return 1.0
        if idx.order == 1:
            return 0.0
        if idx not in self.cache:
            self.cache[idx] = moment_function(self.R, idx)(self.x)
        return self.cache[idx]


def bracket_scale(f: ChartFunction, g: ChartFunction, x):
    """Sum of absolute canonical gradient products; natural size of {f, g}."""
    gf, gg = gradient(f, x), gradient(g, x)
    total = 0.0
    for k in range(len(f.chart.pairs)):
        i, j = 2 * k, 2 * k + 1
        total += abs(gf[i] * gg[j]) + abs(gf[j] * gg[i])
    return total


@dataclass
class ClosureReport:
    realization: str
    n_points: int
    pairs: list
    max_rel_error: float
    worst: tuple

    def passed(self, rtol=1e-9):
        return self.max_rel_error <= rtol


def closure_certificate(R: Realization, n_points=50, seed=0, indices=None, hbar=1.0):
    """Compare canonical brackets of realized moments with the truncated algebra."""
    rng = np.random.default_rng(seed)
    idx = list(indices) if indices is not None else list(R.moments)
    pairs = [(a, b) for i, a in enumerate(idx) for b in idx[i + 1:]]
    algebra = {(a, b): truncate(weyl_bracket_oracle(a, b), R.order) for a, b in pairs}
    fns = {a: moment_function(R, a) for a in idx}
    brackets = {(a, b): poisson_bracket(fns[a], fns[b]) for a, b in pairs}
    worst, worst_at = 0.0, None
    for _ in range(n_points):
        x = R.random_point(rng)
        look = _FunctionLookup(R, x)
        for a, b in pairs:
            lhs = brackets[(a, b)](x)
            rhs = algebra[(a, b)].evaluate(look, hbar)
            scale = max(bracket_scale(fns[a], fns[b], x), abs(rhs), 1e-300)
            err = abs(lhs - rhs) / scale
            if err > worst:
                worst, worst_at = err, (a.label, b.label, x.as_dict())
    return ClosureReport(R.name, n_points, [(a.label, b.label) for a, b in pairs], worst, worst_at)


SEMICLASSICAL_CASIMIR_WEIGHTS = {
    "order2": {"U": 4},
    "order3_systematic": {"U1": 3},
    "order3_ansatz": {"U": 4},
    "order4_ansatz": {"U": 4},
    "twodof_order2": {"U1": 4, "U2": 8},
}


def scaling_exponent(R: Realization, residual, x, lams=None, casimir_weights=None, noise=1e-12):
    """Log-log slope of ``|residual|`` under (s, p) -> (lam s, lam p).

    ``residual(point)`` returns ``(value, scale)``; if ``|value| <= noise * scale``
    at every lam the residual vanishes identically and the slope is ``inf``.
    """
    lams = np.geomspace(1e-3, 1e-1, 9) if lams is None else np.asarray(lams)
    if casimir_weights is None:
        casimir_weights = SEMICLASSICAL_CASIMIR_WEIGHTS.get(R.name, {})
    vals, scales = [], []
    for lam in lams:
        v, sc = residual(R.with_scaled_pairs(x, lam, casimir_weights))
        vals.append(abs(v))
        scales.append(abs(sc))
    vals, scales = np.array(vals), np.array(scales)
    if np.all(vals <= noise * scales):
        return math.inf, vals
    slope = np.polyfit(np.log(lams), np.log(vals), 1)[0]
    return float(slope), vals


def bracket_residual(R: Realization, f: ChartFunction, g: ChartFunction, rhs=None):
    """Residual function ``point -> ({f,g} - rhs, scale)`` for scaling_exponent."""
    br = poisson_bracket(f, g)

    def residual(x):
        target = 0.0 if rhs is None else rhs.evaluate(_FunctionLookup(R, x), R.hbar)
        return br(x) - target, bracket_scale(f, g, x)

    return residual


def moment_casimir_u1(R: Realization) -> ChartFunction:
    """U1 = |f5|^(1/4) written through the realization's third-order moments.

    The quartic invariant is negative on the systematic chart, so its modulus is used.
    """
    third = [MomentIndex.single(3 - k, k) for k in range(4)]
    fns = [moment_function(R, t) for t in third]
    return ChartFunction(
        R.chart, lambda x: ad.fabs(third_order_casimir(*[f.rule(x) for f in fns])) ** 0.25, "U1(moments)"
    )


@dataclass
class ScalingReport:
    third_third: dict
    casimir: dict

    @property
    def min_third_third(self):
        return min(self.third_third.values())

    @property
    def min_casimir(self):
        return min(self.casimir.values())


def truncation_scaling_certificate(name="order3_ansatz", n_points=3, seed=0):
    """Scaling exponents of the third-order bracket residuals of a realization.

    ``third_third`` holds the slopes of {D3_i, D3_j} minus the truncated algebra
    (which is zero); ``casimir`` the slopes of {D, U1(D)} for every realized D.
    Identically vanishing residuals report ``inf``.  The minimum over sample
    points is kept for each pair.
    """
    R = get_realization(name)
    rng = np.random.default_rng(seed)
    third = [MomentIndex.single(3 - k, k) for k in range(4)]
    u1 = moment_casimir_u1(R)
    tt, cas = {}, {}
    for _ in range(n_points):
        x = R.random_point(rng)
        for i, a in enumerate(third):
            for b in third[i + 1:]:
                rhs = truncate(weyl_bracket_oracle(a, b), 3)
                res = bracket_residual(R, moment_function(R, a), moment_function(R, b), rhs)
                key = f"{{{a.label},{b.label}}}"
                tt[key] = min(tt.get(key, math.inf), scaling_exponent(R, res, x)[0])
        for idx, f in R.moments.items():
            res = bracket_residual(R, f, u1)
            key = f"{{{idx.label},U1}}"
            cas[key] = min(cas.get(key, math.inf), scaling_exponent(R, res, x)[0])
    return ScalingReport(tt, cas)


__all__ = [
    "Realization",
    "ClosureReport",
    "NonFinite",
    "get_realization",
    "realization_names",
    "realize_order2",
    "realize_order3_systematic",
    "realize_order3_ansatz",
    "realize_order4_ansatz",
    "realize_twodof",
    "generate_moment",
    "moment_function",
    "closure_certificate",
    "scaling_exponent",
    "truncation_scaling_certificate",
    "moment_casimir_u1",
    "third_order_casimir",
    "twodof_phi_gamma",
    "repulsion",
    "order3_systematic_pi3_long",
]
