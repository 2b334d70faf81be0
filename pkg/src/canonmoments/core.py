"""Canonical charts, smooth chart functions and the canonical Poisson bracket."""

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from . import autodiff as ad
from .errors import NonFinite


@dataclass(frozen=True)
class CanonicalChart:
    """Ordered canonical pairs plus Casimir names.

    ``names`` lists coordinates and momenta interleaved (``s1, p1, s2, p2, ...``)
    followed by the Casimirs; every vector over the chart uses that order.
    """

    pairs: tuple
    casimirs: tuple = ()

    def __post_init__(self):
        pairs = tuple(tuple(p) for p in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "casimirs", tuple(self.casimirs))
        if not pairs:
            raise ValueError("a chart needs at least one canonical pair")
        if any(len(p) != 2 for p in pairs):
            raise ValueError("pairs must be (coordinate, momentum) tuples")
        names = self.names
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate names in chart: {names}")

    @property
    def names(self):
        return tuple(n for pair in self.pairs for n in pair) + self.casimirs

    @property
    def coordinates(self):
        return tuple(p[0] for p in self.pairs)

    @property
    def momenta(self):
        return tuple(p[1] for p in self.pairs)

    @property
    def dim(self):
        return len(self.names)

    def index(self, name):
        return self.names.index(name)

    def point(self, values=None, **kw):
        """Build a ChartPoint from a mapping and/or keywords; all names required."""
        merged = dict(values or {})
        merged.update(kw)
        missing = [n for n in self.names if n not in merged]
        extra = [n for n in merged if n not in self.names]
        if missing or extra:
            raise KeyError(f"chart point mismatch: missing {missing}, unknown {extra}")
        return ChartPoint(self, tuple(float(merged[n]) for n in self.names))

    def from_array(self, arr):
        return ChartPoint(self, tuple(float(v) for v in arr))


@dataclass(frozen=True)
class ChartPoint:
    chart: CanonicalChart
    values: tuple

    def __post_init__(self):
        if len(self.values) != self.chart.dim:
            raise ValueError("value count does not match chart")
        if not all(np.isfinite(self.values)):
            raise NonFinite("chart point has non-finite entries")

    def __getitem__(self, name):
        return self.values[self.chart.index(name)]

    def as_dict(self):
        return dict(zip(self.chart.names, self.values))

    def array(self):
        return np.array(self.values, dtype=float)

    def replace(self, **kw):
        d = self.as_dict()
        d.update(kw)
        return self.chart.point(d)


def _check_finite(x):
    if isinstance(x, ad.Dual):
        _check_finite(x.val)
        for d in x.der:
            _check_finite(d)
    elif isinstance(x, ad.Taylor):
        for c in x.c:
            _check_finite(c)
    elif isinstance(x, (tuple, list, np.ndarray)):
        for v in x:
            _check_finite(v)
    elif not np.isfinite(x):
        raise NonFinite(f"non-finite value {x}")


def guarded(fun, *args):
    """Call ``fun`` and turn domain errors and NaN/inf results into NonFinite."""
    try:
        with np.errstate(all="ignore"):
            out = fun(*args)
    except NonFinite:
        raise
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise NonFinite(str(exc)) from exc
    _check_finite(out)
    return out


class ChartFunction:
    """A smooth real function on a chart.

    ``rule`` receives a dict ``name -> value`` whose values may be floats or
    lifted numbers, and must use :mod:`canonmoments.autodiff` elementary
    functions so that it can be differentiated to any order.
    """

    __slots__ = ("chart", "rule", "label")

    def __init__(self, chart: CanonicalChart, rule: Callable[[Mapping], object], label=""):
        self.chart = chart
        self.rule = rule
        self.label = label

    def __repr__(self):
        return f"ChartFunction({self.label or self.rule!r})"

    def __call__(self, x):
        vals = x.as_dict() if isinstance(x, ChartPoint) else dict(x)
        out = guarded(self.rule, vals)
        return out if isinstance(out, ad.Lifted) else float(out)

    @classmethod
    def variable(cls, chart, name):
        chart.index(name)
        return cls(chart, lambda x: x[name], name)

    @classmethod
    def constant(cls, chart, value):
        return cls(chart, lambda x: value, repr(value))

    def _binary(self, other, op, sym):
        if isinstance(other, ChartFunction):
            if other.chart != self.chart:
                raise ValueError("chart functions live on different charts")
            return ChartFunction(
                self.chart,
                lambda x: op(self.rule(x), other.rule(x)),
                f"({self.label} {sym} {other.label})",
            )
        return ChartFunction(
            self.chart, lambda x: op(self.rule(x), other), f"({self.label} {sym} {other!r})"
        )

    def _rbinary(self, other, op, sym):
        return ChartFunction(
            self.chart, lambda x: op(other, self.rule(x)), f"({other!r} {sym} {self.label})"
        )

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b, "+")

    def __radd__(self, other):
        return self._rbinary(other, lambda a, b: a + b, "+")

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b, "-")

    def __rsub__(self, other):
        return self._rbinary(other, lambda a, b: a - b, "-")

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b, "*")

    def __rmul__(self, other):
        return self._rbinary(other, lambda a, b: a * b, "*")

    def __truediv__(self, other):
        return self._binary(other, lambda a, b: a / b, "/")

    def __rtruediv__(self, other):
        return self._rbinary(other, lambda a, b: a / b, "/")

    def __pow__(self, n):
        return ChartFunction(self.chart, lambda x: self.rule(x) ** n, f"({self.label})**{n}")

    def __neg__(self):
        return ChartFunction(self.chart, lambda x: -self.rule(x), f"-{self.label}")


def _as_values(x, chart):
    if isinstance(x, ChartPoint):
        return list(x.values)
    return [x[n] for n in chart.names]


def _grad_lifted(f: ChartFunction, values):
    names = f.chart.names

    def fun(vs):
        return f.rule(dict(zip(names, vs)))

    return ad.value_and_gradient(fun, values)


def gradient(f: ChartFunction, x) -> np.ndarray:
    """Exact first derivatives over ``f.chart.names`` (Casimirs included)."""
    _, g = guarded(_grad_lifted, f, _as_values(x, f.chart))
    g = np.array([float(v) for v in g])
    return g


def hessian(f: ChartFunction, x) -> np.ndarray:
    names = f.chart.names

    def fun(vs):
        return f.rule(dict(zip(names, vs)))

    _, _, h = guarded(ad.hessian_values, fun, _as_values(x, f.chart))
    return np.array(h, dtype=float)


def _bracket_value(chart, frule, grule, vals):
    names = chart.names
    values = [vals[n] for n in names]
    _, gf = ad.value_and_gradient(lambda vs: frule(dict(zip(names, vs))), values)
    _, gg = ad.value_and_gradient(lambda vs: grule(dict(zip(names, vs))), values)
    total = None
    for k in range(len(chart.pairs)):
        i, j = 2 * k, 2 * k + 1
        term = gf[i] * gg[j] - gf[j] * gg[i]
        total = term if total is None else total + term
    return total


def poisson_bracket(f: ChartFunction, g: ChartFunction) -> ChartFunction:
    """Canonical bracket sum_i (df/ds_i dg/dp_i - df/dp_i dg/ds_i).

    Casimir directions never enter.  The result is itself a ChartFunction and can
    be bracketed again (nested derivatives are handled by tagged duals).
    """
    if f.chart != g.chart:
        raise ValueError("chart functions live on different charts")
    chart = f.chart
    return ChartFunction(
        chart,
        lambda vals: _bracket_value(chart, f.rule, g.rule, vals),
        f"{{{f.label}, {g.label}}}",
    )


def hamiltonian_vector_field(H: ChartFunction, x) -> np.ndarray:
    """(ds_i/dt, dp_i/dt, ..., 0 for every Casimir) in chart order."""
    g = gradient(H, x)
    return _field_from_gradient(H.chart, g)


def _field_from_gradient(chart, g):
    out = np.zeros_like(g)
    for k in range(len(chart.pairs)):
        out[2 * k] = g[2 * k + 1]
        out[2 * k + 1] = -g[2 * k]
    return out


def iterated_bracket(H: ChartFunction, f: ChartFunction, k: int, x) -> float:
    """``{H, {H, ... {H, f}}}`` with k nested brackets, evaluated at ``x``.

    Uses the Taylor expansion of f along the flow generated by H: the k-fold
    bracket equals ``(-1)^k d^k f/dt^k`` at t = 0.  The flow series is built by
    Picard iteration in truncated power-series arithmetic, which is far cheaper
    than nesting k levels of dual numbers.
    """
    chart = H.chart
    names = chart.names
    x0 = _as_values(x, chart)
    n_pairs = len(chart.pairs)
    tag = ad.new_tag()
    series = [ad.Taylor([v] + [0.0] * k, tag) for v in x0]

    def field(vs):
        _, g = ad.value_and_gradient(lambda ws: H.rule(dict(zip(names, ws))), vs)
        out = list(vs)
        for m in range(n_pairs):
            out[2 * m] = g[2 * m + 1]
            out[2 * m + 1] = -g[2 * m]
        return out

    def picard():
        nonlocal series
        for _ in range(k):
            rates = field(series)
            new = []
            for idx, v0 in enumerate(x0):
                if idx >= 2 * n_pairs:
                    new.append(series[idx])
                    continue
                r = rates[idx]
                rc = r.c if isinstance(r, ad.Taylor) and r.tag == tag else [r] + [0.0] * k
                c = [v0] + [rc[j - 1] / j for j in range(1, k + 1)]
                new.append(ad.Taylor(c, tag))
            series = new
        out = f.rule(dict(zip(names, series)))
        return out

    out = guarded(picard)
    if not (isinstance(out, ad.Taylor) and out.tag == tag):
        return 0.0 if k > 0 else float(out)
    return (-1) ** k * out.derivative(k)
