"""Forward-mode differentiation with nestable number types.

Two lifted number types are provided:

``Dual``
    value plus a *vector* of first derivatives (one per seeded input).
``Taylor``
    truncated univariate power series ``c0 + c1 t + ... + cK t^K``.

Every lifted number carries an integer tag drawn from a single global counter.
When two lifted numbers with different tags meet, the one with the larger tag
(the most recently started differentiation) becomes the container and the other
is treated as a constant.  This avoids perturbation confusion, so derivatives
can be nested arbitrarily: duals of duals give Hessians, duals of Taylor series
give gradients along a Taylor-expanded flow, and so on.

Elementary functions (``sqrt``, ``sin``, ...) dispatch on the argument type and
fall back to :mod:`math` for plain floats.  Functions meant to be
differentiated must use these instead of :mod:`math`/:mod:`numpy` ufuncs.
"""

import itertools
import math

import numpy as np

_tags = itertools.count(1)


def new_tag():
    return next(_tags)


class Lifted:
    __slots__ = ("tag",)

    # ordering uses the primal value; derivatives are ignored
    def __lt__(self, other):
        return primal(self) < primal(other)

    def __le__(self, other):
        return primal(self) <= primal(other)

    def __gt__(self, other):
        return primal(self) > primal(other)

    def __ge__(self, other):
        return primal(self) >= primal(other)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __abs__(self):
        return -self if primal(self) < 0 else self

    def __float__(self):
        raise TypeError(
            "lifted number used where a float is required; use canonmoments.autodiff "
            "functions instead of math/numpy inside differentiated code"
        )


def primal(x):
    """Strip all derivative layers and return the underlying float."""
    while isinstance(x, Lifted):
        x = x.val if isinstance(x, Dual) else x.c[0]
    return x


def _outranks(other, tag):
    return isinstance(other, Lifted) and other.tag > tag


class Dual(Lifted):
    __slots__ = ("val", "der")

    def __init__(self, val, der, tag):
        self.val = val
        self.der = der
        self.tag = tag

    def __repr__(self):
        return f"Dual({self.val!r}, {self.der!r}, tag={self.tag})"

    def _same(self, other):
        return isinstance(other, Dual) and other.tag == self.tag

    def __neg__(self):
        return Dual(-self.val, -self.der, self.tag)

    def __add__(self, other):
        if self._same(other):
            return Dual(self.val + other.val, self.der + other.der, self.tag)
        if _outranks(other, self.tag):
            return other.__radd__(self)
        return Dual(self.val + other, self.der, self.tag)

    def __radd__(self, other):
        return Dual(other + self.val, self.der, self.tag)

    def __mul__(self, other):
        if self._same(other):
            return Dual(
                self.val * other.val,
                self.der * other.val + other.der * self.val,
                self.tag,
            )
        if _outranks(other, self.tag):
            return other.__rmul__(self)
        return Dual(self.val * other, self.der * other, self.tag)

    def __rmul__(self, other):
        return Dual(other * self.val, self.der * other, self.tag)

    def __truediv__(self, other):
        if self._same(other):
            q = self.val / other.val
            return Dual(q, (self.der - other.der * q) / other.val, self.tag)
        if _outranks(other, self.tag):
            return other.__rtruediv__(self)
        return Dual(self.val / other, self.der / other, self.tag)

    def __rtruediv__(self, other):
        q = other / self.val
        return Dual(q, self.der * (-q / self.val), self.tag)

    def __pow__(self, n):
        if isinstance(n, Lifted):
            if n.tag > self.tag or (isinstance(n, Dual) and n.tag == self.tag):
                return exp(n * log(self))
            # exponent constant with respect to this tag
            return Dual(self.val**n, self.der * (n * self.val ** (n - 1)), self.tag)
        if n == 0:
            return Dual(self.val**0, self.der * 0.0, self.tag)
        return Dual(self.val**n, self.der * (n * self.val ** (n - 1)), self.tag)

    def __rpow__(self, base):
        return exp(log(base) * self)


class Taylor(Lifted):
    """Truncated power series in one auxiliary variable ``t``."""

    __slots__ = ("c",)

    def __init__(self, coeffs, tag):
        self.c = list(coeffs)
        self.tag = tag

    @classmethod
    def variable(cls, x0, order, tag=None, slope=1.0):
        """Series ``x0 + slope*t`` truncated at ``order``."""
        c = [x0, slope] + [0.0] * (order - 1) if order >= 1 else [x0]
        return cls(c, new_tag() if tag is None else tag)

    @property
    def order(self):
        return len(self.c) - 1

    def __repr__(self):
        return f"Taylor({self.c!r}, tag={self.tag})"

    def derivative(self, k):
        """k-th derivative with respect to ``t`` at ``t = 0``."""
        return self.c[k] * math.factorial(k)

    def _same(self, other):
        return isinstance(other, Taylor) and other.tag == self.tag

    def _new(self, c):
        return Taylor(c, self.tag)

    def __neg__(self):
        return self._new([-a for a in self.c])

    def __add__(self, other):
        if self._same(other):
            return self._new([a + b for a, b in zip(self.c, other.c)])
        if _outranks(other, self.tag):
            return other.__radd__(self)
        c = list(self.c)
        c[0] = c[0] + other
        return self._new(c)

    def __radd__(self, other):
        c = list(self.c)
        c[0] = other + c[0]
        return self._new(c)

    def __mul__(self, other):
        if self._same(other):
            a, b = self.c, other.c
            return self._new(
                [sum_(a[j] * b[k - j] for j in range(k + 1)) for k in range(len(a))]
            )
        if _outranks(other, self.tag):
            return other.__rmul__(self)
        return self._new([a * other for a in self.c])

    def __rmul__(self, other):
        return self._new([other * a for a in self.c])

    def __truediv__(self, other):
        if self._same(other):
            return self * other._reciprocal()
        if _outranks(other, self.tag):
            return other.__rtruediv__(self)
        return self._new([a / other for a in self.c])

    def __rtruediv__(self, other):
        return self._reciprocal() * other

    def _reciprocal(self):
        b = self.c
        q = [1.0 / b[0]]
        for k in range(1, len(b)):
            q.append(-sum_(b[j] * q[k - j] for j in range(1, k + 1)) / b[0])
        return self._new(q)

    def __pow__(self, n):
        if isinstance(n, Lifted):
            return exp(n * log(self))
        if isinstance(n, (int, np.integer)) or float(n).is_integer():
            n = int(n)
            if n < 0:
                return self._reciprocal() ** (-n)
            result = self._new([1.0] + [0.0] * self.order)
            base = self
            while n:
                if n & 1:
                    result = result * base
                base = base * base
                n >>= 1
            return result
        return self._real_power(n)

    def __rpow__(self, base):
        return exp(log(base) * self)

    def _real_power(self, a):
        c = self.c
        y = [c[0] ** a]
        for k in range(1, len(c)):
            s = sum_(((a + 1) * j - k) * c[j] * y[k - j] for j in range(1, k + 1))
            y.append(s / (k * c[0]))
        return self._new(y)

    def _compose(self, g):
        """Series of f(self) given the series g of f'(self): k f_k = sum j c_j g_{k-j}."""
        c = self.c
        out = []
        for k in range(1, len(c)):
            out.append(sum_(j * c[j] * g[k - j] for j in range(1, k + 1)) / k)
        return out

    def _exp(self):
        c = self.c
        e = [exp(c[0])]
        for k in range(1, len(c)):
            e.append(sum_(j * c[j] * e[k - j] for j in range(1, k + 1)) / k)
        return self._new(e)

    def _log(self):
        c = self.c
        out = [log(c[0])]
        for k in range(1, len(c)):
            s = sum_(j * out[j] * c[k - j] for j in range(1, k))
            out.append((c[k] - s / k) / c[0])
        return self._new(out)

    def _sincos(self, hyperbolic=False):
        c = self.c
        if hyperbolic:
            s, co = [sinh(c[0])], [cosh(c[0])]
        else:
            s, co = [sin(c[0])], [cos(c[0])]
        sign = 1.0 if hyperbolic else -1.0
        for k in range(1, len(c)):
            s.append(sum_(j * c[j] * co[k - j] for j in range(1, k + 1)) / k)
            co.append(sign * sum_(j * c[j] * s[k - j] for j in range(1, k + 1)) / k)
        return self._new(s), self._new(co)


def sum_(terms):
    """Left-to-right sum that works with lifted numbers (no 0.0 start value issue)."""
    it = iter(terms)
    try:
        total = next(it)
    except StopIteration:
        return 0.0
    for t in it:
        total = total + t
    return total


# --- elementary functions -------------------------------------------------


def sqrt(x):
    if isinstance(x, Dual):
        r = sqrt(x.val)
        return Dual(r, x.der * (0.5 / r), x.tag)
    if isinstance(x, Taylor):
        return x._real_power(0.5)
    return math.sqrt(x)


def exp(x):
    if isinstance(x, Dual):
        r = exp(x.val)
        return Dual(r, x.der * r, x.tag)
    if isinstance(x, Taylor):
        return x._exp()
    return math.exp(x)


def log(x):
    if isinstance(x, Dual):
        return Dual(log(x.val), x.der / x.val, x.tag)
    if isinstance(x, Taylor):
        return x._log()
    return math.log(x)


def sin(x):
    if isinstance(x, Dual):
        return Dual(sin(x.val), x.der * cos(x.val), x.tag)
    if isinstance(x, Taylor):
        return x._sincos()[0]
    return math.sin(x)


def cos(x):
    if isinstance(x, Dual):
        return Dual(cos(x.val), x.der * (-sin(x.val)), x.tag)
    if isinstance(x, Taylor):
        return x._sincos()[1]
    return math.cos(x)


def tan(x):
    if isinstance(x, Lifted):
        return sin(x) / cos(x)
    return math.tan(x)


def sinh(x):
    if isinstance(x, Dual):
        return Dual(sinh(x.val), x.der * cosh(x.val), x.tag)
    if isinstance(x, Taylor):
        return x._sincos(hyperbolic=True)[0]
    return math.sinh(x)


def cosh(x):
    if isinstance(x, Dual):
        return Dual(cosh(x.val), x.der * sinh(x.val), x.tag)
    if isinstance(x, Taylor):
        return x._sincos(hyperbolic=True)[1]
    return math.cosh(x)


def arctan(x):
    if isinstance(x, Dual):
        return Dual(arctan(x.val), x.der / (1.0 + x.val * x.val), x.tag)
    if isinstance(x, Taylor):
        g = (1.0 / (1.0 + x * x)).c
        return x._new([arctan(x.c[0])] + x._compose(g))
    return math.atan(x)


def fabs(x):
    return abs(x)


# --- drivers ----------------------------------------------------------------


def value_and_gradient(fun, values):
    """Evaluate ``fun(list_of_inputs)`` and its gradient in one vector-mode pass.

    ``values`` may themselves be lifted numbers; the returned gradient then has
    lifted entries (this is how nested derivatives are built).
    """
    n = len(values)
    tag = new_tag()
    eye = np.eye(n)
    seeded = [Dual(v, eye[i], tag) for i, v in enumerate(values)]
    out = fun(seeded)
    if isinstance(out, Dual) and out.tag == tag:
        return out.val, out.der
    return out, np.zeros(n)


def hessian_values(fun, values):
    """Value, gradient and Hessian of ``fun`` via nested vector-mode duals."""
    n = len(values)

    def grad_fun(xs):
        return value_and_gradient(fun, xs)

    tag = new_tag()
    eye = np.eye(n)
    seeded = [Dual(v, eye[i], tag) for i, v in enumerate(values)]
    val, grad = grad_fun(seeded)
    hess = np.zeros((n, n), dtype=object)
    g_out = []
    for i, gi in enumerate(grad):
        if isinstance(gi, Dual) and gi.tag == tag:
            g_out.append(gi.val)
            hess[i, :] = gi.der
        else:
            g_out.append(gi)
            hess[i, :] = 0.0
    if isinstance(val, Dual) and val.tag == tag:
        val = val.val
    return val, np.array(g_out), hess


def taylor_coefficients(fun, x0, order):
    """Coefficients ``f^(k)(x0)/k!`` for ``k = 0..order`` of a scalar function."""
    t = Taylor.variable(x0, order)
    out = fun(t)
    if isinstance(out, Taylor) and out.tag == t.tag:
        return list(out.c)
    return [out] + [0.0] * order
