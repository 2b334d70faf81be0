"""Brackets of central moments computed from the Weyl (Moyal) operator algebra.

For Weyl-ordered operators the commutator corresponds to the Moyal bracket of
their symbols, so for raw Weyl moments ``E_a = <W(x^a)>``::

    {E_a, E_b} = <[W(x^a), W(x^b)]> / (i hbar) = <W(moyal(x^a, x^b))>

with ``moyal(f, g) = sum_{odd n} (-1)^((n-1)/2) (hbar/2)^(n-1) / n! * f P^n g``
and ``P = sum_i (d/dq_i x d/dpi_i - d/dpi_i x d/dq_i)``.  Central moments are
polynomials in raw moments (binomial recentering), so the Leibniz rule gives
their brackets; the result is finally re-expressed through central moments.
Everything is done in exact rational arithmetic.

This is independent of the closed single-DOF formula and serves as the oracle
for it and for every multi-DOF bracket.
"""

from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import comb, factorial

from .errors import DegreeTooLarge, MomentError
from .moments import MomentIndex, MomentPolynomial

MAX_DEGREE = 6
_H = ("h",)

# A polynomial is a dict: monomial -> Fraction; a monomial is a sorted tuple of
# (variable, exponent).  Variables: ("E", flat) raw Weyl moment, ("m", i) mean of
# phase-space variable i, ("D", flat) central moment, ("h",) for hbar.


def _mono_mul(a, b):
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def _padd(*polys):
    out = {}
    for p in polys:
        for k, c in p.items():
            out[k] = out.get(k, 0) + c
    return {k: c for k, c in out.items() if c != 0}


def _pmul(p, q):
    out = {}
    for k1, c1 in p.items():
        for k2, c2 in q.items():
            k = _mono_mul(k1, k2)
            out[k] = out.get(k, 0) + c1 * c2
    return {k: c for k, c in out.items() if c != 0}


def _pscale(p, s):
    return {k: c * s for k, c in p.items()} if s != 0 else {}


def _pvar(v, c=1):
    return {((v, 1),): Fraction(c)}


_ONE = {(): Fraction(1)}


def _pderiv(p, var):
    out = {}
    for mono, c in p.items():
        d = dict(mono)
        e = d.get(var, 0)
        if not e:
            continue
        if e == 1:
            del d[var]
        else:
            d[var] = e - 1
        k = tuple(sorted(d.items()))
        out[k] = out.get(k, 0) + c * e
    return {k: c for k, c in out.items() if c != 0}


def _variables(p):
    return sorted({v for mono in p for v, _ in mono if v != _H})


def _unit(i, n):
    return tuple(1 if j == i else 0 for j in range(n))


def _raw(flat):
    """Raw Weyl expectation of the symbol monomial ``x^flat`` as a polynomial."""
    order = sum(flat)
    if order == 0:
        return dict(_ONE)
    if order == 1:
        return _pvar(("m", flat.index(1)))
    return _pvar(("E", flat))


def _central_in_raw(flat):
    n = len(flat)
    terms = []
    for beta in product(*(range(a + 1) for a in flat)):
        coeff = 1
        for a, b in zip(flat, beta):
            coeff *= comb(a, b)
        poly = _pscale(_raw(beta), Fraction(coeff))
        for i, (a, b) in enumerate(zip(flat, beta)):
            for _ in range(a - b):
                poly = _pmul(poly, _pvar(("m", i), -1))
        terms.append(poly)
    return _padd(*terms)


@lru_cache(maxsize=None)
def _poisson_tensor_power(beta, gamma, n):
    """``P^n (x^beta (x) x^gamma)`` as {(beta', gamma'): int}."""
    state = {(beta, gamma): 1}
    dim = len(beta) // 2
    for _ in range(n):
        new = {}
        for (b, g), c in state.items():
            for i in range(dim):
                q, p = 2 * i, 2 * i + 1
                for left, right, sign in ((q, p, 1), (p, q, -1)):
                    if b[left] and g[right]:
                        nb = list(b)
                        ng = list(g)
                        coef = c * sign * b[left] * g[right]
                        nb[left] -= 1
                        ng[right] -= 1
                        key = (tuple(nb), tuple(ng))
                        new[key] = new.get(key, 0) + coef
        state = {k: v for k, v in new.items() if v}
        if not state:
            break
    return state


@lru_cache(maxsize=None)
def _raw_bracket(beta, gamma):
    """{<W(x^beta)>, <W(x^gamma)>} as a polynomial in raw moments and hbar."""
    top = min(sum(beta), sum(gamma))
    total = {}
    for n in range(1, top + 1, 2):
        sign = -1 if ((n - 1) // 2) % 2 else 1
        pref = Fraction(sign, 2 ** (n - 1) * factorial(n))
        hp = {((_H, n - 1),): Fraction(1)} if n > 1 else dict(_ONE)
        for (b, g), c in _poisson_tensor_power(beta, gamma, n).items():
            mono = tuple(x + y for x, y in zip(b, g))
            total = _padd(total, _pscale(_pmul(hp, _raw(mono)), pref * c))
    return total


def _var_flat(var, n):
    return var[1] if var[0] == "E" else _unit(var[1], n)


def _bracket_polys(F, G, n):
    total = {}
    for u in _variables(F):
        dFu = _pderiv(F, u)
        for v in _variables(G):
            rb = _raw_bracket(_var_flat(u, n), _var_flat(v, n))
            if not rb:
                continue
            dGv = _pderiv(G, v)
            total = _padd(total, _pmul(_pmul(dFu, dGv), rb))
    return total


@lru_cache(maxsize=None)
def _raw_in_central(flat):
    n = len(flat)
    terms = []
    for gamma in product(*(range(a + 1) for a in flat)):
        order = sum(gamma)
        if order == 1:
            continue
        coeff = 1
        for a, b in zip(flat, gamma):
            coeff *= comb(a, b)
        poly = dict(_ONE) if order == 0 else _pvar(("D", gamma))
        poly = _pscale(poly, Fraction(coeff))
        for i, (a, b) in enumerate(zip(flat, gamma)):
            for _ in range(a - b):
                poly = _pmul(poly, _pvar(("m", i)))
        terms.append(poly)
    return _padd(*terms)


def _to_central(p):
    out = {}
    for mono, c in p.items():
        term = {(): c}
        for var, e in mono:
            if var[0] == "E":
                sub = _raw_in_central(var[1])
            else:
                sub = _pvar(var)
            for _ in range(e):
                term = _pmul(term, sub)
        out = _padd(out, term)
    return out


def weyl_bracket_oracle(A, B, dof=None) -> MomentPolynomial:
    """Exact ``{Delta_A, Delta_B}`` from the operator algebra (any number of DOF)."""
    if not isinstance(A, MomentIndex):
        A = MomentIndex.parse(A, dof or 1)
    if not isinstance(B, MomentIndex):
        B = MomentIndex.parse(B, dof or A.dof)
    if A.dof != B.dof:
        raise ValueError("moment indices have different DOF counts")
    for idx in (A, B):
        if idx.order > MAX_DEGREE:
            raise DegreeTooLarge(f"{idx.label} has degree {idx.order} > {MAX_DEGREE}")
    n = 2 * A.dof
    F = _central_in_raw(A.flat)
    G = _central_in_raw(B.flat)
    central = _to_central(_bracket_polys(F, G, n))
    triples = []
    for mono, c in central.items():
        h = 0
        factors = []
        for var, e in mono:
            if var == _H:
                h = e
            elif var[0] == "D":
                factors.extend([MomentIndex.from_flat(var[1])] * e)
            else:
                raise MomentError(f"bracket depends on expectation values: {mono}")
        triples.append((c, h, factors))
    return MomentPolynomial.from_terms(triples)
