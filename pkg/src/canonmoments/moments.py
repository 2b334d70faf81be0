"""Moment labels, moment polynomials and the closed single-DOF moment bracket."""

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import MissingMoment

_SINGLE = re.compile(r"^(q(\d*))?(pi(\d*))?$")
_MULTI_TOKEN = re.compile(r"(q|pi)(\d)(?:\^(\d+))?")


@dataclass(frozen=True, order=True)
class MomentIndex:
    """Exponents ``((k_1, l_1), (k_2, l_2), ...)`` of ``q_i`` and ``pi_i`` per DOF."""

    powers: tuple

    def __post_init__(self):
        p = tuple((int(k), int(l)) for k, l in self.powers)
        if not p:
            raise ValueError("a moment index needs at least one DOF")
        if any(k < 0 or l < 0 for k, l in p):
            raise ValueError(f"negative exponent in {p}")
        object.__setattr__(self, "powers", p)

    @classmethod
    def single(cls, q_power, pi_power):
        return cls(((q_power, pi_power),))

    @classmethod
    def from_flat(cls, flat):
        return cls(tuple((flat[2 * i], flat[2 * i + 1]) for i in range(len(flat) // 2)))

    @property
    def flat(self):
        return tuple(e for pair in self.powers for e in pair)

    @property
    def dof(self):
        return len(self.powers)

    @property
    def order(self):
        return sum(k + l for k, l in self.powers)

    @property
    def momentum_degree(self):
        return sum(l for _, l in self.powers)

    @property
    def label(self):
        if self.dof == 1:
            k, l = self.powers[0]
            if k == 0 and l == 0:
                return "1"
            out = ""
            if k:
                out += "q" + (str(k) if k > 1 else "")
            if l:
                out += "pi" + (str(l) if l > 1 else "")
            return out
        parts = []
        for sym, pos in (("q", 0), ("pi", 1)):
            for i, pair in enumerate(self.powers):
                e = pair[pos]
                if e:
                    parts.append(f"{sym}{i + 1}" + (f"^{e}" if e > 1 else ""))
        return "".join(parts) or "1"

    def __str__(self):
        return self.label

    @classmethod
    def parse(cls, label: str, dof: int = 1):
        """Parse ``q2pi``/``q2pi1``/``qpi2`` (one DOF) or ``q1^2``/``q1pi2`` (two DOF)."""
        text = label.strip()
        if dof == 1:
            m = _SINGLE.match(text)
            if not text or m is None:
                raise ValueError(f"malformed moment label {label!r}")
            k = (int(m.group(2)) if m.group(2) else 1) if m.group(1) else 0
            l = (int(m.group(4)) if m.group(4) else 1) if m.group(3) else 0
            return cls.single(k, l)
        pos = 0
        powers = [[0, 0] for _ in range(dof)]
        while pos < len(text):
            m = _MULTI_TOKEN.match(text, pos)
            if m is None:
                raise ValueError(f"malformed moment label {label!r}")
            i = int(m.group(2)) - 1
            if not 0 <= i < dof:
                raise ValueError(f"DOF index out of range in {label!r}")
            e = int(m.group(3)) if m.group(3) else 1
            powers[i][0 if m.group(1) == "q" else 1] += e
            pos = m.end()
        if pos == 0:
            raise ValueError(f"malformed moment label {label!r}")
        return cls(tuple(tuple(p) for p in powers))


def moments_of_order(order, dof=1):
    """All indices of exactly the given total order."""
    out = []
    for flat in _compositions(order, 2 * dof):
        out.append(MomentIndex.from_flat(flat))
    return sorted(out, key=lambda m: tuple(-e for e in m.flat))


def moments_up_to(order, dof=1):
    return [m for n in range(2, order + 1) for m in moments_of_order(n, dof)]


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _as_index(x, dof=1):
    return x if isinstance(x, MomentIndex) else MomentIndex.parse(x, dof)


class MomentPolynomial:
    """Finite sum of ``coeff * hbar^h * prod(moments)`` with rational coefficients.

    Factors of order 0 are the constant 1 and are dropped; factors of order 1
    vanish identically and annihilate their term.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        acc = {}
        for key, coeff in (terms or {}).items() if isinstance(terms, Mapping) else (terms or []):
            h, factors = key
            self._accumulate(acc, h, factors, coeff)
        self.terms = {k: v for k, v in acc.items() if v != 0}

    @staticmethod
    def _accumulate(acc, h, factors, coeff):
        factors = [f for f in factors if f.order != 0]
        if any(f.order == 1 for f in factors):
            return
        key = (int(h), tuple(sorted(factors, key=_factor_key)))
        acc[key] = acc.get(key, Fraction(0)) + Fraction(coeff)

    @classmethod
    def from_terms(cls, triples):
        """Build from ``(coeff, hbar_power, [MomentIndex, ...])`` triples."""
        return cls([((h, tuple(f)), c) for c, h, f in triples])

    @classmethod
    def moment(cls, index, coeff=1):
        return cls.from_terms([(coeff, 0, [index])])

    def __iter__(self):
        for (h, factors), c in sorted(self.terms.items(), key=_term_sort_key):
            yield c, h, factors

    def __len__(self):
        return len(self.terms)

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)) and other == 0:
            return self.is_zero()
        return isinstance(other, MomentPolynomial) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        acc = dict(self.terms)
        for key, c in other.terms.items():
            acc[key] = acc.get(key, Fraction(0)) + c
        return MomentPolynomial(acc)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor):
        return MomentPolynomial({k: v * Fraction(factor) for k, v in self.terms.items()})

    @staticmethod
    def term_order(h, factors):
        return sum(f.order for f in factors) + 2 * h

    def max_order(self):
        return max((self.term_order(h, f) for (h, f) in self.terms), default=0)

    def truncate(self, s):
        return truncate(self, s)

    def evaluate(self, moments, hbar=1.0):
        """Numeric value given ``moments[MomentIndex] -> value`` (lifted values allowed)."""
        total = 0.0
        for c, h, factors in self:
            term = float(c) * hbar**h
            for f in factors:
                try:
                    term = term * moments[f]
                except KeyError as exc:
                    raise MissingMoment(f.label) from exc
            total = total + term
        return total

    def indices(self):
        return sorted({f for (_, factors) in self.terms for f in factors})

    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        for c, h, factors in self:
            syms = (["hbar" + (f"^{h}" if h > 1 else "")] if h else []) + [f.label for f in factors]
            mag = abs(c)
            if syms:
                body = "*".join(syms) if mag == 1 else f"{mag}*" + "*".join(syms)
            else:
                body = str(mag)
            pieces.append(("-" if c < 0 else "+", body))
        out = pieces[0][1] if pieces[0][0] == "+" else "-" + pieces[0][1]
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out

    __repr__ = __str__


def _factor_key(f):
    return tuple(-e for e in f.flat)


def _term_sort_key(item):
    (h, factors), _ = item
    return (MomentPolynomial.term_order(h, factors), h, [_factor_key(f) for f in factors])


def truncate(poly: MomentPolynomial, s: int) -> MomentPolynomial:
    """Drop every term of semiclassical order above ``s``."""
    if s < 2:
        raise ValueError("truncation order must be at least 2")
    return MomentPolynomial(
        {k: v for k, v in poly.terms.items() if MomentPolynomial.term_order(*k) <= s}
    )


def k_coefficient(n, a, b, c, d):
    """Integer coefficient of the ``(i hbar/2)^(n-1)`` term in the single-DOF bracket."""
    args = (n, a, b, c, d)
    if any(not isinstance(v, int) or v < 0 for v in args):
        raise ValueError("k_coefficient needs non-negative integers")
    top = min(a + c, b + d, a + b, c + d)
    if n < 1 or n > top:
        raise ValueError(f"n={n} outside 1..{top}")
    return sum(
        (-1) ** m
        * math.factorial(m)
        * math.factorial(n - m)
        * math.comb(a, m)
        * math.comb(b, n - m)
        * math.comb(c, n - m)
        * math.comb(d, m)
        for m in range(n + 1)
    )


def bracket_single_dof(A, B, s=None) -> MomentPolynomial:
    """``{Delta(q^b pi^a), Delta(q^d pi^c)}`` for one DOF, truncated at order ``s``.

    ``s=None`` returns the full bracket.
    """
    A, B = _as_index(A), _as_index(B)
    if A.dof != 1 or B.dof != 1:
        raise ValueError("bracket_single_dof takes single-DOF indices")
    (b, a), (d, c) = A.powers[0], B.powers[0]
    one = MomentIndex.single
    terms = []
    if a * d:
        terms.append((a * d, 0, [one(b, a - 1), one(d - 1, c)]))
    if b * c:
        terms.append((-b * c, 0, [one(b - 1, a), one(d, c - 1)]))
    top = min(a + c, b + d, a + b, c + d)
    for n in range(1, top + 1, 2):
        sign = -1 if ((n - 1) // 2) % 2 else 1
        coeff = Fraction(sign * k_coefficient(n, a, b, c, d), 2 ** (n - 1))
        terms.append((coeff, n - 1, [one(b + d - n, a + c - n)]))
    poly = MomentPolynomial.from_terms(terms)
    return poly if s is None else truncate(poly, s)


# --- states ---------------------------------------------------------------


def _expectation_names(dof):
    if dof == 1:
        return ("q", "pi")
    return tuple(n for i in range(1, dof + 1) for n in (f"q{i}", f"pi{i}"))


@dataclass
class MomentState:
    """Numeric moments up to some order plus the expectation values."""

    moments: dict
    hbar: float = 1.0
    expectations: dict = field(default_factory=dict)
    dof: int = 1

    def __post_init__(self):
        self.moments = {_as_index(k, self.dof): float(v) for k, v in self.moments.items()}
        for name in _expectation_names(self.dof):
            self.expectations.setdefault(name, 0.0)

    def __getitem__(self, key):
        idx = _as_index(key, self.dof)
        if idx.order == 1:
            return 0.0
        if idx.order == 0:
            return 1.0
        try:
            return self.moments[idx]
        except KeyError as exc:
            raise MissingMoment(idx.label) from exc

    def __contains__(self, key):
        return _as_index(key, self.dof) in self.moments

    @property
    def order(self):
        return max((m.order for m in self.moments), default=0)

    def lookup(self):
        """Mapping usable by MomentPolynomial.evaluate (order-0/1 handled)."""
        return _StateLookup(self)

    def to_json(self):
        return json.dumps(
            {
                "hbar": self.hbar,
                "dof": self.dof,
                "expectations": dict(self.expectations),
                "moments": {m.label: v for m, v in sorted(self.moments.items())},
            },
            indent=2,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text, dof=None):
        data = json.loads(text) if isinstance(text, str) else dict(text)
        unknown = set(data) - {"hbar", "expectations", "moments", "dof"}
        if unknown:
            raise ValueError(f"unknown keys in moment state: {sorted(unknown)}")
        dof = dof or int(data.get("dof", 1))
        return cls(
            moments=data["moments"],
            hbar=float(data.get("hbar", 1.0)),
            expectations={k: float(v) for k, v in data.get("expectations", {}).items()},
            dof=dof,
        )


class _StateLookup(Mapping):
    def __init__(self, state):
        self.state = state

    def __getitem__(self, key):
        return self.state[key]

    def __iter__(self):
        return iter(self.state.moments)

    def __len__(self):
        return len(self.state.moments)


def uncertainty_check(state: MomentState, tol=1e-12):
    """All DOF pairs ``(j, k)`` (1-based) violating the generalized uncertainty bound."""
    violated = []
    hbar = state.hbar
    for j in range(state.dof):
        for k in range(state.dof):
            qq = [(0, 0)] * state.dof
            pp = [(0, 0)] * state.dof
            qp = [[0, 0] for _ in range(state.dof)]
            qq[j] = (2, 0)
            pp[k] = (0, 2)
            qp[j][0] += 1
            qp[k][1] += 1
            need = [MomentIndex(tuple(qq)), MomentIndex(tuple(pp)), MomentIndex(tuple(map(tuple, qp)))]
            for idx in need:
                if idx not in state.moments:
                    raise MissingMoment(idx.label)
            lhs = state.moments[need[0]] * state.moments[need[1]] - state.moments[need[2]] ** 2
            bound = hbar**2 / 4 if j == k else 0.0
            if lhs < bound - tol:
                violated.append((j + 1, k + 1))
    return violated
