"""Classical potentials with exact derivatives from Taylor-mode differentiation."""

import math
from dataclasses import dataclass, field
from typing import Callable

from . import autodiff as ad
from .errors import SmoothnessRequired


@dataclass(frozen=True)
class Hessian2:
    V11: float
    V22: float
    V12: float

    def is_positive_definite(self):
        return self.V11 > 0 and self.V11 * self.V22 - self.V12**2 > 0


@dataclass(frozen=True)
class ClassicalPotential:
    """V(q) for one DOF or V(q1, q2) for two.

    ``func`` must be written with :mod:`canonmoments.autodiff` elementary
    functions so it accepts lifted numbers.  Non-smooth potentials (``smooth=False``)
    can be evaluated anywhere but refuse Taylor expansion.
    """

    func: Callable
    dof: int = 1
    smooth: bool = True
    label: str = ""
    params: dict = field(default_factory=dict)

    def __call__(self, *q):
        return self.func(*q)

    def _require_smooth(self):
        if not self.smooth:
            raise SmoothnessRequired(f"potential {self.label or self.func} is not differentiable")

    def derivatives(self, q, order):
        """``[V(q), V'(q), ..., V^(order)(q)]`` for one DOF (q may be lifted)."""
        self._require_smooth()
        if self.dof != 1:
            raise ValueError("derivatives() is for one-DOF potentials")
        coeffs = ad.taylor_coefficients(self.func, q, order)
        return [c * math.factorial(k) for k, c in enumerate(coeffs)]

    def taylor_coefficients(self, q, order):
        """``V^(n)(q)/n!`` for n = 0..order."""
        self._require_smooth()
        return ad.taylor_coefficients(self.func, q, order)

    def gradient2(self, q1, q2):
        self._require_smooth()
        _, g = ad.value_and_gradient(lambda v: self.func(v[0], v[1]), [q1, q2])
        return g

    def hessian2(self, q1, q2):
        """Second derivatives (V11, V22, V12); entries may be lifted numbers."""
        self._require_smooth()
        if self.dof != 2:
            raise ValueError("hessian2() is for two-DOF potentials")
        _, _, h = ad.hessian_values(lambda v: self.func(v[0], v[1]), [q1, q2])
        return h[0, 0], h[1, 1], h[0, 1]

    def hessian(self, q1, q2) -> Hessian2:
        v11, v22, v12 = self.hessian2(q1, q2)
        return Hessian2(float(v11), float(v22), float(v12))


def abs_potential(scale=1.0):
    return ClassicalPotential(lambda q: scale * abs(q), 1, False, "abs", {"scale": scale})


def relativistic_sqrt(scale=1.0):
    return ClassicalPotential(
        lambda q: scale * ad.sqrt(1 + q * q), 1, True, "relativistic_sqrt", {"scale": scale}
    )


def harmonic(omega=1.0, m=1.0):
    k = m * omega * omega
    return ClassicalPotential(lambda q: 0.5 * k * q * q, 1, True, "harmonic", {"omega": omega, "m": m})


def quartic_barrier(V_top=1.0, gamma=0.1):
    """(27/4) V_top gamma q^2 (q - 1)(q - 1/gamma): local minimum at 0, barrier near 2/3."""
    if not (V_top > 0 and gamma > 0):
        raise ValueError("quartic barrier needs V_top > 0 and gamma > 0")
    c = 27.0 / 4.0 * V_top * gamma
    inv = 1.0 / gamma
    return ClassicalPotential(
        lambda q: c * q * q * (q - 1) * (q - inv),
        1,
        True,
        "quartic_barrier",
        {"V_top": V_top, "gamma": gamma},
    )


def coupled_harmonic(omega=1.0, gamma=0.5, m=1.0):
    """V = (m w^2/2)(q1^2 + q2^2) + gamma m w^2 q1 q2; normal modes w sqrt(1 +- gamma)."""
    k = m * omega * omega
    return ClassicalPotential(
        lambda q1, q2: 0.5 * k * (q1 * q1 + q2 * q2) + gamma * k * q1 * q2,
        2,
        True,
        "coupled_harmonic",
        {"omega": omega, "gamma": gamma, "m": m},
    )


BUILTIN_POTENTIALS = {
    "abs": abs_potential,
    "relativistic_sqrt": relativistic_sqrt,
    "harmonic": harmonic,
    "quartic_barrier": quartic_barrier,
    "coupled_harmonic": coupled_harmonic,
}


def make_potential(name, **params) -> ClassicalPotential:
    try:
        builder = BUILTIN_POTENTIALS[name]
    except KeyError:
        raise KeyError(f"unknown potential {name!r}; choose from {sorted(BUILTIN_POTENTIALS)}") from None
    return builder(**params)
