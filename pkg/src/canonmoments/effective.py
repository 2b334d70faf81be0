"""Effective Hamiltonians and potentials built from a classical potential.

Three levels are provided:

* the Taylor-expanded effective Hamiltonian over a realization (moments of the
  state replaced by their Casimir-Darboux expressions);
* the all-orders potential ``U/(2 m s^2) + (V(q+s) + V(q-s))/2`` obtained from the
  closure Delta(q^n) = s^n (even n), 0 (odd n);
* an exact-diagonalization reference in a harmonic-oscillator basis.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_hermite

from . import autodiff as ad
from .core import CanonicalChart, ChartFunction
from .errors import NoMinimumFound, NonConvergedEigen, SingularChart
from .moments import MomentIndex
from .potentials import ClassicalPotential
from .realizations import get_realization


@dataclass(frozen=True)
class EffectiveModel:
    potential: ClassicalPotential
    realization: str = "order2"
    order: int = None
    m: float = 1.0
    hbar: float = 1.0

    def truncation(self):
        return self.order if self.order is not None else get_realization(self.realization).order


def classical_pairs(dof):
    if dof == 1:
        return (("q", "pi"),)
    return tuple((f"q{i}", f"pi{i}") for i in range(1, dof + 1))


def effective_chart(realization_name) -> CanonicalChart:
    R = get_realization(realization_name)
    return CanonicalChart(classical_pairs(R.dof) + R.chart.pairs, R.chart.casimirs)


def taylor_effective_hamiltonian(model: EffectiveModel) -> ChartFunction:
    """H_eff on the chart (classical pairs, realization pairs; Casimirs)."""
    R = get_realization(model.realization)
    V = model.potential
    V._require_smooth()
    if V.dof != R.dof:
        raise ValueError(f"{V.dof}-DOF potential with {R.dof}-DOF realization")
    chart = effective_chart(model.realization)
    s = model.truncation()
    if s > R.order:
        raise ValueError(f"realization {R.name} only reaches order {R.order}")
    m = model.m
    if R.dof == 1:
        pos = {n: R.moments[MomentIndex.single(n, 0)].rule for n in range(2, s + 1)}
        pi2 = R.moments[MomentIndex.single(0, 2)].rule

        def rule(x):
            coeffs = V.taylor_coefficients(x["q"], s)
            h = x["pi"] * x["pi"] / (2 * m) + pi2(x) / (2 * m) + coeffs[0]
            for n in range(2, s + 1):
                h = h + coeffs[n] * pos[n](x)
            return h

        return ChartFunction(chart, rule, f"H_eff[{V.label},{R.name},s={s}]")

    if s != 2:
        raise ValueError("two-DOF effective Hamiltonian is implemented at order 2")
    M = lambda label: R.moments[MomentIndex.parse(label, 2)].rule  # noqa: E731
    q11, q22, q12, p11, p22 = M("q1^2"), M("q2^2"), M("q1q2"), M("pi1^2"), M("pi2^2")

    def rule2(x):
        q1, q2 = x["q1"], x["q2"]
        v = V(q1, q2)
        v11, v22, v12 = V.hessian2(q1, q2)
        kin = (x["pi1"] ** 2 + x["pi2"] ** 2 + p11(x) + p22(x)) / (2 * m)
        return kin + v + 0.5 * v11 * q11(x) + v12 * q12(x) + 0.5 * v22 * q22(x)

    return ChartFunction(chart, rule2, f"H_eff[{V.label},{R.name}]")


def effective_potential(model: EffectiveModel) -> ChartFunction:
    """H_eff with every canonical momentum set to zero (Casimirs kept)."""
    H = taylor_effective_hamiltonian(model)
    momenta = H.chart.momenta

    def rule(x):
        y = dict(x)
        for p in momenta:
            y[p] = 0.0 * x[p] if isinstance(x[p], ad.Lifted) else 0.0
        return H.rule(y)

    return ChartFunction(H.chart, rule, "V_eff")


def second_order_potential(V: ClassicalPotential, q, s, U, m=1.0):
    """U/(2 m s^2) + V(q) + V''(q) s^2 / 2."""
    c = V.taylor_coefficients(q, 2)
    return U / (2 * m * s * s) + c[0] + c[2] * s * s


def all_orders_potential(V, q, s, U, m=1.0):
    """U/(2 m s^2) + (V(q+s) + V(q-s))/2, valid for non-differentiable V."""
    if not s > 0:
        raise SingularChart(f"s = {s} must be positive")
    return U / (2 * m * s * s) + 0.5 * (V(q + s) + V(q - s))


ALL_ORDERS_CHART = CanonicalChart((("q", "pi"), ("s", "p")), ("U",))


def all_orders_hamiltonian(V, m=1.0) -> ChartFunction:
    """pi^2/2m + p^2/2m + all-orders potential, on chart (q, pi), (s, p); U."""

    def rule(x):
        return (x["pi"] * x["pi"] + x["p"] * x["p"]) / (2 * m) + x["U"] / (2 * m * x["s"] * x["s"]) + 0.5 * (
            V(x["q"] + x["s"]) + V(x["q"] - x["s"])
        )

    return ChartFunction(ALL_ORDERS_CHART, rule, f"H_all_orders[{getattr(V, 'label', '')}]")


# --- ground states --------------------------------------------------------


@dataclass(frozen=True)
class GroundStateEstimate:
    q: float
    s: float
    E: float
    model: str
    n_converged: int


def pattern_search(f, x0, step=0.25, min_step=1e-10, max_iter=20000):
    """Compass search: poll +-step on each axis, accept strict decreases, halve on failure.

    Only strict improvements move the iterate, so flat directions (such as q inside
    the kink plateau of |q|) are never wandered along.
    """
    x = np.array(x0, dtype=float)
    fx = f(x)
    h = step
    it = 0
    while h > min_step and it < max_iter:
        it += 1
        improved = False
        for i in range(len(x)):
            for sgn in (1.0, -1.0):
                y = x.copy()
                y[i] += sgn * h
                fy = f(y)
                if fy < fx:
                    x, fx, improved = y, fy, True
                    break
        if not improved:
            h *= 0.5
    return x, fx


def ground_state_estimate(
    V: ClassicalPotential,
    U=0.25,
    m=1.0,
    model="all_orders",
    q_starts=(0.0,),
    n_starts=16,
    s_range=(1e-2, 10.0),
    q_box=50.0,
):
    """Minimize the static effective potential over (q, s > 0) by multi-start pattern search.

    ``model`` is ``"all_orders"`` or ``"order2"`` (U/(2ms^2) + V + V'' s^2/2).
    Ties between starts are broken toward the smallest |q|.
    """
    if model == "all_orders":
        veff = lambda q, s: all_orders_potential(V, q, s, U, m)  # noqa: E731
    elif model == "order2":
        veff = lambda q, s: second_order_potential(V, q, s, U, m)  # noqa: E731
    else:
        raise ValueError(f"unknown model {model!r}")
    log_lo, log_hi = math.log(1e-6), math.log(1e3)

    def objective(x):
        q, ls = x
        if abs(q) > q_box or not log_lo < ls < log_hi:
            return math.inf
        try:
            val = veff(q, math.exp(ls))
        except (ArithmeticError, ValueError):
            return math.inf
        return val if math.isfinite(val) else math.inf

    best = None
    converged = 0
    for q0 in q_starts:
        for s0 in np.geomspace(*s_range, n_starts):
            x, fx = pattern_search(objective, [q0, math.log(s0)])
            if not math.isfinite(fx):
                continue
            edge = abs(x[0]) > q_box - 1e-3 or x[1] < log_lo + 1e-3 or x[1] > log_hi - 1e-3
            if edge:
                continue
            converged += 1
            if best is None or fx < best[1] - 1e-12 or (abs(fx - best[1]) <= 1e-12 and abs(x[0]) < abs(best[0][0])):
                best = (x, fx)
    if best is None:
        raise NoMinimumFound("every start diverged or left the search box")
    (q, ls), E = best
    return GroundStateEstimate(float(q), float(math.exp(ls)), float(E), model, converged)


def _oscillator_basis_on_nodes(xi, n_basis):
    """Rows u_k(xi_i), k < n_basis, and per-node sums over the full node count.

    The returned ``u`` and ``norm`` share a common (node-dependent) scale that
    cancels in ``u_n u_m / norm``, which equals ``w_i exp(xi_i^2) phi_n phi_m``
    for Gauss-Hermite weights, so nothing underflows at large |xi|.
    """
    n_nodes = len(xi)
    u = np.zeros((n_nodes, n_nodes))
    u[:, 0] = 1.0
    if n_nodes > 1:
        u[:, 1] = math.sqrt(2.0) * xi
    for k in range(1, n_nodes - 1):
        u[:, k + 1] = math.sqrt(2.0 / (k + 1)) * xi * u[:, k] - math.sqrt(k / (k + 1)) * u[:, k - 1]
        big = np.abs(u[:, k + 1]) > 1e150
        if np.any(big):
            u[big, : k + 2] *= 1e-150
    norm = np.sum(u * u, axis=1)
    return u[:, :n_basis], norm


def _exact_levels(V, N, hbar, m, omega, n_nodes):
    xi, _ = roots_hermite(n_nodes)
    b = math.sqrt(hbar / (m * omega))
    u, norm = _oscillator_basis_on_nodes(xi, N)
    q = b * xi
    w = np.array([float(V(float(v))) for v in q]) - 0.5 * m * omega**2 * q * q
    A = u / np.sqrt(norm)[:, None]
    H = A.T @ (w[:, None] * A)
    H[np.diag_indices(N)] += hbar * omega * (np.arange(N) + 0.5)
    return np.linalg.eigvalsh(H)


def exact_ground_state(V: ClassicalPotential, N=200, hbar=1.0, m=1.0, omega=1.0, tol=1e-3, nodes_factor=2):
    """Lowest eigenvalue of p^2/2m + V in the first N oscillator states.

    Matrix elements use Gauss-Hermite quadrature with ``nodes_factor * N`` nodes.
    Raises NonConvergedEigen if halving the basis changes the result by more
    than ``tol``.
    """
    if N < 20:
        raise ValueError("basis size must be at least 20")
    e_full = _exact_levels(V, N, hbar, m, omega, nodes_factor * N)[0]
    e_half = _exact_levels(V, N // 2, hbar, m, omega, nodes_factor * (N // 2))[0]
    if not abs(e_full - e_half) < tol:
        raise NonConvergedEigen(f"E(N={N}) = {e_full} vs E(N={N // 2}) = {e_half}")
    return float(e_full)
