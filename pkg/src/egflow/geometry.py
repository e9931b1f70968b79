"""Metrics along normal curves, their evolution and Gaussian curvature.

Curvature convention: the Weingarten operator is ``A = -nabla N`` on leaf
vectors, so for ``g = g00 dx0^2 + g_ij dx^i dx^j`` with ``g_ij = g_ij(x0)``
one gets ``b_ij = -(1/2) d_0 g_ij / sqrt(g00)``.  For a warped product
``dx0^2 + phi^2 ds^2`` this gives ``lam = -phi'/phi``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid

from .errors import InvalidInputError, InvalidMetricError
from .fields import PERIODIC, ScalarField, grid_derivative
from .flows import GeneratingFamily, ScalarFlux, umbilical_flux
from .solvers import solve_conservation_law
from .symmetric import power_sums


@dataclass(frozen=True)
class BiregularMetric:
    """``g00(x0) dx0^2 + g_ij(x0) dx^i dx^j`` sampled along one normal curve.

    ``leaf`` has shape ``(n, n, count)`` (full symmetric matrix) or
    ``(n, count)`` for a diagonal leaf metric.
    """

    g00: ScalarField
    leaf: np.ndarray

    def __post_init__(self):
        leaf = np.asarray(self.leaf, dtype=float)
        if np.any(self.g00.values <= 0):
            raise InvalidMetricError("g00 must be positive")
        if leaf.shape[-1] != self.g00.count:
            raise InvalidInputError("leaf metric and g00 use different grids")
        if leaf.ndim == 2:
            if np.any(leaf <= 0):
                raise InvalidMetricError("diagonal leaf metric must be positive")
        elif leaf.ndim == 3:
            mats = np.moveaxis(leaf, -1, 0)
            if np.any(np.linalg.eigvalsh(0.5 * (mats + np.swapaxes(mats, 1, 2))) <= 0):
                raise InvalidMetricError("leaf metric is not positive definite")
        else:
            raise InvalidInputError("leaf must have shape (n, count) or (n, n, count)")
        object.__setattr__(self, "leaf", leaf)

    @property
    def n(self):
        return self.leaf.shape[0]

    @property
    def diagonal(self):
        return self.leaf.ndim == 2


@dataclass(frozen=True)
class WeingartenData:
    b: np.ndarray  # second fundamental form, shape like the leaf metric
    A: np.ndarray  # (count, n, n)
    tau: np.ndarray  # (n, count)

    def principal_curvatures(self):
        return np.sort(np.linalg.eigvals(self.A).real, axis=-1).T


def weingarten_from_metric(metric: BiregularMetric, order=2):
    """Second fundamental form, Weingarten operator and power sums."""
    g00 = metric.g00
    root = np.sqrt(g00.values)
    d = grid_derivative(metric.leaf, g00.dx, g00.boundary, axis=-1, order=order)
    b = -0.5 * d / root
    n = metric.n
    if metric.diagonal:
        lam = b / metric.leaf
        A = np.zeros((g00.count, n, n))
        A[:, range(n), range(n)] = lam.T
        tau = np.stack([np.sum(lam ** (j + 1), axis=0) for j in range(n)])
        return WeingartenData(b, A, tau)
    g = np.moveaxis(metric.leaf, -1, 0)
    bb = np.moveaxis(b, -1, 0)
    A = np.linalg.solve(g, bb)
    tau = np.empty((n, g00.count))
    p = np.broadcast_to(np.eye(n), A.shape).copy()
    for j in range(n):
        p = p @ A
        tau[j] = np.trace(p, axis1=1, axis2=2)
    return WeingartenData(b, A, tau)


@dataclass(frozen=True)
class RotationalMetric:
    """``dx0^2 + phi(x0)^2 ds^2`` with ``ds^2`` of curvature one."""

    phi: ScalarField

    def __post_init__(self):
        if np.any(self.phi.values <= 0):
            raise InvalidMetricError("phi must be positive")

    def curvature(self, order=2):
        """Leaf curvature ``lam = -phi'/phi``."""
        d = grid_derivative(self.phi.values, self.phi.dx, self.phi.boundary, order=order)
        return self.phi.with_values(-d / self.phi.values)


@dataclass(frozen=True)
class SurfaceMetric:
    """``E dx^2 + 2F dx dy + G dy^2`` with coefficients depending on ``x`` only."""

    E: ScalarField
    F: ScalarField
    G: ScalarField

    def __post_init__(self):
        det = self.E.values * self.G.values - self.F.values**2
        if np.any(det <= 0):
            raise InvalidMetricError("EG - F^2 must be positive")

    @property
    def det(self):
        return self.E.values * self.G.values - self.F.values**2


# ---------------------------------------------------------- time integrals


def time_integral(times, values, rule="trapezoid"):
    """Cumulative integral over the leading (time) axis, starting at zero."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if rule == "trapezoid":
        return cumulative_trapezoid(values, times, axis=0, initial=0.0)
    if rule == "simpson":
        return cumulative_simpson(values, x=times, axis=0, initial=0.0)
    raise InvalidInputError(f"unknown quadrature rule {rule!r}")


def evolve_conformal(g_hat0, psi, lambda_history, times, rule="trapezoid"):
    """``g_t = g_0 exp(int_0^t psi(lam_s, s) ds)`` at every stored time.

    ``lambda_history`` has shape ``(len(times), count)``; ``psi(lam, t)``
    is vectorized.  Returns an array of the same shape.
    """
    lam = np.asarray(lambda_history, dtype=float)
    times = np.asarray(times, dtype=float)
    vals = np.stack([np.asarray(psi(lam[k], times[k]), dtype=float) + 0.0 * lam[k] for k in range(len(times))])
    integral = time_integral(times, vals, rule)
    g0 = np.asarray(getattr(g_hat0, "values", g_hat0), dtype=float)
    return g0 * np.exp(integral)


def evolve_rotational(phi0, psi, lambda_history, times, rule="trapezoid"):
    """``phi_t = phi_0 exp((1/2) int_0^t psi(lam_s) ds)``."""
    squared = evolve_conformal(np.asarray(getattr(phi0, "values", phi0)) ** 2, psi, lambda_history, times, rule)
    return np.sqrt(squared)


# ------------------------------------------------------ Gaussian curvature


def gauss_curvature_rotational(phi: ScalarField, order=2):
    """``K = -phi''/phi`` for ``dx0^2 + phi^2 dy^2``."""
    if order == 2:
        d2 = phi.second_derivative().values
    else:
        d1 = grid_derivative(phi.values, phi.dx, phi.boundary, order=order)
        d2 = grid_derivative(d1, phi.dx, phi.boundary, order=order)
    return phi.with_values(-d2 / phi.values)


def gauss_curvature_EFG(metric: SurfaceMetric, order=2):
    """``K = -(1/(2 sqrt W)) d/dx (G_x / sqrt W)``, ``W = EG - F^2``."""
    base = metric.G
    W = metric.det
    rw = np.sqrt(W)
    gx = grid_derivative(base.values, base.dx, base.boundary, order=order)
    inner = grid_derivative(gx / rw, base.dx, base.boundary, order=order)
    return base.with_values(-inner / (2 * rw))


def gauss_curvature_brioschi(metric: SurfaceMetric, order=2):
    """Brioschi's formula specialised to ``y``-independent coefficients."""
    E, F, G = metric.E.values, metric.F.values, metric.G.values
    dx, bnd = metric.G.dx, metric.G.boundary

    def d(v):
        return grid_derivative(v, dx, bnd, order=order)

    Ex, Fx, Gx = d(E), d(F), d(G)
    Gxx = d(Gx)
    zero = np.zeros_like(E)
    m1 = np.stack(
        [
            np.stack([-0.5 * Gxx, 0.5 * Ex, Fx], -1),
            np.stack([-0.5 * Gx, E, F], -1),
            np.stack([zero, F, G], -1),
        ],
        -2,
    )
    m2 = np.stack(
        [
            np.stack([zero, zero, 0.5 * Gx], -1),
            np.stack([zero, E, F], -1),
            np.stack([0.5 * Gx, F, G], -1),
        ],
        -2,
    )
    W = E * G - F**2
    return metric.G.with_values((np.linalg.det(m1) - np.linalg.det(m2)) / W**2)


def gauss_curvature_flow(psi_integral, w, lambda_t, N_lambda, density=None, order=2):
    """Curvature of the conformally evolved surface metric from the flow data.

    ``K_t = Div_t(e^{-I} V0) + N(lam_t) - lam_t^2`` where ``I = int psi``,
    ``V0`` is the initial normal acceleration with ``x``-component ``w``
    and ``density`` is ``sqrt(det g_0)`` in the chosen coordinates.  With
    ``det g_t = det g_0 e^{I}`` the divergence reads
    ``(1/(rho0 e^{I/2})) d/dx (rho0 e^{-I/2} w)``.
    """
    base = lambda_t
    I = np.asarray(getattr(psi_integral, "values", psi_integral), dtype=float)
    wv = np.asarray(getattr(w, "values", w), dtype=float)
    rho0 = np.ones_like(I) if density is None else np.asarray(getattr(density, "values", density), dtype=float)
    flux = rho0 * np.exp(-0.5 * I) * wv
    div = grid_derivative(flux, base.dx, base.boundary, order=order) / (rho0 * np.exp(0.5 * I))
    nl = np.asarray(getattr(N_lambda, "values", N_lambda), dtype=float)
    return base.with_values(div + nl - base.values**2)


def volume_rate(psi_values, dvol):
    """``d vol/dt = (1/2) int psi dvol`` by trapezoid quadrature."""
    psi = np.asarray(getattr(psi_values, "values", psi_values), dtype=float)
    if isinstance(dvol, ScalarField):
        return 0.5 * dvol.with_values(psi * dvol.values).integral()
    raise InvalidInputError("dvol must be a ScalarField carrying the grid")


# ------------------------------------------------------ umbilical reduction


@dataclass
class UmbilicalFlow:
    times: np.ndarray
    lam: np.ndarray  # (len(times), count)
    factor: np.ndarray  # exp(int psi), same shape
    flux: ScalarFlux

    def field(self, k, base):
        return base.with_values(self.lam[k])


def umbilical_flow(family: GeneratingFamily, lambda0: ScalarField, t, samples=201, rule="simpson"):
    """Evolve a totally umbilical foliation: one conservation law for ``lam``
    plus the conformal factor ``exp(int_0^t psi(lam_s) ds)``."""
    flux = umbilical_flux(family)
    times = np.linspace(0.0, t, samples)
    lam = np.stack([solve_conservation_law(flux, lambda0, s).values for s in times])
    factor = np.exp(time_integral(times, flux.value(lam), rule))
    return UmbilicalFlow(times, lam, factor, flux)


def umbilical_profile(lam, n, count=None):
    """Power sums of ``n`` equal curvatures ``lam`` (shape ``(count, ...)``)."""
    lam = np.asarray(lam, dtype=float)
    return power_sums(np.broadcast_to(lam, (n,) + lam.shape), count or n)
