"""Solvers for the one-dimensional systems along a normal curve.

Exact routes (transport, implicit solution of scalar conservation laws,
characteristics of ``f b_1`` flows) and a finite-difference oracle for
general quasilinear systems ``d tau/dt + M(tau) d tau/dx = s``.
"""

from __future__ import annotations

import collections

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .errors import (
    BlowupError,
    DegenerateRatioError,
    InvalidInputError,
    NotHyperbolicError,
    NumericalError,
)
from .fields import EXTRAPOLATE, PERIODIC, ScalarField, grid_derivative, stack_fields
from .flows import (
    GeneratingFamily,
    IMAG_TOL,
    ScalarFlux,
    TruncatedSystem,
    classify_field,
    worst_classification,
    NOT_HYPERBOLIC,
)

NEWTON_TOL = 1e-12
NEWTON_MAXIT = 50


# --------------------------------------------------------------- transport


def solve_transport(c, field0: ScalarField, t):
    """Simple wave ``u(x, t) = u0(x - c t)``."""
    if t < 0:
        raise InvalidInputError("t must be non-negative")
    shift = c * t
    x = field0.x
    func = None
    if field0.func is not None:
        f0 = field0.func
        func = lambda xq: f0(np.asarray(xq) - shift)  # noqa: E731
    return field0.with_values(field0(x - shift), func=func)


# ---------------------------------------------------- scalar conservation


def _slope_field(lambda0: ScalarField):
    if lambda0.dfunc is not None:
        return lambda0.dfunc(lambda0.x) + 0.0 * lambda0.x
    return grid_derivative(lambda0.values, lambda0.dx, lambda0.boundary)


def blowup_time_conservation(flux: ScalarFlux, lambda0: ScalarField):
    """First time characteristics of ``d lam/dt + (1/2) d psi(lam)/dx = 0`` cross.

    ``T = -2 / min d/dx psi'(lam0)``, infinite when that minimum is >= 0.
    With an exact ``dfunc`` the chain rule is used; otherwise central
    differences of ``psi'(lam0)`` on the grid.
    """
    if lambda0.dfunc is not None:
        rate = flux.d2(lambda0.values) * _slope_field(lambda0)
    else:
        rate = grid_derivative(flux.d1(lambda0.values), lambda0.dx, lambda0.boundary)
    low = float(np.min(rate))
    return np.inf if low >= 0 else -2.0 / low


def ricci_umbilical_blowup_time(lambda0: ScalarField, n):
    """Blow-up time of umbilical extrinsic Ricci data, ``T = 1 / (2 (n-1) sup lam0')``."""
    if n < 2:
        raise InvalidInputError("needs n >= 2")
    top = float(np.max(_slope_field(lambda0)))
    return np.inf if top <= 0 else 1.0 / (2.0 * (n - 1) * top)


def characteristic_feet(speed_of, x, t, lo, hi, dspeed_of=None):
    """Solve ``x = xi + speed_of(xi) t`` for ``xi`` by safeguarded Newton.

    ``[lo, hi]`` must bracket the root (widened automatically if not).
    Returns the feet and the achieved residual.
    """
    x = np.asarray(x, dtype=float)

    def g(xi):
        return xi + speed_of(xi) * t - x

    lo = np.array(lo, dtype=float) + 0.0 * x
    hi = np.array(hi, dtype=float) + 0.0 * x
    glo, ghi = g(lo), g(hi)
    for _ in range(60):
        bad = (glo > 0) | (ghi < 0)
        if not np.any(bad):
            break
        width = hi - lo + 1.0
        lo = np.where(glo > 0, lo - width, lo)
        hi = np.where(ghi < 0, hi + width, hi)
        glo, ghi = g(lo), g(hi)
    else:
        raise NumericalError("could not bracket the characteristic foot")

    xi = np.clip(x - speed_of(x) * t, lo, hi)
    tol = NEWTON_TOL * (1.0 + np.abs(x))
    for _ in range(NEWTON_MAXIT):
        gx = g(xi)
        done = np.abs(gx) <= tol
        if np.all(done):
            return xi, gx
        lo = np.where(gx < 0, xi, lo)
        hi = np.where(gx > 0, xi, hi)
        if dspeed_of is not None:
            dg = 1.0 + dspeed_of(xi) * t
        else:
            h = 1e-7 * (1.0 + np.abs(xi))
            dg = 1.0 + (speed_of(xi + h) - speed_of(xi - h)) / (2 * h) * t
        with np.errstate(divide="ignore", invalid="ignore"):
            step = xi - gx / dg
        ok = np.isfinite(step) & (step > lo) & (step < hi) & (dg > 0)
        xi = np.where(done, xi, np.where(ok, step, 0.5 * (lo + hi)))
    gx = g(xi)
    if np.any(np.abs(gx) > tol):
        raise NumericalError(
            f"characteristic solve did not converge (max residual {np.max(np.abs(gx)):.3e})"
        )
    return xi, gx


def _feet_bracket(speed_values, x, t):
    smin, smax = float(np.min(speed_values)), float(np.max(speed_values))
    pad = 0.05 * (smax - smin) * t + 1e-9
    return x - smax * t - pad, x - smin * t + pad


def solve_conservation_law(flux: ScalarFlux, lambda0: ScalarField, t, x=None, return_feet=False):
    """Classical solution of ``d lam/dt + (1/2) d psi(lam)/dx = 0`` before blow-up.

    Implicit form: ``x = xi + (1/2) psi'(lam0(xi)) t`` and
    ``lam(x, t) = lam0(xi)``.
    """
    if t < 0:
        raise InvalidInputError("t must be non-negative")
    T = blowup_time_conservation(flux, lambda0)
    if t >= T:
        raise BlowupError(f"requested t={t} is past the blow-up time {T}", T)
    xs = lambda0.x if x is None else np.asarray(x, dtype=float)
    if t == 0:
        feet = xs.copy()
    else:
        def speed(xi):
            return 0.5 * flux.d1(lambda0(xi))

        def dspeed(xi):
            return 0.5 * flux.d2(lambda0(xi)) * lambda0.slope(xi)

        lo, hi = _feet_bracket(0.5 * flux.d1(lambda0.values), xs, t)
        feet, _ = characteristic_feet(speed, xs, t, lo, hi, dspeed)
    vals = lambda0(feet)
    if x is not None:
        return (vals, feet) if return_feet else vals
    out = lambda0.with_values(vals)
    return (out, feet) if return_feet else out


# ---------------------------------------------------------- blow-up, f b_1


def _check_multi_index(alpha, n, m, l):
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) > n or any(a < 0 for a in alpha):
        raise InvalidInputError(f"bad multi-index {alpha}")
    if sum(alpha) != m or sum((j + 1) * a for j, a in enumerate(alpha)) != l:
        raise InvalidInputError(f"multi-index {alpha} is not in J_({m},{l})")
    return alpha + (0,) * (n - len(alpha))


def blowup_time_monomial(coeffs, tau0, m, l):
    """Blow-up time of ``d g/dt = f b_1`` with ``f`` weighted-homogeneous.

    ``coeffs`` maps multi-indices ``alpha`` (``sum alpha = m``,
    ``sum j alpha_j = l``) to coefficients; ``tau0`` is a list of fields.
    ``T = -(2/(l+1)) / min N(f_0)``; ``N(f_0)`` is exact when every field
    carries ``dfunc``, central differences otherwise.
    """
    n = len(tau0)
    terms = [(_check_multi_index(a, n, m, l), float(c)) for a, c in coeffs.items()]
    tau = stack_fields(tau0)
    f0 = np.zeros(tau.shape[1])
    for alpha, c in terms:
        f0 = f0 + c * np.prod([tau[j] ** a for j, a in enumerate(alpha)], axis=0)
    if all(fd.dfunc is not None for fd in tau0):
        # exact chain rule N(f) = sum_s f_{tau_s} N(tau_s)
        dtau = np.stack([fd.dfunc(fd.x) + 0.0 * fd.x for fd in tau0])
        nf = np.zeros_like(f0)
        for alpha, c in terms:
            for s, a_s in enumerate(alpha):
                if a_s:
                    rest = np.prod([tau[j] ** (a - (j == s)) for j, a in enumerate(alpha)], axis=0)
                    nf = nf + c * a_s * rest * dtau[s]
    else:
        nf = grid_derivative(f0, tau0[0].dx, tau0[0].boundary)
    low = float(np.min(nf))
    return np.inf if low >= 0 else -(2.0 / (l + 1)) / low


@dataclass
class CharacteristicSolution:
    """Fields at time ``t`` plus what each characteristic family carries.

    ``families`` holds dicts with keys ``speed`` (array on the grid),
    ``invariant`` (name) and ``values`` (carried values on the grid).
    """

    t: float
    fields: list
    families: list
    validity_time: float
    method: str
    feet: dict = field(default_factory=dict)


def _b1_parts(family: GeneratingFamily):
    if set(family.funcs) != {1}:
        raise InvalidInputError("characteristics solver handles f b_1 flows only")
    f = family.funcs[1]

    def grad(tau):
        return family.grad(1, tau, 0.0)

    return f, grad


def _tau_callable(tau0):
    if all(fd.func is not None for fd in tau0):
        return lambda xq: np.stack([fd.func(xq) + 0.0 * np.asarray(xq) for fd in tau0])
    return lambda xq: np.stack([fd(xq) for fd in tau0])


def check_trace_condition(family, tau, tol=1e-10):
    """Trace condition: ``trace A != 0`` everywhere or ``A == 0`` identically."""
    f, grad = _b1_parts(family)
    g = grad(tau)
    idx = np.arange(1, tau.shape[0] + 1).reshape((-1,) + (1,) * (tau.ndim - 1))
    lam_tilde = np.sum(0.5 * idx * tau * g, axis=0)
    a_norm = np.max(np.abs(0.5 * idx * tau)) * np.max(np.abs(g)) if g.size else 0.0
    scale = 1.0 + np.max(np.abs(tau)) * (1.0 + np.max(np.abs(g)))
    if a_norm <= tol * scale:
        return "zero", lam_tilde
    if np.min(np.abs(lam_tilde)) <= tol * scale:
        return "violated", lam_tilde
    return "trace", lam_tilde


def solve_characteristics_b1(family: GeneratingFamily, tau0, t, max_step=None):
    """Exact solution of the ``f b_1`` power-sum system by characteristics.

    Routes: constant ``f`` (transport), ``n = 1`` (scalar conservation
    law), weighted-homogeneous ``f`` (straight first family, then the
    ratio invariants ``tau_m / tau_1^m`` along ``dx/dt = f/2``) and a
    semi-Lagrangian march on the Riemann invariants otherwise.
    """
    if t < 0:
        raise InvalidInputError("t must be non-negative")
    n = family.n
    if len(tau0) != n:
        raise InvalidInputError(f"need {n} initial fields")
    f, grad = _b1_parts(family)
    tau = stack_fields(tau0)
    x = tau0[0].x
    state, lam_tilde = check_trace_condition(family, tau)
    if state == "violated":
        raise NotHyperbolicError(
            "trace condition fails on the initial data",
            {"min_abs_trace": float(np.min(np.abs(lam_tilde)))},
        )

    if state == "zero":
        c = f(tau, 0.0)
        if np.ptp(c) > 1e-12 * (1 + np.max(np.abs(c))):
            raise InvalidInputError("f has zero gradient but is not constant")
        speed = 0.5 * float(c[0])
        out = [solve_transport(speed, fd, t) for fd in tau0]
        fam = [{"speed": np.full_like(x, speed), "invariant": f"tau_{i+1}", "values": out[i].values}
               for i in range(n)]
        return CharacteristicSolution(t, out, fam, np.inf, "transport")

    if n == 1:
        flux = ScalarFlux(
            lambda lam: lam * f(lam[None], 0.0),
            lambda lam: f(lam[None], 0.0) + lam * grad(lam[None])[0],
        )
        lam = solve_conservation_law(flux, tau0[0], t)
        T = blowup_time_conservation(flux, tau0[0])
        fam = [{"speed": 0.5 * flux.d1(lam.values), "invariant": "tau_1", "values": lam.values}]
        return CharacteristicSolution(t, [lam], fam, T, "conservation")

    if np.any(tau[0] == 0) or np.any(np.diff(np.sign(tau[0])) != 0):
        raise DegenerateRatioError("tau_1 vanishes on the grid; tau_m / tau_1^m undefined")

    if "m" in family.params and "l" in family.params and family.name == "monomial":
        return _homogeneous_route(family, tau0, t)
    return _semi_lagrangian_route(family, tau0, t, max_step)


def _homogeneous_route(family, tau0, t):
    n = family.n
    f, grad = _b1_parts(family)
    m, l = family.params["m"], family.params["l"]
    tau_at = _tau_callable(tau0)
    base = tau0[0]
    x = base.x
    T = blowup_time_monomial(family.params["coeffs"], tau0, m, l)
    if t >= T:
        raise BlowupError(f"requested t={t} is past the blow-up time {T}", T)

    f0 = lambda xq: f(tau_at(np.asarray(xq, dtype=float)), 0.0)  # noqa: E731
    kappa = 0.5 * (l + 1)
    f0_grid = f0(x)

    def fam1_feet(xq, s):
        if s == 0:
            return np.asarray(xq, dtype=float)
        lo, hi = _feet_bracket(kappa * f0_grid, xq, s)
        feet, _ = characteristic_feet(lambda xi: kappa * f0(xi), xq, s, lo, hi)
        return feet

    def f_at(xq, s):
        return f0(fam1_feet(xq, s))

    feet1 = fam1_feet(x, t)
    fval = f0(feet1)

    # second family: integrate dx/ds = f/2 backwards from (x, t) to s = 0
    if t > 0:
        sol = solve_ivp(
            lambda s, y: 0.5 * f_at(y, s), (t, 0.0), x,
            method="RK45", rtol=1e-10, atol=1e-12, vectorized=False,
        )
        if not sol.success:
            raise NumericalError(f"second-family tracing failed: {sol.message}")
        feet2 = sol.y[:, -1]
    else:
        feet2 = x.copy()
    tau_feet = tau_at(feet2)
    ratios = tau_feet / tau_feet[0] ** np.arange(1, n + 1)[:, None]
    unit = ratios.copy()
    unit[0] = 1.0
    kc = f(unit, 0.0)
    if np.any(kc == 0):
        raise DegenerateRatioError("f vanishes on the unit-ratio state")
    ratio = fval / kc
    sign = np.sign(tau_feet[0])
    mag = np.abs(ratio) ** (1.0 / l)
    tau1 = sign * mag
    tau = ratios * tau1 ** np.arange(1, n + 1)[:, None]
    fields = [base.with_values(tau[i]) for i in range(n)]
    fam = [
        {"speed": kappa * fval, "invariant": "f", "values": fval, "u": m * fval},
        {"speed": 0.5 * fval, "invariant": "tau_m/tau_1^m", "values": ratios[1:]},
    ]
    return CharacteristicSolution(t, fields, fam, T, "homogeneous", {"first": feet1, "second": feet2})


def _periodic_spline(x0, period, vals):
    count = vals.shape[-1]
    xs = x0 + period / count * np.arange(count + 1)
    return CubicSpline(xs, np.append(vals, vals[..., :1], axis=-1), axis=-1, bc_type="periodic")


def _semi_lagrangian_route(family, tau0, t, max_step=None):
    """March the invariants ``f`` and ``C_m`` along their own characteristics."""
    n = family.n
    f, grad = _b1_parts(family)
    base = tau0[0]
    if base.boundary != PERIODIC:
        raise InvalidInputError("the general characteristics route needs periodic data")
    x, dx, x0, period = base.x, base.dx, base.x0, base.period
    tau = stack_fields(tau0)
    idx = np.arange(1, n + 1)[:, None]
    ratios = tau / tau[0] ** idx
    fval = f(tau, 0.0)

    def speeds(tau_s):
        fv = f(tau_s, 0.0)
        lt = np.sum(0.5 * idx * tau_s * grad(tau_s), axis=0)
        return lt + 0.5 * fv, 0.5 * fv

    def rebuild(fv, rat, guess):
        tau1 = guess.copy()
        for _ in range(NEWTON_MAXIT):
            ts = rat * tau1 ** idx
            r = f(ts, 0.0) - fv
            dts = idx * rat * tau1 ** (idx - 1)
            d = np.sum(grad(ts) * dts, axis=0)
            step = r / d
            tau1 = tau1 - step
            if np.max(np.abs(step)) <= 1e-13 * (1 + np.max(np.abs(tau1))):
                break
        else:
            raise NumericalError("could not recover tau_1 from the invariants")
        return rat * tau1 ** idx

    s, cur = 0.0, tau.copy()
    prev_speeds = speeds(cur)
    old_speeds = prev_speeds
    # first-family particles carry their own f; they meet where the
    # classical solution ends
    shift = np.zeros_like(x)
    f_own = fval.copy()
    rat_spl = _periodic_spline(x0, period, ratios)

    def gap(d):
        pos = x + d
        return np.min(np.diff(np.append(pos, pos[0] + period)))

    gap_prev = gap(shift)
    while s < t - 1e-14:
        s1, s2 = prev_speeds
        vmax = max(np.max(np.abs(s1)), np.max(np.abs(s2)), 1e-12)
        dt = min(t - s, 2.0 * dx / vmax, max_step or np.inf)
        feet = []
        for k in range(2):
            # speed at the half step extrapolated in time
            mid = 1.5 * prev_speeds[k] - 0.5 * old_speeds[k]
            spl = _periodic_spline(x0, period, mid)
            xf = x - dt * prev_speeds[k]
            for _ in range(3):
                xf = x - dt * spl(base.wrap(0.5 * (x + xf)))
            feet.append(base.wrap(xf))
        fval = _periodic_spline(x0, period, fval)(feet[0])
        ratios = _periodic_spline(x0, period, ratios)(feet[1])
        cur = rebuild(fval, ratios, cur[0])
        rat_old = rat_spl
        rat_spl = _periodic_spline(x0, period, ratios)
        t1_spl = _periodic_spline(x0, period, cur[0])

        def particle_speed(spl, pos):
            p = base.wrap(pos)
            return speeds(rebuild(f_own, spl(p), t1_spl(p)))[0]

        k1 = particle_speed(rat_old, x + shift)
        k2 = particle_speed(rat_spl, x + shift + dt * k1)
        shift = shift + 0.5 * dt * (k1 + k2)
        old_speeds, prev_speeds = prev_speeds, speeds(cur)
        g = gap(shift)
        if g <= 0:
            hit = s + dt * gap_prev / (gap_prev - g)
            raise BlowupError("characteristics crossed during the march", hit)
        s += dt
        gap_prev = g
    fields = [base.with_values(cur[i]) for i in range(n)]
    fam = [
        {"speed": prev_speeds[0], "invariant": "f", "values": fval},
        {"speed": prev_speeds[1], "invariant": "tau_m/tau_1^m", "values": ratios[1:]},
    ]
    return CharacteristicSolution(t, fields, fam, np.inf, "semi-lagrangian")


# ---------------------------------------------------------- finite differences


@dataclass
class FlowState:
    t: float
    tau: np.ndarray
    extra: dict = field(default_factory=dict)


@dataclass
class Trajectory:
    """Stored samples of a finite-difference run.

    ``gradient_history`` is an array of ``(t, max |d tau/dx|)`` rows.
    ``blowup_estimate`` extrapolates ``1/max|d tau/dx|`` linearly to zero
    when the run stops on gradient growth.
    """

    x: np.ndarray
    dx: float
    boundary: str
    states: list
    gradient_history: np.ndarray
    achieved_t: float
    stop_reason: str
    blowup_estimate: float = np.inf
    steps: int = 0

    @property
    def times(self):
        return np.array([s.t for s in self.states])

    def field(self, i, k=-1):
        return ScalarField(self.x[0], self.dx, self.states[k].tau[i], self.boundary)

    def at(self, t):
        for s in self.states:
            if abs(s.t - t) <= 1e-12 * max(1.0, abs(t)):
                return s
        raise KeyError(t)


def _pad(u, boundary, g=2):
    if boundary == PERIODIC:
        return np.concatenate([u[:, -g:], u, u[:, :g]], axis=1)
    left = [u[:, :1] - k * (u[:, 1:2] - u[:, :1]) for k in range(g, 0, -1)]
    right = [u[:, -1:] + k * (u[:, -1:] - u[:, -2:-1]) for k in range(1, g + 1)]
    return np.concatenate(left + [u] + right, axis=1)


def _spectral_radius(mats):
    n = mats.shape[-1]
    if n == 1:
        ev = mats[..., 0, :].astype(complex)
    elif n == 2:
        # closed form is several times faster than batched eigvals
        half_tr = 0.5 * (mats[..., 0, 0] + mats[..., 1, 1])
        det = mats[..., 0, 0] * mats[..., 1, 1] - mats[..., 0, 1] * mats[..., 1, 0]
        root = np.sqrt((half_tr**2 - det).astype(complex))
        ev = np.stack([half_tr - root, half_tr + root], axis=-1)
    else:
        ev = np.linalg.eigvals(mats)
    rho = np.max(np.abs(ev), axis=-1)
    return ev, rho


def _rhs(u, x, t, system_at, dx, boundary, order, check):
    sysm = system_at(u, x, t)
    mats = sysm.matrix
    ev, rho = _spectral_radius(mats)
    if check:
        bad = np.abs(ev.imag) > IMAG_TOL * np.maximum(rho, 1.0)[:, None]
        if np.any(bad):
            i = int(np.argmax(np.any(bad, axis=-1)))
            raise NotHyperbolicError(
                "complex characteristic speeds", {"index": i, "x": float(x[i]), "eigenvalues": ev[i]}
            )
    up = _pad(u, boundary)
    if order == 1:
        ul, ur = up[:, 1:-2], up[:, 2:-1]
    else:
        slope = 0.5 * (up[:, 2:] - up[:, :-2])
        ul = up[:, 1:-2] + 0.5 * slope[:, :-1]
        ur = up[:, 2:-1] - 0.5 * slope[:, 1:]
    # interfaces i-1/2 .. i+1/2 for the count interior cells: count + 1 faces
    rpad = np.concatenate([rho[:1], rho, rho[-1:]]) if boundary != PERIODIC else np.concatenate(
        [rho[-1:], rho, rho[:1]]
    )
    a = np.maximum(rpad[:-1], rpad[1:])
    mid = 0.5 * (ul + ur)
    jump = ur - ul
    du = (mid[:, 1:] - mid[:, :-1]) / dx
    diss = (a[1:] * jump[:, 1:] - a[:-1] * jump[:, :-1]) / (2 * dx)
    out = -np.einsum("kij,jk->ik", mats, du) + diss + sysm.source
    return out, rho


def solve_fd(system_at, tau0, t_end, cfl=0.4, sample_times=None, order=2,
             growth_limit=1e6, resolution_limit=0.25, check_initial=True, max_steps=2_000_000):
    """Local Lax-Friedrichs march of ``d tau/dt = -M(tau) d tau/dx + s``.

    ``system_at(tau, x, t)`` returns a batched :class:`TruncatedSystem`.
    Stops early when ``max|d tau/dx|`` grows by ``growth_limit`` or
    becomes unresolved (``dx * max|grad| > resolution_limit * range``),
    and reports an extrapolated blow-up time.
    """
    if not 0 < cfl <= 0.9:
        raise InvalidInputError("cfl must lie in (0, 0.9]")
    if t_end < 0:
        raise InvalidInputError("t_end must be non-negative")
    base = tau0[0]
    u = stack_fields(tau0).copy()
    x, dx, boundary = base.x, base.dx, base.boundary
    samples = sorted(set([0.0, float(t_end)] + [float(s) for s in (sample_times or []) if 0 <= s <= t_end]))

    if check_initial:
        labels = classify_field(system_at(u, x, 0.0))
        if worst_classification(labels) == NOT_HYPERBOLIC:
            bad = int(np.argmax(labels == NOT_HYPERBOLIC))
            raise NotHyperbolicError(
                "system is not hyperbolic on the initial data",
                {"index": bad, "x": float(x[bad]), "classification": NOT_HYPERBOLIC},
            )

    def grad_max(v):
        return float(np.max(np.abs(grid_derivative(v, dx, boundary, axis=1))))

    def comp_grad(v):
        return np.max(np.abs(grid_derivative(v, dx, boundary, axis=1)), axis=1)

    gc0 = comp_grad(u)

    def unresolved(v):
        g = comp_grad(v)
        rng = np.ptp(v, axis=1)
        live = (rng > 1e-8 * (1.0 + np.max(np.abs(v), axis=1))) & (g > 10.0 * gc0)
        return bool(np.any(live & (dx * g > resolution_limit * rng)))

    g0 = grad_max(u)
    hist = [(0.0, g0)]
    states = [FlowState(0.0, u.copy())]
    recent = collections.deque([(0.0, u.copy())], maxlen=256)
    t, steps = 0.0, 0
    k_next = 1
    reason = "completed"
    while k_next < len(samples):
        if steps >= max_steps:
            reason = "max-steps"
            break
        k1, rho = _rhs(u, x, t, system_at, dx, boundary, order, True)
        vmax = float(np.max(rho))
        dt = cfl * dx / vmax if vmax > 0 else samples[-1] - t
        dt = min(dt, samples[k_next] - t)
        u1 = u + dt * k1
        k2, _ = _rhs(u1, x, t + dt, system_at, dx, boundary, order, False)
        u2 = 0.75 * u + 0.25 * (u1 + dt * k2)
        k3, _ = _rhs(u2, x, t + 0.5 * dt, system_at, dx, boundary, order, False)
        new = u / 3.0 + 2.0 / 3.0 * (u2 + dt * k3)
        if not np.all(np.isfinite(new)):
            raise NumericalError("non-finite values in the finite-difference march", t)
        u, t = new, t + dt
        steps += 1
        recent.append((t, u.copy()))
        if abs(t - samples[k_next]) <= 1e-12 * max(1.0, t):
            t = samples[k_next]
            states.append(FlowState(t, u.copy()))
            k_next += 1
        g = grad_max(u)
        hist.append((t, g))
        if g > growth_limit * max(g0, 1e-300):
            reason = "gradient-growth"
            break
        if g0 > 0 and unresolved(u):
            reason = "unresolved-gradient"
            break

    hist = np.array(hist)
    estimate = np.inf
    if reason in ("gradient-growth", "unresolved-gradient"):
        estimate = _extrapolate_blowup(hist)
        # past the predicted breakdown the grid only carries a smeared shock;
        # keep the last step at or before it
        states = [s for s in states if s.t <= estimate]
        t_ok, u_ok = next(((tr, ur) for tr, ur in reversed(recent) if tr <= estimate), recent[0])
        if t_ok > states[-1].t:
            states.append(FlowState(t_ok, u_ok, {"partial": True}))
        t = states[-1].t
    return Trajectory(x, dx, boundary, states, hist, t, reason, estimate, steps)


def _extrapolate_blowup(hist):
    """Zero of a line fitted to ``1/G`` over the late part of the history."""
    t, g = hist[:, 0], hist[:, 1]
    inv = 1.0 / g
    keep = t >= t[-1] - 0.25 * (t[-1] - t[0])
    tt, ii = t[keep], inv[keep]
    if len(tt) < 2:
        return float(t[-1])
    slope, icpt = np.polyfit(tt, ii, 1)
    if slope >= 0:
        return float(t[-1])
    return float(-icpt / slope)


def family_system(family: GeneratingFamily):
    """``system_at`` callback for a type-b family (time-independent coefficients)."""
    from .flows import assemble_type_b

    def system_at(tau, x, t):
        return assemble_type_b(family, tau, t)

    return system_at


def scalar_system(flux: ScalarFlux):
    """``system_at`` for ``d lam/dt + (1/2) psi'(lam) d lam/dx = 0``."""

    def system_at(u, x, t):
        a = 0.5 * flux.d1(u[0])[:, None, None]
        return TruncatedSystem(a, np.zeros_like(a), np.zeros_like(u))

    return system_at
