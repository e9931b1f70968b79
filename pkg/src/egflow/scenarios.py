"""End-to-end worked examples with file output and error metrics."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .errors import BlowupError, InvalidInputError, NotHyperbolicError
from .fields import EXTRAPOLATE, PERIODIC, ScalarField, grid_derivative
from .flows import (
    HYPERBOLIC,
    NOT_HYPERBOLIC,
    STRICT,
    ScalarFlux,
    assemble_type_b,
    classify_field,
    classify_hyperbolicity,
    ent,
    ricci_discriminant_n3,
    ricci_ex,
    sigma_evolution_rhs,
    worst_classification,
)
from .geometry import (
    RotationalMetric,
    SurfaceMetric,
    gauss_curvature_EFG,
    gauss_curvature_flow,
    gauss_curvature_rotational,
    time_integral,
)
from .solvers import (
    blowup_time_conservation,
    family_system,
    scalar_system,
    solve_conservation_law,
    solve_fd,
    solve_transport,
)
from .symmetric import power_sums, sigma_from_tau

SCHEMES = ("auto", "characteristics", "conservation", "fd")


@dataclass
class ScenarioConfig:
    name: str
    grid: tuple | None = None  # (x_min, x_max, cells)
    t_end: float | None = None
    t_samples: int | None = None
    orientation: int | None = None
    scheme: str = "auto"
    flow: str | None = None
    n: int | None = None
    output: str | None = None
    seed: int | None = None
    params: dict = field(default_factory=dict)

    def with_defaults(self):
        base = DEFAULTS.get(self.name)
        if base is None:
            raise InvalidInputError(f"unknown scenario {self.name!r}; known: {', '.join(sorted(DEFAULTS))}")
        merged = replace(
            self,
            grid=self.grid if self.grid is not None else base["grid"],
            t_end=self.t_end if self.t_end is not None else base["t_end"],
            t_samples=self.t_samples if self.t_samples is not None else base["t_samples"],
            orientation=self.orientation if self.orientation is not None else base.get("orientation", 1),
            params={**base.get("params", {}), **self.params},
        )
        merged.validate()
        return merged

    def validate(self):
        a, b, cells = self.grid
        if not (np.isfinite(a) and np.isfinite(b) and b > a):
            raise InvalidInputError("grid needs x_min < x_max")
        if int(cells) != cells or cells < 16:
            raise InvalidInputError("grid needs at least 16 cells")
        if self.t_samples is None or self.t_samples < 2:
            raise InvalidInputError("t_samples must be >= 2")
        if self.t_end is None or self.t_end < 0:
            raise InvalidInputError("t_end must be >= 0")
        if self.orientation not in (1, -1):
            raise InvalidInputError("orientation must be +1 or -1")
        if self.scheme not in SCHEMES:
            raise InvalidInputError(f"scheme must be one of {SCHEMES}")


@dataclass
class RunReport:
    scenario: str
    classification: str
    blowup_time: float
    achieved_t: float
    metrics: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    truncated: bool = False

    def add_metric(self, name, err, tol):
        err = float(err)
        self.metrics[name] = {"max_abs_err": err, "tolerance": float(tol), "pass": bool(err < tol)}

    @property
    def passed(self):
        return all(m["pass"] for m in self.metrics.values())

    def to_dict(self):
        bt = self.blowup_time
        return {
            "scenario": self.scenario,
            "classification": self.classification,
            "blowup_time": "inf" if not np.isfinite(bt) else float(bt),
            "achieved_t": float(self.achieved_t),
            "metrics": self.metrics,
            "files": list(self.files),
        }


# ----------------------------------------------------------------- output


def write_field_csv(path, x, times, values):
    """Rows ``x,t,value`` for every time sample and grid point (finite values only)."""
    values = np.asarray(values, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "t", "value"])
        for k, t in enumerate(times):
            row = values[k]
            for xi, v in zip(x, row):
                if np.isfinite(v):
                    w.writerow([repr(float(xi)), repr(float(t)), repr(float(v))])


def write_report(path, report: RunReport):
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=False)
        fh.write("\n")


class _Writer:
    def __init__(self, cfg, report):
        self.dir = cfg.output
        self.report = report
        self.prefix = cfg.name
        if self.dir:
            os.makedirs(self.dir, exist_ok=True)

    def field(self, name, x, times, values):
        if not self.dir:
            return
        fname = f"{self.prefix}_{name}.csv"
        write_field_csv(os.path.join(self.dir, fname), x, times, values)
        self.report.files.append(fname)

    def finish(self):
        if not self.dir:
            return
        fname = f"{self.prefix}_report.json"
        self.report.files.append(fname)
        write_report(os.path.join(self.dir, fname), self.report)


def _grid(cfg, boundary):
    a, b, cells = cfg.grid
    return ScalarField.from_function(lambda x: 0.0 * x, float(a), float(b), int(cells), boundary)


def _sample_times(cfg, stop=None):
    end = cfg.t_end if stop is None else min(cfg.t_end, stop)
    return np.linspace(0.0, end, cfg.t_samples)


# ------------------------------------------------------- rotational family


def _linear_flux(orientation):
    """``psi = lam``; the orientation sign flips the direction of ``N``."""
    return ScalarFlux.polynomial([0.0, float(orientation)])


def _rotational_run(cfg, phi, dphi, d2phi):
    """Warped product ``dx^2 + phi^2 dy^2`` evolved with ``psi = lam``.

    ``N = orientation * d/dx`` so ``lam_0 = -orientation * phi'/phi`` and
    the transported curvature is ``lam_0(x - orientation * t/2)``.
    """
    sgn = cfg.orientation
    base = _grid(cfg, EXTRAPOLATE)
    x = base.x

    def lam_func(s):
        return -sgn * dphi(s) / phi(s)

    def lam_dfunc(s):
        return -sgn * (phi(s) * d2phi(s) - dphi(s) ** 2) / phi(s) ** 2

    lam0 = ScalarField(base.x0, base.dx, lam_func(x), EXTRAPOLATE, lam_func, lam_dfunc)
    flux = _linear_flux(sgn)
    report = RunReport(cfg.name, STRICT, blowup_time_conservation(flux, lam0), cfg.t_end)
    out = _Writer(cfg, report)

    lam_metric = sgn * RotationalMetric(base.with_values(phi(x))).curvature(order=4).values
    report.add_metric("initial_curvature_from_metric", np.max(np.abs(lam_metric - lam0.values)), 1e-6)

    times = _sample_times(cfg)
    per = int(cfg.params.get("quad_per_sample", 200))
    quad = np.linspace(0.0, cfg.t_end, per * (len(times) - 1) + 1)
    lam_q = np.stack([solve_conservation_law(flux, lam0, s).values for s in quad])
    integral = time_integral(quad, lam_q, "simpson")[::per]
    lam_t = lam_q[::per]
    err = max(np.max(np.abs(lam_t[k] - lam_func(x - 0.5 * sgn * s))) for k, s in enumerate(times))
    report.add_metric("lambda_transport", err, 1e-6)
    return base, times, lam_t, integral, report, out


def run_cone(cfg):
    """Flat cone ``dx^2 + (x sin b)^2 dy^2`` translates along its generators."""
    sb = math.sin(float(cfg.params["beta"]))
    sgn = cfg.orientation
    base, times, lam_t, integral, report, out = _rotational_run(
        cfg, lambda s: s * sb, lambda s: sb + 0.0 * s, lambda s: 0.0 * s
    )
    x = base.x
    phi_t = x * sb * np.exp(0.5 * integral)
    err = max(np.max(np.abs(phi_t[k] - (x - 0.5 * sgn * s) * sb)) for k, s in enumerate(times))
    report.add_metric("translated_cone_profile", err, 1e-6)
    curv = np.stack([gauss_curvature_rotational(base.with_values(p), order=4).values for p in phi_t])
    report.add_metric("flat_cone_curvature", np.max(np.abs(curv)), 1e-6)
    out.field("lambda", x, times, lam_t)
    out.field("phi", x, times, phi_t)
    out.field("K", x, times, curv)
    out.finish()
    return report


def run_circles(cfg):
    """Plane in polar coordinates; the circles stay geodesic-free and flat."""
    sgn = cfg.orientation  # -1: N points towards the centre
    base, times, lam_t, integral, report, out = _rotational_run(
        cfg, lambda r: r + 0.0, lambda r: 1.0 + 0.0 * r, lambda r: 0.0 * r
    )
    x = base.x
    G = x**2 * np.exp(integral)
    ones = base.with_values(np.ones_like(x))
    zeros = base.with_values(np.zeros_like(x))
    K_efg, K_flow = [], []
    for k in range(len(times)):
        lam = base.with_values(lam_t[k])
        K_efg.append(gauss_curvature_EFG(SurfaceMetric(ones, zeros, base.with_values(G[k])), order=4).values)
        n_lam = sgn * grid_derivative(lam_t[k], base.dx, EXTRAPOLATE, order=4)
        K_flow.append(gauss_curvature_flow(integral[k], np.zeros_like(x), lam, n_lam, order=4).values)
    report.add_metric("gauss_curvature_EFG", max(np.max(np.abs(k)) for k in K_efg), 1e-6)
    report.add_metric("gauss_curvature_flow", max(np.max(np.abs(k)) for k in K_flow), 1e-6)
    err_G = max(np.max(np.abs(G[k] - (x - 0.5 * sgn * s) ** 2)) for k, s in enumerate(times))
    report.add_metric("G_closed_form", err_G, 1e-8)
    out.field("lambda", x, times, lam_t)
    out.field("G", x, times, G)
    out.field("K", x, times, np.stack(K_efg))
    out.finish()
    return report


# ------------------------------------------------------------ pseudosphere


def pseudosphere_X(Y, C=0.0):
    r = np.sqrt(4.0 + Y**2)
    return np.log((r - 2.0) / (r + 2.0)) + r + C


def run_pseudosphere(cfg):
    y0, y1 = float(cfg.params["y_min"]), float(cfg.params["y_max"])
    cells = int(cfg.grid[2])
    rhs = lambda X, Y: Y / np.sqrt(4.0 + Y**2)  # noqa: E731
    X0 = pseudosphere_X(y0)
    hit = lambda X, Y: Y[0] - y1  # noqa: E731
    hit.terminal = True
    sol = solve_ivp(rhs, (X0, X0 + 10 * (y1 - y0) + 50), [y0], method="DOP853",
                    rtol=1e-13, atol=1e-14, dense_output=True, events=hit)
    X1 = float(sol.t_events[0][0])
    grid = ScalarField.from_function(lambda s: 0.0 * s, X0, X1, cells, EXTRAPOLATE)
    X = grid.x
    Y = sol.sol(X)[0]
    report = RunReport(cfg.name, STRICT, np.inf, 0.0)
    out = _Writer(cfg, report)
    report.add_metric("closed_form_X_of_Y", np.max(np.abs(pseudosphere_X(Y) - X)), 1e-6)
    dY = rhs(X, Y)
    metric = SurfaceMetric(grid.with_values(1.0 + dY**2), grid.with_values(0.0 * X), grid.with_values(Y**2))
    K = gauss_curvature_EFG(metric, order=4).values
    K_exact = -1.0 / (Y**2 + 2.0) ** 2
    report.add_metric("gauss_curvature", np.max(np.abs(K - K_exact)), 1e-6)
    # decay towards the asymptotic cone
    report.add_metric("curvature_at_y_max", abs(K[-1]), float(cfg.params.get("decay_tol", 1e-4)))
    report.add_metric("curvature_monotone_decay", max(0.0, float(np.max(np.diff(np.abs(K))))), 1e-6)
    out.field("Y", X, [0.0], Y[None])
    out.field("K", X, [0.0], K[None])
    out.finish()
    return report


# -------------------------------------------------------------------- Reeb


REEB_PROFILES = {
    "i": (lambda x: 0.5 * np.pi * x, lambda x: 0.5 * np.pi + 0.0 * x, lambda x: 0.0 * x),
    "ii": (lambda x: 0.5 * np.pi * x**2, lambda x: np.pi * x, lambda x: np.pi + 0.0 * x),
}


def reeb_fields(profile, x, times, orientation=1):
    """Transported leaf curvature and its time integral on the strip.

    ``lam_t(p) = lam_0(q)`` where ``q`` lies ``orientation * t/2`` upstream
    along the normal curve through ``p``.  Points whose upstream curve
    leaves ``|x| < 1`` are returned as NaN.
    """
    alpha, dalpha, _ = REEB_PROFILES[profile]
    lam0 = lambda s: dalpha(s) * np.cos(alpha(s))  # noqa: E731
    m = len(x)

    def rhs(s, z):
        y = z[:m]
        return np.concatenate([0.5 * orientation * np.sin(alpha(y)), lam0(y)])

    z0 = np.concatenate([x, np.zeros(m)])
    if times[-1] > 0:
        sol = solve_ivp(rhs, (0.0, float(times[-1])), z0, t_eval=times, method="DOP853", rtol=1e-12, atol=1e-13)
        feet, I = sol.y[:m].T, sol.y[m:].T
    else:
        feet, I = x[None].copy(), np.zeros((1, m))
    valid = np.abs(feet) < 1.0
    valid = np.logical_and.accumulate(valid, axis=0)
    lam = np.where(valid, lam0(feet), np.nan)
    I = np.where(valid, I, np.nan)
    return lam, I, valid


def _valid_block(valid_row, centre):
    """Slice of the contiguous valid run containing ``centre``."""
    lo = centre
    while lo > 0 and valid_row[lo - 1]:
        lo -= 1
    hi = centre
    while hi < len(valid_row) - 1 and valid_row[hi + 1]:
        hi += 1
    return slice(lo, hi + 1)


def reeb_curvatures(profile, x, dx, lam, I):
    """``K`` from ``E, F, G`` and from the flow formula on one time slice."""
    alpha, dalpha, _ = REEB_PROFILES[profile]
    a = alpha(x)
    e = np.exp(I)
    E = np.sin(a) ** 2 + np.cos(a) ** 2 * e
    F = np.sin(a) * np.cos(a) * (e - 1.0)
    G = np.cos(a) ** 2 + np.sin(a) ** 2 * e
    base = ScalarField(x[0], dx, np.zeros_like(x), EXTRAPOLATE)
    metric = SurfaceMetric(base.with_values(E), base.with_values(F), base.with_values(G))
    K_efg = gauss_curvature_EFG(metric, order=4).values
    w = dalpha(x) * np.sin(a) * np.cos(a)
    n_lam = -np.sin(a) * grid_derivative(lam, dx, EXTRAPOLATE, order=4)
    K_flow = gauss_curvature_flow(I, w, base.with_values(lam), n_lam, order=4).values
    # leaf curvature of g_t read off the metric: lam_0 - (1/2) N(I)
    lam_metric = dalpha(x) * np.cos(a) + 0.5 * np.sin(a) * grid_derivative(I, dx, EXTRAPOLATE, order=4)
    return K_efg, K_flow, lam_metric


def run_reeb(cfg, profile=None):
    profile = profile or cfg.params.get("profile", "i")
    if profile not in REEB_PROFILES:
        raise InvalidInputError(f"unknown Reeb profile {profile!r}")
    a, b, cells = cfg.grid
    if a <= -1 or b >= 1:
        raise InvalidInputError("Reeb grid must lie inside |x| < 1")
    base = _grid(cfg, EXTRAPOLATE)
    x, dx = base.x, base.dx
    centre = int(np.argmin(np.abs(x)))
    if abs(x[centre]) > 1e-12:
        raise InvalidInputError("Reeb grid must contain x = 0 as a node")
    times = _sample_times(cfg)
    lam, I, valid = reeb_fields(profile, x, times, cfg.orientation)
    alpha, dalpha, _ = REEB_PROFILES[profile]
    report = RunReport(cfg.name, STRICT, np.inf, float(times[-1]))
    out = _Writer(cfg, report)
    Ks, err0, err_flow, err_leaf = [], 0.0, 0.0, 0.0
    lam00 = float(dalpha(0.0))
    for k, t in enumerate(times):
        blk = _valid_block(valid[k], centre)
        K = np.full_like(x, np.nan)
        if blk.stop - blk.start < 9:
            raise InvalidInputError("valid region around x = 0 is too small; shorten t_end")
        K_efg, K_flow, lam_m = reeb_curvatures(profile, x[blk], dx, lam[k, blk], I[k, blk])
        K[blk] = K_efg
        Ks.append(K)
        inner = slice(4, -4)
        err_flow = max(err_flow, float(np.max(np.abs(K_efg[inner] - K_flow[inner]))))
        err_leaf = max(err_leaf, float(np.max(np.abs(lam_m[inner] - lam[k, blk][inner]))))
        closed = -dalpha(0.0) ** 2 * (1.0 - math.exp(-t * lam00))
        err0 = max(err0, abs(K[centre] - closed))
    Ks = np.stack(Ks)
    report.add_metric("K_t0_closed_form", err0, 1e-3 if profile == "i" else 1e-6)
    report.add_metric("K_initial_flat", float(np.nanmax(np.abs(Ks[0]))), 1e-6)
    report.add_metric("K_flow_vs_EFG", err_flow, 1e-3)
    report.add_metric("leaf_curvature_consistency", err_leaf, 1e-6)
    report.add_metric("masked_fraction_at_t_end", 1.0 - float(np.mean(valid[-1])), 1.0)
    if profile == "ii":
        off = int(cfg.params.get("sign_offset", max(1, int(round(0.05 / dx)))))
        left, right = Ks[-1][centre - off], Ks[-1][centre + off]
        changes = np.isfinite(left) and np.isfinite(right) and left * right < 0
        report.add_metric("sign_change_across_0", 0.0 if changes else 1.0, 0.5)
    out.field("lambda", x, times, lam)
    out.field("I", x, times, I)
    out.field("K", x, times, Ks)
    out.finish()
    return report


def run_reeb_i(cfg):
    return run_reeb(cfg, "i")


def run_reeb_ii(cfg):
    return run_reeb(cfg, "ii")


# --------------------------------------------------------- Ricci, n = 2, 3


def _root_fields(roots_funcs, base):
    k = np.stack([f(base.x) for f in roots_funcs])
    n = len(roots_funcs)
    return k, power_sums(k, n)


def _periodic_splines(samples, base):
    xs = np.append(base.x, base.x0 + base.period)
    return [CubicSpline(xs, np.append(v, v[0]), bc_type="periodic") for v in samples]


def trace_periodic(times, speed, base, starts):
    """Curves ``dx/dt = speed(x, t)`` through stored periodic samples.

    ``speed`` has shape ``(len(times), count)``; space is interpolated by
    periodic splines, time linearly, steps are classic RK4 between samples.
    """
    sp = _periodic_splines(speed, base)
    y = np.asarray(starts, dtype=float).copy()
    out = [y.copy()]
    for k in range(len(times) - 1):
        h = times[k + 1] - times[k]

        def f(yy, w):
            q = base.wrap(yy)
            return (1 - w) * sp[k](q) + w * sp[k + 1](q)

        k1 = f(y, 0.0)
        k2 = f(y + 0.5 * h * k1, 0.5)
        k3 = f(y + 0.5 * h * k2, 0.5)
        k4 = f(y + h * k3, 1.0)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(y.copy())
    return np.stack(out)


def sample_periodic(samples, base, paths):
    sp = _periodic_splines(samples, base)
    return np.stack([sp[k](base.wrap(paths[k])) for k in range(len(paths))])


def ricci_n2_roots(x):
    return np.stack([2.0 + 0.5 * np.sin(x), 1.0 + 0.3 * np.cos(x)])


def run_ricci_n2(cfg):
    fam = ricci_ex(2)
    base = _grid(cfg, PERIODIC)
    x, dx = base.x, base.dx
    k0 = ricci_n2_roots(x)
    tau0 = power_sums(k0, 2)
    labels = classify_field(assemble_type_b(fam, tau0))
    cls = worst_classification(labels)
    if cls == NOT_HYPERBOLIC:
        raise NotHyperbolicError("Ricci n=2 data has tau_1 = 0 somewhere", {"classification": cls})
    fine = int(cfg.params.get("dense_samples", 201))
    times = np.linspace(0.0, cfg.t_end, fine)
    traj = solve_fd(family_system(fam), [base.with_values(tau0[i]) for i in range(2)], cfg.t_end,
                    cfl=float(cfg.params.get("cfl", 0.4)), sample_times=list(times), check_initial=False)
    truncated = traj.stop_reason != "completed"
    report = RunReport(cfg.name, cls, traj.blowup_estimate, traj.achieved_t, truncated=truncated)
    out = _Writer(cfg, report)
    st = [s for s in traj.states if not s.extra.get("partial")]
    ts = np.array([s.t for s in st])
    tau = np.stack([s.tau for s in st])  # (T, 2, N)
    disc = np.sqrt(np.maximum(2 * tau[:, 1] - tau[:, 0] ** 2, 0.0))
    k1 = 0.5 * (tau[:, 0] + disc)
    k2 = 0.5 * (tau[:, 0] - disc)
    gap = k2 - k1
    report.add_metric("k2_minus_k1_time_independent", np.max(np.abs(gap - gap[0])), 1e-4)
    sig2 = k1 * k2
    # k1 k2 along dx/dt = -tau_1, traced through the stored samples
    starts = x[:: max(1, len(x) // 64)]
    paths = trace_periodic(ts, -tau[:, 0], base, starts)
    along = sample_periodic(sig2, base, paths)
    report.add_metric("k1k2_along_characteristics", np.max(np.abs(along - along[0])), 1e-4)
    # d sigma_2/dt against the variational formula
    num = np.gradient(sig2, ts, axis=0, edge_order=2)[1:-1]
    rhs_v = np.stack([
        sigma_evolution_rhs(fam, tau[k], grid_derivative(tau[k], dx, PERIODIC, axis=1, order=4), m=2)
        for k in range(1, len(ts) - 1)
    ])
    rel = np.max(np.abs(num - rhs_v)) / np.max(np.abs(rhs_v))
    report.add_metric("sigma2_rate_relative", rel, 1e-3)
    every = max(1, (len(ts) - 1) // (cfg.t_samples - 1))
    sel = slice(0, None, every)
    out.field("tau1", x, ts[sel], tau[sel, 0])
    out.field("tau2", x, ts[sel], tau[sel, 1])
    out.field("k1", x, ts[sel], k1[sel])
    out.field("k2", x, ts[sel], k2[sel])
    out.finish()
    return report


def ricci_n3_classes(s1, s3, s2=0.0):
    """Eigen-based classification and discriminant on a ``(s1, s3)`` grid."""
    fam = ricci_ex(3)
    S1, S3 = np.meshgrid(s1, s3, indexing="ij")
    sig = np.stack([S1.ravel(), np.full(S1.size, s2), S3.ravel()])
    from .symmetric import tau_from_sigma

    tau = tau_from_sigma(sig, 3)
    sysm = assemble_type_b(fam, tau)
    labels = classify_field(sysm).reshape(S1.shape)
    D, dlabel = ricci_discriminant_n3(np.stack([S1, np.full_like(S1, s2), S3]))
    return labels, D, dlabel


CLASS_CODE = {STRICT: 2, HYPERBOLIC: 1, NOT_HYPERBOLIC: 0}


def hyperbolicity_map(flow="ricci_ex", n=3, axis1=(-6.0, 6.0, 100), axis2=(-6.0, 6.0, 100), fixed=0.0):
    """Classification over a two-parameter grid.

    ``n = 3``: axes are ``sigma_1`` and ``sigma_3`` (``sigma_2 = fixed``).
    ``n = 2``: axes are ``tau_1`` and ``tau_2``.
    Returns ``(a1, a2, codes, extra)``.
    """
    if flow != "ricci_ex":
        raise InvalidInputError("maps are implemented for the extrinsic Ricci flow")
    a1 = np.linspace(*axis1[:2], int(axis1[2]))
    a2 = np.linspace(*axis2[:2], int(axis2[2]))
    if n == 3:
        labels, D, dlabel = ricci_n3_classes(a1, a2, fixed)
        strict = labels == STRICT
        mismatch = int(np.sum(strict != (D < 0)))
        codes = np.vectorize(CLASS_CODE.get)(labels)
        return a1, a2, codes, {"D": D, "disagreements": mismatch}
    if n == 2:
        T1, T2 = np.meshgrid(a1, a2, indexing="ij")
        sysm = assemble_type_b(ricci_ex(2), np.stack([T1.ravel(), T2.ravel()]))
        labels = classify_field(sysm).reshape(T1.shape)
        codes = np.vectorize(CLASS_CODE.get)(labels)
        return a1, a2, codes, {}
    raise InvalidInputError("maps need n in {2, 3}")


def run_ricci_n3_map(cfg):
    a, b, cells = cfg.grid
    s1, s3, codes, extra = hyperbolicity_map("ricci_ex", 3, (a, b, cells), (a, b, cells), cfg.params.get("sigma2", 0.0))
    report = RunReport(cfg.name, "map", np.inf, 0.0)
    out = _Writer(cfg, report)
    report.add_metric("strict_region_vs_discriminant", extra["disagreements"], 0.5)
    D, lab = ricci_discriminant_n3([6.0, 11.0, 6.0])
    report.add_metric("discriminant_roots_123", abs(D + 48.0), 1e-12)
    # x column: sigma_1, t column: sigma_3
    out.field("class", s1, s3, codes.T)
    out.finish()
    return report


# ----------------------------------------------------------------- ENT wave


def ent_roots(x):
    return np.stack([1.0 + 0.5 * np.sin(x), 0.3 * np.cos(x), -0.2 + 0.1 * np.sin(2 * x)])


def run_ent_wave(cfg):
    n, s = 3, 1
    fam = ent(s, n)
    base = _grid(cfg, PERIODIC)
    x = base.x
    k0 = ent_roots(x)
    tau0 = power_sums(k0, n)
    cls = worst_classification(classify_field(assemble_type_b(fam, tau0)))
    times = _sample_times(cfg)
    speed = 0.5 * (n - 1) * cfg.orientation
    sig0_func = lambda y: np.sum(ent_roots(y), axis=0)  # noqa: E731
    # N = orientation * d/dx, so the system matrix picks up the sign
    sysfun = family_system(fam)
    system_at = sysfun if cfg.orientation == 1 else (lambda u, xx, t: _scaled(sysfun(u, xx, t), -1.0))
    traj = solve_fd(system_at, [base.with_values(tau0[i]) for i in range(n)], cfg.t_end, sample_times=list(times))
    report = RunReport(cfg.name, cls, np.inf, traj.achieved_t, truncated=traj.stop_reason != "completed")
    out = _Writer(cfg, report)
    sig_fd = np.stack([sigma_from_tau(st.tau)[0] for st in traj.states])
    exact = np.stack([sig0_func(x - speed * t) for t in times])
    report.add_metric("sigma1_fd", np.max(np.abs(sig_fd - exact)), 1e-3)
    field0 = base.with_values(sig0_func(x))  # spline-only, no analytic shortcut
    tr = np.stack([solve_transport(speed, field0, t).values for t in times])
    report.add_metric("sigma1_transport", np.max(np.abs(tr - exact)), 1e-6)
    out.field("sigma1", x, times, sig_fd)
    out.finish()
    return report


def _scaled(sysm, c):
    from .flows import TruncatedSystem

    return TruncatedSystem(c * sysm.A_tilde, c * sysm.B_tilde, sysm.source)


# -------------------------------------------------------- umbilical Burgers


def run_umbilical_burgers(cfg):
    """``psi = lam^2``: ``lam`` obeys the inviscid Burgers equation."""
    sgn = cfg.orientation
    flux = ScalarFlux.polynomial([0.0, 0.0, float(sgn)])
    base = _grid(cfg, PERIODIC)
    x = base.x
    lam0 = ScalarField(base.x0, base.dx, np.sin(x), PERIODIC, np.sin, np.cos)
    T = blowup_time_conservation(flux, lam0)
    truncated = cfg.t_end >= T
    # smooth solution is written up to just before the gradient catastrophe
    stop = min(cfg.t_end, 0.95 * T)
    times = _sample_times(cfg, stop)
    report = RunReport(cfg.name, STRICT, T, float(times[-1]), truncated=truncated)
    out = _Writer(cfg, report)
    exact = np.stack([solve_conservation_law(flux, lam0, t).values for t in times])
    # finite differences are compared on the well-resolved half
    half = min(cfg.t_end, 0.5 * T)
    dense = np.linspace(0.0, half, 81)
    traj = solve_fd(scalar_system(flux), [lam0], half, sample_times=list(dense))
    fd_dense = np.stack([s.tau[0] for s in traj.states])
    ref = np.stack([solve_conservation_law(flux, lam0, t).values for t in dense])
    report.add_metric("fd_vs_implicit", np.max(np.abs(fd_dense - ref)), 1e-3)
    # Burgers residual d_t lam + sgn lam d_x lam on the stored FD samples
    dt_l = np.gradient(fd_dense, dense, axis=0, edge_order=2)
    dx_l = grid_derivative(fd_dense, base.dx, PERIODIC, axis=1, order=4)
    report.add_metric("burgers_residual", np.max(np.abs(dt_l + sgn * fd_dense * dx_l)[1:-1]), 1e-3)
    if truncated:
        blow = solve_fd(scalar_system(flux), [lam0], cfg.t_end)
        report.add_metric("fd_blowup_relative", abs(blow.blowup_estimate - T) / T, 0.1)
    out.field("lambda", x, times, exact)
    out.field("lambda_fd", x, dense, fd_dense)
    out.finish()
    return report


# ------------------------------------------------------------- generic run


_EXPR_NAMES = {k: getattr(np, k) for k in (
    "sin", "cos", "tan", "exp", "log", "sqrt", "tanh", "sinh", "cosh", "arctan", "abs", "pi", "e")}


def eval_profile(expr, x):
    """Evaluate a numpy expression in ``x`` (no builtins available)."""
    try:
        with np.errstate(all="ignore"):
            val = eval(expr, {"__builtins__": {}}, {**_EXPR_NAMES, "x": x})  # noqa: S307
    except Exception as exc:  # noqa: BLE001
        raise InvalidInputError(f"cannot evaluate {expr!r}: {exc}") from exc
    val = np.asarray(val, dtype=float) + 0.0 * x
    if not np.all(np.isfinite(val)):
        raise InvalidInputError(f"{expr!r} is not finite on the grid")
    return val


def _split(text):
    return [p.strip() for p in str(text).split(";") if p.strip()]


# samples this close (relative) to a predicted blow-up count as past it
BLOWUP_MARGIN = 1e-6


def _inline_family(p, n):
    """``f0 = ...``, ``f1 = ...`` keys: numpy expressions in ``tau1..taun`` and ``t``."""
    from .flows import GeneratingFamily

    exprs = {int(k[1:]): str(v) for k, v in p.items() if k[:1] == "f" and k[1:].isdigit()}
    if not exprs:
        raise InvalidInputError("inline flow needs at least one f<j> expression")

    def make(expr):
        def f(tau, t):
            names = {f"tau{i + 1}": tau[i] for i in range(n)}
            try:
                val = eval(expr, {"__builtins__": {}}, {**_EXPR_NAMES, **names, "t": t})  # noqa: S307
            except Exception as exc:  # noqa: BLE001
                raise InvalidInputError(f"cannot evaluate {expr!r}: {exc}") from exc
            return np.asarray(val, dtype=float) + 0.0 * tau[0]

        return f

    return GeneratingFamily(n, {j: make(e) for j, e in exprs.items()}, name="inline")


def _family_from_params(p, n):
    from .flows import preset

    kind = p.get("flow", "ricci_ex")
    if kind == "psi":
        coeffs = [float(c) for c in str(p.get("psi", "0,1")).split(",")]
        return None, ScalarFlux.polynomial(coeffs)
    if kind == "inline":
        return _inline_family(p, n), None
    extra = {k: p[k] for k in ("s", "m") if k in p}
    if "c" in p:
        extra["c"] = float(p["c"])
    extra = {k: (int(v) if k in ("s", "m") else v) for k, v in extra.items()}
    return preset(kind, n, **extra), None


def run_solve(cfg: ScenarioConfig) -> RunReport:
    """Evolve user data under a preset flow.

    ``params``: ``flow`` (``ricci_ex``, ``ent``, ``power``, ``constant``,
    ``psi`` or ``inline`` with ``f0``, ``f1``, ... expressions in
    ``tau1..taun``), ``n``, ``s``/``m``/``c``, ``psi`` (polynomial coefficients),
    ``roots`` or ``tau`` (``;``-separated expressions in ``x``),
    ``lambda0`` for ``psi``, ``boundary`` and ``cfl``.
    """
    if cfg.orientation is None:
        cfg = replace(cfg, orientation=1)
    cfg.validate()
    p = cfg.params
    sgn = cfg.orientation
    n = int(cfg.n or p.get("n", 1))
    boundary = p.get("boundary", PERIODIC)
    base = _grid(cfg, boundary)
    x = base.x
    fam, flux = _family_from_params(p, n)
    # N = orientation * d/dx: every system matrix picks up the sign
    if flux is not None and sgn == -1:
        flux = ScalarFlux(lambda v, f=flux: -f.value(v), lambda v, f=flux: -f.d1(v), lambda v, f=flux: -f.d2(v))
    if fam is not None and sgn == -1 and set(fam.funcs) == {1}:
        from .flows import b1_flow

        f1 = fam.funcs[1]
        fam = b1_flow(n, lambda tau, t, f1=f1: -f1(tau, t), lambda tau, t, g=fam: -g.grad(1, tau, t), fam.name)
    times = _sample_times(cfg)
    scheme = cfg.scheme
    name = cfg.name or "solve"

    if flux is not None:
        if scheme not in ("auto", "conservation", "fd"):
            raise InvalidInputError("psi flows use the conservation or fd scheme")
        expr = p.get("lambda0")
        if expr is None:
            raise InvalidInputError("psi flow needs lambda0")
        h = 1e-5 * max(1.0, abs(base.x0) + base.period)
        lam0 = base.with_values(
            eval_profile(expr, x),
            func=lambda s: eval_profile(expr, s),
            dfunc=lambda s: (eval_profile(expr, s + h) - eval_profile(expr, s - h)) / (2 * h),
        )
        T = blowup_time_conservation(flux, lam0)
        report = RunReport(name, STRICT, T, 0.0)  # one real speed
        out = _Writer(cfg, report)
        keep = times[times < T * (1 - BLOWUP_MARGIN)] if np.isfinite(T) else times
        if scheme == "fd":
            traj = solve_fd(scalar_system(flux), [lam0], float(keep[-1]), sample_times=list(keep))
            vals = np.stack([s.tau[0] for s in traj.states])
            keep = traj.times
        else:
            vals = np.stack([solve_conservation_law(flux, lam0, t).values for t in keep])
        report.achieved_t = float(keep[-1])
        report.truncated = cfg.t_end >= T
        out.field("lambda", x, keep, vals)
        out.finish()
        return report

    if "roots" in p:
        exprs = _split(p["roots"])
        if len(exprs) != n:
            raise InvalidInputError(f"need {n} root expressions")
        tau0 = power_sums(np.stack([eval_profile(e, x) for e in exprs]), n)
    elif "tau" in p:
        exprs = _split(p["tau"])
        if len(exprs) != n:
            raise InvalidInputError(f"need {n} tau expressions")
        tau0 = np.stack([eval_profile(e, x) for e in exprs])
    else:
        raise InvalidInputError("initial data needs roots or tau")
    labels = classify_field(assemble_type_b(fam, tau0))
    cls = worst_classification(labels)
    if cls == NOT_HYPERBOLIC:
        bad = int(np.argmax(labels == NOT_HYPERBOLIC))
        raise NotHyperbolicError("flow is not hyperbolic on the initial data",
                                 {"x": float(x[bad]), "classification": cls})
    fields0 = [base.with_values(tau0[i]) for i in range(n)]
    if scheme == "characteristics" or (scheme == "auto" and set(fam.funcs) == {1} and boundary == PERIODIC):
        from .solvers import solve_characteristics_b1

        T = solve_characteristics_b1(fam, fields0, 0.0).validity_time
        rows = []
        for t in times:
            if t >= T * (1 - BLOWUP_MARGIN):
                break
            try:
                rows.append(np.stack([f.values for f in solve_characteristics_b1(fam, fields0, t).fields]))
            except BlowupError as exc:
                T = exc.blowup_time
                break
        vals = np.stack(rows)
        kept_t = times[: len(rows)]
        report = RunReport(name, cls, T, float(kept_t[-1]), truncated=cfg.t_end >= T)
    elif scheme in ("auto", "fd"):
        sysfun = family_system(fam)
        if sgn == -1 and set(fam.funcs) != {1}:
            sysfun = (lambda u, xx, t, s=sysfun: _scaled(s(u, xx, t), -1.0))
        traj = solve_fd(sysfun, fields0, cfg.t_end, cfl=float(p.get("cfl", 0.4)),
                        sample_times=list(times), check_initial=False)
        kept_t = traj.times
        vals = np.stack([s.tau for s in traj.states])
        report = RunReport(name, cls, traj.blowup_estimate, traj.achieved_t,
                           truncated=traj.stop_reason != "completed")
    else:
        raise InvalidInputError(f"scheme {scheme!r} does not apply to {fam.name}")
    out = _Writer(cfg, report)
    for i in range(n):
        out.field(f"tau{i + 1}", x, kept_t, vals[:, i])
    out.finish()
    return report


# ----------------------------------------------------------------- catalog


DEFAULTS = {
    "cone": {"grid": (2.0, 6.0, 400), "t_end": 1.0, "t_samples": 11, "orientation": 1,
             "params": {"beta": math.pi / 6}},
    "circles": {"grid": (1.0, 2.0, 400), "t_end": 2.0, "t_samples": 11, "orientation": -1},
    "pseudosphere": {"grid": (0.0, 1.0, 4000), "t_end": 0.0, "t_samples": 2,
                     "params": {"y_min": 0.5, "y_max": 10.0}},
    "reeb_i": {"grid": (-0.95, 0.95, 4000), "t_end": 3.0, "t_samples": 7, "orientation": 1,
               "params": {"profile": "i"}},
    "reeb_ii": {"grid": (-0.95, 0.95, 4000), "t_end": 3.0, "t_samples": 7, "orientation": 1,
                "params": {"profile": "ii"}},
    "ricci_n2": {"grid": (0.0, 2 * math.pi, 1000), "t_end": 0.3, "t_samples": 4},
    "ricci_n3_map": {"grid": (-6.0, 6.0, 100), "t_end": 0.0, "t_samples": 2},
    "ent_wave": {"grid": (0.0, 2 * math.pi, 2000), "t_end": 1.0, "t_samples": 5},
    "umbilical_burgers": {"grid": (0.0, 2 * math.pi, 1000), "t_end": 2.0, "t_samples": 5},
}

RUNNERS = {
    "cone": run_cone,
    "circles": run_circles,
    "pseudosphere": run_pseudosphere,
    "reeb_i": run_reeb_i,
    "reeb_ii": run_reeb_ii,
    "ricci_n2": run_ricci_n2,
    "ricci_n3_map": run_ricci_n3_map,
    "ent_wave": run_ent_wave,
    "umbilical_burgers": run_umbilical_burgers,
}


def run_scenario(config: ScenarioConfig) -> RunReport:
    """Run a catalogued example end to end and return its report."""
    cfg = config.with_defaults()
    return RUNNERS[cfg.name](cfg)
