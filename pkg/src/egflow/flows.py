"""Generating families, truncated evolution systems and hyperbolicity tests.

Conventions: ``tau`` arrays have shape ``(n, *batch)``; system matrices
have shape ``(*batch, n, n)``.  The spatial derivative along the normal
curve is written ``N``; with the arclength parametrization it is ``d/dx``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .companion import b_n1
from .errors import InvalidInputError
from .symmetric import (
    dtau_decomposition,
    sigma_from_tau,
    sigma_jacobian,
    tau_with_zero,
)

STRICT = "strictly-hyperbolic"
HYPERBOLIC = "hyperbolic"
NOT_HYPERBOLIC = "not-hyperbolic"

IMAG_TOL = 1e-8
RANK_TOL = 1e-8
CLUSTER_RTOL = 1e-5
DISTINCT_RTOL = 1e-9


# ---------------------------------------------------------------- fluxes


@dataclass(frozen=True)
class ScalarFlux:
    """Scalar flux ``psi`` with first and second derivatives.

    Missing derivatives are filled in by central differences.
    """

    psi: Callable
    dpsi: Callable | None = None
    d2psi: Callable | None = None

    def value(self, lam):
        return np.asarray(self.psi(np.asarray(lam, dtype=float)), dtype=float)

    def d1(self, lam):
        lam = np.asarray(lam, dtype=float)
        if self.dpsi is not None:
            return np.asarray(self.dpsi(lam), dtype=float) + 0.0 * lam
        h = 1e-5 * (1.0 + np.abs(lam))
        return (self.value(lam + h) - self.value(lam - h)) / (2 * h)

    def d2(self, lam):
        lam = np.asarray(lam, dtype=float)
        if self.d2psi is not None:
            return np.asarray(self.d2psi(lam), dtype=float) + 0.0 * lam
        h = 1e-4 * (1.0 + np.abs(lam))
        return (self.d1(lam + h) - self.d1(lam - h)) / (2 * h)

    @classmethod
    def polynomial(cls, coeffs):
        """``psi(lam) = sum coeffs[k] lam^k`` with exact derivatives."""
        p = np.polynomial.Polynomial(coeffs)
        dp, d2p = p.deriv(1), p.deriv(2)
        return cls(p, dp, d2p)


# ------------------------------------------------------ generating families


def _fd_gradient(func, tau, t):
    tau = np.asarray(tau, dtype=float)
    n = tau.shape[0]
    grad = np.empty_like(tau)
    for s in range(n):
        h = 1e-6 * (1.0 + np.abs(tau[s]))
        up, dn = tau.copy(), tau.copy()
        up[s] += h
        dn[s] -= h
        grad[s] = (np.asarray(func(up, t)) - np.asarray(func(dn, t))) / (2 * h)
    return grad


@dataclass
class GeneratingFamily:
    """Coefficient functions ``f_j`` of an extrinsic geometric flow.

    ``funcs[j]`` is ``f_j(tau, t)`` for type ``"b"`` or ``f_j(x, t)`` for
    type ``"a"``.  ``partials[j]`` (type b) returns the gradient with
    respect to ``tau_1..tau_n`` stacked on the leading axis; missing
    entries fall back to central differences.
    ``flux`` optionally carries the exact umbilical flux.
    """

    n: int
    funcs: dict
    partials: dict = field(default_factory=dict)
    kind: str = "b"
    name: str = "custom"
    flux: ScalarFlux | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError("n must be positive")
        if self.kind not in ("a", "b"):
            raise InvalidInputError("kind must be 'a' or 'b'")
        if any(j < 0 for j in self.funcs):
            raise InvalidInputError("f_j indices must be non-negative")

    @property
    def indices(self):
        return sorted(self.funcs)

    @property
    def max_index(self):
        return max(self.funcs) if self.funcs else 0

    def f(self, j, arg, t=0.0):
        arg = np.asarray(arg, dtype=float)
        batch = arg.shape[1:] if self.kind == "b" else arg.shape
        if j not in self.funcs:
            return np.zeros(batch)
        return np.asarray(self.funcs[j](arg, t), dtype=float) + np.zeros(batch)

    def grad(self, j, tau, t=0.0):
        """``(f_{j,tau_1}, ..., f_{j,tau_n})`` stacked on axis 0."""
        if self.kind != "b":
            raise InvalidInputError("partials exist only for type-b families")
        tau = np.asarray(tau, dtype=float)
        if j not in self.funcs:
            return np.zeros_like(tau)
        if j in self.partials:
            return np.asarray(self.partials[j](tau, t), dtype=float) + np.zeros_like(tau)
        return _fd_gradient(self.funcs[j], tau, t)

    def normal_derivative(self, j, tau, n_tau, t=0.0):
        """``N(f_j) = sum_s f_{j,tau_s} N(tau_s)``."""
        return np.sum(self.grad(j, tau, t) * np.asarray(n_tau, dtype=float), axis=0)


def _const(c):
    return lambda arg, t: np.full(np.shape(arg)[1:], float(c))


def _tau_component(k, scale=1.0):
    return lambda tau, t: scale * tau[k]


def _unit_grad(n, k, scale=1.0):
    def grad(tau, t):
        g = np.zeros_like(tau)
        g[k] = scale
        return g

    return grad


def _zero_grad(tau, t):
    return np.zeros_like(tau)


def ricci_ex(n):
    """Extrinsic Ricci flow, ``h = -2(tau_1 b_1 - b_2)``.

    For ``n = 2`` the ``b_2`` term is eliminated through
    ``b_2 = tau_1 b_1 - sigma_2 g``, leaving ``f_0 = -2 sigma_2``.
    """
    if n < 2:
        raise InvalidInputError("extrinsic Ricci flow needs n >= 2")
    flux = ScalarFlux.polynomial([0.0, 0.0, 2.0 * (1 - n)])
    if n == 2:
        funcs = {0: lambda tau, t: tau[1] - tau[0] ** 2}

        def g0(tau, t):
            g = np.zeros_like(tau)
            g[0] = -2 * tau[0]
            g[1] = 1.0
            return g

        return GeneratingFamily(2, funcs, {0: g0}, name="ricci_ex", flux=flux)
    funcs = {1: _tau_component(0, -2.0), 2: _const(2.0)}
    partials = {1: _unit_grad(n, 0, -2.0), 2: _zero_grad}
    return GeneratingFamily(n, funcs, partials, name="ricci_ex", flux=flux)


def ent(s, n):
    """Extrinsic Newton transformation flow ``h = T_s(b)``, ``f_j = (-1)^j sigma_{s-j}``."""
    if not 1 <= s < n:
        raise InvalidInputError(f"ENT flow needs 1 <= s < n, got s={s}, n={n}")
    funcs, partials = {}, {}
    for j in range(s + 1):
        k = s - j
        sign = (-1) ** j
        if k == 0:
            funcs[j] = _const(sign)
            partials[j] = _zero_grad
            continue

        def f(tau, t, k=k, sign=sign):
            return sign * sigma_from_tau(tau)[k - 1]

        def g(tau, t, k=k, sign=sign):
            return sign * sigma_jacobian(tau)[k - 1]

        funcs[j], partials[j] = f, g
    return GeneratingFamily(n, funcs, partials, name=f"ent({s})", params={"s": s})


def power(m, n):
    """``f_j = delta_{jm}``: the flow ``dg/dt = b_m``."""
    if not 0 <= m < n:
        raise InvalidInputError(f"power flow needs 0 <= m < n, got m={m}, n={n}")
    coeffs = np.zeros(m + 1)
    coeffs[m] = 1.0
    return GeneratingFamily(
        n, {m: _const(1.0)}, {m: _zero_grad}, name=f"power({m})",
        flux=ScalarFlux.polynomial(coeffs), params={"m": m},
    )


def constant(c, n):
    """``dg/dt = c g``."""
    return GeneratingFamily(
        n, {0: _const(c)}, {0: _zero_grad}, name=f"constant({c})",
        flux=ScalarFlux.polynomial([float(c)]), params={"c": c},
    )


def scalar_psi(flux: ScalarFlux):
    """Codimension-one foliation of a surface (``n = 1``) with ``f_0 = psi(tau_1)``."""
    return GeneratingFamily(
        1,
        {0: lambda tau, t: flux.value(tau[0])},
        {0: lambda tau, t: flux.d1(tau[0])[None]},
        name="scalar_psi",
        flux=flux,
    )


def b1_flow(n, f, grad=None, name="b1_flow"):
    """``dg/dt = f(tau) b_1`` for a user function ``f``."""
    partials = {1: grad} if grad is not None else {}
    return GeneratingFamily(n, {1: f}, partials, name=name)


def monomial(n, coeffs, m, l):
    """``f = sum_alpha c_alpha tau^alpha`` over multi-indices with
    ``sum alpha_j = m`` and ``sum j alpha_j = l``; generates ``f b_1``."""
    terms = []
    for alpha, c in coeffs.items():
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) > n or any(a < 0 for a in alpha):
            raise InvalidInputError(f"bad multi-index {alpha}")
        if sum(alpha) != m or sum((j + 1) * a for j, a in enumerate(alpha)) != l:
            raise InvalidInputError(f"multi-index {alpha} is not in J_({m},{l})")
        terms.append((alpha + (0,) * (n - len(alpha)), float(c)))

    def f(tau, t):
        out = np.zeros(tau.shape[1:])
        for alpha, c in terms:
            out = out + c * np.prod([tau[j] ** a for j, a in enumerate(alpha)], axis=0)
        return out

    def grad(tau, t):
        g = np.zeros_like(tau)
        for alpha, c in terms:
            for s, a_s in enumerate(alpha):
                if a_s == 0:
                    continue
                prod = c * a_s * tau[s] ** (a_s - 1)
                for j, a in enumerate(alpha):
                    if j != s:
                        prod = prod * tau[j] ** a
                g[s] = g[s] + prod
        return g

    fam = b1_flow(n, f, grad, name="monomial")
    fam.params.update({"coeffs": dict(terms), "m": m, "l": l})
    return fam


def preset(kind, n, **kw):
    """Named generating family: ``ricci_ex``, ``ent``, ``power``, ``constant``, ``scalar_psi``."""
    if kind == "ricci_ex":
        return ricci_ex(n)
    if kind == "ent":
        return ent(kw.get("s", 1), n)
    if kind == "power":
        return power(kw.get("m", 1), n)
    if kind == "constant":
        return constant(kw.get("c", 1.0), n)
    if kind == "scalar_psi":
        if n != 1:
            raise InvalidInputError("scalar_psi is defined for n = 1")
        return scalar_psi(kw["flux"])
    raise InvalidInputError(f"unknown preset {kind!r}")


# ------------------------------------------------------- truncated systems


def _batch_matrix(arr):
    """Move the two leading axes of a ``(n, n, *batch)`` array to the end."""
    return np.moveaxis(np.moveaxis(arr, 0, -1), 0, -1)


@dataclass
class TruncatedSystem:
    """``d tau/dt + (A + B) N(tau) = source``; arrays may carry batch axes."""

    A_tilde: np.ndarray
    B_tilde: np.ndarray
    source: np.ndarray

    @property
    def matrix(self):
        return self.A_tilde + self.B_tilde

    @property
    def n(self):
        return self.A_tilde.shape[-1]

    @property
    def classification(self):
        if self.A_tilde.ndim != 2:
            raise InvalidInputError("use classify_field for batched systems")
        return classify_hyperbolicity(self)

    @property
    def eigen(self):
        vals, vecs = np.linalg.eig(self.matrix)
        order = np.argsort(vals.real)
        return [(vals[k], vecs[:, k]) for k in order]

    def at(self, idx):
        """Single-point system from a batched one."""
        src = self.source[(slice(None),) + np.index_exp[idx]]
        return TruncatedSystem(self.A_tilde[idx], self.B_tilde[idx], src)


def _check_tau(tau):
    tau = np.asarray(tau, dtype=float)
    if tau.ndim == 0 or not np.all(np.isfinite(tau)):
        raise InvalidInputError("tau must be a finite vector")
    return tau


def _b_powers(sigma, count):
    b = b_n1(sigma)
    n = b.shape[-1]
    pw = [np.broadcast_to(np.eye(n), b.shape).copy()]
    for _ in range(1, count):
        pw.append(pw[-1] @ b)
    return pw


def assemble_type_b(family: GeneratingFamily, tau, t=0.0):
    """Truncated matrix of the power-sum system for a type-b family."""
    if family.kind != "b":
        raise InvalidInputError("assemble_type_b needs a type-b family")
    tau = _check_tau(tau)
    n = family.n
    if tau.shape[0] != n:
        raise InvalidInputError(f"tau must have {n} entries")
    batch = tau.shape[1:]
    big = n + family.max_index
    tz = tau_with_zero(tau, big)
    a = np.zeros((n, n) + batch)
    b = np.zeros(batch + (n, n))
    pw = _b_powers(sigma_from_tau(tau), family.max_index) if family.max_index else []
    for m in family.indices:
        g = family.grad(m, tau, t)
        for i in range(1, n + 1):
            a[i - 1] += 0.5 * i * tz[i + m - 1] * g
        if m >= 1:
            fm = family.f(m, tau, t)
            b += 0.5 * m * fm[..., None, None] * pw[m - 1]
    return TruncatedSystem(_batch_matrix(a), b, np.zeros((n,) + batch))


def assemble_type_a(family: GeneratingFamily, tau, t, N_of_f, x=None):
    """Truncated system for a type-a family with space-time coefficients.

    ``N_of_f[j]`` (array or dict) is the normal derivative of ``f_j`` at
    the sample points; ``x`` gives those points (scalar when unbatched).
    """
    if family.kind != "a":
        raise InvalidInputError("assemble_type_a needs a type-a family")
    tau = _check_tau(tau)
    n = family.n
    batch = tau.shape[1:]
    xs = np.zeros(batch) if x is None else np.asarray(x, dtype=float) + np.zeros(batch)
    J = family.max_index
    tz = tau_with_zero(tau, n + J)
    pw = _b_powers(sigma_from_tau(tau), max(J, 1))
    mat = np.zeros(batch + (n, n))
    src = np.zeros((n,) + batch)
    if isinstance(N_of_f, dict):
        nf = {j: np.asarray(N_of_f.get(j, 0.0), dtype=float) for j in family.indices}
    else:
        nf = np.asarray(N_of_f, dtype=float)
    for j in family.indices:
        fj = family.f(j, xs, t)
        if j >= 1:
            mat += 0.5 * j * fj[..., None, None] * pw[j - 1]
        for i in range(1, n + 1):
            src[i - 1] -= 0.5 * i * nf[j] * tz[i + j - 1]
    return TruncatedSystem(np.zeros_like(mat), mat, src)


def direct_tau_rhs(family: GeneratingFamily, tau_ext, n_tau_ext, t=0.0):
    """Right-hand side of the untruncated power-sum equations.

    ``tau_ext`` and ``n_tau_ext`` hold ``tau_1..tau_L`` and their normal
    derivatives for ``L >= n + max j - 1`` (e.g. from explicit roots), so
    no elimination is involved.  Returns ``d tau_i/dt`` for ``i = 1..n``.
    """
    n = family.n
    tau_ext = np.asarray(tau_ext, dtype=float)
    ntx = np.asarray(n_tau_ext, dtype=float)
    tau = tau_ext[:n]
    tz = np.concatenate([np.full((1,) + tau.shape[1:], float(n)), tau_ext])
    ntz = np.concatenate([np.zeros((1,) + tau.shape[1:]), ntx])
    out = np.zeros(tau.shape)
    for j in family.indices:
        nfj = family.normal_derivative(j, tau, ntx[:n], t)
        fj = family.f(j, tau, t)
        for i in range(1, n + 1):
            term = tz[i + j - 1] * nfj
            if j >= 1:
                term = term + j * fj / (i + j - 1) * ntz[i + j - 1]
            out[i - 1] -= 0.5 * i * term
    return out


# --------------------------------------------------------- hyperbolicity


@dataclass(frozen=True)
class HyperbolicityReport:
    classification: str
    eigenvalues: np.ndarray
    method: str
    details: dict = field(default_factory=dict)


def _rank_one_shortcut(a, b, tol):
    n = a.shape[0]
    scale = max(1.0, np.max(np.abs(a)), np.max(np.abs(b)))
    c = np.trace(b) / n
    if np.max(np.abs(b - c * np.eye(n))) > tol * scale:
        return None
    sv = np.linalg.svd(a, compute_uv=False)
    if np.sum(sv > tol * scale) > 1:
        return None
    tr = np.trace(a)
    eig = np.full(n, c)
    if abs(tr) > tol * scale:
        eig[0] = c + tr
        cls = STRICT if n <= 2 else HYPERBOLIC
        return HyperbolicityReport(cls, np.sort(eig), "rank-one", {"trace_A": tr})
    if sv[0] <= tol * scale:
        return HyperbolicityReport(STRICT if n == 1 else HYPERBOLIC, eig, "rank-one", {"trace_A": tr})
    return HyperbolicityReport(NOT_HYPERBOLIC, eig, "rank-one", {"trace_A": tr, "nilpotent": True})


def analyze_matrix(mat, tol=RANK_TOL):
    """Classify a real square matrix by its spectrum and eigenbasis."""
    mat = np.asarray(mat, dtype=float)
    n = mat.shape[0]
    vals = np.linalg.eigvals(mat)
    rho = max(np.max(np.abs(vals)), 1e-300)
    if np.max(np.abs(vals.imag)) > IMAG_TOL * max(rho, 1.0):
        return HyperbolicityReport(NOT_HYPERBOLIC, vals, "spectrum", {"complex": True})
    re = np.sort(vals.real)
    scale = max(rho, 1.0)
    # cluster nearly equal eigenvalues, then test the geometric multiplicity
    clusters = [[re[0]]]
    for v in re[1:]:
        if abs(v - clusters[-1][-1]) <= CLUSTER_RTOL * scale:
            clusters[-1].append(v)
        else:
            clusters.append([v])
    norm = max(1.0, np.linalg.norm(mat, 2))
    complete = True
    for cl in clusters:
        if len(cl) == 1:
            continue
        mu = float(np.mean(cl))
        spread = max(abs(v - mu) for v in cl)
        sv = np.linalg.svd(mat - mu * np.eye(n), compute_uv=False)
        nullity = int(np.sum(sv <= max(tol * norm, 10 * spread)))
        if nullity < len(cl):
            complete = False
            break
    if not complete:
        return HyperbolicityReport(NOT_HYPERBOLIC, re, "spectrum", {"defective": True})
    gaps = np.diff(re)
    if n == 1 or np.min(gaps) > DISTINCT_RTOL * scale:
        return HyperbolicityReport(STRICT, re, "spectrum")
    return HyperbolicityReport(HYPERBOLIC, re, "spectrum")


def hyperbolicity_report(system, tol=RANK_TOL):
    if isinstance(system, TruncatedSystem):
        short = _rank_one_shortcut(system.A_tilde, system.B_tilde, tol)
        if short is not None:
            return short
        return analyze_matrix(system.matrix, tol)
    return analyze_matrix(system, tol)


def classify_hyperbolicity(system, tol=RANK_TOL):
    """``"strictly-hyperbolic"``, ``"hyperbolic"`` or ``"not-hyperbolic"``.

    Accepts a :class:`TruncatedSystem` (the rank-one shortcut for
    ``A + c Id`` is tried first) or a bare matrix.
    """
    return hyperbolicity_report(system, tol).classification


def classify_field(system: TruncatedSystem, tol=RANK_TOL):
    """Classification at every batch point of a batched system."""
    shape = system.A_tilde.shape[:-2]
    out = np.empty(shape, dtype=object)
    for idx in np.ndindex(*shape):
        out[idx] = classify_hyperbolicity(system.at(idx), tol)
    return out


def worst_classification(labels):
    order = {STRICT: 0, HYPERBOLIC: 1, NOT_HYPERBOLIC: 2}
    return max(np.ravel(labels), key=order.__getitem__)


def ricci_discriminant_n3(sigma):
    """Discriminant ``D = (4/27) sigma_3 (27 sigma_3 - sigma_1^3)`` of the
    ``n = 3`` Ricci system; strictly hyperbolic exactly when ``D < 0``.

    The characteristic polynomial ``l^3 + 2 s1 l^2 + s1^2 l + 4 s3`` has
    three distinct real roots iff ``s1^3 / s3 > 27``, which is
    ``|s1|^3 > 27 |s3| > 0`` together with ``sign s1 = sign s3``.
    """
    s = np.asarray(sigma, dtype=float)
    s1, s3 = s[0], s[2]
    d = (4.0 / 27.0) * s3 * (27.0 * s3 - s1**3)
    if np.ndim(d) == 0:
        return float(d), (STRICT if d < 0 else "not-strictly-hyperbolic")
    return d, np.where(d < 0, STRICT, "not-strictly-hyperbolic")


# ------------------------------------------------------ derived evolutions


def extended_normal_derivatives(tau, n_tau, count):
    """``N(tau_k)`` for ``k = 0..count`` from ``N(tau_1..tau_n)``.

    Entries above ``n`` use ``N(tau_{n+m}) = (n+m) sum_i c_i N(tau_i)``
    with the beta-coefficient decomposition.
    """
    tau = np.asarray(tau, dtype=float)
    nt = np.asarray(n_tau, dtype=float)
    n = tau.shape[0]
    out = np.zeros((count + 1,) + tau.shape[1:])
    out[1 : min(n, count) + 1] = nt[: min(n, count)]
    sig = sigma_from_tau(tau)
    for k in range(n + 1, count + 1):
        c = dtau_decomposition(n, k - n, sig)
        out[k] = k * np.sum(c * nt, axis=0)
    return out


def sigma_evolution_rhs(family: GeneratingFamily, tau, N_tau, t=0.0, m=1):
    """``d sigma_m / dt`` from the variational formula for ``sigma_m``."""
    n = family.n
    if not 1 <= m <= n:
        raise InvalidInputError("need 1 <= m <= n")
    tau = np.asarray(tau, dtype=float)
    if family.name.startswith("ent(") and family.params.get("s") == m:
        return ent_sigma_rhs(family.params["s"], tau, N_tau)
    J = family.max_index
    top = m - 1 + J
    tz = tau_with_zero(tau, max(top, 1))
    ntz = extended_normal_derivatives(tau, N_tau, max(top, 1))
    sig = np.concatenate([np.ones((1,) + tau.shape[1:]), sigma_from_tau(tau)])
    nf = {j: family.normal_derivative(j, tau, N_tau, t) for j in family.indices}
    fv = {j: family.f(j, tau, t) for j in family.indices}
    total = np.zeros(tau.shape[1:])
    for i in range(m):
        brace = np.zeros(tau.shape[1:])
        for j in family.indices:
            brace = brace + nf[j] * tz[i + j]
            if j >= 1:
                brace = brace + j / (i + j) * fv[j] * ntz[i + j]
        total = total + (-1) ** (i + 1) * sig[m - i - 1] * brace
    return 0.5 * total


def ent_sigma_rhs(s, tau, N_tau):
    """``d sigma_s / dt`` for the Newton-transformation flow of order ``s``."""
    tau = np.asarray(tau, dtype=float)
    n = tau.shape[0]
    tz = tau_with_zero(tau, 2 * s)
    ntz = extended_normal_derivatives(tau, N_tau, 2 * s)
    sig = np.concatenate([np.ones((1,) + tau.shape[1:]), sigma_from_tau(tau)])
    sig = np.concatenate([sig, np.zeros((max(0, s - n),) + tau.shape[1:])])
    jac = sigma_jacobian(tau)
    n_sig = np.concatenate([np.zeros((1,) + tau.shape[1:]), np.einsum("ks...,s...->k...", jac, N_tau)])
    total = np.zeros(tau.shape[1:])
    for i in range(s):
        brace = (-1) ** i * n_sig[s] * tz[i]
        for j in range(1, s + 1):
            brace = brace + (-1) ** (i + j) * (
                n_sig[s - j] * tz[i + j] + j / (i + j) * sig[s - j] * ntz[i + j]
            )
        total = total + sig[s - i - 1] * brace
    return -0.5 * total


def umbilical_psi(family: GeneratingFamily, lam, t=0.0):
    """``psi(lam) = sum_j f_j(n lam, n lam^2, ..., n lam^n) lam^j``."""
    lam = np.asarray(lam, dtype=float)
    n = family.n
    tau = np.stack([n * lam ** (k + 1) for k in range(n)])
    total = np.zeros(lam.shape)
    for j in family.indices:
        total = total + family.f(j, tau, t) * lam**j
    return total


def umbilical_flux(family: GeneratingFamily):
    """Scalar flux of the umbilical reduction (exact when the preset knows it)."""
    if family.flux is not None:
        return family.flux
    return ScalarFlux(lambda lam: umbilical_psi(family, lam))


def ricci_curvature_rhs(k, N_k):
    """``d k_i/dt = N(k_i (tau_1 - k_i))`` for the extrinsic Ricci flow."""
    k = np.asarray(k, dtype=float)
    nk = np.asarray(N_k, dtype=float)
    tau1 = np.sum(k, axis=0)
    n_tau1 = np.sum(nk, axis=0)
    return nk * (tau1 - k) + k * (n_tau1 - nk)
