"""Power sums, elementary symmetric functions and the beta coefficients.

All array functions accept a leading "index" axis and arbitrary trailing
batch axes, so a field of profiles sampled on a grid of ``N`` points is
passed as an array of shape ``(n, N)``.  Index ``j`` of the leading axis
holds ``tau_{j+1}`` (resp. ``sigma_{j+1}``); ``tau_0 = n`` and
``sigma_0 = 1`` are implicit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError


def _as_index_array(values, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0 or arr.shape[0] == 0:
        raise InvalidInputError(f"{name} must be a non-empty vector")
    return arr


def elementary_symmetric(roots):
    """sigma_1..sigma_n of the roots (leading axis of ``roots``)."""
    k = _as_index_array(roots, "roots")
    n = k.shape[0]
    e = np.zeros((n + 1,) + k.shape[1:])
    e[0] = 1.0
    for i in range(n):
        # update from the top so e[j-1] still holds the previous stage
        for j in range(i + 1, 0, -1):
            e[j] = e[j] + k[i] * e[j - 1]
    return e[1:]


def power_sums(roots, count):
    """tau_1..tau_count of the roots."""
    k = _as_index_array(roots, "roots")
    if count < 1:
        raise InvalidInputError("count must be >= 1")
    powers = np.ones_like(k)
    out = np.empty((count,) + k.shape[1:])
    for j in range(count):
        powers = powers * k
        out[j] = powers.sum(axis=0)
    return out


def sigma_from_tau(tau):
    """Solve the lower-triangular Newton system ``T_n sigma = tau``.

    Forward substitution of ``j sigma_j = sum_{i=1}^{j} (-1)^{i-1}
    sigma_{j-i} tau_i``; the diagonal ``(-1)^{j+1} j`` never vanishes so
    no pivoting or inversion is involved.
    """
    t = _as_index_array(tau, "tau")
    n = t.shape[0]
    s = np.empty_like(t)
    for j in range(1, n + 1):
        total = np.zeros_like(t[0])
        for i in range(1, j + 1):
            sig_prev = 1.0 if i == j else s[j - i - 1]
            total = total + (-1) ** (i - 1) * sig_prev * t[i - 1]
        s[j - 1] = total / j
    return s


def tau_from_sigma(sigma, count):
    """tau_1..tau_count from sigma via the Newton recurrence.

    Equivalent to expanding the Hessenberg determinant for each ``tau_i``
    but costs O(count * n).  ``sigma_j = 0`` for ``j > n``.
    """
    s = _as_index_array(sigma, "sigma")
    if count < 1:
        raise InvalidInputError("count must be >= 1")
    n = s.shape[0]
    t = np.empty((count,) + s.shape[1:])
    for k in range(1, count + 1):
        acc = (-1) ** (k - 1) * k * s[k - 1] if k <= n else np.zeros(s.shape[1:])
        for i in range(1, min(k - 1, n) + 1):
            acc = acc + (-1) ** (i - 1) * s[i - 1] * t[k - i - 1]
        t[k - 1] = acc
    return t


def extend_tau(tau, count):
    """Return tau_1..tau_count, keeping the supplied entries verbatim."""
    t = _as_index_array(tau, "tau")
    n = t.shape[0]
    if count <= n:
        return t[:count].copy()
    ext = tau_from_sigma(sigma_from_tau(t), count)
    ext[:n] = t
    return ext


def tau_with_zero(tau, count):
    """Array ``[tau_0, tau_1, ..., tau_count]`` with ``tau_0 = n``."""
    t = _as_index_array(tau, "tau")
    n = t.shape[0]
    out = np.empty((count + 1,) + t.shape[1:])
    out[0] = n
    out[1:] = extend_tau(t, count)
    return out


def sigma_jacobian(tau):
    """``J[k-1, j-1] = d sigma_k / d tau_j`` (shape ``(n, n, *batch)``)."""
    t = _as_index_array(tau, "tau")
    n = t.shape[0]
    s = sigma_from_tau(t)
    jac = np.zeros((n, n) + t.shape[1:])
    for k in range(1, n + 1):
        for j in range(1, n + 1):
            acc = np.zeros(t.shape[1:])
            if j <= k:
                sig = 1.0 if k - j == 0 else s[k - j - 1]
                acc = acc + (-1) ** (j - 1) * sig
            for i in range(1, k):
                acc = acc + (-1) ** (i - 1) * t[i - 1] * jac[k - i - 1, j - 1]
            jac[k - 1, j - 1] = acc / k
    return jac


def _sigma_padded(sigma, idx):
    """sigma_idx with sigma_0 = 1 and zero outside the supplied range."""
    if idx == 0:
        return np.ones(sigma.shape[1:])
    if idx < 0 or idx > sigma.shape[0]:
        return np.zeros(sigma.shape[1:])
    return sigma[idx - 1]


def beta_table(n, m, sigma):
    """All ``beta_{n,m,i}`` for ``i = 1..n`` (shape ``(n, *batch)``).

    Uses the fixed-``n`` recurrence ``beta_{n,m,i} = beta_{n,m-1,n}
    sigma_{n-i+1} - beta_{n,m-1,i-1}`` with ``beta_{n,m,0} = 0``.
    """
    if n < 1 or m < 1:
        raise InvalidInputError("need n >= 1 and m >= 1")
    s = _as_index_array(sigma, "sigma")
    sig = np.stack([_sigma_padded(s, n - i + 1) for i in range(1, n + 1)])
    beta = sig.copy()
    for _ in range(1, m):
        last = beta[n - 1].copy()
        shifted = np.concatenate([np.zeros((1,) + beta.shape[1:]), beta[:-1]])
        beta = last * sig - shifted
    return beta


def beta(n, m, i, sigma):
    if not 1 <= i <= n:
        raise IndexError(f"beta index i={i} outside [1, {n}]")
    return beta_table(n, m, sigma)[i - 1]


def dtau_decomposition(n, m, sigma):
    """Coefficients ``c_i`` with ``d tau_{n+m} / (n+m) = sum_i c_i d tau_i``.

    ``c_i = (-1)^{n-i} beta_{n,m,i} / i``.
    """
    b = beta_table(n, m, sigma)
    scale = np.array([(-1) ** (n - i) / i for i in range(1, n + 1)])
    return b * scale.reshape((n,) + (1,) * (b.ndim - 1))


@dataclass(frozen=True)
class SymmetricProfile:
    """Matched power sums and elementary symmetric functions of ``n`` values."""

    n: int
    tau: np.ndarray
    sigma: np.ndarray
    roots: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError("n must be positive")
        if len(self.tau) < self.n or len(self.sigma) != self.n:
            raise InvalidInputError("tau must have >= n entries, sigma exactly n")
        check = tau_from_sigma(self.sigma, len(self.tau))
        scale = 1.0 + np.max(np.abs(self.tau))
        if np.max(np.abs(check - self.tau)) > 1e-10 * scale:
            raise InvalidInputError("tau and sigma violate Newton's identities")

    @classmethod
    def from_tau(cls, tau, extend_to=None):
        t = _as_index_array(tau, "tau")
        n = len(t)
        return cls(n, extend_tau(t, extend_to or n), sigma_from_tau(t))

    @classmethod
    def from_sigma(cls, sigma, extend_to=None):
        s = _as_index_array(sigma, "sigma")
        return cls(len(s), tau_from_sigma(s, extend_to or len(s)), s.copy())

    def tau_at(self, j):
        """tau_j with the convention tau_0 = n."""
        if j == 0:
            return float(self.n)
        if j <= len(self.tau):
            return float(self.tau[j - 1])
        return float(extend_tau(self.tau[: self.n], j)[j - 1])


def profile_from_roots(k, extend_to=None):
    """Profile of explicit roots ``k``; ``tau`` has ``extend_to`` entries."""
    roots = _as_index_array(k, "k")
    if roots.ndim != 1:
        raise InvalidInputError("k must be one-dimensional")
    n = len(roots)
    count = n if extend_to is None else extend_to
    if count < n:
        raise InvalidInputError("extend_to must be >= len(k)")
    return SymmetricProfile(n, power_sums(roots, count), elementary_symmetric(roots), roots.copy())
