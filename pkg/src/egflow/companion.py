"""Generalized companion matrices and the ``B_{n,m}`` family."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import InvalidInputError
from .symmetric import beta_table, elementary_symmetric

DISTINCT_ROOT_RTOL = 1e-9


@dataclass(frozen=True)
class CompanionSpec:
    """Coefficients of ``P_n = x^n - p_1 x^{n-1} - ... - p_n`` and scalings ``c``.

    ``variant`` selects the upper form (bottom row holds the ``p``) or the
    lower form (top row holds the ``p``, index order reversed).
    """

    p: np.ndarray
    c: np.ndarray
    variant: Literal["upper", "lower"] = "upper"

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        c = np.asarray(self.c, dtype=float)
        if p.ndim != 1 or p.shape != c.shape or len(p) == 0:
            raise InvalidInputError("p and c must be vectors of equal positive length")
        if c[0] != 1.0:
            raise InvalidInputError("c_1 must equal 1")
        if np.any(c == 0.0):
            raise InvalidInputError("all c_i must be non-zero")
        if self.variant not in ("upper", "lower"):
            raise InvalidInputError(f"unknown variant {self.variant!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "c", c)

    @property
    def n(self):
        return len(self.p)

    @classmethod
    def from_sigma(cls, sigma, c=None, variant="upper"):
        s = np.asarray(sigma, dtype=float)
        n = len(s)
        p = np.array([(-1) ** i * s[i] for i in range(n)])
        return cls(p, np.ones(n) if c is None else c, variant)


def build_companion(spec: CompanionSpec):
    n, p, c = spec.n, spec.p, spec.c
    # c and p are 1-based in the formulas; c_[k] == c_k
    c_ = np.concatenate([[np.nan], c])
    p_ = np.concatenate([[np.nan], p])
    m = np.zeros((n, n))
    for i in range(1, n):
        m[i - 1, i] = c_[n - i] / c_[n - i + 1]
    for j in range(1, n + 1):
        m[n - 1, j - 1] = c_[n - j + 1] * p_[n - j + 1]
    if spec.variant == "lower":
        m = m[::-1, ::-1].copy()
    return m


def b_n1_scalings(n):
    """The ``c_i = n / (n - i + 1)`` that turn ``C_g`` into ``B_{n,1}``."""
    return np.array([n / (n - i + 1) for i in range(1, n + 1)])


def b_n1(sigma):
    """``B_{n,1}``; accepts ``sigma`` of shape ``(n, *batch)``."""
    s = np.asarray(sigma, dtype=float)
    n = s.shape[0]
    batch = s.shape[1:]
    m = np.zeros(batch + (n, n))
    for i in range(1, n):
        m[..., i - 1, i] = i / (i + 1)
    for j in range(1, n + 1):
        m[..., n - 1, j - 1] = (-1) ** (n - j) * (n / j) * s[n - j]
    return m


def b_nm(sigma, m):
    """``B_{n,m} = (m+1)/2 * B_{n,1}^m``."""
    if m < 0:
        raise InvalidInputError("m must be >= 0")
    b1 = b_n1(sigma)
    return 0.5 * (m + 1) * np.linalg.matrix_power(b1, m)


def b_nm_entrywise(sigma, m):
    """``B_{n,m}`` assembled entry by entry from the beta coefficients."""
    if m < 0:
        raise InvalidInputError("m must be >= 0")
    s = np.asarray(sigma, dtype=float)
    n = s.shape[0]
    batch = s.shape[1:]
    out = np.zeros(batch + (n, n))
    tables = {}
    for i in range(1, n + 1):
        if i + m <= n:
            out[..., i - 1, i + m - 1] = i * (m + 1) / (2 * (i + m))
            continue
        mm = i + m - n
        if mm not in tables:
            tables[mm] = beta_table(n, mm, s)
        for j in range(1, n + 1):
            coef = (-1) ** (n - j) * i * (m + 1) / (2 * j)
            out[..., i - 1, j - 1] = coef * tables[mm][j - 1]
    return out


@dataclass(frozen=True)
class EigenPair:
    value: float
    vector: np.ndarray
    residual: float


@dataclass(frozen=True)
class Eigensystem:
    """Closed-form eigenpairs with multiplicity bookkeeping.

    ``multiplicities`` maps each distinct eigenvalue to ``(algebraic,
    geometric)``; the geometric one is the numerical nullity of
    ``M - value*I``.
    """

    matrix: np.ndarray
    pairs: list
    multiplicities: dict

    @property
    def is_diagonalizable(self):
        return all(a == g for a, g in self.multiplicities.values())

    @property
    def simple_spectrum(self):
        return all(a == 1 for a, _ in self.multiplicities.values())


def _nullity(mat, tol):
    sv = np.linalg.svd(mat, compute_uv=False)
    return int(np.sum(sv <= tol))


def group_values(values, rtol=DISTINCT_ROOT_RTOL):
    """Cluster sorted real values closer than ``rtol * max|v|``."""
    vals = np.sort(np.asarray(values, dtype=float))
    scale = max(np.max(np.abs(vals)), 1.0) if len(vals) else 1.0
    groups = []
    for v in vals:
        if groups and abs(v - groups[-1][-1]) <= rtol * scale:
            groups[-1].append(v)
        else:
            groups.append([v])
    return groups


def companion_eigensystem(kind, roots, c=None, m=1, rank_tol=1e-8):
    """Eigenpairs of a companion-type matrix built from known real roots.

    ``kind`` is ``"b_n1"`` (the ``B_{n,m}`` family, power ``m``),
    ``"upper"`` or ``"lower"`` (generalized companion with scalings ``c``).
    """
    lam = np.asarray(roots, dtype=float)
    n = len(lam)
    sigma = elementary_symmetric(lam)
    if kind == "b_n1":
        mat = b_nm(sigma, m)
        values = 0.5 * (m + 1) * lam**m
        vectors = [np.array([(i + 1) * x**i for i in range(n)]) for x in lam]
    elif kind in ("upper", "lower"):
        spec = CompanionSpec.from_sigma(sigma, c, variant=kind)
        mat = build_companion(spec)
        c_ = np.concatenate([[np.nan], spec.c])
        values = lam.copy()
        vectors = []
        for x in lam:
            v = np.array([c_[n] / c_[n - i] * x**i for i in range(n)])
            vectors.append(v[::-1].copy() if kind == "lower" else v)
    else:
        raise InvalidInputError(f"unknown matrix kind {kind!r}")

    pairs = []
    for val, vec in zip(values, vectors):
        res = float(np.linalg.norm(mat @ vec - val * vec))
        pairs.append(EigenPair(float(val), vec, res))

    scale = max(1.0, np.linalg.norm(mat, 2))
    mults = {}
    for group in group_values(values):
        mu = float(np.mean(group))
        geo = _nullity(mat - mu * np.eye(n), rank_tol * scale)
        mults[mu] = (len(group), geo)
    return Eigensystem(mat, pairs, mults)
