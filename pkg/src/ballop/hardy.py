"""Weighted Hardy spaces on the unit ball of C^n, truncated at degree D.

A space is fixed by its monomial norms. For the family H_s with kernel
``(1 - <z, w>)^(-s)`` expanding the kernel gives

    ||z^alpha||^2 = alpha! / (s)_{|alpha|}

with ``(x)_m`` the rising factorial. At ``s = n`` this is the classical Hardy
space H^2(B_n), whose norms are ``(n-1)! alpha! / (n-1+|alpha|)!``. A general
weighted Hardy space is given by its ratio sequence ``beta_m`` against H^2.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import factorial, prod

import numpy as np

from .errors import InvalidArgument, OutOfDomain, OutOfRange
from .series import (MultiIndex, TruncatedSeries, _check_shape, _index_of, degree_array,
                     enumerate_multiindices, exponent_array)


def rising_factorial(x: float, m: int) -> float:
    out = 1.0
    for k in range(m):
        out *= x + k
    return out


def hardy_norm_sq(alpha: MultiIndex) -> float:
    """``||z^alpha||^2`` in the classical Hardy space H^2(B_n)."""
    n, m = len(alpha), sum(alpha)
    return factorial(n - 1) * prod(factorial(a) for a in alpha) / factorial(n - 1 + m)


@dataclass(frozen=True)
class SpaceSpec:
    """Truncated weighted Hardy space.

    Give either ``s > 0`` (the H_s family) or ``beta = (beta_0, ..., beta_D)``
    with ``beta_0 = 1``. For explicit beta the boundedness of composition
    operators with linear fractional symbols is assumed, not checked.
    """

    n: int
    D: int
    s: float | None = None
    beta: tuple[float, ...] | None = field(default=None)

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise InvalidArgument(f"dimension must be a positive integer, got {self.n!r}")
        if not isinstance(self.D, (int, np.integer)) or self.D < 0:
            raise InvalidArgument(f"degree must be a non-negative integer, got {self.D!r}")
        if (self.s is None) == (self.beta is None):
            raise InvalidArgument("give exactly one of s or beta")
        if self.s is not None:
            if not self.s > 0:
                raise InvalidArgument(f"weight parameter s must be positive, got {self.s}")
            object.__setattr__(self, "s", float(self.s))
        else:
            beta = tuple(float(b) for b in self.beta)
            if len(beta) < self.D + 1:
                raise InvalidArgument(f"need beta_0..beta_{self.D}, got {len(beta)} values")
            if any(not b > 0 for b in beta):
                raise InvalidArgument("beta values must be positive")
            if abs(beta[0] - 1.0) > 1e-14:
                raise InvalidArgument("beta_0 must be 1 (constants have unit norm)")
            object.__setattr__(self, "beta", beta[:self.D + 1])
        ns = self.norms_sq
        if not (np.all(np.isfinite(ns)) and np.all(ns > 0) and np.all(np.isfinite(1 / ns))):
            raise InvalidArgument("monomial norms leave double-precision range; reduce D or s")

    @property
    def basis(self) -> tuple[MultiIndex, ...]:
        return enumerate_multiindices(self.n, self.D)

    @property
    def size(self) -> int:
        return len(self.basis)

    @property
    def label(self) -> str:
        return f"s={self.s:g}" if self.s is not None else "beta"

    @cached_property
    def norms_sq(self) -> np.ndarray:
        """``||z^alpha||^2`` for every basis index, in basis order."""
        exps = exponent_array(self.n, self.D)
        deg = degree_array(self.n, self.D)
        fact = np.array([float(prod(factorial(int(a)) for a in row)) for row in exps])
        if self.s is not None:
            rf = np.array([rising_factorial(self.s, m) for m in range(self.D + 1)])
            out = fact / rf[deg]
        else:
            h2 = np.array([hardy_norm_sq(alpha) for alpha in self.basis])
            out = np.asarray(self.beta)[deg] ** 2 * h2
        out.setflags(write=False)
        return out

    def with_degree(self, D: int) -> "SpaceSpec":
        if self.beta is not None and D + 1 > len(self.beta):
            raise InvalidArgument(f"beta sequence too short for degree {D}")
        return SpaceSpec(self.n, D, s=self.s,
                         beta=None if self.beta is None else self.beta[:D + 1])

    def describe(self) -> dict:
        out = {"n": self.n, "D": self.D}
        if self.s is not None:
            out["s"] = self.s
        else:
            out["beta"] = list(self.beta)
        return out


def monomial_norm_sq(space: SpaceSpec, alpha) -> float:
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != space.n:
        raise InvalidArgument(f"multi-index {alpha} has wrong length for n={space.n}")
    if sum(alpha) > space.D:
        raise OutOfRange(f"|alpha| = {sum(alpha)} exceeds truncation degree {space.D}")
    return float(space.norms_sq[_index_of(space.n, space.D)[alpha]])


def beta(space: SpaceSpec, m: int) -> float:
    """Ratio ``||z^alpha|| / ||z^alpha||_{H^2}`` for ``|alpha| = m``."""
    if not 0 <= m <= space.D:
        raise OutOfRange(f"degree {m} outside 0..{space.D}")
    if space.beta is not None:
        return space.beta[m]
    return float(np.sqrt(rising_factorial(space.n, m) / rising_factorial(space.s, m)))


def inner_product(space: SpaceSpec, f: TruncatedSeries, g: TruncatedSeries) -> complex:
    _check_space(space, f)
    _check_shape(f, g)
    return complex(np.sum(f.vector * g.vector.conj() * space.norms_sq))


def _check_space(space: SpaceSpec, f: TruncatedSeries) -> None:
    if (f.dim, f.cutoff) != (space.n, space.D):
        raise InvalidArgument(
            f"series (n={f.dim}, D={f.cutoff}) does not live in space (n={space.n}, D={space.D})")


def kernel_series(space: SpaceSpec, w) -> TruncatedSeries:
    """Truncated reproducing kernel at ``w``: coefficient ``conj(w)^alpha / ||z^alpha||^2``.

    For H_s this is the Taylor expansion of ``(1 - <z, w>)^(-s)``.
    """
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    if w.size != space.n:
        raise InvalidArgument(f"point has {w.size} coordinates, space has n={space.n}")
    if np.linalg.norm(w) >= 1:
        raise OutOfDomain(f"kernel point must lie in the open ball, ||w|| = {np.linalg.norm(w)}")
    powers = np.prod(w.conj()[None, :] ** exponent_array(space.n, space.D), axis=1)
    return TruncatedSeries.from_vector(space.n, space.D, powers / space.norms_sq)


def orthonormal_scaling(space: SpaceSpec) -> np.ndarray:
    """``N_alpha = ||z^alpha||``; monomial coefficients times N give orthonormal coordinates."""
    return np.sqrt(space.norms_sq)


def to_orthonormal(space: SpaceSpec, f: TruncatedSeries) -> np.ndarray:
    _check_space(space, f)
    return f.vector * orthonormal_scaling(space)


def from_orthonormal(space: SpaceSpec, v) -> TruncatedSeries:
    return TruncatedSeries.from_vector(space.n, space.D,
                                       np.asarray(v, dtype=complex) / orthonormal_scaling(space))
