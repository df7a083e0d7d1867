"""Multi-indices and truncated multivariate power series over C^n.

Monomials z^alpha are indexed by exponent tuples and ordered graded
lexicographically: by total degree first, then lexicographically with the
larger leading exponent first, e.g. ``(0,0), (1,0), (0,1), (2,0), (1,1), (0,2)``.

A :class:`TruncatedSeries` keeps every coefficient of degree <= cutoff and
silently drops everything above it, so products behave like arithmetic in
C[z_1..z_n] / (monomials of degree > D).

.. note::
   The Hermitian pairing ``<z, c>`` used throughout is ``sum_j z_j * conj(c_j)``;
   the second argument is always conjugated.
"""
from __future__ import annotations

from functools import lru_cache
from math import comb
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import InvalidArgument, SingularDenominator

MultiIndex = tuple[int, ...]

#: default absolute tolerance for series equality
SERIES_ATOL = 1e-12
# entries below this modulus are treated as absent
_CANON_EPS = 1e-300


def _compositions(m: int, n: int) -> Iterator[MultiIndex]:
    # all alpha with |alpha| = m, leading exponent descending
    if n == 1:
        yield (m,)
        return
    for first in range(m, -1, -1):
        for rest in _compositions(m - first, n - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def enumerate_multiindices(n: int, D: int) -> tuple[MultiIndex, ...]:
    """All multi-indices of length ``n`` and degree ``<= D`` in graded-lex order.

    >>> enumerate_multiindices(2, 1)
    ((0, 0), (1, 0), (0, 1))
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidArgument(f"dimension must be a positive integer, got {n!r}")
    if not isinstance(D, (int, np.integer)) or D < 0:
        raise InvalidArgument(f"degree must be a non-negative integer, got {D!r}")
    out = tuple(alpha for m in range(D + 1) for alpha in _compositions(m, n))
    assert len(out) == comb(n + D, n)
    return out


def basis_size(n: int, D: int) -> int:
    return comb(n + D, n)


@lru_cache(maxsize=None)
def _index_of(n: int, D: int) -> dict[MultiIndex, int]:
    return {alpha: i for i, alpha in enumerate(enumerate_multiindices(n, D))}


@lru_cache(maxsize=None)
def exponent_array(n: int, D: int) -> np.ndarray:
    """Basis exponents as an ``(N, n)`` integer array (read-only)."""
    arr = np.array(enumerate_multiindices(n, D), dtype=np.int64).reshape(-1, n)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def degree_array(n: int, D: int) -> np.ndarray:
    deg = exponent_array(n, D).sum(axis=1)
    deg.setflags(write=False)
    return deg


@lru_cache(maxsize=None)
def _product_table(n: int, D: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # index triples (i, j, k) with basis[i] + basis[j] = basis[k], degree <= D
    basis = enumerate_multiindices(n, D)
    index = _index_of(n, D)
    deg = degree_array(n, D)
    I, J, K = [], [], []
    for i, alpha in enumerate(basis):
        room = D - deg[i]
        for j in range(basis_size(n, room)):
            gamma = basis[j]
            I.append(i)
            J.append(j)
            K.append(index[tuple(a + g for a, g in zip(alpha, gamma))])
    tables = tuple(np.array(x, dtype=np.int64) for x in (I, J, K))
    for t in tables:
        t.setflags(write=False)
    return tables


class TruncatedSeries:
    """Complex power series in ``dim`` variables truncated above degree ``cutoff``.

    Coefficients are stored densely in graded-lex order; the keyed view
    (:meth:`items`, :meth:`to_dict`) only reports entries of nonnegligible
    modulus. Instances are immutable.
    """

    __slots__ = ("dim", "cutoff", "_vec")

    def __init__(self, dim: int, cutoff: int,
                 coeffs: Mapping[MultiIndex, complex] | None = None):
        index = _index_of(dim, cutoff)
        vec = np.zeros(len(index), dtype=complex)
        for alpha, c in (coeffs or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != dim or min(alpha) < 0:
                raise InvalidArgument(f"bad multi-index {alpha} for dimension {dim}")
            if sum(alpha) > cutoff:
                raise InvalidArgument(f"multi-index {alpha} exceeds cutoff {cutoff}")
            vec[index[alpha]] += c
        self._init(dim, cutoff, vec)

    def _init(self, dim, cutoff, vec):
        vec.setflags(write=False)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "cutoff", cutoff)
        object.__setattr__(self, "_vec", vec)

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedSeries is immutable")

    @classmethod
    def from_vector(cls, dim: int, cutoff: int, vec) -> "TruncatedSeries":
        vec = np.array(vec, dtype=complex)
        if vec.shape != (basis_size(dim, cutoff),):
            raise InvalidArgument(
                f"expected {basis_size(dim, cutoff)} coefficients, got shape {vec.shape}")
        obj = cls.__new__(cls)
        obj._init(dim, cutoff, vec)
        return obj

    @classmethod
    def constant(cls, dim: int, cutoff: int, value: complex = 1.0) -> "TruncatedSeries":
        vec = np.zeros(basis_size(dim, cutoff), dtype=complex)
        vec[0] = value
        return cls.from_vector(dim, cutoff, vec)

    @classmethod
    def zero(cls, dim: int, cutoff: int) -> "TruncatedSeries":
        return cls.constant(dim, cutoff, 0.0)

    @classmethod
    def monomial(cls, alpha: Sequence[int], cutoff: int, coeff: complex = 1.0) -> "TruncatedSeries":
        return cls(len(alpha), cutoff, {tuple(alpha): coeff})

    @classmethod
    def variable(cls, dim: int, j: int, cutoff: int) -> "TruncatedSeries":
        """The coordinate function z_j (0-based ``j``)."""
        alpha = [0] * dim
        alpha[j] = 1
        return cls.monomial(alpha, cutoff)

    @property
    def vector(self) -> np.ndarray:
        """Coefficients in graded-lex basis order (read-only view)."""
        return self._vec

    @property
    def basis(self) -> tuple[MultiIndex, ...]:
        return enumerate_multiindices(self.dim, self.cutoff)

    def coeff(self, alpha: Sequence[int]) -> complex:
        alpha = tuple(alpha)
        if sum(alpha) > self.cutoff:
            return 0j
        return complex(self._vec[_index_of(self.dim, self.cutoff)[alpha]])

    def items(self) -> Iterator[tuple[MultiIndex, complex]]:
        for alpha, c in zip(self.basis, self._vec):
            if abs(c) >= _CANON_EPS:
                yield alpha, complex(c)

    def to_dict(self) -> dict[MultiIndex, complex]:
        return dict(self.items())

    def homogeneous_part(self, m: int) -> "TruncatedSeries":
        vec = np.where(degree_array(self.dim, self.cutoff) == m, self._vec, 0)
        return TruncatedSeries.from_vector(self.dim, self.cutoff, vec)

    def truncate(self, D: int) -> "TruncatedSeries":
        if D > self.cutoff:
            raise InvalidArgument("cannot raise the cutoff of a truncated series")
        return TruncatedSeries.from_vector(self.dim, D, self._vec[:basis_size(self.dim, D)])

    def conj_coeffs(self) -> "TruncatedSeries":
        return TruncatedSeries.from_vector(self.dim, self.cutoff, self._vec.conj())

    def isclose(self, other: "TruncatedSeries", atol: float = SERIES_ATOL) -> bool:
        _check_shape(self, other)
        return bool(np.all(np.abs(self._vec - other._vec) <= atol))

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        if (self.dim, self.cutoff) != (other.dim, other.cutoff):
            return False
        return self.isclose(other)

    __hash__ = None

    def __add__(self, other):
        if isinstance(other, TruncatedSeries):
            return series_add(self, other)
        return series_add(self, TruncatedSeries.constant(self.dim, self.cutoff, other))

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries.from_vector(self.dim, self.cutoff, -self._vec)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return series_mul(self, other)
        return TruncatedSeries.from_vector(self.dim, self.cutoff, self._vec * other)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        return series_pow(self, k)

    def __call__(self, z) -> complex:
        return series_eval(self, z)

    def __repr__(self):
        terms = ", ".join(f"{a}: {c:.6g}" for a, c in self.items())
        return f"TruncatedSeries(dim={self.dim}, cutoff={self.cutoff}, {{{terms}}})"


def _check_shape(f: TruncatedSeries, g: TruncatedSeries) -> None:
    if (f.dim, f.cutoff) != (g.dim, g.cutoff):
        raise InvalidArgument(
            f"series shapes differ: (n={f.dim}, D={f.cutoff}) vs (n={g.dim}, D={g.cutoff})")


def series_add(f: TruncatedSeries, g: TruncatedSeries) -> TruncatedSeries:
    _check_shape(f, g)
    return TruncatedSeries.from_vector(f.dim, f.cutoff, f.vector + g.vector)


def series_mul(f: TruncatedSeries, g: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product, discarding all terms of degree above the cutoff."""
    _check_shape(f, g)
    I, J, K = _product_table(f.dim, f.cutoff)
    terms = f.vector[I] * g.vector[J]
    N = basis_size(f.dim, f.cutoff)
    out = (np.bincount(K, weights=terms.real, minlength=N)
           + 1j * np.bincount(K, weights=terms.imag, minlength=N))
    return TruncatedSeries.from_vector(f.dim, f.cutoff, out)


def series_pow(f: TruncatedSeries, k: int) -> TruncatedSeries:
    """``f**k`` by binary exponentiation; ``k = 0`` gives the constant 1."""
    if not isinstance(k, (int, np.integer)) or k < 0:
        raise InvalidArgument(f"exponent must be a non-negative integer, got {k!r}")
    result = TruncatedSeries.constant(f.dim, f.cutoff, 1.0)
    base = f
    while k:
        if k & 1:
            result = series_mul(result, base)
        k >>= 1
        if k:
            base = series_mul(base, base)
    return result


def linear_form(c, D: int = 1) -> TruncatedSeries:
    """The degree-one series ``<z, c> = sum_j conj(c_j) z_j``."""
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    n = c.size
    vec = np.zeros(basis_size(n, D), dtype=complex)
    if D >= 1:
        vec[1:n + 1] = c.conj()
    return TruncatedSeries.from_vector(n, D, vec)


def reciprocal_affine(d: complex, c, D: int) -> TruncatedSeries:
    """Taylor series of ``1 / (d + <z, c>)`` up to degree ``D``.

    Computed as the truncated geometric series ``(1/d) sum_m (-<z,c>/d)^m``,
    which converges on the closed ball when ``||c|| < |d|``.
    """
    if d == 0:
        raise SingularDenominator("constant term of the affine denominator is zero")
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    n = c.size
    # homogeneous layers: layer m = (-<z,c>/d)^m / d
    ratio = linear_form(-c / np.conj(d), D)  # <z, -c/conj(d)> = -<z,c>/d
    term = TruncatedSeries.constant(n, D, 1.0 / d)
    out = term.vector.copy()
    for _ in range(D):
        term = series_mul(term, ratio)
        out += term.vector
    return TruncatedSeries.from_vector(n, D, out)


def monomial_values(z, D: int) -> np.ndarray:
    """Values ``z^alpha`` for every basis multi-index of degree ``<= D``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    exps = exponent_array(z.size, D)
    return np.prod(z[None, :] ** exps, axis=1)


def series_eval(f: TruncatedSeries, z) -> complex:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.size != f.dim:
        raise InvalidArgument(f"point has {z.size} coordinates, series has {f.dim}")
    return complex(f.vector @ monomial_values(z, f.cutoff))
