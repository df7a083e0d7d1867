"""Truncated composition operators as dense matrices.

Matrices act on coordinates in the orthonormal basis ``e_alpha = z^alpha / ||z^alpha||``
of the degree-<=D polynomials, with rows and columns in graded-lex order.
An antilinear operator is stored as the matrix ``M`` of ``v -> M conj(v)``.

The matrix of ``C_psi`` built here is the compression ``P_D C_psi P_D``. It is
exact for linear symbols (they preserve degree) and only approximates the full
operator for symbols with a constant term, such as the Moebius maps.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, NotInvertible
from .hardy import SpaceSpec, orthonormal_scaling
from .lfm import LinearFractionalMap, component_series
from .series import TruncatedSeries, degree_array

#: relative invertibility guard for polar decompositions, times ||M||
SIGMA_MIN_RTOL = 1e-10


def _norm(M, ord="spectral") -> float:
    if ord == "spectral":
        return float(np.linalg.norm(M, 2))
    if ord == "fro":
        return float(np.linalg.norm(M, "fro"))
    raise InvalidArgument(f"unknown norm {ord!r}; use 'spectral' or 'fro'")


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    space: SpaceSpec
    M: np.ndarray

    def __post_init__(self):
        M = np.array(self.M, dtype=complex)
        N = self.space.size
        if M.shape != (N, N):
            raise InvalidArgument(f"matrix shape {M.shape} does not match basis size {N}")
        M.setflags(write=False)
        object.__setattr__(self, "M", M)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        _same_space(self, other)
        return OperatorMatrix(self.space, self.M @ other.M)

    def __call__(self, f: TruncatedSeries) -> TruncatedSeries:
        """Apply to a polynomial given by its monomial coefficients."""
        scale = orthonormal_scaling(self.space)
        return TruncatedSeries.from_vector(self.space.n, self.space.D,
                                           (self.M @ (f.vector * scale)) / scale)


@dataclass(frozen=True, eq=False)
class AntilinearOperator:
    """The conjugate-linear map ``v -> M conj(v)`` in orthonormal coordinates."""

    space: SpaceSpec
    M: np.ndarray

    def __post_init__(self):
        M = np.array(self.M, dtype=complex)
        N = self.space.size
        if M.shape != (N, N):
            raise InvalidArgument(f"matrix shape {M.shape} does not match basis size {N}")
        M.setflags(write=False)
        object.__setattr__(self, "M", M)

    def apply(self, v) -> np.ndarray:
        return self.M @ np.conj(np.asarray(v, dtype=complex))

    def __call__(self, f: TruncatedSeries) -> TruncatedSeries:
        scale = orthonormal_scaling(self.space)
        return TruncatedSeries.from_vector(self.space.n, self.space.D,
                                           self.apply(f.vector * scale) / scale)

    def isometry_residual(self, ord="spectral") -> float:
        return _norm(self.M.conj().T @ self.M - np.eye(self.space.size), ord)

    def involution_residual(self, ord="spectral") -> float:
        return _norm(self.M @ self.M.conj() - np.eye(self.space.size), ord)


def _same_space(P, Q) -> None:
    if P.space != Q.space:
        raise InvalidArgument("operators act on different spaces")


def composition_columns(space: SpaceSpec, psi: LinearFractionalMap) -> np.ndarray:
    """Monomial-basis matrix: column gamma holds the coefficients of ``psi^gamma``."""
    if psi.n != space.n:
        raise InvalidArgument(f"symbol acts on C^{psi.n}, space is over C^{space.n}")
    n, D = space.n, space.D
    comps = [component_series(psi, j, D) for j in range(1, n + 1)]
    basis = space.basis
    index = {alpha: i for i, alpha in enumerate(basis)}
    cols = [TruncatedSeries.constant(n, D)]
    for gamma in basis[1:]:
        j = next(k for k, g in enumerate(gamma) if g)
        prev = list(gamma)
        prev[j] -= 1
        cols.append(cols[index[tuple(prev)]] * comps[j])
    return np.column_stack([c.vector for c in cols])


def composition_matrix(space: SpaceSpec, psi: LinearFractionalMap) -> OperatorMatrix:
    """Compression of ``C_psi f = f o psi`` in the orthonormal monomial basis."""
    scale = orthonormal_scaling(space)
    raw = composition_columns(space, psi)
    return OperatorMatrix(space, scale[:, None] * raw / scale[None, :])


def identity(space: SpaceSpec) -> OperatorMatrix:
    return OperatorMatrix(space, np.eye(space.size))


def adjoint(T: OperatorMatrix) -> OperatorMatrix:
    return OperatorMatrix(T.space, T.M.conj().T)


def polar(T: OperatorMatrix, sigma_min_tol: float | None = None):
    """Right polar decomposition ``M = W |M|``, returned as ``(W, |M|)``.

    Raises :class:`NotInvertible` when the smallest singular value does not
    exceed ``sigma_min_tol`` (default ``1e-10 * ||M||``).
    """
    U, sigma, Vh = np.linalg.svd(T.M)
    tol = SIGMA_MIN_RTOL * sigma[0] if sigma_min_tol is None else sigma_min_tol
    if sigma[-1] <= tol:
        raise NotInvertible(
            f"smallest singular value {sigma[-1]:.3e} <= {tol:.3e}; truncated operator "
            f"(N={T.space.size}) is numerically singular")
    W = U @ Vh
    P = (Vh.conj().T * sigma) @ Vh
    return OperatorMatrix(T.space, W), OperatorMatrix(T.space, P)


def polar_unitary(T: OperatorMatrix, sigma_min_tol: float | None = None) -> OperatorMatrix:
    return polar(T, sigma_min_tol)[0]


def op_norm(T: OperatorMatrix) -> float:
    return _norm(T.M)


def normality_residual(T: OperatorMatrix, ord="spectral") -> float:
    """``||M M^H - M^H M|| / ||M||^2``; zero iff the truncation is normal."""
    M = T.M
    scale = op_norm(T) ** 2
    if scale == 0:
        return 0.0
    return _norm(M @ M.conj().T - M.conj().T @ M, ord) / scale


def antilinear_compose(P: AntilinearOperator, Q: AntilinearOperator) -> OperatorMatrix:
    """``P o Q`` for two antilinear maps, which is linear with matrix ``M_P conj(M_Q)``."""
    _same_space(P, Q)
    return OperatorMatrix(P.space, P.M @ Q.M.conj())


def csym_residual(T: OperatorMatrix, J: AntilinearOperator, ord="spectral") -> float:
    """Relative defect of ``T = J T^* J``: ``||M_T - M_J M_T^T conj(M_J)|| / ||M_T||``."""
    _same_space(T, J)
    return _norm(T.M - J.M @ T.M.T @ J.M.conj(), ord) / _norm(T.M, ord)


def off_block_mass(T: OperatorMatrix) -> float:
    """Largest entry linking basis elements of different total degree."""
    deg = degree_array(T.space.n, T.space.D)
    mask = deg[:, None] != deg[None, :]
    return float(np.max(np.abs(T.M[mask]), initial=0.0))
