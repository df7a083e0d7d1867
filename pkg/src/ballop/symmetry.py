"""Explicit conjugations for composition operators and their certificates.

Two constructions are provided.

Moebius symbols.
    For real ``a`` the conjugation is ``J W_a`` where ``J f(z) = conj(f(conj z))``
    and ``W_a`` is the unitary polar factor of ``C_{phi_a}``. A complex ``a``
    is rotated onto the nonnegative reals by the diagonal unitary ``U_Theta``
    and the conjugation is transported back: ``U_Theta J_{a~} U_Theta^*``.

Linear symbols.
    If ``V = C V^* C`` for the conjugation ``C z = K conj(z)`` on C^n, a Takagi
    factor ``K = U U^T`` makes ``U^H V U`` a symmetric matrix, and
    ``C_{U^*} J C_U`` is a conjugation for ``C_V``.

Residuals of the linear-symbol pipeline are exact at every truncation degree.
For Moebius symbols the polar factor of the compression only approximates
the polar factor of the full operator; the involution and symmetry residuals
carry the ``convergent`` flag.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.optimize import least_squares

from .errors import InvalidArgument, NotInvertible, WrongVariant
from .hardy import SpaceSpec
from .lfm import _ball_vector, linear_map, mobius
from .opmatrix import (AntilinearOperator, OperatorMatrix, composition_matrix, csym_residual,
                       polar_unitary)
from .series import exponent_array

RESIDUALS = ("isometry", "involution", "symmetry")

MOBIUS_EXACTNESS = {"isometry": "exact", "involution": "convergent", "symmetry": "convergent"}
LINEAR_EXACTNESS = {"isometry": "exact", "involution": "exact", "symmetry": "exact"}

DEFAULT_MOBIUS_THRESHOLDS = {"isometry": 1e-11, "involution": 1e-11, "symmetry": 1e-11}
DEFAULT_LINEAR_THRESHOLDS = {"isometry": 1e-9, "involution": 1e-9, "symmetry": 1e-9}


def _complex_json(x):
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return {"re": x.real.tolist(), "im": x.imag.tolist()}
    return x.tolist()


@dataclass
class ConjugationCertificate:
    space: SpaceSpec
    symbol: dict
    candidate: AntilinearOperator | None
    residuals: dict[str, float]
    exactness: dict[str, str]
    thresholds: dict[str, float]
    diagnostics: dict[str, float | None] = field(default_factory=dict)
    calibration: str | None = None

    @property
    def checks(self) -> dict[str, bool]:
        return {k: bool(self.residuals[k] <= self.thresholds[k]) for k in self.residuals}

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    @property
    def basis_size(self) -> int:
        return self.space.size

    def to_dict(self) -> dict:
        return {
            "space": self.space.describe(),
            "symbol": self.symbol,
            "basis_size": self.basis_size,
            "residuals": dict(self.residuals),
            "exactness": dict(self.exactness),
            "thresholds": dict(self.thresholds),
            "checks": self.checks,
            "passed": self.passed,
            "diagnostics": dict(self.diagnostics),
            "calibration": self.calibration,
            "norm": "spectral",
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def conjugation_J(space: SpaceSpec) -> AntilinearOperator:
    """``(J f)(z) = conj(f(conj z))``: conjugates every monomial coefficient."""
    return AntilinearOperator(space, np.eye(space.size))


def mobius_matrix(space: SpaceSpec, a) -> OperatorMatrix:
    return composition_matrix(space, mobius(a))


def unitary_part_Wa(space: SpaceSpec, a, sigma_min_tol: float | None = None) -> OperatorMatrix:
    return polar_unitary(mobius_matrix(space, a), sigma_min_tol)


def _real_ball_vector(a) -> np.ndarray:
    a = _ball_vector(a)
    if np.any(a.imag != 0):
        raise WrongVariant(f"a = {a} is not real; use conjugation_Ja")
    return a.real


def conjugation_Ja_real(space: SpaceSpec, a, sigma_min_tol: float | None = None) -> AntilinearOperator:
    """``J W_a`` for real ``a``; its matrix is ``conj(W_a)``."""
    a = _real_ball_vector(a)
    W = unitary_part_Wa(space, a, sigma_min_tol)
    return AntilinearOperator(space, W.M.conj())


def theta_phases(space: SpaceSpec, theta) -> np.ndarray:
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.size != space.n:
        raise InvalidArgument(f"theta has {theta.size} entries, space has n={space.n}")
    return np.exp(1j * (exponent_array(space.n, space.D) @ theta))


def u_theta(space: SpaceSpec, theta) -> OperatorMatrix:
    """``(U_Theta f)(z) = f(e^{i theta_1} z_1, ..., e^{i theta_n} z_n)``, a diagonal unitary."""
    return OperatorMatrix(space, np.diag(theta_phases(space, theta)))


def realign_theta(a) -> tuple[np.ndarray, np.ndarray]:
    """Angles ``theta_j = -arg(a_j)`` (0 where ``a_j = 0``) and ``a~_j = |a_j|``."""
    a = _ball_vector(a)
    theta = np.where(a != 0, -np.angle(a), 0.0)
    return theta, np.abs(a)


def conjugation_Ja(space: SpaceSpec, a, sigma_min_tol: float | None = None,
                   theta=None) -> AntilinearOperator:
    """Conjugation for ``C_{phi_a}``, any ``a`` in the ball.

    ``theta`` overrides the default rotation; it must make ``e^{i theta} a`` real.
    """
    a = _ball_vector(a)
    if theta is None:
        theta, a_real = realign_theta(a)
    else:
        theta = np.asarray(theta, dtype=float)
        rotated = np.exp(1j * theta) * a
        if np.max(np.abs(rotated.imag), initial=0.0) > 1e-14:
            raise InvalidArgument("theta does not rotate a onto the reals")
        a_real = rotated.real
    inner = conjugation_Ja_real(space, a_real, sigma_min_tol)
    u = theta_phases(space, theta)
    # U M conj(U^H v) = (U M U^T) conj(v), U diagonal
    return AntilinearOperator(space, u[:, None] * inner.M * u[None, :])


def identity_chase_residual(T: OperatorMatrix, J: AntilinearOperator) -> float:
    """``||T^* J - J T|| / ||T||`` with both sides as antilinear matrices."""
    lhs = T.M.conj().T @ J.M
    rhs = J.M @ T.M.conj()
    return float(np.linalg.norm(lhs - rhs, 2) / np.linalg.norm(T.M, 2))


def certify(space: SpaceSpec, a, thresholds: Mapping[str, float] | None = None,
            sigma_min_tol: float | None = None, calibration: str | None = None,
            theta=None) -> ConjugationCertificate:
    """Build ``C_{phi_a}`` and ``J_a`` and measure the conjugation residuals."""
    a = _ball_vector(a)
    thr = dict(DEFAULT_MOBIUS_THRESHOLDS)
    thr.update(thresholds or {})
    T = mobius_matrix(space, a)
    Ja = conjugation_Ja(space, a, sigma_min_tol, theta=theta)
    residuals = {
        "isometry": Ja.isometry_residual(),
        "involution": Ja.involution_residual(),
        "symmetry": csym_residual(T, Ja),
    }
    diagnostics: dict[str, float | None] = {
        "identity_chase": identity_chase_residual(T, Ja),
        "real_symbol": bool(np.all(a.imag == 0)),
    }
    if np.any(a.imag != 0):
        # J composed with the polar part of C_{phi_a} itself, reported only
        try:
            W = polar_unitary(T, sigma_min_tol)
            diagnostics["direct_polar_difference"] = float(np.linalg.norm(Ja.M - W.M.conj(), 2))
        except NotInvertible:
            diagnostics["direct_polar_difference"] = None
    return ConjugationCertificate(
        space=space,
        symbol={"kind": "mobius", "a": _complex_json(a), "a_norm": float(np.linalg.norm(a))},
        candidate=Ja,
        residuals=residuals,
        exactness=dict(MOBIUS_EXACTNESS),
        thresholds={k: thr[k] for k in RESIDUALS},
        diagnostics=diagnostics,
        calibration=calibration,
    )


def _check_unitary_symmetric(K: np.ndarray, tol: float) -> None:
    n = K.shape[0]
    if K.shape != (n, n):
        raise InvalidArgument(f"K must be square, got shape {K.shape}")
    unit = np.linalg.norm(K.conj().T @ K - np.eye(n), 2)
    if unit > tol:
        raise InvalidArgument(f"K is not unitary: ||K^H K - I|| = {unit:.3e}")
    sym = np.linalg.norm(K - K.T, 2)
    if sym > tol:
        raise InvalidArgument(f"K is not symmetric: ||K - K^T|| = {sym:.3e}")


# mixing weights for Re K + c Im K; any c avoiding accidental eigenvalue ties works
_TAKAGI_MIX = (0.6180339887498949, 1.4142135623730951, -0.7320508075688772, 2.23606797749979)


def takagi(K, tol: float = 1e-10) -> np.ndarray:
    """Unitary ``U`` with ``K = U U^T`` for a unitary symmetric ``K``.

    Real and imaginary parts of a unitary symmetric matrix are commuting real
    symmetric matrices, so one real orthogonal ``Q`` diagonalizes both and
    ``K = Q diag(e^{i phi}) Q^T``; then ``U = Q diag(e^{i phi / 2})``.
    """
    K = np.atleast_2d(np.asarray(K, dtype=complex))
    _check_unitary_symmetric(K, tol)
    X = K.real
    Y = K.imag
    X = (X + X.T) / 2
    Y = (Y + Y.T) / 2
    best, best_res = None, np.inf
    for c in _TAKAGI_MIX:
        _, Q = np.linalg.eigh(X + c * Y)
        phases = np.diag(Q.T @ K @ Q)
        phases = phases / np.abs(phases)
        U = Q * np.sqrt(phases)[None, :]
        res = np.linalg.norm(K - U @ U.T, 2)
        if res < best_res:
            best, best_res = U, res
        if res < tol:
            break
    if best_res >= 10 * tol:
        raise np.linalg.LinAlgError(f"Takagi factorization failed, residual {best_res:.3e}")
    return best


def conjugation_defect(V, K) -> float:
    """``||K V^T conj(K) - V||``: zero iff ``z -> K conj(z)`` is a conjugation for V."""
    V = np.asarray(V, dtype=complex)
    K = np.asarray(K, dtype=complex)
    return float(np.linalg.norm(K @ V.T @ K.conj() - V, 2))


def jv_pipeline(space: SpaceSpec, V, K, tol: float = 1e-10,
                thresholds: Mapping[str, float] | None = None) -> ConjugationCertificate:
    """Conjugation ``C_{U^*} J C_U`` for ``C_V`` from a conjugation matrix ``K`` of ``V``."""
    V = np.atleast_2d(np.asarray(V, dtype=complex))
    K = np.atleast_2d(np.asarray(K, dtype=complex))
    if V.shape != (space.n, space.n) or K.shape != V.shape:
        raise InvalidArgument(f"V and K must be {space.n}x{space.n}")
    _check_unitary_symmetric(K, tol)
    defect = conjugation_defect(V, K)
    if defect > tol * max(1.0, np.linalg.norm(V, 2)):
        raise InvalidArgument(
            f"K is not a conjugation for V: ||K V^T conj(K) - V|| = {defect:.3e}")
    U = takagi(K, tol)
    S = U.conj().T @ V @ U
    sym = float(np.linalg.norm(S - S.T, 2))
    if sym > 1e-10:
        raise InvalidArgument(f"U^H V U is not symmetric: residual {sym:.3e}")
    CV = composition_matrix(space, linear_map(V))
    CU = composition_matrix(space, linear_map(U))
    CUh = composition_matrix(space, linear_map(U.conj().T))
    JV = AntilinearOperator(space, CUh.M @ CU.M.conj())
    thr = dict(DEFAULT_LINEAR_THRESHOLDS)
    thr.update(thresholds or {})
    return ConjugationCertificate(
        space=space,
        symbol={"kind": "linear", "V": _complex_json(V), "K": _complex_json(K)},
        candidate=JV,
        residuals={
            "isometry": JV.isometry_residual(),
            "involution": JV.involution_residual(),
            "symmetry": csym_residual(CV, JV),
        },
        exactness=dict(LINEAR_EXACTNESS),
        thresholds={k: thr[k] for k in RESIDUALS},
        diagnostics={
            "takagi": float(np.linalg.norm(K - U @ U.T, 2)),
            "symmetrization": sym,
            "conjugation_defect": defect,
        },
    )


def _k_from_params(p) -> np.ndarray:
    t, f1, f2 = p
    R = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
    return (R * np.exp(1j * np.array([f1, f2]))[None, :]) @ R.T


def search_conjugation_2x2(V, starts: int = 32, seed: int = 0) -> tuple[np.ndarray, float]:
    """Numerical search for a conjugation matrix ``K`` of a 2x2 matrix ``V``.

    Every unitary symmetric 2x2 matrix is ``R diag(e^{i f1}, e^{i f2}) R^T`` for a
    rotation ``R``; the entries of ``K V^T conj(K) - V`` are driven to zero by least squares over
    the three angles from several random starts. Diagnostics-grade only.
    """
    V = np.asarray(V, dtype=complex)
    if V.shape != (2, 2):
        raise InvalidArgument("search is implemented for 2x2 matrices only")
    rng = np.random.default_rng(seed)

    def residual(p):
        E = (_k_from_params(p) @ V.T @ _k_from_params(p).conj() - V).ravel()
        return np.concatenate([E.real, E.imag])

    best_p, best = None, np.inf
    for _ in range(starts):
        p0 = rng.uniform(-np.pi, np.pi, size=3)
        res = least_squares(residual, p0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if res.cost < best:
            best_p, best = res.x, res.cost
        if best < 1e-28:
            break
    K = _k_from_params(best_p)
    return K, conjugation_defect(V, K)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))[None, :]


def constructed_cell(n: int, rng: np.random.Generator, S=None) -> tuple[np.ndarray, np.ndarray]:
    """A pair ``(V, K)`` with ``V = U0 S U0^H`` and ``K = U0 U0^T``.

    ``S`` defaults to ``[[1, i], [i, 0]] / 2`` for n = 2 and to a random
    complex symmetric matrix of norm 0.9 otherwise.
    """
    if S is None:
        if n == 2:
            S = np.array([[1, 1j], [1j, 0]]) / 2
        else:
            Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            S = Z + Z.T
            S = 0.9 * S / np.linalg.norm(S, 2)
    S = np.asarray(S, dtype=complex)
    U0 = random_unitary(n, rng)
    return U0 @ S @ U0.conj().T, U0 @ U0.T
