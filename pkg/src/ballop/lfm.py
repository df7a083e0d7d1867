"""Linear fractional self-maps of the unit ball and the involutive automorphisms.

A linear fractional map ``psi(z) = (A z + B) / (<z, C> + d)`` is stored as
the data ``(A, B, C, d)``; its associated matrix is

    m_psi = [[A,   B],
             [C^H, d]]

and composition of maps corresponds to multiplication of associated matrices.
The data is only defined up to a nonzero scalar, so maps are normalized to
``d = 1`` whenever ``d != 0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, NotASelfMap, OutOfDomain, SingularPoint
from .series import TruncatedSeries, linear_form, reciprocal_affine

# slack allowed on ||V|| <= 1 for linear symbols
SELF_MAP_SLACK = 1e-12


def pairing(z, c) -> complex:
    """Hermitian pairing ``<z, c> = sum_j z_j conj(c_j)``."""
    return complex(np.vdot(np.asarray(c, dtype=complex), np.asarray(z, dtype=complex)))


@dataclass(frozen=True, eq=False)
class LinearFractionalMap:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    d: complex

    def __post_init__(self):
        A = np.atleast_2d(np.array(self.A, dtype=complex))
        n = A.shape[0]
        if A.shape != (n, n):
            raise InvalidArgument(f"A must be square, got shape {A.shape}")
        B = np.atleast_1d(np.array(self.B, dtype=complex)).reshape(-1)
        C = np.atleast_1d(np.array(self.C, dtype=complex)).reshape(-1)
        if B.size != n or C.size != n:
            raise InvalidArgument("B and C must have length n")
        d = complex(self.d)
        if d != 0:
            A, B, C, d = A / d, B / d, C / np.conj(d), 1.0 + 0j
        if not np.linalg.norm(C) < abs(d):
            raise OutOfDomain(
                f"denominator may vanish on the closed ball: ||C|| = {np.linalg.norm(C):.3g} >= |d|")
        for arr in (A, B, C):
            arr.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "d", d)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        """The associated ``(n+1) x (n+1)`` matrix."""
        return associated_matrix(self)

    @property
    def is_linear(self) -> bool:
        return not (np.any(self.B) or np.any(self.C))

    @classmethod
    def from_matrix(cls, m) -> "LinearFractionalMap":
        m = np.asarray(m, dtype=complex)
        n = m.shape[0] - 1
        return cls(m[:n, :n], m[:n, n], m[n, :n].conj(), m[n, n])

    def __call__(self, z) -> np.ndarray:
        return apply(self, z)

    def __repr__(self):
        return (f"LinearFractionalMap(A={self.A.tolist()}, B={self.B.tolist()}, "
                f"C={self.C.tolist()}, d={self.d})")


def associated_matrix(psi: LinearFractionalMap) -> np.ndarray:
    n = psi.n
    m = np.empty((n + 1, n + 1), dtype=complex)
    m[:n, :n] = psi.A
    m[:n, n] = psi.B
    m[n, :n] = psi.C.conj()
    m[n, n] = psi.d
    return m


def identity_map(n: int) -> LinearFractionalMap:
    return LinearFractionalMap(np.eye(n), np.zeros(n), np.zeros(n), 1.0)


def _ball_vector(a) -> np.ndarray:
    a = np.atleast_1d(np.asarray(a, dtype=complex)).reshape(-1)
    if not np.linalg.norm(a) < 1:
        raise OutOfDomain(f"point must lie in the open unit ball, ||a|| = {np.linalg.norm(a):.6g}")
    return a


def mobius(a) -> LinearFractionalMap:
    """The involutive automorphism of the ball exchanging 0 and ``a``.

    ``phi_a(z) = (a - P_a z - s_a Q_a z) / (1 - <z, a>)`` with ``P_a`` the
    orthogonal projection onto the complex line through ``a``, ``Q_a = I - P_a``
    and ``s_a = sqrt(1 - |a|^2)``. For ``a = 0`` this is ``z -> -z``.
    """
    a = _ball_vector(a)
    n = a.size
    aa = np.vdot(a, a).real
    if aa == 0:
        P = np.zeros((n, n), dtype=complex)
    else:
        P = np.outer(a, a.conj()) / aa
    Q = np.eye(n) - P
    s_a = np.sqrt(1.0 - aa)
    return LinearFractionalMap(-(P + s_a * Q), a, -a, 1.0)


def mobius_component(a, j: int, z) -> complex:
    """j-th component of ``phi_a(z)`` from the expanded coordinate formula.

    Independent of :func:`mobius`; used to cross-check the projection form.
    ``j`` is 0-based.
    """
    a = _ball_vector(a)
    z = np.asarray(z, dtype=complex)
    aa = np.vdot(a, a).real
    s_a = np.sqrt(1.0 - aa)
    za = pairing(z, a)
    if aa == 0:
        return complex(-z[j])
    ratio = za / aa
    return complex(((1 - ratio + s_a * ratio) * a[j] - s_a * z[j]) / (1 - za))


def linear_map(V) -> LinearFractionalMap:
    """The symbol ``z -> V z``; requires operator norm ``||V|| <= 1``."""
    V = np.atleast_2d(np.asarray(V, dtype=complex))
    norm = np.linalg.norm(V, 2)
    if norm > 1 + SELF_MAP_SLACK:
        raise NotASelfMap(f"||V|| = {norm:.6g} > 1, z -> Vz does not map the ball into itself")
    n = V.shape[0]
    return LinearFractionalMap(V, np.zeros(n), np.zeros(n), 1.0)


def apply(psi: LinearFractionalMap, z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.size != psi.n:
        raise InvalidArgument(f"point has {z.size} coordinates, map acts on C^{psi.n}")
    den = pairing(z, psi.C) + psi.d
    if abs(den) == 0:
        raise SingularPoint(f"denominator vanishes at z = {z}")
    return (psi.A @ z + psi.B) / den


def compose(psi: LinearFractionalMap, chi: LinearFractionalMap) -> LinearFractionalMap:
    """``psi o chi``, via the product of associated matrices."""
    if psi.n != chi.n:
        raise InvalidArgument("maps act on different dimensions")
    m = associated_matrix(psi) @ associated_matrix(chi)
    n = psi.n
    if not np.linalg.norm(m[n, :n]) < abs(m[n, n]):
        raise OutOfDomain("composite denominator may vanish on the closed ball")
    return LinearFractionalMap.from_matrix(m)


def projective_identity_defect(m) -> float:
    """``||m / lambda - I||`` with ``lambda`` the largest-modulus diagonal entry."""
    m = np.asarray(m, dtype=complex)
    diag = np.diag(m)
    lam = diag[np.argmax(np.abs(diag))]
    if lam == 0:
        return np.inf
    return float(np.linalg.norm(m / lam - np.eye(m.shape[0]), 2))


def is_involution(psi: LinearFractionalMap, tol: float = 1e-11) -> bool:
    m = associated_matrix(psi)
    return projective_identity_defect(m @ m) < tol


def component_series(psi: LinearFractionalMap, j: int, D: int) -> TruncatedSeries:
    """Taylor series of the j-th coordinate of ``psi`` up to degree ``D``.

    ``j`` is 1-based, matching coordinate names z_1..z_n.
    """
    n = psi.n
    if not 1 <= j <= n:
        raise InvalidArgument(f"component index {j} outside 1..{n}")
    if not np.linalg.norm(psi.C) < abs(psi.d):
        raise OutOfDomain("denominator condition ||C|| < |d| violated")
    # (A z + B)_j = B_j + sum_k A_jk z_k = B_j + <z, conj(A_j.)>
    numerator = linear_form(psi.A[j - 1].conj(), D) + psi.B[j - 1]
    if psi.is_linear:
        return numerator * (1.0 / psi.d)
    return numerator * reciprocal_affine(psi.d, psi.C, D)
