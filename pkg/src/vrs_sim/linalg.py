"""Small dense complex linear algebra on the emitter-cavity Hilbert space.

Matrices are plain ``complex128`` numpy arrays. The Hilbert space is the
product of a two-level emitter and a Fock space truncated at ``n_max``
photons, ordered with the emitter index varying slowest::

    index(emitter, n) = emitter * (n_max + 1) + n,   emitter: 0 = |g>, 1 = |e>

Density matrices are vectorized row-major (``X.reshape(-1)``), for which

    vec(A @ X @ B) == kron(A, B.T) @ vec(X)
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NotHermitian, SingularMatrix

PIVOT_RTOL = 1e-14
HERMITIAN_ATOL = 1e-12


@dataclass(frozen=True)
class HilbertSpace:
    n_max: int = 3

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max!r}")

    @property
    def n_fock(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return 2 * (self.n_max + 1)

    def index(self, excited: bool, n: int) -> int:
        if not 0 <= n <= self.n_max:
            raise IndexError(f"photon number {n} outside 0..{self.n_max}")
        return int(excited) * self.n_fock + n

    def basis(self, excited: bool, n: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(excited, n)] = 1.0
        return v


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(a), np.asarray(b))


def dagger(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).conj().T


def annihilator(n_levels: int) -> np.ndarray:
    """Bosonic lowering operator on ``n_levels`` Fock states, ``a|n> = sqrt(n)|n-1>``."""
    return np.diag(np.sqrt(np.arange(1, n_levels, dtype=float)), 1).astype(complex)


# |g><e| in the (g, e) ordering
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)


def build_operators(space: HilbertSpace) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(a_c, sigma)``: cavity annihilator and emitter lowering operator."""
    a_c = kron(np.eye(2), annihilator(space.n_fock))
    sigma = kron(SIGMA_MINUS, np.eye(space.n_fock))
    return a_c, sigma


def vec(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).reshape(-1)


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    return v.reshape(dim, dim)


def spre(a: np.ndarray) -> np.ndarray:
    """Superoperator of ``X -> a @ X``."""
    return kron(a, np.eye(a.shape[0]))


def spost(b: np.ndarray) -> np.ndarray:
    """Superoperator of ``X -> X @ b``."""
    return kron(np.eye(b.shape[0]), np.asarray(b).T)


def sprepost(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator of ``X -> a @ X @ b``."""
    return kron(a, np.asarray(b).T)


def lu_factor(m: np.ndarray):
    """LU factorization with partial pivoting and an explicit pivot check.

    Raises SingularMatrix when a pivot falls below ``1e-14 * max|m|``.
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = np.abs(m).max() if m.size else 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(m, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if scale == 0.0 or pivots.min() <= PIVOT_RTOL * scale:
        raise SingularMatrix(
            f"no pivot above {PIVOT_RTOL:g} * max|entry| "
            f"(smallest pivot {pivots.min():.3e}, max entry {scale:.3e})"
        )
    return lu, piv


def solve_linear(m: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``m @ x = rhs``; ``rhs`` may be a vector or a stack of columns."""
    factors = lu_factor(m)
    return scipy.linalg.lu_solve(factors, rhs, check_finite=False)


def eigvals_hermitian(m: np.ndarray, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix, ascending."""
    m = np.asarray(m)
    defect = np.abs(m - dagger(m)).max() if m.size else 0.0
    if defect > atol:
        raise NotHermitian(f"Hermiticity defect {defect:.3e} exceeds {atol:g}")
    return np.linalg.eigvalsh(m)
