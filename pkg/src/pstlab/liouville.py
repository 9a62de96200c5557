"""Dense Liouville-space kernels: vectorization, superoperator lifts, norms.

Conventions
-----------
A ``d x d`` matrix ``B`` is flattened row-major into a length ``d**2`` column
vector ``|B>``: entry ``i*d + j`` of ``|B>`` is ``B[i, j]``.  With this
convention the triple-product rule

    |B C D> = (B kron D^T) |C>

holds, a Hermitian Hamiltonian ``H`` lifts to the commutator generator
``H kron I - I kron H^T``, and a unitary ``U`` lifts to ``U kron conj(U)``.
Column-major stacking is deliberately not supported anywhere; mixing the two
conventions silently swaps the Kronecker factors.

All matrices are dense ``complex128``.  The intended scale is one to three
qubits, i.e. superoperators of at most 64 x 64.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

__all__ = [
    "HERMITIAN_ATOL",
    "UNITARY_ATOL",
    "vectorize",
    "devectorize",
    "triple_product_superop",
    "hamiltonian_superop",
    "unitary_superop",
    "expm",
    "op_norm",
    "expectation",
    "is_hermitian",
    "is_unitary",
]

# Max-entry deviation allowed by the Hermiticity / unitarity validators.
HERMITIAN_ATOL = 1e-9
UNITARY_ATOL = 1e-9

# Above this dimension op_norm switches from full SVD to power iteration.
_SVD_DIM_LIMIT = 4096
_POWER_TOL = 1e-10
_POWER_MAX_ITERS = 10000


def _as_matrix(name: str, a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(float))):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def _as_square(name: str, a) -> np.ndarray:
    a = _as_matrix(name, a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    return a


def is_hermitian(a, atol: float = HERMITIAN_ATOL) -> bool:
    """True if the max-entry deviation of ``a`` from its adjoint is within atol."""
    a = np.asarray(a, dtype=complex)
    return bool(np.max(np.abs(a - a.conj().T)) <= atol)


def is_unitary(a, atol: float = UNITARY_ATOL) -> bool:
    """True if ``a^dag a`` deviates from the identity by at most atol per entry."""
    a = np.asarray(a, dtype=complex)
    eye = np.eye(a.shape[0])
    return bool(np.max(np.abs(a.conj().T @ a - eye)) <= atol)


def vectorize(mat) -> np.ndarray:
    """Flatten a square matrix row-major into its Liouville column vector.

    Entry ``i*d + j`` of the result is ``mat[i, j]``, so the first ``d``
    entries are the first row of ``mat``.
    """
    mat = _as_square("mat", mat)
    return mat.reshape(-1).copy()


def devectorize(vec) -> np.ndarray:
    """Inverse of :func:`vectorize`; the vector length must be a perfect square."""
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    d = int(round(np.sqrt(vec.size)))
    if d * d != vec.size:
        raise ValueError(f"vector length {vec.size} is not a perfect square")
    return vec.reshape(d, d).copy()


def triple_product_superop(left, right) -> np.ndarray:
    """Superoperator ``left kron right^T`` mapping ``|C>`` to ``|left C right>``."""
    left = _as_square("left", left)
    right = _as_square("right", right)
    if left.shape != right.shape:
        raise ValueError(
            f"dimension mismatch: left is {left.shape}, right is {right.shape}"
        )
    return np.kron(left, right.T)


def hamiltonian_superop(ham) -> np.ndarray:
    """Lift a Hermitian Hamiltonian to its commutator generator.

    Returns ``ham kron I - I kron ham^T``, the generator of
    ``d|rho>/dt = -i (ham kron I - I kron ham^T) |rho>``.

    Raises ValueError if ``ham`` deviates from Hermiticity by more than
    ``HERMITIAN_ATOL`` in any entry.
    """
    ham = _as_square("ham", ham)
    if not is_hermitian(ham):
        dev = np.max(np.abs(ham - ham.conj().T))
        raise ValueError(f"ham is not Hermitian (max deviation {dev:.3e})")
    eye = np.eye(ham.shape[0])
    return np.kron(ham, eye) - np.kron(eye, ham.T)


def unitary_superop(u) -> np.ndarray:
    """Lift a unitary to the Liouville-space map ``u kron conj(u)``."""
    u = _as_square("u", u)
    if not is_unitary(u):
        dev = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
        raise ValueError(f"u is not unitary (max deviation {dev:.3e})")
    return np.kron(u, u.conj())


def expm(a) -> np.ndarray:
    """Matrix exponential via scaling-and-squaring with a Pade approximant.

    Backward error is far below 1e-12 in the operator norm for the matrix
    sizes used here (at most 64 x 64).
    """
    a = _as_square("a", a)
    return scipy.linalg.expm(a)


def op_norm(a) -> float:
    """Largest singular value of a matrix.

    Uses a full SVD up to 4096 x 4096 and power iteration on ``a^dag a``
    (tolerance 1e-10, at most 10000 iterations) beyond that.
    """
    a = _as_matrix("a", a)
    if a.size == 0:
        return 0.0
    if max(a.shape) <= _SVD_DIM_LIMIT:
        return float(np.linalg.svd(a, compute_uv=False)[0])
    rng = np.random.default_rng(0)
    v = rng.standard_normal(a.shape[1]) + 1j * rng.standard_normal(a.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(_POWER_MAX_ITERS):
        w = a.conj().T @ (a @ v)
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0
        v_new = w / norm_w
        sigma_new = np.sqrt(norm_w)
        if abs(sigma_new - sigma) <= _POWER_TOL * max(sigma_new, 1.0):
            return float(sigma_new)
        v, sigma = v_new, sigma_new
    return float(sigma)


def expectation(obs, rho_vec) -> complex:
    """Inner product ``<obs|rho>`` of an observable with a vectorized state.

    Equals ``sum_ij conj(obs[i, j]) rho[i, j]``, which is ``Tr(obs rho)``
    for Hermitian ``obs``.
    """
    obs = _as_square("obs", obs)
    rho_vec = np.asarray(rho_vec, dtype=complex).reshape(-1)
    if obs.size != rho_vec.size:
        raise ValueError(
            f"dimension mismatch: obs has {obs.size} entries, state has {rho_vec.size}"
        )
    return complex(np.vdot(vectorize(obs), rho_vec))
