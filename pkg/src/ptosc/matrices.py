"""Dense complex matrix kernels: exponentials, Hermitian eigensolves, quadrature.

Everything operates on plain ``numpy.ndarray`` matrices with ``complex128``
entries. The package contract is desk-scale dense algebra: dimensions up to
256, Frobenius norms for all residual reporting, relative to the larger
operand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_DIM = 256

# Order-13 Pade coefficients and the matching scaling threshold for the
# matrix exponential (double precision).
_PADE13_B = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)
_PADE13_THETA = 5.371920351148152
_NORM_LIMIT = 1.0e6


def frob(a: np.ndarray) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(a))


def rel_residual(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius distance between ``a`` and ``b``, relative to the larger operand."""
    denom = max(frob(a), frob(b))
    if denom == 0.0:
        return 0.0
    return frob(a - b) / denom


def interior(m: np.ndarray, margin: int) -> np.ndarray:
    """Top-left block with ``margin`` corner rows and columns dropped.

    Truncated ladder algebra is exact only away from the cutoff corner, so
    every truncation-sensitive identity is asserted on this block.
    """
    n = m.shape[0]
    if not 0 <= margin < n:
        raise ValueError(f"margin {margin} out of range for dimension {n}")
    k = n - margin
    return m[:k, :k]


def _check_square(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    if m.shape[0] > MAX_DIM:
        raise ValueError(f"{name} dimension {m.shape[0]} exceeds the dense contract ({MAX_DIM})")
    if not np.all(np.isfinite(m.view(float))):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def mat_exp(m: np.ndarray) -> np.ndarray:
    """Matrix exponential by Pade(13) approximation with scaling and squaring.

    Accurate to ~1e-12 relative for Frobenius norms up to a few tens; inputs
    with norm beyond 1e6 are rejected because repeated squaring would wash
    out all significance.
    """
    m = _check_square(m)
    norm = frob(m)
    if norm > _NORM_LIMIT:
        raise ValueError("matrix too large to exponentiate")

    squarings = 0
    if norm > _PADE13_THETA:
        squarings = int(np.ceil(np.log2(norm / _PADE13_THETA)))
    a = m / (2.0 ** squarings)

    b = _PADE13_B
    eye = np.eye(a.shape[0], dtype=complex)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a4 @ a2
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
             + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * eye)
    v = (a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
         + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * eye)
    r = np.linalg.solve(v - u, v + u)

    for _ in range(squarings):
        r = r @ r
    return r


def herm_eig(s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix (ascending eigenvalues).

    Returns ``(values, vectors)`` with unitary ``vectors`` whose columns are
    the eigenvectors. Rejects inputs whose anti-Hermitian part exceeds
    1e-12 relative.
    """
    s = _check_square(s, "hermitian matrix")
    dev = frob(s - s.conj().T)
    if dev > 1.0e-12 * max(frob(s), 1.0e-300):
        raise ValueError(f"input is not Hermitian (deviation {dev:.3e})")
    values, vectors = np.linalg.eigh(s)
    return values, vectors


def herm_exp(s: np.ndarray) -> np.ndarray:
    """exp of a Hermitian matrix through its eigendecomposition.

    The preferred route whenever Hermiticity is known: it preserves
    positivity exactly (up to roundoff) where the Pade path may not.
    """
    values, vectors = herm_eig(s)
    out = (vectors * np.exp(values)) @ vectors.conj().T
    return 0.5 * (out + out.conj().T)


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Hermite nodes and weights for the weight function exp(-x^2)."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.nodes.flags.writeable = False
        self.weights.flags.writeable = False

    @property
    def order(self) -> int:
        return len(self.nodes)

    def integrate(self, values: np.ndarray) -> float | complex:
        """Integral of f against exp(-x^2), given f sampled on the nodes."""
        values = np.asarray(values)
        if values.shape[-1] != self.order:
            raise ValueError("sample count does not match the rule order")
        return values @ self.weights


def gauss_hermite(k: int) -> QuadratureRule:
    """Gauss-Hermite rule with ``k`` nodes, exact for degree <= 2k - 1."""
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError(f"quadrature order must be a positive integer, got {k!r}")
    nodes, weights = np.polynomial.hermite.hermgauss(int(k))
    return QuadratureRule(nodes=nodes, weights=weights)
