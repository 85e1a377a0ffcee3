"""Position-space eigenfunctions, probability densities, and uncertainties.

Two representations coexist. The ordinary coordinate reads a state through
its number-basis amplitudes against the Hermite functions; the pseudo-position
coordinate reads it through its eigenbasis coefficients against the *same*
Hermite functions, because the metric-weighted eigenfunctions of the shifted
model are exactly the oscillator ones. Densities in both representations are
real, nonnegative, and integrate to one for states supported away from the
cutoff corner.

Hermite evaluation uses the orthonormalized function recurrence (Gaussian
folded in), which stays bounded far beyond the n ~ 150 overflow point of the
bare polynomials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import TruncationError
from .matrices import QuadratureRule, gauss_hermite
from .metric import MetricBundle, expectation, inner
from .model import BiorthogonalSystem, ModelParams, OperatorSet

Representation = Literal["x", "X"]

_MAX_LEVEL = 512


def hermite_functions(n_max: int, x: np.ndarray) -> np.ndarray:
    """Orthonormal oscillator eigenfunctions 0..n_max sampled on ``x``.

    Row n holds e^{-x^2/2} H_n(x) / sqrt(2^n n! sqrt(pi)).
    """
    if not 0 <= n_max < _MAX_LEVEL:
        raise ValueError(f"level must satisfy 0 <= n < {_MAX_LEVEL}, got {n_max}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((n_max + 1, x.size))
    out[0] = math.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for k in range(1, n_max):
        out[k + 1] = (math.sqrt(2.0 / (k + 1)) * x * out[k]
                      - math.sqrt(k / (k + 1.0)) * out[k - 1])
    return out


def hermite_function(n: int, x: float) -> float:
    """Single orthonormal eigenfunction value."""
    return float(hermite_functions(n, np.array([x]))[n, 0])


def _hermite_polys_normalized(n_max: int, x: np.ndarray) -> np.ndarray:
    """Hermite functions with the Gaussian stripped: e^{x^2/2} psi_n(x).

    Only meaningful on quadrature nodes, where the weight supplies the
    Gaussian; bounded there for every order within the dense contract.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1, x.size))
    out[0] = math.pi ** -0.25
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for k in range(1, n_max):
        out[k + 1] = (math.sqrt(2.0 / (k + 1)) * x * out[k]
                      - math.sqrt(k / (k + 1.0)) * out[k - 1])
    return out


@dataclass(frozen=True)
class DensityProfile:
    """Probability density sampled on a grid, plus its quadrature integral."""

    grid: np.ndarray
    values: np.ndarray
    representation: Representation
    total: float

    def __post_init__(self):
        self.grid.flags.writeable = False
        self.values.flags.writeable = False


def default_profile_grid() -> np.ndarray:
    """Uniform output grid covering the Gaussian support comfortably."""
    return np.linspace(-6.0, 6.0, 481)


def density(psi: np.ndarray, representation: Representation,
            grid: np.ndarray, system: BiorthogonalSystem,
            bundle: MetricBundle, quad: QuadratureRule | None = None) -> DensityProfile:
    """Probability density of ``psi`` in either coordinate representation.

    ``"x"`` uses the number-basis amplitudes directly; ``"X"`` expands in the
    eigenbasis first (coefficients dual_n+ psi). The ``total`` field holds the
    Gauss-Hermite integral of the profile, which is 1 up to truncation for
    interior-supported states.
    """
    psi = np.asarray(psi, dtype=complex)
    n = psi.shape[0]
    if n != system.dim:
        raise ValueError("state dimension does not match the system")
    grid = np.asarray(grid, dtype=float)

    if representation == "x":
        coeffs = psi
        norm = float((psi.conj() @ psi).real)
    elif representation == "X":
        coeffs = system.duals.conj().T @ psi
        norm = float(inner(psi, psi, "eta", bundle).real)
    else:
        raise ValueError(f"unknown representation {representation!r}")
    if norm <= 0.0:
        raise ValueError("cannot normalize the zero state")

    amplitude = hermite_functions(n - 1, grid).T @ coeffs
    values = np.abs(amplitude) ** 2 / norm

    if quad is None:
        quad = gauss_hermite(max(128, n))
    bare = _hermite_polys_normalized(n - 1, quad.nodes).T @ coeffs
    total = float(quad.integrate(np.abs(bare) ** 2).real) / norm

    return DensityProfile(grid=grid.copy(), values=values,
                          representation=representation, total=total)


@dataclass(frozen=True)
class PositionDecomposition:
    """Metric-mode expectations of position and momentum, split by part.

    The imaginary part of the position expectation equals Im(z*) for any
    interior-supported state; the analogous statement for momentum (imaginary
    part Re(z*), from the +i z* I term) is the derived counterpart. The
    deviation fields measure both, and ``rotation_residual`` cross-checks the
    real position against cos(theta) <X> + sin(theta) <P> + Re(z*).
    """

    re_x: float
    im_x: float
    re_p: float
    im_p: float
    im_x_deviation: float
    im_p_deviation: float
    rotation_residual: float


def position_decomposition(psi: np.ndarray, ops: OperatorSet,
                           bundle: MetricBundle, params: ModelParams,
                           check_tol: float | None = 1.0e-6) -> PositionDecomposition:
    """Split the metric-mode <x> and <p> into observable and shift parts.

    Raises :class:`TruncationError` when the imaginary parts stray from the
    shift parameter by more than ``check_tol`` (pass None to skip the check).
    """
    e_x = expectation(ops.x, psi, "eta", bundle)
    e_p = expectation(ops.p, psi, "eta", bundle)
    e_bx = expectation(ops.big_x, psi, "eta", bundle)
    e_bp = expectation(ops.big_p, psi, "eta", bundle)

    dev_x = abs(e_x.imag - params.z_star.imag)
    dev_p = abs(e_p.imag - params.z_star.real)
    rot = abs(e_x.real - (math.cos(params.theta) * e_bx.real
                          + math.sin(params.theta) * e_bp.real
                          + params.z_star.real))
    if check_tol is not None and max(dev_x, dev_p) > check_tol:
        raise TruncationError(
            f"shift decomposition off by {max(dev_x, dev_p):.3e}; "
            "state reaches too close to the cutoff corner")
    return PositionDecomposition(
        re_x=e_x.real, im_x=e_x.imag, re_p=e_p.real, im_p=e_p.imag,
        im_x_deviation=dev_x, im_p_deviation=dev_p, rotation_residual=rot)


@dataclass(frozen=True)
class Uncertainties:
    """Metric-mode spreads of position and momentum and their product."""

    dx: float
    dp: float
    product: float


def uncertainties(psi: np.ndarray, ops: OperatorSet,
                  bundle: MetricBundle, imag_tol: float = 1.0e-9) -> Uncertainties:
    """Centered second moments of x and p in the metric inner product.

    Both variances are real and positive for interior-supported states (the
    centered operators are pseudo-Hermitian); a variance that comes out
    negative or complex beyond ``imag_tol`` signals truncation damage and
    raises :class:`TruncationError`. The product obeys dx dp >= 1/2.
    """
    psi = np.asarray(psi, dtype=complex)
    eye = np.eye(ops.dim, dtype=complex)

    spreads = []
    for op in (ops.x, ops.p):
        mean = expectation(op, psi, "eta", bundle)
        centered = op - mean * eye
        var = expectation(centered @ centered, psi, "eta", bundle)
        if abs(var.imag) > imag_tol or var.real < -imag_tol:
            raise TruncationError(
                f"variance {var:.3e} is not a positive real; "
                "state reaches too close to the cutoff corner")
        spreads.append(math.sqrt(max(var.real, 0.0)))

    dx, dp = spreads
    return Uncertainties(dx=dx, dp=dp, product=dx * dp)
