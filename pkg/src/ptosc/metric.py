"""Metric operator, the two inner products, time evolution, energy expectations.

The metric eta = exp(z* sqrt(2) a + z sqrt(2) a+) is the exponential of a
Hermitian displacement generator. Normal ordering factors that exponential
exactly as

    eta = L L+,   L = e^{|z|^2/2} exp(z sqrt(2) a+),

with L lower triangular, and the stored block is built from this
factorization: positivity is structural (a congruence by a nonsingular
triangular factor), and because L only raises, the truncated product L L+
equals the untruncated operator's block entry for entry. Exponentiating the
bare truncated generator instead would corrupt the last ~|z| sqrt(2N) rows,
and its tiny eigenvalues drown in eigensolver noise near |z| = 1. The
independent Hermitian-eigendecomposition route is kept as
:func:`eta_eigenpath` (padded and projected) and is cross-checked against the
factored block by the verification report.

A normal-ordering identity also fixes the metric's scale on the eigenbasis:
every diagonal entry of basis+ . eta . basis equals e^{|z|^2}, so the
measured calibration constant c_measured should land on e^{-|z|^2}. The
candidate e^{-2|z|^2} is carried alongside because both scalings appear in
discussions of this normalization; the bundle records the data and takes no
side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import TruncationError
from .matrices import interior, rel_residual
from .model import BiorthogonalSystem, ModelParams, OperatorSet, ladder_ops

Mode = Literal["l2", "eta"]

_T_LIMIT = 1.0e4


def fock_padding(z_star: complex, cutoff: int) -> int:
    """Levels to pad above the cutoff so corner effects decay below roundoff.

    The displacement spreads a level-n state over ~|z| sqrt(2n) neighbours;
    three widths of headroom push the leaked amplitude under 1e-9 even at
    |z| = 1.
    """
    spread = 3.0 * abs(z_star) * math.sqrt(2.0 * cutoff)
    return max(16, int(math.ceil(spread)) + 4)


def displacement_generator(z_star: complex, dim: int) -> np.ndarray:
    """The Hermitian exponent of the metric, z* sqrt(2) a + z sqrt(2) a+."""
    a, a_dag, _, _ = ladder_ops(dim)
    w_bar = z_star * math.sqrt(2)
    return w_bar * a + w_bar.conjugate() * a_dag


@dataclass(frozen=True)
class MetricBundle:
    """Metric operator in three scalings plus the measured calibration data.

    ``eta``        the raw metric block,
    ``eta_norm``   c_measured * eta (eigenbasis columns orthonormal under it),
    ``eta_alt``  e^{-2|z|^2} * eta, the alternative normalization candidate.
    """

    eta: np.ndarray
    eta_norm: np.ndarray
    eta_alt: np.ndarray
    c_measured: float
    c_candidate_orthonormality: float
    c_candidate_alt: float
    diag_measured: np.ndarray
    min_eigenvalue: float
    spectral_identity_residual: float

    def __post_init__(self):
        for name in ("eta", "eta_norm", "eta_alt", "diag_measured"):
            getattr(self, name).flags.writeable = False

    @property
    def dim(self) -> int:
        return self.eta.shape[0]


def eta_eigenpath(z_star: complex, cutoff: int) -> np.ndarray:
    """The metric block through the Hermitian eigenvalue route.

    The generator is diagonalized in a padded space and the exponential is
    projected back, which keeps the block's corner rows faithful. Serves as
    the independent cross-check of the factored construction.
    """
    gen = displacement_generator(z_star, cutoff + fock_padding(z_star, cutoff))
    values, vectors = np.linalg.eigh(gen)
    if values.max() > 700.0:
        raise TruncationError(
            "metric lost positivity — increase N or decrease |z|")
    eta_full = (vectors * np.exp(values)) @ vectors.conj().T
    eta = eta_full[:cutoff, :cutoff].copy()
    return 0.5 * (eta + eta.conj().T)


def build_metric(params: ModelParams, ops: OperatorSet,
                 system: BiorthogonalSystem) -> MetricBundle:
    """Build the metric block and calibrate its scale against the eigenbasis.

    Raises :class:`TruncationError` when the factors overflow or the metric
    becomes numerically singular at this cutoff.
    """
    from .closedform import raising_exponential  # cheap, avoids a cycle

    n = params.cutoff
    w = params.z * math.sqrt(2)
    try:
        half_scale = math.exp(0.5 * params.z_abs2)
    except OverflowError:
        raise TruncationError(
            "metric lost positivity — increase N or decrease |z|") from None
    factor = half_scale * raising_exponential(w, n)
    if not np.all(np.isfinite(factor.view(float))):
        raise TruncationError(
            "metric lost positivity — increase N or decrease |z|")
    eta = factor @ factor.conj().T
    eta = 0.5 * (eta + eta.conj().T)

    # smallest eigenvalue through the closed-form inverse factor: eta^{-1} is
    # a congruence of the same shape, so 1/||L^{-1}||_2^2 is exact to rounding
    inv_factor = raising_exponential(-w, n) / half_scale
    min_eig = 1.0 / float(np.linalg.norm(inv_factor, 2)) ** 2
    if min_eig <= 0.0 or not math.isfinite(min_eig):
        raise TruncationError(
            "metric lost positivity — increase N or decrease |z|")

    diag = np.einsum("im,ij,jm->m", system.basis.conj(), eta, system.basis).real
    n_int = params.interior_dim
    c_measured = 1.0 / float(diag[:n_int].mean())
    eta_norm = c_measured * eta

    spectral = system.duals @ system.duals.conj().T
    resid = rel_residual(interior(eta_norm, params.margin),
                         interior(spectral, params.margin))

    return MetricBundle(
        eta=eta,
        eta_norm=eta_norm,
        eta_alt=math.exp(-2.0 * params.z_abs2) * eta,
        c_measured=c_measured,
        c_candidate_orthonormality=math.exp(-params.z_abs2),
        c_candidate_alt=math.exp(-2.0 * params.z_abs2),
        diag_measured=diag,
        min_eigenvalue=min_eig,
        spectral_identity_residual=resid,
    )


def inner(phi: np.ndarray, psi: np.ndarray, mode: Mode,
          bundle: MetricBundle | None = None) -> complex:
    """Inner product <phi|psi>: plain l2, or weighted by eta_norm."""
    phi = np.asarray(phi, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    if phi.shape != psi.shape or phi.ndim != 1:
        raise ValueError(f"state shapes differ: {phi.shape} vs {psi.shape}")
    if mode == "l2":
        return complex(phi.conj() @ psi)
    if mode == "eta":
        if bundle is None:
            raise ValueError("eta-mode inner product needs a MetricBundle")
        if bundle.dim != phi.shape[0]:
            raise ValueError("state dimension does not match the metric")
        return complex(phi.conj() @ bundle.eta_norm @ psi)
    raise ValueError(f"unknown inner-product mode {mode!r}")


def evolve(psi0: np.ndarray, t: float, system: BiorthogonalSystem) -> np.ndarray:
    """Time-evolved state through the spectral sum; no renormalization.

    psi_t = sum_n e^{-i E_n t} basis_n (dual_n+ psi0).
    """
    if abs(t) >= _T_LIMIT:
        raise ValueError(f"|t| must stay below {_T_LIMIT:g}")
    psi0 = np.asarray(psi0, dtype=complex)
    if t == 0.0:
        return psi0.copy()
    coeffs = system.duals.conj().T @ psi0
    return system.basis @ (np.exp(-1j * system.energies * t) * coeffs)


def expectation(op: np.ndarray, psi: np.ndarray, mode: Mode,
                bundle: MetricBundle | None = None) -> complex:
    """Normalized expectation value of ``op`` in the chosen inner product."""
    psi = np.asarray(psi, dtype=complex)
    norm = inner(psi, psi, mode, bundle)
    if abs(norm) == 0.0:
        raise ValueError("expectation value of the zero state is undefined")
    return inner(psi, op @ psi, mode, bundle) / norm


def closed_form_energy(t: float, z_abs2: float, mode: Mode) -> complex:
    """Energy expectation of the first excited number state, in closed form.

    l2 mode:  1 + (1 + 4i |z|^2 sin t) / (2 + 8 |z|^2 (1 - cos t)),
    eta mode: (3 + 2 |z|^2) / (2 + 4 |z|^2)  (time independent).
    """
    if z_abs2 < 0.0:
        raise ValueError("|z|^2 must be nonnegative")
    if mode == "l2":
        return 1.0 + (1.0 + 4j * z_abs2 * math.sin(t)) / (
            2.0 + 8.0 * z_abs2 * (1.0 - math.cos(t)))
    if mode == "eta":
        return complex((3.0 + 2.0 * z_abs2) / (2.0 + 4.0 * z_abs2))
    raise ValueError(f"unknown inner-product mode {mode!r}")


def default_time_grid() -> np.ndarray:
    """Two full oscillation periods, 513 points."""
    return np.linspace(0.0, 4.0 * math.pi, 513)


@dataclass(frozen=True)
class EnergyTrajectory:
    """Energy expectation of the first excited number state over a time grid.

    Carries both inner-product modes next to their closed forms, plus the
    worst deviation of each numerical series from its closed form.
    """

    times: np.ndarray
    l2_values: np.ndarray
    eta_values: np.ndarray
    l2_closed: np.ndarray
    eta_closed: np.ndarray
    max_dev_l2: float
    max_dev_eta: float

    def __post_init__(self):
        for name in ("times", "l2_values", "eta_values", "l2_closed", "eta_closed"):
            getattr(self, name).flags.writeable = False


def energy_trajectory(params: ModelParams, t_grid: np.ndarray, *,
                      ops: OperatorSet | None = None,
                      system: BiorthogonalSystem | None = None,
                      bundle: MetricBundle | None = None) -> EnergyTrajectory:
    """Evolve the first excited number state and tabulate both expectations."""
    from .model import build_operators, build_system  # cheap, avoids cycles

    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or not np.all(np.isfinite(t_grid)):
        raise ValueError("time grid must be a finite 1-d sequence")
    if ops is None:
        ops = build_operators(params)
    if system is None:
        system = build_system(params, ops)
    if bundle is None:
        bundle = build_metric(params, ops, system)

    psi0 = np.zeros(params.cutoff, dtype=complex)
    psi0[1] = 1.0

    l2_vals = np.empty(len(t_grid), dtype=complex)
    eta_vals = np.empty(len(t_grid), dtype=complex)
    for i, t in enumerate(t_grid):
        psi_t = evolve(psi0, float(t), system)
        l2_vals[i] = expectation(ops.h, psi_t, "l2")
        eta_vals[i] = expectation(ops.h, psi_t, "eta", bundle)

    z2 = params.z_abs2
    l2_closed = np.array([closed_form_energy(float(t), z2, "l2") for t in t_grid])
    eta_closed = np.full(len(t_grid), closed_form_energy(0.0, z2, "eta"))

    return EnergyTrajectory(
        times=t_grid.copy(),
        l2_values=l2_vals,
        eta_values=eta_vals,
        l2_closed=l2_closed,
        eta_closed=eta_closed,
        max_dev_l2=float(np.abs(l2_vals - l2_closed).max()),
        max_dev_eta=float(np.abs(eta_vals - eta_closed).max()),
    )
