"""Closed-form factors of the model operators and the extended-precision checks.

Every construction in this package factors into phase diagonals and
exponentials of a pure raising or lowering operator:

    basis = exp(-z* sqrt2 a) Phi          Phi  = diag(e^{-i n theta})
    duals = exp( z  sqrt2 a+) Phi         (exact inverse adjoint of the basis)
    eta   = e^{|z|^2} exp(z sqrt2 a+) exp(z* sqrt2 a)    (normal ordering)

The exponential factors have entrywise closed forms evaluated by stable
multiplicative recurrences, so every entry is produced to relative rounding
accuracy with no subtractive cancellation.

That matters because the identities verified by this package (involution
squares, symmetry conjugations, metric orthonormality) cancel catastrophically
when evaluated as products in the number basis: the biorthogonal condition
number grows like e^{2|z| sqrt(2N)}, which drags double-precision residuals
up to ~1e-9 by N = 128 for reasons that have nothing to do with truncation.
The ``identity_battery`` here therefore evaluates those checks in extended
precision (``numpy.clongdouble``) on the closed-form factors, so that what it
reports is the truncation behaviour of the model, not the rounding floor of
the arithmetic. On platforms whose long double equals double the battery
still runs, merely at the double floor.
"""

from __future__ import annotations

import math

import numpy as np

from .matrices import rel_residual
from .model import INTEGER_PI, ModelParams

EXTENDED = np.clongdouble


def _real_dtype(dtype) -> np.dtype:
    return np.zeros(0, dtype=dtype).real.dtype


def raising_exponential(coeff: complex, dim: int, dtype=np.complex128) -> np.ndarray:
    """exp(coeff * a+): lower triangular, [n+k, n] = coeff^k sqrt((n+k)!/n!)/k!."""
    out = np.zeros((dim, dim), dtype=dtype)
    c = out.dtype.type(coeff)
    roots = np.sqrt(np.arange(dim, dtype=_real_dtype(dtype)))
    for n in range(dim):
        v = out.dtype.type(1)
        out[n, n] = v
        for i in range(n, dim - 1):
            v = v * c * roots[i + 1] / (i + 1 - n)
            out[i + 1, n] = v
    return out


def lowering_exponential(coeff: complex, dim: int, dtype=np.complex128) -> np.ndarray:
    """exp(coeff * a): upper triangular, the transpose pattern of the raising one."""
    return raising_exponential(coeff, dim, dtype).T.copy()


def phase_vector(theta: float, dim: int, dtype=np.complex128) -> np.ndarray:
    """e^{-i n theta} for n = 0..dim-1."""
    angles = -np.arange(dim, dtype=_real_dtype(dtype)) * _real_dtype(dtype).type(theta)
    return (np.cos(angles) + 1j * np.sin(angles)).astype(dtype)


def eigen_basis(z_star: complex, theta: float, dim: int,
                dtype=np.complex128) -> np.ndarray:
    """The eigenbasis columns: exp(-z* sqrt2 a) Phi."""
    w_bar = z_star * math.sqrt(2)
    return lowering_exponential(-w_bar, dim, dtype) * phase_vector(theta, dim, dtype)[None, :]


def dual_columns(z_star: complex, theta: float, dim: int,
                 dtype=np.complex128) -> np.ndarray:
    """Biorthonormal duals in closed form: exp(z sqrt2 a+) Phi.

    This is the exact triangular inverse adjoint of the eigenbasis, entry by
    entry, so no linear solve (and none of its conditioning) is involved.
    """
    w = z_star.conjugate() * math.sqrt(2)
    return raising_exponential(w, dim, dtype) * phase_vector(theta, dim, dtype)[None, :]


def eta_normal_ordered(z_star: complex, dim: int, dtype=np.complex128) -> np.ndarray:
    """The metric through its normal-ordered factorization.

    e^{|z|^2} exp(z sqrt2 a+) exp(z* sqrt2 a); independent of the Hermitian
    eigenvalue route used by :func:`ptosc.metric.build_metric`.
    """
    w = z_star.conjugate() * math.sqrt(2)
    scale = np.exp(_real_dtype(dtype).type(abs(z_star) ** 2))
    return scale * (raising_exponential(w, dim, dtype)
                    @ lowering_exponential(w.conjugate(), dim, dtype))


def _sign_vectors(dim: int, branch: str, dtype) -> tuple[np.ndarray, np.ndarray]:
    rd = _real_dtype(dtype)
    sigma = np.where(np.arange(dim) % 2 == 0, rd.type(1), rd.type(-1))
    sigma_prime = sigma.copy() if branch == INTEGER_PI else np.ones(dim, dtype=rd)
    return sigma, sigma_prime


def _hamiltonian(z_star: complex, dim: int, dtype) -> np.ndarray:
    rd = _real_dtype(dtype)
    h = np.diag(np.arange(dim, dtype=rd) + rd.type(0.5)).astype(dtype)
    roots = np.sqrt(np.arange(dim, dtype=rd))
    w_bar = np.zeros(0, dtype=dtype).dtype.type(z_star * math.sqrt(2))
    for n in range(1, dim):
        h[n - 1, n] = -w_bar * roots[n]
    return h


def _fit_identity(block: np.ndarray) -> float:
    return float((np.trace(block) / block.shape[0]).real)


def involution_scalars(params: ModelParams, branch: str,
                       dtype=EXTENDED) -> tuple[float, float, float, float]:
    """gamma_P, gamma_T and the calibrated interior residuals, in a padded space.

    Squaring does not commute with truncation, so the squares are formed at a
    padded dimension and fitted on the working interior block.
    """
    from .metric import fock_padding  # local import to avoid a cycle

    n = params.cutoff
    dim = n + fock_padding(params.z_star, n)
    k = params.interior_dim
    duals = dual_columns(params.z_star, params.theta, dim, dtype)
    sigma, sigma_prime = _sign_vectors(dim, branch, dtype)
    eye = np.eye(k, dtype=complex)

    p_mat = (duals * sigma) @ duals.conj().T
    p_sq = np.asarray((p_mat @ p_mat)[:k, :k], dtype=complex)
    gamma_p = _fit_identity(p_sq)
    t_mat = (duals * sigma_prime) @ duals.T
    t_sq = np.asarray((t_mat @ np.conj(t_mat))[:k, :k], dtype=complex)
    gamma_t = _fit_identity(t_sq)
    return (gamma_p, gamma_t,
            rel_residual(p_sq / gamma_p, eye) if gamma_p > 0 else math.inf,
            rel_residual(t_sq / gamma_t, eye) if gamma_t > 0 else math.inf)


def identity_battery(params: ModelParams) -> tuple[dict[str, float], dict[str, float]]:
    """Extended-precision residuals for the cancellation-dominated identities.

    Returns ``(residuals, measurements)``; the residual keys name the same
    checks the verification report carries. Operators are realized from the
    closed-form factors at the working cutoff (plus padding where squaring
    requires it) and multiplied in extended precision.
    """
    dtype = EXTENDED
    n, m = params.cutoff, params.margin
    k = n - m
    branch = params.branch
    eye_int = np.eye(k, dtype=complex)

    basis = eigen_basis(params.z_star, params.theta, n, dtype)
    duals = dual_columns(params.z_star, params.theta, n, dtype)
    sigma, sigma_prime = _sign_vectors(n, branch, dtype)
    eta = eta_normal_ordered(params.z_star, n, dtype)
    h = _hamiltonian(params.z_star, n, dtype)

    def low(a):
        return np.asarray(a[:k, :k], dtype=complex)

    # metric sandwiches: calibrate exactly as the double path does, from the
    # measured interior diagonal
    gram_raw = basis.conj().T @ eta @ basis
    diag = np.asarray(gram_raw.diagonal().real, dtype=float)
    c_measured = 1.0 / float(diag[:k].mean())
    bch = math.exp(params.z_abs2)

    residuals: dict[str, float] = {}
    measurements: dict[str, float] = {}
    residuals["metric: eigenbasis orthonormal under eta_norm"] = rel_residual(
        low(gram_raw) * c_measured, eye_int)
    residuals["metric: raw diagonal = e^{|z|^2} (normal-ordering value)"] = float(
        np.abs(diag[:k] / bch - 1.0).max())
    eta_norm = eta * _real_dtype(dtype).type(c_measured)
    residuals["metric: spectral identity eta_norm = duals duals+"] = rel_residual(
        low(eta_norm), low(duals @ duals.conj().T))
    residuals["metric: pseudo-Hermiticity of H"] = rel_residual(
        low(eta_norm @ h), low(h.conj().T @ eta_norm))

    p_mat = (duals * sigma) @ duals.conj().T
    t_mat = (duals * sigma_prime) @ duals.T
    c_mat = (basis * sigma) @ duals.conj().T
    x_mat = (basis * (sigma * sigma_prime)) @ duals.T
    p_inv = (basis * sigma) @ basis.conj().T
    t_inv = (basis.conj() * sigma_prime) @ basis.conj().T

    residuals["involutions: C^2 = I"] = rel_residual(low(c_mat @ c_mat), eye_int)
    residuals["involutions: X X = I"] = rel_residual(
        low(x_mat @ np.conj(x_mat)), eye_int)

    gamma_p, gamma_t, p_resid, t_resid = involution_scalars(params, branch, dtype)
    residuals["involutions: P^2 = I after calibration"] = p_resid
    residuals["involutions: T T = I after calibration"] = t_resid
    measurements["p_squared_scalar"] = gamma_p
    measurements["t_squared_scalar"] = gamma_t

    h_dag = h.conj().T
    residuals["symmetry: H+ = eta_norm H eta_norm^-1"] = residuals[
        "metric: pseudo-Hermiticity of H"]
    residuals["symmetry: H+ = P H P^-1"] = rel_residual(
        low(p_mat @ h @ p_inv), low(h_dag))
    residuals["symmetry: H+ = T conj(H) T^-1"] = rel_residual(
        low(t_mat @ np.conj(h) @ t_inv), low(h_dag))
    residuals["symmetry: [C, H] = 0"] = rel_residual(low(c_mat @ h), low(h @ c_mat))
    residuals["symmetry: X conj(H) = H X"] = rel_residual(
        low(x_mat @ np.conj(h)), low(h @ x_mat))
    residuals["involutions: P = eta_norm C"] = rel_residual(
        low(p_mat), low(eta_norm @ c_mat))

    return residuals, measurements
