"""Operators and bases of the complex-shifted oscillator in a truncated Fock space.

The model is the harmonic oscillator displaced by a complex parameter z*
(units m = hbar = omega = e = 1). Its Hamiltonian

    H = (a+ - z* sqrt(2) I) a + 1/2

is upper triangular in the number basis of a+a (the storage basis for every
matrix here), so the truncated spectrum is {n + 1/2} exactly for any shift.
The shifted ladder pair b = a e^{i theta}, b# = e^{-i theta}(a+ - z* sqrt(2) I)
generates the eigenbasis; its biorthonormal duals are eigenvectors of H+.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BranchError
from .matrices import MAX_DIM, interior, rel_residual

#: branch labels for theta - arg(z*) being an integer / half-integer multiple of pi
INTEGER_PI = "integer_pi"
HALF_INTEGER_PI = "half_integer_pi"

_BRANCH_TOL = 1.0e-12


@dataclass(frozen=True)
class ModelParams:
    """Physical configuration: complex shift, ladder phase, cutoff, corner margin.

    ``theta=None`` selects the default phase arg(z*) + pi/2, the branch on
    which the antilinear involution carries uniform signs. Pass
    ``theta=arg(z*) + k*pi`` for the alternating branch.
    """

    z_star: complex
    theta: float | None = None
    cutoff: int = 64
    margin: int = 8

    def __post_init__(self):
        z = complex(self.z_star)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise ValueError("z* must be finite")
        object.__setattr__(self, "z_star", z)
        if not isinstance(self.cutoff, (int, np.integer)) or self.cutoff < 8:
            raise ValueError(f"cutoff must be an integer >= 8, got {self.cutoff!r}")
        if self.cutoff > MAX_DIM:
            raise ValueError(f"cutoff {self.cutoff} exceeds the dense contract ({MAX_DIM})")
        if not isinstance(self.margin, (int, np.integer)) or self.margin < 2:
            raise ValueError(f"margin must be an integer >= 2, got {self.margin!r}")
        if self.margin >= self.cutoff / 2:
            raise ValueError("margin must be smaller than cutoff/2")
        if self.theta is None:
            object.__setattr__(self, "theta", self.lam + math.pi / 2)
        else:
            object.__setattr__(self, "theta", float(self.theta))

    @property
    def z(self) -> complex:
        return self.z_star.conjugate()

    @property
    def rho(self) -> float:
        return abs(self.z_star)

    @property
    def lam(self) -> float:
        """Phase of z* in (-pi, pi]; zero shift uses the convention lam = 0."""
        if self.z_star == 0:
            return 0.0
        return math.atan2(self.z_star.imag, self.z_star.real)

    @property
    def z_abs2(self) -> float:
        return abs(self.z_star) ** 2

    @property
    def interior_dim(self) -> int:
        return self.cutoff - self.margin

    @property
    def branch(self) -> str:
        """Which involution branch the phase sits on; raises off-branch."""
        delta = (self.theta - self.lam) / math.pi
        half_steps = round(2 * delta)
        if abs(self.theta - self.lam - half_steps * math.pi / 2) > _BRANCH_TOL:
            raise BranchError(
                f"theta - arg(z*) = {self.theta - self.lam:.6g} is not a multiple of pi/2; "
                "admissible families are theta = arg(z*) + k*pi and "
                "theta = arg(z*) + (k + 1/2)*pi"
            )
        return INTEGER_PI if half_steps % 2 == 0 else HALF_INTEGER_PI


def ladder_ops(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Truncated ladder and quadrature matrices ``(a, a_dag, x, p)``.

    <m|a|n> = sqrt(n) delta_{m,n-1}; x = (a + a+)/sqrt(2);
    p = -i (a - a+)/sqrt(2).
    """
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {n!r}")
    a = np.diag(np.sqrt(np.arange(1, n)), k=1).astype(complex)
    a_dag = a.conj().T
    x = (a + a_dag) / math.sqrt(2)
    p = -1j * (a - a_dag) / math.sqrt(2)
    return a, a_dag, x, p


@dataclass(frozen=True)
class OperatorSet:
    """Every operator of the model in the storage basis.

    ``h_xp`` is the same Hamiltonian assembled from the displaced quadratures
    (p - i z* I)^2/2 + (x - z* I)^2/2; it differs from ``h`` only in the
    cutoff corner, and ``h_xp_interior_residual`` records by how much.
    """

    a: np.ndarray
    a_dag: np.ndarray
    x: np.ndarray
    p: np.ndarray
    b: np.ndarray
    b_sharp: np.ndarray
    h: np.ndarray
    h_dag: np.ndarray
    big_x: np.ndarray
    big_p: np.ndarray
    h_xp: np.ndarray
    h_xp_interior_residual: float

    def __post_init__(self):
        for name in ("a", "a_dag", "x", "p", "b", "b_sharp", "h", "h_dag",
                     "big_x", "big_p", "h_xp"):
            getattr(self, name).flags.writeable = False

    @property
    def dim(self) -> int:
        return self.h.shape[0]


def build_operators(params: ModelParams) -> OperatorSet:
    """Construct the full operator set for the given configuration."""
    n = params.cutoff
    a, a_dag, x, p = ladder_ops(n)
    eye = np.eye(n, dtype=complex)

    w_bar = params.z_star * math.sqrt(2)
    phase = np.exp(1j * params.theta)

    # (a+ - w I) a + 1/2 assembled with the number operator written exactly,
    # so the diagonal is n + 1/2 to the last bit
    h = np.diag(np.arange(n) + 0.5).astype(complex) - w_bar * a
    b = a * phase
    b_sharp = (a_dag - w_bar * eye) / phase

    big_x = (b + b_sharp) / math.sqrt(2)
    big_p = -1j * (b - b_sharp) / math.sqrt(2)

    p_shift = p - 1j * params.z_star * eye
    x_shift = x - params.z_star * eye
    h_xp = 0.5 * (p_shift @ p_shift + x_shift @ x_shift)
    resid = rel_residual(interior(h, 2), interior(h_xp, 2))

    return OperatorSet(a=a, a_dag=a_dag, x=x, p=p, b=b, b_sharp=b_sharp,
                       h=h, h_dag=h.conj().T.copy(), big_x=big_x, big_p=big_p,
                       h_xp=h_xp, h_xp_interior_residual=resid)


def _b_basis_raw(z_star: complex, theta: float, dim: int) -> np.ndarray:
    basis = np.zeros((dim, dim), dtype=complex)
    w_bar = z_star * math.sqrt(2)
    for n in range(dim):
        coef = np.exp(-1j * n * theta)
        basis[n, n] = coef
        for l in range(n):
            # ratio of successive l-terms of the displaced binomial sum
            coef *= -w_bar * math.sqrt(n - l) / (l + 1)
            basis[n - l - 1, n] = coef
    return basis


def b_basis(params: ModelParams) -> np.ndarray:
    """Eigenbasis of H as columns in the storage basis.

    Column n is the n-fold b#-raise of the common vacuum. It lives on number
    levels <= n (upper triangular matrix) with coefficients

        e^{-i n theta} sqrt(C(n, l)) (-z* sqrt(2))^l / sqrt(l!)

    on level n - l, built by a multiplicative recurrence so that no factorial
    is ever formed explicitly.
    """
    return _b_basis_raw(params.z_star, params.theta, params.cutoff)


def _dual_columns_raw(z_star: complex, theta: float, dim: int) -> np.ndarray:
    duals = np.zeros((dim, dim), dtype=complex)
    w = z_star.conjugate() * math.sqrt(2)
    for n in range(dim):
        coef = np.exp(-1j * n * theta)
        duals[n, n] = coef
        for i in range(n, dim - 1):
            coef *= w * math.sqrt(i + 1) / (i + 1 - n)
            duals[i + 1, n] = coef
    return duals


def dual_basis(basis: np.ndarray, h_dag: np.ndarray | None = None) -> np.ndarray:
    """Biorthonormal dual columns: duals+ @ basis = I, i.e. (basis+)^{-1}.

    The basis factors as exp(-z* sqrt2 a) diag(e^{-i n theta}), so its inverse
    adjoint has the entrywise closed form exp(z sqrt2 a+) diag(e^{-i n theta});
    the triangular system is solved in that factored form, which keeps every
    entry accurate to relative rounding error (a dense back-substitution
    would lose ~e^{2|z| sqrt(2N)} of that). The result is lower triangular
    (dual n occupies levels >= n). When ``h_dag`` is supplied, each column is
    sanity-checked to be an eigenvector of it.
    """
    basis = np.asarray(basis, dtype=complex)
    n = basis.shape[0]
    diag = np.diagonal(basis)
    if np.any(np.abs(diag) < 1.0e-300):
        raise ValueError("basis is singular; cannot form the biorthonormal duals")
    # recover theta and the shift from the first two columns
    theta = float(-np.angle(diag[1] / diag[0])) if n > 1 else 0.0
    z_star = complex(-basis[0, 1] / diag[1] / math.sqrt(2)) if n > 1 else 0.0
    duals = _dual_columns_raw(z_star, theta, n)
    # backward-style validation on the lowest levels: deviations are judged
    # against the column scales, because the raw product carries rounding
    # noise of order e^{2|z| sqrt(2N)} eps near the envelope edge
    k = min(n, 8)
    gram_low = duals[:, :k].conj().T @ basis[:, :k]
    scale = np.outer(np.linalg.norm(duals[:, :k], axis=0),
                     np.linalg.norm(basis[:, :k], axis=0))
    dev = np.abs(gram_low - np.eye(k)) / scale
    if not np.all(np.isfinite(dev)) or dev.max() > 1.0e-10:
        raise ValueError("basis does not have the displaced-exponential form")
    if h_dag is not None:
        energies = np.arange(n) + 0.5
        resid = rel_residual(h_dag @ duals, duals * energies)
        if resid > 1.0e-6:
            raise ValueError(f"dual columns fail the H+ eigenvector check ({resid:.3e})")
    return duals


@dataclass(frozen=True)
class BiorthogonalSystem:
    """Eigenbasis columns, biorthonormal dual columns, and the ladder spectrum."""

    basis: np.ndarray
    duals: np.ndarray
    energies: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.energies is None:
            object.__setattr__(self, "energies", np.arange(self.basis.shape[0]) + 0.5)
        self.basis.flags.writeable = False
        self.duals.flags.writeable = False
        self.energies.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.basis.shape[0]


def build_system(params: ModelParams, ops: OperatorSet | None = None) -> BiorthogonalSystem:
    """Assemble the eigenbasis/dual pair for the configuration."""
    if ops is None:
        ops = build_operators(params)
    basis = b_basis(params)
    duals = dual_basis(basis, ops.h_dag)
    return BiorthogonalSystem(basis=basis, duals=duals)


def overlap_formula(m: int, n: int, params: ModelParams) -> complex:
    """Closed-form inner product of eigenbasis columns m and n.

    Evaluates

        e^{i(m-n) theta} (-sqrt(2))^{m+n} / sqrt(m! n!)
          * sum_k C(m, k) P(n, k) z^{m-k} (z*)^{n-k} / 2^k

    with C the binomial and P the falling factorial. Terms are accumulated in
    log magnitude (all share one phase), which keeps the sum stable for any
    m, n within the dense contract. At z = 0 only a k = m = n term survives,
    giving the Kronecker delta.
    """
    if not (0 <= m < params.cutoff and 0 <= n < params.cutoff):
        raise ValueError(f"indices ({m}, {n}) outside the cutoff {params.cutoff}")
    z = params.z
    z_star = params.z_star
    if z == 0:
        return 1.0 + 0.0j if m == n else 0.0 + 0.0j

    # common phase: e^{i(m-n)theta} (-1)^{m+n} e^{i[(m-k) arg z - (n-k) arg z]}
    # is k-independent because arg z* = -arg z.
    arg_z = math.atan2(z.imag, z.real)
    phase = (m - n) * params.theta + (m + n) * math.pi + (m - n) * arg_z
    log_abs_z = math.log(abs(z))

    base = (0.5 * (m + n) * math.log(2.0)
            - 0.5 * (math.lgamma(m + 1) + math.lgamma(n + 1)))
    logs = []
    for k in range(min(m, n) + 1):
        log_binom = math.lgamma(m + 1) - math.lgamma(k + 1) - math.lgamma(m - k + 1)
        log_perm = math.lgamma(n + 1) - math.lgamma(n - k + 1)
        logs.append(base + log_binom + log_perm - k * math.log(2.0)
                    + (m + n - 2 * k) * log_abs_z)
    logs = np.asarray(logs)
    peak = logs.max()
    total = math.exp(peak) * np.exp(logs - peak).sum()
    return total * np.exp(1j * phase)


def spectrum_crosscheck(ops: OperatorSet, margin: int) -> float:
    """Max deviation of general-eigensolver eigenvalues from n + 1/2, interior levels."""
    values = np.sort_complex(np.linalg.eigvals(ops.h))
    expected = np.arange(ops.dim) + 0.5
    keep = ops.dim - margin
    return float(np.abs(values[:keep] - expected[:keep]).max())
