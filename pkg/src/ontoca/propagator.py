"""Closed-form and polynomial propagators for the second-order update rule.

Two routes to psi[n] are provided and cross-checked:

  * a spectral closed form built on the auxiliary angle phi with
    2 sin(phi) = lambda per eigenvalue (floating point, singular where
    some |lambda| = 2), and
  * an exact three-term family of Gaussian-integer transfer matrices
    T(k+1) = T(k-1) - i H T(k) with T(0) = 1, T(1) = 0, which composes
    trajectories as psi[n] = T(n-m+1) psi[m+1] + T(n-m) psi[m].

The transfer recursion is the authoritative propagator; the closed form is a
numeric cross-check and the bridge to the continuum exponential.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import CriticalSpectrum, DimensionMismatch
from .gaussian import GaussianInt, GaussianIntVector, HamiltonianModel
from .numerics import max_abs

CRITICAL_TOL = 1e-12
SPECTRAL_RECON_TOL = 1e-10


@dataclass(frozen=True)
class DiscretenessScale:
    """Fundamental step size of the lattice; pure bookkeeping unit."""

    l: float

    def __post_init__(self):
        if not self.l > 0:
            raise ValueError(f"scale must be positive, got {self.l}")


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: tuple[float, ...]
    eigenvectors: np.ndarray  # orthonormal columns
    phi_eigenvalues: tuple[complex, ...]
    classifications: tuple[str, ...]  # subcritical | critical | supercritical
    reconstruction_error: float

    def has_critical(self) -> bool:
        return "critical" in self.classifications

    def is_subcritical(self) -> bool:
        return all(c == "subcritical" for c in self.classifications)


def phi_operator(model: HamiltonianModel) -> SpectralDecomposition:
    """Diagonalize H and attach the auxiliary angles phi with 2 sin(phi) = lambda."""
    h = model.as_complex_array()
    evals, vecs = np.linalg.eigh(h)
    recon = (vecs * evals) @ vecs.conj().T
    scale = max(1.0, max_abs(h))
    err = max_abs(recon - h)
    if err > SPECTRAL_RECON_TOL * scale:
        raise ArithmeticError(f"eigendecomposition reconstruction error {err:g}")
    phis = []
    kinds = []
    for lam in evals:
        if abs(abs(lam) - 2.0) <= CRITICAL_TOL:
            kinds.append("critical")
        elif abs(lam) < 2.0:
            kinds.append("subcritical")
        else:
            kinds.append("supercritical")
        phis.append(cmath.asin(complex(lam) / 2.0))
    return SpectralDecomposition(
        eigenvalues=tuple(float(x) for x in evals),
        eigenvectors=vecs,
        phi_eigenvalues=tuple(phis),
        classifications=tuple(kinds),
        reconstruction_error=err,
    )


def closed_form_state(model: HamiltonianModel, psi0, psi1, n: int) -> np.ndarray:
    """Evaluate the two-branch closed form of the trajectory at index n.

    psi[n] = 1/(2 cos phi) * ( e^{-i n phi} [e^{i phi} psi0 + psi1]
                               + (-1)^n e^{i n phi} [e^{-i phi} psi0 - psi1] )

    applied per eigenmode.  Raises CriticalSpectrum when some |lambda| = 2,
    where the prefactor diverges; use the transfer polynomials there.
    """
    dec = phi_operator(model)
    if dec.has_critical():
        raise CriticalSpectrum(
            f"eigenvalues {dec.eigenvalues} contain |lambda| = 2; closed form is singular"
        )
    a0 = dec.eigenvectors.conj().T @ _as_complex_vec(psi0, model.dim)
    a1 = dec.eigenvectors.conj().T @ _as_complex_vec(psi1, model.dim)
    sign = 1 if n % 2 == 0 else -1
    coeffs = np.empty(model.dim, dtype=complex)
    for k, phi in enumerate(dec.phi_eigenvalues):
        pref = 1.0 / (2.0 * cmath.cos(phi))
        fwd = cmath.exp(-1j * n * phi) * (cmath.exp(1j * phi) * a0[k] + a1[k])
        alt = sign * cmath.exp(1j * n * phi) * (cmath.exp(-1j * phi) * a0[k] - a1[k])
        coeffs[k] = pref * (fwd + alt)
    return dec.eigenvectors @ coeffs


# =============================================================================
# Exact transfer polynomials
# =============================================================================


@dataclass(frozen=True)
class TransferPolynomial:
    order: int
    matrix: tuple[tuple[GaussianInt, ...], ...]

    def apply(self, v: GaussianIntVector) -> GaussianIntVector:
        dim = len(self.matrix)
        if len(v) != dim:
            raise DimensionMismatch(f"vector length {len(v)} vs matrix dim {dim}")
        return GaussianIntVector(
            sum((self.matrix[a][b] * v[b] for b in range(dim)), GaussianInt(0, 0))
            for a in range(dim)
        )

    def plus(self, other: "TransferPolynomial") -> tuple[tuple[GaussianInt, ...], ...]:
        return tuple(
            tuple(x + y for x, y in zip(ra, rb))
            for ra, rb in zip(self.matrix, other.matrix)
        )


def _gi_identity(dim):
    return tuple(
        tuple(GaussianInt(1 if a == b else 0, 0) for b in range(dim)) for a in range(dim)
    )


def _gi_zero(dim):
    return tuple(tuple(GaussianInt(0, 0) for _ in range(dim)) for _ in range(dim))


def _neg_i_h_times(h, m):
    # -i H @ M, exact
    dim = len(h)
    out = []
    for a in range(dim):
        row = []
        for b in range(dim):
            acc = GaussianInt(0, 0)
            for c in range(dim):
                acc = acc + h[a][c] * m[c][b]
            row.append(acc.times_minus_i())
        out.append(tuple(row))
    return tuple(out)


def _gi_add(m1, m2):
    return tuple(
        tuple(x + y for x, y in zip(r1, r2)) for r1, r2 in zip(m1, m2)
    )


def transfer_sequence(model: HamiltonianModel, k_max: int) -> list[TransferPolynomial]:
    """T(0) .. T(k_max) via the exact three-term recursion T(k+1) = T(k-1) - iH T(k)."""
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    h = model.h_matrix
    mats = [_gi_identity(model.dim)]
    if k_max >= 1:
        mats.append(_gi_zero(model.dim))
    while len(mats) <= k_max:
        mats.append(_gi_add(mats[-2], _neg_i_h_times(h, mats[-1])))
    return [TransferPolynomial(order=k, matrix=m) for k, m in enumerate(mats)]


def transfer_polynomial(model: HamiltonianModel, k: int) -> TransferPolynomial:
    return transfer_sequence(model, k)[k]


def equal_initial_form(model: HamiltonianModel, psi0: GaussianIntVector, n: int) -> GaussianIntVector:
    """[T(n+1) + T(n)] psi0, the exact trajectory when psi1 is chosen equal to psi0."""
    if n < 0:
        raise ValueError("n must be >= 0")
    seq = transfer_sequence(model, n + 1)
    summed = TransferPolynomial(order=n, matrix=seq[n + 1].plus(seq[n]))
    return summed.apply(GaussianIntVector(psi0))


# =============================================================================
# Dispersion and continuum limit
# =============================================================================


def dispersion_omega(lam: float) -> complex:
    """Frequency omega with 2 sin(omega) = lambda, principal branch.

    Real for |lambda| <= 2; complex (growing mode) beyond.
    """
    return cmath.asin(complex(lam) / 2.0)


def _as_complex_vec(v, dim) -> np.ndarray:
    if isinstance(v, GaussianIntVector):
        arr = np.array(v.as_complex())
    else:
        arr = np.asarray(v, dtype=complex)
    if arr.shape != (dim,):
        raise DimensionMismatch(f"vector shape {arr.shape} vs dim {dim}")
    return arr


def _iterate_float(h: np.ndarray, psi_prev: np.ndarray, psi_curr: np.ndarray, steps: int):
    states = [psi_prev, psi_curr]
    for _ in range(steps):
        psi_prev, psi_curr = psi_curr, psi_prev - 1j * (h @ psi_curr)
        states.append(psi_curr)
    return states


def continuum_deviation(model: HamiltonianModel, psi0, epsilon: float, n_max: int) -> float:
    """Max deviation between the scaled recurrence and its continuum exponential.

    Runs the recurrence for H' = epsilon * H starting from psi1 = psi0 and
    compares each state against exp(-i H' n / 2) psi0.  The comparison is
    floating point; the recurrence itself introduces no additional error
    beyond roundoff.
    """
    dec = phi_operator(model)
    if dec.has_critical():
        raise CriticalSpectrum("rescale the model away from |lambda| = 2 first")
    h = epsilon * model.as_complex_array()
    psi0 = _as_complex_vec(psi0, model.dim)
    states = _iterate_float(h, psi0.copy(), psi0.copy(), n_max)
    worst = 0.0
    evals, vecs = np.linalg.eigh(h)
    coeff0 = vecs.conj().T @ psi0
    for n, state in enumerate(states):
        expected = vecs @ (np.exp(-1j * evals * n / 2.0) * coeff0)
        worst = max(worst, max_abs(state - expected))
    return worst


def continuum_limit_check(
    model: HamiltonianModel,
    psi0,
    epsilons: tuple[float, ...],
    scale_product: float,
) -> list[tuple[float, int, float]]:
    """Deviation sweep at fixed n * epsilon = scale_product.

    Returns (epsilon, n, deviation) rows, largest epsilon first.  First-order
    convergence shows as roughly halving deviations when epsilon halves.
    """
    rows = []
    for eps in sorted(epsilons, reverse=True):
        n = max(1, round(scale_product / eps))
        rows.append((eps, n, continuum_deviation(model, psi0, eps, n)))
    return rows
