"""Discrete position and momentum operators and uncertainty-relation reports.

On M lattice sites (labels m = -M/2 .. M/2 - 1, step l) the operators are

    X[m][n] = l * m * delta[m,n]
    P[m][n] = -i (delta[m,n-1] - delta[m,n+1]) / (2 l),

wrapped periodically by default.  Robertson's inequality
DeltaA * DeltaB >= |<[A,B]>| / 2 is the universal invariant enforced here:
it is a theorem for any state and self-adjoint pair.  The deformed bound

    DeltaX * DeltaP >= 1/2 |1 + (l^2 / 2) <P^2>|

is evaluated and reported but never asserted: sharply localized lattice
states violate it outright (DeltaX = 0 against a positive right-hand side)
and even centered Gaussian envelopes sit slightly below it, so which state
family it governs is an empirical question the reports answer per family.
Its closed-form minimum over DeltaP at <P> = 0 is l / sqrt(2), which is
computed exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, FamilyTooNarrow, NotSelfAdjoint
from .numerics import hermiticity_defect
from .propagator import DiscretenessScale

SELF_ADJOINT_TOL = 1e-12


# =============================================================================
# Operators and states
# =============================================================================


@dataclass(frozen=True)
class LatticeOperator:
    size: int
    scale: DiscretenessScale
    matrix: np.ndarray
    boundary: str
    name: str = ""

    def __post_init__(self):
        if self.boundary not in ("periodic", "open"):
            raise ValueError(f"boundary must be 'periodic' or 'open', got {self.boundary!r}")


def site_labels(size: int) -> np.ndarray:
    """Integer site labels, symmetric around zero."""
    return np.arange(-(size // 2), size - size // 2)


def position_operator(size: int, scale: DiscretenessScale, boundary: str = "periodic") -> LatticeOperator:
    matrix = np.diag(scale.l * site_labels(size)).astype(complex)
    return LatticeOperator(size=size, scale=scale, matrix=matrix, boundary=boundary, name="X")


def momentum_operator(size: int, scale: DiscretenessScale, boundary: str = "periodic") -> LatticeOperator:
    matrix = np.zeros((size, size), dtype=complex)
    coeff = 1.0 / (2.0 * scale.l)
    for m in range(size):
        if m + 1 < size or boundary == "periodic":
            matrix[m, (m + 1) % size] += -1j * coeff
        if m - 1 >= 0 or boundary == "periodic":
            matrix[m, (m - 1) % size] += 1j * coeff
    return LatticeOperator(size=size, scale=scale, matrix=matrix, boundary=boundary, name="P")


@dataclass(frozen=True)
class LatticeState:
    """Unit-norm complex amplitudes over the lattice sites."""

    amplitudes: np.ndarray

    def __post_init__(self):
        norm = float(np.linalg.norm(self.amplitudes))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state norm is {norm}, expected 1")

    @classmethod
    def from_amplitudes(cls, amplitudes) -> "LatticeState":
        arr = np.asarray(amplitudes, dtype=complex)
        norm = float(np.linalg.norm(arr))
        if norm == 0.0:
            raise ValueError("cannot normalize the zero state")
        return cls(amplitudes=arr / norm)

    @property
    def size(self) -> int:
        return len(self.amplitudes)


def gaussian_envelope(
    size: int, width: float, center: float = 0.0, carrier: float = 0.0
) -> LatticeState:
    """Normalized Gaussian envelope of the given width in sites, optional
    plane-wave carrier (radians per site)."""
    if width <= 0:
        raise ValueError("width must be positive")
    m = site_labels(size)
    env = np.exp(-((m - center) ** 2) / (4.0 * width**2))
    return LatticeState.from_amplitudes(env * np.exp(1j * carrier * m))


def single_site_state(size: int, site: int) -> LatticeState:
    labels = list(site_labels(size))
    amp = np.zeros(size, dtype=complex)
    amp[labels.index(site)] = 1.0
    return LatticeState(amplitudes=amp)


def random_states(size: int, count: int, seed: int) -> list[LatticeState]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        amp = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        out.append(LatticeState.from_amplitudes(amp))
    return out


# =============================================================================
# Uncertainties and bounds
# =============================================================================


def _check(state: LatticeState, op: LatticeOperator):
    if state.size != op.size:
        raise DimensionMismatch(f"state size {state.size} vs operator size {op.size}")
    defect = hermiticity_defect(op.matrix)
    if defect > SELF_ADJOINT_TOL:
        raise NotSelfAdjoint(f"operator {op.name or '?'} deviates from self-adjoint by {defect:g}")


def uncertainty(state: LatticeState, op: LatticeOperator) -> tuple[float, float]:
    """Expectation value and spread <op>, Delta op (clamped at zero roundoff)."""
    _check(state, op)
    psi = state.amplitudes
    applied = op.matrix @ psi
    mean = float(np.vdot(psi, applied).real)
    second = float(np.vdot(applied, applied).real)  # <op^2> since op is self-adjoint
    var = second - mean * mean
    if var < 0.0:
        if var < -1e-12:
            raise ArithmeticError(f"variance {var} below roundoff tolerance")
        var = 0.0
    return mean, math.sqrt(var)


@dataclass(frozen=True)
class RobertsonResult:
    lhs: float
    rhs: float
    holds: bool


def robertson_check(state: LatticeState, a: LatticeOperator, b: LatticeOperator) -> RobertsonResult:
    """DeltaA * DeltaB against |<[A,B]>| / 2, the exact commutator bound."""
    _check(state, a)
    _check(state, b)
    _, da = uncertainty(state, a)
    _, db = uncertainty(state, b)
    psi = state.amplitudes
    comm = a.matrix @ (b.matrix @ psi) - b.matrix @ (a.matrix @ psi)
    rhs = abs(complex(np.vdot(psi, comm))) / 2.0
    lhs = da * db
    return RobertsonResult(lhs=lhs, rhs=rhs, holds=lhs >= rhs - 1e-12)


@dataclass(frozen=True)
class GupBoundReport:
    lhs: float
    deformed_rhs: float
    robertson_rhs: float
    satisfies_deformed_bound: bool
    mean_p: float
    mean_p_squared: float


def gup_bound_report(
    state: LatticeState, scale: DiscretenessScale, boundary: str = "periodic"
) -> GupBoundReport:
    """Evaluate the deformed bound verbatim next to the exact Robertson bound.

    Both right-hand sides are reported; only Robertson is a theorem.
    """
    x = position_operator(state.size, scale, boundary)
    p = momentum_operator(state.size, scale, boundary)
    _, dx = uncertainty(state, x)
    mean_p, dp = uncertainty(state, p)
    psi = state.amplitudes
    p_psi = p.matrix @ psi
    p2 = float(np.vdot(p_psi, p_psi).real)
    deformed_rhs = 0.5 * abs(1.0 + (scale.l**2 / 2.0) * p2)
    robertson = robertson_check(state, x, p)
    lhs = dx * dp
    return GupBoundReport(
        lhs=lhs,
        deformed_rhs=deformed_rhs,
        robertson_rhs=robertson.rhs,
        satisfies_deformed_bound=lhs >= deformed_rhs - 1e-12,
        mean_p=mean_p,
        mean_p_squared=p2,
    )


# =============================================================================
# Minimal position spread
# =============================================================================


def bound_curve(delta_p: float, scale: DiscretenessScale) -> float:
    """Deformed lower bound on DeltaX as a function of DeltaP, at <P> = 0."""
    if delta_p <= 0:
        raise ValueError("delta_p must be positive")
    return 1.0 / (2.0 * delta_p) + (scale.l**2 / 4.0) * delta_p


def bound_minimum(scale: DiscretenessScale) -> tuple[float, float]:
    """Closed-form minimizer of the bound curve: DeltaP = sqrt(2)/l gives l/sqrt(2)."""
    argmin = math.sqrt(2.0) / scale.l
    return bound_curve(argmin, scale), argmin


@dataclass(frozen=True)
class FamilyMember:
    width: float
    delta_x: float
    delta_p: float
    lhs: float
    deformed_rhs: float
    robertson_rhs: float
    satisfies_deformed_bound: bool


@dataclass(frozen=True)
class MinimizeDeltaXReport:
    bound_min_dx: float
    bound_argmin_dp: float
    members: tuple[FamilyMember, ...]
    realized_min_dx: Optional[float]
    realized_min_width: Optional[float]
    best_tightness: float
    best_tightness_width: float


def minimize_delta_x(
    scale: DiscretenessScale,
    widths: Sequence[float],
    sites: int = 512,
    boundary: str = "periodic",
) -> MinimizeDeltaXReport:
    """Scan centered Gaussian envelopes (so <P> = 0 exactly) for minimal DeltaX.

    Reports the exact bound-derived minimum l/sqrt(2) alongside the scan.  The
    realized minimum counts only members that actually satisfy the deformed
    bound; when none do (the generic lattice outcome) it is None and the
    tightness ratio lhs / deformed_rhs documents how close the family comes.
    Raises FamilyTooNarrow when a realized minimum exists but sits on the
    width-grid boundary, where widening the family could improve it.
    """
    widths = sorted(float(w) for w in widths)
    if not widths:
        raise ValueError("need at least one width")
    if widths[-1] > sites / 8:
        raise ValueError(
            f"width {widths[-1]} too large for {sites} sites; boundary effects exceed 1%"
        )
    members = []
    for w in widths:
        state = gaussian_envelope(sites, w)
        x = position_operator(sites, scale, boundary)
        p = momentum_operator(sites, scale, boundary)
        _, dx = uncertainty(state, x)
        _, dp = uncertainty(state, p)
        report = gup_bound_report(state, scale, boundary)
        members.append(
            FamilyMember(
                width=w,
                delta_x=dx,
                delta_p=dp,
                lhs=report.lhs,
                deformed_rhs=report.deformed_rhs,
                robertson_rhs=report.robertson_rhs,
                satisfies_deformed_bound=report.satisfies_deformed_bound,
            )
        )
    bound_dx, bound_dp = bound_minimum(scale)
    satisfying = [m for m in members if m.satisfies_deformed_bound]
    realized_min_dx = None
    realized_min_width = None
    if satisfying:
        best = min(satisfying, key=lambda m: m.delta_x)
        realized_min_dx = best.delta_x
        realized_min_width = best.width
        if best.width in (widths[0], widths[-1]) and len(widths) > 1:
            raise FamilyTooNarrow(
                f"realized minimum sits at the width-grid boundary ({best.width}); "
                f"extend the family"
            )
    tightest = max(members, key=lambda m: m.lhs / m.deformed_rhs)
    return MinimizeDeltaXReport(
        bound_min_dx=bound_dx,
        bound_argmin_dp=bound_dp,
        members=tuple(members),
        realized_min_dx=realized_min_dx,
        realized_min_width=realized_min_width,
        best_tightness=tightest.lhs / tightest.deformed_rhs,
        best_tightness_width=tightest.width,
    )
