"""Bipartite multi-time propagation and its synchronized single-time forms.

Each subsystem carries its own integer time counter, so a bipartite wave
function lives on the (n1, n2) lattice and obeys

    (psi[n1+1,n2] - psi[n1-1,n2]) + (psi[n1,n2+1] - psi[n1,n2-1])
        = -i H psi[n1,n2],

with H acting on the flattened component index.  The equation can be read as
an updating rule in several inequivalent ways (line-by-line, along diagonals
from an extra seed point), and synchronization constraints reduce it to a
single-time second-order or first-order update.  All field arithmetic is
exact over Gaussian rationals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DomainTooSmall,
    GeometryMismatch,
    LengthTooShort,
    MissingExtraPoint,
    NotSelfAdjoint,
)
from .gaussian import GaussianIntVector, GaussianRational, HamiltonianModel, Trajectory

Point = tuple[int, int]

_SYNC_MODES = ("free", "diagonal_second_order", "diagonal_first_order")


@dataclass(frozen=True)
class SyncMode:
    mode: str
    offsets: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if self.mode not in _SYNC_MODES:
            raise ValueError(f"mode must be one of {_SYNC_MODES}, got {self.mode!r}")
        if self.mode != "diagonal_first_order" and self.offsets != (0, 0):
            raise ValueError("offsets are only meaningful in first-order mode")


# =============================================================================
# Exact vectors and tensor Hamiltonians
# =============================================================================


def as_exact_vector(values, length: int) -> tuple[GaussianRational, ...]:
    if isinstance(values, GaussianIntVector):
        values = values.components
    vec = tuple(GaussianRational._coerce(v) for v in values)
    if len(vec) != length:
        raise DimensionMismatch(f"vector length {len(vec)} vs expected {length}")
    return vec


def _exact_matvec(matrix, vec):
    return tuple(
        sum((m * v for m, v in zip(row, vec)), GaussianRational(0))
        for row in matrix
    )


def _exact_kron(a, b):
    return tuple(
        tuple(x * y for x in ra for y in rb)
        for ra in a
        for rb in b
    )


def _exact_identity(dim):
    one = GaussianRational(1)
    zero = GaussianRational(0)
    return tuple(
        tuple(one if r == c else zero for c in range(dim)) for r in range(dim)
    )


def _coerce_square(matrix) -> tuple[tuple[GaussianRational, ...], ...]:
    if isinstance(matrix, HamiltonianModel):
        matrix = matrix.h_matrix
    rows = tuple(tuple(GaussianRational._coerce(x) for x in row) for row in matrix)
    if not rows or any(len(row) != len(rows) for row in rows):
        raise DimensionMismatch("expected a nonempty square matrix")
    return rows


@dataclass(frozen=True)
class TensorHamiltonian:
    """Self-adjoint coupling on the flattened multi-component index.

    The flattening is row-major: component (a1, a2, ...) maps to
    a1 * d2 * d3 * ... + a2 * d3 * ... + ...  (first factor most significant).
    """

    dims: tuple[int, ...]
    matrix: tuple[tuple[GaussianRational, ...], ...]
    kind: str = "general"

    def __post_init__(self):
        total = 1
        for d in self.dims:
            if d < 1:
                raise ValueError(f"factor dimensions must be positive, got {self.dims}")
            total *= d
        if len(self.matrix) != total:
            raise DimensionMismatch(
                f"matrix is {len(self.matrix)}x{len(self.matrix)} but dims {self.dims} need {total}"
            )
        for r in range(total):
            for c in range(r, total):
                if self.matrix[r][c] != self.matrix[c][r].conjugate():
                    raise NotSelfAdjoint(f"entries ({r},{c}) and ({c},{r}) are not conjugate")

    @property
    def total_dim(self) -> int:
        return len(self.matrix)

    @classmethod
    def general(cls, matrix, dims: Sequence[int]) -> "TensorHamiltonian":
        return cls(dims=tuple(int(d) for d in dims), matrix=_coerce_square(matrix), kind="general")

    @classmethod
    def separable(cls, *factors) -> "TensorHamiltonian":
        """Sum of single-factor couplings: H1 x 1 x ... + 1 x H2 x ... + ..."""
        if len(factors) < 2:
            raise ValueError("separable coupling needs at least two factors")
        mats = [_coerce_square(f) for f in factors]
        dims = tuple(len(m) for m in mats)
        total = 1
        for d in dims:
            total *= d
        zero = GaussianRational(0)
        acc = [[zero for _ in range(total)] for _ in range(total)]
        for i, m in enumerate(mats):
            term = _exact_identity(1)
            for j, d in enumerate(dims):
                term = _exact_kron(term, m if j == i else _exact_identity(d))
            for r in range(total):
                for c in range(total):
                    acc[r][c] = acc[r][c] + term[r][c]
        return cls(dims=dims, matrix=tuple(tuple(row) for row in acc), kind="separable")

    def apply(self, vec) -> tuple[GaussianRational, ...]:
        return _exact_matvec(self.matrix, as_exact_vector(vec, self.total_dim))

    def apply_minus_i(self, vec) -> tuple[GaussianRational, ...]:
        return tuple(-c.times_i() for c in self.apply(vec))

    def as_complex_array(self) -> np.ndarray:
        return np.array([[complex(x) for x in row] for row in self.matrix])


# =============================================================================
# Multi-time fields
# =============================================================================


@dataclass(frozen=True)
class MultiTimeField:
    """Values of the bipartite wave function on a finite set of (n1, n2) points."""

    dims: tuple[int, int]
    values: Mapping[Point, tuple[GaussianRational, ...]] = field(default_factory=dict)

    def __post_init__(self):
        d1, d2 = self.dims
        length = d1 * d2
        clean = {}
        for point, vec in dict(self.values).items():
            n1, n2 = point
            clean[(int(n1), int(n2))] = as_exact_vector(vec, length)
        object.__setattr__(self, "values", clean)

    @property
    def component_length(self) -> int:
        return self.dims[0] * self.dims[1]

    def points(self) -> list[Point]:
        return sorted(self.values)

    def get(self, point: Point) -> tuple[GaussianRational, ...]:
        return self.values[point]

    def __contains__(self, point: Point) -> bool:
        return tuple(point) in self.values

    def with_point(self, point: Point, vec) -> "MultiTimeField":
        merged = dict(self.values)
        merged[tuple(point)] = vec
        return MultiTimeField(self.dims, merged)

    def union(self, other: "MultiTimeField") -> "MultiTimeField":
        if other.dims != self.dims:
            raise DimensionMismatch(f"field dims differ: {self.dims} vs {other.dims}")
        merged = dict(self.values)
        merged.update(other.values)
        return MultiTimeField(self.dims, merged)

    def restricted(self, points: Iterable[Point]) -> "MultiTimeField":
        return MultiTimeField(self.dims, {p: self.values[p] for p in points})


def product_field(
    traj1: Trajectory, traj2: Trajectory, n1_range=None, n2_range=None
) -> MultiTimeField:
    """Field psi[n1,n2] = phi1[n1] (x) phi2[n2] built from two single-system runs."""
    d1, d2 = traj1.model.dim, traj2.model.dim
    if n1_range is None:
        n1_range = range(traj1.start_index, traj1.start_index + len(traj1))
    if n2_range is None:
        n2_range = range(traj2.start_index, traj2.start_index + len(traj2))
    values = {}
    for n1 in n1_range:
        a = traj1.state_at(n1)
        for n2 in n2_range:
            b = traj2.state_at(n2)
            values[(n1, n2)] = tuple(
                GaussianRational._coerce(x) * GaussianRational._coerce(y)
                for x in a
                for y in b
            )
    return MultiTimeField((d1, d2), values)


def equation_residual(
    field_: MultiTimeField, h: TensorHamiltonian, point: Point
) -> tuple[GaussianRational, ...]:
    """Residual of the two-time equation at `point`; zero on solutions."""
    n1, n2 = point
    needed = [(n1 + 1, n2), (n1 - 1, n2), (n1, n2 + 1), (n1, n2 - 1), (n1, n2)]
    missing = [p for p in needed if p not in field_]
    if missing:
        raise GeometryMismatch(f"stencil at {point} missing points {missing}")
    forced = h.apply(field_.get((n1, n2)))
    return tuple(
        (field_.get((n1 + 1, n2))[k] - field_.get((n1 - 1, n2))[k])
        + (field_.get((n1, n2 + 1))[k] - field_.get((n1, n2 - 1))[k])
        + forced[k].times_i()
        for k in range(field_.component_length)
    )


def interior_points(field_: MultiTimeField) -> list[Point]:
    """Points whose full 5-point stencil lies inside the field."""
    pts = set(field_.values)
    return sorted(
        (n1, n2)
        for (n1, n2) in pts
        if {(n1 + 1, n2), (n1 - 1, n2), (n1, n2 + 1), (n1, n2 - 1)} <= pts
    )


# =============================================================================
# Line propagation
# =============================================================================


def _lines_by_coord(field_: MultiTimeField, axis_idx: int) -> dict[int, dict[int, tuple]]:
    lines: dict[int, dict[int, tuple]] = {}
    for (n1, n2), vec in field_.values.items():
        coord = (n1, n2)[axis_idx]
        other = (n1, n2)[1 - axis_idx]
        lines.setdefault(coord, {})[other] = vec
    return lines

def _extent(line: dict[int, tuple]) -> tuple[int, int]:
    lo, hi = min(line), max(line)
    if set(line) != set(range(lo, hi + 1)):
        raise GeometryMismatch("line has gaps; expected a contiguous extent")
    return lo, hi


def propagate_line(
    field_: MultiTimeField,
    h: TensorHamiltonian,
    axis: str = "n1",
    direction: int = 1,
    periodic: bool = False,
) -> MultiTimeField:
    """Advance two adjacent full lines perpendicular to `axis` by one step.

    Solving the two-time equation for the forward point gives, for axis n1,

        psi[n1+1,n2] = psi[n1-1,n2] - psi[n1,n2+1] + psi[n1,n2-1]
                       - i H psi[n1,n2],

    so the new line loses one point at each end (the causal domain shrinks);
    no boundary values are invented.  With periodic=True the transverse
    coordinate wraps instead and the line length is preserved.  Returns the
    two newest lines, ready for the next step.
    """
    if axis not in ("n1", "n2"):
        raise ValueError(f"axis must be 'n1' or 'n2', got {axis!r}")
    if direction not in (1, -1):
        raise ValueError(f"direction must be +1 or -1, got {direction}")
    axis_idx = 0 if axis == "n1" else 1
    if h.total_dim != field_.component_length:
        raise DimensionMismatch(
            f"coupling dim {h.total_dim} vs field components {field_.component_length}"
        )

    lines = _lines_by_coord(field_, axis_idx)
    if len(lines) != 2:
        raise GeometryMismatch(f"expected exactly 2 lines, found {sorted(lines)}")
    lo_coord, hi_coord = sorted(lines)
    if hi_coord - lo_coord != 1:
        raise GeometryMismatch(f"lines {lo_coord} and {hi_coord} are not adjacent")

    if direction == 1:
        center_coord, rear_coord = hi_coord, lo_coord
    else:
        center_coord, rear_coord = lo_coord, hi_coord
    center, rear = lines[center_coord], lines[rear_coord]
    _extent(center)
    _extent(rear)
    new_coord = center_coord + direction

    if periodic:
        c_lo, c_hi = _extent(center)
        if _extent(rear) != (c_lo, c_hi):
            raise GeometryMismatch("periodic propagation needs lines of equal extent")
        span = c_hi - c_lo + 1
        targets = range(c_lo, c_hi + 1)

        def across(o, delta):
            return c_lo + (o - c_lo + delta) % span
    else:
        targets = [
            o for o in center
            if o + 1 in center and o - 1 in center and o in rear
        ]

        def across(o, delta):
            return o + delta

    new_line = {}
    for o in targets:
        # direction +1 solves for the forward point, -1 for the rear point;
        # the transverse difference and the forcing term flip sign with it
        forced = h.apply(center[o])
        rear_vec = rear[across(o, 0) if periodic else o]
        up = center[across(o, 1)]
        down = center[across(o, -1)]
        if direction == 1:
            new_line[o] = tuple(
                rear_vec[k] - up[k] + down[k] - forced[k].times_i()
                for k in range(h.total_dim)
            )
        else:
            new_line[o] = tuple(
                rear_vec[k] + up[k] - down[k] + forced[k].times_i()
                for k in range(h.total_dim)
            )
    if not new_line:
        raise DomainTooSmall(
            f"no point on line {new_coord} has a complete stencil; "
            f"need a center line of length >= 3"
        )

    def as_point(coord, other):
        return (coord, other) if axis_idx == 0 else (other, coord)

    values = {as_point(center_coord, o): vec for o, vec in center.items()}
    values.update({as_point(new_coord, o): vec for o, vec in new_line.items()})
    return MultiTimeField(field_.dims, values)


# =============================================================================
# Diagonal propagation
# =============================================================================


def propagate_diagonal(
    field_: MultiTimeField,
    h: TensorHamiltonian,
    extra_point: Optional[Point],
    extra_value,
) -> MultiTimeField:
    """Determine the next anti-diagonal from two full ones plus one seed point.

    With data on the anti-diagonals n1 + n2 = s - 1 and s, the two-time
    equation at a center (n1, n2) on diagonal s chains the two adjacent
    unknowns on diagonal s + 1:

        psi[n1+1,n2] + psi[n1,n2+1] = psi[n1-1,n2] + psi[n1,n2-1]
                                      - i H psi[n1,n2].

    Starting from the seed value, the new diagonal is filled outward in both
    directions as far as complete centers exist.  Different seed values give
    different (equally valid) continuations; the updating rule is not unique.
    Returns diagonal s plus the determined points on s + 1.
    """
    if h.total_dim != field_.component_length:
        raise DimensionMismatch(
            f"coupling dim {h.total_dim} vs field components {field_.component_length}"
        )
    diagonals: dict[int, dict[int, tuple]] = {}
    for (n1, n2), vec in field_.values.items():
        diagonals.setdefault(n1 + n2, {})[n1] = vec
    if len(diagonals) != 2:
        raise GeometryMismatch(
            f"expected exactly 2 anti-diagonals, found n1+n2 in {sorted(diagonals)}"
        )
    s_lo, s_hi = sorted(diagonals)
    if s_hi - s_lo != 1:
        raise GeometryMismatch(f"diagonals {s_lo} and {s_hi} are not adjacent")
    lower, upper = diagonals[s_lo], diagonals[s_hi]
    _extent(lower)
    _extent(upper)

    if extra_point is None:
        raise MissingExtraPoint("a seed point on the next diagonal is required")
    e1, e2 = extra_point
    if e1 + e2 != s_hi + 1:
        raise MissingExtraPoint(
            f"seed point {extra_point} is not on diagonal n1+n2 = {s_hi + 1}"
        )

    new_diag: dict[int, tuple] = {e1: as_exact_vector(extra_value, h.total_dim)}

    def center_rhs(c1: int, c2: int):
        # complete center on diagonal s_hi with both lower neighbours present
        if c1 not in upper or (c1 - 1) not in lower or c1 not in lower:
            return None
        forced = h.apply(upper[c1])
        below_left = lower[c1 - 1]   # (c1-1, c2)
        below_down = lower[c1]       # (c1, c2-1)
        return tuple(
            below_left[k] + below_down[k] - forced[k].times_i()
            for k in range(h.total_dim)
        )

    # walk toward decreasing n1 on the new diagonal: unknown (a-1, b+1) via center (a-1, b)
    a = e1
    while True:
        rhs = center_rhs(a - 1, s_hi - (a - 1))
        if rhs is None:
            break
        known = new_diag[a]
        new_diag[a - 1] = tuple(r - k for r, k in zip(rhs, known))
        a -= 1
    # walk toward increasing n1: unknown (a+1, b-1) via center (a, b-1)
    a = e1
    while True:
        rhs = center_rhs(a, s_hi - a)
        if rhs is None or (a + 1) in new_diag:
            break
        known = new_diag[a]
        new_diag[a + 1] = tuple(r - k for r, k in zip(rhs, known))
        a += 1

    values = {(n1, s_hi - n1): vec for n1, vec in upper.items()}
    values.update({(n1, s_hi + 1 - n1): vec for n1, vec in new_diag.items()})
    return MultiTimeField(field_.dims, values)


# =============================================================================
# Synchronized single-time updates
# =============================================================================


@dataclass(frozen=True)
class FirstOrderStencil:
    """The five lattice points tied together by the first-order constraint."""

    center: Point
    constraint_points: tuple[Point, Point, Point, Point]
    target: Point

    @property
    def constraint_parities(self) -> tuple[int, ...]:
        return tuple((p[0] + p[1]) % 2 for p in self.constraint_points)

    @property
    def target_parity(self) -> int:
        return (self.target[0] + self.target[1]) % 2


def first_order_stencil(n1: int, n2: int) -> FirstOrderStencil:
    """Constraint geometry at (n1, n2): four same-parity points -> one opposite."""
    return FirstOrderStencil(
        center=(n1, n2),
        constraint_points=((n1 + 1, n2), (n1 - 1, n2), (n1, n2 + 1), (n1, n2 - 1)),
        target=(n1 + 1, n2 + 1),
    )


def sync_second_order(prev, curr, h: TensorHamiltonian) -> tuple[GaussianRational, ...]:
    """Diagonal synchronization: next = prev - i H curr (same algebra as a
    single flattened system, so it runs both ways exactly)."""
    prev = as_exact_vector(prev, h.total_dim)
    forced = h.apply(curr)
    return tuple(p - f.times_i() for p, f in zip(prev, forced))


@dataclass(frozen=True)
class FirstOrderRun:
    states: tuple[tuple[GaussianRational, ...], ...]
    sync: SyncMode
    direction: int

    def __len__(self):
        return len(self.states)

    def __getitem__(self, k):
        return self.states[k]


def sync_first_order(
    state,
    h: TensorHamiltonian,
    steps: int,
    direction: int = 1,
    offsets: tuple[int, int] = (0, 0),
) -> FirstOrderRun:
    """Iterate the fully synchronized update psi -> -i H psi.

    One effective time variable remains; `offsets` records the (m1, m2)
    relabelling of the two counters as metadata without affecting the
    dynamics.  direction=-1 generates states at decreasing indices via the
    backward-synchronized form (the previous state equals -i H times the
    current one).
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if direction not in (1, -1):
        raise ValueError(f"direction must be +1 or -1, got {direction}")
    vec = as_exact_vector(state, h.total_dim)
    states = [vec]
    for _ in range(steps):
        vec = tuple(-c.times_i() for c in h.apply(vec))
        states.append(vec)
    return FirstOrderRun(
        states=tuple(states),
        sync=SyncMode("diagonal_first_order", tuple(offsets)),
        direction=direction,
    )


def norm_sq_exact(vec) -> GaussianRational:
    total = GaussianRational(0)
    for c in vec:
        c = GaussianRational._coerce(c)
        total = total + c * c.conjugate()
    return total


# =============================================================================
# Diagnostics
# =============================================================================


def schmidt_rank(state, dims: tuple[int, int], rel_tol: float = 1e-10) -> int:
    """Rank of the d1 x d2 reshaped state; 1 means uncorrelated."""
    d1, d2 = dims
    vec = [complex(GaussianRational._coerce(c)) for c in state]
    if len(vec) != d1 * d2:
        raise DimensionMismatch(f"state length {len(vec)} vs dims {dims}")
    sv = np.linalg.svd(np.array(vec).reshape(d1, d2), compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > rel_tol * sv[0]))


@dataclass(frozen=True)
class LeibnizReport:
    modified_residuals: tuple[GaussianRational, ...]
    naive_residuals: tuple[GaussianRational, ...]
    max_modified: float
    max_naive: float

    @property
    def modified_exact(self) -> bool:
        return all(r.is_zero() for r in self.modified_residuals)

    @property
    def naive_exact(self) -> bool:
        return all(r.is_zero() for r in self.naive_residuals)


def leibniz_identity_check(phi1, phi2) -> LeibnizReport:
    """Check the product rule of the symmetric difference f' = f[n+1] - f[n-1].

    The corrected rule replaces each undifferenced factor by the average of
    its two neighbours,

        (f g)'[n] = f'[n] (g[n+1]+g[n-1])/2 + (f[n+1]+f[n-1])/2 g'[n],

    and holds with exactly zero residual for arbitrary sequences (rational
    arithmetic, so the /2 is exact).  The naive rule f' g + f g' generally
    does not; its residual is reported alongside.
    """
    p1 = [GaussianRational._coerce(x) for x in phi1]
    p2 = [GaussianRational._coerce(x) for x in phi2]
    if len(p1) != len(p2):
        raise DimensionMismatch(f"sequence lengths differ: {len(p1)} vs {len(p2)}")
    if len(p1) < 3:
        raise LengthTooShort(f"need at least 3 samples, got {len(p1)}")
    modified = []
    naive = []
    for n in range(1, len(p1) - 1):
        lhs = p1[n + 1] * p2[n + 1] - p1[n - 1] * p2[n - 1]
        d1 = p1[n + 1] - p1[n - 1]
        d2 = p2[n + 1] - p2[n - 1]
        avg1 = (p1[n + 1] + p1[n - 1]) / 2
        avg2 = (p2[n + 1] + p2[n - 1]) / 2
        modified.append(lhs - (d1 * avg2 + avg1 * d2))
        naive.append(lhs - (d1 * p2[n] + p1[n] * d2))
    return LeibnizReport(
        modified_residuals=tuple(modified),
        naive_residuals=tuple(naive),
        max_modified=max((abs(complex(r)) for r in modified), default=0.0),
        max_naive=max((abs(complex(r)) for r in naive), default=0.0),
    )
