"""Exact complex-integer states and the second-order automaton update rule.

States are vectors of Gaussian integers (complex numbers with integer real
and imaginary parts).  The update rule is the second-order recursion

    psi[n+1] = psi[n-1] - i * H * psi[n],        H = S + iA,

with S symmetric and A antisymmetric integer matrices, so H is self-adjoint
and every step is exact integer arithmetic.  No rounding happens anywhere in
this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .errors import DimensionMismatch, SymmetryViolation


# =============================================================================
# Exact complex scalars
# =============================================================================


class GaussianInt:
    """Complex number with arbitrary-precision integer components."""

    __slots__ = ("re", "im")

    def __init__(self, re: int = 0, im: int = 0):
        if not isinstance(re, int) or not isinstance(im, int):
            raise TypeError("GaussianInt components must be Python ints")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    def __setattr__(self, name, value):
        raise AttributeError("GaussianInt is immutable")

    @staticmethod
    def _coerce(value) -> "GaussianInt":
        if isinstance(value, GaussianInt):
            return value
        if isinstance(value, int):
            return GaussianInt(value, 0)
        if isinstance(value, complex):
            re, im = value.real, value.imag
            if re != int(re) or im != int(im):
                raise ValueError(f"{value!r} has non-integer components")
            return GaussianInt(int(re), int(im))
        raise TypeError(f"cannot interpret {value!r} as a Gaussian integer")

    def __add__(self, other):
        other = self._coerce(other)
        return GaussianInt(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return GaussianInt(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        return GaussianInt(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __neg__(self):
        return GaussianInt(-self.re, -self.im)

    def times_i(self) -> "GaussianInt":
        """Multiply by i: (re, im) -> (-im, re)."""
        return GaussianInt(-self.im, self.re)

    def times_minus_i(self) -> "GaussianInt":
        return GaussianInt(self.im, -self.re)

    def conjugate(self) -> "GaussianInt":
        return GaussianInt(self.re, -self.im)

    def norm_sq(self) -> int:
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(self.re, self.im)

    def __repr__(self):
        return f"GaussianInt({self.re}, {self.im})"

    def __str__(self):
        return format_exact_complex(self.re, self.im)


class GaussianRational:
    """Complex number with exact rational components (used for rays and phases)."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    @staticmethod
    def _coerce(value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, GaussianInt):
            return GaussianRational(value.re, value.im)
        if isinstance(value, (int, Fraction)):
            return GaussianRational(value, 0)
        if isinstance(value, complex):
            return GaussianRational(Fraction(value.real), Fraction(value.imag))
        raise TypeError(f"cannot interpret {value!r} as a Gaussian rational")

    def __add__(self, other):
        other = self._coerce(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        denom = other.re * other.re + other.im * other.im
        if denom == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational(
            (self.re * other.re + self.im * other.im) / denom,
            (self.im * other.re - self.re * other.im) / denom,
        )

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def times_i(self) -> "GaussianRational":
        return GaussianRational(-self.im, self.re)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm_sq(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re!r}, {self.im!r})"

    def __str__(self):
        return format_exact_complex(self.re, self.im)


def format_exact_complex(re, im) -> str:
    """Compact text form: '0', '1', '-i', '1-1i', '1/2+3/2i', ..."""
    if im == 0:
        return str(re)
    imag = f"{im}i" if abs(im) != 1 else ("i" if im > 0 else "-i")
    if re == 0:
        return imag
    sign = "+" if im > 0 and not imag.startswith("-") else ""
    return f"{re}{sign}{imag}"


# =============================================================================
# State vectors
# =============================================================================


class GaussianIntVector:
    """Fixed-length vector of Gaussian integers; one component per degree of freedom."""

    __slots__ = ("components",)

    def __init__(self, components: Iterable):
        comps = tuple(self._coerce_component(c) for c in components)
        if not comps:
            raise ValueError("vector must have at least one component")
        object.__setattr__(self, "components", comps)

    @staticmethod
    def _coerce_component(c) -> GaussianInt:
        if isinstance(c, (tuple, list)) and len(c) == 2:
            return GaussianInt(int(c[0]), int(c[1]))
        return GaussianInt._coerce(c)

    def __setattr__(self, name, value):
        raise AttributeError("GaussianIntVector is immutable")

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, idx):
        return self.components[idx]

    def __eq__(self, other):
        if not isinstance(other, GaussianIntVector):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __add__(self, other):
        self._check_dim(other)
        return GaussianIntVector(a + b for a, b in zip(self, other))

    def __sub__(self, other):
        self._check_dim(other)
        return GaussianIntVector(a - b for a, b in zip(self, other))

    def __neg__(self):
        return GaussianIntVector(-a for a in self)

    def scaled(self, scalar) -> "GaussianIntVector":
        scalar = GaussianInt._coerce(scalar)
        return GaussianIntVector(scalar * a for a in self)

    def dot_conj(self, other: "GaussianIntVector") -> GaussianInt:
        """Inner product conj(self) . other, exact."""
        self._check_dim(other)
        total = GaussianInt(0, 0)
        for a, b in zip(self, other):
            total = total + a.conjugate() * b
        return total

    def norm_sq(self) -> int:
        return sum(c.norm_sq() for c in self)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self)

    def as_complex(self) -> list[complex]:
        return [complex(c) for c in self.components]

    def as_pairs(self) -> list[tuple[int, int]]:
        return [(c.re, c.im) for c in self.components]

    @staticmethod
    def basis(dim: int, index: int) -> "GaussianIntVector":
        return GaussianIntVector(
            GaussianInt(1 if k == index else 0, 0) for k in range(dim)
        )

    @staticmethod
    def zero(dim: int) -> "GaussianIntVector":
        return GaussianIntVector(GaussianInt(0, 0) for _ in range(dim))

    def _check_dim(self, other):
        if len(self) != len(other):
            raise DimensionMismatch(
                f"vector dimensions differ: {len(self)} vs {len(other)}"
            )

    def __repr__(self):
        return f"GaussianIntVector([{', '.join(str(c) for c in self)}])"


def to_xp(v: GaussianIntVector) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Split psi = x + i p into its integer coordinate and momentum vectors."""
    return tuple(c.re for c in v), tuple(c.im for c in v)


def from_xp(x: Sequence[int], p: Sequence[int]) -> GaussianIntVector:
    if len(x) != len(p):
        raise DimensionMismatch(f"x and p lengths differ: {len(x)} vs {len(p)}")
    return GaussianIntVector(GaussianInt(a, b) for a, b in zip(x, p))


# =============================================================================
# Hamiltonian models
# =============================================================================


@dataclass(frozen=True)
class HamiltonianModel:
    """Integer S (symmetric) and A (antisymmetric) defining H = S + iA."""

    dim: int
    s_matrix: tuple[tuple[int, ...], ...]
    a_matrix: tuple[tuple[int, ...], ...]

    @property
    def h_matrix(self) -> tuple[tuple[GaussianInt, ...], ...]:
        return tuple(
            tuple(GaussianInt(self.s_matrix[a][b], self.a_matrix[a][b]) for b in range(self.dim))
            for a in range(self.dim)
        )

    def h_rows_compiled(self):
        """Nonzero entries per row as (col, re, im) triples, for the fast update loop."""
        rows = []
        for a in range(self.dim):
            row = []
            for b in range(self.dim):
                sre, aim = self.s_matrix[a][b], self.a_matrix[a][b]
                if sre or aim:
                    row.append((b, sre, aim))
            rows.append(tuple(row))
        return tuple(rows)

    def apply_h(self, v: GaussianIntVector) -> GaussianIntVector:
        if len(v) != self.dim:
            raise DimensionMismatch(f"vector length {len(v)} vs model dim {self.dim}")
        h = self.h_matrix
        return GaussianIntVector(
            sum((h[a][b] * v[b] for b in range(self.dim)), GaussianInt(0, 0))
            for a in range(self.dim)
        )

    def as_complex_array(self):
        import numpy as np

        return np.array(
            [[complex(self.s_matrix[a][b], self.a_matrix[a][b]) for b in range(self.dim)]
             for a in range(self.dim)]
        )


def _as_int_rows(matrix, name) -> tuple[tuple[int, ...], ...]:
    rows = tuple(tuple(int(x) for x in row) for row in matrix)
    if not rows or any(len(row) != len(rows) for row in rows):
        raise DimensionMismatch(f"{name} must be a nonempty square matrix")
    return rows


def build_hamiltonian(s_matrix, a_matrix) -> HamiltonianModel:
    """Validate S/A symmetry and return the model; H = S + iA is then self-adjoint."""
    s = _as_int_rows(s_matrix, "S")
    a = _as_int_rows(a_matrix, "A")
    dim = len(s)
    if len(a) != dim:
        raise DimensionMismatch(f"S is {dim}x{dim} but A is {len(a)}x{len(a)}")
    for r in range(dim):
        for c in range(r, dim):
            if s[r][c] != s[c][r]:
                raise SymmetryViolation("S", r, c)
            if a[r][c] != -a[c][r]:
                raise SymmetryViolation("A", r, c)
    return HamiltonianModel(dim=dim, s_matrix=s, a_matrix=a)


def zero_model(dim: int) -> HamiltonianModel:
    zero = tuple(tuple(0 for _ in range(dim)) for _ in range(dim))
    return HamiltonianModel(dim=dim, s_matrix=zero, a_matrix=zero)


# =============================================================================
# Trajectories
# =============================================================================


@dataclass(frozen=True)
class CAPairState:
    """Two consecutive states (psi[n-1], psi[n]); the minimal trajectory data."""

    psi_prev: GaussianIntVector
    psi_curr: GaussianIntVector
    index_n: int = 1

    def __post_init__(self):
        if len(self.psi_prev) != len(self.psi_curr):
            raise DimensionMismatch(
                f"pair dimensions differ: {len(self.psi_prev)} vs {len(self.psi_curr)}"
            )

    @property
    def dim(self) -> int:
        return len(self.psi_curr)


@dataclass(frozen=True)
class Trajectory:
    """A contiguous run of states; states[k] sits at absolute index start_index + k."""

    states: tuple[GaussianIntVector, ...]
    start_index: int
    model: HamiltonianModel

    def __len__(self):
        return len(self.states)

    def __getitem__(self, k):
        return self.states[k]

    def state_at(self, n: int) -> GaussianIntVector:
        return self.states[n - self.start_index]

    def pair_at(self, n: int) -> CAPairState:
        return CAPairState(self.state_at(n - 1), self.state_at(n), index_n=n)

    def residual_at(self, n: int) -> GaussianIntVector:
        """psi[n+1] - psi[n-1] + i H psi[n]; exactly zero on valid trajectories."""
        forced = self.model.apply_h(self.state_at(n))
        return (
            self.state_at(n + 1)
            - self.state_at(n - 1)
            + GaussianIntVector(c.times_i() for c in forced)
        )

    def verify(self) -> bool:
        first = self.start_index + 1
        last = self.start_index + len(self.states) - 2
        return all(self.residual_at(n).is_zero() for n in range(first, last + 1))


def _check_pair_model(pair: CAPairState, model: HamiltonianModel):
    if pair.dim != model.dim:
        raise DimensionMismatch(f"pair dim {pair.dim} vs model dim {model.dim}")


def _forward_raw(rows, prev, curr):
    # next = prev - i * (H @ curr), on raw (re, im) int pairs
    out = []
    for (pre, pim), row in zip(prev, rows):
        sre = 0
        sim = 0
        for j, hre, him in row:
            vre, vim = curr[j]
            sre += hre * vre - him * vim
            sim += hre * vim + him * vre
        out.append((pre + sim, pim - sre))
    return out


def _backward_raw(rows, prev, curr):
    # previous-previous = curr + i * (H @ prev)
    out = []
    for (cre, cim), row in zip(curr, rows):
        sre = 0
        sim = 0
        for j, hre, him in row:
            vre, vim = prev[j]
            sre += hre * vre - him * vim
            sim += hre * vim + him * vre
        out.append((cre - sim, cim + sre))
    return out


def step(pair: CAPairState, model: HamiltonianModel, direction: str = "forward") -> CAPairState:
    """Advance or rewind the pair by one index.  Exact in both directions."""
    _check_pair_model(pair, model)
    rows = model.h_rows_compiled()
    prev = pair.psi_prev.as_pairs()
    curr = pair.psi_curr.as_pairs()
    if direction == "forward":
        nxt = _forward_raw(rows, prev, curr)
        return CAPairState(
            pair.psi_curr,
            GaussianIntVector(GaussianInt(r, i) for r, i in nxt),
            index_n=pair.index_n + 1,
        )
    if direction == "backward":
        before = _backward_raw(rows, prev, curr)
        return CAPairState(
            GaussianIntVector(GaussianInt(r, i) for r, i in before),
            pair.psi_prev,
            index_n=pair.index_n - 1,
        )
    raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")


def stream(pair: CAPairState, model: HamiltonianModel) -> Iterator[CAPairState]:
    """Yield successive forward pairs indefinitely, keeping only a 2-state window."""
    _check_pair_model(pair, model)
    rows = model.h_rows_compiled()
    prev = pair.psi_prev.as_pairs()
    curr = pair.psi_curr.as_pairs()
    index = pair.index_n
    while True:
        prev, curr = curr, _forward_raw(rows, prev, curr)
        index += 1
        yield CAPairState(
            GaussianIntVector(GaussianInt(r, i) for r, i in prev),
            GaussianIntVector(GaussianInt(r, i) for r, i in curr),
            index_n=index,
        )


def evolve(pair: CAPairState, model: HamiltonianModel, steps: int) -> Trajectory:
    """Run `steps` forward updates; returns all steps + 2 states."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    _check_pair_model(pair, model)
    rows = model.h_rows_compiled()
    prev = pair.psi_prev.as_pairs()
    curr = pair.psi_curr.as_pairs()
    raw_states = [prev, curr]
    for _ in range(steps):
        prev, curr = curr, _forward_raw(rows, prev, curr)
        raw_states.append(curr)
    states = tuple(
        GaussianIntVector(GaussianInt(r, i) for r, i in st) for st in raw_states
    )
    return Trajectory(states=states, start_index=pair.index_n - 1, model=model)


def two_time_correlation(pair: CAPairState) -> int:
    """Conserved bilinear conj(psi[n]).psi[n-1] + conj(psi[n-1]).psi[n].

    The imaginary parts cancel by construction, so the result is a plain
    integer.  Conservation under the update rule holds for every self-adjoint
    H and is enforced by the test suite through brute-force iteration.
    """
    total = 0
    for a, b in zip(pair.psi_curr, pair.psi_prev):
        total += a.re * b.re + a.im * b.im
    return 2 * total


