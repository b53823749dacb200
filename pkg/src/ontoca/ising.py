"""Multipartite two-state (Ising) spin models evolving by phased permutations.

Spin configurations live on a graph: one bit per vertex, and for the
edge-gated model one bit per edge.  A configuration is bit-packed into a
basis index with vertex bits low and edge bits high (bit k = vertex k,
bit N + e = edge number e; bit value 1 means spin up).  Every one-step map
here sends a basis state to exactly one basis state times a fourth root of
unity, so phases are tracked as integer exponents of i and the dynamics
never leaves the configuration basis.

Two update families are provided:

  * pair flips driven by an external schedule that activates exactly one
    edge per step (coefficient restricted to +1/-1; anything else would
    rescale states and break the permutation property), and
  * an edge-gated transfer map where every edge whose own spin is up flips
    its two vertex spins simultaneously, all factors commuting.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    DimensionOverflow,
    EdgeNotInTopology,
    NotPermutation,
    ScheduleExhausted,
)
from .numerics import expm_hermitian, max_abs

DEFAULT_MAX_BITS = 24

Edge = tuple[int, int]


# =============================================================================
# Topologies and configurations
# =============================================================================


@dataclass(frozen=True)
class GraphTopology:
    """Vertices 0..N-1 plus an ordered list of undirected edges (i < j)."""

    n_vertices: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        if self.n_vertices < 2:
            raise ValueError(f"need at least 2 vertices, got {self.n_vertices}")
        seen = set()
        norm = []
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop ({i},{j}) not allowed")
            if not (0 <= i < self.n_vertices and 0 <= j < self.n_vertices):
                raise ValueError(f"edge ({i},{j}) out of range")
            if i > j:
                i, j = j, i
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i},{j})")
            seen.add((i, j))
            norm.append((i, j))
        object.__setattr__(self, "edges", tuple(norm))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def total_bits(self) -> int:
        return self.n_vertices + self.n_edges

    def edge_number(self, edge: Edge) -> int:
        i, j = min(edge), max(edge)
        try:
            return self.edges.index((i, j))
        except ValueError:
            raise EdgeNotInTopology(f"edge ({i},{j}) not in topology") from None

    def vertex_mask(self, edge: Edge) -> int:
        i, j = edge
        return (1 << i) | (1 << j)

    @classmethod
    def fully_connected(cls, n: int) -> "GraphTopology":
        return cls(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))

    @classmethod
    def ring(cls, n: int) -> "GraphTopology":
        edges = {tuple(sorted((k, (k + 1) % n))) for k in range(n)}
        return cls(n, tuple(sorted(edges)))

    @classmethod
    def path(cls, n: int) -> "GraphTopology":
        return cls(n, tuple((k, k + 1) for k in range(n - 1)))


@dataclass(frozen=True)
class SpinConfiguration:
    vertex_bits: tuple[int, ...]
    edge_bits: tuple[int, ...] = ()

    def __post_init__(self):
        for b in (*self.vertex_bits, *self.edge_bits):
            if b not in (0, 1):
                raise ValueError(f"bits must be 0 or 1, got {b}")

    @property
    def basis_index(self) -> int:
        idx = 0
        for k, b in enumerate(self.vertex_bits):
            idx |= b << k
        n = len(self.vertex_bits)
        for e, b in enumerate(self.edge_bits):
            idx |= b << (n + e)
        return idx

    @classmethod
    def from_index(cls, index: int, n_vertices: int, n_edges: int = 0) -> "SpinConfiguration":
        if not 0 <= index < (1 << (n_vertices + n_edges)):
            raise ValueError(f"index {index} out of range for {n_vertices}+{n_edges} bits")
        return cls(
            vertex_bits=tuple((index >> k) & 1 for k in range(n_vertices)),
            edge_bits=tuple((index >> (n_vertices + e)) & 1 for e in range(n_edges)),
        )

    @classmethod
    def from_strings(cls, vertex: str, edge: str = "") -> "SpinConfiguration":
        return cls(
            vertex_bits=tuple(int(c) for c in vertex),
            edge_bits=tuple(int(c) for c in edge),
        )

    @property
    def vertex_string(self) -> str:
        return "".join(str(b) for b in self.vertex_bits)

    @property
    def edge_string(self) -> str:
        return "".join(str(b) for b in self.edge_bits)


# =============================================================================
# Phased permutations
# =============================================================================


PHASES = (1 + 0j, 1j, -1 + 0j, -1j)  # i**k


@dataclass(frozen=True)
class PhasedPermutation:
    """Bijection on basis indices with a fourth-root-of-unity phase per index."""

    target: tuple[int, ...]
    phase_exponent: tuple[int, ...]

    def __post_init__(self):
        size = len(self.target)
        if len(self.phase_exponent) != size:
            raise DimensionMismatch("target and phase arrays differ in length")
        if sorted(self.target) != list(range(size)):
            raise NotPermutation("target map is not a bijection on basis indices")
        object.__setattr__(
            self, "phase_exponent", tuple(p % 4 for p in self.phase_exponent)
        )

    @property
    def size(self) -> int:
        return len(self.target)

    def apply(self, index: int) -> tuple[int, int]:
        """Image and phase exponent of one basis index."""
        return self.target[index], self.phase_exponent[index]

    @classmethod
    def identity(cls, size: int) -> "PhasedPermutation":
        return cls(tuple(range(size)), (0,) * size)

    def is_identity_permutation(self) -> bool:
        return all(t == x for x, t in enumerate(self.target))

    def compose_after(self, inner: "PhasedPermutation") -> "PhasedPermutation":
        """self o inner: apply `inner` first, then self."""
        if inner.size != self.size:
            raise DimensionMismatch(f"sizes differ: {self.size} vs {inner.size}")
        target = []
        phase = []
        for x in range(self.size):
            mid = inner.target[x]
            target.append(self.target[mid])
            phase.append(inner.phase_exponent[x] + self.phase_exponent[mid])
        return PhasedPermutation(tuple(target), tuple(phase))

    def inverse(self) -> "PhasedPermutation":
        """Also the conjugate transpose, since all phases are unit modulus."""
        target = [0] * self.size
        phase = [0] * self.size
        for x, t in enumerate(self.target):
            target[t] = x
            phase[t] = -self.phase_exponent[x]
        return PhasedPermutation(tuple(target), tuple(phase))

    def power(self, k: int) -> "PhasedPermutation":
        if k < 0:
            return self.inverse().power(-k)
        acc = PhasedPermutation.identity(self.size)
        for _ in range(k):
            acc = self.compose_after(acc)
        return acc

    def to_dense(self) -> np.ndarray:
        m = np.zeros((self.size, self.size), dtype=complex)
        for x in range(self.size):
            m[self.target[x], x] = PHASES[self.phase_exponent[x]]
        return m

    def is_unitary(self) -> bool:
        return self.compose_after(self.inverse()) == PhasedPermutation.identity(self.size)


def commutator_report(a: PhasedPermutation, b: PhasedPermutation) -> tuple[bool, float]:
    """Whether a and b commute, plus the largest entry of ab - ba (exact logic)."""
    if a.size != b.size:
        raise DimensionMismatch(f"sizes differ: {a.size} vs {b.size}")
    ab = a.compose_after(b)
    ba = b.compose_after(a)
    if ab == ba:
        return True, 0.0
    worst = 0.0
    for x in range(a.size):
        t1, p1 = ab.apply(x)
        t2, p2 = ba.apply(x)
        if t1 != t2:
            worst = max(worst, 1.0)
        else:
            worst = max(worst, abs(PHASES[p1] - PHASES[p2]))
    return False, worst


# =============================================================================
# Pair-flip model with external driving
# =============================================================================


@dataclass(frozen=True)
class Schedule:
    """Which single edge is active at each step, with its +1/-1 coefficient."""

    kind: str  # periodic | explicit | seeded_random
    steps: tuple[tuple[int, int, int], ...] = ()
    seed: Optional[int] = None
    pool: tuple[Edge, ...] = ()

    def __post_init__(self):
        if self.kind not in ("periodic", "explicit", "seeded_random"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind in ("periodic", "explicit"):
            if not self.steps:
                raise ValueError(
                    "schedule must activate exactly one edge per step; an empty "
                    "step list activates none"
                )
            for i, j, sign in self.steps:
                if sign not in (1, -1):
                    raise ValueError(f"coefficient must be +1 or -1, got {sign}")
        else:
            if self.seed is None or not self.pool:
                raise ValueError("seeded_random schedule needs a seed and an edge pool")

    @classmethod
    def periodic(cls, steps: Iterable) -> "Schedule":
        return cls(kind="periodic", steps=_norm_steps(steps))

    @classmethod
    def explicit(cls, steps: Iterable) -> "Schedule":
        return cls(kind="explicit", steps=_norm_steps(steps))

    @classmethod
    def seeded_random(cls, seed: int, pool: Iterable[Edge]) -> "Schedule":
        return cls(
            kind="seeded_random",
            seed=int(seed),
            pool=tuple((min(e), max(e)) for e in pool),
        )

    def active(self, step_index: int) -> tuple[Edge, int]:
        if self.kind == "periodic":
            i, j, sign = self.steps[step_index % len(self.steps)]
            return (i, j), sign
        if self.kind == "explicit":
            if step_index >= len(self.steps):
                raise ScheduleExhausted(
                    f"explicit schedule has {len(self.steps)} steps; asked for {step_index}"
                )
            i, j, sign = self.steps[step_index]
            return (i, j), sign
        rnd = random.Random((self.seed << 32) ^ step_index)
        return rnd.choice(self.pool), rnd.choice((1, -1))


def _norm_steps(steps) -> tuple[tuple[int, int, int], ...]:
    out = []
    for entry in steps:
        if len(entry) == 2:
            i, j = entry
            sign = 1
        else:
            i, j, sign = entry
        out.append((min(int(i), int(j)), max(int(i), int(j)), int(sign)))
    return tuple(out)


def model_a_step_operator(
    topology: GraphTopology, active_edge: Edge, sign: int = 1
) -> PhasedPermutation:
    """One externally driven step: flip the two vertex spins of the active edge.

    The map is (-i * sign) times the double flip, i.e. a single permutation
    with uniform phase exponent 3 (sign +1) or 1 (sign -1).
    """
    topology.edge_number(active_edge)  # raises EdgeNotInTopology
    if sign not in (1, -1):
        raise ValueError(f"coefficient must be +1 or -1, got {sign}")
    size = 1 << topology.n_vertices
    mask = topology.vertex_mask((min(active_edge), max(active_edge)))
    exponent = 3 if sign == 1 else 1
    return PhasedPermutation(
        target=tuple(x ^ mask for x in range(size)),
        phase_exponent=(exponent,) * size,
    )


def model_a_evolve(
    topology: GraphTopology,
    config: SpinConfiguration,
    schedule: Schedule,
    steps: int,
) -> list[tuple[SpinConfiguration, int]]:
    """Exact basis-state trajectory with accumulated i**k phases.

    Returns steps + 1 entries starting from (config, 0).  Superpositions can
    never appear: each step is a pure permutation with a phase.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if config.edge_bits:
        raise ValueError("externally driven model carries no edge bits")
    if len(config.vertex_bits) != topology.n_vertices:
        raise DimensionMismatch(
            f"configuration has {len(config.vertex_bits)} vertices, topology {topology.n_vertices}"
        )
    index = config.basis_index
    phase = 0
    out = [(config, 0)]
    for n in range(steps):
        edge, sign = schedule.active(n)
        topology.edge_number(edge)
        index ^= topology.vertex_mask((min(edge), max(edge)))
        phase = (phase + (3 if sign == 1 else 1)) % 4
        out.append((SpinConfiguration.from_index(index, topology.n_vertices), phase))
    return out


# =============================================================================
# Edge-gated transfer model
# =============================================================================


def model_b_transfer(
    topology: GraphTopology, max_bits: int = DEFAULT_MAX_BITS
) -> PhasedPermutation:
    """One-step map on vertex + edge bits: every up edge flips its vertex pair.

    Edge bits are untouched; the overall phase is -i (exponent 3).  The
    per-edge factors commute, so the edge ordering of the topology is
    irrelevant to the result.
    """
    bits = topology.total_bits
    if bits > max_bits:
        raise DimensionOverflow(
            f"{topology.n_vertices} vertex + {topology.n_edges} edge bits exceed the "
            f"{max_bits}-bit limit"
        )
    n = topology.n_vertices
    n_edges = topology.n_edges
    edge_masks = [topology.vertex_mask(e) for e in topology.edges]
    # vertex-flip mask for every edge-bit pattern
    pattern_mask = [0] * (1 << n_edges)
    for pattern in range(1 << n_edges):
        m = 0
        for e in range(n_edges):
            if (pattern >> e) & 1:
                m ^= edge_masks[e]
        pattern_mask[pattern] = m
    size = 1 << bits
    vmask_all = (1 << n) - 1
    target = []
    for x in range(size):
        pattern = x >> n
        target.append(((x & vmask_all) ^ pattern_mask[pattern]) | (pattern << n))
    return PhasedPermutation(tuple(target), (3,) * size)


def model_b_factor(topology: GraphTopology, edge_number: int) -> PhasedPermutation:
    """Single-edge factor of the transfer map: the gated pair flip, no phase.

    All factors commute; composing them in any order and appending the
    overall -i reproduces the full transfer map.
    """
    if not 0 <= edge_number < topology.n_edges:
        raise EdgeNotInTopology(f"edge number {edge_number} out of range")
    n = topology.n_vertices
    mask = topology.vertex_mask(topology.edges[edge_number])
    ebit = 1 << (n + edge_number)
    size = 1 << topology.total_bits
    return PhasedPermutation(
        tuple(x ^ mask if x & ebit else x for x in range(size)),
        (0,) * size,
    )


def projector_identity_check(k: int) -> bool:
    """(+/- (sigma3 +/- 1)/2)^k reproduces itself exactly, for both sign choices."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    half = Fraction(1, 2)
    sigma3 = ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(-1)))
    for sign in (1, -1):
        # sign +1: +(sigma3 + 1)/2 ; sign -1: -(sigma3 - 1)/2
        proj = tuple(
            tuple(
                sign * half * (sigma3[r][c] + sign * (1 if r == c else 0))
                for c in range(2)
            )
            for r in range(2)
        )
        acc = proj
        for _ in range(k - 1):
            acc = (
                (
                    acc[0][0] * proj[0][0] + acc[0][1] * proj[1][0],
                    acc[0][0] * proj[0][1] + acc[0][1] * proj[1][1],
                ),
                (
                    acc[1][0] * proj[0][0] + acc[1][1] * proj[1][0],
                    acc[1][0] * proj[0][1] + acc[1][1] * proj[1][1],
                ),
            )
        if acc != proj:
            return False
    return True


def build_generator_matrix(topology: GraphTopology) -> np.ndarray:
    """Sum over edges of the gated pair-flip involutions, as a dense matrix."""
    bits = topology.total_bits
    size = 1 << bits
    n = topology.n_vertices
    g = np.zeros((size, size))
    for e, edge in enumerate(topology.edges):
        mask = topology.vertex_mask(edge)
        ebit = 1 << (n + e)
        for x in range(size):
            if x & ebit:
                g[x ^ mask, x] += 1.0
            else:
                g[x, x] += 1.0
    return g


def verify_exponential_form(topology: GraphTopology, max_bits: int = 12) -> float:
    """Max deviation between the exact transfer map and its exponential form.

    The generator is the commuting sum of gated pair-flip involutions; its
    exponential exp(-i pi/2 * G) reproduces the transfer map up to one
    overall phase, which is fitted before comparing entrywise.
    """
    if topology.total_bits > max_bits:
        raise DimensionOverflow(
            f"dense exponential limited to {max_bits} bits, got {topology.total_bits}"
        )
    exact = model_b_transfer(topology).to_dense()
    g = build_generator_matrix(topology)
    u = expm_hermitian(g, prefactor=-1j * np.pi / 2.0)
    overlap = np.trace(exact.conj().T @ u)
    if abs(overlap) == 0.0:
        return max_abs(u - exact)
    phase = overlap / abs(overlap)
    return max_abs(u - phase * exact)


def gauge_check(
    transform: Union[PhasedPermutation, np.ndarray],
    topology: GraphTopology,
    tol: float = 1e-10,
) -> tuple[bool, float]:
    """Does `transform` commute with the edge-gated transfer map?

    Exact for phased permutations; dense unitaries are compared entrywise
    with the given tolerance.
    """
    transfer = model_b_transfer(topology)
    if isinstance(transform, PhasedPermutation):
        if transform.size != transfer.size:
            raise DimensionMismatch(
                f"transform size {transform.size} vs state space {transfer.size}"
            )
        return commutator_report(transform, transfer)
    dense = np.asarray(transform, dtype=complex)
    if dense.shape != (transfer.size, transfer.size):
        raise DimensionMismatch(
            f"transform shape {dense.shape} vs state space {transfer.size}"
        )
    t = transfer.to_dense()
    worst = max_abs(dense @ t - t @ dense)
    return worst <= tol, worst


def global_vertex_flip(topology: GraphTopology) -> PhasedPermutation:
    """Flip every vertex spin; a discrete symmetry candidate."""
    size = 1 << topology.total_bits
    mask = (1 << topology.n_vertices) - 1
    return PhasedPermutation(
        tuple((x & ~mask) | ((x & mask) ^ mask) for x in range(size)),
        (0,) * size,
    )


def vertex_sign_flip(topology: GraphTopology, vertex: int) -> PhasedPermutation:
    """Diagonal map multiplying by -1 whenever the given vertex spin is down."""
    if not 0 <= vertex < topology.n_vertices:
        raise ValueError(f"vertex {vertex} out of range")
    size = 1 << topology.total_bits
    bit = 1 << vertex
    return PhasedPermutation(
        tuple(range(size)),
        tuple(0 if (x & bit) else 2 for x in range(size)),
    )


# =============================================================================
# Edge-spin dynamics plug-ins
# =============================================================================


def edge_update_compose(
    transfer: PhasedPermutation,
    edge_rule: PhasedPermutation,
    topology: GraphTopology,
) -> PhasedPermutation:
    """Append an edge-bit update after the transfer map.

    The rule must act as the identity on vertex bits; the composition is
    validated to remain a phased permutation, so the combined dynamics still
    never creates superpositions.
    """
    if edge_rule.size != transfer.size:
        raise DimensionMismatch(
            f"edge rule size {edge_rule.size} vs transfer size {transfer.size}"
        )
    vmask = (1 << topology.n_vertices) - 1
    for x in range(edge_rule.size):
        if (edge_rule.target[x] & vmask) != (x & vmask):
            raise NotPermutation(
                f"edge rule moves vertex bits at index {x}; it must act on edge bits only"
            )
    return edge_rule.compose_after(transfer)


def frozen_edges_rule(topology: GraphTopology) -> PhasedPermutation:
    return PhasedPermutation.identity(1 << topology.total_bits)


def cyclic_edge_shift_rule(topology: GraphTopology) -> PhasedPermutation:
    """Rotate the edge-bit register by one position."""
    n, n_edges = topology.n_vertices, topology.n_edges
    size = 1 << topology.total_bits
    if n_edges < 2:
        return PhasedPermutation.identity(size)
    emask = (1 << n_edges) - 1

    def shift(pattern: int) -> int:
        return ((pattern << 1) | (pattern >> (n_edges - 1))) & emask

    return PhasedPermutation(
        tuple((x & ((1 << n) - 1)) | (shift(x >> n) << n) for x in range(size)),
        (0,) * size,
    )


def seeded_edge_permutation_rule(topology: GraphTopology, seed: int) -> PhasedPermutation:
    """A fixed random permutation of edge-bit patterns, reproducible per seed."""
    n, n_edges = topology.n_vertices, topology.n_edges
    patterns = list(range(1 << n_edges))
    random.Random(seed).shuffle(patterns)
    size = 1 << topology.total_bits
    return PhasedPermutation(
        tuple((x & ((1 << n) - 1)) | (patterns[x >> n] << n) for x in range(size)),
        (0,) * size,
    )
