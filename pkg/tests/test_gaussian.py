"""Exact-arithmetic core: scalars, vectors, models, and the update rule.

The reference oracle here iterates the coordinate/momentum form

    x[n+1] = x[n-1] + S p[n] + A x[n]
    p[n+1] = p[n-1] - S x[n] + A p[n]

directly from the integer S and A matrices, independently of the library's
complex-form stepping, so agreement between the two is a real check.
"""

import random

import pytest
from hypothesis import given, settings, strategies as st

from ontoca.errors import DimensionMismatch, SymmetryViolation, ZeroVector
from ontoca.gaussian import (
    CAPairState,
    GaussianInt,
    GaussianIntVector,
    build_hamiltonian,
    evolve,
    from_xp,
    step,
    stream,
    to_xp,
    two_time_correlation,
    zero_model,
)

SIGMA1 = ((0, 1), (1, 0))
ZERO2 = ((0, 0), (0, 0))


def xp_iterate(s, a, x0, p0, x1, p1, steps):
    """Reference evolution in coordinate/momentum form, plain integer sums."""
    dim = len(s)
    states = [(list(x0), list(p0)), (list(x1), list(p1))]
    for _ in range(steps):
        (xp, pp), (xc, pc) = states[-2], states[-1]
        xn = [
            xp[al]
            + sum(s[al][b] * pc[b] for b in range(dim))
            + sum(a[al][b] * xc[b] for b in range(dim))
            for al in range(dim)
        ]
        pn = [
            pp[al]
            - sum(s[al][b] * xc[b] for b in range(dim))
            + sum(a[al][b] * pc[b] for b in range(dim))
            for al in range(dim)
        ]
        states.append((xn, pn))
    return states


def random_model_matrices(rng, dim, lo=-3, hi=3):
    s = [[0] * dim for _ in range(dim)]
    a = [[0] * dim for _ in range(dim)]
    for r in range(dim):
        for c in range(r, dim):
            s[r][c] = s[c][r] = rng.randint(lo, hi)
            if c > r:
                v = rng.randint(lo, hi)
                a[r][c], a[c][r] = v, -v
    return s, a


def gvec(*pairs):
    return GaussianIntVector(GaussianInt(r, i) for r, i in pairs)


# =============================================================================
# Scalars
# =============================================================================


class TestGaussianInt:
    def test_arithmetic_closure(self):
        a = GaussianInt(3, -2)
        b = GaussianInt(-1, 5)
        assert a + b == GaussianInt(2, 3)
        assert a - b == GaussianInt(4, -7)
        # (3 - 2i)(-1 + 5i) = -3 + 15i + 2i + 10 = 7 + 17i
        assert a * b == GaussianInt(7, 17)

    def test_times_i_maps_re_im(self):
        assert GaussianInt(2, 7).times_i() == GaussianInt(-7, 2)
        assert GaussianInt(2, 7).times_minus_i() == GaussianInt(7, -2)

    def test_conjugate_and_norm(self):
        z = GaussianInt(3, 4)
        assert z.conjugate() == GaussianInt(3, -4)
        assert z.norm_sq() == 25

    def test_int_coercion(self):
        assert GaussianInt(2, 0) == 2
        assert 3 * GaussianInt(1, 1) == GaussianInt(3, 3)
        assert 1 - GaussianInt(0, 1) == GaussianInt(1, -1)

    def test_no_floats_allowed(self):
        with pytest.raises(TypeError):
            GaussianInt(1.5, 0)

    def test_big_integers_stay_exact(self):
        big = 10**40
        z = GaussianInt(big, -big) * GaussianInt(big, big)
        assert z == GaussianInt(2 * big * big, 0)

    @given(st.integers(), st.integers())
    def test_i_squared_is_minus_one(self, re, im):
        z = GaussianInt(re, im)
        assert z.times_i().times_i() == -z


# =============================================================================
# Vectors and conversions
# =============================================================================


class TestVectors:
    def test_to_xp_definition(self):
        x, p = to_xp(gvec((1, -1), (0, 0)))
        assert x == (1, 0)
        assert p == (-1, 0)

    def test_from_xp_round_trip(self):
        rng = random.Random(11)
        for _ in range(20):
            v = GaussianIntVector(
                GaussianInt(rng.randint(-9, 9), rng.randint(-9, 9)) for _ in range(4)
            )
            assert from_xp(*to_xp(v)) == v

    def test_dim_mismatch(self):
        with pytest.raises(DimensionMismatch):
            gvec((1, 0)) + gvec((1, 0), (0, 0))

    def test_dot_conj(self):
        v = gvec((1, 1), (0, 2))
        w = gvec((1, -1), (3, 0))
        # conj(1+i)(1-i) + conj(2i)(3) = (1-i)^2 + (-2i)(3) = -2i - 6i
        assert v.dot_conj(w) == GaussianInt(0, -8)

    def test_norm_sq(self):
        assert gvec((1, -1), (0, 0)).norm_sq() == 2


# =============================================================================
# Model validation
# =============================================================================


class TestBuildHamiltonian:
    def test_sigma1_model(self):
        model = build_hamiltonian(SIGMA1, ZERO2)
        assert model.dim == 2
        assert model.h_matrix[0][1] == GaussianInt(1, 0)
        assert model.h_matrix[1][0] == GaussianInt(1, 0)

    def test_zero_model(self):
        model = build_hamiltonian(ZERO2, ZERO2)
        assert all(e.is_zero() for row in model.h_matrix for e in row)

    def test_symmetry_violation_reports_first_pair(self):
        with pytest.raises(SymmetryViolation) as exc:
            build_hamiltonian(((0, 1), (0, 0)), ZERO2)
        assert exc.value.index_pair == (0, 1)
        assert exc.value.matrix_name == "S"

    def test_antisymmetry_violation(self):
        with pytest.raises(SymmetryViolation) as exc:
            build_hamiltonian(ZERO2, ((1, 0), (0, 0)))
        assert exc.value.matrix_name == "A"

    def test_hermiticity_of_accepted_models(self):
        rng = random.Random(5)
        for _ in range(20):
            dim = rng.randint(1, 6)
            model = build_hamiltonian(*random_model_matrices(rng, dim))
            h = model.h_matrix
            for r in range(dim):
                for c in range(dim):
                    assert h[r][c] == h[c][r].conjugate()

    def test_rectangular_rejected(self):
        with pytest.raises(DimensionMismatch):
            build_hamiltonian(((0, 1),), ZERO2)


# =============================================================================
# Stepping
# =============================================================================


class TestStep:
    def test_pair_flip_first_step(self):
        model = build_hamiltonian(SIGMA1, ZERO2)
        pair = CAPairState(gvec((1, 0), (0, 0)), gvec((0, 0), (1, 0)))
        after = step(pair, model, "forward")
        assert after.psi_curr == gvec((1, -1), (0, 0))
        assert after.index_n == 2

    def test_zero_hamiltonian_alternates(self):
        model = zero_model(3)
        pair = CAPairState(gvec((1, 0), (2, 0), (0, 3)), gvec((0, 1), (0, 0), (5, 0)))
        after = step(pair, model, "forward")
        assert after.psi_curr == pair.psi_prev

    def test_forward_backward_identity(self):
        rng = random.Random(3)
        for _ in range(30):
            dim = rng.randint(1, 5)
            model = build_hamiltonian(*random_model_matrices(rng, dim))
            pair = CAPairState(
                GaussianIntVector(
                    GaussianInt(rng.randint(-9, 9), rng.randint(-9, 9)) for _ in range(dim)
                ),
                GaussianIntVector(
                    GaussianInt(rng.randint(-9, 9), rng.randint(-9, 9)) for _ in range(dim)
                ),
                index_n=rng.randint(-5, 5),
            )
            assert step(step(pair, model, "forward"), model, "backward") == pair
            assert step(step(pair, model, "backward"), model, "forward") == pair

    def test_dimension_mismatch(self):
        model = build_hamiltonian(SIGMA1, ZERO2)
        pair = CAPairState(gvec((1, 0),), gvec((0, 1),))
        with pytest.raises(DimensionMismatch):
            step(pair, model)


# =============================================================================
# Evolution against the coordinate/momentum oracle
# =============================================================================


class TestEvolve:
    def test_published_two_state_sequence(self):
        model = build_hamiltonian(SIGMA1, ZERO2)
        pair = CAPairState(GaussianIntVector.basis(2, 0), GaussianIntVector.basis(2, 1))
        traj = evolve(pair, model, steps=11)
        assert len(traj) == 13
        expected = [
            gvec((1, 0), (0, 0)),
            gvec((0, 0), (1, 0)),
            gvec((1, -1), (0, 0)),
            gvec((0, 0), (0, -1)),
            gvec((0, -1), (0, 0)),
            gvec((0, 0), (-1, -1)),
            gvec((-1, 0), (0, 0)),
            gvec((0, 0), (-1, 0)),
        ]
        for n, want in enumerate(expected):
            assert traj.state_at(n) == want
        assert traj.state_at(12) == traj.state_at(0)

    def test_zero_hamiltonian_alternation(self):
        model = zero_model(2)
        pair = CAPairState(GaussianIntVector.basis(2, 0), GaussianIntVector.basis(2, 1))
        traj = evolve(pair, model, steps=4)
        for n in range(6):
            assert traj.state_at(n) == traj.state_at(n % 2)

    def test_matches_xp_oracle(self):
        rng = random.Random(17)
        for _ in range(10):
            dim = rng.randint(1, 5)
            s, a = random_model_matrices(rng, dim)
            model = build_hamiltonian(s, a)
            x0 = [rng.randint(-4, 4) for _ in range(dim)]
            p0 = [rng.randint(-4, 4) for _ in range(dim)]
            x1 = [rng.randint(-4, 4) for _ in range(dim)]
            p1 = [rng.randint(-4, 4) for _ in range(dim)]
            steps = 25
            traj = evolve(CAPairState(from_xp(x0, p0), from_xp(x1, p1)), model, steps)
            reference = xp_iterate(s, a, x0, p0, x1, p1, steps)
            for k, (xr, pr) in enumerate(reference):
                assert to_xp(traj.states[k]) == (tuple(xr), tuple(pr))

    def test_long_run_residuals_exact(self):
        rng = random.Random(23)
        s, a = random_model_matrices(rng, 5)
        model = build_hamiltonian(s, a)
        pair = CAPairState(
            GaussianIntVector(GaussianInt(rng.randint(-3, 3), rng.randint(-3, 3)) for _ in range(5)),
            GaussianIntVector(GaussianInt(rng.randint(-3, 3), rng.randint(-3, 3)) for _ in range(5)),
        )
        traj = evolve(pair, model, steps=1000)
        assert traj.verify()

    def test_stream_matches_evolve(self):
        model = build_hamiltonian(SIGMA1, ZERO2)
        pair = CAPairState(GaussianIntVector.basis(2, 0), GaussianIntVector.basis(2, 1))
        traj = evolve(pair, model, steps=10)
        walker = stream(pair, model)
        for n in range(2, 12):
            assert next(walker).psi_curr == traj.state_at(n)

    def test_steps_must_be_positive(self):
        model = zero_model(2)
        pair = CAPairState(GaussianIntVector.basis(2, 0), GaussianIntVector.basis(2, 1))
        with pytest.raises(ValueError):
            evolve(pair, model, steps=0)


# =============================================================================
# Two-time correlation
# =============================================================================


class TestTwoTimeCorrelation:
    def test_orthogonal_start_gives_zero(self):
        model = build_hamiltonian(SIGMA1, ZERO2)
        pair = CAPairState(GaussianIntVector.basis(2, 0), GaussianIntVector.basis(2, 1))
        assert two_time_correlation(pair) == 0
        walker = stream(pair, model)
        for _ in range(30):
            assert two_time_correlation(next(walker)) == 0

    def test_equal_start_gives_two(self):
        model = build_hamiltonian(SIGMA1, ZERO2)
        pair = CAPairState(GaussianIntVector.basis(2, 0), GaussianIntVector.basis(2, 0))
        assert two_time_correlation(pair) == 2
        walker = stream(pair, model)
        for _ in range(30):
            assert two_time_correlation(next(walker)) == 2

    def test_zero_states(self):
        pair = CAPairState(GaussianIntVector.zero(3), GaussianIntVector.zero(3))
        assert two_time_correlation(pair) == 0

    def test_conserved_on_random_models(self):
        rng = random.Random(29)
        for _ in range(15):
            dim = rng.randint(2, 8)
            model = build_hamiltonian(*random_model_matrices(rng, dim))
            pair = CAPairState(
                GaussianIntVector(
                    GaussianInt(rng.randint(-5, 5), rng.randint(-5, 5)) for _ in range(dim)
                ),
                GaussianIntVector(
                    GaussianInt(rng.randint(-5, 5), rng.randint(-5, 5)) for _ in range(dim)
                ),
            )
            q0 = two_time_correlation(pair)
            walker = stream(pair, model)
            for _ in range(100):
                assert two_time_correlation(next(walker)) == q0


# =============================================================================
# Property tests
# =============================================================================

small_int = st.integers(min_value=-4, max_value=4)


@st.composite
def model_and_pair(draw, max_dim=4):
    dim = draw(st.integers(min_value=1, max_value=max_dim))
    s = [[0] * dim for _ in range(dim)]
    a = [[0] * dim for _ in range(dim)]
    for r in range(dim):
        for c in range(r, dim):
            s[r][c] = s[c][r] = draw(small_int)
            if c > r:
                v = draw(small_int)
                a[r][c], a[c][r] = v, -v
    comps = st.tuples(small_int, small_int)
    prev = GaussianIntVector(GaussianInt(*draw(comps)) for _ in range(dim))
    curr = GaussianIntVector(GaussianInt(*draw(comps)) for _ in range(dim))
    return build_hamiltonian(s, a), CAPairState(prev, curr)


class TestProperties:
    @given(model_and_pair())
    @settings(max_examples=60, deadline=None)
    def test_reversibility(self, case):
        model, pair = case
        assert step(step(pair, model, "forward"), model, "backward") == pair

    @given(model_and_pair())
    @settings(max_examples=60, deadline=None)
    def test_conservation(self, case):
        model, pair = case
        q0 = two_time_correlation(pair)
        walker = stream(pair, model)
        for _ in range(12):
            assert two_time_correlation(next(walker)) == q0

    @given(st.lists(st.tuples(small_int, small_int), min_size=1, max_size=5))
    def test_xp_round_trip(self, pairs):
        v = GaussianIntVector(GaussianInt(r, i) for r, i in pairs)
        assert from_xp(*to_xp(v)) == v
