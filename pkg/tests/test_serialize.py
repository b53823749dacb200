"""Deterministic emission and input-file schemas."""

import json
from fractions import Fraction

import pytest

from ontoca.errors import ConfigInvalid
from ontoca.gaussian import (
    CAPairState,
    GaussianIntVector,
    GaussianRational,
    evolve,
)
from ontoca.multitime import MultiTimeField
from ontoca.ontology import preset_hamiltonian
from ontoca.serialize import (
    atomic_write_text,
    dumps_json,
    field_csv,
    format_float,
    load_model_file,
    load_schedule_file,
    load_topology_file,
    model_from_mapping,
    model_to_mapping,
    parse_field_csv,
    schedule_from_mapping,
    topology_from_mapping,
    trajectory_csv,
    trajectory_rows,
    vector_from_config,
)


class TestJsonEmission:
    def test_float_seventeen_significant_digits(self):
        assert format_float(0.1) == "0.10000000000000001"
        assert format_float(1.0) == "1"
        assert float(format_float(1 / 3)) == 1 / 3

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            format_float(float("nan"))

    def test_field_order_preserved(self):
        text = dumps_json({"b": 1, "a": 2})
        assert text.index('"b"') < text.index('"a"')
        assert json.loads(text) == {"b": 1, "a": 2}

    def test_empty_containers(self):
        assert dumps_json([]) == "[]\n"
        assert dumps_json({}) == "{}\n"

    def test_round_trips_through_stdlib(self):
        doc = {"x": [1, 2.5, None, True, "s"], "y": {"z": -7}}
        assert json.loads(dumps_json(doc)) == doc

    def test_deterministic(self):
        doc = {"values": [0.1 * k for k in range(20)], "flag": False}
        assert dumps_json(doc) == dumps_json(doc)

    def test_unserializable_rejected(self):
        with pytest.raises(TypeError):
            dumps_json({"x": object()})


class TestAtomicWrite:
    def test_write_and_replace(self, tmp_path):
        target = tmp_path / "sub" / "report.json"
        atomic_write_text(target, "first")
        atomic_write_text(target, "second")
        assert target.read_text() == "second"
        assert list(target.parent.iterdir()) == [target]


class TestTrajectoryCsv:
    def test_row_count_and_values(self):
        model = preset_hamiltonian("H2")
        pair = CAPairState(GaussianIntVector.basis(2, 0), GaussianIntVector.basis(2, 1))
        traj = evolve(pair, model, steps=5)
        rows = trajectory_rows(traj)
        assert len(rows) == (5 + 2) * 2
        text = trajectory_csv(traj)
        lines = text.strip().split("\n")
        assert lines[0] == "n,alpha,re,im"
        assert lines[1] == "0,0,1,0"
        # psi2 = (1-i, 0)
        assert "2,0,1,-1" in lines


class TestFieldCsv:
    def test_round_trip_with_fractions(self):
        field = MultiTimeField(
            (1, 2),
            {
                (0, 0): [GaussianRational(Fraction(1, 2), Fraction(-3, 2)), GaussianRational(2)],
                (1, -1): [GaussianRational(0), GaussianRational(Fraction(7, 3), 1)],
            },
        )
        text = field_csv(field)
        parsed = parse_field_csv(text, (1, 2))
        assert parsed.values == field.values

    def test_partial_point_rejected(self):
        text = "n1,n2,component,re,im\n0,0,0,1,0\n"
        with pytest.raises(ConfigInvalid):
            parse_field_csv(text, (1, 2))

    def test_bad_header_rejected(self):
        with pytest.raises(ConfigInvalid):
            parse_field_csv("a,b\n", (1, 1))


class TestModelSchema:
    def test_mapping_round_trip(self):
        model = preset_hamiltonian("H3")
        again = model_from_mapping(model_to_mapping(model))
        assert again == model

    def test_preset_shortcut(self):
        assert model_from_mapping({"preset": "H4"}).dim == 4

    def test_preset_conflict_detected(self):
        with pytest.raises(ConfigInvalid):
            model_from_mapping(
                {"preset": "H2", "S": [[0, 0], [0, 0]], "A": [[0, 0], [0, 0]]}
            )

    def test_symmetry_error_surfaces_as_config_error(self):
        with pytest.raises(ConfigInvalid):
            model_from_mapping({"S": [[0, 1], [0, 0]], "A": [[0, 0], [0, 0]]})

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigInvalid):
            load_model_file(tmp_path / "missing.json")

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "model.json"
        model = preset_hamiltonian("H4")
        atomic_write_text(path, dumps_json(model_to_mapping(model)))
        assert load_model_file(path) == model

    def test_dim_mismatch_rejected(self):
        with pytest.raises(ConfigInvalid):
            model_from_mapping({"dim": 3, "S": [[0, 1], [1, 0]], "A": [[0, 0], [0, 0]]})


class TestTopologyAndSchedule:
    def test_topology_mapping(self):
        topo = topology_from_mapping({"n_vertices": 3, "edges": [[0, 1], [1, 2]]})
        assert topo.edges == ((0, 1), (1, 2))

    def test_topology_preset(self):
        topo = topology_from_mapping({"preset": "ring", "n_vertices": 4})
        assert topo.n_edges == 4

    def test_topology_file(self, tmp_path):
        path = tmp_path / "topo.json"
        atomic_write_text(path, dumps_json({"n_vertices": 2, "edges": [[0, 1]]}))
        assert load_topology_file(path).n_edges == 1

    def test_bad_topology(self):
        with pytest.raises(ConfigInvalid):
            topology_from_mapping({"n_vertices": 2, "edges": [[0, 0]]})

    def test_schedule_kinds(self, tmp_path):
        periodic = schedule_from_mapping({"kind": "periodic", "steps": [[0, 1, 1]]})
        assert periodic.active(5) == ((0, 1), 1)
        seeded = schedule_from_mapping(
            {"kind": "seeded_random", "seed": 3, "pool": [[0, 1], [1, 2]]}
        )
        assert seeded.active(0) == seeded.active(0)
        path = tmp_path / "sched.json"
        atomic_write_text(
            path, dumps_json({"kind": "explicit", "steps": [[0, 1, -1]]})
        )
        assert load_schedule_file(path).active(0) == ((0, 1), -1)

    def test_bad_schedule(self):
        with pytest.raises(ConfigInvalid):
            schedule_from_mapping({"kind": "periodic", "steps": []})
        with pytest.raises(ConfigInvalid):
            schedule_from_mapping({"kind": "nope"})


class TestVectorConfig:
    def test_pairs_and_ints(self):
        v = vector_from_config([[1, -1], 2, [0, 3]])
        assert v == GaussianIntVector([(1, -1), (2, 0), (0, 3)])

    def test_garbage_rejected(self):
        with pytest.raises(ConfigInvalid):
            vector_from_config([[1, 2, 3]])
