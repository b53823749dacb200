"""Command-line entry point: run configured experiments, emit machine-readable
artifacts, and gate on invariant checks.

Experiments are defined by JSON config documents (reproducible, diffable);
flags only override generic fields (--seed, --steps, --out, --format) or
provide shortcuts for the common cases.  Identical config + seed produces
byte-identical artifacts.  The exit status is 0 only when every invariant
asserted by the chosen experiment holds; config errors exit with status 2.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import gup, ising, multitime, ontology, propagator, serialize, verify
from .errors import ConfigInvalid, OntocaError
from .gaussian import (
    CAPairState,
    GaussianIntVector,
    HamiltonianModel,
    evolve,
    two_time_correlation,
)
from .propagator import DiscretenessScale

log = logging.getLogger("ontoca")

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_CONFIG = 2


def _configure_logging():
    level_name = os.environ.get("ONTOCA_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(name)s %(levelname)s: %(message)s")


# =============================================================================
# Config plumbing
# =============================================================================


def _load_config(args, kind: str) -> dict:
    """Load and pre-validate the experiment config; flags override fields."""
    config: dict = {}
    if getattr(args, "config", None):
        config = serialize.load_json_file(args.config)
        declared = config.get("kind")
        if declared is not None and declared != kind:
            raise ConfigInvalid(args.config, f"config kind {declared!r} does not match subcommand {kind!r}")
        version = config.get("schema_version")
        if version is not None and version != serialize.SCHEMA_VERSION:
            raise ConfigInvalid(args.config, f"unsupported schema_version {version}")
    for key in ("seed", "steps", "out", "format"):
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    if config.get("format") not in (None, "csv", "json"):
        raise ConfigInvalid("format", f"unknown format {config['format']!r}")
    log.debug("running %s with config keys %s", kind, sorted(config))
    return config


def _require(config: dict, key: str):
    if key not in config:
        raise ConfigInvalid(key, "required config field is missing")
    return config[key]


def _resolve_model(config: dict, args) -> HamiltonianModel:
    if getattr(args, "preset", None):
        return ontology.preset_hamiltonian(args.preset)
    spec = config.get("model")
    if spec is None:
        raise ConfigInvalid("model", "no model given; use --preset or a config with a 'model' field")
    if isinstance(spec, str):
        return serialize.load_model_file(spec)
    if isinstance(spec, dict):
        return serialize.model_from_mapping(spec)
    raise ConfigInvalid("model", f"expected mapping or file path, got {type(spec).__name__}")


def _resolve_pair(config: dict, model) -> CAPairState:
    if "psi0" in config:
        psi0 = serialize.vector_from_config(config["psi0"], "psi0")
    else:
        psi0 = GaussianIntVector.basis(model.dim, 0)
    if "psi1" in config:
        psi1 = serialize.vector_from_config(config["psi1"], "psi1")
    else:
        psi1 = GaussianIntVector.basis(model.dim, min(1, model.dim - 1))
    if len(psi0) != model.dim or len(psi1) != model.dim:
        raise ConfigInvalid("psi0/psi1", f"vectors must have model dimension {model.dim}")
    return CAPairState(psi0, psi1, index_n=1)


def _write_out(config: dict, text: str, default_name: str) -> str:
    out = config.get("out") or default_name
    serialize.atomic_write_text(out, text)
    log.debug("wrote %d bytes to %s", len(text), out)
    return out


# =============================================================================
# Subcommand handlers
# =============================================================================


def cmd_evolve(args) -> int:
    config = _load_config(args, "evolve")
    model = _resolve_model(config, args)
    pair = _resolve_pair(config, model)
    steps = int(config.get("steps", 12))
    traj = evolve(pair, model, steps)

    q0 = two_time_correlation(pair)
    conserved = all(
        two_time_correlation(traj.pair_at(n)) == q0
        for n in range(traj.start_index + 1, traj.start_index + len(traj))
    )
    residuals_zero = traj.verify()

    fmt = config.get("format", "csv")
    if fmt == "csv":
        text = serialize.trajectory_csv(traj)
        out = _write_out(config, text, "evolve.csv")
    elif fmt == "json":
        doc = {
            "schema_version": serialize.SCHEMA_VERSION,
            "kind": "evolve",
            "dim": model.dim,
            "steps": steps,
            "start_index": traj.start_index,
            "two_time_correlation": q0,
            "conserved": conserved,
            "rows": [list(row) for row in serialize.trajectory_rows(traj)],
        }
        out = _write_out(config, serialize.dumps_json(doc), "evolve.json")
    else:
        raise ConfigInvalid("format", f"unknown format {fmt!r}")

    ok = conserved and residuals_zero
    print(
        f"evolve: dim={model.dim} steps={steps} Q={q0} conserved={conserved} "
        f"residuals_zero={residuals_zero} out={out}"
    )
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_dispersion(args) -> int:
    config = _load_config(args, "dispersion")
    model = _resolve_model(config, args)
    dec = propagator.phi_operator(model)
    rows = []
    worst = 0.0
    import numpy as np

    h = model.as_complex_array()
    for k, lam in enumerate(dec.eigenvalues):
        omega = propagator.dispersion_omega(lam)
        rows.append((lam, omega.real, omega.imag))
        if abs(lam) <= 2:
            vec = dec.eigenvectors[:, k]
            res = np.exp(-1j * omega * 2) * vec - vec + 1j * (h @ (np.exp(-1j * omega) * vec))
            worst = max(worst, float(np.max(np.abs(res))))
    out = _write_out(config, serialize.dispersion_csv(rows), "dispersion.csv")

    sweep_note = ""
    sweep = config.get("sweep")
    if sweep is not None:
        if not isinstance(sweep, dict) or not sweep.get("epsilons"):
            raise ConfigInvalid("sweep", "expected {epsilons, scale_product, out?}")
        epsilons = tuple(float(e) for e in sweep["epsilons"])
        scale_product = float(sweep.get("scale_product", 1.0))
        psi0 = (
            serialize.vector_from_config(sweep["psi0"], "sweep.psi0")
            if "psi0" in sweep
            else GaussianIntVector.basis(model.dim, 0)
        )
        sweep_rows = propagator.continuum_limit_check(model, psi0, epsilons, scale_product)
        doc = {
            "schema_version": serialize.SCHEMA_VERSION,
            "kind": "dispersion-sweep",
            "scale_product": scale_product,
            "rows": [
                {"epsilon": eps, "n": n, "deviation": dev} for eps, n, dev in sweep_rows
            ],
        }
        sweep_out = sweep.get("out", "deviation_sweep.json")
        serialize.atomic_write_text(sweep_out, serialize.dumps_json(doc))
        sweep_note = f" sweep_out={sweep_out}"

    ok = worst <= 1e-10
    print(
        f"dispersion: dim={model.dim} modes={len(rows)} max_stationary_residual={worst:.3e} "
        f"ok={ok} out={out}{sweep_note}"
    )
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_ontology_scan(args) -> int:
    config = _load_config(args, "ontology-scan")
    model = _resolve_model(config, args)
    pair = _resolve_pair(config, model)
    basis_spec = config.get("basis", "standard")
    if basis_spec == "standard":
        basis = ontology.standard_basis_rays(model.dim)
    else:
        basis = tuple(
            ontology.canonical_ray(serialize.vector_from_config(v, "basis"))
            for v in basis_spec
        )
    max_steps = config.get("max_steps")
    report = ontology.detect_phased_permutation(
        model, pair.psi_prev, pair.psi_curr, basis, max_steps=max_steps
    )
    traj = evolve(pair, model, steps=max(report.steps_scanned, 1))
    doc = {
        "schema_version": serialize.SCHEMA_VERSION,
        "kind": "ontology-scan",
        "ontological": report.is_ontological,
        "exact_period": report.exact_state_period,
        "ray_period": report.ray_period,
        "ray_cycle": [str(ray) for ray in report.ray_cycle],
        "failure_step": report.failure_step,
        "norm_trace": list(ontology.norm_trace(traj)),
    }
    out = _write_out(config, serialize.dumps_json(doc), "ontology_scan.json")
    print(
        f"ontology-scan: dim={model.dim} ontological={report.is_ontological} "
        f"ray_period={report.ray_period} exact_period={report.exact_state_period} out={out}"
    )
    return EXIT_OK


def _complex_entries(entries, origin: str) -> list[complex]:
    """Entries are [re, im] pairs or bare integers."""
    out = []
    try:
        for item in entries:
            if isinstance(item, (list, tuple)):
                re, im = item
                out.append(complex(int(re), int(im)))
            else:
                out.append(complex(int(item), 0))
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(origin, f"bad complex entry: {exc}") from None
    return out


def _resolve_coupling(config: dict) -> multitime.TensorHamiltonian:
    spec = config.get("coupling")
    if not isinstance(spec, dict):
        raise ConfigInvalid("coupling", "expected a mapping with 'separable' or 'matrix'")
    if "separable" in spec:
        factors = [serialize.model_from_mapping(m, "coupling.separable") for m in spec["separable"]]
        return multitime.TensorHamiltonian.separable(*factors)
    if "matrix" in spec:
        dims = tuple(int(d) for d in spec.get("dims", ()))
        if not dims:
            raise ConfigInvalid("coupling", "general coupling needs 'dims'")
        rows = [_complex_entries(row, "coupling.matrix") for row in spec["matrix"]]
        try:
            return multitime.TensorHamiltonian.general(rows, dims)
        except OntocaError as exc:
            raise ConfigInvalid("coupling.matrix", str(exc)) from None
    raise ConfigInvalid("coupling", "expected 'separable' or 'matrix'")


def cmd_multitime(args) -> int:
    config = _load_config(args, "multitime")
    mode = config.get("mode")
    if mode not in ("line", "diagonal", "second_order", "first_order"):
        raise ConfigInvalid("mode", f"unknown multitime mode {mode!r}")
    coupling = _resolve_coupling(config)
    d1, d2 = coupling.dims if len(coupling.dims) == 2 else (coupling.total_dim, 1)

    if mode in ("line", "diagonal"):
        field_path = config.get("initial_field")
        if not isinstance(field_path, str):
            raise ConfigInvalid("initial_field", "expected a CSV file path")
        if not os.path.exists(field_path):
            raise ConfigInvalid(field_path, "file does not exist")
        with open(field_path) as fh:
            field = serialize.parse_field_csv(fh.read(), (d1, d2))

    residual_ok = True
    if mode == "line":
        steps = int(config.get("steps", 1))
        axis = config.get("axis", "n1")
        direction = int(config.get("direction", 1))
        periodic = bool(config.get("periodic", False))
        accumulated = field
        current = field
        for _ in range(steps):
            current = multitime.propagate_line(current, coupling, axis, direction, periodic)
            accumulated = accumulated.union(current)
        for point in multitime.interior_points(accumulated):
            res = multitime.equation_residual(accumulated, coupling, point)
            residual_ok = residual_ok and all(r.is_zero() for r in res)
        export = accumulated
        summary = f"lines+{steps}"
    elif mode == "diagonal":
        extra_point = tuple(int(x) for x in config.get("extra_point", ()))
        if len(extra_point) != 2:
            raise ConfigInvalid("extra_point", "expected [n1, n2]")
        extra_value = _complex_entries(config.get("extra_value", []), "extra_value")
        stepped = multitime.propagate_diagonal(field, coupling, extra_point, extra_value)
        merged = field.union(stepped)
        for point in multitime.interior_points(merged):
            res = multitime.equation_residual(merged, coupling, point)
            residual_ok = residual_ok and all(r.is_zero() for r in res)
        export = merged
        summary = f"diagonal seed={extra_point}"
    else:
        steps = int(config.get("steps", 4))
        if mode == "second_order":
            prev = serialize.vector_from_config(_require(config, "prev"), "prev")
            curr = serialize.vector_from_config(_require(config, "curr"), "curr")
            states = [multitime.as_exact_vector(prev, coupling.total_dim),
                      multitime.as_exact_vector(curr, coupling.total_dim)]
            for _ in range(steps):
                states.append(multitime.sync_second_order(states[-2], states[-1], coupling))
        else:
            start = serialize.vector_from_config(_require(config, "state"), "state")
            run = multitime.sync_first_order(
                start, coupling, steps, direction=int(config.get("direction", 1))
            )
            states = list(run.states)
        export = multitime.MultiTimeField(
            (d1, d2), {(n, n): vec for n, vec in enumerate(states)}
        )
        summary = f"{mode} steps={steps}"

    out = _write_out(config, serialize.field_csv(export), "multitime.csv")
    print(
        f"multitime: {summary} points={len(export.points())} residuals_zero={residual_ok} out={out}"
    )
    return EXIT_OK if residual_ok else EXIT_INVARIANT


def _resolve_topology(config: dict, args) -> ising.GraphTopology:
    spec = config.get("topology")
    if getattr(args, "topology", None):
        spec = args.topology
    if spec is None:
        raise ConfigInvalid("topology", "no topology given")
    if isinstance(spec, str):
        return serialize.load_topology_file(spec)
    return serialize.topology_from_mapping(spec)


def cmd_ising_a(args) -> int:
    config = _load_config(args, "ising-a")
    topology = _resolve_topology(config, args)
    schedule_spec = config.get("schedule")
    if isinstance(schedule_spec, str):
        schedule = serialize.load_schedule_file(schedule_spec)
    elif isinstance(schedule_spec, dict):
        schedule = serialize.schedule_from_mapping(schedule_spec)
    else:
        raise ConfigInvalid("schedule", "no schedule given")
    start = ising.SpinConfiguration.from_strings(
        config.get("start", "0" * topology.n_vertices)
    )
    steps = int(config.get("steps", 8))
    run = ising.model_a_evolve(topology, start, schedule, steps)

    composed = ising.PhasedPermutation.identity(1 << topology.n_vertices)
    for n in range(steps):
        edge, sign = schedule.active(n)
        composed = ising.model_a_step_operator(topology, edge, sign).compose_after(composed)
    target, phase = composed.apply(start.basis_index)
    ok = target == run[-1][0].basis_index and phase == run[-1][1]

    rows = [
        (n, conf.vertex_string, "", ph) for n, (conf, ph) in enumerate(run)
    ]
    out = _write_out(config, serialize.spin_trajectory_csv(rows), "ising_a.csv")
    print(
        f"ising-a: vertices={topology.n_vertices} steps={steps} "
        f"composition_ok={ok} out={out}"
    )
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_ising_b(args) -> int:
    config = _load_config(args, "ising-b")
    topology = _resolve_topology(config, args)
    start_cfg = config.get("start", {})
    vertex = start_cfg.get("vertices", "0" * topology.n_vertices)
    edge = start_cfg.get("edges", "0" * topology.n_edges)
    start = ising.SpinConfiguration.from_strings(vertex, edge)
    steps = int(config.get("steps", 8))

    rule_spec = config.get("edge_rule", "frozen")
    if rule_spec == "frozen":
        rule = ising.frozen_edges_rule(topology)
    elif rule_spec == "cyclic":
        rule = ising.cyclic_edge_shift_rule(topology)
    elif isinstance(rule_spec, dict) and "seeded_random" in rule_spec:
        rule = ising.seeded_edge_permutation_rule(topology, int(rule_spec["seeded_random"]))
    else:
        raise ConfigInvalid("edge_rule", f"unknown edge rule {rule_spec!r}")

    transfer = ising.model_b_transfer(topology)
    combined = ising.edge_update_compose(transfer, rule, topology)
    unitary = combined.is_unitary()
    exp_dev = None
    if topology.total_bits <= 12:
        exp_dev = ising.verify_exponential_form(topology)

    rows = []
    index, phase = start.basis_index, 0
    for n in range(steps + 1):
        conf = ising.SpinConfiguration.from_index(index, topology.n_vertices, topology.n_edges)
        rows.append((n, conf.vertex_string, conf.edge_string, phase))
        index, ph = combined.apply(index)
        phase = (phase + ph) % 4
    out = _write_out(config, serialize.spin_trajectory_csv(rows), "ising_b.csv")
    ok = unitary and (exp_dev is None or exp_dev <= 1e-9)
    exp_text = "skipped" if exp_dev is None else f"{exp_dev:.3e}"
    print(
        f"ising-b: bits={topology.total_bits} steps={steps} unitary={unitary} "
        f"exponential_dev={exp_text} out={out}"
    )
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_gup(args) -> int:
    config = _load_config(args, "gup")
    sites = int(getattr(args, "sites", None) or config.get("sites", 64))
    scale = DiscretenessScale(float(getattr(args, "scale", None) or config.get("scale", 1.0)))
    boundary = getattr(args, "boundary", None) or config.get("boundary", "periodic")
    samples = int(getattr(args, "samples", None) or config.get("samples", 1000))
    seed = int(config.get("seed", 0))
    widths = config.get("widths") or [w for w in (4, 6, 8, 12, 16) if w <= sites / 8]
    if not widths:
        raise ConfigInvalid("widths", f"no admissible widths for {sites} sites")

    x = gup.position_operator(sites, scale, boundary)
    p = gup.momentum_operator(sites, scale, boundary)
    violations = 0
    deformed_holds = 0
    for state in gup.random_states(sites, samples, seed):
        if not gup.robertson_check(state, x, p).holds:
            violations += 1
        if gup.gup_bound_report(state, scale, boundary).satisfies_deformed_bound:
            deformed_holds += 1

    family = gup.minimize_delta_x(scale, widths, sites, boundary)
    sharp = gup.gup_bound_report(gup.single_site_state(sites, 0), scale, boundary)

    doc = {
        "schema_version": serialize.SCHEMA_VERSION,
        "kind": "gup",
        "sites": sites,
        "scale": scale.l,
        "boundary": boundary,
        "samples": samples,
        "seed": seed,
        "robertson_violations": violations,
        "paper_bound_holds_fraction": deformed_holds / samples if samples else 0.0,
        "realized_min_dx": family.realized_min_dx,
        "bound_min_dx": family.bound_min_dx,
        "best_tightness": family.best_tightness,
        "family": [
            {
                "width": m.width,
                "delta_x": m.delta_x,
                "delta_p": m.delta_p,
                "product": m.lhs,
                "deformed_rhs": m.deformed_rhs,
                "robertson_rhs": m.robertson_rhs,
                "satisfies_deformed_bound": m.satisfies_deformed_bound,
            }
            for m in family.members
        ],
        "sharp_state_counterexample": {
            "product": sharp.lhs,
            "deformed_rhs": sharp.deformed_rhs,
            "satisfies_deformed_bound": sharp.satisfies_deformed_bound,
        },
    }
    out = _write_out(config, serialize.dumps_json(doc), "gup.json")
    ok = violations == 0
    print(
        f"gup: sites={sites} samples={samples} robertson_violations={violations} "
        f"bound_min_dx={family.bound_min_dx:.12g} out={out}"
    )
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_verify_all(args) -> int:
    config = _load_config(args, "verify-all")
    seed = int(config.get("seed", 0))
    report = verify.run_all(seed)
    text = serialize.dumps_json(report)
    out = config.get("out")
    if out:
        serialize.atomic_write_text(out, text)
    else:
        sys.stdout.write(text)
    passed = sum(1 for c in report["checks"] if c["passed"])
    total = len(report["checks"])
    print(f"verify-all: seed={seed} passed={passed}/{total} all_passed={report['all_passed']}"
          + (f" out={out}" if out else ""))
    return EXIT_OK if report["all_passed"] else EXIT_INVARIANT


# =============================================================================
# Parser
# =============================================================================


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ontoca",
        description="Exact integer-arithmetic cellular-automaton experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_steps=True):
        p.add_argument("config", nargs="?", help="JSON experiment config")
        p.add_argument("--seed", type=int, default=None)
        if with_steps:
            p.add_argument("--steps", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=("csv", "json"), default=None)

    p = sub.add_parser("evolve", help="exact trajectory of a single model")
    add_common(p)
    p.add_argument("--preset", choices=ontology.preset_names())
    p.set_defaults(handler=cmd_evolve)

    p = sub.add_parser("dispersion", help="eigenfrequency table and stationary-mode check")
    add_common(p, with_steps=False)
    p.add_argument("--preset", choices=ontology.preset_names())
    p.set_defaults(handler=cmd_dispersion)

    p = sub.add_parser("ontology-scan", help="detect permutation-with-phase dynamics")
    add_common(p, with_steps=False)
    p.add_argument("--preset", choices=ontology.preset_names())
    p.set_defaults(handler=cmd_ontology_scan)

    p = sub.add_parser("multitime", help="two-time field propagation modes")
    add_common(p)
    p.set_defaults(handler=cmd_multitime)

    p = sub.add_parser("ising-a", help="externally scheduled pair flips")
    add_common(p)
    p.add_argument("--topology", help="topology JSON file")
    p.set_defaults(handler=cmd_ising_a)

    p = sub.add_parser("ising-b", help="edge-gated transfer dynamics")
    add_common(p)
    p.add_argument("--topology", help="topology JSON file")
    p.set_defaults(handler=cmd_ising_b)

    p = sub.add_parser("gup", help="lattice uncertainty reports")
    add_common(p, with_steps=False)
    p.add_argument("--sites", type=int)
    p.add_argument("--scale", type=float)
    p.add_argument("--boundary", choices=("periodic", "open"))
    p.add_argument("--samples", type=int)
    p.set_defaults(handler=cmd_gup)

    p = sub.add_parser("verify-all", help="run the full invariant battery")
    add_common(p, with_steps=False)
    p.set_defaults(handler=cmd_verify_all)

    return parser


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OntocaError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
