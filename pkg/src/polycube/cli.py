"""Command-line interface: init, optimize, evaluate, mutate, export-viz.

Every option can also be set through an environment variable with the
POLYCUBE prefix (e.g. POLYCUBE_OPTIMIZE_SEED for `optimize --seed`).
Exit codes: 0 = pseudo-valid result, 2 = completed with validity > 0,
1 = I/O or precondition failure.
"""

import csv
import json
import os
import sys
import time

import click
import numpy as np

from . import __version__, kernels
from .errors import PolycubeError
from .evolution import GAConfig, run_evolution
from .fitness import FitnessWeights, evaluate_labeling, full_metrics
from .graphcut import graphcut_initial_labeling
from .labeling import naive_normal_labeling, read_labeling, write_labeling
from .labels import LABEL_COLORS
from .mesh import extract_boundary
from .meshio import load_surface, load_tet_medit, write_obj, write_ply_face_colors
from .mutations import (
    MUTATION_KINDS,
    random_mutation,
    repair_high_valency_corner,
    repair_opposite_boundary,
)
from .charts import detect_turning_points, extract_charts

EXIT_INVALID = 2


def load_any_mesh(path, fmt=None):
    """Surface from OBJ/STL/PLY, or the boundary of a MEDIT tet mesh."""
    if fmt is None:
        fmt = os.path.splitext(path)[1].lstrip(".").lower()
    if fmt in ("mesh", "medit"):
        return extract_boundary(load_tet_medit(path))
    return load_surface(path, fmt)


def _fail(message):
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__)
def cli():
    """Polycube labelings of triangle surface meshes."""


_weight_options = [
    click.option("--w1", default=1.0e2, show_default=True, help="workability weight"),
    click.option("--w2", default=1.0e-2, show_default=True, help="fidelity weight"),
    click.option("--w3", default=1.0e-2, show_default=True, help="compactness weight"),
]


def add_options(options):
    def wrap(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn
    return wrap


@cli.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--ratio", default=3.0, show_default=True,
              help="unary/binary weight ratio of the graph-cut")
@click.option("--fmt", default=None, help="input format override (obj/stl/ply/mesh)")
@click.option("--output", "-o", default=None, help="labeling file to write")
@click.option("--report", default=None, help="JSON report path")
@add_options(_weight_options)
def init(input_path, ratio, fmt, output, report, w1, w2, w3):
    """Graph-cut initial labeling plus deterministic repairs."""
    try:
        mesh = load_any_mesh(input_path, fmt)
        weights = FitnessWeights(w1, w2, w3)
        labeling = graphcut_initial_labeling(mesh, ratio)
        labeling = repair_opposite_boundary(mesh, labeling, weights, gen=0)
        labeling = repair_high_valency_corner(mesh, labeling, weights, gen=0)
        metrics = full_metrics(mesh, labeling, weights)
        out = output or _default_out(input_path, "_init.labels.txt")
        write_labeling(out, labeling)
    except PolycubeError as exc:
        _fail(exc)
    click.echo(f"wrote {out}  v_p={metrics['v_p']} total={metrics['total']:.4f}")
    if report:
        _write_json(report, metrics)
    sys.exit(0 if metrics["v_p"] == 0 else EXIT_INVALID)


def _default_out(input_path, suffix):
    stem = os.path.splitext(os.path.basename(input_path))[0]
    return stem + suffix


@cli.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--labeling", "labeling_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="start from this labeling instead of the graph-cut")
@click.option("--fmt", default=None, help="input format override")
@click.option("--ratio", default=3.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--generations", default=40, show_default=True)
@click.option("--population", default=100, show_default=True)
@click.option("--crossovers", default=10, show_default=True)
@click.option("--archive-size", default=100, show_default=True)
@click.option("--stall-limit", default=3, show_default=True)
@click.option("--threads", default=1, show_default=True)
@click.option("--output-dir", "-d", default=".", show_default=True)
@click.option("--quiet", is_flag=True, default=False)
@add_options(_weight_options)
def optimize(input_path, labeling_path, fmt, ratio, seed, generations, population,
             crossovers, archive_size, stall_limit, threads, output_dir, quiet,
             w1, w2, w3):
    """Optimize a labeling with the genetic loop; retry at ratio/3 on failure."""
    times = {}
    t_start = time.perf_counter()
    try:
        mesh = load_any_mesh(input_path, fmt)
        times["load_s"] = time.perf_counter() - t_start
        cfg = GAConfig(
            population=population, crossovers=crossovers, generations=generations,
            stall_limit=stall_limit, archive_capacity=archive_size,
            weights=FitnessWeights(w1, w2, w3), seed=seed, threads=threads,
            graphcut_ratio=ratio,
        )

        def progress(row):
            if not quiet:
                click.echo(
                    f"gen {row['generation']:3d}  best {row['best_total']:.6g}  "
                    f"v_p {row['v_p']}  archive {row['archive_size']}"
                )

        def attempt(attempt_ratio):
            t0 = time.perf_counter()
            if labeling_path is not None:
                start = read_labeling(labeling_path, mesh.n_triangles)
            else:
                start = graphcut_initial_labeling(mesh, attempt_ratio)
            t1 = time.perf_counter()
            best, history = run_evolution(mesh, start, cfg, on_generation=progress)
            t2 = time.perf_counter()
            return best, history, {"init_s": t1 - t0, "evolution_s": t2 - t1}

        attempts = []
        best, history, stage = attempt(ratio)
        attempts.append({"ratio": ratio, "v_p": best.fitness.validity,
                         "total": best.fitness.total, "generations": len(history)})
        times.update(stage)
        retried = False
        if best.fitness.validity > 0 and labeling_path is None:
            retried = True
            if not quiet:
                click.echo(f"v_p={best.fitness.validity} > 0; retrying at ratio {ratio / 3.0}")
            best2, history2, stage2 = attempt(ratio / 3.0)
            attempts.append({"ratio": ratio / 3.0, "v_p": best2.fitness.validity,
                             "total": best2.fitness.total, "generations": len(history2)})
            times["retry_init_s"] = stage2["init_s"]
            times["retry_evolution_s"] = stage2["evolution_s"]
            if (best2.fitness.validity, best2.fitness.total) < (best.fitness.validity, best.fitness.total):
                best, history = best2, history2

        os.makedirs(output_dir, exist_ok=True)
        stem = os.path.splitext(os.path.basename(input_path))[0]
        labeling_out = os.path.join(output_dir, stem + ".labels.txt")
        history_out = os.path.join(output_dir, stem + "_history.csv")
        manifest_out = os.path.join(output_dir, stem + "_manifest.json")
        write_labeling(labeling_out, best.labeling)
        with open(history_out, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=[
                "generation", "best_total", "v_p", "e_w", "e_f", "e_c", "archive_size",
            ])
            writer.writeheader()
            writer.writerows(history)
        metrics = full_metrics(mesh, best.labeling, cfg.weights)
        times["total_s"] = time.perf_counter() - t_start
        manifest = {
            "tool_version": __version__,
            "kernel_backend": kernels.BACKEND,
            "input": os.path.abspath(input_path),
            "format": fmt or os.path.splitext(input_path)[1].lstrip(".").lower(),
            "mesh": {"vertices": mesh.n_vertices, "triangles": mesh.n_triangles},
            "config": {
                "population": population, "crossovers": crossovers,
                "generations": generations, "stall_limit": stall_limit,
                "archive_size": archive_size, "seed": seed, "threads": threads,
                "weights": [w1, w2, w3], "graphcut_ratio": ratio,
            },
            "initial_labeling": os.path.abspath(labeling_path) if labeling_path else None,
            "retried": retried,
            "attempts": attempts,
            "output_dir": os.path.abspath(output_dir),
            "final_metrics": metrics,
            "times": times,
        }
        _write_json(manifest_out, manifest)
    except PolycubeError as exc:
        _fail(exc)
    click.echo(
        f"wrote {labeling_out}  v_p={metrics['v_p']} total={metrics['total']:.6g}"
        + (" (after retry)" if retried else "")
    )
    sys.exit(0 if metrics["v_p"] == 0 else EXIT_INVALID)


@cli.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("labeling_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--fmt", default=None, help="input format override")
@click.option("--report", default=None, help="write the JSON report here too")
@add_options(_weight_options)
def evaluate(input_path, labeling_path, fmt, report, w1, w2, w3):
    """Full metrics report of a labeling file."""
    try:
        mesh = load_any_mesh(input_path, fmt)
        labeling = read_labeling(labeling_path, mesh.n_triangles)
        metrics = full_metrics(mesh, labeling, FitnessWeights(w1, w2, w3))
    except PolycubeError as exc:
        _fail(exc)
    click.echo(json.dumps(metrics, indent=2))
    if report:
        _write_json(report, metrics)
    sys.exit(0 if metrics["v_p"] == 0 else EXIT_INVALID)


@cli.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("labeling_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--kind", type=click.Choice(("random",) + MUTATION_KINDS),
              default="random", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--gen", default=1, show_default=True, help="stamp for changed faces")
@click.option("--ratio", default=3.0, show_default=True)
@click.option("--fmt", default=None)
@click.option("--output", "-o", default=None)
def mutate(input_path, labeling_path, kind, seed, gen, ratio, fmt, output):
    """Apply one mutation at a random location (debugging aid)."""
    try:
        mesh = load_any_mesh(input_path, fmt)
        labeling = read_labeling(labeling_path, mesh.n_triangles)
        graph = extract_charts(mesh, labeling)
        tps = detect_turning_points(mesh, graph)
        rng = np.random.default_rng(seed)
        forced = None if kind == "random" else MUTATION_KINDS.index(kind)
        mutated = random_mutation(mesh, labeling, graph, tps, rng, gen, ratio,
                                  kind=forced)
        out = output or _default_out(labeling_path, f".{kind}.txt")
        write_labeling(out, mutated)
    except PolycubeError as exc:
        _fail(exc)
    changed = int(np.sum(mutated.labels != labeling.labels))
    click.echo(f"wrote {out}  changed_faces={changed}")
    sys.exit(0)


@cli.command("export-viz")
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("labeling_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--fmt", default=None)
@click.option("--ply", "ply_out", default=None, help="colored labeling PLY path")
@click.option("--obj", "obj_out", default=None, help="fast polycube OBJ path")
def export_viz(input_path, labeling_path, fmt, ply_out, obj_out):
    """Colored-labeling PLY and fast-polycube OBJ for external viewers."""
    try:
        mesh = load_any_mesh(input_path, fmt)
        labeling = read_labeling(labeling_path, mesh.n_triangles)
        report = evaluate_labeling(mesh, labeling)
        ply_out = ply_out or _default_out(labeling_path, ".labels.ply")
        obj_out = obj_out or _default_out(labeling_path, ".polycube.obj")
        colors = LABEL_COLORS[report.smoothed.labels]
        write_ply_face_colors(ply_out, mesh.vertices, mesh.triangles, colors)
        if report.polycube is not None:
            positions = report.polycube.positions
        else:
            click.echo("polycube solve failed; exporting input positions", err=True)
            positions = mesh.vertices
        write_obj(obj_out, positions, mesh.triangles)
    except PolycubeError as exc:
        _fail(exc)
    click.echo(f"wrote {ply_out} and {obj_out}")
    sys.exit(0)


def main():
    cli(auto_envvar_prefix="POLYCUBE")


if __name__ == "__main__":
    main()
