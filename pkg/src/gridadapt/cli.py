"""Command line interface.

Subcommands: synth, adapt, dual, render, eval (sweep/recall), export-gdl.
Every run writes a manifest JSON next to its primary output with the fully
resolved configuration, so re-running a manifest reproduces outputs exactly.
"""
from __future__ import annotations

import functools
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import click
import numpy as np

from . import __version__
from .adapt import AdaptConfig, adapt_graph, load_result, save_result
from .dual import PAIRINGS, DualGraph, build_dual
from .evaluate import (
    RecallConfig,
    SweepConfig,
    average_over_node_counts,
    boundary_recall,
    plot_recall_curves,
    recall_sweep,
    write_csv,
)
from .export import FEATURE_MODES, gdl_record, write_jsonl
from .graph import TriangulationSpec, graph_stats, uniform_triangulation
from .image import Image, SyntheticShape, generate_synthetic, ground_truth_contour, load_image, save_image
from .render import BACKGROUNDS, RenderSpec, render_graph
from .salient import METHODS, DetectorConfig


def _write_manifest(output, subcommand: str, config: dict, inputs: list, outputs: list) -> None:
    manifest = {
        "tool": "gridadapt",
        "version": __version__,
        "subcommand": subcommand,
        "config": config,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
    }
    path = Path(str(output) + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True))


def _fail_on_error(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, OSError, KeyError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


@click.group()
@click.version_option(__version__)
def main():
    """Feature-adapted graphs and oversegmenting dual graphs from scalar images."""


@main.command()
@click.option("--shape", type=click.Choice([s.value for s in SyntheticShape]), required=True)
@click.option("--size", type=int, default=128, show_default=True, help="Pixels per axis.")
@click.option("--sigma", type=float, default=0.0, show_default=True,
              help="Gaussian noise std as a fraction of the max intensity.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--contour-out", type=click.Path(), default=None,
              help="Also write the ground-truth contour mask (0/255).")
@click.option("-o", "--output", type=click.Path(), required=True)
@_fail_on_error
def synth(shape, size, sigma, seed, contour_out, output):
    """Generate a synthetic binary test image with optional noise."""
    img = generate_synthetic(shape, size, sigma, seed)
    save_image(img, output)
    outputs = [output]
    if contour_out:
        mask = ground_truth_contour(shape, size)
        save_image(Image(mask.astype(np.float64) * 255.0), contour_out)
        outputs.append(contour_out)
    config = {"shape": shape, "size": size, "sigma": sigma, "seed": seed}
    _write_manifest(output, "synth", config, [], outputs)
    click.echo(f"wrote {output}")


def _detector_options(fn):
    fn = click.option("--method", type=click.Choice(METHODS), default="robust", show_default=True)(fn)
    fn = click.option("--lambda", "lam", type=float, default=0.4, show_default=True,
                      help="Trade-off weight between intensity and spatial terms.")(fn)
    fn = click.option("--samples", type=int, default=None,
                      help="Samples per edge (default: from edge length, clamped to [10, 30]).")(fn)
    fn = click.option("--norm", default="auto", show_default=True,
                      help="Intensity normalization constant, or 'auto' for the image range.")(fn)
    return fn


def _detector_config(method, lam, samples, norm) -> DetectorConfig:
    norm_val = "auto" if norm == "auto" else float(norm)
    return DetectorConfig(method=method, lam=lam, samples_per_edge=samples, intensity_norm=norm_val)


@main.command("adapt")
@click.option("--input", "input_path", type=click.Path(exists=True), required=True)
@click.option("--nodes", type=int, default=100, show_default=True, help="Requested node count K.")
@_detector_options
@click.option("--max-iter", type=int, default=10, show_default=True)
@click.option("--rmax", type=float, default=0.1, show_default=True,
              help="Residual threshold in pixels.")
@click.option("--clamp/--no-clamp", default=True, show_default=True,
              help="Clamp node positions to the image extent.")
@click.option("-o", "--output", type=click.Path(), required=True)
@_fail_on_error
def adapt_cmd(input_path, nodes, method, lam, samples, norm, max_iter, rmax, clamp, output):
    """Adapt a uniform triangulated graph to an image."""
    img = load_image(input_path)
    spec = TriangulationSpec(nodes, img.dims)
    lattice = uniform_triangulation(spec)
    detector = _detector_config(method, lam, samples, norm)
    cfg = AdaptConfig(max_iterations=max_iter, residual_threshold=rmax,
                      detector=detector, clamp_to_extent=clamp)
    result = adapt_graph(img, lattice, cfg)
    config = {
        "nodes_requested": nodes,
        "nodes_realized": spec.realized_node_count,
        "method": method,
        "lambda": lam,
        "samples": samples,
        "norm": norm,
        "max_iter": max_iter,
        "rmax": rmax,
        "clamp": clamp,
    }
    save_result(result, output, config=config)
    _write_manifest(output, "adapt", config, [input_path], [output])
    stats = graph_stats(result.graph)
    click.echo(
        f"wrote {output} ({stats['node_count']} nodes, {stats['edge_count']} edges, "
        f"{result.iterations} iterations, final residual {result.residual_history[-1]:.4g})"
    )


@main.command("dual")
@click.option("--input", "input_path", type=click.Path(exists=True), required=True,
              help="Adapted-graph JSON from the adapt subcommand.")
@click.option("--pairing", type=click.Choice(PAIRINGS), default="shared-face", show_default=True)
@click.option("-o", "--output", type=click.Path(), required=True)
@_fail_on_error
def dual_cmd(input_path, pairing, output):
    """Build the oversegmenting dual graph of an adapted graph."""
    result = load_result(input_path)
    d = build_dual(result, pairing)
    d.save(output)
    config = {"pairing": pairing}
    _write_manifest(output, "dual", config, [input_path], [output])
    click.echo(f"wrote {output} ({d.node_count} nodes, {d.edge_count} edges)")


@main.command("render")
@click.option("--image", "image_path", type=click.Path(exists=True), required=True)
@click.option("--graph", "graph_path", type=click.Path(exists=True), required=True,
              help="Adapted-graph or dual-graph JSON.")
@click.option("--lo", type=float, default=-15.0, show_default=True, help="log2 saliency at black.")
@click.option("--hi", type=float, default=0.0, show_default=True, help="log2 saliency at white.")
@click.option("--stroke-width", type=float, default=1.0, show_default=True)
@click.option("--background", type=click.Choice(BACKGROUNDS), default="image", show_default=True)
@click.option("--png", "png_path", type=click.Path(), default=None, help="Also write a raster PNG.")
@click.option("--dpi", type=int, default=100, show_default=True)
@click.option("-o", "--output", type=click.Path(), required=True, help="SVG output path.")
@_fail_on_error
def render_cmd(image_path, graph_path, lo, hi, stroke_width, background, png_path, dpi, output):
    """Render a graph or dual graph over its image, saliency-coded."""
    img = load_image(image_path)
    doc = json.loads(Path(graph_path).read_text())
    if doc.get("type") == "dual-graph":
        g = DualGraph.from_dict(doc)
    else:
        g = load_result(graph_path).graph
    spec = RenderSpec(log_range=(lo, hi), stroke_width=stroke_width, background=background)
    render_graph(img, g, spec, path=output, png_path=png_path, dpi=dpi)
    config = {"lo": lo, "hi": hi, "stroke_width": stroke_width,
              "background": background, "dpi": dpi}
    outputs = [output] + ([png_path] if png_path else [])
    _write_manifest(output, "render", config, [image_path, graph_path], outputs)
    click.echo(f"wrote {output}")


@main.group("eval")
def eval_group():
    """Boundary-recall evaluation."""


def _sweep_config_from_toml(path) -> SweepConfig:
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    table = doc.get("sweep", doc)
    kwargs = {}
    for key in ("shapes", "node_counts", "noise_sigmas", "seeds", "methods"):
        if key in table:
            kwargs[key] = tuple(table[key])
    for key in ("size", "lam", "samples_per_edge", "max_iterations", "residual_threshold"):
        if key in table:
            kwargs[key] = table[key]
    recall_kwargs = {}
    if "d_min" in table:
        recall_kwargs["d_min"] = float(table["d_min"])
    if "edt_lookup" in table:
        recall_kwargs["edt_lookup"] = table["edt_lookup"]
    if recall_kwargs:
        kwargs["recall"] = RecallConfig(**recall_kwargs)
    return SweepConfig(**kwargs)


@eval_group.command("sweep")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True,
              help="TOML sweep configuration ([sweep] table).")
@click.option("--out", "output", type=click.Path(), required=True, help="Long-format CSV output.")
@click.option("--figures/--no-figures", default=True, show_default=True,
              help="Also write recall-curve figures next to the CSV.")
@_fail_on_error
def sweep_cmd(config_path, output, figures):
    """Run a full factorial boundary-recall sweep."""
    cfg = _sweep_config_from_toml(config_path)
    curves = recall_sweep(cfg)
    averaged = average_over_node_counts(curves)
    write_csv(curves, output)
    avg_path = Path(output).with_name(Path(output).stem + "_kavg" + Path(output).suffix)
    write_csv(averaged, avg_path)
    outputs = [output, avg_path]
    if figures:
        fig_path = Path(output).with_suffix(".png")
        plot_recall_curves(curves, fig_path)
        outputs.append(fig_path)
    config = {
        "shapes": list(cfg.shapes),
        "node_counts": list(cfg.node_counts),
        "noise_sigmas": list(cfg.noise_sigmas),
        "seeds": list(cfg.seeds),
        "methods": list(cfg.methods),
        "size": cfg.size,
        "lam": cfg.lam,
        "samples_per_edge": cfg.samples_per_edge,
        "max_iterations": cfg.max_iterations,
        "residual_threshold": cfg.residual_threshold,
        "d_min": cfg.recall.d_min,
        "edt_lookup": cfg.recall.edt_lookup,
    }
    _write_manifest(output, "eval sweep", config, [config_path], outputs)
    click.echo(f"wrote {output} ({len(curves)} cells)")


@eval_group.command("recall")
@click.option("--dual", "dual_path", type=click.Path(exists=True), required=True)
@click.option("--contour", "contour_path", type=click.Path(exists=True), required=True,
              help="Ground-truth contour mask image (nonzero = contour).")
@click.option("--dmin", type=float, default=2.0, show_default=True)
@click.option("--edt-lookup", type=click.Choice(("bilinear", "nearest")), default="bilinear",
              show_default=True)
@click.option("--out", "output", type=click.Path(), required=True)
@_fail_on_error
def recall_cmd(dual_path, contour_path, dmin, edt_lookup, output):
    """Boundary recall of a dual graph against a contour mask."""
    d = DualGraph.load(dual_path)
    mask = load_image(contour_path).data > 0
    cfg = RecallConfig(d_min=dmin, edt_lookup=edt_lookup)
    curve = boundary_recall(d, mask, cfg, metadata={"dual": str(dual_path)})
    write_csv([curve], output)
    config = {"dmin": dmin, "edt_lookup": edt_lookup}
    _write_manifest(output, "eval recall", config, [dual_path, contour_path], [output])
    click.echo(f"wrote {output}")


def _label_from_name(path: Path) -> int:
    stem = path.stem
    head = stem.split("_", 1)[0]
    try:
        return int(head)
    except ValueError as exc:
        raise ValueError(f"cannot parse label from file name {path.name!r}") from exc


@main.command("export-gdl")
@click.argument("inputs", type=click.Path(exists=True), nargs=-1, required=True)
@click.option("--nodes", type=int, default=64, show_default=True)
@_detector_options
@click.option("--max-iter", type=int, default=10, show_default=True)
@click.option("--rmax", type=float, default=0.1, show_default=True)
@click.option("--features", type=click.Choice(FEATURE_MODES), default="both", show_default=True)
@click.option("--label", type=int, default=None, help="Class label applied to every record.")
@click.option("--label-from-name", is_flag=True,
              help="Parse the label from each file name's leading '<label>_' prefix.")
@click.option("-o", "--output", type=click.Path(), required=True, help="Line-delimited JSON output.")
@_fail_on_error
def export_gdl_cmd(inputs, nodes, method, lam, samples, norm, max_iter, rmax,
                   features, label, label_from_name, output):
    """Adapt graphs to one or more images and export them as a JSONL dataset."""
    detector = _detector_config(method, lam, samples, norm)
    cfg = AdaptConfig(max_iterations=max_iter, residual_threshold=rmax, detector=detector)

    def process(path_str):
        path = Path(path_str)
        img = load_image(path)
        lattice = uniform_triangulation(TriangulationSpec(nodes, img.dims))
        result = adapt_graph(img, lattice, cfg)
        lbl = _label_from_name(path) if label_from_name else label
        return gdl_record(result, img, features=features, label=lbl)

    workers = int(os.environ.get("GRIDADAPT_THREADS", "1"))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(process, inputs))
    else:
        records = []
        for i, path in enumerate(inputs, start=1):
            records.append(process(path))
            if i % 100 == 0:
                click.echo(f"processed {i}/{len(inputs)}", err=True)
    write_jsonl(records, output)
    config = {
        "nodes": nodes,
        "method": method,
        "lambda": lam,
        "samples": samples,
        "norm": norm,
        "max_iter": max_iter,
        "rmax": rmax,
        "features": features,
        "label": label,
        "label_from_name": label_from_name,
    }
    _write_manifest(output, "export-gdl", config, list(inputs), [output])
    click.echo(f"wrote {output} ({len(records)} records)")


if __name__ == "__main__":
    main()
