"""Command-line interface.

One command per pipeline: compress, denoise, encrypt/decrypt,
learn-transform, learn-orders, analyze-correlation, sensitivity,
selftest. Module errors surface as structured JSON on stderr with a
nonzero exit code; configuration precedence is CLI flags > config file
> built-in defaults.
"""

import functools
import json
import sys

import click
import numpy as np

from . import crypto, spectral
from .compression import block_compress_image, compress, compress_adapted, grid_search_orders
from .data_io import load_image, load_signal_csv, save_image
from .denoise import block_denoise_image, psnr_db, quality_report, snr_db
from .errors import InvalidParameterError, MpgfrftError
from .graphs import build_random_sensor_graph, load_graph_csv, shift_operator
from .learn import TrainConfig, train_compression_orders, train_order_and_filter, train_transform_layers
from .selftest import run_selftest
from .validation import expand_blocks

KIND_ALIASES = {
    "i": spectral.KIND_I,
    "ii": spectral.KIND_II,
    "gfrft": spectral.KIND_GFRFT,
    spectral.KIND_I: spectral.KIND_I,
    spectral.KIND_II: spectral.KIND_II,
}


def _resolve_kind(kind):
    if kind not in KIND_ALIASES:
        raise InvalidParameterError(f"unknown kind {kind!r} (expected i, ii, or gfrft)")
    return KIND_ALIASES[kind]


def _emit(report, output_format, path=None):
    """Write a report dict as JSON or tidy CSV to a path or stdout."""
    if output_format == "json":
        text = json.dumps(report, indent=2, default=float)
    else:
        lines = ["key,value"]
        def flatten(prefix, obj):
            if isinstance(obj, dict):
                for k, v in obj.items():
                    flatten(f"{prefix}{k}." if isinstance(v, (dict, list)) else f"{prefix}{k}", v)
            elif isinstance(obj, list):
                for i, v in enumerate(obj):
                    flatten(f"{prefix}{i}." if isinstance(v, (dict, list)) else f"{prefix}{i}", v)
            else:
                lines.append(f"{prefix},{obj}")
        flatten("", report)
        text = "\n".join(lines)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


def handle_errors(fn):
    """Convert package errors into structured JSON on stderr + exit 1."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except MpgfrftError as exc:
            payload = {"error": type(exc).__name__, "message": str(exc)}
            click.echo(json.dumps(payload), err=True)
            sys.exit(1)
        except OSError as exc:
            payload = {"error": "IOError", "message": str(exc)}
            click.echo(json.dumps(payload), err=True)
            sys.exit(1)

    return wrapper


@click.group()
@click.option("--seed", type=int, default=0, show_default=True, help="Global random seed.")
@click.option("--threads", type=int, default=1, show_default=True, help="Worker threads (advisory).")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="JSON config file with per-command default options.")
@click.option("--output-format", type=click.Choice(["json", "csv"]), default="json",
              show_default=True, help="Report serialization format.")
@click.pass_context
def main(ctx, seed, threads, config_path, output_format):
    """Multiple-parameter fractional graph transforms: compression,
    denoising, and chaotic image encryption pipelines."""
    if config_path:
        with open(config_path) as fh:
            ctx.default_map = json.load(fh)
    ctx.obj = {"seed": seed, "threads": threads, "output_format": output_format}


def _load_first_signal(path):
    table = load_signal_csv(path)
    return table.column(0)


def _graph_basis_for(n, seed, graph_path=None, gso="adjacency"):
    g = load_graph_csv(graph_path) if graph_path else build_random_sensor_graph(n, seed=seed)
    return spectral.gft_basis(shift_operator(g, gso))


@main.command("compress")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True),
              help="Signal CSV (first column used) or PNG/PPM image.")
@click.option("--ratio", type=float, required=True, help="Compression ratio r in (0, 1].")
@click.option("--method", type=click.Choice(["adapted", "fixed", "grid", "learned"]),
              default="adapted", show_default=True)
@click.option("--kind", default="i", show_default=True, help="Transform kind: i, ii, or gfrft.")
@click.option("--blocks", type=int, default=8, show_default=True,
              help="Image block size, or order blocks for grid/learned signals.")
@click.option("--orders", default=None, help="Comma-separated block orders for --method fixed.")
@click.option("--graph", "graph_path", type=click.Path(exists=True), default=None,
              help="Adjacency CSV; omitted: random sensor graph.")
@click.option("--epochs", type=int, default=500, show_default=True)
@click.option("--lr", type=float, default=0.005, show_default=True)
@click.option("--report", "report_path", type=click.Path(), default=None)
@click.option("--output", "output_path", type=click.Path(), default=None,
              help="Where to write the reconstruction (CSV or image).")
@click.pass_obj
@handle_errors
def compress_cmd(obj, input_path, ratio, method, kind, blocks, orders, graph_path,
                 epochs, lr, report_path, output_path):
    """Compress a signal or image by spectral truncation."""
    kind = _resolve_kind(kind)
    seed = obj["seed"]
    is_image = input_path.lower().endswith((".png", ".ppm"))
    if is_image:
        img = load_image(input_path)
        method_map = {"adapted": "adapted", "fixed": "fixed_operator", "learned": "learned"}
        if method == "grid":
            raise InvalidParameterError("grid search is signal-only; use fixed/adapted/learned")
        ovec = None if orders is None else [float(v) for v in orders.split(",")]
        cfg = TrainConfig(learning_rate=lr, epochs=epochs, seed=seed)
        out, rep = block_compress_image(
            img, blocks, ratio, method=method_map[method], seed=seed, kind=kind,
            orders=ovec, train_cfg=cfg,
        )
        if output_path:
            save_image(out, output_path)
        _emit(rep.to_dict(), obj["output_format"], report_path)
        return

    x = _load_first_signal(input_path)
    n = x.shape[0]
    if method == "adapted":
        x_com, rep = compress_adapted(x, ratio, seed=seed)
    else:
        basis = _graph_basis_for(n, seed, graph_path)
        if method == "fixed":
            if orders is None:
                raise InvalidParameterError("--method fixed needs --orders")
            a = expand_blocks([float(v) for v in orders.split(",")], n)
            op = spectral.build_operator(basis, kind, a)
            x_com, rep = compress(op.matrix, spectral.inverse_operator_matrix(op), x, ratio)
        elif method == "grid":
            best, rep = grid_search_orders(basis, kind, x, ratio, blocks)
            a = expand_blocks(best, n)
            op = spectral.build_operator(basis, kind, a)
            x_com, _ = compress(op.matrix, spectral.inverse_operator_matrix(op), x, ratio)
        else:  # learned
            cfg = TrainConfig(learning_rate=lr, epochs=epochs, seed=seed)
            res = train_compression_orders(basis, kind, x, ratio, np.full(n, 0.5), cfg)
            op = spectral.build_operator(basis, kind, res.final_orders)
            x_com, rep = compress(op.matrix, spectral.inverse_operator_matrix(op), x, ratio)
    if output_path:
        np.savetxt(output_path, np.real(x_com), delimiter=",", fmt="%.17g")
    _emit(rep.to_dict(), obj["output_format"], report_path)


@main.command("denoise")
@click.option("--noisy", "noisy_path", required=True, type=click.Path(exists=True))
@click.option("--clean", "clean_path", type=click.Path(exists=True), default=None,
              help="Clean reference (required for learned mode).")
@click.option("--block", type=int, default=8, show_default=True)
@click.option("--knn", type=int, default=4, show_default=True)
@click.option("--epochs", type=int, default=300, show_default=True)
@click.option("--lr", type=float, default=0.005, show_default=True)
@click.option("--kind", default="i", show_default=True)
@click.option("--sparsity", type=int, default=32, show_default=True,
              help="Ideal low-pass passband width per block.")
@click.option("--mode", type=click.Choice(["fixed", "learned"]), default="learned",
              show_default=True)
@click.option("--report", "report_path", type=click.Path(), default=None)
@click.option("--output", "output_path", type=click.Path(), default=None)
@click.pass_obj
@handle_errors
def denoise_cmd(obj, noisy_path, clean_path, block, knn, epochs, lr, kind, sparsity,
                mode, report_path, output_path):
    """Denoise an image with per-block spectral filtering."""
    kind = _resolve_kind(kind)
    noisy = load_image(noisy_path).astype(float)
    clean = load_image(clean_path).astype(float) if clean_path else None
    cfg = TrainConfig(learning_rate=lr, epochs=epochs, seed=obj["seed"])
    out = block_denoise_image(
        noisy, block, kind, sparsity, mode=mode, train_cfg=cfg, knn=knn, clean=clean
    )
    if output_path:
        save_image(out, output_path)
    if clean is not None:
        rep = quality_report(clean, out, image=True).to_dict()
    else:
        rep = {"snr_db_vs_noisy": snr_db(noisy.ravel(), out.ravel()),
               "psnr_db_vs_noisy": psnr_db(noisy, out)}
    _emit(rep, obj["output_format"], report_path)


@main.command("encrypt")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--key", "key_path", required=True, type=click.Path(),
              help="Key JSON; generated (seeded) and written here if missing.")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--kind", default="i", show_default=True)
@click.pass_obj
@handle_errors
def encrypt_cmd(obj, in_path, key_path, out_path, kind):
    """Encrypt an RGB image into a spectral ciphertext."""
    import os

    img = load_image(in_path)
    if img.ndim == 2:
        img = np.stack([img] * 3, axis=-1)
    if os.path.exists(key_path):
        with open(key_path) as fh:
            key = crypto.CipherKey.from_json(fh.read())
    else:
        key = crypto.random_cipher_key(seed=obj["seed"], kind=_resolve_kind(kind))
        with open(key_path, "w") as fh:
            fh.write(key.to_json() + "\n")
    ct = crypto.encrypt_image(img, key)
    crypto.save_ciphertext(ct, out_path)
    click.echo(json.dumps({"groups": ct.data.size // key.group_size,
                           "padding": ct.padding,
                           "key_fingerprint": ct.key_fingerprint}))


@main.command("decrypt")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--key", "key_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--delta", type=float, default=0.0, show_default=True,
              help="Additive perturbation of the decryption orders.")
@handle_errors
def decrypt_cmd(in_path, key_path, out_path, delta):
    """Decrypt a ciphertext back to an image."""
    with open(key_path) as fh:
        key = crypto.CipherKey.from_json(fh.read())
    ct = crypto.load_ciphertext(in_path)
    orders = key.orders + delta if delta else None
    img = crypto.decrypt_image(ct, key, orders=orders)
    save_image(img, out_path)


@main.command("learn-transform")
@click.option("--nodes", type=int, default=20, show_default=True)
@click.option("--graph", "graph_path", type=click.Path(exists=True), default=None)
@click.option("--orders", required=True, help="Comma-separated target block orders.")
@click.option("--layers", type=int, default=1, show_default=True)
@click.option("--epochs", type=int, default=1000, show_default=True)
@click.option("--lr", type=float, default=0.005, show_default=True)
@click.option("--report", "report_path", type=click.Path(), default=None)
@click.pass_obj
@handle_errors
def learn_transform_cmd(obj, nodes, graph_path, orders, layers, epochs, lr, report_path):
    """Recover a target order vector with stacked learnable transforms."""
    seed = obj["seed"]
    basis = _graph_basis_for(nodes, seed, graph_path)
    n = basis.n
    a_ori = expand_blocks([float(v) for v in orders.split(",")], n)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    inits = [rng.uniform(0.2, 0.8, n) for _ in range(layers)]
    cfg = TrainConfig(learning_rate=lr, epochs=epochs, seed=seed)
    res = train_transform_layers(basis, x, a_ori, inits, cfg)
    _emit(json.loads(res.to_json()), obj["output_format"], report_path)


@main.command("learn-orders")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True),
              help="Signal CSV; column 0 is the (noisy) input, column 1 the clean reference.")
@click.option("--task", type=click.Choice(["compress", "denoise"]), required=True)
@click.option("--kind", default="i", show_default=True)
@click.option("--ratio", type=float, default=0.3, show_default=True)
@click.option("--sparsity", type=int, default=None, help="Passband width for denoise.")
@click.option("--filter-mode", type=click.Choice(["ideal_K", "learnable"]), default="learnable",
              show_default=True)
@click.option("--graph", "graph_path", type=click.Path(exists=True), default=None)
@click.option("--epochs", type=int, default=500, show_default=True)
@click.option("--lr", type=float, default=0.005, show_default=True)
@click.option("--report", "report_path", type=click.Path(), default=None)
@click.pass_obj
@handle_errors
def learn_orders_cmd(obj, input_path, task, kind, ratio, sparsity, filter_mode,
                     graph_path, epochs, lr, report_path):
    """Learn an order vector for compression or denoising of a signal."""
    kind = _resolve_kind(kind)
    table = load_signal_csv(input_path)
    x = table.column(0)
    n = x.shape[0]
    basis = _graph_basis_for(n, obj["seed"], graph_path)
    cfg = TrainConfig(learning_rate=lr, epochs=epochs, seed=obj["seed"])
    if task == "compress":
        res = train_compression_orders(basis, kind, x, ratio, np.full(n, 0.5), cfg)
    else:
        if table.values.shape[1] < 2:
            raise InvalidParameterError("denoise task needs a clean reference in column 1")
        res = train_order_and_filter(
            basis, kind, x, table.column(1), filter_mode, np.full(n, 0.5), cfg,
            sparsity=sparsity,
        )
    _emit(json.loads(res.to_json()), obj["output_format"], report_path)


@main.command("analyze-correlation")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--pairs", type=int, default=5000, show_default=True)
@click.option("--report", "report_path", type=click.Path(), default=None)
@click.pass_obj
@handle_errors
def analyze_correlation_cmd(obj, in_path, pairs, report_path):
    """Adjacent-pixel correlation of an image in three directions."""
    img = load_image(in_path)
    rep = {
        d: crypto.adjacent_correlation(img, d, pairs=pairs, seed=obj["seed"])
        for d in ("horizontal", "vertical", "diagonal")
    }
    rep.update(pairs=pairs, seed=obj["seed"])
    _emit(rep, obj["output_format"], report_path)


@main.command("sensitivity")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--key", "key_path", required=True, type=click.Path(exists=True))
@click.option("--delta-range", default="-0.6:0.6:0.05", show_default=True,
              help="Sweep grid start:stop:step.")
@click.option("--report", "report_path", type=click.Path(), default=None)
@click.pass_obj
@handle_errors
def sensitivity_cmd(obj, in_path, key_path, delta_range, report_path):
    """MSE of decryption under perturbed order vectors."""
    img = load_image(in_path)
    if img.ndim == 2:
        img = np.stack([img] * 3, axis=-1)
    with open(key_path) as fh:
        key = crypto.CipherKey.from_json(fh.read())
    deltas = crypto.parse_delta_range(delta_range)
    points = crypto.sensitivity_sweep(img, key, deltas)
    rep = {"points": [{"delta": d, "mse": m} for d, m in points]}
    _emit(rep, obj["output_format"], report_path)


@main.command("selftest")
@handle_errors
def selftest_cmd():
    """Run the built-in invariant suites; exit 0 only if all pass."""
    failures = run_selftest()
    sys.exit(0 if failures == 0 else 1)


if __name__ == "__main__":
    main()
