"""Command-line interface: info | embed | extract | simulate | bound.

Exit codes: 0 success, 1 usage error, 2 data/format error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    AttackModel,
    awgn_attack,
    distortion_saving_mc,
    mdqim_mse_lower_bound,
    metrics,
    qim_mse_theoretical,
)
from .coset import parse_code_spec
from .embed import decode_blocks, default_epsilon, embed_blocks
from .lattices import geometry
from .signal_io import (
    SignalBuffer,
    SignalFormatError,
    block_signal,
    pack_message,
    read_csv,
    read_wfdb_212,
    synthetic_ecg,
    unpack_message,
    write_signal,
)
from .simulate import (
    ExperimentConfig,
    dump_report,
    run_simulation,
    run_sweep,
    tightness_flag,
)


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="latticehide",
                     description="Lattice-based minimum-distortion data hiding")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_code(p):
        p.add_argument("--code", required=True,
                       help="code spec, e.g. Z:2, A2:2, E8:4, Z:J=matrix.txt")
        p.add_argument("--raw-basis", action="store_true",
                       help="keep the canonical basis instead of normalizing "
                            "the fine lattice to unit volume")

    p = sub.add_parser("info", help="print lattice geometry and coset structure")
    add_code(p)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("embed", help="embed a message into a cover signal")
    add_code(p)
    p.add_argument("--host", required=True,
                   help="csv:path | wfdb:hea[,ch] | uniform:lo,hi,count | ecg:count[,seed]")
    p.add_argument("--message", required=True,
                   help="path to a payload file, or random:<seed>[:<nbytes>]")
    p.add_argument("--method", choices=["qim", "mdqim"], default="mdqim")
    p.add_argument("--epsilon", default="auto")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="embedded signal CSV path")
    p.add_argument("--figure", help="optional host/embedded overlay figure path")

    p = sub.add_parser("extract", help="recover a payload from an embedded signal")
    p.add_argument("--in", dest="infile", required=True, help="embedded signal CSV")
    p.add_argument("--meta", help="sidecar path (default: <in>.meta.json)")
    p.add_argument("--out", required=True, help="recovered payload path")
    p.add_argument("--code", help="override the sidecar code spec (negative control)")

    p = sub.add_parser("simulate", help="run a reproducible paired simulation")
    add_code(p)
    p.add_argument("--method", choices=["qim", "mdqim", "both"], default="both")
    p.add_argument("--epsilon", default="auto")
    p.add_argument("--host", default="uniform:auto")
    p.add_argument("--message", default="random")
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--mc-trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="report JSON path (default: stdout)")
    p.add_argument("--sweep", help="alpha:v1,v2,... or sigma:v1,v2,...")
    p.add_argument("--series", help="CSV series output for sweeps; a matching "
                                    ".png figure is rendered alongside")

    p = sub.add_parser("bound", help="evaluate the theoretical distortion values")
    add_code(p)
    p.add_argument("--epsilon", default="0")
    p.add_argument("--mc-trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="JSON output path (default: stdout)")
    return parser


def _load_host_buffer(src: str, seed: int) -> SignalBuffer:
    if src.startswith("csv:"):
        return read_csv(src[len("csv:"):])
    if src.startswith("wfdb:"):
        parts = src[len("wfdb:"):].split(",")
        channel = int(parts[1]) if len(parts) > 1 else 0
        return read_wfdb_212(parts[0], channel=channel)
    if src.startswith("uniform:"):
        parts = src[len("uniform:"):].split(",")
        if len(parts) != 3:
            raise UsageError(f"bad host source {src!r}: expected uniform:lo,hi,count")
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        rng = np.random.default_rng(seed)
        return SignalBuffer(samples=rng.uniform(lo, hi, size=count),
                            sample_rate_hz=1.0, channel_label="uniform",
                            source={"format": "synthetic-uniform", "seed": seed})
    if src.startswith("ecg:"):
        parts = src[len("ecg:"):].split(",")
        count = int(parts[0])
        ecg_seed = int(parts[1]) if len(parts) > 1 else 0
        return synthetic_ecg(count, seed=ecg_seed)
    raise UsageError(f"unknown host source {src!r}")


def _bits_per_block(code) -> int:
    k = round(code.dimension * code.rate)
    if 2 ** k != code.payload:
        raise UsageError(
            f"payload M={code.payload} is not a power of two; byte-stream "
            "packing is unavailable for this code"
        )
    return k


def _cmd_info(args) -> int:
    code = parse_code_spec(args.code, unit_volume=not args.raw_basis)
    gf = geometry(code.fine)
    gc = geometry(code.coarse)
    doc = {
        "spec": args.code,
        "lattice": code.fine.kind,
        "dimension": code.dimension,
        "payload": code.payload,
        "rate_bits_per_dim": code.rate,
        "unit_volume": not args.raw_basis,
        "fine": {"cell_volume": gf.cell_volume, "min_distance": gf.min_distance,
                 "packing_radius": gf.packing_radius,
                 "second_moment": gf.second_moment},
        "coarse": {"cell_volume": gc.cell_volume, "min_distance": gc.min_distance,
                   "packing_radius": gc.packing_radius,
                   "second_moment": gc.second_moment},
        "representatives": code.representatives[:64].tolist(),
        "representatives_truncated": code.payload > 64,
    }
    if args.json:
        print(json.dumps(doc, indent=2, sort_keys=True))
        return 0
    print(f"code        {args.code}  (fine {code.fine.kind}, N={code.dimension})")
    print(f"payload M   {code.payload}")
    print(f"rate R      {code.rate:g} bits/dim")
    print(f"fine        vol={gf.cell_volume:.6g}  d_min={gf.min_distance:.6g}  "
          f"r_pack={gf.packing_radius:.6g}  G={gf.second_moment:.6f}")
    print(f"coarse      vol={gc.cell_volume:.6g}  d_min={gc.min_distance:.6g}  "
          f"r_pack={gc.packing_radius:.6g}  G={gc.second_moment:.6f}")
    print("representatives:")
    for i, d in enumerate(code.representatives[:64]):
        print(f"  d_{i} = {np.array2string(d, precision=6)}")
    if code.payload > 64:
        print(f"  ... ({code.payload - 64} more)")
    return 0


def _cmd_embed(args) -> int:
    code = parse_code_spec(args.code, unit_volume=not args.raw_basis)
    eps = default_epsilon(code) if args.epsilon == "auto" else float(args.epsilon)
    buffer = _load_host_buffer(args.host, args.seed)
    blocks, dropped = block_signal(buffer, code.dimension)
    k = _bits_per_block(code)
    capacity_bits = blocks.shape[0] * k

    if args.message.startswith("random:"):
        parts = args.message.split(":")
        msg_seed = int(parts[1])
        nbytes = int(parts[2]) if len(parts) > 2 else capacity_bits // 8
        payload = np.random.default_rng(msg_seed).integers(
            0, 256, size=nbytes, dtype=np.uint8).tobytes()
    else:
        with open(args.message, "rb") as fh:
            payload = fh.read()

    symbols = pack_message(payload, k)
    if symbols.size > blocks.shape[0]:
        raise DataError(
            f"message needs {symbols.size} blocks ({len(payload)} bytes at "
            f"{k} bits/block) but the host provides only {blocks.shape[0]}"
        )
    out_samples = np.array(buffer.samples, dtype=float)
    if symbols.size:
        batch = embed_blocks(code, blocks[: symbols.size], symbols,
                             args.method, eps if args.method == "mdqim" else None)
        out_samples[: symbols.size * code.dimension] = batch.embedded.reshape(-1)
        rep = metrics(blocks[: symbols.size], batch.embedded).to_dict()
        type2 = int(batch.type2.sum()) if batch.type2 is not None else None
    else:
        rep = {"mse": 0.0, "psnr_db": None, "prd_percent": 0.0,
               "block_count": 0, "dimension": code.dimension}
        type2 = None

    write_signal(SignalBuffer(samples=out_samples,
                              sample_rate_hz=buffer.sample_rate_hz,
                              channel_label=buffer.channel_label,
                              source=buffer.source), args.out)
    sidecar = {
        "library_version": __version__,
        "code_spec": args.code,
        "unit_volume": not args.raw_basis,
        "method": args.method,
        "epsilon": eps,
        "bits_per_block": k,
        "payload_nbytes": len(payload),
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
        "blocks_used": int(symbols.size),
        "blocks_available": int(blocks.shape[0]),
        "dropped_samples": int(dropped),
        "type2_blocks": type2,
        "metrics": rep,
        "seed": args.seed,
    }
    meta_path = args.out + ".meta.json"
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if args.figure:
        from .plotting import render_signal_overlay
        render_signal_overlay(buffer.samples, out_samples, args.figure)
    print(f"embedded {len(payload)} bytes into {symbols.size} blocks "
          f"(MSE {rep['mse']:.6g}); wrote {args.out} and {meta_path}")
    return 0


def _cmd_extract(args) -> int:
    meta_path = args.meta or args.infile + ".meta.json"
    try:
        with open(meta_path, "r", encoding="utf-8") as fh:
            meta = json.load(fh)
    except FileNotFoundError:
        raise DataError(f"length metadata missing: no sidecar at {meta_path}")
    code_spec = args.code or meta["code_spec"]
    code = parse_code_spec(code_spec, unit_volume=meta["unit_volume"])
    buffer = read_csv(args.infile)
    blocks, _ = block_signal(buffer, code.dimension)
    blocks_used = meta["blocks_used"]
    if blocks.shape[0] < blocks_used:
        raise DataError(
            f"embedded signal provides {blocks.shape[0]} blocks, sidecar "
            f"declares {blocks_used}"
        )
    k = _bits_per_block(code)
    symbols = decode_blocks(code, blocks[:blocks_used])
    payload = unpack_message(symbols, k, meta["payload_nbytes"])
    with open(args.out, "wb") as fh:
        fh.write(payload)
    digest = hashlib.sha256(payload).hexdigest()
    ok = digest == meta["payload_sha256"]
    status = "match" if ok else "MISMATCH (payload is garbled)"
    print(f"recovered {len(payload)} bytes from {blocks_used} blocks; "
          f"digest {status}")
    return 0


def _cmd_simulate(args) -> int:
    config = ExperimentConfig(
        code_spec=args.code,
        unit_volume=not args.raw_basis,
        method=args.method,
        epsilon=args.epsilon,
        host=args.host,
        message=args.message,
        sigma=args.sigma,
        trials=args.trials,
        mc_trials=args.mc_trials,
        seed=args.seed,
    )
    if args.sweep:
        param, _, values = args.sweep.partition(":")
        if not values:
            raise UsageError("--sweep expects alpha:v1,v2,... or sigma:v1,v2,...")
        vals = [float(v) for v in values.split(",")]
        rows = run_sweep(config, param, vals)
        if args.series:
            fieldnames = list(rows[0].keys())
            with open(args.series, "w", encoding="utf-8", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=fieldnames)
                writer.writeheader()
                writer.writerows(rows)
            from .plotting import render_series_figure
            figure_path = str(Path(args.series).with_suffix(".png"))
            render_series_figure(rows, param, figure_path)
            print(f"wrote {args.series} and {figure_path}")
        else:
            print(json.dumps(rows, indent=2))
        return 0
    report = run_simulation(config)
    if args.out:
        dump_report(report, args.out)
        print(f"wrote {args.out}")
    else:
        print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def _cmd_bound(args) -> int:
    code = parse_code_spec(args.code, unit_volume=not args.raw_basis)
    eps = default_epsilon(code) if args.epsilon == "auto" else float(args.epsilon)
    theory = mdqim_mse_lower_bound(code, eps)
    r = code.fine_geometry.packing_radius
    mc_eps = min(eps, r * (1.0 - 1e-12))
    oracle = distortion_saving_mc(code, mc_eps, args.mc_trials, args.seed)
    doc = {
        "code": args.code,
        "epsilon": eps,
        "qim_mse": qim_mse_theoretical(code),
        "mdqim_mse_bound": theory.mdqim_mse_bound,
        "saving_upper_bound": theory.saving_upper_bound,
        "mc_oracle": oracle.to_dict(),
        "tightness_flag": tightness_flag(theory.mdqim_mse_bound, oracle.mdqim_mse),
    }
    text = json.dumps(doc, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


_COMMANDS = {
    "info": _cmd_info,
    "embed": _cmd_embed,
    "extract": _cmd_extract,
    "simulate": _cmd_simulate,
    "bound": _cmd_bound,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except SystemExit as exc:  # argparse --version / --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (SignalFormatError, DataError, FileNotFoundError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
