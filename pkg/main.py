"""
SBCC Simulator Runner
Command-line sweeps of blockwise braided convolutional codes under sliding window decoding,
plus the optional HTTP simulation service
"""

import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional

# Add src to Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.domain.errors import SbccError
from src.infrastructure.config.settings import PROFILE_NAMES, get_runtime_settings, load_sim_config


def _float_list(text: str) -> List[float]:
    return [float(item) for item in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Blockwise SBCC sliding window decoding simulator")
    sub = parser.add_subparsers(dest="command")

    sweep = sub.add_parser("sweep", help="run an E_b/N_0 sweep and write CSV reports")
    sweep.add_argument("--config", help="JSON file mirroring SimConfig")
    sweep.add_argument("--ebn0", type=_float_list, help="E_b/N_0 points in dB, e.g. '0.5,1.0,1.5'")
    sweep.add_argument("--frames", type=int)
    sweep.add_argument("--seed", type=int, dest="master_seed")
    sweep.add_argument("--out", help="output directory (default: SBCC_OUTPUT_DIR)")
    sweep.add_argument("--profile", choices=PROFILE_NAMES)
    sweep.add_argument("--emit-block-histogram", action=argparse.BooleanOptionalAction, default=None)
    sweep.add_argument("--block-length", type=int, help="T, info bits per block")
    sweep.add_argument("--num-blocks", type=int, help="L, blocks per frame")
    sweep.add_argument("--window", type=int, help="initial window size w")
    sweep.add_argument("--w-max", type=int, help="maximum window size")
    sweep.add_argument("--iterations", type=int, help="maximum horizontal iterations I2")
    sweep.add_argument("--trace-frame", type=int, help="write per-block diagnostics of this frame")
    sweep.add_argument("--workers", type=int, help="frame-level worker processes")
    sweep.add_argument("--min-bit-errors", type=int)
    sweep.add_argument("--min-frame-errors", type=int)

    serve = sub.add_parser("serve", help="start the HTTP simulation service")
    serve.add_argument("--host", default="0.0.0.0")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _overrides(args: argparse.Namespace, default_workers: int) -> Dict[str, Any]:
    decoder_overrides = {
        key: value for key, value in (("w", args.window), ("w_max", args.w_max), ("i2", args.iterations))
        if value is not None
    }
    return {
        "ebn0_points": args.ebn0,
        "frames": args.frames,
        "master_seed": args.master_seed,
        "profile": args.profile,
        "emit_block_histogram": args.emit_block_histogram,
        "block_length": args.block_length,
        "num_blocks": args.num_blocks,
        "trace_frame": args.trace_frame,
        "workers": args.workers if args.workers is not None else (default_workers if not args.config else None),
        "min_bit_errors": args.min_bit_errors,
        "min_frame_errors": args.min_frame_errors,
        "decoder_overrides": decoder_overrides,
    }


def run_sweep_command(args: argparse.Namespace) -> int:
    from src.application.reports import emit_reports
    from src.application.simulator import run_sweep

    settings = get_runtime_settings()
    cfg = load_sim_config(args.config, _overrides(args, settings.workers))
    out_dir = args.out or settings.output_dir

    print(f"🚀 Starting SBCC sweep: profile={cfg.profile}, T={cfg.block_length}, L={cfg.num_blocks}, "
          f"frames={cfg.frames}, points={cfg.ebn0_points}")
    d = cfg.decoder
    print(f"🔧 Decoder: w={d.w}, w_max={d.w_max}, I1={d.i1}, I2={d.i2}, tau={d.tau}, theta={d.theta}, "
          f"N_r={d.n_r}, gamma={d.gamma:g}")

    result = run_sweep(cfg)

    print(f"\n{'Eb/N0':>7} {'BER':>11} {'BLER':>11} {'FER':>11} {'w_avg':>7} {'iters':>6} {'resync':>6}")
    for stats in result.points:
        w_avg = "-" if stats.avg_window is None else f"{stats.avg_window:.4f}"
        print(f"{stats.ebn0_db:>7.2f} {stats.ber:>11.3e} {stats.bler:>11.3e} {stats.fer:>11.3e} "
              f"{w_avg:>7} {stats.avg_horizontal_iters:>6.2f} {stats.resync_count:>6}")

    written = emit_reports(result, cfg, out_dir)
    print(f"\n📊 Reports written to {out_dir}:")
    for name, path in written.items():
        print(f"   {name}: {path}")
    return 0


def run_serve_command(args: argparse.Namespace) -> int:
    import uvicorn

    from src.presentation.api_layer import app

    print("🌟 Starting SBCC simulation service...")
    print(f"📋 API Documentation: http://{args.host}:{args.port}/docs")
    uvicorn.run(app, host=args.host, port=args.port, reload=False, log_level="info")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        settings = get_runtime_settings()
        logging.basicConfig(level=settings.log_level, format="%(asctime)s %(name)s %(levelname)s %(message)s")
        if args.command == "serve":
            return run_serve_command(args)
        if args.command == "sweep":
            return run_sweep_command(args)
        parser.print_help()
        return 2
    except SbccError as e:
        print(f"❌ {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
