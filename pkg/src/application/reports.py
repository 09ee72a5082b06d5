"""
SBCC Reports - Summary Tables, Per-Block Error Distributions, Frame Traces and Run Manifest
Comma-separated files with a header row; byte-identical for identical inputs
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from src.application.simulator import PERMUTOR_STREAM, FrameReport, Permutors, PointStats, SweepResult
from src.domain.prng import mix_seed
from src.infrastructure.config.settings import SimConfig

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = [
    "ebn0_db", "frames", "bit_errors", "block_errors", "frame_errors",
    "ber", "bler", "fer", "avg_window", "avg_horizontal_iters",
    "resync_count", "propagation_frames",
]
PERMUTOR_FILE_NAMES = ("permutor_p0.txt", "permutor_p1.txt", "permutor_p2.txt")
TRACE_COLUMNS = [
    "t", "bit_errors", "avg_abs_llr", "ber_est", "used_window",
    "used_iterations", "resync_triggered", "stopped_early", "flushed",
]


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.6e}"
    return str(value)


def _point_tag(ebn0_db: float) -> str:
    return f"{ebn0_db:+.4f}dB"


def _write_csv(path: Path, header: Sequence[str], rows: List[List[Any]]) -> Path:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(value) for value in row])
    return path


def write_summary(points: List[PointStats], out_dir: Path) -> Path:
    """One row per E_b/N_0 point"""
    rows = []
    for stats in points:
        summary = stats.summary()
        rows.append([f"{stats.ebn0_db:.4f}"] + [summary[c] for c in SUMMARY_COLUMNS[1:]])
    return _write_csv(out_dir / "summary.csv", SUMMARY_COLUMNS, rows)


def write_block_histogram(stats: PointStats, out_dir: Path) -> Path:
    """Cumulative bit errors per absolute block index"""
    rows = [[t, errors] for t, errors in enumerate(stats.per_block_error_hist)]
    return _write_csv(out_dir / f"block_errors_{_point_tag(stats.ebn0_db)}.csv",
                      ["block_index", "bit_errors"], rows)


def write_frame_trace(ebn0_db: float, report: FrameReport, out_dir: Path) -> Path:
    """Per-block diagnostics of one frame"""
    rows = [[record.get(column) for column in TRACE_COLUMNS] for record in report.records]
    return _write_csv(out_dir / f"trace_frame{report.frame_index}_{_point_tag(ebn0_db)}.csv",
                      TRACE_COLUMNS, rows)


def write_permutors(permutors: Permutors, out_dir: Path) -> List[str]:
    """Snapshot the permutors of the run; the files load back through permutor_files"""
    names = []
    for name, permutor in zip(PERMUTOR_FILE_NAMES, permutors):
        permutor.save(out_dir / name)
        names.append(name)
    return names


def write_manifest(cfg: SimConfig, out_dir: Path, permutor_snapshot: Optional[List[str]] = None) -> Path:
    """Resolved configuration, seeds and permutor snapshot of the run"""
    manifest: Dict[str, Any] = {
        "config": cfg.model_dump(),
        "profile": cfg.profile,
        "master_seed": cfg.master_seed,
        "permutor_seeds": None if cfg.permutor_files else [
            mix_seed(cfg.master_seed, PERMUTOR_STREAM, i) for i in range(3)
        ],
        "permutor_files": cfg.permutor_files,
        "permutor_snapshot": permutor_snapshot,
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def emit_reports(result: SweepResult, cfg: SimConfig, out_dir: Union[str, Path]) -> Dict[str, Path]:
    """Write every report file of a sweep; returns the written paths by name"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    snapshot = write_permutors(result.permutors, out_dir)
    written = {"summary": write_summary(result.points, out_dir),
               "manifest": write_manifest(cfg, out_dir, snapshot)}
    written.update({name.split(".")[0]: out_dir / name for name in snapshot})
    if cfg.emit_block_histogram:
        for stats in result.points:
            written[f"block_errors_{_point_tag(stats.ebn0_db)}"] = write_block_histogram(stats, out_dir)
    for ebn0_db, report in result.traces.items():
        written[f"trace_{_point_tag(ebn0_db)}"] = write_frame_trace(ebn0_db, report, out_dir)

    logger.info(f"Wrote {len(written)} report files to {out_dir}")
    return written
