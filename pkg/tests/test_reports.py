import csv
import json

from src.application.reports import SUMMARY_COLUMNS, TRACE_COLUMNS, emit_reports
from src.application.simulator import PointStats, SweepResult, build_permutors, run_sweep
from src.domain.permutor import BlockPermutor


def read_rows(path):
    with path.open(newline="", encoding="utf-8") as handle:
        return list(csv.reader(handle))


def test_report_files_and_row_counts(tmp_path, sim_config):
    cfg = sim_config(ebn0_points=[1.0, 3.0], trace_frame=0)
    written = emit_reports(run_sweep(cfg), cfg, tmp_path)

    summary = read_rows(written["summary"])
    assert summary[0] == SUMMARY_COLUMNS
    assert [row[0] for row in summary[1:]] == ["1.0000", "3.0000"]

    histogram = read_rows(tmp_path / "block_errors_+1.0000dB.csv")
    assert histogram[0] == ["block_index", "bit_errors"]
    assert len(histogram) - 1 == cfg.num_blocks

    trace = read_rows(tmp_path / "trace_frame0_+3.0000dB.csv")
    assert trace[0] == TRACE_COLUMNS
    assert len(trace) - 1 == cfg.num_blocks

    manifest = json.loads(written["manifest"].read_text())
    assert manifest["master_seed"] == cfg.master_seed
    assert manifest["config"]["decoder"]["w"] == cfg.decoder.w
    assert len(manifest["permutor_seeds"]) == 3


def test_histogram_can_be_disabled(tmp_path, sim_config):
    cfg = sim_config(emit_block_histogram=False)
    emit_reports(run_sweep(cfg), cfg, tmp_path)
    assert not list(tmp_path.glob("block_errors_*.csv"))


def test_zero_error_point_row(tmp_path, sim_config):
    cfg = sim_config(ebn0_points=[2.0])
    stats = PointStats(ebn0_db=2.0, block_length=cfg.block_length, num_blocks=cfg.num_blocks)
    result = SweepResult(points=[stats], traces={}, permutors=build_permutors(cfg))
    emit_reports(result, cfg, tmp_path)

    row = dict(zip(*read_rows(tmp_path / "summary.csv")))
    assert float(row["ber"]) == float(row["bler"]) == float(row["fer"]) == 0.0
    assert row["avg_window"] == ""


def test_reports_are_byte_identical_across_runs(tmp_path, sim_config):
    cfg = sim_config(ebn0_points=[0.5, 1.5], frames=3, trace_frame=2)
    first_dir, second_dir, parallel_dir = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    emit_reports(run_sweep(cfg), cfg, first_dir)
    emit_reports(run_sweep(cfg), cfg, second_dir)
    emit_reports(run_sweep(cfg), cfg, second_dir)

    parallel_cfg = cfg.model_copy(update={"workers": 2})
    emit_reports(run_sweep(parallel_cfg), parallel_cfg, parallel_dir)

    names = sorted(p.name for p in first_dir.iterdir())
    assert names == sorted(p.name for p in second_dir.iterdir())
    for name in names:
        assert (first_dir / name).read_bytes() == (second_dir / name).read_bytes()
        if name != "manifest.json":
            assert (first_dir / name).read_bytes() == (parallel_dir / name).read_bytes()


def test_close_points_get_distinct_report_files(tmp_path, sim_config):
    cfg = sim_config(ebn0_points=[1.0, 1.004], trace_frame=0)
    emit_reports(run_sweep(cfg), cfg, tmp_path)
    assert (tmp_path / "block_errors_+1.0000dB.csv").exists()
    assert (tmp_path / "block_errors_+1.0040dB.csv").exists()
    assert len(list(tmp_path.glob("trace_frame0_*.csv"))) == 2


def test_permutor_snapshot_reproduces_the_run(tmp_path, sim_config):
    cfg = sim_config(ebn0_points=[1.0], frames=2)
    first = run_sweep(cfg)
    emit_reports(first, cfg, tmp_path / "a")

    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    files = [str(tmp_path / "a" / name) for name in manifest["permutor_snapshot"]]
    for path, permutor in zip(files, first.permutors):
        assert (BlockPermutor.load(path).forward == permutor.forward).all()

    pinned = cfg.model_copy(update={"permutor_files": files})
    emit_reports(run_sweep(pinned), pinned, tmp_path / "b")
    assert (tmp_path / "a" / "summary.csv").read_bytes() == (tmp_path / "b" / "summary.csv").read_bytes()
