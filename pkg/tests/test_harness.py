import io
import math

import pytest

from tnrenorm.harness import (CSV_HEADER, SKIPPED, ResultRow, SweepSpec,
                              filter_rows, median_steps, read_csv,
                              run_one, run_sweep, write_csv, xi_seed_for)

SPEC_HEADER = ("structure,method,N,p,b,seed,status,steps_total,"
               "steps_one_node_overflow,steps_one_node_underflow,"
               "steps_partial_nonfinite,steps_partial_range,"
               "steps_full_residual,final_norm_log,cumulative_log_scale,"
               "wall_ms")


def csv_text(rows):
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def test_header_matches_schema():
    assert ",".join(CSV_HEADER) == SPEC_HEADER


def test_small_sweep_needs_no_steps():
    spec = SweepSpec(structures=["TT"], methods=["frobenius"], n_values=[2, 3],
                     p_values=[2], b_values=[2], seeds=[0])
    rows = run_sweep(spec)
    assert len(rows) == 2
    assert [r.N for r in rows] == [2, 3]
    for r in rows:
        assert r.status == "Success" and r.steps_total == 0
        # F = p**N
        assert math.isclose(r.final_norm_log, r.N * math.log(2), rel_tol=1e-9)


def test_duplicates_collapse():
    spec = SweepSpec(structures=["TT", "TT"], n_values=[3, 3, 2], seeds=[1, 1])
    assert len(spec.combinations()) == 2
    assert len(run_sweep(spec)) == 2


def test_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec(seeds=[])
    with pytest.raises(ValueError):
        SweepSpec(structures=["PEPS"])
    with pytest.raises(ValueError):
        SweepSpec(methods=["max"])
    with pytest.raises(ValueError):
        SweepSpec.from_dict({"bogus": 1})


def test_spec_dict_round_trip():
    spec = SweepSpec(n_values=[4, 5], target=1e3, timing=False)
    assert SweepSpec.from_dict(spec.to_dict()) == spec


def test_empty_csv_is_header_only():
    assert csv_text([]) == SPEC_HEADER + "\n"


def test_two_rows_three_lines(tmp_path):
    rows = run_sweep(SweepSpec(structures=["TT"], n_values=[2, 3]))
    path = tmp_path / "out.csv"
    write_csv(rows, path)
    assert len(path.read_text().splitlines()) == 3


def test_csv_round_trip(tmp_path):
    spec = SweepSpec(structures=["TT", "TTM"], methods=["frobenius", "linear"],
                     n_values=[2, 12], p_values=[3], b_values=[4], seeds=[0, 1])
    rows = run_sweep(spec)
    path = tmp_path / "rows.csv"
    write_csv(rows, path)
    assert read_csv(path) == rows


def test_csv_keeps_nonfinite_fields(tmp_path):
    row = ResultRow("TT", "linear", 2, 2, 2, 0, SKIPPED, 0, 0, 0, 0, 0, 0,
                    math.nan, math.nan, 0.0)
    bad = ResultRow("TT", "linear", 3, 2, 2, 0, "Failed", 3, 0, 3, 0, 0, 0,
                    -math.inf, 1.5, 0.0)
    path = tmp_path / "rows.csv"
    write_csv([bad, row], path)
    back = read_csv(path)
    assert back[0].status == SKIPPED and math.isnan(back[0].final_norm_log)
    assert back[1].final_norm_log == -math.inf


def test_read_csv_rejects_wrong_header(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_csv(path)


def test_concurrency_does_not_change_bytes():
    spec = SweepSpec(structures=["TT", "TTM"], methods=["frobenius", "linear"],
                     n_values=[2, 10, 20], p_values=[4], b_values=[3],
                     seeds=[0, 1], timing=False)
    assert csv_text(run_sweep(spec, jobs=1)) == csv_text(run_sweep(spec, jobs=2))


def test_seed_isolation():
    base = SweepSpec(structures=["TT"], n_values=[20], p_values=[6],
                     b_values=[10], seeds=[0, 1, 2], timing=False)
    moved = SweepSpec(structures=["TT"], n_values=[20], p_values=[6],
                      b_values=[10], seeds=[0, 1, 7], timing=False)
    a, b = run_sweep(base), run_sweep(moved)
    assert a[:2] == b[:2]
    assert a[2] != b[2]
    assert run_one(moved, ("TT", "frobenius", 20, 6, 10, 7)) == b[2]


def test_memory_cap_skips():
    spec = SweepSpec(structures=["TT", "TTM"], n_values=[3], p_values=[4],
                     b_values=[10], max_node_floats=1000)
    rows = {r.structure: r for r in run_sweep(spec)}
    assert rows["TT"].status == "Success"  # 10 * 4 * 10 floats
    assert rows["TTM"].status == SKIPPED  # 10 * 16 * 10 floats
    assert median_steps(list(rows.values()), ["structure"]) == {("TT",): 0}


def test_xi_seed_distinct_and_stable():
    a = xi_seed_for(0, "TT", "frobenius", 10, 6, 10)
    assert a == xi_seed_for(0, "TT", "frobenius", 10, 6, 10)
    assert a != xi_seed_for(0, "TTM", "frobenius", 10, 6, 10)
    assert a != xi_seed_for(1, "TT", "frobenius", 10, 6, 10)


def test_median_and_filter():
    def row(structure, n, seed, steps, status="Success"):
        return ResultRow(structure, "frobenius", n, 6, 10, seed, status, steps,
                         0, 0, 0, steps, 0, 0.0, 0.0, 0.0)

    rows = [row("TT", 20, 0, 1), row("TT", 20, 1, 3), row("TT", 20, 2, 2),
            row("TTM", 20, 0, 5, "Failed")]
    assert median_steps(rows, ["structure", "N"]) == {("TT", 20): 2,
                                                      ("TTM", 20): 5}
    assert median_steps(rows, ["structure"], include_failed=False) == {
        ("TT",): 2}
    assert len(filter_rows(rows, structure="TT", seed=1)) == 1
