import pytest

from report import EmptySelection, SchemaError, chart, load_runs, main

HEADER = (
    "variant,geo,element,problem,layout,lane_width,workers,n_elements,"
    "ns_per_element,ns_mad,accesses_per_element,ops_model,intensity,"
    "bound_ns,efficiency_pct"
)
K20M_ROW = "qss,linear,tet,poisson,major,1,1,100000,2.000,0.010,36,290,8,2.00,99"


def _write(tmp_path, *lines):
    path = tmp_path / "runs.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


def test_load_runs_preserves_rows(tmp_path):
    rows = [
        K20M_ROW,
        "sqs,linear,tet,poisson,major,1,1,100000,2.100,0.010,36,290,8,2.00,95",
        "qss,generic,prism,convdiff,interleaved,8,2,100000,4.800,0.020,80,4806,60,4.44,93",
    ]
    runs = load_runs(_write(tmp_path, HEADER, *rows))
    assert len(runs) == 3
    assert runs[0].variant == "qss"
    assert runs[0].ns_per_element == 2.0
    assert runs[2].lane_width == 8
    assert runs[2].case == "prism/convdiff"


def test_load_runs_missing_column(tmp_path):
    broken = HEADER.replace("ops_model,", "")
    path = _write(tmp_path, broken, "x" * 3)
    with pytest.raises(SchemaError, match="ops_model"):
        load_runs(path)


def test_load_runs_bad_value_reports_line(tmp_path):
    bad = K20M_ROW.replace("2.000", "fast")
    path = _write(tmp_path, HEADER, K20M_ROW, bad)
    with pytest.raises(SchemaError, match=r":3: column 'ns_per_element'"):
        load_runs(path)


def test_load_runs_wrong_field_count(tmp_path):
    path = _write(tmp_path, HEADER, K20M_ROW + ",extra")
    with pytest.raises(SchemaError, match="expected 15 fields"):
        load_runs(path)


def test_load_runs_empty_data_section(tmp_path):
    runs = load_runs(_write(tmp_path, HEADER))
    assert runs == []


def test_load_runs_skips_comment_lines(tmp_path):
    path = _write(tmp_path, "# UNVERIFIED: correctness gate was skipped", HEADER, K20M_ROW)
    assert len(load_runs(path)) == 1


def test_chart_empty_selection(tmp_path):
    with pytest.raises(EmptySelection):
        chart([], "time", tmp_path / "chart.svg")


def test_bandwidth_bar_value(tmp_path):
    # 36 accesses at 2.00 ns -> 36 * 8 / 2.00 = 144 GB/s
    runs = load_runs(_write(tmp_path, HEADER, K20M_ROW))
    out = tmp_path / "chart.svg"
    data = chart(runs, "bandwidth", out)
    assert data["qss"]["tet/poisson"] == pytest.approx(144.0)
    assert out.exists() and out.stat().st_size > 0


def test_flops_bar_value(tmp_path):
    row = "qss,generic,prism,poisson,major,1,1,100000,2700.0,0.0,66,2700,41,3.67,0"
    runs = load_runs(_write(tmp_path, HEADER, row))
    data = chart(runs, "flops", tmp_path / "chart.svg")
    assert data["qss"]["prism/poisson"] == pytest.approx(1.0)


def test_efficiency_passthrough(tmp_path):
    runs = load_runs(_write(tmp_path, HEADER, K20M_ROW))
    data = chart(runs, "efficiency", tmp_path / "chart.svg")
    assert data["qss"]["tet/poisson"] == 99.0


def test_time_chart_value(tmp_path):
    runs = load_runs(_write(tmp_path, HEADER, K20M_ROW))
    data = chart(runs, "time", tmp_path / "chart.svg")
    assert data["qss"]["tet/poisson"] == pytest.approx(2.0)


def test_best_row_selected_per_case_and_variant(tmp_path):
    slow = K20M_ROW.replace("2.000", "3.000").replace(",major,", ",interleaved,")
    runs = load_runs(_write(tmp_path, HEADER, slow, K20M_ROW))
    data = chart(runs, "time", tmp_path / "chart.svg")
    assert data["qss"]["tet/poisson"] == pytest.approx(2.0)


def test_grouped_chart_multiple_series(tmp_path):
    rows = [
        K20M_ROW,
        "ssq,linear,tet,poisson,major,1,1,100000,2.000,0.0,36,290,8,2.00,99",
        "qss,generic,prism,convdiff,major,1,1,100000,15.58,0.0,80,4806,60,4.44,29",
    ]
    data = chart(load_runs(_write(tmp_path, HEADER, *rows)), "time", tmp_path / "c.svg")
    assert set(data) == {"qss", "ssq"}
    assert set(data["qss"]) == {"tet/poisson", "prism/convdiff"}


def test_main_end_to_end(tmp_path, capsys):
    path = _write(tmp_path, HEADER, K20M_ROW)
    out = tmp_path / "chart.svg"
    assert main(["--input", str(path), "--kind", "bandwidth", "--out", str(out)]) == 0
    assert out.exists()
    assert "wrote" in capsys.readouterr().err


def test_main_schema_error_exit_code(tmp_path):
    path = _write(tmp_path, HEADER.replace("variant,", ""), "x")
    assert main(["--input", str(path), "--kind", "time", "--out", "/dev/null"]) == 1
