import re
import xml.etree.ElementTree as ET

import pytest

from tnrenorm.harness import SKIPPED, ResultRow
from tnrenorm.plotting import parse_series, plot_steps

SVG = "{http://www.w3.org/2000/svg}"


def row(structure="TT", n=10, p=6, b=10, seed=0, steps=0, method="frobenius",
        status="Success"):
    return ResultRow(structure, method, n, p, b, seed, status, steps,
                     0, 0, 0, steps, 0, 0.0, 0.0, 0.0)


def series_lines(path):
    """Vertex lists of the data line in every ``series-*`` group."""
    root = ET.parse(path).getroot()
    out = {}
    for g in root.iter(f"{SVG}g"):
        gid = g.get("id", "")
        if not gid.startswith("series-"):
            continue
        (line,) = [c for c in g if c.tag == f"{SVG}path"]
        out[gid] = re.findall(r"[ML] ([-\d.]+) ([-\d.]+)", line.get("d"))
    return out


def test_single_series_two_points(tmp_path):
    path = tmp_path / "one.svg"
    plot_steps([row(n=2), row(n=20, steps=1)], "N", path=path)
    lines = series_lines(path)
    assert list(lines) == ["series-0"]
    assert len(lines["series-0"]) == 2


def test_full_p_grid_gives_14_series(tmp_path):
    rows = [row(structure=s, n=n, p=p, seed=seed, steps=(n > 8) + seed % 2)
            for s in ("TT", "TTM") for n in (2, 8, 20) for p in range(6, 13)
            for seed in range(3)]
    path = tmp_path / "grid.svg"
    plot_steps(rows, "N", "p·structure", path)
    lines = series_lines(path)
    assert len(lines) == 14
    assert all(len(v) == 3 for v in lines.values())


def test_median_is_plotted(tmp_path):
    rows = [row(n=2, seed=s, steps=v) for s, v in enumerate([0, 4, 1])]
    rows += [row(n=3, seed=s, steps=v) for s, v in enumerate([2, 2, 9])]
    fig = plot_steps(rows, "N")
    (line,) = fig.axes[0].get_lines()
    assert list(line.get_ydata()) == [1, 2]


def test_svg_bytes_are_deterministic(tmp_path):
    rows = [row(structure=s, n=n, steps=n // 10) for s in ("TT", "TTM")
            for n in (2, 10, 30)]
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    plot_steps(rows, "N", path=a)
    plot_steps(list(rows), "N", path=b)
    assert a.read_bytes() == b.read_bytes()
    assert b"<dc:date>" not in a.read_bytes()


def test_has_labels_and_legend(tmp_path):
    path = tmp_path / "l.svg"
    plot_steps([row(p=6), row(p=8)], "p", "structure", path)
    text = path.read_text()
    assert "median steps" in text and ">p<" in text
    assert 'id="legend_1"' in text


def test_mixed_fixed_dimension_rejected():
    with pytest.raises(ValueError, match="mix"):
        plot_steps([row(b=4), row(b=10)], "N", "structure")
    with pytest.raises(ValueError, match="mix"):
        plot_steps([row(), row(method="linear")], "N")


def test_bad_arguments():
    with pytest.raises(ValueError):
        plot_steps([row()], "seed")
    with pytest.raises(ValueError):
        plot_steps([row()], "N", "N")
    with pytest.raises(ValueError):
        plot_steps([row(status=SKIPPED)], "N")
    with pytest.raises(ValueError):
        parse_series("colour")


def test_parse_series_separators():
    assert parse_series("N·structure") == ("N", "structure")
    assert parse_series("p, structure") == ("p", "structure")
    assert parse_series(("structure",)) == ("structure",)
