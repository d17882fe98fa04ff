import numpy as np
import pytest

from thzgbsm.plotting import line_plot


def _series():
    x = np.arange(0.0, 35.1, 5.0)
    return [("measured", x, 0.5 * x + 1.0), ("3gpp", x, 0.7 * x + 1.5)]


def test_line_plot_returns_svg_text():
    svg = line_plot(_series(), title="capacity", xlabel="SNR [dB]",
                    ylabel="bps/Hz")
    assert svg.startswith("<svg")
    assert svg.rstrip().endswith("</svg>")
    assert "measured" in svg and "3gpp" in svg
    assert "polyline" in svg


def test_line_plot_is_deterministic():
    assert line_plot(_series()) == line_plot(_series())


def test_line_plot_writes_file(tmp_path):
    out = tmp_path / "plot.svg"
    svg = line_plot(_series(), out_path=out)
    assert out.read_text() == svg


def test_line_plot_log_axis_ticks():
    x = np.array([1.0, 10.0, 100.0])
    svg = line_plot([("pl", x, np.array([70.0, 90.0, 110.0]))], log_y=False)
    assert "70" in svg
    svgy = line_plot([("ds", x, np.array([1e-9, 1e-8, 1e-7]))], log_y=True)
    assert "1e-9" in svgy or "1e-09" in svgy


def test_line_plot_rejects_empty_and_bad_log():
    with pytest.raises(ValueError):
        line_plot([])
    with pytest.raises(ValueError):
        line_plot([("a", np.array([1.0]), np.array([-1.0]))], log_y=True)
