import numpy as np

from localglmnet.svg import bar_svg, box_svg, line_svg, scatter_svg


class TestScatter:
    def test_structure_and_determinism(self):
        x = np.array([0.0, 1.0, 2.0])
        y = np.array([1.0, -1.0, 0.5])
        doc1 = scatter_svg(x, y, title="t", xlabel="x", ylabel="y",
                           hlines=[(0.0, "#d62728")])
        doc2 = scatter_svg(x, y, title="t", xlabel="x", ylabel="y",
                           hlines=[(0.0, "#d62728")])
        assert doc1 == doc2
        assert doc1.startswith("<svg")
        assert doc1.rstrip().endswith("</svg>")
        assert doc1.count("<circle") == 3
        assert "#d62728" in doc1

    def test_ylim_clips_points(self):
        x = np.array([0.0, 1.0])
        y = np.array([0.5, 99.0])
        doc = scatter_svg(x, y, ylim=(0.0, 1.0))
        assert doc.count("<circle") == 1


class TestLine:
    def test_one_polyline_per_curve(self):
        grid = np.linspace(0, 1, 50)
        doc = line_svg(grid, [("a", np.sin(grid)), ("b", np.cos(grid))])
        assert doc.count("<polyline") == 2
        assert ">a</text>" in doc and ">b</text>" in doc


class TestBar:
    def test_one_rect_per_label(self):
        doc = bar_svg(["u", "v", "w"], [0.3, 0.1, 0.2], title="imp")
        # One frame rect, one background rect, three bars.
        assert doc.count("<rect") == 5
        assert ">u</text>" in doc


class TestBox:
    def test_quartile_boxes(self):
        doc = box_svg([("A", (0.0, 1.0, 2.0, 3.0, 4.0)),
                       ("B", (-1.0, 0.0, 0.5, 1.0, 2.0))])
        assert doc.count("<rect") == 4  # background + frame + 2 boxes
        assert ">A</text>" in doc and ">B</text>" in doc
