import numpy as np
import pytest

from crawlsieve import visualize
from crawlsieve.hierarchy import run_hierarchy
from crawlsieve.ingest import ip_to_int
from crawlsieve.policy import PolicyParams
from crawlsieve.synthgen import A_IP, generate
from crawlsieve.visualize import (
    ALLOWED,
    BLOCKED_B,
    BLOCKED_C,
    BLOCKED_IP,
    CLASSES,
    PlotSpec,
    check_layers,
    classify,
    load_layers,
    render_load,
    render_scatter,
    scatter_points,
)
from crawlsieve.workload import stage_table

from conftest import at

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
SMALL = PlotSpec(width=320, height=200)


def test_two_allowed_points():
    ts = [at(0, "10:00"), at(0, "11:00")]
    ips = [ip_to_int("192.0.2.1"), ip_to_int("192.0.2.9")]
    pts = scatter_points(ts, ips, [ALLOWED, ALLOWED], (ALLOWED,))
    xs, ys = pts[ALLOWED]
    assert len(xs) == 2
    assert list(ys) == [0, 1]
    assert visualize.COLORS[ALLOWED] == "#00e000"


def test_classify_stage_names():
    assert classify(["allowed", "Throttling", "Robots", "C Subnet", "B Subnet"]) == [
        ALLOWED, BLOCKED_IP, BLOCKED_IP, BLOCKED_C, BLOCKED_B]


@pytest.fixture(scope="module")
def corpus_run():
    corpus = generate(["A", "G", "H", "J"], human_sessions=10, seed=4, days=6)
    results = run_hierarchy(corpus.records, PolicyParams())
    analysis = stage_table(corpus.records, results)
    return corpus, analysis, classify(analysis.assignment)


def test_point_count_conservation(corpus_run):
    corpus, _, classes = corpus_run
    ts = [r.timestamp for r in corpus.records]
    ips = [r.ip for r in corpus.records]
    blocked = scatter_points(ts, ips, classes, (BLOCKED_IP, BLOCKED_C, BLOCKED_B))
    allowed = scatter_points(ts, ips, classes, (ALLOWED,))
    n = sum(len(xs) for xs, _ in blocked.values()) + sum(len(xs) for xs, _ in allowed.values())
    assert n == len(corpus.records)
    assert len(blocked[BLOCKED_C][0]) > 0 and len(blocked[BLOCKED_B][0]) > 0


def test_single_ip_is_one_horizontal_line(corpus_run):
    corpus, _, classes = corpus_run
    a = ip_to_int(A_IP)
    ts = [r.timestamp for r in corpus.records]
    ips = [r.ip for r in corpus.records]
    xs, ys = scatter_points(ts, ips, classes, CLASSES)[BLOCKED_IP]
    sel = np.asarray(ips)[np.asarray(classes) == BLOCKED_IP] == a
    assert sel.sum() > 0
    assert len(set(ys[sel])) == 1
    assert xs[sel].max() - xs[sel].min() > 5  # spans the whole run


def test_raw_axis_uses_address_value():
    pts = scatter_points([at(0, "10:00")], [ip_to_int("10.0.0.5")], [ALLOWED], (ALLOWED,),
                         PlotSpec(y_axis="raw"))
    assert pts[ALLOWED][1][0] == ip_to_int("10.0.0.5")


def test_png_is_deterministic(tmp_path, corpus_run):
    corpus, _, classes = corpus_run
    ts = [r.timestamp for r in corpus.records]
    ips = [r.ip for r in corpus.records]
    a = render_scatter(ts, ips, classes, tmp_path / "a.png", spec=SMALL).read_bytes()
    b = render_scatter(ts, ips, classes, tmp_path / "b.png", spec=SMALL).read_bytes()
    assert a.startswith(PNG_MAGIC)
    assert a == b


def test_empty_inputs_render(tmp_path):
    p = render_scatter([], [], [], tmp_path / "e.png", spec=SMALL)
    assert p.read_bytes().startswith(PNG_MAGIC)
    q = render_load(0, [("None", np.zeros(0)), ("final", np.zeros(0))], tmp_path / "l.png", SMALL)
    assert q.read_bytes().startswith(PNG_MAGIC)


def test_layer_violation_rejected(tmp_path):
    with pytest.raises(ValueError):
        check_layers([("None", [1, 2, 3]), ("final", [1, 3, 3])])
    with pytest.raises(ValueError):
        render_load(0, [("None", [1, 2]), ("final", [2, 2])], tmp_path / "x.png", SMALL)


def test_layers_dominate_on_corpus(tmp_path, corpus_run):
    _, analysis, _ = corpus_run
    layers = [(label, s.values) for label, s in load_layers(analysis.series)]
    assert [label for label, _ in layers][0] == "None" and layers[-1][0] == "final"
    check_layers(layers)
    for (_, upper), (_, lower) in zip(layers, layers[1:]):
        assert np.all(lower <= upper)
    render_load(analysis.series["None"].start, layers, tmp_path / "load.png", SMALL)


def test_bin_means():
    out = visualize.bin_means(np.array([1, 3, 5, 7, 9.0]), 2)
    assert list(out) == [2, 6, 9]
