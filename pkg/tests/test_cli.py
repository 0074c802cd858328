import json

import numpy as np
import pytest

from squarepeg import Curve, CurveSpec
from squarepeg.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def specs(tmp_path_factory):
    root = tmp_path_factory.mktemp("specs")
    paths = {}
    for kind, extra in [("nonsmooth2", []), ("smooth2", ["--c", "1.17"]), ("nsquare", ["--n", "4"]), ("circle", [])]:
        paths[kind] = root / f"{kind}.json"
        assert main(["construct", kind, *extra, "--out", str(paths[kind])]) == 0
    return paths


def test_construct_nsquare(specs):
    spec = CurveSpec.load(specs["nsquare"])
    assert len(spec.segments) == 5
    assert len(spec.params["anchors"]) == 3


def test_construct_nsquare_three_to_stdout(capsys):
    code, out, err = run(capsys, "construct", "nsquare", "--n", "3")
    assert code == 0
    spec = CurveSpec.from_json(out)
    assert len(spec.params["anchors"]) == 2
    assert sum(s.kind == "PolarBumpArc" for s in spec.segments) == 3
    assert "convex=True" in err


def test_construct_smooth2_apex(capsys):
    code, out, _ = run(capsys, "construct", "smooth2", "--c", "1.18264")
    curve = Curve(CurveSpec.from_json(out))
    apex = curve.spec.segments[1].local(np.array([0.0]))[0][0]
    assert code == 0 and abs(apex[1] - 0.09172) < 5e-5


def test_construct_nonsmooth2(specs):
    assert len(CurveSpec.load(specs["nonsmooth2"]).segments) == 2


def test_construct_errors(capsys):
    assert run(capsys, "construct", "smooth2", "--c", "3")[0] == 2
    assert run(capsys, "construct", "smooth2")[0] == 2
    assert run(capsys, "construct", "nsquare", "--n", "3", "--anchors", "0.1")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["construct", "nsquare", "--bogus"])
    assert exc.value.code == 2


def test_find_squares_nsquare(specs, tmp_path, capsys):
    out = tmp_path / "report.json"
    code, _, _ = run(capsys, "find-squares", str(specs["nsquare"]), "--out", str(out))
    report = json.loads(out.read_text())
    assert code == 0 and len(report["squares"]) == 4
    assert report["familySuspected"] is False


def test_find_squares_circle(specs, tmp_path, capsys):
    out = tmp_path / "circle.csv"
    code, _, _ = run(capsys, "find-squares", str(specs["circle"]), "--out", str(out), "--threads", "2")
    assert code == 0
    assert out.read_text().startswith("t1,t2,t3,t4")
    code, text, _ = run(capsys, "find-squares", str(specs["circle"]))
    assert json.loads(text)["familySuspected"] is True


def test_find_squares_with_oracle(specs, capsys):
    code, text, _ = run(capsys, "find-squares", str(specs["smooth2"]), "--oracle")
    report = json.loads(text)
    assert code == 0
    assert report["oracle"]["agree"] is True
    assert report["oracle"]["count"] == len(report["squares"])


def test_find_squares_bad_input(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "find-squares", str(bad))[0] == 2
    assert run(capsys, "find-squares", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "find-squares", str(bad), "--grid", "4")[0] == 2


def test_critical_c(capsys):
    code, text, _ = run(capsys, "critical-c")
    assert code == 0
    assert abs(json.loads(text)["cStar"] - 1.18264) < 1e-3
    assert run(capsys, "critical-c", "--bracket", "1.3", "1.4")[0] == 2


def test_convexity(specs, capsys):
    code, text, _ = run(capsys, "convexity", str(specs["nsquare"]), "--arc", "0", "0.785398", "--samples", "2000")
    d = json.loads(text)
    assert code == 0 and d["convex"] is True and 0 < d["maxConvexC"] < 0.01
    assert run(capsys, "convexity", str(specs["nonsmooth2"]))[0] == 2
    assert run(capsys, "convexity")[0] == 2


def test_render(specs, tmp_path, capsys):
    report = tmp_path / "ns.json"
    main(["find-squares", str(specs["nonsmooth2"]), "--out", str(report)])
    first, second = tmp_path / "a.svg", tmp_path / "b.svg"
    assert run(capsys, "render", str(specs["nonsmooth2"]), str(report), "--locus", "--out", str(first))[0] == 0
    assert run(capsys, "render", str(specs["nonsmooth2"]), str(report), "--locus", "--out", str(second))[0] == 0
    svg = first.read_text()
    assert svg == second.read_text()
    assert svg.count('class="square"') == 2 and 'class="locus"' in svg


def test_render_warns_on_mismatch(specs, tmp_path, caplog, capsys):
    report = tmp_path / "n.json"
    main(["find-squares", str(specs["nsquare"]), "--out", str(report)])
    code = main(["render", str(specs["nonsmooth2"]), str(report), "--out", str(tmp_path / "x.svg")])
    assert code == 0
    assert any("computed for curve" in r.message for r in caplog.records)


def test_verify_subset(capsys, tmp_path):
    out = tmp_path / "verify.json"
    code, text, _ = run(capsys, "verify", "--only", "2", "8", "--out", str(out))
    assert code == 0
    assert "critical amplitude" in text and "locus identities" in text
    assert [r["passed"] for r in json.loads(out.read_text())] == [True, True]


def test_round_trip_via_cli(specs, rng):
    spec = CurveSpec.load(specs["smooth2"])
    again = CurveSpec.from_json(spec.to_json())
    t = rng.random(1000)
    assert np.max(np.abs(Curve(spec).eval(t) - Curve(again).eval(t))) <= 1e-15
