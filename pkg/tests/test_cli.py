import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given

from ktour import Instance, cover_heuristic
from ktour.bench import expand, run_suite, to_jsonl
from ktour.cli import main
from ktour.fileio import (
    ParseError,
    format_instance,
    format_solution,
    parse_instance,
    parse_solution,
    read_instance,
    write_instance,
)
from ktour.generate import generate
from ktour.model import validate
from ktour.render import render_svg

from .conftest import instances

SVG = "{http://www.w3.org/2000/svg}"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestFileFormat:
    def test_parse(self):
        i = parse_instance("KTC 1\n# hi\nN 2\nK 3\nDEPOT 1 1\n1 2\n3.5 -4\n")
        assert i.k == 3 and i.origin == (1, 1)
        assert i.points.tolist() == [[1, 2], [3.5, -4]]

    def test_depot_defaults_to_origin(self):
        assert parse_instance("KTC 1\nN 1\nK 1\n2 0\n").origin == (0, 0)

    @pytest.mark.parametrize("text,line", [
        ("KTC 2\nN 0\nK 1\n", 1),
        ("KTC 1\nN 1\nK 1\n1 x\n", 4),
        ("KTC 1\nN 1\nK 0\n1 1\n", 3),
        ("KTC 1\nN 1\nK 1\n1 2 3\n", 4),
    ])
    def test_errors_name_line(self, text, line):
        with pytest.raises(ParseError, match=f"line {line}") as exc:
            parse_instance(text)
        assert exc.value.line == line

    def test_count_mismatch(self):
        with pytest.raises(ParseError, match="N says 2"):
            parse_instance("KTC 1\nN 2\nK 1\n1 1\n")

    @given(instances(max_n=20))
    def test_roundtrip_exact(self, instance):
        back = parse_instance(format_instance(instance, "c"))
        assert np.array_equal(back.points, instance.points)
        assert back.k == instance.k and back.origin == instance.origin

    def test_solution_roundtrip(self):
        i = generate(10, 3, seed=1)
        sol = cover_heuristic(i)
        back = parse_solution(format_solution(sol))
        assert back.tours == sol.tours and back.cost == sol.cost
        assert validate(i, back) == []

    def test_bad_solution(self):
        with pytest.raises(ParseError):
            parse_solution("{not json")


class TestGenerate:
    def test_deterministic(self, tmp_path, capsys):
        run(capsys, "gen", "--n", 20, "--k", 3, "--seed", 7, "--out", tmp_path / "a.ktc")
        run(capsys, "gen", "--n", 20, "--k", 3, "--seed", 7, "--out", tmp_path / "b.ktc")
        assert (tmp_path / "a.ktc").read_bytes() == (tmp_path / "b.ktc").read_bytes()

    def test_empty_instance(self, capsys):
        code, out, _ = run(capsys, "gen", "--n", 0, "--k", 2)
        assert code == 0
        assert parse_instance(out).n == 0

    @pytest.mark.parametrize("dist", ["uniform-disk", "annulus"])
    def test_inside_unit_disk(self, dist):
        assert generate(2000, 2, seed=0, dist=dist).radii().max() <= 1.0

    def test_annulus_inner_radius(self):
        assert generate(2000, 2, seed=0, dist="annulus").radii().min() >= 0.5

    def test_unknown_distribution(self):
        with pytest.raises(ValueError):
            generate(5, 2, dist="gaussian")


class TestCommands:
    def test_solve_two_points(self, tmp_path, capsys):
        f = tmp_path / "two.ktc"
        write_instance(Instance.from_points([(1, 0), (2, 0)], 2), f)
        code, out, _ = run(capsys, "solve", "--in", f, "--eps", 0.5, "--base", "exact")
        assert code == 0
        assert "cost 4\n" in out

    def test_solve_writes_valid_solution(self, tmp_path, capsys):
        f, s = tmp_path / "i.ktc", tmp_path / "s.json"
        write_instance(generate(40, 4, seed=2), f)
        assert run(capsys, "solve", "--in", f, "--out", s)[0] == 0
        code, out, _ = run(capsys, "validate", "--in", f, "--solution", s)
        assert code == 0 and out.startswith("feasible")

    def test_validate_reports_violation(self, tmp_path, capsys):
        f, s = tmp_path / "i.ktc", tmp_path / "s.json"
        write_instance(Instance.from_points([(1, 0), (2, 0)], 1), f)
        s.write_text(json.dumps({"cost": 4.0, "tours": [[0, 1]], "meta": {}}))
        code, out, _ = run(capsys, "validate", "--in", f, "--solution", s)
        assert code == 1 and "capacity" in out

    def test_missing_file(self, capsys):
        code, _, err = run(capsys, "solve", "--in", "/no/such/file.ktc")
        assert code == 2 and "/no/such/file.ktc" in err

    def test_malformed_file(self, tmp_path, capsys):
        f = tmp_path / "bad.ktc"
        f.write_text("KTC 1\nN 1\nK 1\nfoo bar\n")
        code, _, err = run(capsys, "lb", "--in", f)
        assert code == 2 and "line 4" in err

    def test_bad_eps(self, tmp_path, capsys):
        f = tmp_path / "i.ktc"
        write_instance(generate(5, 2), f)
        assert run(capsys, "solve", "--in", f, "--eps", 0.9)[0] == 2

    def test_exact_base_refused(self, tmp_path, capsys):
        f = tmp_path / "i.ktc"
        write_instance(generate(30, 3, seed=0), f)
        code, _, err = run(capsys, "solve", "--in", f, "--base", "exact")
        assert code == 3 and "--base heuristic" in err

    def test_exact_command_refused(self, tmp_path, capsys):
        f = tmp_path / "i.ktc"
        write_instance(generate(15, 3, seed=0), f)
        assert run(capsys, "exact", "--in", f)[0] == 3

    def test_lb_ordering(self, tmp_path, capsys):
        f = tmp_path / "i.ktc"
        write_instance(generate(25, 3, seed=9), f)
        code, out, _ = run(capsys, "lb", "--in", f)
        vals = dict(line.split() for line in out.strip().splitlines())
        assert code == 0
        assert float(vals["radial"]) <= float(vals["opt_lower"]) <= float(vals["opt_upper"])

    def test_reduce_json(self, tmp_path, capsys):
        f = tmp_path / "i.ktc"
        write_instance(generate(100, 3, seed=0), f)
        code, out, _ = run(capsys, "reduce", "--in", f)
        info = json.loads(out)
        assert code == 0 and info["q"] == 1 and info["rays"] == 38


class TestRender:
    def count(self, svg, tag, cls=None):
        root = ET.fromstring(svg)
        return sum(1 for e in root.iter(SVG + tag) if cls is None or cls in e.get("class", "").split())

    def test_empty_instance_depot_only(self):
        svg = render_svg(Instance.from_points([], 2))
        assert self.count(svg, "polygon", "depot") == 1
        assert self.count(svg, "rect", "point") == 0

    def test_tour_paths(self):
        i = generate(12, 3, seed=1)
        sol = cover_heuristic(i)
        svg = render_svg(i, sol)
        assert self.count(svg, "path", "tour") == len(sol.tours)
        assert self.count(svg, "rect", "point") == 12

    def test_grid_counts(self):
        rng = np.random.default_rng(0)
        r = np.sqrt(rng.random(99)) * 9
        a = rng.random(99) * 2 * math.pi
        pts = np.vstack([[10.0, 0.0], np.column_stack([r * np.cos(a), r * np.sin(a)])])
        svg = render_svg(Instance.from_points(pts, 3), show_grid=True, eps=0.5)
        assert self.count(svg, "circle", "grid-circle") == 36
        assert self.count(svg, "line", "grid-ray") == 38
        assert self.count(svg, "ellipse", "ring") == 3

    def test_cli_render(self, tmp_path, capsys):
        f, s, o = tmp_path / "i.ktc", tmp_path / "s.json", tmp_path / "o.svg"
        write_instance(generate(20, 3, seed=3), f)
        run(capsys, "solve", "--in", f, "--out", s)
        assert run(capsys, "render", "--in", f, "--solution", s, "--show-grid", "--out", o)[0] == 0
        ET.parse(o)


class TestBench:
    suite = {"rows": [
        {"n": 8, "k": 3, "eps": 0.5, "seeds": [0], "strategies": ["exact", "heuristic", "reduce-heuristic"]},
    ]}

    def test_rows(self):
        rows = run_suite(self.suite)
        assert len(rows) == 3
        assert [r.strategy for r in rows] == ["exact", "heuristic", "reduce-heuristic"]
        assert rows[0].ratio == 1.0
        assert all(1.0 <= r.ratio <= 3 - 2 / 3 + 1e-9 for r in rows)
        assert all(r.lb_kind == "exact" for r in rows)

    def test_failing_row_recorded(self):
        rows = run_suite({"rows": [{"n": 30, "k": 3, "seeds": [0], "strategies": ["reduce-exact", "heuristic"]}]})
        assert rows[0].error and "CapabilityError" in rows[0].error
        assert rows[1].error is None

    def test_threads_same_results(self):
        strip = lambda rows: [{**json.loads(l), "time_s": None} for l in to_jsonl(rows).splitlines()]
        assert strip(run_suite(self.suite, threads=1)) == strip(run_suite(self.suite, threads=4))

    def test_expand(self):
        assert len(expand({"rows": [{"n": 5, "k": 2, "seeds": [1, 2], "strategies": ["exact", "heuristic"]}]})) == 4

    def test_cli(self, tmp_path, capsys):
        f, o = tmp_path / "suite.json", tmp_path / "out.jsonl"
        f.write_text(json.dumps(self.suite))
        code, out, _ = run(capsys, "bench", "--suite", f, "--out", o)
        assert code == 0 and "reduce-heuristic" in out
        assert len(o.read_text().splitlines()) == 3
