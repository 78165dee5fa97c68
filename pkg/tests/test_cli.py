import subprocess
import sys

import pytest

from pemonitor.cli import main
from pemonitor.entropy import read_pet
from pemonitor.filtration import read_graphs
from pemonitor.pea import PEA

SHORT_CFG = "ticks = 300\ninjection_ticks = 10,150\n"
ARTIFACTS = [
    "snapshots.csv", "pet.csv", "segments.csv", "pea.json", "execution.csv",
    "trace.txt", "classes.csv", "groups.csv", "verdicts.csv",
    "plot/entropy.csv", "plot/dentropy.csv",
]


@pytest.fixture
def cfg(tmp_path):
    p = tmp_path / "short.cfg"
    p.write_text(SHORT_CFG)
    return str(p)


def run(*argv):
    return main([str(a) for a in argv])


class TestSimulate:
    def test_writes_tick_blocks(self, tmp_path, cfg):
        out = tmp_path / "a"
        assert run("--out", out, "simulate", "--config", cfg) == 0
        graphs = read_graphs(out / "snapshots.csv")
        assert [g.timestamp for g in graphs] == list(range(1, 301))

    def test_seed_repeat_identical(self, tmp_path, cfg):
        for d in ("a", "b"):
            assert run("--out", tmp_path / d, "--seed", 3, "simulate", "--config", cfg) == 0
        c = run("--out", tmp_path / "c", "simulate", "--config", cfg, "--seed", 4)
        assert c == 0
        a, b, c = ((tmp_path / d / "snapshots.csv").read_bytes() for d in "abc")
        assert a == b != c

    def test_zero_ticks_is_config_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("ticks = 0\n")
        assert run("--out", tmp_path, "simulate", "--config", bad) == 2
        assert "ticks" in capsys.readouterr().err

    def test_missing_and_malformed_config(self, tmp_path):
        assert run("--out", tmp_path, "simulate", "--config", tmp_path / "nope.cfg") == 2
        junk = tmp_path / "junk.cfg"
        junk.write_text("this is not a config\n")
        assert run("--out", tmp_path, "simulate", "--config", junk) == 2

    def test_packaged_configs(self, tmp_path):
        from pemonitor.cli import load_config

        assert load_config("batch", None).focus == 0.02
        assert load_config("default", 5).seed == 5


class TestEntropy:
    def test_single_tick(self, tmp_path):
        snap = tmp_path / "s.csv"
        snap.write_text("time,u,v,weight\n4,0,1,2.0\n4,1,2,3.0\n")
        assert run("--out", tmp_path, "entropy", snap) == 0
        text = (tmp_path / "pet.csv").read_text().splitlines()
        assert text[0] == "time,entropy" and len(text) == 2 and text[1].startswith("4,")

    def test_empty_graph_tick(self, tmp_path, capsys):
        snap = tmp_path / "s.csv"
        snap.write_text("time,u,v,weight\n#vertices@2:\n1,0,1,2.0\n3,0,1,2.0\n")
        assert run("--out", tmp_path, "entropy", snap) == 1
        assert "t=2" in capsys.readouterr().err

    def test_plot_data(self, tmp_path):
        snap = tmp_path / "s.csv"
        snap.write_text("time,u,v,weight\n1,0,1,2.0\n2,0,1,2.0\n2,1,2,1.0\n")
        assert run("--out", tmp_path, "entropy", snap, "--emit-plot-data") == 0
        lines = (tmp_path / "plot" / "entropy.csv").read_text().splitlines()
        assert lines[:2] == ["time,entropy", "0,0.0"]
        assert (tmp_path / "plot" / "dentropy.csv").read_text().startswith("time,dentropy\n")


class TestMineExecute:
    def test_fig5_shaped(self, tmp_path):
        values = [0.0] * 10 + [0.5, 1.5, 3.5, 2.5] + [2.0] * 10 + [3.0, 2.5] + [2.0] * 10
        pet = tmp_path / "pet_in.csv"
        pet.write_text("time,entropy\n" + "".join(f"{t},{h}\n" for t, h in enumerate(values, 1)))
        assert run("--out", tmp_path, "mine", pet) == 0
        pea = PEA.from_json(tmp_path / "pea.json")
        assert len(pea.states) == 2
        assert pea.edge_set() == {("S0", "S1"), ("S1", "S1")}
        assert run("--out", tmp_path, "mine", pet, "--augment", "idiotypic") == 0
        assert ("virgin", "virgin") in PEA.from_json(tmp_path / "pea.json").edge_set()
        assert run("--out", tmp_path, "execute", tmp_path / "pea.json", pet) == 0
        assert (tmp_path / "trace.txt").read_text().startswith("V\n" * 11 + "W\n")

    def test_no_steady_behaviour(self, tmp_path, capsys):
        pet = tmp_path / "p.csv"
        pet.write_text("time,entropy\n" + "".join(f"{t},{t}\n" for t in range(1, 10)))
        assert run("--out", tmp_path, "mine", pet) == 1
        assert "no steady behaviour" in capsys.readouterr().err

    def test_stuck(self, tmp_path, capsys):
        pea = tmp_path / "p.json"
        pea.write_text('{"states": [{"name": "a", "condition": "H = 0"}], "initial": "a", "transitions": []}')
        pet = tmp_path / "pet.csv"
        pet.write_text("time,entropy\n1,0.0\n2,1.0\n")
        assert run("--out", tmp_path, "execute", pea, pet) == 1
        assert "stuck" in capsys.readouterr().err


class TestCheck:
    def write(self, tmp_path, name, symbols):
        p = tmp_path / f"{name}.txt"
        p.write_text("\n".join(symbols) + "\n")
        return p

    def props(self, tmp_path, text):
        p = tmp_path / "props.ltl"
        p.write_text(text)
        return p

    def test_false_exits_3(self, tmp_path):
        tr = self.write(tmp_path, "early", "V" * 15 + "W" * 5 + "M" * 20)
        assert run("--out", tmp_path, "check", tr, "--properties", self.props(tmp_path, "G<=30 !memory\n")) == 3
        assert (tmp_path / "verdicts.csv").read_text() == "trace_id,property_id,verdict\nearly,0,FALSE\n"

    def test_true_exits_0(self, tmp_path):
        tr = self.write(tmp_path, "v40", "V" * 40)
        assert run("--out", tmp_path, "check", tr, "--properties", self.props(tmp_path, "G<=30 !memory\n")) == 0

    def test_unknown_exits_4(self, tmp_path):
        tr = self.write(tmp_path, "v5", "V" * 5)
        assert run("--out", tmp_path, "check", tr, "--properties", self.props(tmp_path, "F<=10 memory\n")) == 4

    def test_bad_formula_is_config_error(self, tmp_path):
        tr = self.write(tmp_path, "v5", "V" * 5)
        assert run("--out", tmp_path, "check", tr, "--properties", self.props(tmp_path, "G<= memory\n")) == 2

    def test_classify(self, tmp_path, capsys):
        a = self.write(tmp_path, "a", "VVVV")
        b = self.write(tmp_path, "b", "VWWMM")
        assert run("--out", tmp_path, "classify", a, b) == 0
        assert (tmp_path / "classes.csv").read_text() == "trace_id,group\na,I.a\nb,II.b\n"
        assert "II.b=1" in capsys.readouterr().out


class TestPipeline:
    def test_staged_equals_one_shot(self, tmp_path, cfg):
        st, pp = tmp_path / "staged", tmp_path / "pipe"
        common = ["--jobs", 2]
        assert run("--out", st, *common, "simulate", "--config", cfg) == 0
        assert run("--out", st, *common, "entropy", st / "snapshots.csv", "--emit-plot-data") == 0
        assert run("--out", st, "mine", st / "pet.csv", "--augment", "idiotypic") == 0
        assert run("--out", st, "execute", st / "pea.json", st / "pet.csv") == 0
        assert run("--out", st, "classify", st / "trace.txt") == 0
        staged_code = run("--out", st, "check", st / "trace.txt")
        code = run("--out", pp, *common, "pipeline", "--config", cfg, "--augment", "idiotypic", "--emit-plot-data")
        assert code == staged_code
        for name in ARTIFACTS:
            assert (st / name).read_bytes() == (pp / name).read_bytes(), name

    def test_pipeline_with_fixed_pea(self, tmp_path, cfg):
        code = run("--out", tmp_path, "pipeline", "--config", cfg, "--pea", "idiotypic")
        assert code in (0, 3, 4)
        assert not (tmp_path / "pea.json").exists()
        assert (tmp_path / "trace.txt").read_text().startswith("V\n")

    def test_batch_mode(self, tmp_path, cfg, capsys):
        code = run("--out", tmp_path, "--jobs", 2, "pipeline", "--config", cfg, "--runs", 4)
        assert code in (0, 3, 4)
        groups = (tmp_path / "groups.csv").read_text().splitlines()[1:]
        assert sum(int(line.split(",")[1]) for line in groups) == 4
        rows = (tmp_path / "verdicts.csv").read_text().splitlines()
        assert len(rows) == 1 + 4 * 3


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "pemonitor", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in ("simulate", "entropy", "mine", "execute", "classify", "check", "pipeline"):
        assert cmd in res.stdout
    for flag in ("--out", "--seed", "--jobs"):
        assert flag in res.stdout


def test_bad_jobs():
    with pytest.raises(SystemExit) as info:
        main(["--jobs", "0", "classify", "x"])
    assert info.value.code == 2
