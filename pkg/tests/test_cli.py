import csv
import io
import json
import math

import pytest

from quditrwa import cli
from quditrwa.eigen import ConvergenceError

JC = {"qudits": [{"qubit": {"freq": 6.0}}], "resonators": [{"freq": 7.0}], "couplings": [[{"uniform": 0.1}]]}
RES_JC = {"qudits": [{"qubit": {"freq": 7.0}}], "resonators": [{"freq": 7.0}], "couplings": [[{"uniform": 0.1}]]}
TWO = {
    "qudits": [{"qubit": {"freq": 6.0}}, {"qubit": {"freq": 6.3}}],
    "resonators": [{"freq": 7.0}],
    "couplings": [[{"uniform": 0.1}, {"uniform": 0.12}]],
}
TRANSMONS = {
    "qudits": [{"transmon": {"EC": 0.3, "EJ": 16.5375}}, {"transmon": {"EC": 0.3, "EJ": 16.5375}}],
    "resonators": [{"freq": 7.0}],
    "couplings": [[{"uniform": 0.1}, {"uniform": 0.1}]],
}


@pytest.fixture
def device(tmp_path):
    def _write(obj, name="dev.json"):
        path = tmp_path / name
        path.write_text(json.dumps(obj))
        return str(path)

    return _write


def _run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def _table(text):
    rows = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(rows))))


class TestSpectrum:
    # ------------------------------------------------------------------ #
    #  spectrum                                                            #
    # ------------------------------------------------------------------ #
    def test_rows_and_header(self, device, capsys):
        code, out, _ = _run(["spectrum", "--config", device(TWO), "--nmax", "1"], capsys)
        assert code == 0
        assert out.startswith("# quditrwa 0.1.0 command=spectrum config-sha256=")
        rows = _table(out)
        assert [r["N"] for r in rows] == ["-1", "0", "0", "0", "1", "1", "1", "1"]
        assert float(rows[0]["E"]) == pytest.approx(-2.65, abs=1e-12)
        assert rows[0]["dominant"] == "|0;0,0>"

    def test_byte_deterministic(self, device, tmp_path, capsys):
        path = device(TWO)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert cli.main(["spectrum", "--config", path, "--nmax", "2", "--out", str(a)]) == 0
        assert cli.main(["spectrum", "--config", path, "--nmax", "2", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_half_integer_nmax_and_dump(self, device, tmp_path, capsys):
        d = tmp_path / "mats"
        code, out, _ = _run(["spectrum", "--config", device(JC), "--nmax", "3/2", "--dump-matrices", str(d)], capsys)
        assert code == 0
        assert sorted(p.name for p in d.iterdir()) == ["sector_N-0.5.csv", "sector_N0.5.csv", "sector_N1.5.csv"]


class TestOtherCommands:
    # ------------------------------------------------------------------ #
    #  sweep, rwa-check, tc, evolve                                        #
    # ------------------------------------------------------------------ #
    def test_sweep(self, device, capsys):
        code, out, _ = _run(["sweep", "--config", device(TRANSMONS), "--target", "qudit[1].transmon.EJ",
                             "--from", "14.5", "--to", "18.5", "--steps", "21", "--nmax", "-1"], capsys)
        assert code == 0
        rows = _table(out)
        assert len(rows) == 21
        assert list(rows[0])[:2] == ["value", "f01[1]"]
        footer = [l for l in out.splitlines() if l.startswith("# gap N=-1")][0]
        assert "avoided_crossings=1 bare_intersections=1" in footer

    def test_rwa_check(self, device, capsys):
        code, out, _ = _run(["rwa-check", "--config", device(JC), "--steps", "5", "--angular"], capsys)
        assert code == 0
        rows = _table(out)
        assert len(rows) == 5 * 7
        ground = [r for r in rows if r["level"] == "ground"][-1]
        assert float(ground["relative_percent"]) == pytest.approx(-0.3898, abs=1e-4)

    def test_rwa_check_rejects_two_qubits(self, device, capsys):
        code, _, err = _run(["rwa-check", "--config", device(TWO)], capsys)
        assert code == 1 and "one qubit" in err

    def test_tc(self, capsys):
        code, out, _ = _run(["tc", "--freq", "7", "--couplings", "0.1,0.1,0.1,0.1"], capsys)
        assert code == 0
        assert "K = 4" in out
        assert "splitting = 0.4 " in out

    def test_evolve(self, device, capsys):
        g = 0.1
        t1 = math.pi / (2 * g)
        code, out, _ = _run(["evolve", "--config", device(RES_JC), "--state", "1 @ |0;1>", "--t1", repr(t1),
                             "--dt", repr(t1 / 100), "--observe", "photon_number(0)", "--amplitudes"], capsys)
        assert code == 0
        rows = _table(out)
        assert len(rows) == 101
        assert float(rows[-1]["photon_number(0)"]) == pytest.approx(1.0, abs=1e-10)
        assert "re|1;0>" in rows[0]

    def test_evolve_grid_mismatch(self, device, capsys):
        code, _, err = _run(["evolve", "--config", device(RES_JC), "--state", "1 @ |0;1>",
                             "--t1", "1", "--dt", "0.3"], capsys)
        assert code == 1 and "multiple" in err


class TestExitCodes:
    # ------------------------------------------------------------------ #
    #  failures                                                            #
    # ------------------------------------------------------------------ #
    def test_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["spectrum"])
        assert exc.value.code == 1

    def test_bad_config(self, device, capsys):
        bad = dict(JC, couplings=[[{"uniform": 0.1}, {"uniform": 0.1}]])
        code, _, err = _run(["spectrum", "--config", device(bad), "--nmax", "1"], capsys)
        assert code == 1 and "coupling row 0" in err
        code, _, err = _run(["spectrum", "--config", "/nonexistent.json", "--nmax", "1"], capsys)
        assert code == 1

    def test_numerical_failure(self, device, capsys, monkeypatch):
        def boom(*a, **k):
            raise ConvergenceError(50, 1.0, 1e-12)

        monkeypatch.setattr(cli, "spectrum", boom)
        code, _, err = _run(["spectrum", "--config", device(JC), "--nmax", "1"], capsys)
        assert code == 2 and "did not converge" in err
        assert len(err.strip().splitlines()) == 1
