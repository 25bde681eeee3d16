import json
import math

import numpy as np
import pytest

from phasekit import cli


def write_config(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


EXP_DOC = {"potential": {"family": "exponential",
                         "params": {"amplitude": -3.0}},
           "channels": [[1.0, 0.0], [2.0, 1.0]],
           "methods": ["integral", "volterra", "ode", "picard"]}


class TestCompute:
    def test_csv_header_and_rows(self, tmp_path):
        cfg = write_config(tmp_path, EXP_DOC)
        out = tmp_path / "out"
        assert cli.main(["compute", "--config", cfg, "--out", str(out)]) == 0
        lines = (out / "compute.csv").read_text().splitlines()
        assert lines[0] == ("k,ell,method,delta,err_quad,err_tail,"
                            "amplitude_inf,jost_modulus")
        assert len(lines) == 1 + 2 * 4

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_config(tmp_path, EXP_DOC)
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            cli.main(["compute", "--config", cfg, "--out", str(out)])
            outs.append((out / "compute.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_jobs_do_not_change_output(self, tmp_path):
        cfg = write_config(tmp_path, EXP_DOC)
        out1, out4 = tmp_path / "j1", tmp_path / "j4"
        cli.main(["compute", "--config", cfg, "--out", str(out1), "--jobs", "1"])
        cli.main(["compute", "--config", cfg, "--out", str(out4), "--jobs", "4"])
        assert (out1 / "compute.csv").read_bytes() == \
            (out4 / "compute.csv").read_bytes()

    def test_cross_method_discrepancy_in_sidecar(self, tmp_path):
        cfg = write_config(tmp_path, EXP_DOC)
        out = tmp_path / "out"
        cli.main(["compute", "--config", cfg, "--out", str(out)])
        meta = json.loads((out / "compute.json").read_text())
        assert all(v < 1e-6 for v in meta["discrepancy"].values())

    def test_unsupported_method_is_row_error_not_crash(self, tmp_path):
        doc = {"potential": {"family": "inverse_square", "params": {"lam": 2.0}},
               "channels": [[1.0, 0.0]],
               "methods": ["integral", "picard"]}
        cfg = write_config(tmp_path, doc)
        out = tmp_path / "out"
        rc = cli.main(["compute", "--config", cfg, "--out", str(out)])
        assert rc == 1  # errored row -> nonzero, but the run completed
        lines = (out / "compute.csv").read_text().splitlines()
        assert len(lines) == 3
        good = lines[1].split(",")
        assert float(good[3]) == pytest.approx(-math.pi / 2, abs=1e-6)
        bad = lines[2].split(",")
        assert bad[2] == "picard" and bad[3] == ""

    def test_missing_family_is_parse_error(self, tmp_path):
        cfg = write_config(tmp_path, {"potential": {"params": {}},
                                      "channels": [[1.0, 0.0]]})
        with pytest.raises(SystemExit, match="family"):
            cli.main(["compute", "--config", cfg, "--out", str(tmp_path / "o")])

    def test_empty_channels_rejected(self, tmp_path):
        cfg = write_config(tmp_path, {"potential": EXP_DOC["potential"],
                                      "channels": []})
        with pytest.raises(SystemExit, match="channels"):
            cli.main(["compute", "--config", cfg, "--out", str(tmp_path / "o")])


class TestSubcommands:
    def test_unknown_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["bogus"])
        assert exc.value.code == 2

    def test_validate_exits_zero(self, capsys):
        assert cli.main(["validate"]) == 0
        out = capsys.readouterr().out
        assert "[PASS]" in out and "[FAIL]" not in out

    def test_scan_monotone_vanishing(self, tmp_path):
        doc = {"potential": EXP_DOC["potential"],
               "k_grid": {"min": 0.1, "max": 100.0, "n": 40}}
        cfg = write_config(tmp_path, doc)
        out = tmp_path / "scan"
        assert cli.main(["scan", "--config", cfg, "--out", str(out)]) == 0
        lines = (out / "scan.csv").read_text().splitlines()
        assert len(lines) == 41
        deltas = [float(l.split(",")[3]) for l in lines[1:]]
        tail = deltas[-10:]
        assert all(a > b for a, b in zip(tail, tail[1:]))
        assert abs(deltas[-1]) < 0.02

    def test_length(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"potential": {"family": "barrier",
                                                    "params": {"height": 1.0}}})
        out = tmp_path / "len"
        assert cli.main(["length", "--config", cfg, "--out", str(out)]) == 0
        doc = json.loads((out / "length.json").read_text())
        assert doc["a0"] == pytest.approx(1.0 - math.tanh(1.0), abs=1e-6)

    def test_levinson(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"potential": {"family": "square_well",
                                                    "params": {"depth": 6.0}}})
        out = tmp_path / "lev"
        assert cli.main(["levinson", "--config", cfg, "--out", str(out)]) == 0
        doc = json.loads((out / "levinson.json").read_text())
        assert doc["n_estimate"] == 1 == doc["node_count"]

    def test_bound_dominance_column(self, tmp_path):
        cfg = write_config(tmp_path, {"potential": EXP_DOC["potential"],
                                      "k": 2.0})
        out = tmp_path / "bound"
        assert cli.main(["bound", "--config", cfg, "--out", str(out)]) == 0
        lines = (out / "bound.csv").read_text().splitlines()
        assert lines[0].startswith("r,Delta,abs_delta,dominated")
        assert all(l.split(",")[3] == "1" for l in lines[1:])

    def test_twodim(self, tmp_path):
        cfg = write_config(tmp_path, {"potential": {"family": "barrier",
                                                    "params": {"height": 1.0}},
                                      "k_list": [1e-4, 1e-6]})
        out = tmp_path / "td"
        assert cli.main(["twodim", "--config", cfg, "--out", str(out)]) == 0
        lines = (out / "twodim.csv").read_text().splitlines()
        assert lines[0] == "k,delta,product"
        assert len(lines) == 3

    def test_fit_json_fields(self, tmp_path, capsys):
        doc = {"potential": {"family": "power_origin",
                             "params": {"v0": 1.0, "alpha": 0.5}},
               "k_grid": {"min": 50.0, "max": 500.0, "n": 8}}
        cfg = write_config(tmp_path, doc)
        out = tmp_path / "fit"
        assert cli.main(["fit", "--config", cfg, "--out", str(out)]) == 0
        rep = json.loads((out / "fit.json").read_text())
        for key in ("exponent", "coefficient", "predicted_exponent",
                    "predicted_coefficient", "residual", "k_window"):
            assert key in rep
        assert rep["exponent"] == pytest.approx(-0.5, abs=0.01)

    def test_plot_renders_figure(self, tmp_path):
        cfg = write_config(tmp_path, EXP_DOC)
        out = tmp_path / "out"
        cli.main(["compute", "--config", cfg, "--out", str(out), "--plot"])
        png = out / "compute.png"
        assert png.exists() and png.stat().st_size > 1000
