import json
import subprocess
import sys

import numpy as np
import pytest

from microcosm.cli import JobSpec, load_spec, main, run
from microcosm.errors import InvalidInputError

N3_SPEC = {
    "n": 3,
    "omega": [[0, -0.5, 0.2], [0.5, 0, -0.1], [-0.2, 0.1, 0]],
    "p": [[1.0, 0.2, 0.0], [0.2, 0.5, 0.1], [0.0, 0.1, -0.3]],
}


@pytest.fixture
def spec_file(tmp_path):
    def write(doc):
        path = tmp_path / "spec.json"
        path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
        return str(path)

    return write


def invoke(capsys, *argv):
    status = main(list(argv))
    captured = capsys.readouterr()
    return status, captured.out, captured.err


class TestLoadSpec:
    def test_shorthand(self):
        spec, s0, params = load_spec('{"A": 1, "B": 0.5, "C": 0, "w": 0.3}')
        assert spec.form.value == "alekseevsky" and s0 is None
        assert (params.a_, params.b_, params.c_, params.w) == pytest.approx((1, 0.5, 0, 0.3))

    def test_params_from_brinkmann_matrices(self):
        spec, _, params = load_spec(json.dumps({"n": 2, "omega": [[0, -1], [1, 0]], "p": [[2, 0], [0, 1]]}))
        # Alekseevsky p = p_B + omega^2 = diag(1, 0)
        assert (params.a_, params.b_, params.c_, params.w) == pytest.approx((0.5, 0.5, 0.0, 1.0))

    def test_parse_error_location(self):
        with pytest.raises(InvalidInputError, match="line 2, column"):
            load_spec('{"A": 1,\n "B": }')

    @pytest.mark.parametrize(
        "doc, field",
        [
            ({"n": 2, "omega": [[0, 1], [-1, 0]]}, "'p'"),
            ({"n": 2, "omega": [[0, 1]], "p": [[1, 0], [0, 1]]}, "'omega'"),
            ({"A": "x", "B": 0, "C": 0, "w": 0}, "'A'"),
            ({"n": 0, "omega": [], "p": []}, "'n'"),
        ],
    )
    def test_field_errors(self, doc, field):
        with pytest.raises(InvalidInputError, match=field):
            load_spec(json.dumps(doc))

    def test_job_validation(self):
        spec, _, _ = load_spec('{"A": 1, "B": 0, "C": 0, "w": 0}')
        with pytest.raises(InvalidInputError):
            JobSpec(spec=spec, command="sachs", u_range=(1, 0))
        with pytest.raises(InvalidInputError):
            JobSpec(spec=spec, command="sachs", samples=1)


class TestCommands:
    def test_conjugate_unit(self, capsys, spec_file):
        status, out, _ = invoke(capsys, "conjugate", "--spec", spec_file({"A": 1, "B": 0, "C": 0, "w": 0}))
        assert status == 0
        doc = json.loads(out)
        pts = [r["u"] for r in doc["result"]["points"]]
        np.testing.assert_allclose(pts, [np.pi, 2 * np.pi, 3 * np.pi], atol=1e-8)
        assert doc["result"]["exists"] is True and doc["schema"] == 1

    def test_conjugate_window(self, capsys, spec_file):
        path = spec_file({"A": 1, "B": 0, "C": 0, "w": 0})
        _, out, _ = invoke(capsys, "conjugate", "--spec", path, "--u-min", "1", "--u-max", "5")
        np.testing.assert_allclose([r["u"] for r in json.loads(out)["result"]["points"]], [1 + np.pi], atol=1e-8)

    @pytest.mark.parametrize("command", ["riccati", "sachs", "orbit", "conjugate", "series", "verify"])
    def test_all_commands_n3(self, capsys, spec_file, command):
        status, out, err = invoke(capsys, command, "--spec", spec_file(N3_SPEC), "--u-max", "2", "--samples", "5")
        assert status == 0, err
        assert json.loads(out)["command"] == command

    def test_riccati_residual(self, capsys, spec_file):
        _, out, _ = invoke(capsys, "riccati", "--spec", spec_file({"A": 0.3, "B": 0.7, "C": -0.4, "w": 0.6}))
        sols = json.loads(out)["result"]["solutions"]
        assert len(sols) == 4
        assert max(s["residual"] for s in sols) <= 1e-10

    def test_verify_passes(self, capsys, spec_file):
        status, out, _ = invoke(
            capsys, "verify", "--spec", spec_file({"A": 0.4, "B": 0.3, "C": -0.2, "w": 0.5}), "--u-max", "4"
        )
        assert status == 0
        assert json.loads(out)["result"]["passed"]

    def test_series_residual_small(self, capsys, spec_file):
        _, out, _ = invoke(capsys, "series", "--spec", spec_file(N3_SPEC), "--order", "10")
        assert json.loads(out)["result"]["residual"] <= 1e-6


class TestOutput:
    def test_byte_determinism(self, capsys, spec_file):
        path = spec_file(N3_SPEC)
        outs = [invoke(capsys, "orbit", "--spec", path, "--u-max", "1", "--samples", "4")[1] for _ in range(2)]
        assert outs[0] == outs[1]
        assert "-0.0," not in outs[0] and "NaN" not in outs[0]

    def test_csv_header(self, capsys, spec_file):
        path = spec_file({"A": -1.0, "B": 0.2, "C": 0.0, "w": 0.0})
        _, out, _ = invoke(capsys, "sachs", "--spec", path, "--csv", "--u-max", "1", "--samples", "3")
        lines = out.splitlines()
        assert lines[0].split(",")[0] == "u" and lines[0].split(",")[-1] == "residual"
        assert len(lines) == 4

    def test_csv_needs_table(self, capsys, spec_file):
        status, _, err = invoke(capsys, "riccati", "--spec", spec_file(N3_SPEC), "--csv")
        assert status == 2 and "--csv" in err

    def test_output_file(self, capsys, spec_file, tmp_path):
        target = tmp_path / "out.json"
        status, out, _ = invoke(capsys, "series", "--spec", spec_file(N3_SPEC), "--out", str(target))
        assert status == 0 and out == ""
        assert json.loads(target.read_text())["command"] == "series"

    def test_run_returns_text(self):
        spec, _, params = load_spec('{"A": 1, "B": 0, "C": 0, "w": 0}')
        status, text = run(JobSpec(spec=spec, command="riccati", dim2_params=params))
        assert status == 0 and json.loads(text)["result"]["method"] == "dim2"


class TestExitCodes:
    def test_skewness_violation(self, capsys, spec_file):
        doc = {"n": 2, "omega": [[0, 1], [1, 0]], "p": [[1, 0], [0, 1]]}
        status, _, err = invoke(capsys, "riccati", "--spec", spec_file(doc))
        assert status == 2 and "skew" in err

    def test_parse_error(self, capsys, spec_file):
        status, _, err = invoke(capsys, "riccati", "--spec", spec_file('{"A": 1,\n'))
        assert status == 2 and "line" in err

    def test_missing_file(self, capsys, tmp_path):
        status, _, err = invoke(capsys, "riccati", "--spec", str(tmp_path / "missing.json"))
        assert status == 2 and "cannot read" in err

    def test_bad_range(self, capsys, spec_file):
        status, _, _ = invoke(capsys, "sachs", "--spec", spec_file(N3_SPEC), "--u-min", "2", "--u-max", "1")
        assert status == 2

    def test_entry_point(self, spec_file):
        proc = subprocess.run(
            [sys.executable, "-m", "microcosm.cli", "conjugate", "--spec", spec_file({"A": 1, "B": 0, "C": 0, "w": 0})],
            capture_output=True,
            text=True,
            check=False,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["result"]["method"] == "dim2"
