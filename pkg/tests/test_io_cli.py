import csv
import json
import math
import shutil
import subprocess

import numpy as np
import pytest

import trigmoment as tm
from trigmoment import io
from trigmoment.cli import RunConfig, CLIError, main
from conftest import pipeline, random_instance
from oracles import random_unitary


def write_moments(path, N, d, S):
    path.write_text(json.dumps(io.moments_to_dict(tm.validate_moments(N, d, S))))
    return path


def write_param(path, kind, coeffs):
    path.write_text(json.dumps({"kind": kind, "coeffs": [io.matrix_to_json(C) for C in coeffs]}))
    return path


@pytest.fixture
def scalar_file(tmp_path):
    return write_moments(tmp_path / "scalar.json", 1, 1, [[[1]], [[0]]])


@pytest.fixture
def rank1_file(tmp_path):
    return write_moments(tmp_path / "rank1.json", 1, 1, [[[1]], [[1j]]])


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestSerialization:
    def test_matrix_round_trip(self, rng):
        M = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        back = io.matrix_from_json(json.loads(io.dumps(io.matrix_to_json(M))), "M")
        np.testing.assert_array_equal(back, M)

    def test_empty_matrix(self):
        assert io.matrix_from_json([], "V").shape == (0, 0)

    def test_bad_entry_names_field(self):
        with pytest.raises(tm.ValidationError) as exc:
            io.moments_from_dict({"N": 1, "d": 0, "S": [[[[1, 0, 2]]]]})
        assert "S[0][0][0]" in exc.value.issues[0]

    def test_missing_keys(self):
        with pytest.raises(tm.ValidationError) as exc:
            io.moments_from_dict({"N": 1})
        assert len(exc.value.issues) == 2

    def test_ragged(self):
        with pytest.raises(tm.ValidationError, match="ragged"):
            io.matrix_from_json([[[1, 0]], [[1, 0], [0, 0]]], "M")

    def test_dumps_float_format(self):
        assert io.dumps({"x": 0.1, "n": 3, "ok": True}) == '{\n  "x": 0.10000000000000001,\n  "n": 3,\n  "ok": true\n}\n'

    def test_dumps_rejects_nan(self):
        with pytest.raises(ValueError):
            io.dumps([float("nan")])

    def test_solution_round_trip(self, rng):
        _, _, m = random_instance(rng, 2, 3, 6)
        a = pipeline(m)
        sol = tm.canonical_solution(a, random_unitary(rng, a.delta))
        back = io.solution_from_dict(json.loads(io.dumps(io.solution_to_dict(sol))), 2)
        for x, y in zip(sol.atoms, back.atoms):
            assert x.theta == y.theta
            np.testing.assert_array_equal(x.weight, y.weight)

    def test_grid_round_trip(self, scalar_model):
        g = tm.poisson_invert(tm.resolvent_sampler(scalar_model, tm.identity_param(scalar_model)), [[1]], 0.9, 256)
        back = io.solution_from_dict(json.loads(io.dumps(io.solution_to_dict(g))), 1)
        np.testing.assert_array_equal(back.cumulative, g.cumulative)
        assert back.r_poisson == 0.9

    def test_param_round_trip(self, scalar_model):
        p = tm.make_polynomial_param(scalar_model, [[[0.1]], [[0.5j]]])
        q = io.param_from_dict(json.loads(io.dumps(io.param_to_dict(p))), scalar_model)
        assert q.kind == "polynomial"
        np.testing.assert_array_equal(q.value(0.3), p.value(0.3))

    def test_param_bad_kind(self, scalar_model):
        with pytest.raises(tm.ValidationError):
            io.param_from_dict({"kind": "rational", "coeffs": [[[[1, 0]]]]}, scalar_model)


class TestRunConfig:
    @pytest.mark.parametrize("kw", [dict(rho=1.0), dict(r=0.0), dict(grid=1000), dict(tol_psd=0.0), dict(command="plot")])
    def test_rejects(self, tmp_path, kw):
        base = dict(command="extend", moments=tmp_path / "m.json", out=None)
        base.update(kw)
        with pytest.raises(CLIError):
            RunConfig(**base).validate()

    def test_accepts_defaults(self, tmp_path):
        RunConfig(command="check", moments=tmp_path / "m.json", out=None).validate()


class TestCheck:
    def test_identity_file(self, scalar_file, capsys):
        code, out, _ = run(["check", scalar_file], capsys)
        doc = json.loads(out)
        assert code == 0 and doc["solvable"] and doc["rank"] == 2

    def test_not_solvable(self, tmp_path, capsys):
        f = write_moments(tmp_path / "bad.json", 1, 1, [[[1]], [[2]]])
        code, out, err = run(["check", f], capsys)
        doc = json.loads(out)
        assert code == 2 and not doc["solvable"]
        assert doc["min_eigenvalue"] == pytest.approx(-1, abs=1e-12)

    def test_garbled(self, tmp_path, capsys):
        f = tmp_path / "g.json"
        f.write_text('{"N": 1, "d": 1, "S": [[[[1, 0]]], ')
        code, _, err = run(["check", f], capsys)
        assert code == 1 and "line 1" in err

    def test_field_diagnostic(self, tmp_path, capsys):
        f = tmp_path / "g.json"
        f.write_text('{"N": 1, "d": 1, "S": [[[[1, 0]]], [[["a", 0]]]]}')
        code, _, err = run(["check", f], capsys)
        assert code == 1 and "S[1][0][0]" in err

    def test_missing_file(self, tmp_path, capsys):
        code, _, _ = run(["check", tmp_path / "nope.json"], capsys)
        assert code == 1


class TestCanonicalCmd:
    def test_identity_param(self, scalar_file, capsys):
        code, out, _ = run(["canonical", scalar_file, "--param-identity"], capsys)
        doc = json.loads(out)
        assert code == 0 and doc["verification"]["passed"]
        thetas = [at["theta"] for at in doc["atoms"]]
        np.testing.assert_allclose(thetas, [math.pi, 2 * math.pi], atol=1e-12)
        np.testing.assert_allclose([at["weight"][0][0][0] for at in doc["atoms"]], [0.5, 0.5], atol=1e-12)

    def test_d0(self, tmp_path, capsys):
        f = write_moments(tmp_path / "d0.json", 2, 0, [[[2, 1j], [-1j, 1]]])
        code, out, _ = run(["canonical", f], capsys)
        doc = json.loads(out)
        assert code == 0 and len(doc["atoms"]) == 1
        assert doc["atoms"][0]["theta"] == pytest.approx(2 * math.pi)
        np.testing.assert_allclose(io.matrix_from_json(doc["atoms"][0]["weight"], "w"), [[2, 1j], [-1j, 1]])

    def test_defect_mismatch(self, scalar_file, tmp_path, capsys):
        p = write_param(tmp_path / "p.json", "constant", [np.eye(2)])
        code, _, err = run(["canonical", scalar_file, "--param", p], capsys)
        assert code == 1 and "expected δ=1, got 2" in err

    def test_non_unitary(self, scalar_file, tmp_path, capsys):
        p = write_param(tmp_path / "p.json", "constant", [[[0.5]]])
        code, _, _ = run(["canonical", scalar_file, "--param", p], capsys)
        assert code == 1

    def test_parameter_required(self, scalar_file, capsys):
        code, _, err = run(["canonical", scalar_file], capsys)
        assert code == 1 and "δ=1" in err

    def test_then_verify(self, tmp_path, rng, capsys):
        _, _, m = random_instance(rng, 2, 2, 5)
        mf = tmp_path / "m.json"
        mf.write_text(io.dumps(io.moments_to_dict(m)))
        a = pipeline(m)
        pf = write_param(tmp_path / "p.json", "constant", [random_unitary(rng, a.delta)])
        sf = tmp_path / "sol.json"
        assert run(["canonical", mf, "--param", pf, "--out", sf], capsys)[0] == 0
        code, out, _ = run(["verify", mf, sf, "--verify-tol", "1e-8"], capsys)
        assert code == 0
        direct = tm.verify_solution(tm.canonical_solution(a, io.param_from_dict(json.loads(pf.read_text()), a)), m)
        assert abs(json.loads(out)["max_residual"] - direct.max_residual) <= 1e-12

    def test_not_solvable(self, tmp_path, capsys):
        f = write_moments(tmp_path / "bad.json", 1, 1, [[[1]], [[2]]])
        code, out, _ = run(["canonical", f, "--param-identity"], capsys)
        assert code == 2 and json.loads(out)["solvable"] is False


class TestExtendCmd:
    def test_scalar(self, tmp_path, scalar_file, capsys):
        p = write_param(tmp_path / "p.json", "constant", [[[0.3]]])
        code, out, _ = run(["extend", scalar_file, "--param", p, "--nmax", 4], capsys)
        doc = json.loads(out)
        vals = [complex(*M[0][0]) for M in doc["moments"]]
        assert code == 0 and doc["consistent"]
        np.testing.assert_allclose(vals, [1, 0, 0.3, 0, 0.09], atol=1e-12)

    def test_rank_one(self, rank1_file, capsys):
        code, out, _ = run(["extend", rank1_file, "--nmax", 3], capsys)
        vals = [complex(*M[0][0]) for M in json.loads(out)["moments"]]
        np.testing.assert_allclose(vals, [1, 1j, -1, -1j], atol=1e-12)

    def test_default_nmax_echoes(self, rank1_file, capsys):
        code, out, _ = run(["extend", rank1_file], capsys)
        doc = json.loads(out)
        assert len(doc["moments"]) == 2 and doc["max_deviation"] < 1e-12

    def test_contractivity_failure(self, tmp_path, scalar_file, capsys):
        p = write_param(tmp_path / "p.json", "polynomial", [[[0.5]], [[0.6]]])
        code, _, err = run(["extend", scalar_file, "--param", p], capsys)
        assert code == 1 and "zeta=" in err

    def test_d0_rejected(self, tmp_path, capsys):
        f = write_moments(tmp_path / "d0.json", 1, 0, [[[1]]])
        assert run(["extend", f], capsys)[0] == 1


class TestResolventCmd:
    def test_values(self, tmp_path, scalar_file, capsys):
        p = write_param(tmp_path / "p.json", "constant", [[[1]]])
        code, out, _ = run(["resolvent", scalar_file, "--param", p, "--zeta", "0.5,0", "--zeta", "2,0"], capsys)
        vals = json.loads(out)["values"]
        assert code == 0
        assert complex(*vals[0]["F"][0][0]) == pytest.approx(4 / 3)
        assert complex(*vals[1]["F"][0][0]) == pytest.approx(-1 / 3)

    def test_needs_zeta(self, scalar_file, capsys):
        assert run(["resolvent", scalar_file, "--param-identity"], capsys)[0] == 1


class TestInvertCmd:
    def test_scalar_csv(self, tmp_path, scalar_file, capsys):
        p = write_param(tmp_path / "p.json", "constant", [[[1]]])
        out = tmp_path / "grid.json"
        code, _, _ = run(["invert", scalar_file, "--param", p, "--r", "0.999", "--out", out], capsys)
        assert code == 0
        with open(tmp_path / "grid.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["theta", "trace", "m0_0_re", "m0_0_im"]
        th = np.array([float(r[0]) for r in rows[1:]])
        tr = np.array([float(r[1]) for r in rows[1:]])
        assert len(th) == (1 << 14) + 1

        def jump(c):
            return np.interp(c + 0.2, th, tr) - np.interp(c - 0.2, th, tr)

        assert jump(math.pi) == pytest.approx(0.5, abs=0.02)
        # the step at 2π straddles the wrap-around
        assert tr[-1] - np.interp(2 * math.pi - 0.2, th, tr) + np.interp(0.2, th, tr) == pytest.approx(0.5, abs=0.02)

    def test_zero_moments(self, tmp_path, capsys):
        f = write_moments(tmp_path / "z.json", 1, 1, [[[0]], [[0]]])
        code, out, _ = run(["invert", f, "--grid", 256], capsys)
        doc = json.loads(out)
        assert code == 0
        assert all(v == 0 for M in doc["cumulative"] for row in M for e in row for v in e)

    def test_bad_grid(self, scalar_file, capsys):
        assert run(["invert", scalar_file, "--param-identity", "--grid", 1000], capsys)[0] == 1

    def test_bad_r(self, scalar_file, capsys):
        assert run(["invert", scalar_file, "--param-identity", "--r", 1.0], capsys)[0] == 1


class TestDeterminism:
    @pytest.mark.parametrize("cmd", [["canonical", "--param-identity"], ["extend", "--param-identity", "--nmax", "5"],
                                     ["invert", "--param-identity", "--grid", "512"]])
    def test_byte_identical(self, tmp_path, rng, cmd, capsys):
        _, _, m = random_instance(rng, 2, 2, 4)
        f = tmp_path / "m.json"
        f.write_text(io.dumps(io.moments_to_dict(m)))
        outs = []
        for k in range(2):
            o = tmp_path / f"out{k}.json"
            run([cmd[0], f, *cmd[1:], "--out", o], capsys)
            outs.append(o.read_bytes())
        assert outs[0] == outs[1] and outs[0]


@pytest.mark.skipif(shutil.which("trigmoment") is None, reason="console script not installed")
def test_console_script_exit_code(tmp_path):
    f = write_moments(tmp_path / "bad.json", 1, 1, [[[1]], [[2]]])
    proc = subprocess.run(["trigmoment", "check", str(f)], capture_output=True, text=True)
    assert proc.returncode == 2
