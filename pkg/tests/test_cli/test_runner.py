"""
Tests for the command-line runner.
"""
import json
import sys
from pathlib import Path

import pandas as pd
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from config.settings import reset_settings
from core.errors import ConvergenceError, InputError
from src import sis_runner
from src.sis_runner import parse_tolerances, resolve_initial_state, run


@pytest.fixture
def run_json(tmp_path, capsys):
    """Run a command with --json and return (exit code, payload)."""
    def _run(*argv: str):
        code = run(["--json", "--log-dir", str(tmp_path / "logs"), *argv])
        out = capsys.readouterr().out
        return code, json.loads(out) if out.strip() else None
    return _run


class TestAnalyze:
    """Test the analyze command."""

    def test_zoonosis(self, run_json, models_dir):
        code, payload = run_json("analyze", str(models_dir / "zoonosis.model"))
        assert code == 0
        assert payload["r0"] == pytest.approx(2.0)
        assert [a["members"] for a in payload["atoms"]] == [["W"], ["D"], ["H"]]
        assert payload["supercritical_antichains"] == 4
        assert payload["monatomic"] is False
        assert payload["spectral_bound"]["sign"] == "+"

    def test_text_output(self, tmp_path, capsys, models_dir):
        code = run(["--log-dir", str(tmp_path), "analyze", str(models_dir / "westnile.model")])
        assert code == 0
        out = capsys.readouterr().out
        assert "ATOMIC DECOMPOSITION: westnile" in out
        assert "Monatomic: true" in out

    def test_logs_written(self, tmp_path, capsys, models_dir):
        run(["--log-dir", str(tmp_path), "analyze", str(models_dir / "zoonosis.model")])
        events = json.loads((tmp_path / "events.json").read_text())
        kinds = [e["event_type"] for e in events]
        assert kinds[0] == "analysis_start"
        assert kinds[-1] == "analysis_complete"
        assert (tmp_path / "analysis.log").exists()

    def test_invalid_model_is_input_error(self, run_json, tmp_path):
        path = tmp_path / "bad.model"
        path.write_text('{"kernel": [[1, -1], [0, 1]], "gamma": [1, 1], "incidence": {"family": "mass_action"}}')
        code, payload = run_json("analyze", str(path))
        assert code == 2
        assert payload["error"] == "ModelValidationError"

    def test_schema_error_is_input_error(self, run_json, tmp_path, capsys):
        path = tmp_path / "bad.model"
        path.write_text('{"kernel": [[1]], "gamma": [1]}')
        code, payload = run_json("analyze", str(path))
        assert code == 2
        assert "incidence" in payload["message"]

    def test_antichain_cap_exit_code(self, run_json, models_dir, monkeypatch):
        monkeypatch.setenv("SIS_ANTICHAIN_CAP", "1")
        reset_settings()
        code, payload = run_json("analyze", str(models_dir / "zoonosis.model"))
        assert code == 3
        assert payload["error"] == "ResourceCapError"

    def test_convergence_exit_code(self, run_json, models_dir, monkeypatch):
        def failing(args, events):
            raise ConvergenceError("stalled", best_estimate=1.5)

        monkeypatch.setitem(sis_runner.COMMANDS, "analyze", failing)
        code, payload = run_json("analyze", str(models_dir / "zoonosis.model"))
        assert code == 4
        assert payload["best_estimate"] == 1.5

    def test_interrupt_exit_code(self, tmp_path, models_dir, monkeypatch):
        def interrupted(args, events):
            raise KeyboardInterrupt

        monkeypatch.setitem(sis_runner.COMMANDS, "analyze", interrupted)
        code = run(["--log-dir", str(tmp_path), "analyze", str(models_dir / "zoonosis.model")])
        assert code == 130

    def test_string_incidence_parameter(self, run_json, tmp_path):
        path = tmp_path / "power.model"
        path.write_text('{"kernel": [[2]], "gamma": [1], "incidence": {"family": "power", "params": {"alpha": "2"}}}')
        code, payload = run_json("analyze", str(path))
        assert code == 2
        assert "finite real" in payload["message"]

    def test_unknown_tolerance(self, run_json, models_dir):
        code, payload = run_json("--tol", "bogus=1", "analyze", str(models_dir / "zoonosis.model"))
        assert code == 2
        assert "Unknown tolerance" in payload["message"]


class TestEquilibria:
    """Test the equilibria command."""

    def test_catalog_csv(self, run_json, models_dir, tmp_path):
        csv = tmp_path / "catalog.csv"
        code, payload = run_json("equilibria", str(models_dir / "zoonosis.model"), "--csv", str(csv))
        assert code == 0
        assert payload["count"] == 4
        df = pd.read_csv(csv, dtype={"support": str})
        assert df["support"].tolist() == ["000", "111", "011", "001"]

    def test_threads(self, run_json, models_dir):
        code, payload = run_json("--workers", "3", "equilibria", str(models_dir / "westnile.model"))
        assert code == 0
        assert payload["count"] == 2

    def test_reservoir(self, run_json, models_dir):
        code, payload = run_json("equilibria", str(models_dir / "zoonosis_reservoir.model"), "--reservoir")
        assert code == 0
        assert [e["support"] for e in payload["equilibria"]] == [["D", "H"], ["W", "D", "H"]]

    def test_reservoir_needs_kappa(self, run_json, models_dir):
        code, _ = run_json("equilibria", str(models_dir / "zoonosis.model"), "--reservoir")
        assert code == 2

    @pytest.mark.parametrize("name, count", [
        ("scalar_subcritical.model", 1),
        ("scalar_critical.model", 1),
        ("scalar_supercritical.model", 2),
    ])
    def test_scalar_models(self, run_json, models_dir, name, count):
        code, payload = run_json("equilibria", str(models_dir / name))
        assert code == 0
        assert payload["count"] == count


class TestSimulate:
    """Test the simulate command."""

    def test_westnile_humans_die_out(self, run_json, models_dir):
        code, payload = run_json("simulate", str(models_dir / "westnile.model"), "--init", "mask:H")
        assert code == 0
        assert payload["predicted"]["support"] == []
        assert payload["matched"] is True

    def test_westnile_birds(self, run_json, models_dir, tmp_path):
        out = tmp_path / "traj.csv"
        code, payload = run_json("simulate", str(models_dir / "westnile.model"), "--init", "mask:B",
                                 "--out", str(out), "--stride", "4")
        assert code == 0
        assert payload["predicted"]["support"] == ["B", "M", "H"]
        assert payload["matched"] is True
        assert list(pd.read_csv(out).columns) == ["t", "feature_0", "feature_1", "feature_2", "residual"]

    def test_reservoir(self, run_json, models_dir):
        code, payload = run_json("simulate", str(models_dir / "immigration.model"), "--reservoir", "--init", "zeros")
        assert code == 0
        assert payload["predicted"]["state"][0] == pytest.approx(2.0 ** -0.5, abs=1e-8)
        assert payload["matched"] is True

    def test_zoonosis_dogs(self, run_json, models_dir):
        code, payload = run_json("simulate", str(models_dir / "zoonosis.model"), "--init", "mask:D")
        assert code == 0
        assert payload["predicted"]["support"] == ["D", "H"]
        _, d, h = payload["predicted"]["state"]
        assert d == pytest.approx(0.5, abs=1e-8)
        # H solves (1 - h)(2h + d) = h with d = 1/2
        assert h == pytest.approx((1.0 + 17.0 ** 0.5) / 8.0, abs=1e-8)
        assert (1.0 - h) * (2.0 * h + 0.5) == pytest.approx(h, abs=1e-8)
        assert payload["matched"] is True

    def test_zero_start_stays_at_zero(self, run_json, models_dir):
        code, payload = run_json("simulate", str(models_dir / "zoonosis.model"), "--init", "zeros")
        assert code == 0
        assert payload["predicted"]["support"] == []
        assert payload["matched"] is True

    def test_invalid_model_refused(self, run_json, tmp_path):
        path = tmp_path / "bad.model"
        path.write_text('{"kernel": [[2]], "gamma": [0], "incidence": {"family": "mass_action"}}')
        code, payload = run_json("simulate", str(path))
        assert code == 2
        assert payload["error"] == "ModelValidationError"

    def test_unknown_label(self, run_json, models_dir):
        code, payload = run_json("simulate", str(models_dir / "westnile.model"), "--init", "mask:Q")
        assert code == 2
        assert "Unknown feature label 'Q'" in payload["message"]


class TestVaccinate:
    """Test the vaccinate command."""

    def test_from_equilibrium(self, run_json, models_dir):
        code, payload = run_json("vaccinate", str(models_dir / "zoonosis.model"), "--eta", "from-equilibrium")
        assert code == 0
        assert payload["passed"] is True

    def test_ones(self, run_json, models_dir):
        code, payload = run_json("vaccinate", str(models_dir / "scalar_supercritical.model"), "--eta", "ones")
        assert code == 0
        assert payload["re"] == pytest.approx(2.0)

    def test_vector_file(self, run_json, models_dir, tmp_path):
        eta = tmp_path / "eta.txt"
        eta.write_text("0.5 0.5 0.5\n")
        code, payload = run_json("vaccinate", str(models_dir / "zoonosis.model"), "--eta", str(eta))
        assert code == 0
        assert payload["re"] == pytest.approx(1.0)


class TestHelpers:
    """Test argument helpers."""

    def test_parse_tolerances(self):
        assert parse_tolerances(["equilibrium=1e-12", "match=1e-5"]) == {"equilibrium": 1e-12, "match": 1e-5}
        with pytest.raises(InputError):
            parse_tolerances(["equilibrium"])
        with pytest.raises(InputError):
            parse_tolerances(["equilibrium=small"])

    def test_initial_states(self, zoonosis_model):
        assert resolve_initial_state("ones", zoonosis_model).tolist() == [1.0, 1.0, 1.0]
        assert resolve_initial_state("mask:W,H", zoonosis_model).tolist() == [1.0, 0.0, 1.0]
        first = resolve_initial_state("random:3", zoonosis_model)
        assert first.tolist() == resolve_initial_state("random:3", zoonosis_model).tolist()
        with pytest.raises(InputError):
            resolve_initial_state("gaussian", zoonosis_model)
        with pytest.raises(InputError):
            resolve_initial_state("random:x", zoonosis_model)
