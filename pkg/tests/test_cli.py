import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from fibanyon.cli import main

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"
STATE_FILE = str(DATA / "unequal_marginals.state")


def run_cli(*argv):
    """Run the CLI in-process, capturing stdout text and the exit code."""
    import io
    from contextlib import redirect_stdout

    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(list(argv))
    return code, buf.getvalue()


def run_cli_subprocess(*argv):
    proc = subprocess.run(
        [sys.executable, "-m", "fibanyon.cli", *argv],
        capture_output=True,
        cwd=str(Path(__file__).parent.parent),
    )
    return proc.returncode, proc.stdout


GOLDEN_CASES = [
    ("basis_n2.txt", ("basis", "--n", "2")),
    ("dims.txt", ("dims",)),
    ("marginals_unequal.txt", ("marginals", "--state", STATE_FILE)),
    ("correlations_unequal.json", ("correlations", "--state", STATE_FILE, "--format", "json")),
    ("teleport_main_ab.json",
     ("teleport", "--scenario", "main-text", "--direction", "ab", "--format", "json")),
    ("verify_dims.txt", ("verify", "--suite", "dims")),
]


@pytest.mark.parametrize("golden_name,argv", GOLDEN_CASES, ids=[c[0] for c in GOLDEN_CASES])
def test_golden_byte_equality(golden_name, argv):
    code, out = run_cli_subprocess(*argv)
    assert code == 0
    assert out == (GOLDEN / golden_name).read_bytes()


def test_output_deterministic_across_runs():
    first = run_cli_subprocess("teleport", "--scenario", "main-text", "--direction", "ab",
                               "--format", "json", "--seed", "42")
    second = run_cli_subprocess("teleport", "--scenario", "main-text", "--direction", "ab",
                                "--format", "json", "--seed", "42")
    assert first == second


def test_basis_n4_has_34_lines():
    code, out = run_cli("basis", "--n", "4")
    assert code == 0
    tree_lines = [line for line in out.splitlines() if line and line.lstrip()[0].isdigit()]
    assert len(tree_lines) == 34


def test_basis_rejects_out_of_range():
    assert run_cli("basis", "--n", "0")[0] == 2
    assert run_cli("basis", "--n", "11")[0] == 2


def test_unknown_flag_is_usage_error():
    with pytest.raises(SystemExit) as excinfo:
        main(["basis", "--n", "2", "--bogus"])
    assert excinfo.value.code == 2


def test_marginals_values():
    code, out = run_cli("marginals", "--state", STATE_FILE, "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["spectrum_a"] == [0.5000000000000001, 0.5000000000000001]
    assert payload["spectrum_b"] == [1.0000000000000002, 0.0]
    assert payload["spectra_symmetric"] is False


def test_marginals_missing_file_is_domain_error(tmp_path):
    code, _ = run_cli("marginals", "--state", str(tmp_path / "nope.state"))
    assert code == 1


def test_correlations_report_class():
    code, out = run_cli("correlations", "--state", STATE_FILE, "--format", "json")
    payload = json.loads(out)
    assert code == 0
    assert payload["uncorrelated"] is True
    assert payload["class"] == "class-2-tau"


def test_teleport_polar_and_pair_amplitudes():
    code, out = run_cli("teleport", "--scenario", "main-text", "--direction", "ab",
                        "--alpha", "0.6,0.0", "--beta", f"0.8@{math.pi/2}",
                        "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["beta"][0] == pytest.approx(0.0, abs=1e-12)
    assert payload["beta"][1] == pytest.approx(0.8)
    assert payload["average_fidelity"] == pytest.approx(1.0, abs=1e-10)


def test_teleport_reachability_mode():
    code, out = run_cli("teleport", "--scenario", "main-text", "--direction", "ba",
                        "--samples", "10", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["mode"] == "reachability"
    assert payload["ok"] is True
    assert payload["max_off_support"] == 0.0


def test_teleport_unknown_scenario_usage_error():
    assert run_cli("teleport", "--scenario", "nope", "--direction", "ab")[0] == 2


def test_verify_quick_passes():
    code, out = run_cli("verify", "--quick")
    assert code == 0
    assert "overall: PASS" in out


def test_verify_corrupted_model_fails():
    code, out = run_cli("verify", "--suite", "model", "--corrupt-model")
    assert code == 1
    assert "FAIL" in out


def test_out_flag_writes_file(tmp_path):
    target = tmp_path / "report.json"
    code, out = run_cli("basis", "--n", "2", "--format", "json", "--out", str(target))
    assert code == 0
    assert out == ""
    payload = json.loads(target.read_text())
    assert payload["dim"] == 5


def test_state_file_unicode_tau_accepted(tmp_path):
    text = (DATA / "unequal_marginals.state").read_text().replace("tau", "τ")
    path = tmp_path / "unequal_unicode.state"
    path.write_text(text, encoding="utf-8")
    code, out = run_cli("marginals", "--state", str(path), "--format", "json")
    assert code == 0
    assert json.loads(out)["spectrum_b"][0] == pytest.approx(1.0)


def test_emitted_state_files_reparse_exactly(tmp_path, model, unequal_marginals_state):
    # emitted text round-trips: re-read amplitudes match to the bit
    from fibanyon.states import format_state_text, parse_state_text

    text = format_state_text(unequal_marginals_state)
    reread = parse_state_text(model, text)
    assert format_state_text(reread) == text
