import subprocess
import sys
from pathlib import Path

EXAMPLES = Path(__file__).resolve().parents[1] / "examples"


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "plotkit.cli", *args],
        capture_output=True, text=True,
    )


def test_profile_command(tmp_path):
    out = tmp_path / "profile.png"
    proc = run_cli("profile", str(EXAMPLES / "mf_profile.csv"),
                   str(EXAMPLES / "wdamf_profile.csv"), "-o", str(out))
    assert proc.returncode == 0, proc.stderr
    assert out.is_file()
    assert str(out) in proc.stdout


def test_surface_command_with_limits(tmp_path):
    out = tmp_path / "surface.png"
    proc = run_cli("surface", str(EXAMPLES / "surface.csv"),
                   "-o", str(out), "--xlim=-3:3", "--title", "ambiguity")
    assert proc.returncode == 0, proc.stderr
    assert out.is_file()


def test_unknown_kind_is_usage_error(tmp_path):
    proc = run_cli("contour", str(EXAMPLES / "kappa.csv"),
                   "-o", str(tmp_path / "x.png"))
    assert proc.returncode == 2
    assert "invalid choice" in proc.stderr


def test_schema_error_exit_code(tmp_path):
    # kappa CSV fed to the profile renderer: wrong columns, exit 1
    proc = run_cli("profile", str(EXAMPLES / "kappa.csv"),
                   "-o", str(tmp_path / "x.png"))
    assert proc.returncode == 1
    assert "missing column" in proc.stderr


def test_bad_limit_syntax_exit_code(tmp_path):
    proc = run_cli("kappa", str(EXAMPLES / "kappa.csv"),
                   "-o", str(tmp_path / "x.png"), "--ylim", "nope")
    assert proc.returncode == 1
    assert "lo:hi" in proc.stderr
