"""Fixtures that produce real solver outputs through the ekflow CLI.

The figures package consumes the solver only through its published file
formats, so the fixtures shell out to the installed ``ekflow`` executable.
"""

import subprocess

import pytest


def ekflow(*args):
    proc = subprocess.run(["ekflow", *args], capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(
            f"ekflow {' '.join(args)} failed ({proc.returncode}):\n"
            f"{proc.stdout}\n{proc.stderr}")
    return proc


@pytest.fixture(scope="session")
def mach_pair_runs(tmp_path_factory):
    """Near-equilibrium 1D runs at M=1e-2 and 1e-3 with identical data."""
    base = tmp_path_factory.mktemp("mach_pair")
    dirs = {}
    for mach in ("1e-2", "1e-3"):
        out = base / f"m{mach}"
        ekflow("run", "--preset", "exp54", "--K", "160", "--mach", mach,
               "--tol-residual", "1e-8", "--out", str(out))
        dirs[mach] = out
    return dirs


@pytest.fixture(scope="session")
def run_2d(tmp_path_factory):
    out = tmp_path_factory.mktemp("run2d") / "exp52"
    ekflow("run", "--preset", "exp52", "--K", "16", "--steps", "40",
           "--snapshot-every", "20", "--out", str(out))
    return out


@pytest.fixture(scope="session")
def run_1d(tmp_path_factory):
    out = tmp_path_factory.mktemp("run1d") / "exp53"
    ekflow("run", "--preset", "exp53", "--K", "40", "--steps", "25",
           "--snapshot-every", "10", "--out", str(out))
    return out


@pytest.fixture(scope="session")
def eoc_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("eoc") / "exp54"
    ekflow("eoc", "--preset", "exp54", "--K-list", "20,40",
           "--out", str(out))
    return out
