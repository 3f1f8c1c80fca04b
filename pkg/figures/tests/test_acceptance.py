"""Figure-parity acceptance: low-Mach curve agreement and byte determinism."""

import subprocess

import numpy as np

from ekfigures.render import FigureSpec, normalized_energy_series, render


def test_low_mach_normalized_energy_curves_agree(mach_pair_runs, tmp_path):
    """Normalized total-energy curves at M=1e-2 and 1e-3 coincide pointwise.

    The runs share the near-equilibrium stationary-interface datum and differ
    only in the Mach number; their stored time series are compared exactly as
    the figure renders them.
    """
    dirs = [str(d) for d in mach_pair_runs.values()]
    series = normalized_energy_series(dirs)
    (t1, n1, _), (t2, n2, _) = series
    np.testing.assert_array_equal(t1, t2)
    rel = np.max(np.abs(n1 - n2) / np.abs(n2))
    print(f"[{'PASS' if rel <= 0.02 else 'FAIL'}] low-Mach curve agreement: "
          f"max pointwise deviation {rel:.3e} (bound 2e-2)")
    assert rel <= 0.02
    out = tmp_path / "mach_comparison.png"
    render(FigureSpec("mach_comparison", tuple(dirs), str(out)))
    assert out.stat().st_size > 0


def test_eoc_table_renders_byte_deterministically(eoc_dir, tmp_path):
    outputs = []
    for name in ("one.txt", "two.txt"):
        out = tmp_path / name
        proc = subprocess.run(
            ["figures", "eoc_table", "--in", str(eoc_dir), "--out", str(out)],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outputs.append(out.read_bytes())
    identical = outputs[0] == outputs[1]
    print(f"[{'PASS' if identical else 'FAIL'}] eoc_table byte determinism "
          f"across two CLI invocations")
    assert identical
