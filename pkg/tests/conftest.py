"""Shared fixtures; the expensive preset runs are computed once per session."""

import logging

import numpy as np
import pytest

from ekflow.harness import RunConfig, eoc_study
from ekflow.presets import preset
from ekflow.stepper import State, advance

logging.getLogger("ekflow").setLevel(logging.ERROR)


def run_preset_history(name, K, steps, variant=None, mach=None,
                       amplitude_mach=None):
    """Advance a preset and collect per-step diagnostics plus the final state."""
    p = preset(name, K=K, M=mach, amplitude_mach=amplitude_mach)
    params = p.params if variant is None else \
        __import__("dataclasses").replace(p.params, variant=variant)
    state = State(rho=p.initial.rho, v=p.initial.v)
    diags = []
    for _ in range(steps):
        state, diag = advance(state, params, p.model, p.solver)
        diags.append(diag)
    return p, state, diags


@pytest.fixture(scope="session")
def exp51_histories():
    """exp51 at desk scale (K=20, 500 steps), both density-update variants."""
    out = {}
    for variant in ("newton", "linearized"):
        p, state, diags = run_preset_history("exp51", K=20, steps=500,
                                             variant=variant)
        out[variant] = {
            "preset": p,
            "final": state,
            "mass": np.array([d.mass for d in diags]),
            "energy": np.array([d.total_energy for d in diags]),
            "min_density": np.array([d.min_density for d in diags]),
            "initial_mass": float(np.sum(p.initial.rho.values)),
        }
    return out


@pytest.fixture(scope="session")
def exp53_studies():
    """Convergence studies for exp53 (Newton) and exp55 (linearized)."""
    K_list = [40, 80, 160, 320]
    return {
        "newton": eoc_study(RunConfig(preset="exp53"), K_list, K_ref=1280),
        "linearized": eoc_study(RunConfig(preset="exp55"), K_list, K_ref=1280),
    }
