"""All-speed finite-difference solver for the isothermal Euler-Korteweg system.

The package simulates compressible two-phase (liquid/vapour) flow with a
diffuse interface: the free energy is a double well in the density plus a
gradient (capillarity) term, and the momentum equation is driven by the
gradient of the chemical potential scaled by 1/M^2, M being the Mach number.
The time discretisation treats the stiff chemical-potential term implicitly
through a convex splitting of the double well, so the admissible timestep
does not shrink as M -> 0, while advection and artificial viscosity stay
explicit.

Modules
-------
grid         Cartesian node grids, scalar/vector fields, ghost extension.
operators    Centered/forward difference operators and their sparse forms.
model        Double-well energy models, pressure, initial data.
presets      Ready-made experiment configurations.
solver       Newton and linear solvers plus a dense brute-force oracle.
stepper      One timestep of the semi-implicit scheme (Newton or linearized).
diagnostics  Discrete mass/energy functionals, L2 errors, convergence orders.
verification Randomized checks of the discrete operator identities.
harness      Configuration-driven runs, EOC studies, CSV/JSON output.
cli          The ``ekflow`` command line (run / eoc / check).
"""

__version__ = "0.1.0"
