"""Ground states of nonlinear p-Laplacian Schrodinger equations on lattice boxes.

The library solves

    -div_p(u) + V(x) |u|^(p-2) u = f(x, u)

on finite boxes cut from the integer lattice graph Z^N, where div_p is the
discrete p-Laplacian, V is a positive periodic potential and f is a periodic
superlinear nonlinearity.  Nontrivial solutions are critical points of an
energy functional; the one of least positive energy (the ground state) is
found by projecting trial directions onto the Nehari manifold through a
monotone one-dimensional root-find and minimizing the reduced energy over
directions with a backtracking gradient descent.

Subpackages
-----------
lattice     finite lattice boxes, neighbour topology, periodic translations
model       potentials, nonlinearities, structural assumption checks
functional  p-Laplacian, energies, norms, gradients, pointwise residuals
nehari      fibering map, fiber scalar, Nehari projection, reduced energy
solver      descent on the reduced energy, multistart, run reports
oracle      independent checks: brute force, finite differences, audits
cli         config-driven batch runs producing JSON/CSV reports
"""

from .lattice import LatticeBox, build_box, constant_field, delta_field, translate_field
from .model import (
    AssumptionReport,
    ModelError,
    PeriodicSamples,
    Potential,
    PowerNonlinearity,
    TableNonlinearity,
    check_assumptions,
    growth_split,
)
from .functional import (
    ProblemInstance,
    dirichlet_energy,
    norms,
    p_laplacian,
    phi,
    phi_grad,
    phi_pairing,
    residual_inf,
)
from .nehari import FiberBracketError, FiberResult, fiber_scalar, project, psi, psi_grad, theta
from .solver import SolveReport, SolverConfig, make_seed, minimize, multistart, translation_normalize
from .oracle import (
    OracleReport,
    brute_force_ground_state,
    fd_convergence_slopes,
    fd_gradient_check,
    fiber_scan,
    inequality_audit,
)

__version__ = "0.1.0"

__all__ = [
    "AssumptionReport",
    "FiberBracketError",
    "FiberResult",
    "LatticeBox",
    "ModelError",
    "OracleReport",
    "PeriodicSamples",
    "Potential",
    "PowerNonlinearity",
    "ProblemInstance",
    "SolveReport",
    "SolverConfig",
    "TableNonlinearity",
    "brute_force_ground_state",
    "build_box",
    "check_assumptions",
    "constant_field",
    "delta_field",
    "dirichlet_energy",
    "fd_convergence_slopes",
    "fd_gradient_check",
    "fiber_scalar",
    "fiber_scan",
    "growth_split",
    "inequality_audit",
    "make_seed",
    "minimize",
    "multistart",
    "norms",
    "p_laplacian",
    "phi",
    "phi_grad",
    "phi_pairing",
    "project",
    "psi",
    "psi_grad",
    "residual_inf",
    "theta",
    "translate_field",
    "translation_normalize",
]
