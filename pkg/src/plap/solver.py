"""Ground-state search: descend the reduced energy over directions.

The reduced energy ``psi`` is scale-invariant, so the search runs over all
nonzero fields with periodic renormalization to unit norm purely for
conditioning; no manifold retraction is needed because the gradient field is
Euclidean-orthogonal to the ray through the iterate.  Each accepted step is

    w_next = normalize(w - eta * psi_grad(w)),

with ``eta`` from Armijo backtracking (sufficient decrease
``c1 * eta * ||grad||^2``), the first trial step taken from a
Barzilai-Borwein estimate when the last two iterates support one.  A run
certifies convergence only when the projected point satisfies the pointwise
residual bound; runs that merely stop making progress are reported as
``stalled`` and never promoted to ground states.

Independent seeds run under :func:`multistart`, optionally normalized by a
periodic translation so the peak lands in the fundamental period cell, and
the least-energy converged run wins.  Set ``PLAP_NUM_THREADS`` to bound the
number of concurrent seed runs; reports merge deterministically either way.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .functional import phi, phi_grad
from .lattice import as_field, constant_field, delta_field, translate_field
from .nehari import fiber_scalar

_DEFAULT_SEEDS = ({"kind": "delta"}, {"kind": "constant"})
_DEFAULT_RANDOM_SEED = 20230 + 1


@dataclass
class SolverConfig:
    """Knobs for one descent run and for multistart.

    ``tol_residual`` bounds the max-norm of the equation defect at the
    projected point; ``tol_energy`` is the relative energy decrease under
    which ``stall_window`` consecutive accepted steps count as stalling.
    """

    tol_residual: float = 1e-8
    tol_energy: float = 1e-12
    max_iters: int = 20000
    armijo_c1: float = 1e-4
    armijo_backtrack: float = 0.5
    armijo_max_backtracks: int = 60
    seeds: tuple = _DEFAULT_SEEDS
    renormalize_every: int = 1
    translation_normalize: bool = True
    stall_window: int = 10
    norm_ceiling: float = 1e6
    fiber_tol: float = 1e-10

    def __post_init__(self):
        if self.tol_residual <= 0 or self.tol_energy <= 0 or self.fiber_tol <= 0:
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.armijo_c1 < 1.0:
            raise ValueError(f"armijo_c1 must lie in (0,1), got {self.armijo_c1}")
        if not 0.0 < self.armijo_backtrack < 1.0:
            raise ValueError(f"armijo_backtrack must lie in (0,1), got {self.armijo_backtrack}")
        if self.max_iters < 0 or self.armijo_max_backtracks < 1 or self.renormalize_every < 1:
            raise ValueError("iteration counts must be positive")


@dataclass
class SolveReport:
    """Everything a run produced, honest about how it ended.

    ``status`` is ``"converged"`` (residual and manifold-membership bounds
    met), ``"stalled"`` (no further progress, not certified) or
    ``"max-iters"``.  ``energy_trace`` holds the reduced energy at each
    evaluated iterate; it is nonincreasing across accepted steps.
    ``fiber_history`` records the fiber scalar of each (normalized) iterate
    and ``peak_trace`` the vertex carrying the largest |u|, a cheap drift
    diagnostic on tori.
    """

    energy: float
    minimizer: np.ndarray
    residual: float
    pairing: float
    iterations: int
    status: str
    seed_id: int = 0
    seed_label: str = ""
    fiber_history: list = field(default_factory=list)
    energy_trace: list = field(default_factory=list)
    residual_trace: list = field(default_factory=list)
    step_trace: list = field(default_factory=list)
    peak_trace: list = field(default_factory=list)
    norm_ceiling_exceeded: bool = False
    runs: list = None

    @property
    def converged(self):
        return self.status == "converged"


def minimize(inst, cfg, w0, seed_id=0, seed_label=""):
    """Descend the reduced energy from one starting direction.

    Requires a nonzero start and a model that passes the structural checks.
    Returns a :class:`SolveReport` whose ``minimizer`` is the Nehari
    projection of the final direction.
    """
    inst.require_assumptions()
    w = as_field(inst.box, w0)
    if not np.any(w):
        raise ValueError("starting field must be nonzero")
    p = inst.p
    w = w / inst.enorm(w)

    fiber_history, energy_trace, residual_trace, step_trace, peak_trace = [], [], [], [], []
    ceiling_hit = False
    status = "max-iters"
    w_prev = g_prev = None
    eta_prev = 1.0
    stall = 0
    last_energy = None
    it = 0
    fib = fiber_scalar(inst, w, tol=cfg.fiber_tol)
    u = fib.s * w
    energy = phi(inst, u)
    grad_u = phi_grad(inst, u)
    residual = float(np.max(np.abs(grad_u)))
    unorm_p = inst.enorm_p(u)
    pairing = abs(unorm_p - float(np.sum(inst.f_values(u) * u)))

    while True:
        fiber_history.append(fib.s)
        energy_trace.append(energy)
        residual_trace.append(residual)
        peak_trace.append(int(np.argmax(np.abs(u))))
        if unorm_p ** (1.0 / p) > cfg.norm_ceiling:
            ceiling_hit = True

        if residual <= cfg.tol_residual and pairing <= cfg.tol_residual * (1.0 + unorm_p):
            status = "converged"
            break
        if it >= cfg.max_iters:
            status = "max-iters"
            break
        if last_energy is not None:
            if abs(last_energy - energy) <= cfg.tol_energy * max(1.0, abs(energy)):
                stall += 1
            else:
                stall = 0
            if stall >= cfg.stall_window:
                status = "stalled"
                break
        last_energy = energy

        g = fib.s * grad_u
        gg = float(np.dot(g, g))
        if gg == 0.0:
            status = "stalled"
            break

        # Barzilai-Borwein first trial step, clamped; double the previous
        # accepted step when the curvature estimate is unusable.
        eta = 2.0 * eta_prev
        if w_prev is not None:
            dw = w - w_prev
            dg = g - g_prev
            denom = float(np.dot(dw, dg))
            if denom > 0:
                bb = float(np.dot(dw, dw)) / denom
                if np.isfinite(bb) and bb > 0:
                    eta = bb
        eta = min(max(eta, 1e-14), 1e12)

        accepted = False
        for _ in range(cfg.armijo_max_backtracks):
            w_try = w - eta * g
            if not np.any(w_try):
                eta *= cfg.armijo_backtrack
                continue
            fib_try = fiber_scalar(inst, w_try, tol=cfg.fiber_tol)
            u_try = fib_try.s * w_try
            energy_try = phi(inst, u_try)
            if energy_try <= energy - cfg.armijo_c1 * eta * gg:
                accepted = True
                break
            eta *= cfg.armijo_backtrack
        if not accepted:
            status = "stalled"
            break

        step_trace.append(eta)
        w_prev, g_prev = w, g
        eta_prev = eta
        it += 1
        if it % cfg.renormalize_every == 0:
            scale = inst.enorm(w_try)
            w = w_try / scale
            fib = fiber_scalar(inst, w, tol=cfg.fiber_tol)
            u = fib.s * w
            energy = phi(inst, u)
        else:
            w = w_try
            fib, u, energy = fib_try, u_try, energy_try
        grad_u = phi_grad(inst, u)
        residual = float(np.max(np.abs(grad_u)))
        unorm_p = inst.enorm_p(u)
        pairing = abs(unorm_p - float(np.sum(inst.f_values(u) * u)))

    return SolveReport(
        energy=energy,
        minimizer=u,
        residual=residual,
        pairing=pairing,
        iterations=it,
        status=status,
        seed_id=seed_id,
        seed_label=seed_label,
        fiber_history=fiber_history,
        energy_trace=energy_trace,
        residual_trace=residual_trace,
        step_trace=step_trace,
        peak_trace=peak_trace,
        norm_ceiling_exceeded=ceiling_hit,
    )


def translation_normalize(inst, u):
    """Shift a torus field by period multiples so its peak lies in the
    fundamental cell [0, T)^N.

    Ties in |u| break towards the smallest vertex index.  Energies and
    residuals are invariant because the model data is T-periodic.
    """
    if inst.box.bc != "torus":
        raise ValueError("translation normalization needs a torus box")
    u = as_field(inst.box, u)
    t = inst.period
    peak_coords = np.asarray(inst.box.coords_of(int(np.argmax(np.abs(u)))))
    k = peak_coords // t
    if not np.any(k):
        return u
    return translate_field(inst.box, u, k, t)


def make_seed(inst, spec, index=0):
    """Build a starting field from a seed descriptor.

    Descriptors: ``{"kind": "delta", "vertex": i}`` (default: box centre),
    ``{"kind": "constant", "value": c}``, ``{"kind": "random", "seed": s}``
    (standard normal entries from a PCG64 generator; the seed is recorded
    in the label) and ``{"kind": "file", "path": ...}`` reading the CSV
    field format written by the command-line front end.
    """
    kind = spec.get("kind")
    if kind == "delta":
        vertex = spec.get("vertex")
        label = f"delta@{vertex if vertex is not None else 'center'}"
        return label, delta_field(inst.box, vertex)
    if kind == "constant":
        value = float(spec.get("value", 1.0))
        if value == 0.0:
            raise ValueError("constant seed must be nonzero")
        return f"constant={value:g}", constant_field(inst.box, value)
    if kind == "random":
        seed = int(spec.get("seed", _DEFAULT_RANDOM_SEED + index))
        rng = np.random.default_rng(seed)
        u = rng.standard_normal(inst.box.vertex_count)
        return f"random(seed={seed})", u
    if kind == "file":
        from .cli import read_field_csv  # deferred: cli pulls in solver

        path = spec["path"]
        return f"file={path}", read_field_csv(inst.box, path)
    raise ValueError(f"unknown seed kind {kind!r}")


def _worker_count(n_seeds):
    env = os.environ.get("PLAP_NUM_THREADS")
    if env:
        return max(1, min(int(env), n_seeds))
    return max(1, min(n_seeds, os.cpu_count() or 1, 4))


def multistart(inst, cfg):
    """Run every configured seed and return the best certified report.

    The winner is the converged run of least energy (ties to the lower seed
    index); if nothing converged, the least-energy run is returned with its
    honest non-converged status.  The winning report carries a ``runs``
    summary of every start.
    """
    seeds = list(cfg.seeds)
    if not seeds:
        raise ValueError("seed list must be nonempty")
    built = [make_seed(inst, spec, index=i) for i, spec in enumerate(seeds)]

    def run(i):
        label, w0 = built[i]
        return minimize(inst, cfg, w0, seed_id=i, seed_label=label)

    workers = _worker_count(len(seeds))
    if workers == 1:
        reports = [run(i) for i in range(len(seeds))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run, range(len(seeds))))

    if cfg.translation_normalize and inst.box.bc == "torus":
        for rep in reports:
            rep.minimizer = translation_normalize(inst, rep.minimizer)
            rep.peak_trace.append(int(np.argmax(np.abs(rep.minimizer))))

    converged = [r for r in reports if r.converged]
    pool_ = converged if converged else reports
    winner = min(pool_, key=lambda r: (r.energy, r.seed_id))
    winner.runs = [
        {
            "seed_id": r.seed_id,
            "label": r.seed_label,
            "status": r.status,
            "energy": r.energy,
            "residual": r.residual,
            "iterations": r.iterations,
        }
        for r in reports
    ]
    return winner
