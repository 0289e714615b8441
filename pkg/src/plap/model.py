"""Potentials and nonlinearities, with numeric checks of their structure.

The equation couples a periodic positive potential ``V`` to a nonlinearity
``f(x, u)`` with primitive ``F``.  The solver relies on five structural
assumptions:

A1  growth: ``|f(x,u)| <= a (1 + |u|^(q-1))`` for some ``a > 0``, ``q > p``;
A2  ``V`` and ``f`` are T-periodic in ``x`` and ``V > 0`` everywhere;
A3  ``f(x,u) = o(|u|^(p-1))`` as ``u -> 0``, uniformly in ``x``;
A4  ``u -> f(x,u) / |u|^(p-1)`` is strictly increasing on each half-line;
A5  ``F(x,u) / |u|^p -> infinity`` as ``|u| -> infinity``, uniformly in ``x``.

The built-in family ``f(x,u) = sum_j b_j(x) |u|^(q_j - 2) u`` with positive
periodic coefficients and every ``q_j > p`` satisfies all five verifiably and
admits closed-form fiber scalars in the single-term case, which the test
oracles exploit.  Arbitrary sampled nonlinearities are accepted through
:class:`TableNonlinearity` but must pass :func:`check_assumptions` before a
solve; the checks are sampling-based, so a pass is evidence rather than
proof, while a fail always carries a witness point.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator


class ModelError(ValueError):
    """Model data violates a structural requirement."""


class PeriodicSamples:
    """Scalar data on Z^N that repeats with period T along every axis.

    Stores one period cell ``[0, T)^N`` as an ndarray of shape ``(T,)*N``;
    evaluation reduces coordinates mod T.
    """

    def __init__(self, samples):
        arr = np.asarray(samples, dtype=float)
        if arr.ndim < 1:
            arr = arr.reshape(1)
        if len(set(arr.shape)) != 1:
            raise ValueError(f"period cell must be a cube, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples contain non-finite entries")
        self.samples = arr
        self.samples.flags.writeable = False
        self.period = arr.shape[0]
        self.dim = arr.ndim

    @classmethod
    def constant(cls, value, dim):
        return cls(np.full((1,) * int(dim), float(value)))

    def at(self, coords):
        """Values at integer coordinates, shape ``(..., dim)`` -> ``(...,)``."""
        coords = np.asarray(coords, dtype=np.int64)
        if coords.shape[-1] != self.dim:
            raise ValueError(f"expected {self.dim} coordinates, got {coords.shape[-1]}")
        flat = coords.reshape(-1, self.dim) % self.period
        vals = self.samples[tuple(flat.T)]
        return vals.reshape(coords.shape[:-1])

    def on_box(self, box):
        """Values at every vertex of a box, in vertex order."""
        if box.dim != self.dim:
            raise ValueError(f"samples are {self.dim}-dimensional, box is {box.dim}-dimensional")
        return self.at(box.coords)

    def cell_coords(self):
        """All integer coordinates of one period cell, shape (T^N, N)."""
        t, ndim = self.period, self.dim
        return np.indices((t,) * ndim).reshape(ndim, -1).T.astype(np.int64)


class Potential:
    """T-periodic potential with recorded bounds ``v1 = min``, ``v2 = max``.

    Construction records the bounds without enforcing positivity, so that
    :func:`check_assumptions` can report an A2 violation with a witness;
    building a :class:`~plap.functional.ProblemInstance` does require
    ``v1 > 0``.
    """

    def __init__(self, samples):
        self.grid = samples if isinstance(samples, PeriodicSamples) else PeriodicSamples(samples)
        self.v1 = float(self.grid.samples.min())
        self.v2 = float(self.grid.samples.max())

    @classmethod
    def constant(cls, value, dim):
        return cls(PeriodicSamples.constant(value, dim))

    @property
    def period(self):
        return self.grid.period

    @property
    def dim(self):
        return self.grid.dim

    def at(self, coords):
        return self.grid.at(coords)

    def on_box(self, box):
        return self.grid.on_box(box)

    def __repr__(self):
        return f"Potential(period={self.period}, v1={self.v1:g}, v2={self.v2:g})"


def _signed_pow(u, e):
    # |u|^e * sign(u), exact 0 at u = 0 for every e > 0
    u = np.asarray(u, dtype=float)
    return np.sign(u) * np.abs(u) ** e


class Nonlinearity:
    """Base type: ``f(x, u)`` with primitive ``F``, ``F(x, 0) = 0``.

    Subclasses expose ``p`` (the equation exponent), ``q`` (largest growth
    exponent, > p), the A1 growth constant ``a``, and the coefficient period.
    """

    kind = "abstract"
    p = None
    q = None
    a = None
    period = 1

    def f(self, x, u):
        raise NotImplementedError

    def F(self, x, u):
        raise NotImplementedError

    def growth_split(self, eps):
        raise NotImplementedError

    def sample_grid(self):
        """|u| values on which the structural checks are evaluated."""
        raise NotImplementedError


class PowerNonlinearity(Nonlinearity):
    """``f(x,u) = sum_j b_j(x) |u|^(q_j - 2) u`` with odd symmetry in u.

    Parameters
    ----------
    p : float
        Equation exponent in (1, inf); every term exponent must exceed it.
    terms : sequence of (q_j, coeff)
        ``coeff`` is a positive number (constant in x) or a
        :class:`PeriodicSamples` with strictly positive entries.
    a : float, optional
        Growth constant for A1.  Defaults to the sum of the coefficient
        maxima, which makes ``|f| <= a (1 + |u|^(q-1))`` exact for the family.
    """

    def __init__(self, p, terms, a=None):
        p = float(p)
        if not 1.0 < p < math.inf:
            raise ModelError(f"p must lie in (1, inf), got {p}")
        terms = list(terms)
        if not terms:
            raise ModelError("need at least one power term")
        canon = []
        for qj, coeff in terms:
            qj = float(qj)
            if qj <= p:
                raise ModelError(f"(A1) requires every exponent > p, got q={qj} with p={p}")
            if isinstance(coeff, PeriodicSamples):
                if coeff.samples.min() <= 0:
                    raise ModelError("coefficient samples must be strictly positive")
            else:
                coeff = float(coeff)
                if coeff <= 0:
                    raise ModelError("coefficients must be strictly positive")
            canon.append((qj, coeff))
        self.p = p
        self.terms = canon
        self.q = max(qj for qj, _ in canon)
        self.a = float(a) if a is not None else sum(self._coeff_max(c) for _, c in canon)
        if self.a <= 0:
            raise ModelError("growth constant a must be positive")

    @staticmethod
    def _coeff_max(coeff):
        return float(coeff.samples.max()) if isinstance(coeff, PeriodicSamples) else float(coeff)

    @staticmethod
    def _coeff_at(coeff, x):
        if isinstance(coeff, PeriodicSamples):
            if x is None:
                raise ValueError("periodic coefficient needs coordinates")
            return coeff.at(x)
        return coeff

    @property
    def kind(self):
        return "pure-power" if len(self.terms) == 1 else "power-sum"

    @property
    def period(self):
        periods = [c.period for _, c in self.terms if isinstance(c, PeriodicSamples)]
        return math.lcm(*periods) if periods else 1

    def f(self, x, u):
        u = np.asarray(u, dtype=float)
        out = np.zeros(np.broadcast_shapes(u.shape, ()), dtype=float)
        for qj, coeff in self.terms:
            out = out + self._coeff_at(coeff, x) * _signed_pow(u, qj - 1.0)
        return out if out.shape else float(out)

    def F(self, x, u):
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape, dtype=float)
        for qj, coeff in self.terms:
            out = out + self._coeff_at(coeff, x) * np.abs(u) ** qj / qj
        return out if out.shape else float(out)

    def growth_split(self, eps):
        """A constant ``C`` with ``|f(x,u)| <= eps |u|^(p-1) + C |u|^(q-1)``.

        Split at the largest threshold ``delta <= 1`` below which the eps-term
        absorbs every power term; above it each term is bounded against the
        top exponent.  The constant is then verified on a wide log grid of
        |u| values against the coefficient maxima (which dominate every x).
        """
        eps = float(eps)
        if eps <= 0:
            raise ValueError("eps must be positive")
        p, q = self.p, self.q
        maxima = [(qj, self._coeff_max(c)) for qj, c in self.terms]
        m = len(maxima)
        delta = min(min(1.0, (eps / (m * bj)) ** (1.0 / (qj - p))) for qj, bj in maxima)
        c_eps = sum(bj * delta ** (qj - q) for qj, bj in maxima)

        u = self.sample_grid()
        envelope = sum(bj * u ** (qj - 1.0) for qj, bj in maxima)
        bound = eps * u ** (p - 1.0) + c_eps * u ** (q - 1.0)
        slack = envelope - bound
        worst = float(slack.max())
        if worst > 1e-12 * float(bound[slack.argmax()]):
            raise ModelError(
                f"growth split constant {c_eps:g} violated at |u|={u[slack.argmax()]:g}"
            )
        return c_eps

    def sample_grid(self):
        return np.geomspace(1e-8, 1e8, 401)


class TableNonlinearity(Nonlinearity):
    """Nonlinearity sampled at u-knots, interpolated shape-preservingly.

    The knots must straddle zero and include ``u = 0`` with ``f = 0``.  The
    primitive is the exact antiderivative of the monotone piecewise-cubic
    interpolant, cached once, so ``F(0) = 0`` and ``F' = f`` hold by
    construction on the interpolant.  Tables carry no x-dependence and no
    closed-form fiber scalar; they must pass :func:`check_assumptions`
    before a solve.
    """

    kind = "custom-table"
    period = 1

    def __init__(self, p, u_knots, f_values, q, a=None):
        p = float(p)
        if not 1.0 < p < math.inf:
            raise ModelError(f"p must lie in (1, inf), got {p}")
        u = np.asarray(u_knots, dtype=float)
        fv = np.asarray(f_values, dtype=float)
        if u.ndim != 1 or u.shape != fv.shape or u.size < 4:
            raise ModelError("need matching 1-D u/f tables with at least 4 knots")
        if np.any(np.diff(u) <= 0):
            raise ModelError("u knots must be strictly increasing")
        if u[0] >= 0 or u[-1] <= 0:
            raise ModelError("u knots must straddle zero")
        at_zero = np.flatnonzero(u == 0.0)
        if at_zero.size != 1 or fv[at_zero[0]] != 0.0:
            raise ModelError("table must contain the knot u=0 with f=0")
        q = float(q)
        if q <= p:
            raise ModelError(f"(A1) requires q > p, got q={q} with p={p}")
        self.p = p
        self.q = q
        self.u_knots = u
        self.f_values = fv
        self._interp = PchipInterpolator(u, fv, extrapolate=True)
        self._anti = self._interp.antiderivative()
        self._anti0 = float(self._anti(0.0))
        self.a = float(a) if a is not None else float(
            np.max(np.abs(fv) / (1.0 + np.abs(u) ** (q - 1.0)))
        )

    def f(self, x, u):
        out = self._interp(np.asarray(u, dtype=float))
        return out if out.shape else float(out)

    def F(self, x, u):
        out = self._anti(np.asarray(u, dtype=float)) - self._anti0
        return out if out.shape else float(out)

    def growth_split(self, eps):
        eps = float(eps)
        if eps <= 0:
            raise ValueError("eps must be positive")
        u = self.sample_grid()
        fu = np.abs(self._interp(np.concatenate([u, -u])))
        au = np.concatenate([u, u])
        headroom = (fu - eps * au ** (self.p - 1.0)) / au ** (self.q - 1.0)
        c_eps = max(float(headroom.max()) * (1.0 + 1e-9), 1e-300)
        bound = eps * au ** (self.p - 1.0) + c_eps * au ** (self.q - 1.0)
        if np.any(fu > bound * (1.0 + 1e-12)):
            raise ModelError("growth split verification failed on the sample grid")
        return c_eps

    def sample_grid(self):
        mags = np.abs(self.u_knots[self.u_knots != 0.0])
        lo, hi = float(mags.min()), float(mags.max())
        return np.unique(np.concatenate([mags, np.geomspace(lo, hi, 201)]))


def growth_split(nl, eps):
    """Growth-split constant ``C_eps`` for ``nl`` (verified numerically)."""
    return nl.growth_split(eps)


@dataclass
class AssumptionCheck:
    name: str
    passed: bool
    max_violation: float
    witness: object = None
    detail: str = ""


class AssumptionReport:
    """Pass/fail per structural assumption, with witness points on failure."""

    def __init__(self, checks):
        self.checks = list(checks)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __repr__(self):
        status = ", ".join(f"{c.name}:{'ok' if c.passed else 'FAIL'}" for c in self.checks)
        return f"AssumptionReport({status})"


def _site_list(nl):
    """Period-cell coordinates at which x-dependent checks are sampled."""
    if isinstance(nl, PowerNonlinearity):
        grids = [c for _, c in nl.terms if isinstance(c, PeriodicSamples)]
        if grids:
            t = math.lcm(*[g.period for g in grids])
            ndim = grids[0].dim
            cell = np.indices((t,) * ndim).reshape(ndim, -1).T.astype(np.int64)
            if cell.shape[0] > 4096:
                cell = cell[:: cell.shape[0] // 4096 + 1]
            return cell
    return None


def _ratio_table(nl, sites, u):
    """f(x,u) / |u|^(p-1) on sites x grid, shape (n_sites, n_u)."""
    if sites is None:
        vals = np.asarray(nl.f(None, u), dtype=float)[None, :]
    else:
        vals = np.stack([np.asarray(nl.f(x, u), dtype=float) for x in sites])
    return vals / np.abs(u) ** (nl.p - 1.0)


def check_assumptions(nl, potential, p=None, tol=1e-9):
    """Sample-based audit of the five structural assumptions.

    Ratios are evaluated on sign-symmetric log grids of u (the table knots,
    for table nonlinearities) at every period-cell site.  A pass is evidence,
    not proof -- the asymptotic statements A3 and A5 are judged on grid
    tails; a fail always reports a witness ``(site, u, value)``.
    """
    if p is not None and float(p) != nl.p:
        raise ValueError(f"p={p} disagrees with nonlinearity p={nl.p}")
    p = nl.p
    checks = []

    mags = nl.sample_grid()
    sites = _site_list(nl)
    site_of = (lambda i: None) if sites is None else (lambda i: tuple(int(c) for c in sites[i]))

    # A1: growth bound with the stored constant and largest exponent.
    u_signed = np.concatenate([-mags[::-1], mags])
    if sites is None:
        fmat = np.abs(np.asarray(nl.f(None, u_signed), dtype=float))[None, :]
    else:
        fmat = np.abs(np.stack([np.asarray(nl.f(x, u_signed), dtype=float) for x in sites]))
    bound = nl.a * (1.0 + np.abs(u_signed) ** (nl.q - 1.0))
    slack = fmat - bound[None, :]
    rel = slack / bound[None, :]
    worst = np.unravel_index(int(rel.argmax()), rel.shape)
    a1_viol = float(rel.max())
    checks.append(
        AssumptionCheck(
            "A1", a1_viol <= tol, max(a1_viol, 0.0),
            witness=None if a1_viol <= tol else (site_of(worst[0]), float(u_signed[worst[1]]), float(fmat[worst])),
            detail=f"|f| <= a(1+|u|^(q-1)) with a={nl.a:g}, q={nl.q:g}",
        )
    )

    # A2: positive potential; periodicity holds by construction (wrapped
    # evaluation), spot-checked on shifted cell coordinates.
    cell = potential.grid.cell_coords()
    vvals = potential.at(cell)
    worst_v = int(vvals.argmin())
    wrap_err = 0.0
    for axis in range(potential.dim):
        shift = np.zeros(potential.dim, dtype=np.int64)
        shift[axis] = potential.period
        wrap_err = max(wrap_err, float(np.abs(potential.at(cell + shift) - vvals).max()))
    a2_ok = potential.v1 > 0 and wrap_err == 0.0
    checks.append(
        AssumptionCheck(
            "A2", a2_ok, max(-potential.v1, wrap_err, 0.0),
            witness=None if a2_ok else (tuple(int(c) for c in cell[worst_v]), float(vvals[worst_v])),
            detail=f"V in [{potential.v1:g}, {potential.v2:g}], period {potential.period}",
        )
    )

    # Ratio table r(x,u) = f(x,u)/|u|^(p-1) on the positive grid.
    r_pos = _ratio_table(nl, sites, mags)
    r_neg = _ratio_table(nl, sites, -mags)

    # A3: r -> 0 monotonically along the small-|u| tail: nonincreasing as |u|
    # shrinks, and at least halved across the tail (decay threshold 0.5).
    tail = max(2, mags.size // 4)
    a3_viol, a3_wit = -math.inf, None
    for r in (r_pos, np.abs(r_neg)):
        head = r[:, :tail]  # columns in ascending |u|
        mono = np.diff(head, axis=1)  # >= 0 when ratio shrinks towards u=0
        scale = np.maximum(np.abs(head[:, 1:]), 1e-300)
        v = float((-mono / scale).max()) if mono.size else 0.0
        decay = head[:, 0] / np.maximum(np.abs(head[:, -1]), 1e-300)
        v = max(v, float(decay.max()) - 0.5)
        if v > a3_viol:
            a3_viol = v
            i = int(np.abs(head[:, 0]).argmax())
            a3_wit = (site_of(i), float(mags[0]), float(head[i, 0]))
    checks.append(
        AssumptionCheck(
            "A3", a3_viol <= tol, max(a3_viol, 0.0), witness=None if a3_viol <= tol else a3_wit,
            detail="f/|u|^(p-1) decays to 0 along the small-u tail",
        )
    )

    # A4: strict increase of r in u on both half-lines, with a relative
    # per-step margin so tiny ratio values near u=0 are judged fairly.
    a4_viol, a4_wit = -math.inf, None
    for r, us in ((r_pos, mags), (r_neg[:, ::-1], -mags[::-1])):
        step = np.diff(r, axis=1)
        scale = np.maximum(np.maximum(np.abs(r[:, :-1]), np.abs(r[:, 1:])), 1e-300)
        margin = step / scale  # must stay strictly positive
        v = float(-margin.min())
        if v > a4_viol:
            a4_viol = v
            i, j = np.unravel_index(int(margin.argmin()), margin.shape)
            a4_wit = (site_of(i), float(us[j + 1]), float(r[i, j + 1]))
    a4_ok = a4_viol < -tol
    checks.append(
        AssumptionCheck(
            "A4", a4_ok, max(a4_viol, 0.0) if not a4_ok else 0.0,
            witness=None if a4_ok else a4_wit,
            detail="f/|u|^(p-1) strictly increasing on each half-line",
        )
    )

    # A5: F/|u|^p increasing along the large-|u| tail and grown by at least
    # 50% across it (growth threshold 1.5).
    a5_viol, a5_wit = -math.inf, None
    for sign in (1.0, -1.0):
        u_tail = sign * mags[-tail:]
        if sites is None:
            fmat = np.asarray(nl.F(None, u_tail), dtype=float)[None, :]
        else:
            fmat = np.stack([np.asarray(nl.F(x, u_tail), dtype=float) for x in sites])
        ratio = fmat / np.abs(u_tail) ** p
        mono = np.diff(ratio, axis=1)
        scale = np.maximum(np.abs(ratio[:, :-1]), 1e-300)
        v = float((-mono / scale).max()) if mono.size else 0.0
        growth = ratio[:, -1] / np.maximum(ratio[:, 0], 1e-300)
        v = max(v, float((1.5 - growth).max()))
        if v > a5_viol:
            a5_viol = v
            i = int(ratio[:, -1].argmin())
            a5_wit = (site_of(i), float(u_tail[-1]), float(ratio[i, -1]))
    checks.append(
        AssumptionCheck(
            "A5", a5_viol <= tol, max(a5_viol, 0.0), witness=None if a5_viol <= tol else a5_wit,
            detail="F/|u|^p exceeds a growing threshold along the large-u tail",
        )
    )

    return AssumptionReport(checks)
