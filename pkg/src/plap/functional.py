"""Energies, norms, gradients and residuals on a lattice box.

Everything is driven by a :class:`ProblemInstance` bundling a box with a
potential, a nonlinearity and the exponent p.  The central objects:

* the discrete p-Laplacian ``lap_p u(x) = sum_{y ~ x} |u(y)-u(x)|^(p-2) (u(y)-u(x))``,
* the p-Dirichlet energy (sum of |difference|^p over unordered edges,
  including half-edges to the zero boundary under dirichlet-zero),
* three norms: the plain l^p norm, the Sobolev-type norm
  ``(dirichlet + ||u||_p^p)^(1/p)``, and the potential-weighted norm
  ``||u|| = (dirichlet + sum V |u|^p)^(1/p)`` used by the solver,
* the energy ``phi(u) = ||u||^p / p - sum_x F(x, u)`` whose critical points
  solve the equation, its gradient field ``G(u) = -lap_p u + V |u|^(p-2) u - f(x, u)``,
  and the pointwise residual ``max |G|``.

All operations are pure; sums rely on numpy's pairwise accumulation, so
results are reproducible across runs and thread counts.
"""

import math

import numpy as np

from .lattice import as_field
from .model import ModelError, PeriodicSamples, PowerNonlinearity, TableNonlinearity, check_assumptions


def signed_power(t, p):
    """Odd edge kernel ``|t|^(p-2) t``, continuously extended by 0 at t=0."""
    t = np.asarray(t, dtype=float)
    return np.sign(t) * np.abs(t) ** (p - 1.0)


class ProblemInstance:
    """A box plus model data, with per-vertex coefficients precomputed.

    Parameters
    ----------
    box : LatticeBox
    potential : Potential
        Must be strictly positive (v1 > 0).
    nonlinearity : Nonlinearity
        Supplies the exponent p; on a torus every periodic ingredient's
        period must divide every side, or the periodic structure of the
        model would be broken by the wrap.
    """

    def __init__(self, box, potential, nonlinearity):
        p = float(nonlinearity.p)
        if potential.v1 <= 0:
            raise ModelError(f"potential must be strictly positive (A2), min sample {potential.v1:g}")
        if potential.dim != box.dim:
            raise ModelError(f"potential is {potential.dim}-D but box is {box.dim}-D")
        periods = {("potential", potential.period)}
        if isinstance(nonlinearity, PowerNonlinearity):
            for j, (_, coeff) in enumerate(nonlinearity.terms):
                if isinstance(coeff, PeriodicSamples):
                    if coeff.dim != box.dim:
                        raise ModelError(f"coefficient {j} is {coeff.dim}-D but box is {box.dim}-D")
                    periods.add((f"coefficient {j}", coeff.period))
        if box.bc == "torus":
            for name, per in periods:
                bad = [s for s in box.sides if s % per != 0]
                if bad:
                    raise ModelError(
                        f"{name} period {per} must divide every torus side, sides {box.sides}"
                    )

        self.box = box
        self.potential = potential
        self.nl = nonlinearity
        self.p = p
        self.period = math.lcm(*(per for _, per in periods))
        self.v_values = potential.on_box(box)

        if isinstance(nonlinearity, PowerNonlinearity):
            self._terms = [
                (qj, coeff.on_box(box) if isinstance(coeff, PeriodicSamples) else np.full(box.vertex_count, coeff))
                for qj, coeff in nonlinearity.terms
            ]
        else:
            self._terms = None
        self._assumption_report = None

    @property
    def is_pure_power(self):
        return self._terms is not None and len(self._terms) == 1

    def check_field(self, u):
        u = np.asarray(u, dtype=float).reshape(-1)
        if u.shape[0] != self.box.vertex_count:
            raise ValueError(
                f"field length {u.shape[0]} does not match box with {self.box.vertex_count} vertices"
            )
        return u

    # -- vectorized model evaluation over the vertex set --------------------

    def f_values(self, u):
        """f(x, u(x)) at every vertex."""
        if self._terms is not None:
            out = np.zeros_like(u)
            for qj, b in self._terms:
                out += b * signed_power(u, qj - 1.0)
            return out
        return np.asarray(self.nl.f(None, u), dtype=float)

    def F_values(self, u):
        """F(x, u(x)) at every vertex."""
        if self._terms is not None:
            out = np.zeros_like(u)
            for qj, b in self._terms:
                out += b * np.abs(u) ** qj / qj
            return out
        return np.asarray(self.nl.F(None, u), dtype=float)

    def enorm_p(self, u):
        """p-th power of the potential-weighted norm, ``||u||^p``."""
        u = self.check_field(u)
        return dirichlet_energy(self, u) + float(np.sum(self.v_values * np.abs(u) ** self.p))

    def enorm(self, u):
        return self.enorm_p(u) ** (1.0 / self.p)

    def assumption_report(self):
        """Cached structural audit of the model data."""
        if self._assumption_report is None:
            self._assumption_report = check_assumptions(self.nl, self.potential)
        return self._assumption_report

    def require_assumptions(self):
        report = self.assumption_report()
        if not report.passed:
            names = ", ".join(c.name for c in report.failures())
            raise ModelError(f"model fails structural checks: {names}")
        return report

    def fingerprint(self):
        """Plain-data identity of the instance, for config round-trip checks."""
        nl = self.nl
        if isinstance(nl, PowerNonlinearity):
            terms = [
                (qj, coeff.samples.tolist() if isinstance(coeff, PeriodicSamples) else coeff)
                for qj, coeff in nl.terms
            ]
            nl_part = ("power", nl.p, nl.a, terms)
        else:
            nl_part = ("table", nl.p, nl.q, nl.a, nl.u_knots.tolist(), nl.f_values.tolist())
        return (
            self.box.sides,
            self.box.bc,
            self.p,
            self.potential.grid.samples.tolist(),
            nl_part,
        )

    def __repr__(self):
        return (
            f"ProblemInstance(box={self.box!r}, p={self.p:g}, "
            f"nl={self.nl.kind}, V=[{self.potential.v1:g},{self.potential.v2:g}])"
        )


def p_laplacian(inst, u):
    """Vertexwise stencil ``sum_slots |u_y - u_x|^(p-2) (u_y - u_x)``.

    Out-of-box slots under dirichlet-zero contribute a difference against
    the phantom value 0.
    """
    u = inst.check_field(u)
    box = inst.box
    neighbor_vals = np.where(box.inside_mask, u[box.neighbor_table], 0.0)
    diffs = neighbor_vals - u[:, None]
    return signed_power(diffs, inst.p).sum(axis=1)


def dirichlet_energy(inst, u):
    """Sum of |difference|^p over unordered edges (plus boundary half-edges)."""
    u = inst.check_field(u)
    box = inst.box
    diffs = u[box.edges[:, 0]] - u[box.edges[:, 1]]
    total = float(np.sum(np.abs(diffs) ** inst.p))
    if box.half_vertices.size:
        total += float(np.sum(np.abs(u[box.half_vertices]) ** inst.p))
    return total


def norms(inst, u):
    """The three norms ``(lp, w1p, e)`` of a field.

    ``lp``  plain l^p norm;
    ``w1p`` (dirichlet energy + lp^p)^(1/p);
    ``e``   (dirichlet energy + sum V |u|^p)^(1/p).
    """
    u = inst.check_field(u)
    p = inst.p
    dir_term = dirichlet_energy(inst, u)
    lp_p = float(np.sum(np.abs(u) ** p))
    v_p = float(np.sum(inst.v_values * np.abs(u) ** p))
    return {
        "lp": lp_p ** (1.0 / p),
        "w1p": (dir_term + lp_p) ** (1.0 / p),
        "e": (dir_term + v_p) ** (1.0 / p),
    }


def phi(inst, u):
    """Energy ``||u||^p / p - sum_x F(x, u(x))``; phi(0) = 0."""
    u = inst.check_field(u)
    return inst.enorm_p(u) / inst.p - float(np.sum(inst.F_values(u)))


def phi_grad(inst, u):
    """Gradient field ``G(u) = -lap_p u + V |u|^(p-2) u - f(x, u)``.

    The Euclidean pairing ``sum_x G(u) v`` equals the edge-sum form of the
    energy derivative (see :func:`phi_pairing`) for every direction v.
    """
    u = inst.check_field(u)
    return -p_laplacian(inst, u) + inst.v_values * signed_power(u, inst.p - 1.0) - inst.f_values(u)


def phi_pairing(inst, u, v):
    """Derivative of phi at u applied to v, in edge-sum form.

    ``sum_edges |du|^(p-2) du dv + sum_x V |u|^(p-2) u v - sum_x f(x,u) v``
    with half-edges contributing differences against the zero boundary.
    Independent route to the same number as ``phi_grad(inst, u) . v``.
    """
    u = inst.check_field(u)
    v = inst.check_field(v)
    box = inst.box
    du = u[box.edges[:, 1]] - u[box.edges[:, 0]]
    dv = v[box.edges[:, 1]] - v[box.edges[:, 0]]
    total = float(np.sum(signed_power(du, inst.p) * dv))
    if box.half_vertices.size:
        hv = box.half_vertices
        total += float(np.sum(signed_power(u[hv], inst.p) * v[hv]))
    total += float(np.sum(inst.v_values * signed_power(u, inst.p - 1.0) * v))
    total -= float(np.sum(inst.f_values(u) * v))
    return total


def norm_derivative_pairing(inst, w, v):
    """Derivative of ``||.||^p / p`` at w applied to v (no nonlinear term)."""
    w = inst.check_field(w)
    v = inst.check_field(v)
    box = inst.box
    dw = w[box.edges[:, 1]] - w[box.edges[:, 0]]
    dv = v[box.edges[:, 1]] - v[box.edges[:, 0]]
    total = float(np.sum(signed_power(dw, inst.p) * dv))
    if box.half_vertices.size:
        hv = box.half_vertices
        total += float(np.sum(signed_power(w[hv], inst.p) * v[hv]))
    total += float(np.sum(inst.v_values * signed_power(w, inst.p - 1.0) * v))
    return total


def residual_inf(inst, u):
    """Max-norm of the pointwise equation defect; 0 iff u solves the equation."""
    return float(np.max(np.abs(phi_grad(inst, u))))
