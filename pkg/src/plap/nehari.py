"""Nehari projection: one monotone root-find per direction.

Along the ray ``s -> s*w`` through a nonzero field ``w``, the energy
``alpha_w(s) = phi(s*w)`` rises and then falls, with derivative

    alpha_w'(s) = s^(p-1) * theta_w(s),
    theta_w(s)  = ||w||^p - s^(1-p) * sum_x f(x, s*w(x)) * w(x).

Under the monotonicity assumption on ``f/|u|^(p-1)``, ``theta_w`` is strictly
decreasing, positive for small s and eventually negative, so it has exactly
one root ``s_w``: the unique scale at which the ray meets the Nehari manifold
(the set of nonzero fields with vanishing radial derivative).  The projection
``w -> s_w * w`` turns minimization of the energy over that manifold into
minimization of the reduced, scale-invariant energy ``psi(w) = phi(s_w w)``
over directions, whose gradient field is ``s_w * G(s_w w)``.

For the single-term power nonlinearity the root has the closed form
``s_w = (||w||^p / sum_x b |w|^q)^(1/(q-p))``, used as a fast path and,
in the tests, as an independent oracle for the bracketed general path.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .functional import phi, phi_grad

S_MIN, S_MAX = 1e-30, 1e30
_EXPANSION_CAP = 200


class FiberBracketError(RuntimeError):
    """Bracket expansion exhausted: the model lacks the sign change that
    the small-u and large-u growth structure guarantees for valid data."""


@dataclass
class FiberResult:
    """Outcome of one fiber root-find.

    ``s`` is the fiber scalar, ``theta_at_s`` the residual of the monotone
    factor at the root, ``bracket`` a pair with theta positive on the left
    and negative on the right, ``iterations`` the number of theta
    evaluations spent.
    """

    s: float
    theta_at_s: float
    bracket: tuple
    iterations: int


def theta(inst, w, s):
    """Monotone factor of the radial derivative of the energy along w."""
    w = inst.check_field(w)
    if not np.any(w):
        raise ValueError("direction must be nonzero")
    s = float(s)
    if s <= 0:
        raise ValueError(f"s must be positive, got {s}")
    coupling = float(np.sum(inst.f_values(s * w) * w))
    return inst.enorm_p(w) - s ** (1.0 - inst.p) * coupling


def _closed_form_scalar(inst, w):
    qj, b = inst._terms[0]
    denom = float(np.sum(b * np.abs(w) ** qj))
    return (inst.enorm_p(w) / denom) ** (1.0 / (qj - inst.p))


def fiber_scalar(inst, w, tol=1e-10, method="auto", s0=1.0):
    """Unique positive scale placing ``s * w`` on the Nehari manifold.

    Parameters
    ----------
    tol : float
        Relative tolerance certified for the returned scalar; the internal
        refinement overshoots it by two orders.
    method : str
        ``"auto"`` takes the closed form for single-term power models and
        the bracketed root-find otherwise; ``"closed-form"`` and
        ``"bracket"`` force a route.
    s0 : float
        Starting point of the geometric bracket expansion.

    Raises
    ------
    FiberBracketError
        If doubling/halving from ``s0`` never brackets a sign change within
        [1e-30, 1e30]; valid models always produce one.
    """
    w = inst.check_field(w)
    if not np.any(w):
        raise ValueError("direction must be nonzero")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if method not in ("auto", "closed-form", "bracket"):
        raise ValueError(f"unknown method {method!r}")
    if method == "closed-form" and not inst.is_pure_power:
        raise ValueError("closed form requires a single-term power nonlinearity")

    if method in ("auto", "closed-form") and inst.is_pure_power:
        s = _closed_form_scalar(inst, w)
        return FiberResult(
            s=s,
            theta_at_s=theta(inst, w, s),
            bracket=(s * (1.0 - 1e-6), s * (1.0 + 1e-6)),
            iterations=0,
        )

    th = lambda s: theta(inst, w, s)
    evals = 0
    s0 = float(s0)
    if not S_MIN <= s0 <= S_MAX:
        raise ValueError(f"s0 must lie in [{S_MIN:g}, {S_MAX:g}]")
    t0 = th(s0)
    evals += 1
    if t0 == 0.0:
        return FiberResult(s=s0, theta_at_s=0.0, bracket=(s0, s0), iterations=evals)
    if t0 > 0:
        lo, hi = s0, 2.0 * s0
        for _ in range(_EXPANSION_CAP):
            t = th(hi)
            evals += 1
            if t <= 0:
                break
            lo, hi = hi, 2.0 * hi
            if hi > S_MAX:
                raise FiberBracketError("no sign change up to s=1e30; growth structure violated")
        else:
            raise FiberBracketError("bracket expansion exhausted")
    else:
        lo, hi = 0.5 * s0, s0
        for _ in range(_EXPANSION_CAP):
            t = th(lo)
            evals += 1
            if t >= 0:
                break
            lo, hi = 0.5 * lo, lo
            if lo < S_MIN:
                raise FiberBracketError("no sign change down to s=1e-30; growth structure violated")
        else:
            raise FiberBracketError("bracket expansion exhausted")

    rtol = max(4 * np.finfo(float).eps, tol * 1e-2)
    root, info = brentq(th, lo, hi, rtol=rtol, maxiter=200, full_output=True, disp=False)
    if not info.converged:
        raise FiberBracketError(f"root refinement failed on bracket ({lo:g}, {hi:g})")
    return FiberResult(
        s=float(root),
        theta_at_s=th(root),
        bracket=(lo, hi),
        iterations=evals + info.function_calls,
    )


def project(inst, w, tol=1e-10):
    """Nehari representative of the ray through w: ``s_w * w``."""
    w = inst.check_field(w)
    return fiber_scalar(inst, w, tol=tol).s * w


def psi(inst, w, tol=1e-10):
    """Reduced energy ``phi(s_w w)``; invariant under rescaling of w."""
    return phi(inst, project(inst, w, tol=tol))


def psi_grad(inst, w, tol=1e-10):
    """Gradient field of the reduced energy: ``s_w * G(s_w * w)``.

    Its Euclidean pairing with any direction z is the directional
    derivative of :func:`psi` at w along z; the pairing with w itself
    vanishes (the radial derivative is zero on the manifold).
    """
    w = inst.check_field(w)
    s = fiber_scalar(inst, w, tol=tol).s
    return s * phi_grad(inst, s * w)
