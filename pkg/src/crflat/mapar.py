"""Monge-Ampere solutions from profile pairs (p, q), and the ODE reductions.

Every solution rho of rho_11 rho_22 - rho_12^2 = 0 with rho(0) = rho_1(0) =
rho_2(0) = 0 and rho_11 > 0 is described by two one-variable profiles p, q
(p(0) = q(0) = 0, q' > 0) through the change of variables v = rho_1,
w = t2, whose inverse is

    t1 = q(v) - w p'(v),   t2 = w,

and rho(t1(v, w), w) = v q(v) - int_0^v q + w (p(v) - v p'(v)).

This module reconstructs rho's jet at any (t1, t2) by solving for v in jet
arithmetic, evaluates the closed-form partials in (v, w), the four-ODE
system obtained by collecting powers of w in the Monge equation, and the
Liouville-type ODEs behind the rigid classification.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import expr as _expr
from . import jet as _jet
from .errors import (DomainGuard, JacobianSingular, NewtonDiverged,
                     ProfileViolation, QuadratureUnreliable)
from .tube import monge_terms, scaled

PROFILE_MARGIN = 1e-6
NEWTON_TOL = 1e-12
NEWTON_MAXITER = 50
JACOBIAN_TOL = 1e-10
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def _parse_profile(e):
    return _expr.parse(e, "profile") if isinstance(e, str) else e


@dataclass(frozen=True)
class PQProfile:
    p_expr: object
    q_expr: object
    interval: tuple = (-0.5, 0.5)

    def __post_init__(self):
        object.__setattr__(self, "p_expr", _parse_profile(self.p_expr))
        object.__setattr__(self, "q_expr", _parse_profile(self.q_expr))
        lo, hi = self.interval
        if not lo < 0 < hi:
            raise ValueError(f"admissible interval {self.interval} must contain 0 in its interior")

    def series(self, which, v, order):
        """Taylor coefficients f^(k)(v)/k!, k = 0..order, of p or q at v."""
        node = self.p_expr if which == "p" else self.q_expr
        j = _expr.eval_jet(node, _expr.EvalDomain("profile", (float(v),)), order)
        return np.array(j.coeffs, dtype=float)

    def derivatives(self, v, n):
        """([p, p', ..., p^(n)], [q, q', ..., q^(n)]) at v."""
        fact = np.array([math.factorial(k) for k in range(n + 1)], dtype=float)
        return self.series("p", v, n) * fact, self.series("q", v, n) * fact

    def q_value(self, v):
        return _expr.eval_scalar(self.q_expr, {"v": float(v)})


def _samples(interval, n):
    lo, hi = interval
    return np.union1d(np.linspace(lo, hi, n), [0.0])


@dataclass(frozen=True)
class ProfileDiagnostics:
    p0: float
    q0: float
    min_qprime: float
    min_abs_pdd: float
    n_samples: int


def pq_validate(profile, n_samples=64, margin=PROFILE_MARGIN):
    """Check p(0) = q(0) = 0, q' > 0 and p'' != 0 on the admissible interval.

    The samples are ``n_samples`` evenly spaced points plus v = 0.
    """
    (p0, *_), (q0, *_) = profile.derivatives(0.0, 0)
    if abs(p0) > 1e-12:
        raise ProfileViolation(f"p(0) = {p0:.3g} != 0", 0.0)
    if abs(q0) > 1e-12:
        raise ProfileViolation(f"q(0) = {q0:.3g} != 0", 0.0)
    min_qp, min_pdd = math.inf, math.inf
    for v in _samples(profile.interval, n_samples):
        p, q = profile.derivatives(v, 2)
        if q[1] < margin:
            raise ProfileViolation(f"q'(v) = {q[1]:.3g} is not >= {margin:g}", float(v))
        if abs(p[2]) < margin:
            raise ProfileViolation(f"|p''(v)| = {abs(p[2]):.3g} is not >= {margin:g}", float(v))
        min_qp, min_pdd = min(min_qp, q[1]), min(min_pdd, abs(p[2]))
    return ProfileDiagnostics(float(p0), float(q0), float(min_qp), float(min_pdd),
                              len(_samples(profile.interval, n_samples)))


def forward_map(profile, v, w):
    """(v, w) -> (t1, t2) = (q(v) - w p'(v), w)."""
    p, q = profile.derivatives(v, 1)
    return q[0] - w * p[1], w


def invert_point(profile, t1, t2, tol=NEWTON_TOL, maxiter=NEWTON_MAXITER,
                 jac_tol=JACOBIAN_TOL):
    """Solve q(v) - t2 p'(v) = t1 for v by Newton from v = 0; returns (v, t2)."""
    v = 0.0
    for _ in range(maxiter):
        p, q = profile.derivatives(v, 2)
        g = q[0] - t2 * p[1] - t1
        dg = q[1] - t2 * p[2]
        if abs(dg) < jac_tol:
            raise JacobianSingular(f"q'(v) - w p''(v) = {dg:.3g} at v={v:.6g}, w={t2:.6g}")
        step = g / dg
        v -= step
        if not math.isfinite(v):
            raise NewtonDiverged(f"Newton iterate left the reals solving for ({t1}, {t2})")
        if abs(step) <= tol * (1.0 + abs(v)):
            return v, t2
    raise NewtonDiverged(f"no convergence in {maxiter} steps for ({t1}, {t2})")


def _deriv_series(c):
    return np.array([(k + 1) * c[k + 1] for k in range(len(c) - 1)])


def _integral_of_q(profile, v):
    """int_0^v q by 32-node Gauss-Legendre."""
    x = 0.5 * v * (_GL_NODES + 1.0)
    return 0.5 * v * float(sum(w * profile.q_value(xi) for w, xi in zip(_GL_WEIGHTS, x)))


def rho_jet_from_pq(profile, t1, t2, order=6):
    """Jet of rho at (t1, t2) for the Monge-Ampere solution generated by (p, q)."""
    v0, w = invert_point(profile, t1, t2)
    lo, hi = profile.interval
    if not lo <= v0 <= hi:
        raise QuadratureUnreliable(f"v = {v0:.6g} lies outside the admissible interval {profile.interval}")

    cp = profile.series("p", v0, order + 2)
    cq = profile.series("q", v0, order + 2)
    dp, ddp, dq = _deriv_series(cp), _deriv_series(_deriv_series(cp)), _deriv_series(cq)
    cint = np.concatenate([[_integral_of_q(profile, v0)],
                           cq[:order] / np.arange(1, order + 1)])

    T1, T2 = _jet.seed_all((float(t1), float(t2)), order)
    V = _jet.constant(v0, order, 2, T1.point)
    # each Newton step in jet arithmetic doubles the number of correct orders
    for _ in range(order + 2):
        G = V.compose(cq) - T2 * V.compose(dp) - T1
        dG = V.compose(dq) - T2 * V.compose(ddp)
        step = G / dG
        V = V - (step - step.value)

    P, dP = V.compose(cp), V.compose(dp)
    return V * V.compose(cq) - V.compose(cint) + T2 * (P - V * dP)


def closed_form_partials(profile, v, w):
    """rho_11, rho_12, rho_111, rho^(IV), rho^(V), S, S_1 at (t1(v, w), w) in closed form."""
    p, q = profile.derivatives(v, 5)
    delta = q[1] - w * p[2]
    n2 = q[2] - w * p[3]
    n3 = q[3] - w * p[4]
    n4 = q[4] - w * p[5]
    return {
        "rho_11": 1.0 / delta,
        "rho_12": p[1] / delta,
        "rho_111": -n2 / delta ** 3,
        "rho_1111": -(n3 * delta - 3 * n2 ** 2) / delta ** 5,
        "rho_11111": -((n4 * delta - 5 * n2 * n3) * delta
                       - 5 * (n3 * delta - 3 * n2 ** 2) * n2) / delta ** 7,
        "S": p[2] / delta,
        "S_1": (p[3] * q[1] - p[2] * q[2]) / delta ** 3,
    }


def closed_form_residuals(profile, v, w, order=6, jac_tol=JACOBIAN_TOL):
    """Compare jet-reconstructed partials of rho with their closed forms in (v, w).

    Returns per-quantity ``(from_jet, closed_form, discrepancy)`` under
    ``"quantities"`` and the largest discrepancy under ``"max"``; the
    discrepancy is |a - b| / max(1, |b|).
    """
    p, q = profile.derivatives(v, 2)
    if abs(q[1] - w * p[2]) < jac_tol:
        raise JacobianSingular(f"q'(v) - w p''(v) = {q[1] - w * p[2]:.3g} at (v, w) = ({v}, {w})")
    t1, t2 = forward_map(profile, v, w)
    rho = rho_jet_from_pq(profile, t1, t2, order)
    r1 = rho.deriv(0)
    r11, r12 = r1.deriv(0), r1.deriv(1)
    S = (r12 / r11).deriv(0)
    from_jet = {
        "rho_11": r11.value,
        "rho_12": r12.value,
        "rho_111": rho.partial((3, 0)),
        "rho_1111": rho.partial((4, 0)),
        "rho_11111": rho.partial((5, 0)),
        "S": S.value,
        "S_1": S.deriv(0).value,
    }
    closed = closed_form_partials(profile, v, w)
    out = {}
    for k, b in closed.items():
        a = from_jet[k]
        out[k] = (a, b, abs(a - b) / max(1.0, abs(b)))
    return {"t": (t1, t2), "quantities": out, "max": max(d for *_, d in out.values())}


def w_product_closed_form(profile, v, w):
    """6 (p'')^2 (p''' q' - p'' q'') / (q' - w p'')^5, which equals 3 S^3 W."""
    p, q = profile.derivatives(v, 3)
    return 6 * p[2] ** 2 * (p[3] * q[1] - p[2] * q[2]) / (q[1] - w * p[2]) ** 5


def final1_terms(profile, v):
    p, q = profile.derivatives(v, 5)
    p2, p3, p4, p5 = p[2], p[3], p[4], p[5]
    q1, q2, q3, q4 = q[1], q[2], q[3], q[4]
    return [
        [9 * p5 * p2 ** 2, -45 * p4 * p3 * p2, 40 * p3 ** 3],
        [6 * p5 * p2 * q1, 3 * p2 ** 2 * q4,
         -15 * p4 * p3 * q1, -15 * p4 * p2 * q2, -15 * p3 * p2 * q3, 40 * p3 ** 2 * q2],
        [3 * p5 * q1 ** 2, 6 * p2 * q4 * q1,
         -15 * p4 * q2 * q1, -15 * p3 * q3 * q1, -15 * p2 * q3 * q2, 40 * p3 * q2 ** 2],
        [9 * q4 * q1 ** 2, -45 * q3 * q2 * q1, 40 * q2 ** 3],
    ]


def final1_residuals(profile, v):
    """The four ODE left-hand sides at v: signed values, |raw| and scaled."""
    terms = final1_terms(profile, v)
    signed = [sum(t) for t in terms]
    return {
        "signed": signed,
        "raw": [abs(s) for s in signed],
        "scaled": [scaled(s, t) for s, t in zip(signed, terms)],
    }


def firstcur_check(profile, n_samples=64, tol=1e-10):
    """Is q'/p'' constant on the interval?  Returns (is_constant, max_deviation)."""
    ratios = []
    for v in _samples(profile.interval, n_samples):
        p, q = profile.derivatives(v, 2)
        ratios.append(q[1] / p[2])
    p, q = profile.derivatives(0.0, 2)
    ref = q[1] / p[2]
    dev = max(abs(r - ref) for r in ratios)
    return dev <= tol * max(1.0, abs(ref)), dev


def monge_residual_1d(p_expr, v):
    """|9 p^(5) (p'')^2 - 45 p^(4) p''' p'' + 40 (p''')^3| at v: (raw, scaled)."""
    node = _parse_profile(p_expr)
    j = _expr.eval_jet(node, _expr.EvalDomain("profile", (float(v),)), 5)
    d = [j.partial((k,)) for k in range(6)]
    terms = monge_terms(d[2], d[3], d[4], d[5])
    return abs(sum(terms)), scaled(sum(terms), terms)


# -- Liouville-type ODE families ----------------------------------------------

FAMILY_RANGES = {
    "case1": "D > 0 (C = 0)",
    "case2": "C > 0, 0 < D < 1",
    "case3": "C < 0, 0 < D < pi/2",
    "reinhardt": "beta real",
}


@dataclass(frozen=True)
class OdeFamily:
    """Closed-form solutions g = ln R of g'' = e^{2g} (cases 1-3) and of
    g'' x + g' = e^{2g} (Reinhardt)."""

    family: str
    sigma: int = 1
    C: float = 0.0
    D: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        f, C, D = self.family, self.C, self.D
        if f not in FAMILY_RANGES:
            raise ValueError(f"unknown ODE family {f!r}; have {sorted(FAMILY_RANGES)}")
        if self.sigma not in (-1, 1):
            raise ValueError(f"sigma must be +1 or -1, got {self.sigma}")
        ok = {
            "case1": C == 0 and D > 0,
            "case2": C > 0 and 0 < D < 1,
            "case3": C < 0 and 0 < D < math.pi / 2,
            "reinhardt": math.isfinite(self.beta),
        }[f]
        if not ok:
            raise ValueError(f"{f} parameters out of range: need {FAMILY_RANGES[f]}")

    def R_jet(self, x, order=2):
        """Jet of R at x (x = z2 + conj z2 for cases 1-3, |z2|^2 for Reinhardt)."""
        X = _jet.seed((float(x),), 0, order, 1)
        s, C, D = self.sigma, self.C, self.D
        try:
            if self.family == "case1":
                den = -s * X + D
                if den.value <= 0:
                    raise DomainGuard(f"-sigma x + D = {den.value:.3g} <= 0")
                return 1 / den
            if self.family == "case2":
                k = s * math.sqrt(C)
                den = 1 - D * (2 * k * X).exp()
                if den.value <= 0:
                    raise DomainGuard(f"1 - D e^(2 sigma sqrt(C) x) = {den.value:.3g} <= 0")
                return 2 * math.sqrt(C * D) * (k * X).exp() / den
            if self.family == "case3":
                c = (s * math.sqrt(-C) * X + D).cos()
                if c.value <= 0:
                    raise DomainGuard(f"cos(sigma sqrt(-C) x + D) = {c.value:.3g} <= 0")
                return math.sqrt(-C) / c
            a = math.exp(2 * self.beta)
            den = 1 - a * X
            if den.value <= 0:
                raise DomainGuard(f"1 - e^(2 beta) x = {den.value:.3g} <= 0")
            return math.exp(self.beta) / den
        except _jet.DivisionBySingularJet as exc:
            raise DomainGuard(str(exc)) from exc

    def graphing_function(self):
        """Rigid F = R|z1|^2 + t z1^2 + conj(t) z1b^2 with t_{2b} = R^2/2 (no gauge)."""
        s, C, D, b = self.sigma, self.C, self.D, self.beta
        x = "(z2+z2b)"
        if self.family == "case1":
            return f"{s}/(2*(-{s}*{x}+{D!r}))*(z1^2+2*{s}*z1*z1b+z1b^2)"
        if self.family == "case2":
            k = s * math.sqrt(C)
            return (f"{k!r}/(1-{D!r}*exp(2*{k!r}*{x}))"
                    f"*(z1^2+2*{s}*{math.sqrt(D)!r}*exp({k!r}*{x})*z1*z1b+z1b^2)")
        if self.family == "case3":
            k = s * math.sqrt(-C)
            return (f"{k!r}/(2*cos({k!r}*{x}+{D!r}))"
                    f"*(sin({k!r}*{x}+{D!r})*(z1^2+z1b^2)+2*{s}*z1*z1b)")
        a = math.exp(2 * b)
        den = f"(1-{a!r}*z2*z2b)"
        return (f"{math.exp(b)!r}/{den}*z1*z1b + {a!r}*z2b/(2*{den})*z1^2"
                f" + {a!r}*z2/(2*{den})*z1b^2")


def liouville_residuals(family, x):
    """Residuals of the ODEs satisfied by g = ln R at x.

    Cases 1-3: ``ode`` = g'' - e^{2g} and ``first_integral`` =
    (g')^2 - e^{2g} - C.  Reinhardt: ``ode`` = g'' x + g' - e^{2g} and
    ``first_integral`` = (g')^2 x + g' - e^{2g}.  Values are absolute.
    """
    R = family.R_jet(x, order=2)
    if R.value <= 0:
        raise DomainGuard(f"R = {R.value:.3g} is not positive at x={x}")
    g = R.log()
    g0, g1, g2 = g.value, g.partial((1,)), g.partial((2,))
    e2g = math.exp(2 * g0)
    if family.family == "reinhardt":
        ode = g2 * x + g1 - e2g
        first = g1 ** 2 * x + g1 - e2g
        recovered = None
    else:
        ode = g2 - e2g
        recovered = g1 ** 2 - e2g
        first = recovered - family.C
    return {"x": float(x), "g": g0, "g_1": g1, "g_2": g2,
            "ode": abs(ode), "first_integral": abs(first), "C_recovered": recovered}
