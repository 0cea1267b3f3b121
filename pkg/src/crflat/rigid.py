"""Pointwise CR invariants of rigid hypersurfaces Re z3 = F(z1, z1b, z2, z2b).

F is expanded as a jet in four independent complex variables at the paired
point (z1, conj z1, z2, conj z2); Wirtinger derivatives are plain partials
of that jet.  Quantities of the conjugate function (S-bar and its
derivatives) come from :func:`crflat.jet.conj_jet`.
"""

from dataclasses import dataclass

from . import expr as _expr
from .errors import (DivisionBySingularJet, HessianDegenerate, JSingular,
                     NonPositiveR, RealityViolated, TwoDegenerate)
from .jet import Jet, conj_jet
from .tube import (DEFAULT_ORDER, DEFAULT_TOLERANCES, InvariantReport,
                   SChain, j_invariant, monge_terms, scaled)

Z1, Z1B, Z2, Z2B = range(4)


@dataclass
class RigidReport(InvariantReport):
    S1bar: complex = None          # S_{1-bar}: derivative of S in conj z1
    residual_s1111: float = None
    residual_cma: float = None
    residual_cma_scaled: float = None
    residual_cmonge: float = None
    residual_cmonge_scaled: float = None
    residual_polystruct: float = None
    residual_reality: float = None

    @property
    def rank_residual_scaled(self):
        return self.residual_cma_scaled


def _as_ast(F):
    return _expr.parse(F, "rigid") if isinstance(F, str) else F


def f_jet(F, point, order=DEFAULT_ORDER):
    """Jet of F at the paired point built from ``point = (z1, z2)``."""
    if isinstance(F, Jet):
        return F
    return _expr.eval_jet(_as_ast(F), _expr.EvalDomain("rigid", tuple(point)), order)


def w_invariant_rigid(S, S1, Sb, Sb1, Sb1b, Sb2, Sb11b, Sb21b, Q):
    """W in the rigid case; ``Q = F_{2 1b} / F_{1 1b}``, ``Sb*`` are S-bar partials."""
    terms = [2 * Sb1 / (3 * Sb),
             2 * S1 / (3 * S),
             Sb1b / (3 * Sb ** 3) * (Q * Sb1 - Sb2),
             -(Q * Sb11b - Sb21b) / (3 * Sb ** 2)]
    return sum(terms), terms


def _levi_jet(F):
    """F_{1 1b} as a jet."""
    return F.deriv(Z1).deriv(Z1B)


def _normalize_sign(F, tol):
    """Return (F, flipped) with Re F_{1 1b} > 0 at the point."""
    f11b = _levi_jet(F).value
    if abs(f11b) <= tol.hessian:
        return F, False
    if f11b.real < 0:
        return -F, True
    return F, False


def polystruct_residual(F, point, order=DEFAULT_ORDER, tol=DEFAULT_TOLERANCES):
    """|d^3/dz1^3 (F_{1 1b})^(-2/3)|: zero iff F solves the complex Monge equation.

    The sign of F is normalized first so that F_{1 1b} > 0.
    """
    Fj = f_jet(F, point, order)
    Fj, _ = _normalize_sign(Fj, tol)
    d0 = _levi_jet(Fj)
    if abs(d0.value) <= tol.hessian:
        raise HessianDegenerate(f"F_11b = {d0.value:.3g} vanishes")
    return abs(d0.pow_real(-2.0 / 3.0).partial((3, 0, 0, 0)))


def rigid_invariants(F, point, tol=DEFAULT_TOLERANCES, order=DEFAULT_ORDER):
    """Evaluate S, J, W and the rigid residuals at ``point = (z1, z2)``.

    Raises :class:`RealityViolated`, :class:`HessianDegenerate`,
    :class:`TwoDegenerate` or :class:`JSingular`, each carrying the partial
    report as ``.report``.
    """
    z1, z2 = (complex(z) for z in point)
    Fj = f_jet(F, (z1, z2), order)
    if Fj.order < 5:
        raise ValueError(f"rigid invariants need a jet of order >= 5, got {Fj.order}")
    rep = RigidReport(point=(z1, z2))
    rep.residual_reality = abs(Fj.value.imag)
    if rep.residual_reality > tol.reality:
        rep.error = "RealityViolated"
        raise RealityViolated(f"|Im F| = {rep.residual_reality:.3g} at {point}", rep)

    Fj, flipped = _normalize_sign(Fj, tol)
    rep.flags["sign_flip_applied"] = flipped

    F1 = Fj.deriv(Z1)
    F2 = Fj.deriv(Z2)
    d0 = F1.deriv(Z1B)               # F_{1 1b}
    d1 = d0.deriv(Z1)                # F_{11 1b}
    d2 = d1.deriv(Z1)
    F12b = F1.deriv(Z2B)
    F21b = F2.deriv(Z1B)
    F22b = F2.deriv(Z2B)
    p = {
        "F": Fj.value,
        "F_1": F1.value,
        "F_2": F2.value,
        "F_11b": d0.value,
        "F_12b": F12b.value,
        "F_21b": F21b.value,
        "F_22b": F22b.value,
        "F_111b": d1.value,
        "F_1111b": d2.value,
        "F_11111b": d2.deriv(Z1).value,
    }
    rep.partials = p

    cma_terms = [p["F_11b"] * p["F_22b"], -abs(p["F_12b"]) ** 2]
    rep.residual_cma = abs(sum(cma_terms))
    rep.residual_cma_scaled = scaled(sum(cma_terms), cma_terms)
    rep.residual_ma, rep.residual_ma_scaled = rep.residual_cma, rep.residual_cma_scaled
    mo_terms = monge_terms(p["F_11b"], p["F_111b"], p["F_1111b"], p["F_11111b"])
    rep.residual_cmonge = abs(sum(mo_terms))
    rep.residual_cmonge_scaled = scaled(sum(mo_terms), mo_terms)
    rep.residual_monge, rep.residual_monge_scaled = rep.residual_cmonge, rep.residual_cmonge_scaled
    rep.predicates["levi_rank1"] = rep.residual_cma_scaled < tol.rank
    rep.predicates["hessian_positive"] = p["F_11b"].real > 0

    if abs(p["F_11b"]) <= tol.hessian:
        rep.error = "HessianDegenerate"
        raise HessianDegenerate(f"F_11b = {p['F_11b']:.3g} vanishes", rep)
    rep.residual_polystruct = abs(d0.pow_real(-2.0 / 3.0).partial((3, 0, 0, 0)))

    try:
        ratio = F12b / d0
        A = d1 / d0
        Q = (F21b / d0).value
    except DivisionBySingularJet as exc:
        rep.error = "HessianDegenerate"
        raise HessianDegenerate(str(exc), rep) from exc

    S = ratio.deriv(Z1)
    S1, S1b, S2 = S.deriv(Z1), S.deriv(Z1B), S.deriv(Z2)
    S11, S12 = S1.deriv(Z1), S1.deriv(Z2)
    S111 = S11.deriv(Z1).value if S11.order >= 1 else None
    rep.flags["s111_term_disabled"] = S111 is None
    chain = SChain(S.value, S1.value, S2.value, S11.value, S12.value, S111)
    rep.s_chain = chain
    rep.S1bar = S1b.value
    rep.residual_s1111 = max(abs(chain.S1), abs(rep.S1bar))

    two_nd = abs(chain.S) > tol.degeneracy
    rep.predicates["two_nondegenerate"] = two_nd
    if not two_nd:
        rep.error = "TwoDegenerate"
        raise TwoDegenerate(f"|S| = {abs(chain.S):.3g} <= {tol.degeneracy:g}", rep)

    Sb = conj_jet(S)
    Sb1, Sb1b, Sb2 = Sb.deriv(Z1), Sb.deriv(Z1B), Sb.deriv(Z2)
    W, w_terms = w_invariant_rigid(chain.S, chain.S1, Sb.value, Sb1.value, Sb1b.value,
                                   Sb2.value, Sb1.deriv(Z1B).value,
                                   Sb2.deriv(Z1B).value, Q)
    rep.W = W
    rep.W_scaled = scaled(W, w_terms)

    A1 = A.deriv(Z1)
    try:
        J, j_terms, reduced = j_invariant(chain.S, chain.S1, chain.S11, chain.S111,
                                          A.value, A1.value, A1.deriv(Z1).value, tol.sing)
    except JSingular as exc:
        rep.flags["j_singular"] = True
        rep.error = "JSingular"
        exc.report = rep
        raise
    rep.J = J
    rep.J_scaled = scaled(J, j_terms)
    rep.flags["j_reduced_formula_used"] = reduced
    rep.predicates["flat"] = (rep.predicates["levi_rank1"] and two_nd
                              and rep.J_scaled < tol.flat and rep.W_scaled < tol.flat)
    return rep


# -- special form F = r |z1|^2 + t z1^2 + conj(t) z1b^2 ------------------------

@dataclass(frozen=True)
class SpecFormProfile:
    """Coefficient functions of the special form, with a holomorphic gauge u(z2)."""

    r_expr: object
    t_expr: object
    u_expr: object = None

    def __post_init__(self):
        for name, allowed in (("r_expr", {"z2", "z2b"}), ("t_expr", {"z2", "z2b"}),
                              ("u_expr", {"z2"})):
            node = getattr(self, name)
            if node is None:
                continue
            if isinstance(node, str):
                node = _expr.parse(node, "rigid")
                object.__setattr__(self, name, node)
            extra = _expr.variables(node) - allowed
            if extra:
                raise ValueError(f"{name} may only use {sorted(allowed)}, found {sorted(extra)}")

    def assembled(self):
        """AST of F = r z1 z1b + (t + u) z1^2 + conj(t + u) z1b^2."""
        B, V = _expr.BinOp, _expr.Var
        tu = self.t_expr if self.u_expr is None else B("+", self.t_expr, self.u_expr)
        z1sq = B("^", V("z1"), _expr.Num(2.0))
        z1bsq = B("^", V("z1b"), _expr.Num(2.0))
        return B("+", B("+", B("*", self.r_expr, B("*", V("z1"), V("z1b"))),
                        B("*", tu, z1sq)),
                 B("*", _expr.conjugate(tu), z1bsq))


def specform_residuals(profile, z2, order=4, reality_tol=1e-9):
    """Residuals of the special-form system at ``z2``.

    Keys: ``mainsystem_1`` (r r_22b - |r_2|^2 - 4|t_2b|^2),
    ``mainsystem_2`` (r t_22b - 2 r_2 t_2b), ``reltr`` (t_2b - r^2/2),
    ``newshortsys`` (r r_22b - |r_2|^2 - r^4), ``laplace``
    (Laplacian of ln r minus 4 r^2), plus ``t_2b`` and the assembled F.
    """
    z2 = complex(z2)
    dom = _expr.EvalDomain("rigid", (0.0, z2))
    r = _expr.eval_jet(profile.r_expr, dom, order)
    t = _expr.eval_jet(profile.t_expr, dom, order)
    if abs(r.value.imag) > reality_tol:
        raise NonPositiveR(f"r is not real at z2={z2}: {r.value}")
    if not r.value.real > 0:
        raise NonPositiveR(f"r = {r.value.real:.6g} is not positive at z2={z2}")
    rv = r.value.real
    r2 = r.deriv(Z2)
    r22b = r2.deriv(Z2B).value
    t2b = t.deriv(Z2B)
    t22b = t2b.deriv(Z2).value
    r2v, t2bv = r2.value, t2b.value
    f22b = r.log().deriv(Z2).deriv(Z2B).value
    return {
        "mainsystem_1": abs(rv * r22b - abs(r2v) ** 2 - 4 * abs(t2bv) ** 2),
        "mainsystem_2": abs(rv * t22b - 2 * r2v * t2bv),
        "reltr": abs(t2bv - rv ** 2 / 2),
        "newshortsys": abs(rv * r22b - abs(r2v) ** 2 - rv ** 4),
        "laplace": abs(4 * f22b - 4 * rv ** 2),
        "r": rv,
        "t_2b": t2bv,
        "F": profile.assembled(),
    }
