"""Pointwise CR invariants of tube hypersurfaces z3 + conj(z3) = rho(t1, t2).

The engine works directly with rho and its partials in (t1, t2).  The
2-nondegeneracy function is ``S = d/dt1 (rho_12 / rho_11)``; J and W are
Pocchiola's invariants written in terms of rho.  Flatness is J = W = 0.
"""

import warnings
from dataclasses import dataclass, field, replace

from . import expr as _expr
from .errors import (DivisionBySingularJet, HessianDegenerate, JSingular,
                     TwoDegenerate)
from .jet import Jet

DEFAULT_ORDER = 6


@dataclass(frozen=True)
class Tolerances:
    flat: float = 1e-8        # scaled |J|, |W|
    sing: float = 1e-10       # |S1| below which S111/S1 is treated as 0/0
    degeneracy: float = 1e-10  # |S| below which the point is 2-degenerate
    rank: float = 1e-9        # scaled Monge-Ampere residual
    hessian: float = 1e-12    # |rho_11| (or |F_11b|) treated as zero
    reality: float = 1e-9     # |Im F| allowed for rigid graphing functions

    def override(self, **kw):
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


DEFAULT_TOLERANCES = Tolerances()


@dataclass
class SChain:
    S: complex
    S1: complex
    S2: complex
    S11: complex
    S12: complex
    S111: complex = None  # unavailable at order 5


@dataclass
class InvariantReport:
    point: tuple
    s_chain: SChain = None
    J: complex = None
    W: complex = None
    J_scaled: float = None
    W_scaled: float = None
    residual_ma: float = None
    residual_ma_scaled: float = None
    residual_monge: float = None
    residual_monge_scaled: float = None
    partials: dict = field(default_factory=dict)
    predicates: dict = field(default_factory=lambda: {
        "hessian_positive": False, "two_nondegenerate": False,
        "levi_rank1": False, "flat": False})
    flags: dict = field(default_factory=lambda: {
        "j_reduced_formula_used": False, "guard_skipped": False,
        "sign_flip_applied": False, "j_singular": False,
        "s111_term_disabled": False})
    error: str = None   # name of the InvariantError that stopped evaluation
    guard: str = None   # triggering guard for out-of-domain points

    @property
    def rank_residual_scaled(self):
        return self.residual_ma_scaled

    @property
    def label(self):
        return classify(self)


def scaled(value, terms):
    """|value| / (1 + sum |terms|): dimensionless residual."""
    return abs(value) / (1.0 + sum(abs(t) for t in terms))


def j_invariant(S, S1, S11, S111, A, A1, A11, sing_tol):
    """J from the S-chain and A = (third)/(second) derivative ratio chain.

    Returns ``(J, terms, reduced)``.  When |S1| <= sing_tol the S111/S1 term
    is 0/0; if |S111| is also below sing_tol every S1/S11/S111 term is
    dropped (the reduced formula), otherwise :class:`JSingular` is raised.
    ``S111=None`` means the jet order did not allow it; the S111/S1 term is
    then omitted.
    """
    base = [A * A1 / 3, -2.0 / 27.0 * A ** 3, -A11 / 6]
    if abs(S1) > sing_tol:
        terms = [5 * S1 ** 2 / (18 * S ** 2) * A,
                 -S1 / (9 * S) * A ** 2,
                 20 * S1 ** 3 / (27 * S ** 3),
                 -5 * S1 * S11 / (6 * S ** 2),
                 S1 / (6 * S) * A1,
                 -S11 / (6 * S) * A] + base
        if S111 is not None:
            terms.append(S111 / S1)
        return sum(terms), terms, False
    if S111 is None or abs(S111) <= sing_tol:
        return sum(base), base, True
    raise JSingular(f"|S1| = {abs(S1):.3g} <= {sing_tol:g} but |S111| = {abs(S111):.3g}")


def w_invariant_tube(S, S1, S2, S11, S12, R):
    """W for tubes; ``R = rho_12 / rho_11``."""
    terms = [4 * S1 / (3 * S),
             S1 / (3 * S ** 3) * (R * S1 - S2),
             -(R * S11 - S12) / (3 * S ** 2)]
    return sum(terms), terms


def monge_terms(d0, d1, d2, d3):
    """Terms of 9 d3 d0^2 - 45 d2 d1 d0 + 40 d1^3 (Monge-type residual)."""
    return [9 * d3 * d0 ** 2, -45 * d2 * d1 * d0, 40 * d1 ** 3]


def classify(report):
    """Label a report: flat, nonflat, two_degenerate, not_rank1 or out_of_domain."""
    if report.flags.get("guard_skipped") or report.error == "HessianDegenerate":
        return "out_of_domain"
    if not report.predicates.get("levi_rank1"):
        return "not_rank1"
    if not report.predicates.get("two_nondegenerate"):
        return "two_degenerate"
    if report.predicates.get("flat"):
        return "flat"
    return "nonflat"


tube_classify = classify


def rho_jet(source, point, order=DEFAULT_ORDER):
    """Jet of rho at ``point`` from text, an AST, or an existing jet."""
    if isinstance(source, Jet):
        if source.nvars != 2:
            raise ValueError("tube jets have 2 variables")
        if tuple(source.point) != tuple(float(x) for x in point):
            raise ValueError(f"jet was seeded at {source.point}, not {point}")
        return source
    if isinstance(source, str):
        source = _expr.parse(source, "tube")
    return _expr.eval_jet(source, _expr.EvalDomain("tube", tuple(point)), order)


class NormalizationWarning(UserWarning):
    pass


def check_normalization(source, tol=1e-12):
    """Warn when rho(0), rho_1(0), rho_2(0) are not all zero.

    The invariants are pointwise and ignore affine terms, so this is only
    advisory.  Returns True when rho is normalized.
    """
    rho = rho_jet(source, (0.0, 0.0), 1)
    vals = (rho.value, rho.partial((1, 0)), rho.partial((0, 1)))
    if max(abs(v) for v in vals) > tol:
        warnings.warn(f"rho is not normalized at the origin: rho, rho_1, rho_2 = {vals}",
                      NormalizationWarning, stacklevel=2)
        return False
    return True


def tube_invariants(source, point, tol=DEFAULT_TOLERANCES, order=DEFAULT_ORDER):
    """Evaluate S, J, W, residuals and predicates of a tube at ``point``.

    ``source`` is rho as text, an AST, or a jet of order >= 5 already seeded
    at ``point``.  Raises :class:`HessianDegenerate`, :class:`TwoDegenerate`
    or :class:`JSingular` with the partial report attached as ``.report``.
    """
    rho = rho_jet(source, point, order)
    if rho.order < 5:
        raise ValueError(f"tube invariants need a jet of order >= 5, got {rho.order}")
    rep = InvariantReport(point=tuple(float(x) for x in point))

    r1 = rho.deriv(0)
    r11, r12 = r1.deriv(0), r1.deriv(1)
    r111 = r11.deriv(0)
    d = {
        "rho": rho.value,
        "rho_1": r1.value,
        "rho_2": rho.deriv(1).value,
        "rho_11": r11.value,
        "rho_12": r12.value,
        "rho_22": rho.deriv(1).deriv(1).value,
        "rho_111": r111.value,
        "rho_1111": rho.partial((4, 0)),
        "rho_11111": rho.partial((5, 0)),
    }
    rep.partials = d

    ma_terms = [d["rho_11"] * d["rho_22"], -d["rho_12"] ** 2]
    rep.residual_ma = abs(sum(ma_terms))
    rep.residual_ma_scaled = scaled(sum(ma_terms), ma_terms)
    mo_terms = monge_terms(d["rho_11"], d["rho_111"], d["rho_1111"], d["rho_11111"])
    rep.residual_monge = abs(sum(mo_terms))
    rep.residual_monge_scaled = scaled(sum(mo_terms), mo_terms)
    rep.predicates["levi_rank1"] = rep.residual_ma_scaled < tol.rank
    rep.predicates["hessian_positive"] = d["rho_11"] > 0

    if abs(d["rho_11"]) <= tol.hessian:
        rep.error = "HessianDegenerate"
        raise HessianDegenerate(f"rho_11 = {d['rho_11']:.3g} vanishes", rep)

    try:
        ratio = r12 / r11
        A = r111 / r11
    except DivisionBySingularJet as exc:
        rep.error = "HessianDegenerate"
        raise HessianDegenerate(str(exc), rep) from exc
    S = ratio.deriv(0)
    S1, S2 = S.deriv(0), S.deriv(1)
    S11, S12 = S1.deriv(0), S1.deriv(1)
    S111 = S11.deriv(0).value if S11.order >= 1 else None
    rep.flags["s111_term_disabled"] = S111 is None
    chain = SChain(S.value, S1.value, S2.value, S11.value, S12.value, S111)
    rep.s_chain = chain

    two_nd = abs(chain.S) > tol.degeneracy
    rep.predicates["two_nondegenerate"] = two_nd
    if not two_nd:
        rep.error = "TwoDegenerate"
        raise TwoDegenerate(f"|S| = {abs(chain.S):.3g} <= {tol.degeneracy:g}", rep)

    A1 = A.deriv(0)
    W, w_terms = w_invariant_tube(chain.S, chain.S1, chain.S2, chain.S11, chain.S12, ratio.value)
    rep.W = W
    rep.W_scaled = scaled(W, w_terms)
    try:
        J, j_terms, reduced = j_invariant(chain.S, chain.S1, chain.S11, chain.S111,
                                          A.value, A1.value, A1.deriv(0).value, tol.sing)
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
