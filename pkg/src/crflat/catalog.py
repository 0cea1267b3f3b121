"""Built-in hypersurfaces: the classified flat rigid families, the Fels-Kaup
example, the light-cone tube, and non-flat controls.
"""

import itertools
import math
from dataclasses import dataclass, field

from . import expr as _expr
from .errors import (CRFlatError, HessianDegenerate, InvariantError, JetError,
                     ParamOutOfRange, UnknownFamily)
from .mapar import PQProfile, rho_jet_from_pq
from .rigid import RigidReport, rigid_invariants
from .tube import (DEFAULT_ORDER, DEFAULT_TOLERANCES, InvariantReport,
                   check_normalization, tube_invariants)

GUARD_MARGIN = 1e-6
DEFAULT_HALFWIDTH = 0.05
DEFAULT_GRID_N = 3


@dataclass(frozen=True)
class Param:
    name: str
    lo: float = -math.inf
    hi: float = math.inf
    default: float = None
    lo_text: str = None
    hi_text: str = None

    def check(self, value):
        if not (self.lo < value < self.hi):
            raise ParamOutOfRange(f"{self.name} = {value!r} outside {self.describe()}")

    def describe(self):
        lo = self.lo_text or ("-inf" if self.lo == -math.inf else repr(self.lo))
        hi = self.hi_text or ("inf" if self.hi == math.inf else repr(self.hi))
        return f"({lo}, {hi})"


@dataclass(frozen=True)
class HypersurfaceSpec:
    """A graphing function with its parameters, guards and expected label.

    ``form`` is "tube" (``expr`` is rho(t1, t2)) or "rigid" (``expr`` is F).
    Tubes may instead be given by a (p, q) ``profile``, in which case
    ``expr`` is None.  ``guards`` are (name, AST) pairs whose absolute value
    must stay above the guard margin.
    """

    name: str
    form: str
    expr: object
    params: dict = field(default_factory=dict)
    guards: tuple = ()
    expected: str = "unknown"
    profile: PQProfile = None
    description: str = ""

    def guard_violation(self, point, margin=GUARD_MARGIN):
        """Name of the first guard that fails at ``point``, or None."""
        dom = _expr.EvalDomain(self.form, tuple(point))
        values = dict(zip(_expr.DOMAIN_VARIABLES[self.form], dom.seed_values()))
        for name, node in self.guards:
            try:
                val = _expr.eval_scalar(node, values)
            except (JetError, ArithmeticError, ValueError):
                return name
            if not abs(val) > margin:
                return name
        return None


@dataclass(frozen=True)
class _Family:
    form: str
    params: tuple
    expected: str
    description: str
    build: object       # params dict -> (expr text or None, guard texts, profile)


def _fmt(x):
    return repr(float(x))


def _thm54_i_tube(p):
    D = _fmt(p["D"])
    return f"2*t1^2/(t2+{D})", [f"t2+{D}"], None


def _thm54_i_rigid(p):
    D = _fmt(p["D"])
    return f"(z1+z1b)^2/(z2+z2b+{D})", [f"z2+z2b+{D}"], None


def _thm54_ii(p):
    D = _fmt(p["D"])
    sD = _fmt(math.sqrt(p["D"]))
    den = f"1-{D}*((z2+1)*(z2b+1))^2"
    return f"(z1^2+2*{sD}*z1*z1b*(z2+1)*(z2b+1)+z1b^2)/({den})", [den], None


def _thm54_iii(p):
    c, s = _fmt(math.cos(p["D"])), _fmt(math.sin(p["D"]))
    eD, emD = f"({c}+{s}*i)", f"({c}-{s}*i)"
    a, b = f"{eD}*(z2+1)^2", f"{emD}*(z2b+1)^2"
    den = f"{a}+{b}"
    return f"(i*({a}-{b})*(z1^2+z1b^2)-4*z1*z1b*(z2+1)*(z2b+1))/({den})", [den], None


def _thm54_ii_exp(p):
    D = _fmt(p["D"])
    sD = _fmt(math.sqrt(p["D"]))
    den = f"1-{D}*exp(2*(z2+z2b))"
    return f"(z1^2+2*{sD}*exp(z2+z2b)*z1*z1b+z1b^2)/({den})", [den], None


def _thm54_iii_trig(p):
    D = _fmt(p["D"])
    den = f"cos(z2+z2b+{D})"
    return f"(sin(z2+z2b+{D})*(z1^2+z1b^2)+2*z1*z1b)/{den}", [den], None


def _fk(p):
    return ("z1*z1b/(1-z2*z2b)+z2b/(2*(1-z2*z2b))*z1^2+z2/(2*(1-z2*z2b))*z1b^2",
            ["1-z2*z2b"], None)


def _lightcone(p):
    return "sqrt(t1^2+(1+t2)^2)-1-t2", ["t1^2+(1+t2)^2"], None


def _pq_generic(p):
    return None, [], PQProfile("v^2/2+v^4", "v")


def _perturbed_i(p):
    D = _fmt(p["D"])
    return f"2*t1^2/(t2+{D})+0.1*t1^4", [f"t2+{D}"], None


_D_POS = Param("D", 0.0, math.inf, 1.0)
_D_UNIT = Param("D", 0.0, 1.0, 0.25)
_D_HALFPI = Param("D", 0.0, math.pi / 2, math.pi / 4, hi_text="pi/2")

_FAMILIES = {
    "thm54_i": _Family("tube", (_D_POS,), "flat",
                       "tube rho = 2 t1^2/(t2+D), D > 0", _thm54_i_tube),
    "thm54_i_rigid": _Family("rigid", (_D_POS,), "flat",
                             "Re z3 = (z1+z1b)^2/(z2+z2b+D), D > 0", _thm54_i_rigid),
    "thm54_ii": _Family("rigid", (_D_UNIT,), "flat",
                        "rational family with |z2+1|^4 denominator, 0 < D < 1", _thm54_ii),
    "thm54_iii": _Family("rigid", (_D_HALFPI,), "flat",
                         "rational family with e^{iD}(z2+1)^2 terms, 0 < D < pi/2", _thm54_iii),
    "thm54_ii_exp": _Family("rigid", (_D_UNIT,), "flat",
                            "exponential form of thm54_ii before e^z2 -> z2+1", _thm54_ii_exp),
    "thm54_iii_trig": _Family("rigid", (_D_HALFPI,), "flat",
                              "trigonometric form of thm54_iii before e^{i z2} -> z2+1",
                              _thm54_iii_trig),
    "fk": _Family("rigid", (), "flat", "Fels-Kaup example, special form with r = 1/(1-|z2|^2)", _fk),
    "lightcone_tube": _Family("tube", (), "flat",
                              "tube over the future light cone, graphed at (0, 1, 1)", _lightcone),
    "pq_generic": _Family("tube", (), "nonflat",
                          "Monge-Ampere tube from p = v^2/2 + v^4, q = v", _pq_generic),
    "perturbed_i": _Family("tube", (_D_POS,), "nonflat",
                           "thm54_i plus 0.1 t1^4 (breaks the Monge-Ampere equation)",
                           _perturbed_i),
}


def list_families():
    """[(name, form, expected, {param: "(lo, hi)"}, description)] in a fixed order."""
    return [(name, f.form, f.expected, {p.name: p.describe() for p in f.params}, f.description)
            for name, f in _FAMILIES.items()]


def _gauge_text(coeffs, var):
    """Polynomial sum_k coeffs[k] var^k with complex coefficients, as text."""
    terms = []
    for k, c in enumerate(coeffs):
        c = complex(c)
        if c == 0:
            continue
        terms.append(f"({_fmt(c.real)}+{_fmt(c.imag)}*i)*{var}^{k}")
    return "+".join(terms) if terms else None


def make_family(name, params=None, gauge=None, **kw):
    """Build a :class:`HypersurfaceSpec` from the catalog.

    ``params`` (or keyword arguments) supply the family's parameters;
    missing ones take their defaults.  ``gauge`` is an optional list of
    complex polynomial coefficients of u(z2); 2 Re(z1^2 u(z2)) is added
    to F (rigid families only).
    """
    if name not in _FAMILIES:
        raise UnknownFamily(f"unknown family {name!r}; have {', '.join(_FAMILIES)}")
    fam = _FAMILIES[name]
    given = dict(params or {}, **kw)
    known = {p.name for p in fam.params}
    extra = set(given) - known
    if extra:
        raise ParamOutOfRange(f"{name} takes parameters {sorted(known) or 'none'}, got {sorted(extra)}")
    values = {}
    for p in fam.params:
        v = float(given.get(p.name, p.default))
        p.check(v)
        values[p.name] = v
    text, guard_texts, profile = fam.build(values)

    if gauge is not None and any(complex(c) != 0 for c in gauge):
        if fam.form != "rigid":
            raise ValueError(f"a holomorphic gauge only applies to rigid families, not {name}")
        u = _gauge_text(gauge, "z2")
        ub = _expr.to_text(_expr.conjugate(_expr.parse(u, "rigid")))
        text = f"({text})+z1^2*({u})+z1b^2*({ub})"

    node = _expr.parse(text, fam.form) if text is not None else None
    guards = tuple((g, _expr.parse(g, fam.form)) for g in guard_texts)
    return HypersurfaceSpec(name, fam.form, node, values, guards, fam.expected, profile,
                            fam.description)


def expr_spec(text, form, expected="unknown"):
    """A :class:`HypersurfaceSpec` for a raw user expression."""
    node = _expr.parse(text, form)
    if form == "tube":
        try:
            check_normalization(node)
        except (JetError, ArithmeticError):
            pass  # rho is not defined at the origin; nothing to normalize
    guards = tuple((_expr.to_text(n.right), n.right) for n in _expr.walk(node)
                   if isinstance(n, _expr.BinOp) and n.op == "/")
    return HypersurfaceSpec("expr", form, node, {}, guards, expected)


# -- grids and evaluation ------------------------------------------------------

def grid_dims(form):
    return 2 if form == "tube" else 4


def default_grid(form, center=None, halfwidth=DEFAULT_HALFWIDTH, n=DEFAULT_GRID_N):
    """Grid points in index order.

    Tube points are (t1, t2).  Rigid points are (z1, z2) built from
    (Re z1, Im z1, Re z2, Im z2) on a product grid.
    """
    dims = grid_dims(form)
    center = [0.0] * dims if center is None else list(center)
    if len(center) == 1:
        center = center * dims
    if len(center) != dims:
        raise ValueError(f"{form} grid center needs {dims} coordinates, got {len(center)}")
    axes = []
    for c in center:
        if n == 1:
            axes.append([c])
        else:
            axes.append([c - halfwidth + 2 * halfwidth * k / (n - 1) for k in range(n)])
    pts = []
    for combo in itertools.product(*axes):
        if form == "tube":
            pts.append(tuple(float(x) for x in combo))
        else:
            pts.append((complex(combo[0], combo[1]), complex(combo[2], combo[3])))
    return pts


def _skipped(spec, point, guard):
    rep = (RigidReport if spec.form == "rigid" else InvariantReport)(point=tuple(point))
    rep.flags["guard_skipped"] = True
    rep.guard = guard
    return rep


def evaluate_point(spec, point, tol=DEFAULT_TOLERANCES, order=DEFAULT_ORDER,
                   margin=GUARD_MARGIN):
    """Invariant report at one point; guard failures give an out_of_domain report."""
    if spec.expr is not None:
        bad = spec.guard_violation(point, margin)
        if bad is not None:
            return _skipped(spec, point, bad)
    try:
        if spec.profile is not None:
            rho = rho_jet_from_pq(spec.profile, point[0], point[1], order)
            return tube_invariants(rho, point, tol, order)
        if spec.form == "tube":
            return tube_invariants(spec.expr, point, tol, order)
        return rigid_invariants(spec.expr, point, tol, order)
    except HessianDegenerate as exc:
        rep = exc.report
        rep.guard = "hessian"
        return rep
    except InvariantError as exc:
        return exc.report
    except (CRFlatError, ArithmeticError) as exc:
        return _skipped(spec, point, f"{type(exc).__name__}: {exc}")


def evaluate_grid(spec, points=None, tol=DEFAULT_TOLERANCES, order=DEFAULT_ORDER,
                  margin=GUARD_MARGIN):
    """Reports for every grid point, in grid order."""
    if points is None:
        points = default_grid(spec.form)
    return [evaluate_point(spec, p, tol, order, margin) for p in points]


def expectation_met(expected, labels):
    """Whether a list of point labels is consistent with the expected outcome.

    "flat" needs every in-domain point flat (and at least one such point);
    "nonflat" needs some in-domain point that is not flat; "unknown" always
    passes.
    """
    inside = [lab for lab in labels if lab != "out_of_domain"]
    if expected == "flat":
        return bool(inside) and all(lab == "flat" for lab in inside)
    if expected == "nonflat":
        return any(lab != "flat" for lab in inside)
    return True
