"""Truncated multivariate Taylor series ("jets").

A :class:`Jet` holds the Taylor coefficients of a scalar function at a seed
point, up to a fixed total order, densely in graded order.  Coefficient
``c[alpha]`` multiplies ``prod(x_i ** alpha_i)``, so the mixed partial is
``c[alpha] * alpha!``.

The product, quotient and univariate-composition kernels come from the
compiled extension ``crflat._jetcore`` when it is importable and from
``crflat._kernels_py`` otherwise.  ``CRFLAT_BACKEND=python`` forces the
fallback.
"""

import cmath
import functools
import itertools
import math
import os

import numpy as np

from . import _kernels_py
from .errors import (BranchCutViolation, DivisionBySingularJet,
                     OrderExceeded, PairingViolated)

try:
    from . import _jetcore
except ImportError:  # extension not built
    _jetcore = None

MAX_ORDER = 8
MAX_ORDER_UNIVARIATE = 16  # profile series feed order+2 terms into 2-variable jets
SUPPORTED_NVARS = (1, 2, 4)
DIVISION_THRESHOLD = 1e-13
BRANCH_CUT_TOL = 1e-12

_BACKENDS = {"python": _kernels_py}
if _jetcore is not None:
    _BACKENDS["cython"] = _jetcore

_kernels = None


def available_backends():
    return sorted(_BACKENDS)


def set_backend(name):
    """Select the kernel implementation (``"cython"`` or ``"python"``)."""
    global _kernels
    try:
        _kernels = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; "
                         f"have {available_backends()}") from None


def get_backend():
    return "cython" if _kernels is _jetcore else "python"


set_backend(os.environ.get("CRFLAT_BACKEND",
                           "cython" if _jetcore is not None else "python"))


def _graded_key(alpha):
    return (sum(alpha), tuple(-x for x in alpha))


class JetSpace:
    """Index bookkeeping shared by all jets with the same (nvars, order)."""

    def __init__(self, nvars, order):
        self.nvars = nvars
        self.order = order
        idx = [a for a in itertools.product(range(order + 1), repeat=nvars)
               if sum(a) <= order]
        idx.sort(key=_graded_key)
        self.indices = tuple(idx)
        self.position = {a: k for k, a in enumerate(idx)}
        self.size = len(idx)
        self.degrees = np.array([sum(a) for a in idx], dtype=np.intp)
        self.factorials = np.array(
            [math.prod(math.factorial(x) for x in a) for a in idx], dtype=float)

        # degree d occupies [deg_start[d], deg_start[d+1])
        self.deg_start = np.searchsorted(self.degrees, np.arange(order + 2))

        pi, pj, pk = [], [], []
        for i, a in enumerate(idx):
            room = order - sum(a)
            for j in range(self.deg_start[room + 1]):
                b = idx[j]
                pi.append(i)
                pj.append(j)
                pk.append(self.position[tuple(x + y for x, y in zip(a, b))])
        perm = np.lexsort((np.array(pi), np.array(pk)))
        self.pair_i = np.ascontiguousarray(np.array(pi, dtype=np.intp)[perm])
        self.pair_j = np.ascontiguousarray(np.array(pj, dtype=np.intp)[perm])
        self.pair_k = np.ascontiguousarray(np.array(pk, dtype=np.intp)[perm])
        self.pair_kstart = np.searchsorted(
            self.pair_k, np.arange(self.size + 1)).astype(np.intp)

        groups = []
        for d in range(1, order + 1):
            lo, hi = int(self.deg_start[d]), int(self.deg_start[d + 1])
            sel = (self.pair_k >= lo) & (self.pair_k < hi) & (self.pair_i != self.pair_k)
            groups.append((lo, hi, self.pair_i[sel], self.pair_j[sel],
                           self.pair_k[sel] - lo))
        self.division_groups = groups

        if nvars == 4:
            self.conj_perm = np.array(
                [self.position[(a[1], a[0], a[3], a[2])] for a in idx], dtype=np.intp)
        else:
            self.conj_perm = None

    @functools.cached_property
    def derivative_maps(self):
        """Per variable: (source positions in this space, multipliers)."""
        lower = jet_space(self.nvars, self.order - 1)
        maps = []
        for v in range(self.nvars):
            src, fac = [], []
            for b in lower.indices:
                a = list(b)
                a[v] += 1
                src.append(self.position[tuple(a)])
                fac.append(b[v] + 1)
            maps.append((np.array(src, dtype=np.intp), np.array(fac, dtype=float)))
        return maps


@functools.lru_cache(maxsize=None)
def jet_space(nvars, order):
    if nvars not in SUPPORTED_NVARS:
        raise ValueError(f"nvars must be one of {SUPPORTED_NVARS}, got {nvars}")
    limit = MAX_ORDER_UNIVARIATE if nvars == 1 else MAX_ORDER
    if not 0 <= order <= limit:
        raise ValueError(f"order must be in [0, {limit}], got {order}")
    return JetSpace(nvars, order)


def _is_complex_scalar(x):
    return isinstance(x, complex) or np.iscomplexobj(x)


class Jet:
    """Immutable truncated Taylor expansion at ``point``."""

    __slots__ = ("_c", "space", "point")
    __array_priority__ = 1000  # keep numpy scalars from broadcasting over us

    def __init__(self, coeffs, space, point):
        c = np.array(coeffs, dtype=np.complex128 if np.iscomplexobj(coeffs) else float)
        if c.shape != (space.size,):
            raise ValueError(f"expected {space.size} coefficients, got {c.shape}")
        c.flags.writeable = False
        self._c = c
        self.space = space
        self.point = tuple(point)

    @classmethod
    def _raw(cls, c, space, point):
        obj = cls.__new__(cls)
        c.flags.writeable = False
        obj._c = c
        obj.space = space
        obj.point = point
        return obj

    # -- introspection --------------------------------------------------------

    @property
    def order(self):
        return self.space.order

    @property
    def nvars(self):
        return self.space.nvars

    @property
    def kind(self):
        return "complex" if self._c.dtype == np.complex128 else "real"

    @property
    def coeffs(self):
        return self._c

    @property
    def value(self):
        v = self._c[0]
        return complex(v) if self.kind == "complex" else float(v)

    def coefficient(self, alpha):
        alpha = tuple(alpha)
        if len(alpha) != self.nvars:
            raise ValueError(f"multi-index {alpha} has wrong length for {self.nvars} variables")
        if sum(alpha) > self.order:
            raise OrderExceeded(f"|{alpha}| = {sum(alpha)} exceeds jet order {self.order}")
        v = self._c[self.space.position[alpha]]
        return complex(v) if self.kind == "complex" else float(v)

    def partial(self, alpha):
        """Mixed partial derivative at the seed point."""
        c = self.coefficient(alpha)
        return c * math.prod(math.factorial(a) for a in alpha)

    def as_dict(self):
        return {a: self.coefficient(a) for a in self.space.indices}

    def __repr__(self):
        return (f"Jet(order={self.order}, nvars={self.nvars}, kind={self.kind}, "
                f"value={self.value!r}, point={self.point!r})")

    # -- structural operations ------------------------------------------------

    def truncate(self, order):
        if order > self.order:
            raise OrderExceeded(f"cannot raise jet order {self.order} to {order}")
        if order == self.order:
            return self
        sp = jet_space(self.nvars, order)
        return Jet._raw(self._c[:sp.size].copy(), sp, self.point)

    def deriv(self, var):
        """Jet of the partial derivative in variable ``var`` (order drops by 1)."""
        if self.order == 0:
            raise OrderExceeded("cannot differentiate an order-0 jet")
        src, fac = self.space.derivative_maps[var]
        sp = jet_space(self.nvars, self.order - 1)
        return Jet._raw(self._c[src] * fac, sp, self.point)

    def real_part(self):
        return Jet._raw(self._c.real.copy(), self.space, self.point)

    def to_complex(self):
        if self.kind == "complex":
            return self
        return Jet._raw(self._c.astype(np.complex128), self.space, self.point)

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other):
        """Bring two jets to a common order/kind; returns (a, b) arrays and space."""
        if self.nvars != other.nvars:
            raise ValueError(f"nvars mismatch: {self.nvars} vs {other.nvars}")
        if self.point != other.point:
            raise ValueError("jets were seeded at different points")
        a, b = self, other
        if a.order != b.order:
            n = min(a.order, b.order)
            a, b = a.truncate(n), b.truncate(n)
        ca, cb = a._c, b._c
        if ca.dtype != cb.dtype:
            ca, cb = ca.astype(np.complex128), cb.astype(np.complex128)
        return ca, cb, a.space

    def _scalar_result_dtype(self, s):
        if _is_complex_scalar(s) and self.kind == "real":
            return self._c.astype(np.complex128)
        return self._c

    def __add__(self, other):
        if isinstance(other, Jet):
            a, b, sp = self._coerce(other)
            return Jet._raw(a + b, sp, self.point)
        c = self._scalar_result_dtype(other).copy()
        c[0] += other
        return Jet._raw(c, self.space, self.point)

    __radd__ = __add__

    def __neg__(self):
        return Jet._raw(-self._c, self.space, self.point)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, Jet):
            a, b, sp = self._coerce(other)
            return Jet._raw(a - b, sp, self.point)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b, sp = self._coerce(other)
            return Jet._raw(_kernels.mul(sp, a, b), sp, self.point)
        return Jet._raw(self._scalar_result_dtype(other) * other, self.space, self.point)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            a, b, sp = self._coerce(other)
            if abs(b[0]) <= DIVISION_THRESHOLD:
                raise DivisionBySingularJet(
                    f"divisor constant term {b[0]} is within {DIVISION_THRESHOLD:g} of 0")
            return Jet._raw(_kernels.div(sp, a, b), sp, self.point)
        if abs(other) <= DIVISION_THRESHOLD:
            raise DivisionBySingularJet(f"division by scalar {other!r}")
        return Jet._raw(self._scalar_result_dtype(other) / other, self.space, self.point)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, exponent):
        if isinstance(exponent, (int, np.integer)) or (
                isinstance(exponent, float) and exponent.is_integer()):
            return self.pow_int(int(exponent))
        return self.pow_real(exponent)

    def reciprocal(self):
        one = np.zeros_like(self._c)
        one[0] = 1.0
        return Jet._raw(one, self.space, self.point) / self

    # -- elementary functions -------------------------------------------------

    def compose(self, coefs):
        """sum_k coefs[k] * (self - self(0))**k, for univariate Taylor ``coefs``."""
        coefs = np.array(coefs)
        dtype = np.complex128 if (np.iscomplexobj(coefs) or self.kind == "complex") else float
        h = self._c.astype(dtype)  # always a fresh array
        h[0] = 0
        coefs = np.ascontiguousarray(coefs, dtype=dtype)
        return Jet._raw(_kernels.compose(self.space, coefs, h), self.space, self.point)

    def _lib(self):
        return cmath if self.kind == "complex" else math

    def _check_branch(self, fname):
        a0 = self._c[0]
        if self.kind == "real":
            if not a0 > 0:
                raise BranchCutViolation(f"{fname} needs a positive argument, got {float(a0)!r}")
        else:
            z = complex(a0)
            if abs(z.imag) <= BRANCH_CUT_TOL and z.real <= BRANCH_CUT_TOL:
                raise BranchCutViolation(
                    f"{fname} argument {z!r} lies on the principal branch cut")

    def exp(self):
        e = self._lib().exp(self._c[0])
        return self.compose([e / math.factorial(k) for k in range(self.order + 1)])

    def log(self):
        self._check_branch("log")
        a0 = self._c[0]
        coefs = [self._lib().log(a0)]
        for k in range(1, self.order + 1):
            coefs.append((-1) ** (k + 1) / (k * a0 ** k))
        return self.compose(coefs)

    def sin(self):
        lib = self._lib()
        s, c = lib.sin(self._c[0]), lib.cos(self._c[0])
        cycle = (s, c, -s, -c)
        return self.compose([cycle[k % 4] / math.factorial(k) for k in range(self.order + 1)])

    def cos(self):
        lib = self._lib()
        s, c = lib.sin(self._c[0]), lib.cos(self._c[0])
        cycle = (c, -s, -c, s)
        return self.compose([cycle[k % 4] / math.factorial(k) for k in range(self.order + 1)])

    def tan(self):
        return self.sin() / self.cos()

    def pow_real(self, alpha):
        """Principal-branch power with real exponent."""
        self._check_branch("pow_real")
        a0 = self._c[0]
        a0 = complex(a0) if self.kind == "complex" else float(a0)
        c = a0 ** alpha
        coefs = [c]
        for k in range(1, self.order + 1):
            c = c * (alpha - k + 1) / (k * a0)
            coefs.append(c)
        return self.compose(coefs)

    def sqrt(self):
        self._check_branch("sqrt")
        return self.pow_real(0.5)

    def pow_int(self, n):
        if n < 0:
            return self.pow_int(-n).reciprocal()
        one = np.zeros_like(self._c)
        one[0] = 1.0
        result = Jet._raw(one, self.space, self.point)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result


# -- functional interface -----------------------------------------------------

def seed(point, var_index, order, nvars, kind="real"):
    """Jet of the coordinate function ``x[var_index]`` at ``point``."""
    sp = jet_space(nvars, order)
    if not 0 <= var_index < nvars:
        raise ValueError(f"var_index {var_index} out of range for {nvars} variables")
    if len(point) != nvars:
        raise ValueError(f"point has {len(point)} entries, expected {nvars}")
    if kind not in ("real", "complex"):
        raise ValueError(f"kind must be 'real' or 'complex', got {kind!r}")
    dtype = np.complex128 if kind == "complex" else float
    if kind == "real" and any(_is_complex_scalar(x) and complex(x).imag != 0 for x in point):
        raise ValueError("real jets need a real seed point")
    point = tuple(complex(x) if kind == "complex" else float(np.real(x)) for x in point)
    c = np.zeros(sp.size, dtype=dtype)
    c[0] = point[var_index]
    if order >= 1:
        e = [0] * nvars
        e[var_index] = 1
        c[sp.position[tuple(e)]] = 1.0
    return Jet._raw(c, sp, point)


def seed_all(point, order, kind="real"):
    return tuple(seed(point, i, order, len(point), kind) for i in range(len(point)))


def constant(value, order, nvars, point, kind=None):
    sp = jet_space(nvars, order)
    if kind is None:
        kind = "complex" if _is_complex_scalar(value) else "real"
    c = np.zeros(sp.size, dtype=np.complex128 if kind == "complex" else float)
    c[0] = value
    return Jet._raw(c, sp, tuple(point))


def arith(a, b, op):
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown arithmetic op {op!r}")


_ELEMENTARY = {
    "exp": Jet.exp, "log": Jet.log, "sin": Jet.sin, "cos": Jet.cos,
    "tan": Jet.tan, "sqrt": Jet.sqrt,
}


def elem(a, f, arg=None):
    """Apply an elementary function: exp, log, sin, cos, tan, sqrt, pow_real, pow_int."""
    if f == "pow_real":
        return a.pow_real(arg)
    if f == "pow_int":
        return a.pow_int(arg)
    try:
        return _ELEMENTARY[f](a)
    except KeyError:
        raise ValueError(f"unknown elementary function {f!r}") from None


def conj_jet(a, tol=1e-12):
    """Jet of conj(f) for a function of (z1, z1b, z2, z2b) at a paired point."""
    if a.nvars != 4:
        raise PairingViolated("conj_jet needs the 4-variable (z1, z1b, z2, z2b) layout")
    p = [complex(x) for x in a.point]
    if abs(p[1] - p[0].conjugate()) > tol or abs(p[3] - p[2].conjugate()) > tol:
        raise PairingViolated(f"seed point {a.point!r} is not conjugate-paired")
    c = np.conj(a.coeffs.astype(np.complex128))[a.space.conj_perm]
    return Jet._raw(c, a.space, a.point)


def partial(a, alpha):
    return a.partial(alpha)
