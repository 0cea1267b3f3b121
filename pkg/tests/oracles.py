"""Independent reference computations shared by several test modules."""

import itertools
import math

import mpmath
import numpy as np

from crflat import expr as E
from crflat.errors import ProfileViolation
from crflat.mapar import PQProfile, pq_validate

MULTI_INDICES_3 = [a for a in itertools.product(range(4), repeat=2) if sum(a) <= 3]

_UNARY = ("exp", "sin", "cos", "log1", "sqrt1", "tan_small", "neg")
_BINARY = ("+", "-", "*", "/", "^2", "^3", "^-1.5")


def random_expression(rng, depth=3):
    """Random tube-domain expression text that stays well-defined near 0.

    log and sqrt are only applied to 2 + u^2 and non-integer powers to
    1.5 + u^2, so the draws avoid branch cuts; quotients divide by
    2 + u^2 as well. exp gets a bounded argument.
    """
    if depth == 0 or rng.random() < 0.2:
        pick = rng.integers(3)
        if pick == 0:
            return "t1"
        if pick == 1:
            return "t2"
        return repr(round(float(rng.uniform(-2, 2)), 3))
    if rng.random() < 0.45:
        op = _UNARY[rng.integers(len(_UNARY))]
        u = random_expression(rng, depth - 1)
        if op == "log1":
            return f"log(2+({u})^2)"
        if op == "sqrt1":
            return f"sqrt(2+({u})^2)"
        if op == "tan_small":
            return f"tan(({u})/(4+({u})^2))"
        if op == "neg":
            return f"-({u})"
        if op == "exp":
            # keep the argument in [-1, 1] so nested powers cannot overflow
            return f"exp(2*({u})/(1+({u})^2))"
        return f"{op}(({u})/2)"
    op = _BINARY[rng.integers(len(_BINARY))]
    a = random_expression(rng, depth - 1)
    b = random_expression(rng, depth - 1)
    if op == "/":
        return f"({a})/(2+({b})^2)"
    if op.startswith("^"):
        return f"(1.5+({a})^2)^{op[1:]}"
    return f"({a}){op}({b})"


def mp_partials(text, point, indices=MULTI_INDICES_3, dps=40):
    """High-precision numerical partials of a tube expression (mpmath.diff)."""
    node = E.parse(text, "tube")
    with mpmath.workdps(dps):
        def f(t1, t2):
            return mpmath.mpmathify(E.eval_scalar(node, {"t1": t1, "t2": t2}, lib=mpmath))

        x = tuple(mpmath.mpf(p) for p in point)
        return {a: float(mpmath.diff(f, x, a)) for a in indices}


def rel_err(a, b):
    return abs(a - b) / max(1.0, abs(b))


def random_polynomial(rng, degree=5, nterms=6):
    """(text, coefficient dict {(i, j): c}) for a random polynomial in t1, t2."""
    coeffs = {}
    for _ in range(nterms):
        i = int(rng.integers(degree + 1))
        j = int(rng.integers(degree + 1 - i))
        coeffs[(i, j)] = coeffs.get((i, j), 0.0) + round(float(rng.uniform(-3, 3)), 4)
    text = "+".join(f"({c!r})*t1^{i}*t2^{j}" for (i, j), c in coeffs.items())
    return text, coeffs


def polynomial_partial(coeffs, alpha, point):
    """Exact partial derivative of a polynomial given by its coefficients."""
    t1, t2 = point
    total = 0.0
    for (i, j), c in coeffs.items():
        if i < alpha[0] or j < alpha[1]:
            continue
        fi = math.factorial(i) // math.factorial(i - alpha[0])
        fj = math.factorial(j) // math.factorial(j - alpha[1])
        total += c * fi * fj * t1 ** (i - alpha[0]) * t2 ** (j - alpha[1])
    return total


def random_profile(rng, degree=5):
    """Random admissible polynomial (p, q) profile.

    p = v^2/2 + s sum a_k v^k (k = 3..degree) and q = v + s sum b_k v^k
    (k = 2..degree), with a_k, b_k drawn from [-0.5, 0.5]; the scale s
    starts at 1 and is halved until the profile passes pq_validate.
    """
    a = rng.uniform(-0.5, 0.5, degree + 1)
    b = rng.uniform(-0.5, 0.5, degree + 1)
    s = 1.0
    while True:
        p = "v^2/2" + "".join(f"+({float(s * a[k])!r})*v^{k}" for k in range(3, degree + 1))
        q = "v" + "".join(f"+({float(s * b[k])!r})*v^{k}" for k in range(2, degree + 1))
        prof = PQProfile(p, q)
        try:
            pq_validate(prof)
            return prof
        except ProfileViolation:
            s /= 2


def grid(n=3, halfwidth=0.05):
    xs = np.linspace(-halfwidth, halfwidth, n)
    return [(float(x), float(y)) for x in xs for y in xs]
