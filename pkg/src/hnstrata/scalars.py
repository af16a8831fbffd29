"""Exact scalar arithmetic: Laurent polynomials in v and the field Q(sqrt q).

A Laurent polynomial is stored as a map exponent -> Fraction with no zero
coefficients; the zero polynomial has empty support.  The variable is
printed as ``v``; everything downstream evaluates it at v = 1/sqrt(q) for
a concrete prime power q, which lands in the quadratic extension Q(sqrt q)
represented exactly by SqrtExt(a, b, q) = a + b*sqrt(q).  When q is a
perfect square the sqrt(q) part folds into the rational part, so b == 0.

No floating point is used anywhere.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


class Laurent:
    """Laurent polynomial in one variable with exact rational coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        c = {}
        if coeffs:
            for e, v in coeffs.items():
                v = _frac(v)
                if v:
                    c[int(e)] = v
        self.coeffs = c

    @classmethod
    def zero(cls) -> "Laurent":
        return cls()

    @classmethod
    def one(cls) -> "Laurent":
        return cls({0: 1})

    @classmethod
    def monomial(cls, coeff, exp: int) -> "Laurent":
        return cls({exp: coeff})

    @classmethod
    def v_power(cls, exp: int) -> "Laurent":
        return cls({exp: 1})

    def is_zero(self) -> bool:
        return not self.coeffs

    def support(self):
        return sorted(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, Laurent):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            other = _frac(other)
            if other == 0:
                return not self.coeffs
            return self.coeffs == {0: other}
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __add__(self, other):
        if not isinstance(other, Laurent):
            return NotImplemented
        c = dict(self.coeffs)
        for e, v in other.coeffs.items():
            s = c.get(e, 0) + v
            if s:
                c[e] = s
            else:
                c.pop(e, None)
        out = Laurent.__new__(Laurent)
        out.coeffs = c
        return out

    def __neg__(self):
        out = Laurent.__new__(Laurent)
        out.coeffs = {e: -v for e, v in self.coeffs.items()}
        return out

    def __sub__(self, other):
        if not isinstance(other, Laurent):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = _frac(other)
            out = Laurent.__new__(Laurent)
            out.coeffs = {e: v * other for e, v in self.coeffs.items()} if other else {}
            return out
        if not isinstance(other, Laurent):
            return NotImplemented
        c = {}
        for e1, v1 in self.coeffs.items():
            for e2, v2 in other.coeffs.items():
                e = e1 + e2
                s = c.get(e, 0) + v1 * v2
                if s:
                    c[e] = s
                else:
                    c.pop(e, None)
        out = Laurent.__new__(Laurent)
        out.coeffs = c
        return out

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers of a general Laurent polynomial")
        out = Laurent.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for e in self.support():
            v = self.coeffs[e]
            if e == 0:
                parts.append(str(v))
            elif e == 1:
                parts.append(f"{v}*v" if v != 1 else "v")
            else:
                parts.append(f"{v}*v^{e}" if v != 1 else f"v^{e}")
        return " + ".join(parts).replace("+ -", "- ")


class SqrtExt:
    """Element a + b*sqrt(q) of Q(sqrt q), exact.

    q is a fixed integer >= 2; if q is a perfect square the sqrt part is
    normalized away (b == 0).  Field operations require matching q.
    """

    __slots__ = ("a", "b", "q")

    def __init__(self, a, b, q: int):
        if q < 2:
            raise ValueError("q must be >= 2")
        a = _frac(a)
        b = _frac(b)
        r = isqrt(q)
        if r * r == q and b:
            a += b * r
            b = Fraction(0)
        self.a = a
        self.b = b
        self.q = q

    @classmethod
    def from_rational(cls, x, q: int) -> "SqrtExt":
        return cls(x, 0, q)

    @classmethod
    def sqrt_q(cls, q: int) -> "SqrtExt":
        return cls(0, 1, q)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_rational(self) -> bool:
        return self.b == 0

    def as_fraction(self) -> Fraction:
        if self.b != 0:
            raise ValueError(f"{self} is not rational")
        return self.a

    def _coerce(self, other):
        if isinstance(other, SqrtExt):
            if other.q != self.q:
                raise ValueError("mixed sqrt(q) fields")
            return other
        if isinstance(other, (int, Fraction)):
            return SqrtExt(other, 0, self.q)
        return None

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b, self.q))

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return SqrtExt(self.a + o.a, self.b + o.b, self.q)

    __radd__ = __add__

    def __neg__(self):
        return SqrtExt(-self.a, -self.b, self.q)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return SqrtExt(self.a - o.a, self.b - o.b, self.q)

    def __rsub__(self, other):
        return -(self - other)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return SqrtExt(self.a * o.a + self.b * o.b * self.q,
                       self.a * o.b + self.b * o.a, self.q)

    __rmul__ = __mul__

    def inverse(self) -> "SqrtExt":
        # (a + b sqrt q)(a - b sqrt q) = a^2 - b^2 q, nonzero unless a = b = 0
        n = self.a * self.a - self.b * self.b * self.q
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt q)")
        return SqrtExt(self.a / n, -self.b / n, self.q)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        return o * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = SqrtExt(1, 0, self.q)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def sign(self) -> int:
        """Exact sign of a + b*sqrt(q)."""
        a, b = self.a, self.b
        if b == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return (b > 0) - (b < 0)
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        # a, b of opposite signs: compare a^2 against b^2 q
        d = a * a - b * b * self.q
        if a > 0:
            return 1 if d > 0 else (-1 if d < 0 else 0)
        return -1 if d > 0 else (1 if d < 0 else 0)

    def __lt__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() < 0

    def __le__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() <= 0

    def __gt__(self, other):
        return not self <= other

    def __ge__(self, other):
        return not self < other

    def __abs__(self):
        return self if self.sign() >= 0 else -self

    def __repr__(self):
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}*sqrt({self.q})"
        if self.b.numerator > 0:
            return f"{self.a}+{self.b}*sqrt({self.q})"
        return f"{self.a}-{-self.b}*sqrt({self.q})"


def q_power(q: int, exp) -> SqrtExt:
    """q ** exp for an integer or half-integer exponent, exact in Q(sqrt q)."""
    e = Fraction(exp)
    if e.denominator == 1:
        return SqrtExt(Fraction(q) ** e.numerator, 0, q)
    if e.denominator == 2:
        # q^(m/2) = q^((m-1)/2) * sqrt(q) with m odd
        m = e.numerator
        return SqrtExt(0, Fraction(q) ** ((m - 1) // 2), q)
    raise ValueError(f"exponent {e} is not a half-integer")


def eval_sqrt_q(x: Laurent, q: int) -> SqrtExt:
    """Evaluate a Laurent polynomial at v = 1/sqrt(q).

    Even exponents land in the rational subfield; odd exponents bring in
    a single sqrt(q).  Ring homomorphism: eval(x*y) = eval(x)*eval(y).
    """
    if q < 2:
        raise ValueError("q must be >= 2")
    out = SqrtExt(0, 0, q)
    for e, c in x.coeffs.items():
        out = out + q_power(q, Fraction(-e, 2)) * c
    return out


def gl_order(n: int, q: int) -> int:
    """Order of GL_n(F_q): prod_{i<n} (q^n - q^i); gl_order(0, q) = 1."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if q < 2:
        raise ValueError("q must be >= 2")
    qn = q ** n
    out = 1
    for i in range(n):
        out *= qn - q ** i
    return out


def geom_sum(x: SqrtExt, k0: int) -> SqrtExt:
    """Exact value of sum_{k >= k0} x^k = x^k0 / (1 - x); requires |x| < 1."""
    if abs(x).sign() >= 0 and not (abs(x) < 1):
        raise ValueError(f"geometric series needs |x| < 1, got {x}")
    return (x ** k0) / (SqrtExt(1, 0, x.q) - x)
