"""Classical GF(2^m) arithmetic and the binary elliptic curve group law.

Elements are stored as plain integers inside :class:`FieldElement`; bit ``i``
holds the coefficient of ``t**i``. Everything in this module is the ground
truth that the reversible circuits are checked against, so it favours
obviously-correct code over speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Literal, Optional

MAX_M = 32
MAX_ENUM_M = 16


class FieldError(ValueError):
    pass


class FieldMismatchError(FieldError):
    pass


def _deg(p: int) -> int:
    return p.bit_length() - 1


def _polymod(a: int, p: int) -> int:
    dp = _deg(p)
    while a and _deg(a) >= dp:
        a ^= p << (_deg(a) - dp)
    return a


def clmul(a: int, b: int) -> int:
    """Carry-less product of two bit-polynomials (no reduction)."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


@lru_cache(maxsize=None)
def is_irreducible(poly: int) -> bool:
    """Trial division by every polynomial of degree 1..deg/2."""
    d = _deg(poly)
    if d < 1:
        return False
    for q in range(2, 1 << (d // 2 + 1)):
        if _polymod(poly, q) == 0:
            return False
    return True


@lru_cache(maxsize=None)
def default_poly(m: int) -> int:
    """Smallest irreducible polynomial of degree ``m`` (0x13 for m=4, 0x11B for m=8)."""
    if not 2 <= m <= MAX_M:
        raise FieldError(f"m must be in [2, {MAX_M}], got {m}")
    for low in range(1, 1 << m, 2):
        if is_irreducible((1 << m) | low):
            return (1 << m) | low
    raise FieldError(f"no irreducible polynomial of degree {m}")  # pragma: no cover


@dataclass(frozen=True)
class FieldParams:
    m: int
    reduction_poly: int

    def __post_init__(self):
        if not 2 <= self.m <= MAX_M:
            raise FieldError(f"m must be in [2, {MAX_M}], got {self.m}")
        if _deg(self.reduction_poly) != self.m:
            raise FieldError(
                f"reduction polynomial {self.reduction_poly:#x} does not have degree {self.m}"
            )
        if not is_irreducible(self.reduction_poly):
            raise FieldError(f"reduction polynomial {self.reduction_poly:#x} is reducible")

    @classmethod
    def default(cls, m: int) -> "FieldParams":
        return cls(m, default_poly(m))

    @property
    def order(self) -> int:
        return 1 << self.m

    @property
    def mask(self) -> int:
        return (1 << self.m) - 1

    def __call__(self, bits: int) -> "FieldElement":
        return FieldElement(self, bits)

    def elements(self) -> Iterator["FieldElement"]:
        for v in range(self.order):
            yield FieldElement(self, v)

    def reduce(self, a: int) -> int:
        return _polymod(a, self.reduction_poly)


@dataclass(frozen=True)
class FieldElement:
    field: FieldParams
    bits: int

    def __post_init__(self):
        if not 0 <= self.bits <= self.field.mask:
            raise FieldError(f"{self.bits:#x} is not an element of GF(2^{self.field.m})")

    def __int__(self) -> int:
        return self.bits

    def __bool__(self) -> bool:
        return self.bits != 0

    def __repr__(self) -> str:
        return f"FieldElement({self.bits:#x}, m={self.field.m})"

    def __add__(self, other: "FieldElement") -> "FieldElement":
        return fe_add(self, other)

    __sub__ = __add__

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        return fe_mul(self, other)

    def __truediv__(self, other: "FieldElement") -> "FieldElement":
        return fe_div(self, other)

    def __pow__(self, e: int) -> "FieldElement":
        return fe_pow(self, e)


def _check(a: FieldElement, b: FieldElement) -> None:
    if a.field != b.field:
        raise FieldMismatchError(f"field mismatch: {a.field} vs {b.field}")


def fe_add(a: FieldElement, b: FieldElement) -> FieldElement:
    _check(a, b)
    return FieldElement(a.field, a.bits ^ b.bits)


def fe_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    _check(a, b)
    return FieldElement(a.field, a.field.reduce(clmul(a.bits, b.bits)))


def fe_sqr(a: FieldElement) -> FieldElement:
    return fe_mul(a, a)


def fe_pow(a: FieldElement, e: int) -> FieldElement:
    if e < 0:
        return fe_pow(fe_inv(a), -e)
    result = FieldElement(a.field, 1)
    base = a
    while e:
        if e & 1:
            result = fe_mul(result, base)
        base = fe_sqr(base)
        e >>= 1
    return result


def _inv_euclid(a: int, p: int) -> int:
    # invariant: s*a == r (mod p) for both rows
    r0, r1, s0, s1 = p, a, 0, 1
    while r1 != 1:
        shift = _deg(r0) - _deg(r1)
        if shift < 0:
            r0, r1, s0, s1 = r1, r0, s1, s0
            continue
        r0 ^= r1 << shift
        s0 ^= s1 << shift
        if _deg(r0) < _deg(r1):
            r0, r1, s0, s1 = r1, r0, s1, s0
    return _polymod(s1, p)


def fe_inv(a: FieldElement, backend: Literal["euclid", "flt"] = "euclid") -> FieldElement:
    """Multiplicative inverse; ``flt`` computes ``a**(2**m - 2)``."""
    if not a.bits:
        raise ZeroDivisionError("inverse of zero in GF(2^m)")
    if backend == "euclid":
        return FieldElement(a.field, _inv_euclid(a.bits, a.field.reduction_poly))
    if backend == "flt":
        return fe_pow(a, a.field.order - 2)
    raise ValueError(f"unknown inversion backend {backend!r}")


def fe_div(y: FieldElement, x: FieldElement) -> FieldElement:
    _check(y, x)
    if not x.bits:
        raise ZeroDivisionError("division by zero in GF(2^m)")
    return fe_mul(y, fe_inv(x))


def fe_sqrt(a: FieldElement) -> FieldElement:
    # Frobenius has order m, so sqrt(a) = a^(2^(m-1))
    r = a
    for _ in range(a.field.m - 1):
        r = fe_sqr(r)
    return r


def trace(a: FieldElement) -> int:
    t = a
    acc = a
    for _ in range(a.field.m - 1):
        t = fe_sqr(t)
        acc = acc + t
    return acc.bits


# ---------------------------------------------------------------------------
# GF(2) matrices


@dataclass(frozen=True)
class Gf2Matrix:
    """Square bit matrix; ``rows[i]`` bit ``j`` is entry (i, j)."""

    rows: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return (self.rows[i] >> j) & 1

    def apply(self, v: int) -> int:
        out = 0
        for i, row in enumerate(self.rows):
            out |= (bin(row & v).count("1") & 1) << i
        return out

    def column(self, j: int) -> int:
        return sum(((row >> j) & 1) << i for i, row in enumerate(self.rows))

    def __matmul__(self, other: "Gf2Matrix") -> "Gf2Matrix":
        cols = [self.apply(other.column(j)) for j in range(other.n)]
        return Gf2Matrix(
            tuple(sum(((cols[j] >> i) & 1) << j for j in range(other.n)) for i in range(self.n))
        )

    @classmethod
    def identity(cls, n: int) -> "Gf2Matrix":
        return cls(tuple(1 << i for i in range(n)))

    @classmethod
    def from_columns(cls, cols: list[int]) -> "Gf2Matrix":
        n = len(cols)
        return cls(tuple(sum(((cols[j] >> i) & 1) << j for j in range(n)) for i in range(n)))

    def det(self) -> int:
        rows = list(self.rows)
        n = self.n
        for k in range(n):
            piv = next((r for r in range(k, n) if (rows[r] >> k) & 1), None)
            if piv is None:
                return 0
            rows[k], rows[piv] = rows[piv], rows[k]
            for r in range(k + 1, n):
                if (rows[r] >> k) & 1:
                    rows[r] ^= rows[k]
        return 1

    def plu(self) -> tuple[list[int], "Gf2Matrix", "Gf2Matrix"]:
        """Factor as ``P @ L @ U``.

        Returns ``(perm, L, U)`` where ``perm[i]`` is the row of ``L @ U`` that
        lands in row ``i`` (i.e. ``P[i][perm[i]] = 1``). ``L`` is unit lower and
        ``U`` unit upper triangular. Raises if the matrix is singular.
        """
        n = self.n
        a = list(self.rows)
        order = list(range(n))  # order[k] = original row now at position k
        lower = [0] * n
        for k in range(n):
            piv = next((r for r in range(k, n) if (a[r] >> k) & 1), None)
            if piv is None:
                raise FieldError("matrix is singular over GF(2)")
            a[k], a[piv] = a[piv], a[k]
            order[k], order[piv] = order[piv], order[k]
            lower[k], lower[piv] = lower[piv], lower[k]
            for r in range(k + 1, n):
                if (a[r] >> k) & 1:
                    a[r] ^= a[k]
                    lower[r] |= 1 << k
        L = Gf2Matrix(tuple(lower[i] | (1 << i) for i in range(n)))
        U = Gf2Matrix(tuple(a))
        # rows of (L @ U) are original rows order[k]; so original row i sits at k with order[k]=i
        perm = [0] * n
        for k, i in enumerate(order):
            perm[i] = k
        return perm, L, U


def perm_matrix(perm: list[int]) -> Gf2Matrix:
    return Gf2Matrix(tuple(1 << perm[i] for i in range(len(perm))))


def sqr_matrix(f: FieldParams) -> Gf2Matrix:
    """Squaring as a GF(2)-linear map: column ``i`` is ``(t^i)^2``."""
    return Gf2Matrix.from_columns([f.reduce(1 << (2 * i)) for i in range(f.m)])


def mul_table_bits(f: FieldParams) -> list[list[int]]:
    """``table[i][j]`` = bitmask of ``t^(i+j) mod p``."""
    return [[f.reduce(1 << (i + j)) for j in range(f.m)] for i in range(f.m)]


# ---------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class CurveParams:
    """Ordinary binary curve ``y^2 + xy = x^3 + a x^2 + b``."""

    field: FieldParams
    a: int
    b: FieldElement

    def __post_init__(self):
        if self.a not in (0, 1):
            raise FieldError(f"curve coefficient a must be 0 or 1, got {self.a}")
        if self.b.field != self.field:
            raise FieldMismatchError("b is not in the curve field")
        if not self.b.bits:
            raise FieldError("b = 0 gives a singular curve")

    @property
    def a_elem(self) -> FieldElement:
        return FieldElement(self.field, self.a)

    @classmethod
    def reference(cls, m: int = 4, poly: Optional[int] = None) -> "CurveParams":
        f = FieldParams(m, poly if poly is not None else default_poly(m))
        return cls(f, 1, FieldElement(f, 1))


@dataclass(frozen=True)
class AffinePoint:
    """Affine point; both coordinates ``None`` encodes the point at infinity."""

    x: Optional[FieldElement] = None
    y: Optional[FieldElement] = None

    def __post_init__(self):
        if (self.x is None) != (self.y is None):
            raise FieldError("point must have both coordinates or neither")
        if self.x is not None and self.x.field != self.y.field:
            raise FieldMismatchError("point coordinates from different fields")

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __neg__(self) -> "AffinePoint":
        if self.is_infinity:
            return self
        return AffinePoint(self.x, self.y + self.x)

    def __repr__(self) -> str:
        if self.is_infinity:
            return "AffinePoint(INF)"
        return f"AffinePoint({self.x.bits:#x}, {self.y.bits:#x})"


INFINITY = AffinePoint()


def point(c: CurveParams, x: int, y: int) -> AffinePoint:
    return AffinePoint(FieldElement(c.field, x), FieldElement(c.field, y))


def on_curve(p: AffinePoint, c: CurveParams) -> bool:
    if p.is_infinity:
        return True
    if p.x.field != c.field:
        raise FieldMismatchError("point field does not match curve field")
    x, y = p.x, p.y
    lhs = fe_sqr(y) + x * y
    rhs = fe_sqr(x) * x + c.a_elem * fe_sqr(x) + c.b
    return lhs == rhs


def point_double(p: AffinePoint, c: CurveParams) -> AffinePoint:
    if p.is_infinity or not p.x.bits:
        return INFINITY
    x1, y1 = p.x, p.y
    one = FieldElement(c.field, 1)
    lam = x1 + y1 / x1
    x3 = fe_sqr(lam) + lam + c.a_elem
    x1sq = fe_sqr(x1)
    if x3 != x1sq + c.b / x1sq:
        raise AssertionError("doubling closed forms disagree; point is not on the curve")
    y3 = x1sq + (lam + one) * x3
    return AffinePoint(x3, y3)


def point_add(p1: AffinePoint, p2: AffinePoint, c: CurveParams) -> AffinePoint:
    if p1.is_infinity:
        return p2
    if p2.is_infinity:
        return p1
    if p1.x == p2.x:
        if p1.y == p2.y:
            return point_double(p1, c)
        return INFINITY
    x1, y1, x2, y2 = p1.x, p1.y, p2.x, p2.y
    lam = (y1 + y2) / (x1 + x2)
    x3 = fe_sqr(lam) + lam + x1 + x2 + c.a_elem
    y3 = lam * (x1 + x3) + x3 + y1
    return AffinePoint(x3, y3)


def scalar_mul(k: int, p: AffinePoint, c: CurveParams) -> AffinePoint:
    acc = INFINITY
    while k:
        if k & 1:
            acc = point_add(acc, p, c)
        p = point_double(p, c)
        k >>= 1
    return acc


@lru_cache(maxsize=None)
def _artin_schreier_solver(f: FieldParams) -> Gf2Matrix:
    """Matrix sending any solvable ``c`` to one root of ``z^2 + z = c``."""
    sq = sqr_matrix(f)
    cols = [sq.column(j) ^ (1 << j) for j in range(f.m)]
    # eliminate on columns: track which combination of basis vectors gives each column
    basis: dict[int, tuple[int, int]] = {}  # pivot bit -> (image vector, preimage)
    for j, v in enumerate(cols):
        pre = 1 << j
        for piv in sorted(basis, reverse=True):
            if (v >> piv) & 1:
                bv, bp = basis[piv]
                v ^= bv
                pre ^= bp
        if v:
            basis[_deg(v)] = (v, pre)
    # unit targets outside the image leave a residual; callers re-check the root
    rows = []
    for i in range(f.m):
        target = 1 << i
        pre = 0
        for piv in sorted(basis, reverse=True):
            if (target >> piv) & 1:
                bv, bp = basis[piv]
                target ^= bv
                pre ^= bp
        rows.append(pre)
    return Gf2Matrix.from_columns(rows)


def lift_x(x: FieldElement, c: CurveParams) -> list[FieldElement]:
    """All ``y`` with ``(x, y)`` on the curve, ascending."""
    if x.field != c.field:
        raise FieldMismatchError("x is not in the curve field")
    if not x.bits:
        return [fe_sqrt(c.b)]
    rhs = fe_sqr(x) * x + c.a_elem * fe_sqr(x) + c.b
    target = rhs / fe_sqr(x)
    pinv = _artin_schreier_solver(c.field)
    z = FieldElement(c.field, pinv.apply(target.bits))
    if fe_sqr(z) + z != target:
        return []
    ys = sorted({(x * z).bits, (x * (z + FieldElement(c.field, 1))).bits})
    return [FieldElement(c.field, v) for v in ys]


def enumerate_points(c: CurveParams) -> list[AffinePoint]:
    """Infinity followed by every finite point, sorted by (x, y)."""
    if c.field.m > MAX_ENUM_M:
        raise FieldError(f"exhaustive enumeration limited to m <= {MAX_ENUM_M}")
    pts = [INFINITY]
    for x in c.field.elements():
        for y in lift_x(x, c):
            pts.append(AffinePoint(x, y))
    return pts


def parse_hex(text: str) -> int:
    t = text.strip().lower()
    if not t.startswith("0x"):
        raise ValueError(f"expected 0x-prefixed hexadecimal, got {text!r}")
    return int(t, 16)
