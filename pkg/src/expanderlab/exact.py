"""Exact rational and modular matrix arithmetic.

Everything in this module is arbitrary precision: scalars are
`fractions.Fraction`, modular entries are Python ints.  Floating point
is confined to the spectral module.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .errors import BadPrime, DenominatorOutsideS, NotSquareFree, SingularMatrix

MAX_DIM = 8

Rational = Fraction


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors of |n| by trial division (inputs here are small)."""
    n = abs(n)
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


def square_free_factors(q: int) -> list[int]:
    """Prime factors of q, raising NotSquareFree on a repeated factor."""
    if q < 2:
        raise NotSquareFree(f"modulus must be >= 2, got {q}")
    factors = prime_factors(q)
    prod = 1
    for p in factors:
        prod *= p
    if prod != q:
        raise NotSquareFree(f"{q} has a repeated prime factor")
    return factors


def padic_val(r: Rational, p: int) -> int:
    """p-adic valuation v_p(r); raises on r = 0 (valuation is +infinity)."""
    if r == 0:
        raise ZeroDivisionError("v_p(0) is infinite")
    v = 0
    num, den = r.numerator, r.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def padic_abs(r: Rational | int, p: int) -> Rational:
    """p-adic absolute value |r|_p = p^(-v_p(r)), with |0|_p = 0."""
    r = Fraction(r)
    if r == 0:
        return Fraction(0)
    v = padic_val(r, p)
    return Fraction(1, p**v) if v >= 0 else Fraction(p ** (-v))


class RationalMatrix:
    """Square matrix over Q with exact entries.

    Entries are stored as a tuple of row tuples of Fractions, so instances
    are hashable and safe to share.
    """

    __slots__ = ("dim", "rows")

    def __init__(self, rows: Iterable[Iterable]):
        rows = tuple(tuple(Fraction(x) for x in row) for row in rows)
        d = len(rows)
        if not 2 <= d <= MAX_DIM or any(len(r) != d for r in rows):
            raise ValueError(f"need a square matrix with 2 <= dim <= {MAX_DIM}")
        self.dim = d
        self.rows = rows

    @classmethod
    def identity(cls, d: int) -> "RationalMatrix":
        return cls([[1 if i == j else 0 for j in range(d)] for i in range(d)])

    def __mul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        d = self.dim
        b = other.rows
        return RationalMatrix(
            [
                [sum(self.rows[i][k] * b[k][j] for k in range(d)) for j in range(d)]
                for i in range(d)
            ]
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalMatrix) and self.rows == other.rows

    def __hash__(self) -> int:
        return hash(self.rows)

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in row) for row in self.rows)
        return f"RationalMatrix({body})"

    def det(self) -> Rational:
        """Determinant by fraction-exact Gaussian elimination."""
        d = self.dim
        m = [list(row) for row in self.rows]
        det = Fraction(1)
        for col in range(d):
            pivot = next((r for r in range(col, d) if m[r][col] != 0), None)
            if pivot is None:
                return Fraction(0)
            if pivot != col:
                m[col], m[pivot] = m[pivot], m[col]
                det = -det
            det *= m[col][col]
            inv = 1 / m[col][col]
            for r in range(col + 1, d):
                f = m[r][col] * inv
                if f:
                    for c in range(col, d):
                        m[r][c] -= f * m[col][c]
        return det

    def inverse(self) -> "RationalMatrix":
        d = self.dim
        m = [list(row) + [Fraction(int(i == j)) for j in range(d)] for i, row in enumerate(self.rows)]
        for col in range(d):
            pivot = next((r for r in range(col, d) if m[r][col] != 0), None)
            if pivot is None:
                raise SingularMatrix("matrix not invertible over Q")
            m[col], m[pivot] = m[pivot], m[col]
            inv = 1 / m[col][col]
            m[col] = [x * inv for x in m[col]]
            for r in range(d):
                if r != col and m[r][col]:
                    f = m[r][col]
                    m[r] = [x - f * y for x, y in zip(m[r], m[col])]
        return RationalMatrix([row[d:] for row in m])

    def denominator_support(self) -> set[int]:
        """Primes dividing any entry denominator."""
        support: set[int] = set()
        for row in self.rows:
            for x in row:
                if x.denominator > 1:
                    support.update(prime_factors(x.denominator))
        return support


class PrimeSet:
    """A sorted set of distinct primes, the declared denominator support."""

    __slots__ = ("primes",)

    def __init__(self, primes: Iterable[int] = ()):
        ps = sorted(set(int(p) for p in primes))
        for p in ps:
            if p < 2 or prime_factors(p) != [p]:
                raise ValueError(f"{p} is not prime")
        self.primes = tuple(ps)

    def __contains__(self, p: int) -> bool:
        return p in self.primes

    def __iter__(self):
        return iter(self.primes)

    def __len__(self) -> int:
        return len(self.primes)

    def __repr__(self) -> str:
        return f"PrimeSet({list(self.primes)})"


def s_norm(M: RationalMatrix, S: PrimeSet) -> float:
    """The S-arithmetic norm: max over the archimedean operator norm and
    the p-adic operator norms for p in S.

    The archimedean norm is the l-infinity induced norm, i.e. the maximum
    absolute row sum; the p-adic operator norm is the maximum p-adic
    absolute value of an entry.  Both are computed exactly as rationals
    and only the final value is converted to float.
    """
    outside = M.denominator_support() - set(S.primes)
    if outside:
        raise DenominatorOutsideS(f"denominator primes {sorted(outside)} not in S")
    best = max(sum(abs(x) for x in row) for row in M.rows)
    for p in S:
        for row in M.rows:
            for x in row:
                a = padic_abs(x, p)
                if a > best:
                    best = a
    return float(best)


class ModMatrix:
    """Square matrix over Z/pZ, entries reduced to [0, p)."""

    __slots__ = ("p", "rows")

    def __init__(self, rows: Iterable[Iterable[int]], p: int):
        self.p = p
        self.rows = tuple(tuple(int(x) % p for x in row) for row in rows)
        d = len(self.rows)
        if any(len(r) != d for r in self.rows):
            raise ValueError("rows must form a square matrix")

    @property
    def dim(self) -> int:
        return len(self.rows)

    @classmethod
    def identity(cls, d: int, p: int) -> "ModMatrix":
        return cls([[int(i == j) for j in range(d)] for i in range(d)], p)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ModMatrix) and self.p == other.p and self.rows == other.rows
        )

    def __hash__(self) -> int:
        return hash((self.p, self.rows))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in row) for row in self.rows)
        return f"ModMatrix({body} mod {self.p})"


def mod_mul(a: ModMatrix, b: ModMatrix) -> ModMatrix:
    if a.p != b.p:
        raise ValueError("modulus mismatch")
    d = a.dim
    p = a.p
    return ModMatrix(
        [
            [sum(a.rows[i][k] * b.rows[k][j] for k in range(d)) % p for j in range(d)]
            for i in range(d)
        ],
        p,
    )


def mod_inv(a: ModMatrix) -> ModMatrix:
    """Inverse mod p by Gaussian elimination; raises SingularMatrix."""
    d, p = a.dim, a.p
    m = [[a.rows[i][j] for j in range(d)] + [int(i == j) for j in range(d)] for i in range(d)]
    for col in range(d):
        pivot = next((r for r in range(col, d) if m[r][col] % p != 0), None)
        if pivot is None:
            raise SingularMatrix(f"matrix singular mod {p}")
        m[col], m[pivot] = m[pivot], m[col]
        inv = pow(m[col][col], p - 2, p)
        m[col] = [x * inv % p for x in m[col]]
        for r in range(d):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [(x - f * y) % p for x, y in zip(m[r], m[col])]
    return ModMatrix([row[d:] for row in m], p)


def reduce_mod_p(M: RationalMatrix, p: int) -> ModMatrix:
    """Entrywise reduction a/b -> a * b^(-1) mod p.

    This is a ring homomorphism on matrices whose denominators avoid p,
    so reduce(MN) = reduce(M) reduce(N).
    """
    rows = []
    for row in M.rows:
        out = []
        for x in row:
            if x.denominator % p == 0:
                raise BadPrime(f"{p} divides a denominator of {x}")
            out.append(x.numerator * pow(x.denominator, p - 2, p) % p)
        rows.append(out)
    return ModMatrix(rows, p)


def crt_tuple(M: RationalMatrix, q: int) -> list[ModMatrix]:
    """Per-prime reductions of M for the square-free modulus q, ordered by prime."""
    return [reduce_mod_p(M, p) for p in square_free_factors(q)]
