"""Reduced-word combinatorics over a free alphabet.

Letters of the alphabet on M symbols are the nonzero integers
-M..-1, 1..M, with -i the formal inverse of i.  A word is a tuple of
letters with no adjacent cancelling pair.  B_l denotes the set of
reduced words of length exactly l.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from .errors import ZeroVector
from .exact import RationalMatrix

Word = tuple[int, ...]


@dataclass(frozen=True)
class Alphabet:
    """Symmetric alphabet of 2M letters."""

    M: int

    def __post_init__(self):
        if self.M < 2:
            raise ValueError("need at least two free generators")

    @property
    def letters(self) -> tuple[int, ...]:
        out = []
        for i in range(1, self.M + 1):
            out.extend((i, -i))
        return tuple(out)


def ball_size(M: int, l: int) -> int:
    """Number of reduced words of length exactly l: 2M(2M-1)^(l-1), and 1 at l=0."""
    if l < 0:
        raise ValueError("length must be nonnegative")
    if l == 0:
        return 1
    return 2 * M * (2 * M - 1) ** (l - 1)


def reduced_words(M: int, l: int) -> Iterator[Word]:
    """Yield the words of B_l lazily, in lexicographic order of the letter
    sequence under the ordering 1 < -1 < 2 < -2 < ... < M < -M."""
    letters = Alphabet(M).letters
    if l == 0:
        yield ()
        return
    word: list[int] = []

    def rec(depth: int) -> Iterator[Word]:
        for a in letters:
            if depth > 0 and word[depth - 1] == -a:
                continue
            word.append(a)
            if depth + 1 == l:
                yield tuple(word)
            else:
                yield from rec(depth + 1)
            word.pop()

    yield from rec(0)


def _sphere_numerators(M: int, k: int) -> list[int]:
    """Integer numerators n[l] of the total mass on the distance-l sphere
    after k steps of the uniform walk; the common denominator is (2M)^k.

    One step from distance 0 goes to distance 1 with probability 1; from
    distance l >= 1 it drops to l-1 with probability 1/(2M) and grows to
    l+1 with probability (2M-1)/(2M).
    """
    D = 2 * M
    n = [0] * (k + 2)
    n[0] = 1
    for _ in range(k):
        new = [0] * (k + 2)
        for l in range(k + 1):
            mass = n[l]
            if not mass:
                continue
            if l == 0:
                new[1] += D * mass
            else:
                new[l - 1] += mass
                new[l + 1] += (D - 1) * mass
        n = new
    return n


def kesten_return(M: int, k: int) -> Fraction:
    """Exact return probability of the uniform walk on the free group F_M
    after k steps (zero for odd k)."""
    if k < 0:
        raise ValueError("step count must be nonnegative")
    return Fraction(_sphere_numerators(M, k)[0], (2 * M) ** k)


def radial_distribution(M: int, k: int) -> list[Fraction]:
    """Per-vertex landing probabilities (P(l))_{l=0..k} after k steps.

    P(l) is the probability of ending on one fixed reduced word of length
    l; by symmetry it does not depend on the word.  The sphere masses
    satisfy the partition identity sum_l |B_l| P(l) = 1 exactly.
    """
    D = 2 * M
    n = _sphere_numerators(M, k)
    den = D**k
    return [Fraction(n[l], den) / ball_size(M, l) for l in range(k + 1)]


def kesten_upper_bound(M: int, k: int) -> Fraction:
    """The model upper bound ((2M-1)/M^2)^k for the 2k-step return probability."""
    return Fraction(2 * M - 1, M * M) ** k


def _as_integer_pairs(gens: Sequence[RationalMatrix]):
    """Clear denominators: return (int_matrix, den) for each generator and
    its inverse, so word products can run on plain integers."""
    pairs = {}
    for i, g in enumerate(gens, start=1):
        for letter, mat in ((i, g), (-i, g.inverse())):
            den = 1
            for row in mat.rows:
                for x in row:
                    den = den * x.denominator // math.gcd(den, x.denominator)
            rows = tuple(
                tuple(int(x * den) for x in row) for row in mat.rows
            )
            pairs[letter] = (rows, den)
    return pairs


def _int_mat_mul(a, b, d):
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(d)) for j in range(d))
        for i in range(d)
    )


def certify_free(gens: Sequence[RationalMatrix], L: int) -> tuple[bool, Word | None]:
    """Check that no nonempty reduced word of length <= L in the given
    generators evaluates to the identity.

    Returns (True, None) if the generators are free up to length L, else
    (False, witness) with the first offending word in search order.  The
    certificate is exact (big-integer arithmetic) but only covers words up
    to length L.
    """
    if not gens:
        raise ValueError("need at least one generator")
    if L > 16:
        raise ValueError("word length cap is 16")
    d = gens[0].dim
    pairs = _as_integer_pairs(gens)
    letters = []
    for i in range(1, len(gens) + 1):
        letters.extend((i, -i))
    ident = tuple(tuple(int(i == j) for j in range(d)) for i in range(d))

    def is_scaled_identity(mat, scale) -> bool:
        for i in range(d):
            for j in range(d):
                if mat[i][j] != (scale if i == j else 0):
                    return False
        return True

    word: list[int] = []

    def rec(prod, den) -> Word | None:
        depth = len(word)
        for a in letters:
            if depth > 0 and word[-1] == -a:
                continue
            mat, dg = pairs[a]
            new_prod = _int_mat_mul(prod, mat, d)
            new_den = den * dg
            word.append(a)
            if is_scaled_identity(new_prod, new_den):
                return tuple(word)
            if depth + 1 < L:
                hit = rec(new_prod, new_den)
                if hit is not None:
                    return hit
            word.pop()
        return None

    witness = rec(ident, 1)
    return (witness is None), witness


def _adjoint_matrices(g: RationalMatrix) -> RationalMatrix:
    """Matrix of X -> g X g^(-1) on the trace-zero basis E, H, F (dim 2 input)."""
    if g.dim != 2:
        raise ValueError("adjoint representation implemented for dim 2 only")
    gi = g.inverse()
    basis = [
        RationalMatrix([[0, 1], [0, 0]]),
        RationalMatrix([[1, 0], [0, -1]]),
        RationalMatrix([[0, 0], [1, 0]]),
    ]

    def coords(m: RationalMatrix):
        # a*E + b*H + c*F = [[b, a], [c, -b]]
        return (m.rows[0][1], m.rows[0][0], m.rows[1][0])

    cols = [coords(g * x * gi) for x in basis]
    return RationalMatrix([[cols[j][i] for j in range(3)] for i in range(3)])


def _collinear(v: Sequence[Fraction], w: Sequence[Fraction]) -> bool:
    n = len(v)
    for i in range(n):
        for j in range(i + 1, n):
            if v[i] * w[j] != v[j] * w[i]:
                return False
    return True


def fixed_line_fraction(
    gens: Sequence[RationalMatrix],
    rep: str,
    w: Sequence,
    l: int,
) -> dict:
    """Count words g in B_l whose representation image fixes the line [w].

    rep is "natural" (the matrices themselves) or "adjoint" (conjugation on
    trace-zero matrices, dim 2 generators only).  The projective test is
    exact: all 2x2 minors of the pair (rho(g) w, w) must vanish.
    """
    w = [Fraction(x) for x in w]
    if all(x == 0 for x in w):
        raise ZeroVector("fixed-line test needs a nonzero vector")
    if l > 12:
        raise ValueError("ball scan cap is l <= 12")
    if rep == "natural":
        mats = list(gens)
    elif rep == "adjoint":
        mats = [_adjoint_matrices(g) for g in gens]
    else:
        raise ValueError(f"unknown representation {rep!r}")
    return _count_fixing_words(
        mats, l, w, lambda vec: _collinear(vec, w)
    )


def fixed_point_fraction(
    gens: Sequence[RationalMatrix],
    translations: Sequence[Sequence],
    w: Sequence,
    l: int,
) -> dict:
    """Count words g in B_l whose affine action x -> rho(g)x + v(g) fixes w."""
    w = [Fraction(x) for x in w]
    if l > 12:
        raise ValueError("ball scan cap is l <= 12")
    if len(translations) != len(gens):
        raise ValueError("one translation part per generator required")
    return _count_fixing_words(
        list(gens),
        l,
        w,
        lambda vec: vec == w,
        translations=[[Fraction(x) for x in t] for t in translations],
    )


def _count_fixing_words(
    mats: Sequence[RationalMatrix],
    l: int,
    w: Sequence[Fraction],
    hit: Callable[[list[Fraction]], bool],
    translations: Sequence[Sequence[Fraction]] | None = None,
) -> dict:
    """Shared DFS over B_l tracking the image of w under the word action."""
    d = mats[0].dim
    action = {}
    for i, m in enumerate(mats, start=1):
        mi = m.inverse()
        if translations is None:
            action[i] = (m.rows, None)
            action[-i] = (mi.rows, None)
        else:
            v = list(translations[i - 1])
            action[i] = (m.rows, v)
            vi = [-sum(mi.rows[r][c] * v[c] for c in range(d)) for r in range(d)]
            action[-i] = (mi.rows, vi)
    letters = []
    for i in range(1, len(mats) + 1):
        letters.extend((i, -i))

    count = 0
    if l == 0:
        count = 1 if hit(list(w)) else 0
    else:
        word: list[int] = []

        def rec(vec: list[Fraction]):
            nonlocal count
            depth = len(word)
            for a in letters:
                if depth > 0 and word[-1] == -a:
                    continue
                rows, trans = action[a]
                new = [sum(rows[r][c] * vec[c] for c in range(d)) for r in range(d)]
                if trans is not None:
                    new = [x + t for x, t in zip(new, trans)]
                if depth + 1 == l:
                    if hit(new):
                        count += 1
                else:
                    word.append(a)
                    rec(new)
                    word.pop()

        rec(list(w))
    total = ball_size(len(mats), l)
    exponent = math.log(count) / math.log(total) if count > 1 and total > 1 else 0.0
    return {
        "count": count,
        "ball": total,
        "fraction": Fraction(count, total),
        "exponent": exponent,
        "degenerate": count == total,
    }
