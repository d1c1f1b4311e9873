"""Finite congruence quotients as explicit indexed groups.

A GroupTable stores one row of small nonnegative "digits" per element
(matrix entries mod p, concatenated over the prime factors of q, or the
coordinates of a nilpotent/semidirect element) together with vectorized
multiplication and inversion callbacks acting on digit rows.  Element
ids are assigned in BFS order from the identity, ties broken by the
mixed-radix encoding of the digit row, so tables are deterministic.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    BadPrime,
    HypothesisViolated,
    NotComposite,
    NotNormal,
    NotPGroup,
    SizeCapExceeded,
    TableMismatch,
)
from .exact import (
    ModMatrix,
    RationalMatrix,
    crt_tuple,
    prime_factors,
    square_free_factors,
)

DEFAULT_ELEMENT_CAP = 2_000_000
DENSE_SEEN_CAP = 1 << 27
DENSE_TABLE_CAP = 4096
MIN_PRIME = 5


def element_cap(override: int | None = None) -> int:
    if override is not None:
        return int(override)
    env = os.environ.get("EXPANDERLAB_CAP_ELEMS")
    return int(env) if env else DEFAULT_ELEMENT_CAP


def _modpow_vec(base: np.ndarray, exp: int, p: int) -> np.ndarray:
    """Elementwise base**exp mod p by binary exponentiation."""
    result = np.ones_like(base)
    b = base % p
    e = exp
    while e:
        if e & 1:
            result = result * b % p
        b = b * b % p
        e >>= 1
    return result


class GroupTable:
    """Immutable element table for a finite group with O(1) multiplication."""

    def __init__(
        self,
        digits: np.ndarray,
        radices: np.ndarray,
        mul_rows: Callable[[np.ndarray, np.ndarray], np.ndarray],
        inv_rows: Callable[[np.ndarray], np.ndarray],
        generator_ids: np.ndarray,
        kind: str,
        meta: dict,
    ):
        self.digits = digits
        self.radices = radices
        self._mul_rows = mul_rows
        self._inv_rows = inv_rows
        self.generator_ids = np.asarray(generator_ids, dtype=np.int64)
        self.kind = kind
        self.meta = meta
        self._weights = _radix_weights(radices)
        codes = digits @ self._weights
        self._sorter = np.argsort(codes, kind="stable").astype(np.int64)
        self._sorted_codes = codes[self._sorter]
        self._perm_cache: dict[tuple[str, int], np.ndarray] = {}
        self._dense: np.ndarray | None = None
        self._inv_ids: np.ndarray | None = None

    @property
    def order(self) -> int:
        return self.digits.shape[0]

    identity_id = 0

    # ----- id resolution -----
    def id_of_rows(self, rows: np.ndarray) -> np.ndarray:
        codes = np.atleast_2d(rows) @ self._weights
        pos = np.searchsorted(self._sorted_codes, codes).clip(0, self.order - 1)
        if not np.array_equal(self._sorted_codes[pos], codes):
            raise KeyError("element not in group table")
        return self._sorter[pos]

    def rows_of(self, ids: np.ndarray | int) -> np.ndarray:
        return self.digits[np.asarray(ids, dtype=np.int64)]

    # ----- products -----
    def mul_vec(self, a_ids, b_ids) -> np.ndarray:
        a = np.asarray(a_ids, dtype=np.int64)
        b = np.asarray(b_ids, dtype=np.int64)
        a, b = np.broadcast_arrays(a, b)
        rows = self._mul_rows(self.digits[a.ravel()], self.digits[b.ravel()])
        return self.id_of_rows(rows).reshape(a.shape)

    def mul(self, i: int, j: int) -> int:
        return int(self.mul_vec(np.array([i]), np.array([j]))[0])

    def inv_vec(self, ids) -> np.ndarray:
        ids = np.asarray(ids, dtype=np.int64)
        rows = self._inv_rows(self.digits[ids.ravel()])
        return self.id_of_rows(rows).reshape(ids.shape)

    def inv(self, i: int) -> int:
        return int(self.inv_vec(np.array([i]))[0])

    def inverse_perm(self) -> np.ndarray:
        if self._inv_ids is None:
            self._inv_ids = self.inv_vec(np.arange(self.order))
        return self._inv_ids

    # ----- cached permutation actions -----
    def left_perm(self, gid: int) -> np.ndarray:
        """Array mapping x to id(g x)."""
        key = ("L", int(gid))
        if key not in self._perm_cache:
            g = np.broadcast_to(self.digits[gid], self.digits.shape)
            self._perm_cache[key] = self.id_of_rows(self._mul_rows(g, self.digits))
        return self._perm_cache[key]

    def right_perm(self, gid: int) -> np.ndarray:
        """Array mapping x to id(x g)."""
        key = ("R", int(gid))
        if key not in self._perm_cache:
            g = np.broadcast_to(self.digits[gid], self.digits.shape)
            self._perm_cache[key] = self.id_of_rows(self._mul_rows(self.digits, g))
        return self._perm_cache[key]

    def conj_perm(self, gid: int) -> np.ndarray:
        """Array mapping x to id(g x g^-1)."""
        key = ("C", int(gid))
        if key not in self._perm_cache:
            gi = self.inv(gid)
            self._perm_cache[key] = self.left_perm(gid)[self.right_perm(gi)]
        return self._perm_cache[key]

    def dense_table(self) -> np.ndarray:
        """Full multiplication table, only for small groups."""
        if self.order > DENSE_TABLE_CAP:
            raise SizeCapExceeded(f"dense table capped at {DENSE_TABLE_CAP} elements")
        if self._dense is None:
            n = self.order
            all_ids = np.arange(n, dtype=np.int64)
            tbl = np.empty((n, n), dtype=np.int32)
            for i in range(n):
                tbl[i] = self.mul_vec(np.full(n, i, dtype=np.int64), all_ids)
            self._dense = tbl
        return self._dense

    def element_str(self, i: int) -> str:
        row = self.digits[i]
        if self.kind == "matrix":
            parts = []
            pos = 0
            d = self.meta["dim"]
            for p in self.meta["primes"]:
                block = row[pos : pos + d * d].reshape(d, d)
                parts.append(f"mod{p}:" + ";".join(",".join(str(x) for x in r) for r in block))
                pos += d * d
            return "|".join(parts)
        return ",".join(str(x) for x in row)

    def __repr__(self) -> str:
        return f"GroupTable({self.kind}, order={self.order})"


def _radix_weights(radices: np.ndarray) -> np.ndarray:
    w = np.ones(len(radices), dtype=np.int64)
    space = 1
    for i, r in enumerate(radices):
        w[i] = space
        space *= int(r)
        if space > (1 << 62):
            raise SizeCapExceeded("element code space exceeds 2^62")
    return w


# ---------------------------------------------------------------------------
# digit backends


def _matrix_mul_factory(primes: Sequence[int], d: int):
    blocks = [(i * d * d, p) for i, p in enumerate(primes)]

    def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        out = np.empty_like(a)
        for off, p in blocks:
            x = a[:, off : off + d * d].reshape(-1, d, d)
            y = b[:, off : off + d * d].reshape(-1, d, d)
            out[:, off : off + d * d] = (
                np.einsum("nij,njk->nik", x, y) % p
            ).reshape(-1, d * d)
        return out

    def inv(a: np.ndarray) -> np.ndarray:
        out = np.empty_like(a)
        for off, p in blocks:
            x = a[:, off : off + d * d].reshape(-1, d, d)
            out[:, off : off + d * d] = _inv_block(x, p).reshape(-1, d * d)
        return out

    return mul, inv


def _inv_block(x: np.ndarray, p: int) -> np.ndarray:
    d = x.shape[1]
    if d == 2:
        det = (x[:, 0, 0] * x[:, 1, 1] - x[:, 0, 1] * x[:, 1, 0]) % p
        di = _modpow_vec(det, p - 2, p)
        out = np.empty_like(x)
        out[:, 0, 0] = x[:, 1, 1] * di % p
        out[:, 0, 1] = (p - x[:, 0, 1]) * di % p
        out[:, 1, 0] = (p - x[:, 1, 0]) * di % p
        out[:, 1, 1] = x[:, 0, 0] * di % p
        return out
    # general small dimension: per-element elimination
    from .exact import mod_inv

    out = np.empty_like(x)
    for i in range(x.shape[0]):
        out[i] = np.array(mod_inv(ModMatrix(x[i].tolist(), p)).rows, dtype=np.int64)
    return out


def _heisenberg_mul_factory(p: int):
    def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        out = np.empty_like(a)
        out[:, 0] = (a[:, 0] + b[:, 0]) % p
        out[:, 1] = (a[:, 1] + b[:, 1]) % p
        out[:, 2] = (a[:, 2] + b[:, 2] + a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]) % p
        return out

    def inv(a: np.ndarray) -> np.ndarray:
        return (p - a) % p

    return mul, inv


# ---------------------------------------------------------------------------
# BFS construction


def _bfs_table(
    start_row: np.ndarray,
    gen_rows: np.ndarray,
    radices: np.ndarray,
    mul_rows,
    inv_rows,
    kind: str,
    meta: dict,
    cap: int | None = None,
) -> GroupTable:
    cap = element_cap(cap)
    weights = _radix_weights(radices)
    space = 1
    for r in radices:
        space *= int(r)
    dense = space <= DENSE_SEEN_CAP
    if dense:
        seen = np.zeros(space, dtype=bool)
    else:
        seen_dict: dict[int, None] = {}

    def mark(codes: np.ndarray) -> np.ndarray:
        """Mark codes as seen, returning a mask of the newly seen ones."""
        if dense:
            fresh = ~seen[codes]
            seen[codes[fresh]] = True
            return fresh
        fresh = np.zeros(len(codes), dtype=bool)
        for i, c in enumerate(codes.tolist()):
            if c not in seen_dict:
                seen_dict[c] = None
                fresh[i] = True
        return fresh

    start_code = int(start_row @ weights)
    mark(np.array([start_code], dtype=np.int64))
    levels = [start_row.reshape(1, -1)]
    frontier = levels[0]
    total = 1
    k = len(gen_rows)
    while frontier.shape[0]:
        n = frontier.shape[0]
        prod = mul_rows(
            np.repeat(frontier, k, axis=0),
            np.tile(gen_rows, (n, 1)),
        )
        codes = prod @ weights
        codes, first = np.unique(codes, return_index=True)
        prod = prod[first]
        fresh = mark(codes)
        prod = prod[fresh]
        if prod.shape[0]:
            total += prod.shape[0]
            if total > cap:
                raise SizeCapExceeded(
                    f"group closure exceeded cap of {cap} elements"
                )
            levels.append(prod)
        frontier = prod
    digits = np.concatenate(levels, axis=0)
    gen_codes = gen_rows @ weights
    table = GroupTable(
        digits=digits,
        radices=radices,
        mul_rows=mul_rows,
        inv_rows=inv_rows,
        generator_ids=np.zeros(len(gen_rows), dtype=np.int64),
        kind=kind,
        meta=meta,
    )
    table.generator_ids = table.id_of_rows(gen_rows)
    return table


def _symmetrize_rows(rows: np.ndarray, inv_rows, weights) -> np.ndarray:
    inv = inv_rows(rows)
    both = np.concatenate([rows, inv], axis=0)
    codes = both @ weights
    _, first = np.unique(codes, return_index=True)
    return both[np.sort(first)]


def generate_group(
    gens: Sequence,
    q: int | None = None,
    *,
    symmetrize: bool = True,
    cap: int | None = None,
    min_prime: int = MIN_PRIME,
) -> GroupTable:
    """BFS closure of the generators inside the mod-q matrix group.

    gens may be RationalMatrix values (reduced mod every prime factor of
    q), or tuples of ModMatrix lined up with the prime factorization.
    The element ordering is BFS layer first, then the mixed-radix
    encoding of the digit row, so identical input always produces an
    identical table.
    """
    if q is None:
        raise ValueError("modulus q is required")
    primes = square_free_factors(q)
    low = [p for p in primes if p < min_prime]
    if low:
        raise BadPrime(f"prime factors {low} below the working threshold {min_prime}")
    mats: list[list[ModMatrix]] = []
    denom_primes: set[int] = set()
    for g in gens:
        if isinstance(g, RationalMatrix):
            denom_primes.update(g.denominator_support())
            mats.append(crt_tuple(g, q))
        elif isinstance(g, ModMatrix):
            if len(primes) != 1:
                raise ValueError("a bare ModMatrix only matches a prime modulus")
            mats.append([g])
        else:
            mats.append(list(g))
    bad = denom_primes & set(primes)
    if bad:
        raise BadPrime(f"q shares prime factors {sorted(bad)} with generator denominators")
    d = mats[0][0].dim
    rows = np.array(
        [[x for m in tup for row in m.rows for x in row] for tup in mats],
        dtype=np.int64,
    )
    radices = np.array([p for p in primes for _ in range(d * d)], dtype=np.int64)
    mul_rows, inv_rows = _matrix_mul_factory(primes, d)
    if symmetrize:
        rows = _symmetrize_rows(rows, inv_rows, _radix_weights(radices))
    ident = np.array(
        [int(i == j) for _ in primes for i in range(d) for j in range(d)],
        dtype=np.int64,
    )
    meta = {
        "q": q,
        "primes": primes,
        "dim": d,
        "denominator_primes": sorted(denom_primes),
    }
    return _bfs_table(ident, rows, radices, mul_rows, inv_rows, "matrix", meta, cap)


def cyclic_group(n: int) -> GroupTable:
    """Z/n with generator 1, for analytic cross-checks on small graphs."""
    if n < 2:
        raise ValueError("need n >= 2")

    def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return (a + b) % n

    def inv(a: np.ndarray) -> np.ndarray:
        return (n - a) % n

    radices = np.array([n], dtype=np.int64)
    gens = np.array([[1], [n - 1]], dtype=np.int64)
    ident = np.zeros(1, dtype=np.int64)
    return _bfs_table(ident, gens, radices, mul, inv, "cyclic", {"n": n})


def heisenberg_group(p: int) -> GroupTable:
    """The group of order p^3 on pairs (v, t), v in F_p^2, t in F_p, with
    (v,t)(v',t') = (v+v', t+t'+h(v,v')) for the symplectic form
    h((a,b),(c,d)) = ad - bc.  Odd p only."""
    if p < 3 or prime_factors(p) != [p]:
        raise ValueError("need an odd prime")
    mul_rows, inv_rows = _heisenberg_mul_factory(p)
    radices = np.array([p, p, p], dtype=np.int64)
    gens = np.array(
        [[1, 0, 0], [p - 1, 0, 0], [0, 1, 0], [0, p - 1, 0]], dtype=np.int64
    )
    ident = np.zeros(3, dtype=np.int64)
    meta = {"p": p}
    return _bfs_table(ident, gens, radices, mul_rows, inv_rows, "heisenberg", meta)


@dataclass
class SemidirectSpec:
    """Levi-times-unipotent construction data: L acts on U, elements are
    pairs (A, u) with (A,u)(B,w) = (AB, u + A.w)."""

    p: int
    l_gens: list[ModMatrix]
    u_kind: str = "vector"  # "vector" | "heisenberg"
    u_dim: int = 2
    action: str = "natural"  # "natural" | "trivial"

    def __post_init__(self):
        if self.u_kind not in ("vector", "heisenberg"):
            raise ValueError("u_kind must be vector or heisenberg")
        if self.action not in ("natural", "trivial"):
            raise ValueError("action must be natural or trivial")
        if self.u_kind == "heisenberg" and self.action == "natural":
            # the twist must preserve the symplectic form
            for m in self.l_gens:
                a, b = m.rows[0]
                c, d = m.rows[1]
                if (a * d - b * c) % self.p != 1:
                    raise HypothesisViolated(
                        "natural action on the Heisenberg part needs det = 1"
                    )


def semidirect_group(spec: SemidirectSpec, cap: int | None = None) -> GroupTable:
    p = spec.p
    d = spec.l_gens[0].dim
    u_len = 3 if spec.u_kind == "heisenberg" else spec.u_dim
    dd = d * d
    natural = spec.action == "natural"
    heis = spec.u_kind == "heisenberg"

    def act(l_block: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Apply the L-part (n,d,d) to the U-part coordinates."""
        if not natural:
            return u
        if heis:
            out = u.copy()
            vec = np.einsum("nij,nj->ni", l_block, u[:, :2]) % p
            out[:, :2] = vec
            return out
        return np.einsum("nij,nj->ni", l_block, u) % p

    def u_add(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if heis:
            out = np.empty_like(x)
            out[:, 0] = (x[:, 0] + y[:, 0]) % p
            out[:, 1] = (x[:, 1] + y[:, 1]) % p
            out[:, 2] = (x[:, 2] + y[:, 2] + x[:, 0] * y[:, 1] - x[:, 1] * y[:, 0]) % p
            return out
        return (x + y) % p

    def u_neg(x: np.ndarray) -> np.ndarray:
        return (p - x) % p

    def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        out = np.empty_like(a)
        la = a[:, :dd].reshape(-1, d, d)
        lb = b[:, :dd].reshape(-1, d, d)
        out[:, :dd] = (np.einsum("nij,njk->nik", la, lb) % p).reshape(-1, dd)
        out[:, dd:] = u_add(a[:, dd:], act(la, b[:, dd:]))
        return out

    def inv(a: np.ndarray) -> np.ndarray:
        out = np.empty_like(a)
        li = _inv_block(a[:, :dd].reshape(-1, d, d), p)
        out[:, :dd] = li.reshape(-1, dd)
        out[:, dd:] = u_neg(act(li, a[:, dd:]))
        return out

    radices = np.full(dd + u_len, p, dtype=np.int64)
    ident_l = [int(i == j) for i in range(d) for j in range(d)]
    gen_rows = []
    for m in spec.l_gens:
        gen_rows.append([x for row in m.rows for x in row] + [0] * u_len)
    for i in range(2 if heis else u_len):
        u = [0] * u_len
        u[i] = 1
        gen_rows.append(ident_l + u)
    rows = np.array(gen_rows, dtype=np.int64)
    rows = _symmetrize_rows(rows, inv, _radix_weights(radices))
    ident = np.array(ident_l + [0] * u_len, dtype=np.int64)
    meta = {
        "p": p,
        "dim": d,
        "u_kind": spec.u_kind,
        "u_len": u_len,
        "action": spec.action,
        "l_digits": dd,
    }
    return _bfs_table(ident, rows, radices, mul, inv, "semidirect", meta, cap)


def direct_product(t1: GroupTable, t2: GroupTable, cap: int | None = None) -> GroupTable:
    """Explicit direct product table (for modest factor sizes)."""
    k1 = t1.digits.shape[1]

    def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        left = t1._mul_rows(a[:, :k1], b[:, :k1])
        right = t2._mul_rows(a[:, k1:], b[:, k1:])
        return np.concatenate([left, right], axis=1)

    def inv(a: np.ndarray) -> np.ndarray:
        return np.concatenate([t1._inv_rows(a[:, :k1]), t2._inv_rows(a[:, k1:])], axis=1)

    radices = np.concatenate([t1.radices, t2.radices])
    gens = []
    id1 = t1.digits[0]
    id2 = t2.digits[0]
    for g in t1.generator_ids:
        gens.append(np.concatenate([t1.digits[g], id2]))
    for g in t2.generator_ids:
        gens.append(np.concatenate([id1, t2.digits[g]]))
    rows = np.array(gens, dtype=np.int64)
    ident = np.concatenate([id1, id2])
    meta = {
        "factor_primes": list(t1.meta.get("primes", [t1.meta.get("p")]))
        + list(t2.meta.get("primes", [t2.meta.get("p")])),
        "factors": (t1, t2),
        "split": k1,
    }
    return _bfs_table(ident, rows, radices, mul, inv, "product", meta, cap)


# ---------------------------------------------------------------------------
# subgroups


@dataclass
class SubgroupRecord:
    parent: GroupTable
    generator_ids: np.ndarray
    element_ids: np.ndarray
    member: np.ndarray
    index: int
    normal: bool
    perfect: bool = field(default=False)

    @property
    def size(self) -> int:
        return len(self.element_ids)

    def __contains__(self, i: int) -> bool:
        return bool(self.member[i])


def _closure_ids(
    G: GroupTable, gen_ids: Sequence[int], stop_majority: bool = False
) -> np.ndarray:
    """Subgroup closure by BFS over ids (generators symmetrized).

    With stop_majority, the walk stops as soon as more than half the group
    is covered: subgroup orders divide the group order, so a subgroup past
    the halfway mark is the whole group.
    """
    gen_ids = np.asarray(sorted(set(int(g) for g in gen_ids)), dtype=np.int64)
    gen_ids = np.unique(np.concatenate([gen_ids, G.inv_vec(gen_ids)]))
    member = np.zeros(G.order, dtype=bool)
    member[G.identity_id] = True
    count = 1
    frontier = np.array([G.identity_id], dtype=np.int64)
    while frontier.size:
        prod = G.mul_vec(
            np.repeat(frontier, len(gen_ids)), np.tile(gen_ids, len(frontier))
        )
        prod = np.unique(prod)
        prod = prod[~member[prod]]
        member[prod] = True
        count += prod.size
        if stop_majority and 2 * count > G.order:
            return np.arange(G.order, dtype=np.int64)
        frontier = prod
    return np.nonzero(member)[0].astype(np.int64)


def subgroup_closure(G: GroupTable, gen_ids: Sequence[int], *, flags: bool = True) -> SubgroupRecord:
    ids = _closure_ids(G, gen_ids)
    member = np.zeros(G.order, dtype=bool)
    member[ids] = True
    normal = False
    perfect = False
    if flags:
        normal = _is_normal_set(G, np.asarray(gen_ids, dtype=np.int64), member)
        perfect = _is_perfect_subgroup(G, np.asarray(gen_ids, dtype=np.int64), member, ids)
    return SubgroupRecord(
        parent=G,
        generator_ids=np.asarray(sorted(set(int(g) for g in gen_ids)), dtype=np.int64),
        element_ids=ids,
        member=member,
        index=G.order // len(ids),
        normal=normal,
        perfect=perfect,
    )


def _is_normal_set(G: GroupTable, gen_ids: np.ndarray, member: np.ndarray) -> bool:
    """H is normal iff conjugating its generators by the group generators
    stays inside H (conjugation by a generating set reaches all of G)."""
    if gen_ids.size == 0:
        return True
    for s in G.generator_ids:
        if not member[G.conj_perm(int(s))[gen_ids]].all():
            return False
    return True


def _is_perfect_subgroup(G, gen_ids, member, ids) -> bool:
    if len(ids) == 1:
        return True
    comm = _commutator_seed(G, gen_ids, gen_ids)
    closure = _normal_closure_within(G, comm, gen_ids)
    return len(closure) == len(ids)


def _commutator_seed(G: GroupTable, a_ids: np.ndarray, b_ids: np.ndarray) -> np.ndarray:
    """All commutators [a, b] = a^-1 b^-1 a b over the two id sets."""
    a = np.repeat(a_ids, len(b_ids))
    b = np.tile(b_ids, len(a_ids))
    left = G.mul_vec(G.inv_vec(a), G.inv_vec(b))
    right = G.mul_vec(a, b)
    return np.unique(G.mul_vec(left, right))


def _normal_closure_within(
    G: GroupTable,
    seed_ids: np.ndarray,
    conj_gen_ids: np.ndarray,
    stop_majority: bool = False,
) -> np.ndarray:
    """Smallest subgroup containing the seeds and closed under conjugation
    by the given conjugating generators."""
    gens = [int(x) for x in np.unique(seed_ids) if x != G.identity_id]
    conj = [int(c) for c in np.unique(conj_gen_ids)]
    conj = sorted(set(conj) | set(int(x) for x in G.inv_vec(np.array(conj, dtype=np.int64)))) if conj else []
    while True:
        ids = _closure_ids(G, gens or [G.identity_id], stop_majority=stop_majority)
        if len(ids) == G.order:
            return ids
        member = np.zeros(G.order, dtype=bool)
        member[ids] = True
        new = []
        for s in conj:
            cp = G.conj_perm(s)
            for t in gens:
                c = int(cp[t])
                if not member[c]:
                    new.append(c)
        if not new:
            return ids
        gens.extend(sorted(set(new)))


def normal_closure(G: GroupTable, seed_ids: Sequence[int]) -> np.ndarray:
    """Element ids of the smallest normal subgroup containing the seeds."""
    return _normal_closure_within(
        G, np.asarray(list(seed_ids), dtype=np.int64), G.generator_ids
    )


def is_perfect(G: GroupTable) -> bool:
    """Whether G equals its commutator subgroup."""
    comm = _commutator_seed(G, G.generator_ids, G.generator_ids)
    return len(normal_closure(G, comm)) == G.order


def conjugacy_classes(G: GroupTable) -> list[np.ndarray]:
    """Conjugation orbits, by BFS under conjugation with the generators."""
    conj_perms = [G.conj_perm(int(s)) for s in G.generator_ids]
    seen = np.zeros(G.order, dtype=bool)
    classes = []
    for start in range(G.order):
        if seen[start]:
            continue
        seen[start] = True
        orbit = [start]
        frontier = np.array([start], dtype=np.int64)
        while frontier.size:
            nxt = np.unique(np.concatenate([cp[frontier] for cp in conj_perms]))
            nxt = nxt[~seen[nxt]]
            seen[nxt] = True
            orbit.append(nxt)
            frontier = nxt
        classes.append(np.sort(np.concatenate([np.atleast_1d(o) for o in orbit])))
    return classes


def normal_subgroups(G: GroupTable, cap: int = 100_000) -> list[SubgroupRecord]:
    """All normal subgroups, as joins of normal closures of conjugacy classes."""
    if G.order > cap:
        raise SizeCapExceeded(f"normal subgroup enumeration capped at {cap}")
    found: dict[bytes, list[int]] = {}
    masks: dict[bytes, np.ndarray] = {}
    tried: set[tuple[int, ...]] = set()

    def register(gen_set: list[int]) -> bool:
        probe = tuple(sorted(set(gen_set)))
        if probe in tried:
            return False
        tried.add(probe)
        ids = _normal_closure_within(
            G, np.array(gen_set or [0], dtype=np.int64), G.generator_ids,
            stop_majority=True,
        )
        key = ids.tobytes()
        if key in found:
            return False
        found[key] = sorted(set(gen_set))
        m = np.zeros(G.order, dtype=bool)
        m[ids] = True
        masks[key] = m
        return True

    register([])
    for cls in conjugacy_classes(G):
        register([int(cls[0])])
    # close under pairwise joins; skip pairs where one side already
    # contains the other's generators (the join is the bigger one)
    while True:
        items = list(found.items())
        grew = False
        for i in range(len(items)):
            ki, gi = items[i]
            for j in range(i + 1, len(items)):
                kj, gj = items[j]
                if (gj and masks[ki][gj].all()) or (gi and masks[kj][gi].all()) or not (gi and gj):
                    continue
                if register(gi + gj):
                    grew = True
        if not grew:
            break
    records = []
    for key, gen_set in found.items():
        ids = np.frombuffer(key, dtype=np.int64)
        member = np.zeros(G.order, dtype=bool)
        member[ids] = True
        records.append(
            SubgroupRecord(
                parent=G,
                generator_ids=np.array(gen_set, dtype=np.int64),
                element_ids=ids.copy(),
                member=member,
                index=G.order // len(ids),
                normal=True,
                perfect=False,
            )
        )
    records.sort(key=lambda r: (r.size, r.element_ids.tobytes()))
    return records


# ---------------------------------------------------------------------------
# decomposition and structure checks


def product_decompose(G: GroupTable) -> tuple[list[GroupTable], dict]:
    """Per-prime projections of a mod-q table plus a bijectivity report."""
    if G.kind != "matrix" or len(G.meta["primes"]) < 2:
        raise NotComposite("decomposition needs a matrix table with composite q")
    d = G.meta["dim"]
    factors = []
    orders = []
    pos = 0
    for p in G.meta["primes"]:
        gen_rows = G.digits[G.generator_ids][:, pos : pos + d * d]
        gens = [ModMatrix(r.reshape(d, d).tolist(), p) for r in gen_rows]
        t = generate_group(gens, p, symmetrize=True)
        factors.append(t)
        orders.append(t.order)
        pos += d * d
    prod = 1
    for o in orders:
        prod *= o
    report = {
        "orders": orders,
        "product_of_orders": prod,
        "group_order": G.order,
        "bijective": prod == G.order,
    }
    return factors, report


def projection_sizes(G: GroupTable, ids: np.ndarray) -> list[int]:
    """Number of distinct per-prime blocks among the given elements."""
    d = G.meta["dim"]
    sizes = []
    pos = 0
    for p in G.meta["primes"]:
        block = G.digits[ids][:, pos : pos + d * d]
        sizes.append(len(np.unique(block @ _radix_weights(np.full(d * d, p, dtype=np.int64)))))
        pos += d * d
    return sizes


def index_product_check(G: GroupTable, H: SubgroupRecord, delta: float = 0.25) -> dict:
    """Compare prod_p [G_p : pi_p(H)] against [G:H]^delta."""
    if G.kind == "matrix":
        primes = G.meta["primes"]
        if len(primes) < 2:
            raise NotComposite("need a composite modulus")
        factors, _ = product_decompose(G)
        proj = projection_sizes(G, H.element_ids)
        lhs = 1
        for t, s in zip(factors, proj):
            lhs *= t.order // s
    elif G.kind == "product":
        primes = G.meta["factor_primes"]
        if len(set(primes)) != len(primes):
            raise HypothesisViolated(
                "index product bound assumes pairwise distinct primes"
            )
        t1, t2 = G.meta["factors"]
        k1 = G.meta["split"]
        lhs = 1
        for t, block in ((t1, G.digits[H.element_ids][:, :k1]), (t2, G.digits[H.element_ids][:, k1:])):
            w = _radix_weights(t.radices)
            lhs *= t.order // len(np.unique(block @ w))
    else:
        raise NotComposite("index product check needs a product-type table")
    rhs = H.index
    if rhs == 1:
        delta_hat = float("inf")
    else:
        import math

        delta_hat = math.log(lhs) / math.log(rhs)
    return {
        "lhs": lhs,
        "rhs": rhs,
        "delta_hat": delta_hat,
        "holds": lhs >= rhs**delta,
        "delta": delta,
    }


def small_lifts(
    ball: Iterable[tuple[tuple, RationalMatrix]],
    G: GroupTable,
    H: SubgroupRecord,
    delta: float,
) -> list[tuple[tuple, RationalMatrix]]:
    """Filter the ball down to lifts of H with S-norm below [G:H]^delta."""
    from .exact import PrimeSet, s_norm

    S = PrimeSet(G.meta.get("denominator_primes", []))
    bound = float(H.index) ** delta
    q = G.meta["q"]
    out = []
    for word, mat in ball:
        if s_norm(mat, S) >= bound:
            continue
        tup = crt_tuple(mat, q)
        row = np.array([x for m in tup for r in m.rows for x in r], dtype=np.int64)
        try:
            gid = int(G.id_of_rows(row.reshape(1, -1))[0])
        except KeyError:
            continue
        if H.member[gid]:
            out.append((word, mat))
    return out


def lower_central_series(U: GroupTable, cap: int = 4096) -> list[np.ndarray]:
    """Chain gamma_1 = U, gamma_{i+1} = <[U, gamma_i]>, down to the identity.

    Computed by brute force over all commutator pairs, so it is exact and
    only sensible for small p-groups.
    """
    fac = prime_factors(U.order)
    if len(fac) != 1:
        raise NotPGroup(f"order {U.order} is not a prime power")
    if U.order > cap:
        raise SizeCapExceeded(f"lower central series capped at {cap} elements")
    chain = [np.arange(U.order, dtype=np.int64)]
    all_ids = np.arange(U.order, dtype=np.int64)
    while len(chain[-1]) > 1:
        comm = _commutator_seed(U, all_ids, chain[-1])
        nxt = _closure_ids(U, [int(x) for x in comm if x != 0] or [0])
        if len(nxt) == len(chain[-1]):
            raise NotPGroup("series did not descend; group is not nilpotent")
        chain.append(nxt)
    return chain


# ----- semidirect structure helpers -----


def levi_mask(G: GroupTable) -> np.ndarray:
    """Mask of elements with trivial unipotent part."""
    if G.kind != "semidirect":
        raise TableMismatch("levi/unipotent split needs a semidirect table")
    dd = G.meta["l_digits"]
    return (G.digits[:, dd:] == 0).all(axis=1)


def unipotent_mask(G: GroupTable) -> np.ndarray:
    """Mask of elements with identity Levi part."""
    if G.kind != "semidirect":
        raise TableMismatch("levi/unipotent split needs a semidirect table")
    dd = G.meta["l_digits"]
    d = G.meta["dim"]
    ident = np.array([int(i == j) for i in range(d) for j in range(d)], dtype=np.int64)
    return (G.digits[:, :dd] == ident).all(axis=1)


def levi_projection_count(G: GroupTable, ids: np.ndarray) -> int:
    """Number of distinct Levi parts among the given elements."""
    dd = G.meta["l_digits"]
    block = G.digits[ids][:, :dd]
    w = _radix_weights(G.radices[:dd])
    return len(np.unique(block @ w))


def verify_product_form(G: GroupTable, H: SubgroupRecord) -> dict:
    """Check H = (H cap L)(H cap U) with H cap L acting trivially on U/(H cap U)."""
    if not H.normal:
        raise NotNormal("product form is asserted for normal subgroups")
    lmask = levi_mask(G)
    umask = unipotent_mask(G)
    hl = H.element_ids[lmask[H.element_ids]]
    hu = H.element_ids[umask[H.element_ids]]
    # product set (H cap L)(H cap U)
    prod = np.unique(
        G.mul_vec(np.repeat(hl, len(hu)), np.tile(hu, len(hl)))
    )
    splits = prod.size == H.size and bool(H.member[prod].all())
    # trivial action on U/(H cap U): commutators [h, u] must fall in H cap U
    u_ids = np.nonzero(umask)[0].astype(np.int64)
    hu_member = np.zeros(G.order, dtype=bool)
    hu_member[hu] = True
    acts_trivially = True
    witness = None
    for h in hl:
        hp = np.full(len(u_ids), h, dtype=np.int64)
        comm = G.mul_vec(
            G.mul_vec(G.inv_vec(hp), G.inv_vec(u_ids)), G.mul_vec(hp, u_ids)
        )
        bad = ~hu_member[comm]
        if bad.any():
            acts_trivially = False
            witness = (int(h), int(u_ids[np.nonzero(bad)[0][0]]))
            break
    return {
        "splits": splits,
        "acts_trivially": acts_trivially,
        "passed": splits and acts_trivially,
        "witness": witness,
        "h_cap_l": len(hl),
        "h_cap_u": len(hu),
    }


def _primitive_root(p: int) -> int:
    order_factors = prime_factors(p - 1)
    for g in range(2, p):
        if all(pow(g, (p - 1) // r, p) != 1 for r in order_factors):
            return g
    raise BadPrime(f"no primitive root found mod {p}")


def _single_prime_dim2(G: GroupTable) -> int:
    if G.kind != "matrix" or len(G.meta["primes"]) != 1 or G.meta["dim"] != 2:
        raise TableMismatch("named subgroups need a 2x2 table over one prime")
    return G.meta["primes"][0]


def borel_subgroup(G: GroupTable) -> SubgroupRecord:
    """Upper triangular subgroup of a 2x2 mod-p table, order p(p-1)."""
    p = _single_prime_dim2(G)
    g0 = _primitive_root(p)
    rows = np.array(
        [
            [g0, 0, 0, pow(g0, p - 2, p)],
            [1, 1, 0, 1],
        ],
        dtype=np.int64,
    )
    return subgroup_closure(G, G.id_of_rows(rows), flags=False)


def torus_subgroup(G: GroupTable) -> SubgroupRecord:
    """Diagonal subgroup of a 2x2 mod-p table, order p-1."""
    p = _single_prime_dim2(G)
    g0 = _primitive_root(p)
    rows = np.array([[g0, 0, 0, pow(g0, p - 2, p)]], dtype=np.int64)
    return subgroup_closure(G, G.id_of_rows(rows), flags=False)


def verify_normal_perfect(G: GroupTable) -> dict:
    """For a perfect semidirect table, check that every normal subgroup
    surjecting onto the Levi part is the whole group."""
    if not is_perfect(G):
        return {"applicable": False, "passed": False, "reason": "group is not perfect"}
    lmask = levi_mask(G)
    l_count = int(lmask.sum())
    failures = []
    for H in normal_subgroups(G):
        if levi_projection_count(G, H.element_ids) == l_count and H.size < G.order:
            failures.append(H.size)
    return {"applicable": True, "passed": not failures, "failures": failures}


def verify_factor_product_form(G: GroupTable, H: SubgroupRecord) -> dict:
    """Check that H equals (product of the embedded factors it contains)
    times a central subgroup.

    That is the only shape a normal subgroup of a product of quasi-simple
    factors can take; the factor index set may be empty.
    """
    if G.kind != "matrix" or len(G.meta["primes"]) < 2:
        raise NotComposite("product form over factors needs a composite matrix table")
    d = G.meta["dim"]
    primes = G.meta["primes"]
    ident = [int(i == j) for i in range(d) for j in range(d)]
    # embedded copy of each factor: identity in every other prime block
    factor_members = []
    pos = 0
    for _ in primes:
        others = np.ones(G.order, dtype=bool)
        qos = 0
        for _ in primes:
            if qos != pos:
                others &= (G.digits[:, qos : qos + d * d] == ident).all(axis=1)
            qos += d * d
        factor_members.append(others)
        pos += d * d
    center = np.ones(G.order, dtype=bool)
    for s in G.generator_ids:
        center &= G.conj_perm(int(s)) == np.arange(G.order)
    inside = []
    core = np.array([G.identity_id], dtype=np.int64)
    for i, fm in enumerate(factor_members):
        f_ids = np.nonzero(fm)[0].astype(np.int64)
        if H.member[f_ids].all():
            inside.append(i)
            core = np.unique(
                G.mul_vec(np.repeat(core, len(f_ids)), np.tile(f_ids, len(core)))
            )
    z_ids = np.nonzero(center & H.member)[0].astype(np.int64)
    full = np.unique(
        G.mul_vec(np.repeat(core, len(z_ids)), np.tile(z_ids, len(core)))
    )
    passed = full.size == H.size and bool(H.member[full].all())
    return {
        "passed": passed,
        "factors_inside": inside,
        "central_size": len(z_ids),
        "rebuilt_size": int(full.size),
    }
