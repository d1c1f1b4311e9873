"""Product-set growth experiments and unipotent-radical recovery ops.

Sets of group elements are dense boolean masks over a GroupTable.
Product sets are computed by exact table lookups over all pairs, in
chunks, so the cost is the literal pair count; callers control scale
through the work cap.  The module-action operations (orbit sums, fixed
vectors) run exact linear algebra mod p on small coordinate arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    FixedVectorExists,
    HypothesisViolated,
    NotPGroup,
    ProjectionNotOnto,
    SizeCapExceeded,
    TableMismatch,
    ZeroVector,
)
from .quotient import (
    GroupTable,
    SubgroupRecord,
    _radix_weights,
    levi_mask,
    lower_central_series,
    normal_closure,
    unipotent_mask,
)

PAIR_WORK_CAP = 100_000_000
CHUNK = 1 << 20


@dataclass
class ElementSet:
    """Subset of a group table: sorted ids plus a membership mask."""

    parent: GroupTable
    ids: np.ndarray
    member: np.ndarray
    symmetric: bool

    @classmethod
    def from_ids(cls, table: GroupTable, ids: Sequence[int]) -> "ElementSet":
        arr = np.unique(np.asarray(list(ids), dtype=np.int64))
        member = np.zeros(table.order, dtype=bool)
        member[arr] = True
        symmetric = bool(member[table.inv_vec(arr)].all())
        return cls(parent=table, ids=arr, member=member, symmetric=symmetric)

    @classmethod
    def whole_group(cls, table: GroupTable) -> "ElementSet":
        return cls.from_ids(table, np.arange(table.order))

    @property
    def size(self) -> int:
        return len(self.ids)

    def symmetrized(self) -> "ElementSet":
        return ElementSet.from_ids(
            self.parent, np.concatenate([self.ids, self.parent.inv_vec(self.ids)])
        )

    def with_identity(self) -> "ElementSet":
        if self.member[self.parent.identity_id]:
            return self
        return ElementSet.from_ids(
            self.parent, np.concatenate([self.ids, [self.parent.identity_id]])
        )

    def __eq__(self, other) -> bool:
        return self.parent is other.parent and np.array_equal(self.ids, other.ids)


def random_symmetric_set(table: GroupTable, size: int, rng: np.random.Generator) -> ElementSet:
    """Symmetric set containing the identity, of at least the asked size."""
    picks = rng.integers(0, table.order, size=max(size // 2, 1))
    ids = np.concatenate([picks, table.inv_vec(picks), [table.identity_id]])
    out = ElementSet.from_ids(table, ids)
    while out.size < size:
        extra = int(rng.integers(0, table.order))
        ids = np.concatenate([out.ids, [extra, table.inv_vec(np.array([extra]))[0]]])
        out = ElementSet.from_ids(table, ids)
    return out


def product_set(A: ElementSet, B: ElementSet, work_cap: int = PAIR_WORK_CAP) -> ElementSet:
    """A.B = {ab}, exact, chunked over all |A|*|B| pairs."""
    if A.parent is not B.parent:
        raise TableMismatch("sets live on different tables")
    G = A.parent
    pairs = A.size * B.size
    if pairs > work_cap:
        raise SizeCapExceeded(f"product set needs {pairs} pair lookups, cap {work_cap}")
    member = np.zeros(G.order, dtype=bool)
    step = max(1, CHUNK // max(B.size, 1))
    for lo in range(0, A.size, step):
        a = A.ids[lo : lo + step]
        prod = G.mul_vec(np.repeat(a, B.size), np.tile(B.ids, len(a)))
        member[prod] = True
    ids = np.nonzero(member)[0].astype(np.int64)
    sym = bool(member[G.inv_vec(ids)].all())
    return ElementSet(parent=G, ids=ids, member=member, symmetric=sym)


def product_power(A: ElementSet, n: int, work_cap: int = PAIR_WORK_CAP) -> ElementSet:
    """The n-fold product set A.A...A."""
    if n < 1:
        raise ValueError("need n >= 1")
    out = A
    for _ in range(n - 1):
        out = product_set(out, A, work_cap)
    return out


@dataclass
class TriplingReport:
    size: int
    triple_size: int
    exponent: float
    covers_group: bool
    identity_added: bool


def tripling_report(A: ElementSet) -> TriplingReport:
    """|A|, |AAA| and the growth exponent log|AAA| / log|A|."""
    if not A.symmetric:
        raise ValueError("tripling is measured on symmetric sets")
    identity_added = not A.member[A.parent.identity_id]
    if identity_added:
        A = A.with_identity()
    triple = product_power(A, 3)
    if A.size > 1:
        exponent = math.log(triple.size) / math.log(A.size)
    else:
        exponent = 1.0
    return TriplingReport(
        size=A.size,
        triple_size=triple.size,
        exponent=exponent,
        covers_group=triple.size == A.parent.order,
        identity_added=identity_added,
    )


def chain_inequality(A: ElementSet, C: int) -> dict:
    """|prod_C A| <= (|AAA|/|A|)^(C-2) |A|, compared in exact integers."""
    if C < 3:
        raise ValueError("chain length starts at 3")
    if not A.symmetric:
        raise ValueError("the chain inequality is stated for symmetric sets")
    triple = product_power(A, 3)
    chain = product_power(A, C)
    # |P_C| * |A|^(C-3) <= |AAA|^(C-2), all integers
    lhs = chain.size * A.size ** (C - 3)
    rhs = triple.size ** (C - 2)
    return {
        "C": C,
        "size": A.size,
        "triple_size": triple.size,
        "chain_size": chain.size,
        "holds": lhs <= rhs,
    }


def gowers_cover(B1: ElementSet, B2: ElementSet, B3: ElementSet, d_min: int) -> dict:
    """Covering criterion |B1||B2||B3| >= |G|^3 / d_min, checked exactly."""
    G = B1.parent
    if B2.parent is not G or B3.parent is not G:
        raise TableMismatch("sets live on different tables")
    above = B1.size * B2.size * B3.size * d_min >= G.order**3
    prod = product_set(product_set(B1, B2), B3)
    covers = prod.size == G.order
    return {
        "above_threshold": above,
        "covers": covers,
        "consistent": covers or not above,
        "product_size": prod.size,
    }


# ---------------------------------------------------------------------------
# product frames: subsets of G_1 x ... x G_k without enumerating the product


class ProductFrame:
    """Rows of per-factor element ids standing for elements of a direct
    product of semidirect tables, with the Levi projection beta."""

    def __init__(self, factors: Sequence[GroupTable]):
        self.factors = list(factors)
        self.orders = np.array([t.order for t in self.factors], dtype=np.int64)
        w = np.ones(len(self.factors), dtype=np.int64)
        space = 1
        for i, o in enumerate(self.orders):
            w[i] = space
            space *= int(o)
            if space > (1 << 62):
                raise SizeCapExceeded("product code space exceeds 2^62")
        self.weights = w
        self._levi_trivial = []
        self._levi_codes = []
        self.kernel_sizes = []
        self.levi_sizes = []
        for t in self.factors:
            lm = levi_mask(t)  # raises TableMismatch for non-semidirect factors
            um = unipotent_mask(t)
            dd = t.meta["l_digits"]
            codes = t.digits[:, :dd] @ _radix_weights(t.radices[:dd])
            self._levi_trivial.append(um)
            self._levi_codes.append(codes)
            self.kernel_sizes.append(int(um.sum()))
            self.levi_sizes.append(int(lm.sum()))

    @property
    def num_factors(self) -> int:
        return len(self.factors)

    def identity_row(self) -> np.ndarray:
        return np.zeros(self.num_factors, dtype=np.int64)

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        out = np.empty_like(a)
        for i, t in enumerate(self.factors):
            out[:, i] = t.mul_vec(a[:, i], b[:, i])
        return out

    def inv(self, a: np.ndarray) -> np.ndarray:
        out = np.empty_like(a)
        for i, t in enumerate(self.factors):
            out[:, i] = t.inv_vec(a[:, i])
        return out

    def codes(self, rows: np.ndarray) -> np.ndarray:
        return rows @ self.weights

    def dedup(self, rows: np.ndarray) -> np.ndarray:
        _, first = np.unique(self.codes(rows), return_index=True)
        return rows[np.sort(first)]

    def in_kernel(self, rows: np.ndarray) -> np.ndarray:
        """Mask of rows with trivial Levi part in every factor."""
        mask = np.ones(len(rows), dtype=bool)
        for i in range(self.num_factors):
            mask &= self._levi_trivial[i][rows[:, i]]
        return mask

    def levi_code(self, rows: np.ndarray) -> np.ndarray:
        """Combined code of the per-factor Levi projections."""
        out = np.zeros(len(rows), dtype=np.int64)
        scale = 1
        for i, t in enumerate(self.factors):
            out += self._levi_codes[i][rows[:, i]] * scale
            scale *= t.order  # safe upper bound on distinct levi codes
        return out

    def projection_onto_levi(self, rows: np.ndarray) -> bool:
        total = 1
        for s in self.levi_sizes:
            total *= s
        return len(np.unique(self.levi_code(rows))) == total

    def product_rows(self, a: np.ndarray, b: np.ndarray, work_cap: int = PAIR_WORK_CAP) -> np.ndarray:
        pairs = len(a) * len(b)
        if pairs > work_cap:
            raise SizeCapExceeded(f"frame product needs {pairs} pair lookups")
        out = self.mul(np.repeat(a, len(b), axis=0), np.tile(b, (len(a), 1)))
        return self.dedup(out)

    def section_rows(self) -> np.ndarray:
        """The homomorphism-section subgroup: all rows with trivial
        unipotent part in every factor."""
        per = [np.nonzero(levi_mask(t))[0].astype(np.int64) for t in self.factors]
        grids = np.meshgrid(*per, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)


def farah_distance(g1: Sequence[int], g2: Sequence[int], kernel_sizes: Sequence[int]) -> float:
    """Sum of log|Ker beta_i| over the coordinates where g1 and g2 differ."""
    if len(g1) != len(g2) or len(g1) != len(kernel_sizes):
        raise ValueError("coordinate counts do not match")
    return float(
        sum(math.log(k) for a, b, k in zip(g1, g2, kernel_sizes) if a != b)
    )


def kernel_displacement(frame: ProductFrame, rows: np.ndarray, work_cap: int = PAIR_WORK_CAP) -> dict:
    """eps_hat = max over g in AAA with beta(g) = 1 of d(1, g) / log|Ker beta|."""
    rows = frame.dedup(np.asarray(rows, dtype=np.int64))
    if not frame.projection_onto_levi(rows):
        raise ProjectionNotOnto("the set does not project onto the Levi part")
    aa = frame.product_rows(rows, rows, work_cap)
    aaa = frame.product_rows(aa, rows, work_cap)
    kernel_rows = aaa[frame.in_kernel(aaa)]
    log_kernel = sum(math.log(k) for k in frame.kernel_sizes)
    ident = frame.identity_row()
    eps = 0.0
    for r in kernel_rows:
        eps = max(eps, farah_distance(r, ident, frame.kernel_sizes) / log_kernel)
    return {
        "eps_hat": eps,
        "kernel_hits": len(kernel_rows),
        "aaa_size": len(aaa),
        "log_kernel": log_kernel,
    }


def normal_closure_product(frame: ProductFrame, rows: np.ndarray, g_row: Sequence[int],
                           c_max: int = 24, work_cap: int = PAIR_WORK_CAP) -> dict:
    """Smallest c with prod_c {h g h^-1 : h in A} containing the normal
    closure of g.  Preconditions: beta(A) = L, beta(g) = 1, elementary
    abelian kernels acting without one-dimensional composition factors.
    """
    rows = frame.dedup(np.asarray(rows, dtype=np.int64))
    g_row = np.asarray(g_row, dtype=np.int64).reshape(1, -1)
    if not frame.projection_onto_levi(rows):
        raise ProjectionNotOnto("the set does not project onto the Levi part")
    if not frame.in_kernel(g_row)[0]:
        raise HypothesisViolated("g must lie in the kernel of beta")
    for t in frame.factors:
        if t.meta.get("u_kind") != "vector":
            raise HypothesisViolated("kernels must be elementary abelian")
        _check_no_one_dim_factor(t)
    # conjugates of g by the rows
    n = len(rows)
    g_rep = np.repeat(g_row, n, axis=0)
    conj = frame.mul(frame.mul(rows, g_rep), frame.inv(rows))
    conj = frame.dedup(conj)
    # oracle: normal closure per factor, combined as a full product
    closure_codes = _product_normal_closure_codes(frame, g_row[0])
    power = conj
    for c in range(1, c_max + 1):
        covered = np.isin(closure_codes, frame.codes(power)).all()
        if covered:
            return {"c": int(c), "conjugates": len(conj), "closure_size": len(closure_codes)}
        power = frame.product_rows(power, conj, work_cap)
    return {"c": None, "conjugates": len(conj), "closure_size": len(closure_codes)}


def _product_normal_closure_codes(frame: ProductFrame, g_row: np.ndarray) -> np.ndarray:
    """Codes of the normal closure of g inside the direct product: the
    product of the per-factor normal closures."""
    per_factor = []
    for i, t in enumerate(frame.factors):
        gid = int(g_row[i])
        if gid == t.identity_id:
            per_factor.append(np.array([t.identity_id], dtype=np.int64))
        else:
            per_factor.append(normal_closure(t, [gid]))
    grids = np.meshgrid(*per_factor, indexing="ij")
    rows = np.stack([g.ravel() for g in grids], axis=1)
    return np.unique(frame.codes(rows))


def _check_no_one_dim_factor(t: GroupTable) -> None:
    """Reject actions whose natural module has a one-dimensional
    composition factor, witnessed by an invariant line of the action or
    of its dual."""
    p = t.meta["p"]
    d = t.meta["dim"]
    gens = []
    for gid in t.generator_ids:
        row = t.digits[gid][: d * d].reshape(d, d)
        gens.append(row)
    if t.meta.get("action") == "trivial":
        raise HypothesisViolated("trivial action has one-dimensional factors")
    for mats in (gens, [_transpose_inv_mod(m, p) for m in gens]):
        line = _invariant_line(mats, p, d)
        if line is not None:
            raise HypothesisViolated(
                f"one-dimensional composition factor witnessed by line {line}"
            )


def _transpose_inv_mod(m: np.ndarray, p: int) -> np.ndarray:
    from .exact import ModMatrix, mod_inv

    inv = mod_inv(ModMatrix(m.tolist(), p))
    return np.array(inv.rows, dtype=np.int64).T


def _invariant_line(mats: list[np.ndarray], p: int, d: int) -> tuple | None:
    """Projective point fixed by every matrix, or None."""
    for v in _projective_points(p, d):
        vec = np.array(v, dtype=np.int64)
        ok = True
        for m in mats:
            w = m @ vec % p
            if not _collinear_mod(w, vec, p):
                ok = False
                break
        if ok:
            return v
    return None


def _projective_points(p: int, d: int):
    """One representative per line of F_p^d (first nonzero coord = 1)."""
    for lead in range(d):
        tail = d - lead - 1
        for rest in range(p**tail):
            coords = [0] * lead + [1]
            x = rest
            for _ in range(tail):
                coords.append(x % p)
                x //= p
            yield tuple(coords)


def _collinear_mod(a: np.ndarray, b: np.ndarray, p: int) -> bool:
    for i in range(len(a)):
        for j in range(i + 1, len(a)):
            if (a[i] * b[j] - a[j] * b[i]) % p != 0:
                return False
    return True


# ---------------------------------------------------------------------------
# module actions: exact linear algebra over F_p


@dataclass
class ModuleAction:
    """H <= GL_m(F_p) acting on F_p^m, generators as integer matrices."""

    p: int
    dim: int
    generators: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        mats = []
        for g in self.generators:
            m = np.asarray(g, dtype=np.int64) % self.p
            if m.shape != (self.dim, self.dim):
                raise ValueError("generator shape does not match the dimension")
            if _rank_mod_p(m, self.p) != self.dim:
                raise ValueError("generators must be invertible mod p")
            mats.append(m)
        self.generators = mats

    def has_fixed_vector(self) -> bool:
        """Nonzero v with gv = v for all generators, by exact rank."""
        eye = np.eye(self.dim, dtype=np.int64)
        stacked = np.concatenate([(g - eye) % self.p for g in self.generators], axis=0)
        return _rank_mod_p(stacked, self.p) < self.dim

    def orbit(self, v: np.ndarray) -> np.ndarray:
        """All images of v under the generated group, as (n, m) coords."""
        v = np.asarray(v, dtype=np.int64).reshape(1, -1) % self.p
        weights = self.p ** np.arange(self.dim, dtype=np.int64)
        seen = {int(v[0] @ weights)}
        frontier = v
        rows = [v]
        while len(frontier):
            batch = []
            for g in self.generators:
                batch.append(frontier @ g.T % self.p)
            batch = np.concatenate(batch, axis=0)
            codes = batch @ weights
            fresh_idx = []
            for i, c in enumerate(codes.tolist()):
                if c not in seen:
                    seen.add(c)
                    fresh_idx.append(i)
            frontier = batch[fresh_idx]
            if len(frontier):
                rows.append(frontier)
        return np.concatenate(rows, axis=0)

    def submodule_spanned_by(self, v: np.ndarray) -> np.ndarray:
        """All p^r vectors of the H-submodule generated by v."""
        orb = self.orbit(v)
        basis = _row_basis_mod_p(orb, self.p)
        return _span_vectors(basis, self.p)


def _rank_mod_p(mat: np.ndarray, p: int) -> int:
    m = mat.copy() % p
    rows, cols = m.shape
    rank = 0
    for c in range(cols):
        pivot = None
        for r in range(rank, rows):
            if m[r, c] % p:
                pivot = r
                break
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        inv = pow(int(m[rank, c]), p - 2, p)
        m[rank] = m[rank] * inv % p
        for r in range(rows):
            if r != rank and m[r, c]:
                m[r] = (m[r] - m[r, c] * m[rank]) % p
        rank += 1
        if rank == rows:
            break
    return rank


def _row_basis_mod_p(rows: np.ndarray, p: int) -> np.ndarray:
    m = rows.copy() % p
    basis = []
    for row in m:
        r = row.copy()
        for b in basis:
            lead = np.nonzero(b)[0][0]
            if r[lead]:
                r = (r - r[lead] * b) % p
        if r.any():
            lead = np.nonzero(r)[0][0]
            r = r * pow(int(r[lead]), p - 2, p) % p
            basis.append(r)
    return np.array(basis, dtype=np.int64) if basis else np.zeros((0, m.shape[1]), dtype=np.int64)


def _span_vectors(basis: np.ndarray, p: int) -> np.ndarray:
    r, m = basis.shape
    if r == 0:
        return np.zeros((1, m), dtype=np.int64)
    coeffs = np.indices((p,) * r).reshape(r, -1).T
    return coeffs @ basis % p


def _vector_codes(rows: np.ndarray, p: int) -> np.ndarray:
    weights = p ** np.arange(rows.shape[1], dtype=np.int64)
    return rows @ weights


def orbit_sum_subspace(action: ModuleAction, v, c_max: int = 24) -> dict:
    """Smallest c for which the c-fold sumset of the orbit H.v contains a
    nonzero H-subspace.  Sums of at most c orbit elements, empty sum
    included, so 0 always belongs."""
    v = np.asarray(v, dtype=np.int64) % action.p
    if not v.any():
        raise ZeroVector("orbit sums start from a nonzero vector")
    if action.has_fixed_vector():
        raise FixedVectorExists("the action fixes a nonzero vector")
    p = action.p
    orbit = action.orbit(v)
    orbit_codes = set(_vector_codes(orbit, p).tolist())
    current = np.zeros((1, action.dim), dtype=np.int64)  # empty sum
    for c in range(1, c_max + 1):
        sums = (current[:, None, :] + orbit[None, :, :]) % p
        sums = sums.reshape(-1, action.dim)
        both = np.concatenate([current, sums], axis=0)
        codes = _vector_codes(both, p)
        _, first = np.unique(codes, return_index=True)
        current = both[np.sort(first)]
        code_set = set(_vector_codes(current, p).tolist())
        found = _contained_subspace(action, current, code_set)
        if found is not None:
            return {"c": c, "subspace": found, "sumset_size": len(current)}
    return {"c": None, "subspace": None, "sumset_size": len(current)}


def _contained_subspace(action: ModuleAction, vectors: np.ndarray, code_set: set) -> np.ndarray | None:
    """A nonzero H-submodule inside the vector set, if one exists: the
    submodule generated by any member must itself be inside the set."""
    p = action.p
    for w in vectors:
        if not w.any():
            continue
        sub = action.submodule_spanned_by(w)
        if all(int(c) in code_set for c in _vector_codes(sub, p).tolist()):
            return sub
    return None


def orbit_sum_span(action: ModuleAction, v, c_bound: int = 24) -> dict:
    """Minimal c <= c_bound with the c-fold orbit sumset equal to the
    H-submodule generated by v."""
    _reject_one_dim_module(action)
    v = np.asarray(v, dtype=np.int64) % action.p
    if not v.any():
        return {"c": 0, "holds": True, "submodule_size": 1}
    p = action.p
    target = action.submodule_spanned_by(v)
    target_codes = np.unique(_vector_codes(target, p))
    orbit = action.orbit(v)
    current = np.zeros((1, action.dim), dtype=np.int64)
    for c in range(1, c_bound + 1):
        sums = (current[:, None, :] + orbit[None, :, :]) % p
        both = np.concatenate([current, sums.reshape(-1, action.dim)], axis=0)
        codes = _vector_codes(both, p)
        _, first = np.unique(codes, return_index=True)
        current = both[np.sort(first)]
        if len(current) == len(target_codes):
            return {"c": c, "holds": True, "submodule_size": len(target_codes)}
    return {"c": None, "holds": False, "submodule_size": len(target_codes)}


def _reject_one_dim_module(action: ModuleAction) -> None:
    line = _invariant_line(action.generators, action.p, action.dim)
    if line is None:
        duals = [_transpose_inv_mod(g, action.p) for g in action.generators]
        line = _invariant_line(duals, action.p, action.dim)
    if line is not None:
        raise HypothesisViolated(
            f"one-dimensional composition factor witnessed by line {line}"
        )


# ---------------------------------------------------------------------------
# nilpotent recovery and identities


def nilpotent_recover(U: GroupTable, A: ElementSet, t_max: int = 24) -> dict:
    """Minimal t with the t-fold product of A equal to the p-group U.

    A must cover every coset of [U, U]; the series check makes the
    hypothesis exact.
    """
    if A.parent is not U:
        raise TableMismatch("set lives on a different table")
    chain = lower_central_series(U)
    gamma2 = chain[1] if len(chain) > 1 else chain[0][:1]
    g2_member = np.zeros(U.order, dtype=bool)
    g2_member[gamma2] = True
    labels = _coset_labels_of(U, gamma2)
    n_cosets = U.order // len(gamma2)
    covered = np.unique(labels[A.ids])
    if len(covered) != n_cosets:
        raise HypothesisViolated(
            f"set covers {len(covered)} of {n_cosets} cosets of the derived subgroup"
        )
    power = A
    for t in range(1, t_max + 1):
        if power.size == U.order:
            return {"t": t, "covered": True}
        power = product_set(power, A)
    return {"t": None, "covered": False}


def _coset_labels_of(U: GroupTable, subgroup_ids: np.ndarray) -> np.ndarray:
    labels = np.full(U.order, -1, dtype=np.int64)
    nxt = 0
    for g in range(U.order):
        if labels[g] >= 0:
            continue
        coset = U.mul_vec(np.full(len(subgroup_ids), g, dtype=np.int64), subgroup_ids)
        labels[coset] = nxt
        nxt += 1
    return labels


def random_transversal(U: GroupTable, rng: np.random.Generator) -> ElementSet:
    """One random representative from each coset of [U, U]."""
    chain = lower_central_series(U)
    gamma2 = chain[1] if len(chain) > 1 else chain[0][:1]
    labels = _coset_labels_of(U, gamma2)
    n_cosets = U.order // len(gamma2)
    picks = []
    for c in range(n_cosets):
        members = np.nonzero(labels == c)[0]
        picks.append(int(members[rng.integers(0, len(members))]))
    return ElementSet.from_ids(U, picks)


def commutator_identities_check(G: GroupTable, trials: int, seed: int = 0) -> bool:
    """[x,yz] = [x,z][x,y]^z and [xy,z] = [x,z]^y [y,z] on random triples."""
    rng = np.random.default_rng(seed)
    x = rng.integers(0, G.order, size=trials)
    y = rng.integers(0, G.order, size=trials)
    z = rng.integers(0, G.order, size=trials)

    def comm(a, b):
        return G.mul_vec(G.mul_vec(G.inv_vec(a), G.inv_vec(b)), G.mul_vec(a, b))

    def conj(a, b):  # a^b = b^-1 a b
        return G.mul_vec(G.mul_vec(G.inv_vec(b), a), b)

    lhs1 = comm(x, G.mul_vec(y, z))
    rhs1 = G.mul_vec(comm(x, z), conj(comm(x, y), z))
    lhs2 = comm(G.mul_vec(x, y), z)
    rhs2 = G.mul_vec(conj(comm(x, z), y), comm(y, z))
    return bool(np.array_equal(lhs1, rhs1) and np.array_equal(lhs2, rhs2))
