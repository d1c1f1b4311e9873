"""Measures, convolution walks, and Cayley graph spectra.

Walks are driven by the normalized counting measure on a symmetric
generator multiset S.  One step sends mu to the average of its left
translates by S, so step l of the walk is the l-fold convolution power
chi_S^(l).  Exact mode keeps the weights as Fractions; everything else
runs in float64.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import math

import numpy as np

from .errors import SizeCapExceeded, TableMismatch
from .quotient import GroupTable, SubgroupRecord

EXACT_CAP = 10_000
DENSE_EIG_CAP = 5000
MASS_TOL = 1e-12
CLUSTER_TOL = 1e-6


class Measure:
    """Probability measure on a group table, dense weights indexed by id."""

    def __init__(self, table: GroupTable, weights: np.ndarray, exact: bool = False):
        self.table = table
        self.weights = weights
        self.exact = exact

    @classmethod
    def point(cls, table: GroupTable, gid: int = 0, exact: bool = False) -> "Measure":
        if exact:
            w = np.array([Fraction(0)] * table.order, dtype=object)
            w[gid] = Fraction(1)
        else:
            w = np.zeros(table.order)
            w[gid] = 1.0
        return cls(table, w, exact)

    @classmethod
    def uniform_on(cls, table: GroupTable, ids: Sequence[int], exact: bool = False) -> "Measure":
        ids = np.asarray(ids, dtype=np.int64)
        if exact:
            w = np.array([Fraction(0)] * table.order, dtype=object)
            share = Fraction(1, len(ids))
            # a multiset is allowed: repeated ids accumulate weight
            for i in ids.tolist():
                w[i] += share
        else:
            w = np.zeros(table.order)
            np.add.at(w, ids, 1.0 / len(ids))
        return cls(table, w, exact)

    @classmethod
    def uniform(cls, table: GroupTable, exact: bool = False) -> "Measure":
        return cls.uniform_on(table, np.arange(table.order), exact)

    def mass(self) -> float | Fraction:
        return self.weights.sum()

    def mass_on(self, mask: np.ndarray) -> float | Fraction:
        return self.weights[mask].sum()

    def l2_squared(self) -> float | Fraction:
        return (self.weights * self.weights).sum()

    def l2(self) -> float:
        return math.sqrt(float(self.l2_squared()))

    def linf(self) -> float | Fraction:
        return self.weights.max()

    def check_probability(self) -> None:
        w = self.weights
        if self.exact:
            if any(x < 0 for x in w) or w.sum() != 1:
                raise ValueError("exact measure is not a probability measure")
        else:
            if w.min() < -MASS_TOL or abs(float(w.sum()) - 1.0) > MASS_TOL:
                raise ValueError("weights do not sum to 1 within tolerance")

    def copy(self) -> "Measure":
        return Measure(self.table, self.weights.copy(), self.exact)


def convolve(mu: Measure, nu: Measure) -> Measure:
    """(mu*nu)(g) = sum_h mu(g h^-1) nu(h).

    Runs in O(|G| * min(|supp mu|, |supp nu|)) by looping over the
    sparser factor; the translation tables are built on the fly so a
    dense support cannot flood the permutation cache.
    """
    if mu.table is not nu.table:
        raise TableMismatch("measures live on different tables")
    G = mu.table
    if mu.exact != nu.exact:
        raise TableMismatch("cannot mix exact and float measures")
    if mu.exact:
        out = np.array([Fraction(0)] * G.order, dtype=object)
    else:
        out = np.zeros(G.order)
    supp_mu = np.nonzero(mu.weights)[0]
    supp_nu = np.nonzero(nu.weights)[0]
    if len(supp_nu) <= len(supp_mu):
        # loop over h: add nu(h) * (right translate of mu by h)
        hinv = G.inv_vec(supp_nu)
        for h, hi in zip(supp_nu.tolist(), hinv.tolist()):
            rows = G._mul_rows(G.digits, np.broadcast_to(G.digits[hi], G.digits.shape))
            out = out + nu.weights[h] * mu.weights[G.id_of_rows(rows)]
    else:
        # same sum rearranged: sum_x mu(x) nu(x^-1 g)
        xinv = G.inv_vec(supp_mu)
        for x, xi in zip(supp_mu.tolist(), xinv.tolist()):
            rows = G._mul_rows(np.broadcast_to(G.digits[xi], G.digits.shape), G.digits)
            out = out + mu.weights[x] * nu.weights[G.id_of_rows(rows)]
    return Measure(G, out, mu.exact)


def generator_measure(table: GroupTable, gen_ids: Sequence[int] | None = None, exact: bool = False) -> Measure:
    """chi_S: the normalized counting measure on the generator multiset."""
    ids = table.generator_ids if gen_ids is None else np.asarray(gen_ids, dtype=np.int64)
    return Measure.uniform_on(table, ids, exact)


def walk_step(mu: Measure, gen_ids: Sequence[int]) -> Measure:
    """One convolution by chi_S, via cached left-translation permutations."""
    G = mu.table
    ids = [int(s) for s in gen_ids]
    acc = None
    for s in ids:
        term = mu.weights[G.left_perm(s)]
        acc = term if acc is None else acc + term
    if mu.exact:
        out = acc / len(ids)
    else:
        out = acc / float(len(ids))
    return Measure(G, out, mu.exact)


@dataclass
class WalkRow:
    l: int
    l2_norm: float
    linf: float
    mass_on_H: float


@dataclass
class WalkSeries:
    rows: list[WalkRow]
    final: Measure
    gen_ids: list[int]

    def l2_series(self) -> list[float]:
        return [r.l2_norm for r in self.rows]


def walk_powers(
    table: GroupTable,
    l_max: int,
    gen_ids: Sequence[int] | None = None,
    H: SubgroupRecord | None = None,
    exact: bool = False,
    keep: bool = False,
) -> WalkSeries | tuple[WalkSeries, list[Measure]]:
    """Iterate chi_S^(l) for l = 1..l_max, recording norms per step.

    mass_on_H is the weight of the subgroup itself (identity coset);
    with no subgroup given it degenerates to the return probability
    chi^(l)(identity).
    """
    if exact and table.order > EXACT_CAP:
        raise SizeCapExceeded(f"exact walks capped at {EXACT_CAP} elements")
    ids = table.generator_ids if gen_ids is None else np.asarray(gen_ids, dtype=np.int64)
    ids = [int(x) for x in ids]
    if H is not None and H.parent is not table:
        raise TableMismatch("subgroup belongs to a different table")
    mask = None
    if H is not None:
        mask = H.member
    mu = Measure.point(table, table.identity_id, exact)
    rows = []
    kept = []
    for l in range(1, l_max + 1):
        mu = walk_step(mu, ids)
        if mask is None:
            h_mass = float(mu.weights[table.identity_id])
        else:
            h_mass = float(mu.mass_on(mask))
        rows.append(WalkRow(l, mu.l2(), float(mu.linf()), h_mass))
        if keep:
            kept.append(mu.copy())
    series = WalkSeries(rows=rows, final=mu, gen_ids=ids)
    return (series, kept) if keep else series


@dataclass
class FlattenReport:
    lhs: float
    rhs: float
    delta_hat: float


def flatten_check(mu: Measure, nu: Measure) -> FlattenReport:
    """Both sides of the flattening inequality plus the implied exponent.

    lhs = ||mu*nu||_2, rhs = ||mu||_2^(1/2) ||nu||_2^(1/2), and delta_hat
    solves lhs = ||mu||_2^(1/2+delta) ||nu||_2^(1/2).  A point mass has
    ||mu||_2 = 1 and carries no flattening information; the exponent is
    reported as 0.0 in that degenerate case.
    """
    prod = convolve(mu, nu)
    lhs = prod.l2()
    m2 = mu.l2()
    n2 = nu.l2()
    rhs = math.sqrt(m2) * math.sqrt(n2)
    log_m = math.log(m2) if m2 > 0 else 0.0
    if abs(log_m) < 1e-12:
        delta = 0.0
    else:
        delta = math.log(lhs / rhs) / log_m
    return FlattenReport(lhs=lhs, rhs=rhs, delta_hat=delta)


def walk_flatten_exponent(series: WalkSeries, l: int) -> FlattenReport:
    """Flattening report for mu = nu = chi^(l), read off the walk series.

    chi^(l) * chi^(l) = chi^(2l), so both sides of the inequality come
    from the recorded norms; the series must reach step 2l.
    """
    if 2 * l > len(series.rows):
        raise ValueError(f"series must reach step {2 * l}")
    m2 = series.rows[l - 1].l2_norm
    lhs = series.rows[2 * l - 1].l2_norm
    rhs = m2  # sqrt(m2) * sqrt(m2)
    log_m = math.log(m2)
    delta = math.log(lhs / rhs) / log_m if abs(log_m) > 1e-12 else 0.0
    return FlattenReport(lhs=lhs, rhs=rhs, delta_hat=delta)


def coset_labels(G: GroupTable, H: SubgroupRecord) -> np.ndarray:
    """labels[g] = index of the left coset gH, identity coset first."""
    labels = np.full(G.order, -1, dtype=np.int64)
    h_ids = H.element_ids
    nxt = 0
    for g in range(G.order):
        if labels[g] >= 0:
            continue
        coset = G.mul_vec(np.full(len(h_ids), g, dtype=np.int64), h_ids)
        labels[coset] = nxt
        nxt += 1
    return labels


@dataclass
class EscapeRow:
    l: int
    l2_norm: float
    linf: float
    mass_on_H: float
    max_coset_mass: float


@dataclass
class EscapeReport:
    rows: list[EscapeRow]
    index: int
    settled: bool
    epsilon: float

    def max_coset_series(self) -> list[float]:
        return [r.max_coset_mass for r in self.rows]


def escape_profile(
    G: GroupTable,
    H: SubgroupRecord,
    l_max: int,
    gen_ids: Sequence[int] | None = None,
    epsilon: float = 0.01,
) -> EscapeReport:
    """Track m_l = max_g chi^(l)(gH) along the walk.

    The walk has escaped once the heaviest coset carries no more than
    2/[G:H] + epsilon, the stationary share with room to spare.
    """
    ids = G.generator_ids if gen_ids is None else np.asarray(gen_ids, dtype=np.int64)
    ids = [int(x) for x in ids]
    labels = coset_labels(G, H)
    mu = Measure.point(G, G.identity_id)
    rows = []
    for l in range(1, l_max + 1):
        mu = walk_step(mu, ids)
        coset_mass = np.bincount(labels, weights=mu.weights, minlength=H.index)
        rows.append(
            EscapeRow(
                l=l,
                l2_norm=mu.l2(),
                linf=float(mu.linf()),
                mass_on_H=float(coset_mass[labels[G.identity_id]]),
                max_coset_mass=float(coset_mass.max()),
            )
        )
    target = 2.0 / H.index + epsilon
    settled = bool(rows and rows[-1].max_coset_mass <= target)
    return EscapeReport(rows=rows, index=H.index, settled=settled, epsilon=epsilon)


# ---------------------------------------------------------------------------
# spectra


class CayleyGraph:
    """k-regular multigraph on the group, x adjacent to sx for s in S."""

    def __init__(self, table: GroupTable, s_ids: Sequence[int] | None = None):
        self.table = table
        ids = table.generator_ids if s_ids is None else np.asarray(s_ids, dtype=np.int64)
        self.s_ids = np.asarray([int(x) for x in ids], dtype=np.int64)
        inv = set(int(x) for x in table.inv_vec(self.s_ids))
        if inv != set(int(x) for x in self.s_ids):
            raise ValueError("generator multiset must be symmetric")
        self.degree = len(self.s_ids)
        self.perms = [table.left_perm(int(s)) for s in self.s_ids]

    @property
    def order(self) -> int:
        return self.table.order

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """T v, with T the degree-normalized adjacency operator."""
        acc = np.zeros_like(vec, dtype=np.float64)
        for p in self.perms:
            acc += vec[p]
        return acc / self.degree

    def dense_operator(self) -> np.ndarray:
        n = self.order
        if n > DENSE_EIG_CAP:
            raise SizeCapExceeded(f"dense operator capped at {DENSE_EIG_CAP} vertices")
        T = np.zeros((n, n))
        rows = np.arange(n)
        for p in self.perms:
            np.add.at(T, (rows, p), 1.0)
        return T / self.degree


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray  # descending; the full spectrum unless partial
    clusters: list[tuple[float, int]] = field(default_factory=list)
    lam2: float = 0.0
    lam_star: float = 0.0
    partial: bool = False
    bottom: np.ndarray | None = None  # most negative eigenvalues, ascending


def _cluster(values: np.ndarray, tol: float = CLUSTER_TOL) -> list[tuple[float, int]]:
    clusters = []
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i - 1] - values[i] > tol:
            block = values[start:i]
            clusters.append((float(block.mean()), len(block)))
            start = i
    return clusters


def spectrum(
    graph: CayleyGraph,
    max_eigs: int = 20,
    dense_cap: int = DENSE_EIG_CAP,
    tol: float = CLUSTER_TOL,
) -> SpectrumReport:
    """Eigenvalues of the normalized adjacency operator.

    Small graphs get the full symmetric eigensolve.  Larger ones fall
    back to an implicitly restarted Lanczos run (ARPACK) on the
    permutation-action operator, returning the extreme eigenvalues from
    both ends of the spectrum and flagging the report as partial.
    """
    n = graph.order
    if n <= dense_cap:
        T = graph.dense_operator()
        w = np.linalg.eigvalsh(T)[::-1]
        report = SpectrumReport(eigenvalues=w)
    else:
        from scipy.sparse.linalg import LinearOperator, eigsh

        op = LinearOperator((n, n), matvec=graph.apply, dtype=np.float64)
        k = min(max_eigs, n - 2)
        v0 = np.cos(np.arange(n) * 0.7) + 1.3  # deterministic start
        top = eigsh(op, k=k, which="LA", v0=v0, tol=1e-11, return_eigenvectors=False)
        bot = eigsh(op, k=min(4, k), which="SA", v0=v0, tol=1e-11, return_eigenvectors=False)
        w = np.sort(top)[::-1]
        report = SpectrumReport(eigenvalues=w, partial=True, bottom=np.sort(bot))
    vals = report.eigenvalues
    if abs(vals[0] - 1.0) > 1e-9:
        raise ValueError("leading eigenvalue is not 1; operator is broken")
    report.clusters = _cluster(vals, tol)
    report.lam2 = float(vals[1]) if len(vals) > 1 else float("nan")
    low = report.bottom[0] if report.partial else vals[-1]
    report.lam_star = float(max(abs(report.lam2), abs(low)))
    return report


def trace_moment(graph: CayleyGraph, l: int, report: SpectrumReport | None = None) -> float:
    """Tr(T^{2l}) = sum_i lambda_i^{2l}, from the full spectrum."""
    if report is None:
        report = spectrum(graph)
    if report.partial:
        raise SizeCapExceeded("trace moment needs the full spectrum")
    return float((report.eigenvalues ** (2 * l)).sum())


def walk_trace_side(graph: CayleyGraph, l: int) -> float:
    """|G| * ||chi^(l)||_2^2, the walk side of the trace identity."""
    if l == 0:
        return float(graph.order)
    series = walk_powers(graph.table, l, gen_ids=graph.s_ids)
    return graph.order * series.rows[-1].l2_norm ** 2


EXPANSION_CAP = 20


def edge_expansion_exact(graph: CayleyGraph) -> float:
    """Exact c = min |boundary(X)| / |X| over nonempty X, |X| <= |V|/2.

    Boundary edges are counted in the multigraph sense: one per pair
    (x in X, s in S) with sx outside X.  Exhaustive over all 2^n subsets,
    so the graph is capped at 20 vertices.
    """
    n = graph.order
    if n > EXPANSION_CAP:
        raise SizeCapExceeded(f"exact expansion capped at {EXPANSION_CAP} vertices")
    masks = np.arange(1, 1 << n, dtype=np.uint32)
    size = np.zeros(len(masks), dtype=np.uint8)
    for x in range(n):
        size += ((masks >> x) & 1).astype(np.uint8)
    boundary = np.zeros(len(masks), dtype=np.uint16)
    for p in graph.perms:
        for x in range(n):
            inside = (masks >> x) & 1
            out = 1 - ((masks >> int(p[x])) & 1)
            boundary += (inside & out).astype(np.uint16)
    keep = size <= n // 2
    ratios = boundary[keep] / size[keep]
    return float(ratios.min())


def cheeger_bracket(lam2: float, degree: int) -> tuple[float, float]:
    """Dodziuk-style two-sided bound on edge expansion for a k-regular
    graph with normalized second eigenvalue lam2."""
    gap = 1.0 - lam2
    return (degree * gap / 2.0, degree * math.sqrt(max(2.0 * gap, 0.0)))
