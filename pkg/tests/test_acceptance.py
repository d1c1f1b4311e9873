"""Release acceptance checklist.

Each numbered check prints one PASS/FAIL line (collected into the
terminal summary by conftest) and then asserts.  Expected values are
frozen; a failing check here means the library no longer reproduces a
quantity it is contractually supposed to reproduce.

Two checks are known-red on this machine and are expected to FAIL:

* 02a: the even-step return probability root at k = 100 sits at
  0.7225816..., below the required [0.73, 0.77] window (the asymptotic
  limit 3/4 is approached too slowly for the window to capture it at
  k = 100).
* 04a-trend: the second eigenvalue over the larger six primes exceeds
  the smaller five by 0.0449, above the allowed 0.02 drift.

Everything else is green.  Runtime for the whole module is a couple of
minutes; the heavy fixtures (group tables, eigenvalue sweeps) are cached
at module scope.
"""

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from expanderlab.cli import builtin_generators, main
from expanderlab.exact import RationalMatrix
from expanderlab.growth import chain_inequality, gowers_cover, random_symmetric_set
from expanderlab.quotient import (
    borel_subgroup,
    cyclic_group,
    direct_product,
    generate_group,
    product_decompose,
)
from expanderlab.spectral import (
    CayleyGraph,
    cheeger_bracket,
    edge_expansion_exact,
    escape_profile,
    spectrum,
    trace_moment,
    walk_powers,
    walk_trace_side,
)
from expanderlab.words import (
    ball_size,
    certify_free,
    kesten_return,
    radial_distribution,
    reduced_words,
)

REPORT_LINES: list[str] = []

GAP_PRIMES = (5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
SWEEP_PRIMES = (5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47,
                53, 59, 61, 67, 71, 73, 79, 83, 89, 97)
CONTROL_PRIMES = (53, 59, 61, 67, 71, 73, 79, 83, 89, 97)


def record(label: str, ok: bool, detail: str) -> None:
    line = f"criterion {label} {'PASS' if ok else 'FAIL'}: {detail}"
    REPORT_LINES.append(line)
    print(line, flush=True)
    assert ok, line


@lru_cache(maxsize=None)
def sl2(q: int):
    return generate_group(builtin_generators("lubotzky3"), q)


@lru_cache(maxsize=None)
def lam2_sweep() -> dict[int, float]:
    return {p: spectrum(CayleyGraph(sl2(p))).lam2 for p in GAP_PRIMES}


def positive_pair(t: str) -> list[RationalMatrix]:
    return [
        RationalMatrix([["1", t], ["0", "1"]]),
        RationalMatrix([["1", "0"], [t, "1"]]),
    ]


def cyclic_ids(G, residues) -> list[int]:
    rows = np.array([[r] for r in residues], dtype=np.int64)
    return [int(i) for i in G.id_of_rows(rows)]


def test_c01_ball_formula():
    worst = None
    for M in (2, 3):
        for l in range(1, 11):
            got = sum(1 for _ in reduced_words(M, l))
            want = 2 * M * (2 * M - 1) ** (l - 1)
            assert ball_size(M, l) == want
            if got != want:
                worst = (M, l, got, want)
    record("01", worst is None,
           f"sphere counts match 2M(2M-1)^(l-1) for M in (2,3), l <= 10"
           + ("" if worst is None else f"; first mismatch {worst}"))


def test_c02a_kesten_window():
    val = float(kesten_return(2, 400)) ** (1.0 / 200.0)
    ok = 0.73 <= val <= 0.77
    record("02a", ok,
           f"(P_200(0))^(1/200) = {val:.12f}, window [0.73, 0.77], target 0.75")


def test_c02b_partition_and_return_dominance():
    partition_ok = True
    dominance_ok = True
    for k in range(1, 51):
        probs = radial_distribution(2, k)
        total = sum(ball_size(2, l) * probs[l] for l in range(k + 1))
        if total != Fraction(1):
            partition_ok = False
        if k % 2 == 0 and any(probs[l] > probs[0] for l in range(1, k + 1)):
            dominance_ok = False
    record("02b", partition_ok and dominance_ok,
           f"partition identity exact for k <= 50: {partition_ok}; "
           f"P_k(l) <= P_k(0) at even k: {dominance_ok}")


def test_c03_strong_approximation():
    bad = []
    for p in SWEEP_PRIMES:
        if sl2(p).order != p * (p * p - 1):
            bad.append(p)
    G35 = sl2(35)
    _, meta = product_decompose(G35)
    ok = not bad and G35.order == 40320 and meta["bijective"]
    record("03", ok,
           f"|SL2(F_p)| = p(p^2-1) for all {len(SWEEP_PRIMES)} primes in [5, 97]"
           f"{' except ' + str(bad) if bad else ''}; "
           f"mod 35 order {G35.order}, decomposition bijective {meta['bijective']}")


def test_c04a_gap_ceiling():
    gaps = lam2_sweep()
    worst = max(gaps.values())
    record("04a-ceiling", worst <= 0.99,
           f"max lam2 over p in {GAP_PRIMES} is {worst:.6f} <= 0.99")


def test_c04a_gap_trend():
    gaps = lam2_sweep()
    small = max(gaps[p] for p in GAP_PRIMES[:5])
    large = max(gaps[p] for p in GAP_PRIMES[5:])
    record("04a-trend", large <= small + 0.02,
           f"max lam2 over larger six = {large:.6f}, over smaller five = "
           f"{small:.6f}, excess {large - small:.6f} (allowed 0.02)")


def test_c04b_abelian_control():
    u = RationalMatrix([["1", "1"], ["0", "1"]])
    worst_dev = 0.0
    min_gap = 1.0
    for p in CONTROL_PRIMES:
        G = generate_group([u], p)
        assert G.order == p
        lam2 = spectrum(CayleyGraph(G)).lam2
        worst_dev = max(worst_dev, abs(lam2 - math.cos(2 * math.pi / p)))
        min_gap = min(min_gap, lam2)
    ok = worst_dev <= 1e-9 and min_gap > 0.99
    record("04b", ok,
           f"cyclic quotients p >= 53: lam2 matches cos(2pi/p) to "
           f"{worst_dev:.2e}, smallest lam2 {min_gap:.6f} > 0.99")


def test_c05_multiplicity_floor():
    bad = []
    for p in (5, 7, 11, 13):
        rep = spectrum(CayleyGraph(sl2(p)), tol=1e-6)
        floor = (p - 1) // 2
        for value, size in rep.clusters:
            if abs(value - 1.0) > 1e-6 and size < floor:
                bad.append((p, value, size))
    record("05", not bad,
           "every non-unit eigenvalue cluster has size >= (p-1)/2 for "
           f"p in (5, 7, 11, 13)" + ("" if not bad else f"; violations {bad}"))


def test_c06_trace_identity():
    graph = CayleyGraph(sl2(7))
    rep = spectrum(graph)
    worst = 0.0
    for l in range(1, 9):
        lhs = trace_moment(graph, l, rep)
        rhs = walk_trace_side(graph, l)
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    record("06", worst <= 1e-6,
           f"Tr(T^2l) vs |G| * walk norm on SL2(F_7), l <= 8: "
           f"worst relative error {worst:.2e}")


def test_c07_escape_from_borel():
    G = sl2(61)
    H = borel_subgroup(G)
    rep = escape_profile(G, H, 40)
    series = rep.max_coset_series()
    dev = abs(series[39] - 1.0 / 62.0)
    monotone = all(series[l] <= series[l - 1] + 1e-12 for l in range(20, 40))
    ok = rep.index == 62 and dev <= 0.01 and monotone
    record("07", ok,
           f"Borel escape in SL2(F_61): index {rep.index}, m_40 = "
           f"{series[39]:.8f} (dev {dev:.2e} <= 0.01), "
           f"non-increasing past l = 20: {monotone}")


def test_c08_flattening_to_uniform():
    G = sl2(41)
    series = walk_powers(G, 200)
    l2 = series.l2_series()
    target = 1.0 / math.sqrt(G.order)
    within = [l for l in range(2, 201, 2) if l2[l - 1] <= 1.01 * target]
    first = within[0] if within else None
    strict = (first is not None
              and all(l2[l + 1] < l2[l - 1] for l in range(2, first, 2)))
    terminal = l2[199] / target
    ok = strict and abs(terminal - 1.0) <= 0.01
    record("08", ok,
           f"SL2(F_41) walk: strict even-step l2 decrease until within 1% of "
           f"|G|^-1/2 (reached at l = {first}), terminal ratio {terminal:.9f}")


def test_c09_growth_properties():
    rng = np.random.default_rng(20260817)
    G5 = sl2(5)
    chain_fails = 0
    for _ in range(1000):
        A = random_symmetric_set(G5, int(rng.integers(4, 60)), rng)
        if not chain_inequality(A, 5)["holds"]:
            chain_fails += 1
    G7 = sl2(7)
    gowers_fails = 0
    checked = 0
    for _ in range(200):
        sizes = rng.integers(240, 301, size=3)
        B1, B2, B3 = (random_symmetric_set(G7, int(s), rng) for s in sizes)
        rep = gowers_cover(B1, B2, B3, 3)
        assert rep["above_threshold"], sizes
        checked += 1
        if not (rep["covers"] and rep["consistent"]):
            gowers_fails += 1
    ok = chain_fails == 0 and gowers_fails == 0
    record("09", ok,
           f"chain inequality C = 5: {chain_fails}/1000 failures; "
           f"triple-product cover: {gowers_fails}/{checked} counterexamples")


def test_c10_structural_suite(tmp_path):
    out = tmp_path / "lemmas.csv"
    rc = main(["lemmas", "--p", "5", "--samples", "100", "--out", str(out)])
    rows = [l for l in out.read_text().splitlines()
            if l and not l.startswith("#") and not l.startswith("check,")]
    failed = [r.split(",")[0] for r in rows if not r.endswith(",true")]
    ok = rc == 0 and len(rows) >= 6 and not failed
    record("10", ok,
           f"structural suite exit code {rc}, {len(rows)} checks"
           + ("" if not failed else f", failed: {failed}"))


def test_c11_freeness_certificates():
    free, witness = certify_free(positive_pair("3"), 12)
    nonfree, relator = certify_free(positive_pair("1"), 6)
    ok = free and witness is None and not nonfree and relator is not None \
        and len(relator) <= 6
    record("11", ok,
           f"t = 3 pair free through length 12: {free}; t = 1 pair witness "
           f"{relator} at length {len(relator) if relator else '-'}")


def test_c12_cheeger_bracket():
    graphs = []
    for n in range(4, 19):
        graphs.append((f"cycle-{n}", CayleyGraph(cyclic_group(n))))
    for n in (6, 9, 12, 15, 18):
        G = cyclic_group(n)
        ids = cyclic_ids(G, (1, 2, n - 2, n - 1))
        graphs.append((f"circulant-{n}-12", CayleyGraph(G, ids)))
    G4 = cyclic_group(4)
    graphs.append(("K4", CayleyGraph(G4, cyclic_ids(G4, (1, 2, 3)))))
    G5 = cyclic_group(5)
    graphs.append(("K5", CayleyGraph(G5, cyclic_ids(G5, (1, 2, 3, 4)))))
    graphs.append(("Z3xZ4", CayleyGraph(direct_product(cyclic_group(3), cyclic_group(4)))))
    graphs.append(("Z2xZ9", CayleyGraph(direct_product(cyclic_group(2), cyclic_group(9)))))
    graphs.append(("Z4xZ4", CayleyGraph(direct_product(cyclic_group(4), cyclic_group(4)))))
    bad = []
    for name, graph in graphs:
        assert graph.order <= 18
        c = edge_expansion_exact(graph)
        degree = len(graph.perms)
        lo, hi = cheeger_bracket(spectrum(graph).lam2, degree)
        if not (lo - 1e-9 <= c <= hi + 1e-9):
            bad.append((name, c, lo, hi))
    record("12", not bad,
           f"exact expansion inside the spectral bracket on all "
           f"{len(graphs)} graphs with |V| <= 18"
           + ("" if not bad else f"; violations {bad}"))
