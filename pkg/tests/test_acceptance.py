"""Acceptance criteria 1-10. Each test prints one PASS/FAIL line."""
import math
import time

import numpy as np

from lebesgue_lab import constructions as C
from lebesgue_lab import decomposition as D
from lebesgue_lab import sphere as S
from lebesgue_lab import witness as W
from lebesgue_lab.geometry import hemisphere_status, open_hemisphere_witness, origin_in_hull, simplex_diameter

SQRT3 = math.sqrt(3)
SQRT_8_3 = math.sqrt(8 / 3)
WING_BOUND = math.sqrt(2 + 2 / math.sqrt(3))


def verdict(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_criterion_01_equilateral_disk(capsys):
    start = time.perf_counter()
    d = C.build_equilateral_disk()
    mult = D.max_multiplicity(d, 1e-3, 1e-9).max_multiplicity
    analytic = [p.analytic_diameter for p in d.pieces]
    sampled = [D.piece_diameter(d, p.id, 1e-3) for p in d.pieces]
    elapsed = time.perf_counter() - start
    ok = (len(d.pieces) == 4 and mult == 2
          and all(abs(a - SQRT3) <= 1e-9 for a in analytic)
          # upper end allows float rounding only
          and all(SQRT3 - 5e-3 <= s <= SQRT3 + 1e-12 for s in sampled)
          and elapsed < 10)
    verdict(capsys, 1, ok, f"pieces={len(d.pieces)} max_mult={mult} "
                           f"analytic-sqrt3={max(abs(a - SQRT3) for a in analytic):.1e} "
                           f"sampled=[{min(sampled):.6f}, {max(sampled):.6f}] time={elapsed:.1f}s")


def test_criterion_02_five_piece_ball(capsys):
    start = time.perf_counter()
    d = C.build_simplex_ball(3, 1.01)
    rep = D.max_multiplicity(d, None, 1e-9, random=200_000, seed=2)
    core = d.pieces[0].analytic_diameter
    wings = [p.analytic_diameter for p in d.pieces[1:]]
    sampled_core = D.piece_diameter(d, 0, 0.02)
    elapsed = time.perf_counter() - start
    ok = (len(d.pieces) == 5 and rep.max_multiplicity == 3
          and SQRT_8_3 <= core <= 1.04 * SQRT_8_3
          and all(w <= WING_BOUND + 1e-9 for w in wings)
          and sampled_core <= core + 1e-9
          and elapsed < 60)
    verdict(capsys, 2, ok, f"max_mult={rep.max_multiplicity} over {rep.points_checked} points, "
                           f"core={core:.6f} in [{SQRT_8_3:.6f}, {1.04 * SQRT_8_3:.6f}], "
                           f"max wing={max(wings):.6f} <= {WING_BOUND:.6f}, time={elapsed:.1f}s")


def witness_corpus():
    corpus = {f"grid{n}d-k{k}": C.build_grid(n, k) for n in (2, 3) for k in range(2, 6)}
    corpus["bricks"] = C.build_offset_bricks()
    corpus["bricks-offset-0.125"] = C.build_offset_bricks(offset=0.125)
    corpus["bricks-0.4x0.3"] = C.build_offset_bricks(0.4, 0.3)
    corpus["hex-0.5x2"] = C.build_hex_prism(0.05, circumdiameter=0.5, layers=2)
    corpus["hex-0.3x3"] = C.build_hex_prism(0.05, circumdiameter=0.3, layers=3)
    return corpus


def test_criterion_03_covering_theorem(capsys):
    failures, checked = [], 0
    for name, d in witness_corpus().items():
        assert d.max_analytic_diameter() < 1, name
        rep = W.find_witness(d, delta=1e-6)
        confirmed = D.multiplicity_at(d, rep.point, 1e-6)[0]
        checked += 1
        if not (rep.success(d.dimension) and confirmed >= d.dimension + 1):
            failures.append(name)
    verdict(capsys, 3, not failures, f"{checked} decompositions with diameter < 1, failures={failures}")


def test_criterion_04_hex_sharpness(capsys):
    d = C.build_hex_prism(0.05)
    rep = D.max_multiplicity(d, 0.02, 1e-9, random=100_000, seed=4)
    sampled = D.diameter_report(d, 0.02)
    analytic = d.max_analytic_diameter()
    sampled_max = max(s for _, s, _, _ in sampled.per_piece)
    ok = rep.max_multiplicity == 3 and analytic <= 1.05 + 1e-12 and sampled_max <= 1.05 + 1e-12
    verdict(capsys, 4, ok, f"max_mult={rep.max_multiplicity} over {rep.points_checked} points, "
                           f"max diameter analytic={analytic:.6f} sampled={sampled_max:.6f}")


def test_criterion_05_fixed_point(capsys):
    errs = {}
    for n in (2, 3):
        x = W.fixed_point_search(W.HyperplaneFamily([0.5] * n), 1e-7)
        errs[f"hyperplane-{n}d"] = float(np.max(np.abs(x - 0.5)))
    a, b = np.array([[1.0, -0.5], [0.0, 1.0]]), np.array([0.25, 0.3])
    x = W.fixed_point_search(W.LinearFamily(a, b), 1e-7)
    errs["tilted"] = float(np.max(np.abs(x - np.linalg.solve(a, b))))
    ok = all(e < 1e-6 for e in errs.values())
    grid_ok = []
    families = [W.GridStaircaseFamily(2, 3),
                W.GridStaircaseFamily(2, 4, [{(0,): 1, (1,): 2, (2,): 2, (3,): 3},
                                             {(0,): 3, (1,): 3, (2,): 1, (3,): 1}]),
                W.GridStaircaseFamily(3, 3)]
    for f in families:
        x = W.fixed_point_search(f, 1e-6)
        vmax = float(np.max(np.abs(W.brouwer_vector(f, x))))
        corners = f.common_corners()
        near = float(np.min(np.linalg.norm(corners - x, axis=1))) if len(corners) else math.inf
        grid_ok.append(vmax < 1e-6 and near < 1e-4)
    ok = ok and all(grid_ok)
    verdict(capsys, 5, ok, "errors " + ", ".join(f"{k}={v:.1e}" for k, v in errs.items())
            + f"; grid families ok={grid_ok}")


def test_criterion_06_sphere_minimum(capsys):
    _, d2, runs2 = S.minimize_diameter(2, starts=100, seed=0)
    _, d3, runs3 = S.minimize_diameter(3, starts=100, seed=0)
    brute, angles = S.brute_force_triples(0.25)
    lowest2 = min(r.diameter for r in runs2)
    lowest3 = min(r.diameter for r in runs3)
    ok = (abs(d2 - SQRT3) < 1e-4 and abs(d3 - SQRT_8_3) < 1e-3
          and brute >= SQRT3 - 0.01
          and lowest2 >= simplex_diameter(2) - 1e-6 and lowest3 >= simplex_diameter(3) - 1e-6)
    verdict(capsys, 6, ok, f"n=2 best={d2:.8f} (sqrt3={SQRT3:.8f}), n=3 best={d3:.8f} "
                           f"(sqrt(8/3)={SQRT_8_3:.8f}), brute force min={brute:.6f} at {angles}")


def test_criterion_07_hemisphere_equivalence(capsys):
    rng = np.random.default_rng(7)
    disagree = degenerate = 0
    for _ in range(1000):
        n = int(rng.integers(2, 5))
        m = int(rng.integers(1, 9))
        p = rng.standard_normal((m, n))
        p /= np.linalg.norm(p, axis=1, keepdims=True)
        if hemisphere_status(p).degenerate:
            degenerate += 1
            continue
        if origin_in_hull(p) != (open_hemisphere_witness(p) is None):
            disagree += 1
    verdict(capsys, 7, disagree == 0,
            f"disagreements={disagree} over {1000 - degenerate} configs, degenerate rate={degenerate / 1000:.3f}")


def test_criterion_08_balance(capsys):
    t2, d2 = C.balance_scale(2)
    t3, d3 = C.balance_scale(3)
    ball = C.build_simplex_ball(3, t3)
    sampled = [D.piece_diameter(ball, pid, 0.02) for pid in (0, 1)]
    ok = (abs(t2 - 1.0) < 1e-6 and abs(d2 - SQRT3) < 1e-9
          and 1.6330 < d3 < 1.7761
          and all(abs(s - d3) < 5e-3 for s in sampled))
    verdict(capsys, 8, ok, f"n=2 t*={t2:.8f} diam={d2:.8f}; n=3 t*={t3:.8f} diam={d3:.8f}, "
                           f"sampled core/wing={sampled[0]:.5f}/{sampled[1]:.5f}")


def test_criterion_09_colorability(capsys):
    shells = D.color(D.adjacency_graph(C.build_shells(), 0.02, 1e-9))[1]
    pancakes = D.color(D.adjacency_graph(C.build_pancakes(), 0.02, 1e-9))[1]
    verdict(capsys, 9, shells == 2 and pancakes == 3, f"shells chromatic={shells}, pancakes chromatic={pancakes}")


def monotone_corpus():
    fine2 = [1 / 8, 1 / 16, 1 / 32, 1 / 64]
    fine3 = [1 / 4, 1 / 8, 1 / 16]
    return {
        "grid2d-k3": (C.build_grid(2, 3), fine2, False),
        # dyadic cell walls, so probe-free sampling lands on the corners
        "grid2d-k4": (C.build_grid(2, 4), fine2, True),
        "grid3d-k2": (C.build_grid(3, 2), fine3, True),
        "bricks": (C.build_offset_bricks(), fine2, True),
        "ball-grid": (C.build_ball_grid(2, 4), fine2, True),
        "shells": (C.build_shells(), fine2, False),
        "pancakes": (C.build_pancakes(), fine2, False),
        "simplex-ball": (C.build_simplex_ball(3, 1.01), fine3, False),
        "equilateral-disk": (C.build_equilateral_disk(), fine2, False),
        "hex-prism": (C.build_hex_prism(0.05), fine3, False),
    }


def test_criterion_10_monotonicity(capsys):
    problems = []
    rng = np.random.default_rng(10)
    for name, (d, levels, aligned) in monotone_corpus().items():
        seq = [D.max_multiplicity(d, h, 1e-9).max_multiplicity for h in levels]
        if seq != sorted(seq) or seq[-1] != d.declared_multiplicity:
            problems.append(f"{name}:{seq}")
        if aligned:
            bare = D.Decomposition(d.domain, d.pieces, d.provenance, None, d.declared_multiplicity)
            seq = [D.max_multiplicity(bare, h, 1e-9).max_multiplicity for h in levels]
            if seq != sorted(seq) or seq[-1] != d.declared_multiplicity:
                problems.append(f"{name}-grid-only:{seq}")
        pts = np.concatenate([d.domain_probes()[:50], d.domain.random(50, rng)])
        for x in pts:
            counts = [D.multiplicity_at(d, x, dl)[0] for dl in (1e-9, 1e-6, 1e-3, 1e-2, 1e-1)]
            if counts != sorted(counts):
                problems.append(f"{name}:delta")
                break
    verdict(capsys, 10, not problems, f"{len(monotone_corpus())} decompositions, problems={problems}")
