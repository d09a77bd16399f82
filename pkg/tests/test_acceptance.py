"""Acceptance suite: one test per criterion, each printing a pass/fail line.

A1  scene conformance over 1000 seeds, byte-exact determinism, < 10 s
A2  wind-free competence: 50 seeds, MSR 100 %, mean coverage >= 90 %,
    found rate 100 %, all mission times <= 1800 s, < 5 min runtime
A3  feedback ordering: 50 two-wind seeds, MSR(Full) - MSR(NoFeedback)
    >= 20 percentage points
A4  guard equals the brute-force geometric oracle on 10,000 randomized
    world states including the exact rule boundaries
A5  workload score: tagged examples exact to 1e-9; uniform-rating identity
    over 100 random weight draws
A6  coverage equals an independent per-cell recount on 100 random states
A7  planner soundness under a malicious reasoner for 1000 runs: no invalid
    program ever reaches the executor; every rejection carries a trace
A8  re-planned programs honor 100 random no-fly constraints exactly
"""
import math
import random
import time
from dataclasses import replace
from itertools import combinations

import numpy as np

from swarmsar import guard, simcore as S
from swarmsar.errors import PlanningError
from swarmsar.hil import AutoApprove, Session, WindAwareRejector, run_session
from swarmsar.intent import Intention
from swarmsar.kb import load_default_exemplars, load_default_kb
from swarmsar.metrics import TlxInput, coverage, msr, tlx_score
from swarmsar.mil import load_program, validate_program
from swarmsar.planner import generate_solution_package
from swarmsar.reasoner import RuleReasoner
from swarmsar.regions import Circle, Rect
from swarmsar.scene import generate_scene, scene_to_json

from test_guard import oracle_check, random_world, _as_pairs
from test_planner import MaliciousReasoner

KB = load_default_kb()
EXEMPLARS = load_default_exemplars()


def report(name: str, ok: bool, detail: str = "") -> None:
    print(f"\n[{name}] {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"{name} failed: {detail}"


def test_a1_scene_conformance():
    t0 = time.time()
    root = math.sqrt(2.0) * 500.0
    for seed in range(1000):
        s = generate_scene(seed)
        zx, zy = s.zone.center
        d = math.hypot(zx, zy)
        assert 600.0 < d <= root + 1e-9
        assert abs(zx) <= 500.0 and abs(zy) <= 500.0
        assert 5 <= len(s.obstacles) <= 10
        assert 1 <= len(s.survivors) <= 5
        assert 0 <= len(s.wind_zones) <= 2
        for o in s.obstacles:
            assert 10.0 <= o.height <= 45.0
            assert (
                math.hypot(o.center[0] - zx, o.center[1] - zy)
                + o.footprint_circumradius()
                <= 500.0 + 1e-6
            )
        for sv in s.survivors:
            assert 0.8 <= sv.signature <= 1.0
            assert math.hypot(sv.position[0] - zx, sv.position[1] - zy) <= 500.0
        for w in s.wind_zones:
            assert w.spawn_time > 60.0
            assert 50.0 <= w.radius <= 100.0
            assert 10.0 <= w.wind_speed <= 15.0
            assert math.hypot(w.center[0] - zx, w.center[1] - zy) <= 500.0
    # same-seed determinism, byte-exact
    for seed in (0, 7, 999):
        assert scene_to_json(generate_scene(seed)) == scene_to_json(generate_scene(seed))
    elapsed = time.time() - t0
    report("A1", elapsed < 10.0, f"1000 scenes conformant in {elapsed:.2f}s")


def test_a2_wind_free_competence():
    t0 = time.time()
    results = []
    for seed in range(1, 51):
        scene = generate_scene(seed, wind_zone_count=0)
        results.append(
            run_session(scene, KB, EXEMPLARS, RuleReasoner(), AutoApprove(), method="Full")
        )
    elapsed = time.time() - t0
    rate = msr(results)
    mean_cov = sum(r.coverage_pct for r in results) / len(results)
    found_ok = all(r.found_pct == 100.0 for r in results)
    tmt_ok = all(r.mission_time <= 1800.0 for r in results)
    ok = rate == 100.0 and mean_cov >= 90.0 and found_ok and tmt_ok and elapsed < 300.0
    report(
        "A2",
        ok,
        f"MSR {rate:.0f}%, mean coverage {mean_cov:.1f}%, found 100%: {found_ok}, "
        f"TMT<=1800: {tmt_ok}, runtime {elapsed:.0f}s",
    )


def test_a3_feedback_ordering():
    full, nofb = [], []
    for seed in range(1, 51):
        scene = generate_scene(seed, wind_zone_count=2)
        full.append(
            run_session(scene, KB, EXEMPLARS, RuleReasoner(), WindAwareRejector(), method="Full")
        )
        nofb.append(
            run_session(scene, KB, EXEMPLARS, RuleReasoner(), AutoApprove(), method="NoFeedback")
        )
    gap = msr(full) - msr(nofb)
    report(
        "A3",
        gap >= 20.0,
        f"MSR Full {msr(full):.0f}% vs NoFeedback {msr(nofb):.0f}% (gap {gap:.0f} pts)",
    )


def test_a4_guard_oracle_equivalence():
    rng = random.Random(42)
    scenes = [generate_scene(s, wind_zone_count=2) for s in (1, 2, 3, 4)]
    mismatches = 0
    for i in range(10000):
        world = random_world(rng, scenes[i % len(scenes)])
        if _as_pairs(guard.check(world)) != oracle_check(world):
            mismatches += 1

    # exact boundary cases on every rule constant
    scene = scenes[0]
    base = S.initial_world(scene)

    def place(w, uav, pos, status=S.ACTIVE):
        uavs = dict(w.uavs)
        uavs[uav] = replace(uavs[uav], position=pos, status=status)
        return replace(w, uavs=uavs)

    for d, expect in ((400.0, False), (400.0000001, True)):
        w = place(base, "UAV3", (0.0, 0.0, 50.0))
        w = place(w, "UAV1", (d, 0.0, 50.0))
        w = place(w, "UAV2", (0.0, 1.0, 50.0))
        got = guard.LINK_UAV in [v.kind for v in guard.check(w)]
        assert got is expect
        assert (("UAV1", guard.LINK_UAV) in oracle_check(w)) is expect
    for d, expect in ((1000.0, False), (1000.0000001, True)):
        w = place(base, "UAV3", (d, 0.0, 0.0))
        got = guard.LINK_BASE in [v.kind for v in guard.check(w)]
        assert got is expect
        assert (("UAV3", guard.LINK_BASE) in oracle_check(w)) is expect
    cx, cy = scene.zone.center
    for z, expect in ((50.0, True), (50.0000001, False)):
        w = place(base, "UAV2", (cx, cy, z))
        got = guard.UNMAPPED_LOW_ALTITUDE in [v.kind for v in guard.check(w)]
        assert got is expect
        assert (("UAV2", guard.UNMAPPED_LOW_ALTITUDE) in oracle_check(w)) is expect
    report("A4", mismatches == 0, f"10000 randomized states, {mismatches} disagreements")


def test_a5_workload_score_exactness():
    dims = ("MD", "PD", "TD", "Perf", "Eff", "Frus")

    def choices_with_weights(target):
        order = sorted(dims, key=lambda d: -target[d])
        return tuple(
            (a, b, a if order.index(a) < order.index(b) else b)
            for a, b in combinations(dims, 2)
        )

    # tagged example 1: all ratings 100 -> score 100 (weights sum to 15)
    c = choices_with_weights({d: i for i, d in enumerate(dims)})
    assert abs(tlx_score(TlxInput({d: 100.0 for d in dims}, c)) - 100.0) < 1e-9
    # tagged example 2: all zeros -> 0
    assert abs(tlx_score(TlxInput({d: 0.0 for d in dims}, c)) - 0.0) < 1e-9
    # tagged example 3: hand-evaluated weighted sum = 950/15
    ratings = dict(zip(dims, (80.0, 20.0, 60.0, 40.0, 70.0, 30.0)))
    weights = {"MD": 5, "PD": 0, "TD": 4, "Perf": 1, "Eff": 3, "Frus": 2}
    inp = TlxInput(ratings, choices_with_weights(weights))
    assert inp.weights() == weights
    assert abs(tlx_score(inp) - 950.0 / 15.0) < 1e-9

    # uniform-rating identity across 100 random weight draws
    rng = random.Random(17)
    for _ in range(100):
        r = rng.uniform(0.0, 100.0)
        choices = tuple((a, b, rng.choice((a, b))) for a, b in combinations(dims, 2))
        assert abs(tlx_score(TlxInput({d: r for d in dims}, choices)) - r) < 1e-9
    report("A5", True, "three tagged examples exact; uniform identity over 100 draws")


def test_a6_coverage_recount():
    rng = random.Random(31)
    world = S.initial_world(generate_scene(2, wind_zone_count=0))
    for _ in range(100):
        grid = world.grid.copy()
        mask = np.random.default_rng(rng.randrange(2**32)).random(
            (grid.cols, grid.rows)
        ) < rng.uniform(0.0, 1.0)
        grid.searched[:, :] = mask
        w = replace(world, grid=grid)
        num = den = 0
        for c in range(grid.cols):
            for r in range(grid.rows):
                if grid.in_zone[c, r]:
                    den += 1
                    if grid.searched[c, r]:
                        num += 1
        assert coverage(w) == (num / den) * 100.0
    report("A6", True, "coverage equals brute-force recount on 100 random grids")


def test_a7_planner_soundness_fuzz():
    rng = random.Random(1234)
    world = S.initial_world(generate_scene(7, wind_zone_count=0))
    zone = world.scene.zone
    intent = Intention(
        task_type="Composite",
        priority=3,
        spatial_context=Circle(zone.center[0], zone.center[1], zone.radius),
    )
    rejected = valid = 0
    for _ in range(1000):
        reasoner = MaliciousReasoner(rng)
        try:
            pkg = generate_solution_package(intent, world, KB, EXEMPLARS, reasoner)
        except PlanningError as e:
            assert isinstance(e.trace, list)
            rejected += 1
            continue
        # whatever survives must pass the executor's own gate
        validate_program(pkg.program)
        load_program(pkg.program)
        valid += 1
    report("A7", rejected > 0 and rejected + valid == 1000,
           f"1000 runs: {rejected} rejected with audit trace, {valid} valid programs")


def test_a8_constraint_honoring():
    rng = random.Random(88)
    scene = generate_scene(9, wind_zone_count=0)
    zone = scene.zone
    violations = 0
    checked = 0
    for i in range(100):
        if rng.random() < 0.5:
            geometry = Circle(
                zone.center[0] + rng.uniform(-400.0, 400.0),
                zone.center[1] + rng.uniform(-400.0, 400.0),
                rng.uniform(40.0, 150.0),
            )
            feedback = f"avoid circle({geometry.cx},{geometry.cy},{geometry.r})"
        else:
            x0 = zone.center[0] + rng.uniform(-450.0, 250.0)
            y0 = zone.center[1] + rng.uniform(-450.0, 250.0)
            geometry = Rect(x0, y0, x0 + rng.uniform(60.0, 250.0), y0 + rng.uniform(60.0, 250.0))
            feedback = f"avoid rect({geometry.x0},{geometry.y0},{geometry.x1},{geometry.y1})"

        class RejectWithGeometry:
            name = "scripted"
            reactive = False

            def __init__(self):
                self.done = False

            def decide(self, package, digest):
                from swarmsar.hil import Decision

                if self.done:
                    return Decision(approve=True)
                self.done = True
                return Decision(approve=False, feedback=feedback)

        session = Session(scene, KB, EXEMPLARS, RuleReasoner(), RejectWithGeometry())
        session.ground("run the full mission: map, search and relay")
        assert session.propose_until_approved()
        program = session.package.program
        assert geometry in program.no_fly

        # geometric audit: every explicit waypoint and every expanded lane
        # segment stays outside the constraint geometry
        nav_cache = {}
        for uav, instrs in program.uavs.items():
            pts = []
            for ins in instrs:
                if ins.op in ("GOTO", "LOITER"):
                    pts.append((float(ins.args["x"]), float(ins.args["y"])))
                elif ins.op == "LAWNMOWER":
                    alt = float(ins.args["alt"])
                    nav = nav_cache.get(alt)
                    if nav is None:
                        nav = session.world.nav_context_for(uav, alt, no_fly=program.no_fly)
                        nav_cache[alt] = nav
                    from swarmsar.mil import expand_instruction

                    for x, y, _ in expand_instruction(ins, nav=nav) or ():
                        pts.append((x, y))
            for x, y in pts:
                checked += 1
                if geometry.contains(x, y):
                    violations += 1
    report("A8", violations == 0,
           f"100 random constraints, {checked} audited points, {violations} inside geometry")
