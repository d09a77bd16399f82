import math
from dataclasses import replace

from swarmsar import simcore as S
from swarmsar.mil import Instruction, MissionProgram, load_program
from swarmsar.regions import Circle, Rect
from swarmsar.scene import generate_scene


def ins(op, args=None, label=None, wait_for=()):
    return Instruction(op=op, args=args or {}, label=label, wait_for=tuple(wait_for))


def world_with_uav(scene, uav_id, position, status=S.ACTIVE):
    w = S.initial_world(scene)
    uavs = dict(w.uavs)
    uavs[uav_id] = replace(uavs[uav_id], position=position, status=status)
    return replace(w, uavs=uavs)


def simple_plan(uav_id, *instructions):
    return load_program(MissionProgram(uavs={uav_id: tuple(instructions)}))


def test_straight_line_speed():
    scene = generate_scene(7, wind_zone_count=0)
    w = world_with_uav(scene, "UAV1", (0.0, 0.0, 50.0))
    plan = simple_plan("UAV1", ins("GOTO", {"x": 100.0, "y": 0.0, "z": 50.0}))
    w2 = S.step(w, plan)
    assert w2.uavs["UAV1"].position == (5.0, 0.0, 50.0)
    assert w2.time == 0.5


def test_speed_bound_never_exceeded():
    scene = generate_scene(11, wind_zone_count=0)
    w = S.initial_world(scene)
    program = MissionProgram(uavs={
        "UAV1": (
            ins("TAKEOFF", {"alt": 80.0}),
            ins("GOTO", {"x": 30.0, "y": 40.0, "z": 80.0}),
            ins("GOTO", {"x": -20.0, "y": 10.0, "z": 60.0}),
            ins("LAND"),
        ),
    })
    plan = load_program(program)
    for _ in range(200):
        w2 = S.step(w, plan)
        for uav in w.uavs:
            d = math.dist(w2.uavs[uav].position, w.uavs[uav].position)
            assert d / S.DT <= S.MAX_SPEED + 1e-9
        w = w2
        if S.program_complete(w, plan):
            break
    assert w.uavs["UAV1"].status == S.LANDED


def test_searcher_detects_overhead():
    scene = generate_scene(7, wind_zone_count=0)
    survivor = scene.survivors[0]
    pos = (survivor.position[0], survivor.position[1], 20.0)
    w = world_with_uav(scene, "UAV2", pos)
    plan = simple_plan("UAV2", ins("LOITER", {"x": pos[0], "y": pos[1], "z": 20.0, "duration": 5.0}))
    w2 = S.step(w, plan)
    assert survivor.id in w2.detected_ids()


def test_searcher_footprint_radius_equals_altitude():
    scene = generate_scene(7, wind_zone_count=0)
    survivor = scene.survivors[0]
    for offset, z, expected in [(19.9, 20.0, True), (25.0, 20.0, False), (25.0, 30.0, True)]:
        pos = (survivor.position[0] + offset, survivor.position[1], z)
        w = world_with_uav(scene, "UAV2", pos)
        plan = simple_plan("UAV2", ins("LOITER", {"x": pos[0], "y": pos[1], "z": z, "duration": 5.0}))
        w2 = S.step(w, plan)
        assert (survivor.id in w2.detected_ids()) is expected


def test_searcher_altitude_band_gates_sensing():
    scene = generate_scene(7, wind_zone_count=0)
    survivor = scene.survivors[0]
    pos = (survivor.position[0], survivor.position[1], 40.0)  # above the band
    w = world_with_uav(scene, "UAV2", pos)
    plan = simple_plan("UAV2", ins("LOITER", {"x": pos[0], "y": pos[1], "z": 40.0, "duration": 5.0}))
    w2 = S.step(w, plan)
    assert survivor.id not in w2.detected_ids()
    assert w2.grid.searched.sum() == w.grid.searched.sum()


def test_inspector_maps_footprint():
    scene = generate_scene(7, wind_zone_count=0)
    cx, cy = scene.zone.center
    w = world_with_uav(scene, "UAV1", (cx, cy, 100.0))
    plan = simple_plan("UAV1", ins("LOITER", {"x": cx, "y": cy, "z": 100.0, "duration": 5.0}))
    w2 = S.step(w, plan)
    grid = w2.grid
    col, row = grid.cell_of(cx, cy)
    assert grid.mapped[col, row]
    # a cell just inside the footprint edge is mapped, one outside is not
    col2, row2 = grid.cell_of(cx + 95.0, cy)
    assert grid.mapped[col2, row2]
    col3, row3 = grid.cell_of(cx + 155.0, cy)
    assert not grid.mapped[col3, row3]


def test_wait_for_blocks_until_emit():
    scene = generate_scene(7, wind_zone_count=0)
    w = S.initial_world(scene)
    program = MissionProgram(uavs={
        "UAV1": (
            ins("TAKEOFF", {"alt": 60.0}),
            ins("EMIT", {"label": "GO"}),
        ),
        "UAV2": (
            ins("TAKEOFF", {"alt": 60.0}, wait_for=("GO",)),
        ),
    })
    plan = load_program(program)
    w2 = S.step(w, plan)
    assert w2.uavs["UAV2"].status == S.GROUNDED  # blocked on GO
    for _ in range(30):
        w2 = S.step(w2, plan)
    assert "GO" in w2.completed_labels
    assert w2.uavs["UAV2"].status == S.ACTIVE


def test_monotonic_coverage_and_detections():
    scene = generate_scene(3, wind_zone_count=0)
    w = S.initial_world(scene)
    program = MissionProgram(uavs={
        "UAV1": (
            ins("TAKEOFF", {"alt": 100.0}),
            ins("GOTO", {"x": scene.zone.center[0], "y": scene.zone.center[1], "z": 100.0}),
            ins("LAND"),
        ),
    })
    plan = load_program(program)
    prev_mapped = 0
    prev_detections = 0
    for _ in range(400):
        w = S.step(w, plan)
        mapped = int(w.grid.mapped.sum())
        assert mapped >= prev_mapped
        assert len(w.detections) >= prev_detections
        prev_mapped, prev_detections = mapped, len(w.detections)
        if S.program_complete(w, plan):
            break


def test_determinism_of_trajectory():
    scene = generate_scene(5, wind_zone_count=0)
    program = MissionProgram(uavs={
        "UAV1": (
            ins("TAKEOFF", {"alt": 90.0}),
            ins("LAWNMOWER", {
                "region": Rect(scene.zone.center[0] - 200.0, scene.zone.center[1] - 200.0,
                               scene.zone.center[0] + 200.0, scene.zone.center[1] + 200.0),
                "lane_spacing": 150.0, "alt": 90.0,
            }),
            ins("LAND"),
        ),
    })

    def run():
        w = S.initial_world(scene)
        plan = load_program(program)
        log = []
        for _ in range(600):
            w = S.step(w, plan)
            log.append(tuple(w.uavs[u].position for u in ("UAV1", "UAV2", "UAV3")))
            if S.program_complete(w, plan):
                break
        return log

    assert run() == run()


def test_perceive_knowability():
    scene = generate_scene(7, wind_zone_count=2)
    w = S.initial_world(scene)
    whole = Rect(-1000.0, -1000.0, 1000.0, 1000.0)
    # nothing known at start: no obstacles, no survivors, no active wind
    assert S.perceive(w, whole) == []

    # mapping one cell of an obstacle reveals it
    obstacle = scene.obstacles[0]
    w2 = world_with_uav(scene, "UAV1", (obstacle.center[0], obstacle.center[1], 60.0))
    plan = simple_plan("UAV1", ins("LOITER", {"x": obstacle.center[0], "y": obstacle.center[1], "z": 60.0, "duration": 5.0}))
    w2 = S.step(w2, plan)
    ids = {o.object_id for o in S.perceive(w2, whole)}
    assert obstacle.id in ids
    # unmapped obstacles stay hidden
    revealed = w2.grid.knowable_obstacle_ids()
    for o in scene.obstacles:
        if o.id not in revealed:
            assert o.id not in ids

    # wind zones appear only once active
    w3 = replace(w2, time=max(z.spawn_time for z in scene.wind_zones) + 1.0)
    ids3 = {o.object_id for o in S.perceive(w3, whole)}
    for z in scene.wind_zones:
        assert z.id in ids3
        assert z.id not in ids


def test_perceive_degenerate_region_empty():
    scene = generate_scene(7, wind_zone_count=0)
    w = S.initial_world(scene)
    assert S.perceive(w, Circle(0.0, 0.0, 0.0)) == []
    assert S.perceive(w, Rect(10.0, 10.0, 10.0, 50.0)) == []


def test_perceive_matches_ground_truth_after_full_mapping():
    scene = generate_scene(7, wind_zone_count=0)
    w = S.initial_world(scene)
    grid = w.grid.copy()
    grid.mapped[:, :] = True
    w = replace(w, grid=grid)
    zone = Circle(scene.zone.center[0], scene.zone.center[1], scene.zone.radius)
    ids = {o.object_id for o in S.perceive(w, zone) if o.cls == "Obstacle"}
    assert ids == {o.id for o in scene.obstacles}


def test_relay_track_follows_midpoint():
    scene = generate_scene(7, wind_zone_count=0)
    w = S.initial_world(scene)
    uavs = dict(w.uavs)
    uavs["UAV1"] = replace(uavs["UAV1"], position=(200.0, 0.0, 100.0), status=S.ACTIVE)
    uavs["UAV2"] = replace(uavs["UAV2"], position=(400.0, 0.0, 30.0), status=S.ACTIVE)
    uavs["UAV3"] = replace(uavs["UAV3"], position=(300.0, 0.0, 100.0), status=S.ACTIVE)
    w = replace(w, uavs=uavs)
    plan = load_program(MissionProgram(uavs={
        "UAV3": (ins("RELAY_TRACK", {
            "targets": ["UAV1", "UAV2"], "alt": 100.0,
            "clamp_center": [0.0, 0.0], "clamp_radius": 990.0,
        }),),
    }))
    w2 = S.step(w, plan)
    # already at the midpoint: stays put
    assert math.dist(w2.uavs["UAV3"].position, (300.0, 0.0, 100.0)) < 1e-9
