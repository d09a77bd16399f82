"""Guard rules plus the independent geometric oracle used to verify them.

The oracle rebuilds every predicate from primitive geometry (shapely for
footprints), sharing no code with the guard implementation.
"""
import math
import random
from dataclasses import replace

import pytest
from shapely.geometry import Point, Polygon

from swarmsar import guard, simcore as S
from swarmsar.scene import generate_scene

# --- independent oracle -------------------------------------------------------


def _footprint_shape(o):
    if o.kind == "cylinder":
        return Point(o.center).buffer(o.radius, quad_segs=256)
    return Polygon(o.footprint_corners())


def oracle_check(world, t_max=guard.T_MAX):
    """Brute-force re-derivation of every guard predicate."""
    out = []
    scene = world.scene
    for uav_id, s in world.uavs.items():
        if s.status != S.ACTIVE:
            continue
        x, y, z = s.position
        for o in scene.obstacles:
            dh = _footprint_shape(o).distance(Point(x, y))
            dv = max(0.0, z - o.height)
            if math.hypot(dh, dv) <= S.BODY_RADIUS + 1e-12:
                out.append((uav_id, guard.COLLISION))
                break
    s2 = world.uavs["UAV2"]
    if s2.status == S.ACTIVE and s2.position[2] <= 50.0:
        gx = (s2.position[0] - world.grid.origin[0]) / world.grid.cell_size
        gy = (s2.position[1] - world.grid.origin[1]) / world.grid.cell_size
        col, row = int(math.floor(gx)), int(math.floor(gy))
        if 0 <= col < world.grid.cols and 0 <= row < world.grid.rows:
            if not world.grid.mapped[col, row]:
                out.append(("UAV2", guard.UNMAPPED_LOW_ALTITUDE))
    relay = world.uavs["UAV3"]
    if relay.status == S.ACTIVE:
        for other in ("UAV1", "UAV2"):
            so = world.uavs[other]
            if so.status != S.ACTIVE:
                continue
            d = math.sqrt(sum((a - b) ** 2 for a, b in zip(so.position, relay.position)))
            if d > 400.0:
                out.append((other, guard.LINK_UAV))
        d = math.sqrt(sum((a - b) ** 2 for a, b in zip(relay.position, scene.base)))
        if d > 1000.0:
            out.append(("UAV3", guard.LINK_BASE))
    for uav_id, s in world.uavs.items():
        if s.status != S.ACTIVE:
            continue
        for w in scene.wind_zones:
            if world.time >= w.spawn_time:
                if math.dist(s.position, w.center) <= w.radius:
                    out.append((uav_id, guard.WIND_ENTRY))
                    break
    if world.time > t_max:
        out.append((None, guard.TIMEOUT))
    return sorted(out, key=str)


def _as_pairs(violations):
    return sorted(((v.uav, v.kind) for v in violations), key=str)


def random_world(rng, scene):
    w = S.initial_world(scene)
    grid = w.grid.copy()
    mask = rng.random() < 0.7
    if mask:
        # random mapped rows to exercise the altitude rule both ways
        for col in range(0, grid.cols, rng.randint(1, 4)):
            grid.mapped[col, :: rng.randint(1, 3)] = True
    statuses = [S.ACTIVE, S.GROUNDED, S.LANDED]
    uavs = {}
    cx, cy = scene.zone.center
    for uav_id in ("UAV1", "UAV2", "UAV3"):
        pos = (
            cx + rng.uniform(-700.0, 700.0),
            cy + rng.uniform(-700.0, 700.0),
            rng.uniform(0.0, 120.0),
        )
        uavs[uav_id] = replace(
            w.uavs[uav_id], position=pos, status=rng.choice(statuses)
        )
    return replace(
        w,
        uavs=uavs,
        grid=grid,
        time=rng.uniform(0.0, 2000.0),
    )


def test_guard_matches_oracle_randomized():
    rng = random.Random(2024)
    scenes = [generate_scene(s, wind_zone_count=2) for s in (1, 2, 3)]
    for i in range(2000):
        world = random_world(rng, scenes[i % len(scenes)])
        assert _as_pairs(guard.check(world)) == oracle_check(world), f"case {i}"


# --- targeted boundary cases ---------------------------------------------------


def place(world, uav_id, pos, status=S.ACTIVE):
    uavs = dict(world.uavs)
    uavs[uav_id] = replace(uavs[uav_id], position=pos, status=status)
    return replace(world, uavs=uavs)


@pytest.fixture(scope="module")
def base_world():
    return S.initial_world(generate_scene(7, wind_zone_count=2))


def test_link_uav_boundary_exact(base_world):
    w = place(base_world, "UAV3", (0.0, 0.0, 100.0))
    w = place(w, "UAV1", (400.0, 0.0, 100.0))
    w = place(w, "UAV2", (0.0, 10.0, 100.0))
    kinds = [v.kind for v in guard.check(w)]
    assert guard.LINK_UAV not in kinds  # exactly 400.0 is allowed

    w2 = place(w, "UAV1", (400.1, 0.0, 100.0))
    kinds2 = [v.kind for v in guard.check(w2)]
    assert guard.LINK_UAV in kinds2


def test_link_base_boundary_exact(base_world):
    w = place(base_world, "UAV3", (1000.0, 0.0, 0.0))
    w = place(w, "UAV1", (1000.0, 1.0, 0.0))
    w = place(w, "UAV2", (1000.0, -1.0, 0.0))
    assert guard.LINK_BASE not in [v.kind for v in guard.check(w)]
    w2 = place(w, "UAV3", (1000.1, 0.0, 0.0))
    assert guard.LINK_BASE in [v.kind for v in guard.check(w2)]


def test_unmapped_low_altitude_strict_at_50(base_world):
    scene = base_world.scene
    cx, cy = scene.zone.center
    w = place(base_world, "UAV2", (cx, cy, 50.0))
    w = place(w, "UAV1", (cx, cy, 50.0))
    w = place(w, "UAV3", (cx, cy, 50.0))
    kinds = [(v.uav, v.kind) for v in guard.check(w)]
    assert ("UAV2", guard.UNMAPPED_LOW_ALTITUDE) in kinds  # h must exceed 50
    # and the rule applies to the searcher only
    assert ("UAV1", guard.UNMAPPED_LOW_ALTITUDE) not in kinds

    w2 = place(base_world, "UAV2", (cx, cy, 50.01))
    assert guard.UNMAPPED_LOW_ALTITUDE not in [v.kind for v in guard.check(w2)]


def test_wind_entry_sphere_membership(base_world):
    z = base_world.scene.wind_zones[0]
    w = replace(base_world, time=z.spawn_time + 1.0)
    inside = (z.center[0] + z.radius - 1.0, z.center[1], z.center[2])
    w = place(w, "UAV1", inside)
    assert guard.WIND_ENTRY in [v.kind for v in guard.check(w)]

    outside = (z.center[0] + z.radius + 1.0, z.center[1], z.center[2])
    w2 = place(replace(base_world, time=z.spawn_time + 1.0), "UAV1", outside)
    assert guard.WIND_ENTRY not in [v.kind for v in guard.check(w2)]


def test_inactive_wind_zone_never_fires(base_world):
    z = base_world.scene.wind_zones[0]
    w = replace(base_world, time=z.spawn_time - 1.0)
    w = place(w, "UAV1", z.center)
    assert guard.WIND_ENTRY not in [v.kind for v in guard.check(w)]


def test_grounded_and_landed_exempt(base_world):
    scene = base_world.scene
    o = scene.obstacles[0]
    inside = (o.center[0], o.center[1], 1.0)
    w = place(base_world, "UAV1", inside, status=S.LANDED)
    w = place(w, "UAV2", (2000.0, 2000.0, 0.0), status=S.GROUNDED)
    kinds = [v.kind for v in guard.check(w)]
    assert guard.COLLISION not in kinds
    assert guard.LINK_UAV not in kinds


def test_timeout(base_world):
    w = replace(base_world, time=1800.5)
    assert guard.TIMEOUT in [v.kind for v in guard.check(w)]
    w2 = replace(base_world, time=1800.0)
    assert guard.TIMEOUT not in [v.kind for v in guard.check(w2)]
