import math

import pytest

from swarmsar.errors import MilValidationError
from swarmsar.mil import (
    Instruction,
    MissionProgram,
    NavContext,
    expand_lawnmower,
    expand_orbit,
    load_program,
    program_from_json,
    validate_program,
)
from swarmsar.regions import Circle, Rect


def ins(op, args=None, label=None, wait_for=()):
    return Instruction(op=op, args=args or {}, label=label, wait_for=tuple(wait_for))


def test_lawnmower_three_lanes_serpentine():
    # oracle: 100x100 rect, 50 m spacing -> lanes at x = 0, 50, 100,
    # serpentine, so six waypoints with alternating lane direction
    wps = expand_lawnmower(Rect(0.0, 0.0, 100.0, 100.0), 50.0, 20.0)
    assert wps == [
        (0.0, 0.0, 20.0),
        (0.0, 100.0, 20.0),
        (50.0, 100.0, 20.0),
        (50.0, 0.0, 20.0),
        (100.0, 0.0, 20.0),
        (100.0, 100.0, 20.0),
    ]


def test_lawnmower_orientation_from_corner_order():
    # swapped corners sweep from the other side and start southbound
    wps = expand_lawnmower(Rect(100.0, 100.0, 0.0, 0.0), 50.0, 20.0)
    assert wps[0] == (100.0, 100.0, 20.0)
    assert wps[1] == (100.0, 0.0, 20.0)
    assert wps[-1][0] == 0.0


def test_lawnmower_circle_clipped_to_chords():
    wps = expand_lawnmower(Circle(0.0, 0.0, 100.0), 100.0, 20.0)
    for x, y, _ in wps:
        assert math.hypot(x, y) <= 100.0 + 1e-9


def test_orbit_discretization():
    wps = expand_orbit((0.0, 0.0), 100.0, 50.0, 1.0)
    assert len(wps) == 36
    for x, y, z in wps:
        assert math.hypot(x, y) == pytest.approx(100.0)
        assert z == 50.0
    assert wps[-1][0] == pytest.approx(100.0)
    assert wps[-1][1] == pytest.approx(0.0, abs=1e-9)
    assert len(expand_orbit((0.0, 0.0), 50.0, 30.0, 0.5)) == 18


def test_wait_for_cycle_rejected():
    program = MissionProgram(uavs={
        "UAV1": (ins("EMIT", {"label": "A"}),
                 ins("EMIT", {"label": "B"}, wait_for=("C",))),
        "UAV2": (ins("EMIT", {"label": "C"}, wait_for=("A",)),),
    })
    validate_program(program)  # cross-UAV forward waits are fine

    cyclic = MissionProgram(uavs={
        "UAV1": (ins("EMIT", {"label": "A"}, wait_for=("B",)),),
        "UAV2": (ins("EMIT", {"label": "B"}, wait_for=("A",)),),
    })
    with pytest.raises(MilValidationError, match="dependency cycle"):
        validate_program(cyclic)


def test_unknown_label_rejected():
    program = MissionProgram(uavs={
        "UAV1": (ins("GOTO", {"x": 0, "y": 0, "z": 10}, wait_for=("NOPE",)),),
    })
    with pytest.raises(MilValidationError, match="unknown label"):
        validate_program(program)


def test_duplicate_label_rejected():
    program = MissionProgram(uavs={
        "UAV1": (ins("EMIT", {"label": "L"}), ins("EMIT", {"label": "L"})),
    })
    with pytest.raises(MilValidationError, match="duplicate label"):
        validate_program(program)


def test_unknown_uav_and_op_rejected():
    with pytest.raises(MilValidationError, match="unknown UAV"):
        validate_program(MissionProgram(uavs={"UAV9": ()}))
    with pytest.raises(MilValidationError, match="unknown op"):
        validate_program(MissionProgram(uavs={"UAV1": (ins("FLY"),)}))
    with pytest.raises(MilValidationError, match="missing arg"):
        validate_program(MissionProgram(uavs={"UAV1": (ins("GOTO", {"x": 1}),)}))


def test_negative_altitudes_rejected():
    with pytest.raises(MilValidationError, match="non-negative"):
        validate_program(MissionProgram(uavs={
            "UAV1": (ins("GOTO", {"x": 0.0, "y": 0.0, "z": -5.0}),),
        }))
    with pytest.raises(MilValidationError, match="altitude must be positive"):
        validate_program(MissionProgram(uavs={
            "UAV1": (ins("TAKEOFF", {"alt": 0.0}),),
        }))


def test_program_json_round_trip():
    program = MissionProgram(
        uavs={
            "UAV1": (
                ins("TAKEOFF", {"alt": 100.0}),
                ins("LAWNMOWER", {
                    "region": Rect(0.0, 0.0, 100.0, 100.0),
                    "lane_spacing": 50.0,
                    "alt": 100.0,
                }),
                ins("EMIT", {"label": "DONE"}),
                ins("LAND"),
            ),
            "UAV3": (
                ins("TAKEOFF", {"alt": 100.0}),
                ins("RELAY_TRACK", {
                    "targets": ["UAV1"], "alt": 100.0,
                    "clamp_center": [0.0, 0.0], "clamp_radius": 990.0,
                }, wait_for=("DONE",)),
            ),
        },
        no_fly=(Circle(1.0, 2.0, 3.0),),
    )
    parsed = program_from_json(program.to_json())
    assert parsed == program


def test_detour_routes_around_blocked_cells():
    nav = NavContext(
        origin=(0.0, 0.0), cell_size=10.0, cols=40, rows=40,
        no_fly=(Circle(200.0, 200.0, 60.0),), altitude=30.0,
    )
    wps = expand_lawnmower(Rect(200.0, 0.0, 200.0, 400.0), 60.0, 30.0, nav=nav)
    assert len(wps) > 2
    for x, y, _ in wps:
        assert math.hypot(x - 200.0, y - 200.0) > 60.0
    # still reaches both lane ends
    assert wps[0][1] == 0.0
    assert wps[-1][1] == 400.0


def test_segment_traversal_detects_blocked_cells():
    nav = NavContext(
        origin=(0.0, 0.0), cell_size=10.0, cols=20, rows=20,
        no_fly=(Rect(90.0, 90.0, 110.0, 110.0),),
    )
    assert not nav.segment_clear(50.0, 100.0, 150.0, 100.0)
    assert nav.segment_clear(50.0, 10.0, 150.0, 10.0)


def test_load_program_preview():
    program = MissionProgram(uavs={
        "UAV1": (
            ins("TAKEOFF", {"alt": 50.0}),
            ins("LAWNMOWER", {
                "region": Rect(0.0, 0.0, 100.0, 100.0), "lane_spacing": 50.0,
                "alt": 50.0,
            }),
        ),
    })
    plan = load_program(program)
    wps = plan.preview_waypoints("UAV1")
    assert len(wps) == 6  # load-time preview expands the pattern
