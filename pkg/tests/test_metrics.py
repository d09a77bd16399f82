import math
import random
from dataclasses import replace
from itertools import combinations

import numpy as np
import pytest

from swarmsar import simcore as S
from swarmsar.errors import RangeError
from swarmsar.metrics import (
    MissionResult,
    TlxInput,
    aggregate,
    coverage,
    found_rate,
    msr,
    render_table,
    tlx_score,
    validate_tlx,
)
from swarmsar.scene import generate_scene
from swarmsar.simcore import Detection

DIMS = ("MD", "PD", "TD", "Perf", "Eff", "Frus")


def result(success=True, cov=90.0, found=100.0, t=900.0, method="Full", errored=False):
    return MissionResult(
        success=success, failure_cause=None if success else "X",
        coverage_pct=cov, found_pct=found, mission_time=t,
        seed=0, method=method, policy="p", errored=errored,
    )


def all_pairs_choices(winner_of):
    return tuple((a, b, winner_of(a, b)) for a, b in combinations(DIMS, 2))


# --- coverage -------------------------------------------------------------------


def test_coverage_zero_and_full():
    w = S.initial_world(generate_scene(7, wind_zone_count=0))
    assert coverage(w) == 0.0
    grid = w.grid.copy()
    grid.searched[:, :] = True
    assert coverage(replace(w, grid=grid)) == 100.0


def test_coverage_half_counts_only_zone_cells():
    w = S.initial_world(generate_scene(7, wind_zone_count=0))
    grid = w.grid.copy()
    in_zone = np.argwhere(grid.in_zone)
    half = len(in_zone) // 2
    for col, row in in_zone[:half]:
        grid.searched[col, row] = True
    # cells outside the zone disk never count
    grid.searched[0, 0] = True
    w2 = replace(w, grid=grid)
    expected = 100.0 * half / len(in_zone)
    assert coverage(w2) == pytest.approx(expected)


def test_coverage_equals_bruteforce_recount():
    rng = random.Random(99)
    w = S.initial_world(generate_scene(3, wind_zone_count=0))
    for _ in range(25):
        grid = w.grid.copy()
        mask = np.array(
            [[rng.random() < 0.3 for _ in range(grid.rows)] for _ in range(grid.cols)]
        )
        grid.searched[:, :] = mask
        w2 = replace(w, grid=grid)
        num = sum(
            1
            for c in range(grid.cols)
            for r in range(grid.rows)
            if grid.in_zone[c, r] and grid.searched[c, r]
        )
        den = sum(
            1 for c in range(grid.cols) for r in range(grid.rows) if grid.in_zone[c, r]
        )
        assert coverage(w2) == pytest.approx(100.0 * num / den)


# --- found rate -----------------------------------------------------------------


def test_found_rate_counts_distinct():
    scene = generate_scene(8, survivor_count=4, wind_zone_count=0)
    w = S.initial_world(scene)
    ids = [s.id for s in scene.survivors]
    detections = tuple(
        Detection(survivor_id=i, time=1.0, position=(0.0, 0.0)) for i in ids[:3]
    ) + (Detection(survivor_id=ids[0], time=2.0, position=(0.0, 0.0)),)
    w2 = replace(w, detections=detections)
    assert found_rate(w2) == pytest.approx(75.0)


# --- MSR ------------------------------------------------------------------------


def test_msr_basic():
    assert msr([result(True), result(False)]) == 50.0
    assert msr([result(True)] * 4) == 100.0
    assert msr([result(True)] * 47 + [result(False)] * 3) == pytest.approx(94.0)


def test_msr_excludes_errored():
    rows = [result(True), result(False, errored=True)]
    assert msr(rows) == 100.0
    with pytest.raises(RangeError):
        msr([result(False, errored=True)])


# --- TLX ------------------------------------------------------------------------


def test_tlx_uniform_identity():
    choices = all_pairs_choices(lambda a, b: a)
    assert tlx_score(TlxInput({d: 100.0 for d in DIMS}, choices)) == pytest.approx(100.0)
    assert tlx_score(TlxInput({d: 0.0 for d in DIMS}, choices)) == pytest.approx(0.0)
    for r in (13.0, 55.0, 80.0):
        assert tlx_score(TlxInput({d: r for d in DIMS}, choices)) == pytest.approx(r)


def test_tlx_hand_computed_case():
    ratings = dict(zip(DIMS, (80.0, 20.0, 60.0, 40.0, 70.0, 30.0)))
    target = {"MD": 5, "PD": 0, "TD": 4, "Perf": 1, "Eff": 3, "Frus": 2}

    # construct a choice set with exactly those win counts
    order = sorted(DIMS, key=lambda d: -target[d])
    choices = tuple((a, b, a if order.index(a) < order.index(b) else b)
                    for a, b in combinations(DIMS, 2))
    inp = TlxInput(ratings, choices)
    assert inp.weights() == target
    assert tlx_score(inp) == pytest.approx((400 + 0 + 240 + 40 + 210 + 60) / 15.0)


def test_tlx_order_invariance():
    rng = random.Random(5)
    ratings = dict(zip(DIMS, (80.0, 20.0, 60.0, 40.0, 70.0, 30.0)))
    choices = list(all_pairs_choices(lambda a, b: rng.choice((a, b))))
    base = tlx_score(TlxInput(ratings, tuple(choices)))
    for _ in range(10):
        rng.shuffle(choices)
        assert tlx_score(TlxInput(ratings, tuple(choices))) == pytest.approx(base)


def test_tlx_linear_in_each_rating():
    choices = all_pairs_choices(lambda a, b: a)
    ratings = {d: 50.0 for d in DIMS}
    for dim in DIMS:
        lo = tlx_score(TlxInput({**ratings, dim: 0.0}, choices))
        mid = tlx_score(TlxInput({**ratings, dim: 50.0}, choices))
        hi = tlx_score(TlxInput({**ratings, dim: 100.0}, choices))
        assert mid == pytest.approx((lo + hi) / 2.0)


def test_tlx_quantized_grid_optional():
    choices = all_pairs_choices(lambda a, b: a)
    on_grid = {d: 55.0 for d in DIMS}
    validate_tlx(TlxInput(on_grid, choices), quantized=True)
    off_grid = {**on_grid, "MD": 52.0}
    validate_tlx(TlxInput(off_grid, choices))  # fine without quantization
    with pytest.raises(RangeError, match="21-level"):
        validate_tlx(TlxInput(off_grid, choices), quantized=True)


def test_tlx_validation_errors():
    choices = all_pairs_choices(lambda a, b: a)
    with pytest.raises(RangeError, match="outside"):
        validate_tlx(TlxInput({**{d: 50.0 for d in DIMS}, "MD": 101.0}, choices))
    with pytest.raises(RangeError, match="cover all 15"):
        validate_tlx(TlxInput({d: 50.0 for d in DIMS}, choices[:-1]))
    bad = choices[:-1] + (("MD", "PD", "MD"),)
    with pytest.raises(RangeError, match="duplicate"):
        validate_tlx(TlxInput({d: 50.0 for d in DIMS}, bad))
    bad2 = choices[:-1] + (("Eff", "Frus", "MD"),)
    with pytest.raises(RangeError, match="winner"):
        validate_tlx(TlxInput({d: 50.0 for d in DIMS}, bad2))


# --- aggregation -----------------------------------------------------------------


def test_aggregate_single_result_zero_std():
    agg = aggregate([result()])
    m = agg["methods"]["Full"]
    assert m["coverage_pct"]["std"] == 0.0


def test_aggregate_sample_std():
    rows = [result(cov=90.0), result(cov=100.0)]
    m = aggregate(rows)["methods"]["Full"]
    assert m["coverage_pct"]["mean"] == pytest.approx(95.0)
    assert m["coverage_pct"]["std"] == pytest.approx(math.sqrt(50.0))  # 7.071


def test_aggregate_excludes_all_errored_group():
    rows = [result(method="Full"), result(method="Remote", errored=True)]
    agg = aggregate(rows)
    assert "Remote" not in agg["methods"]
    assert any("Remote" in w for w in agg["warnings"])
    text = render_table(agg)
    assert "Full" in text
