import math

from udrive.planner import ManoeuvreState, plan_step
from udrive.scene import (
    EgoView,
    IntersectionView,
    ObstacleView,
    Scene,
    SegmentView,
    SignalView,
    WeatherView,
)

DT = 0.1


def scene(
    speed=30.0,
    position=0.0,
    lane=0,
    kind="normal",
    limit=60.0,
    lanes=2,
    signals=(),
    obstacles=(),
    next_intersection=None,
    raining=False,
    t=0.0,
):
    return Scene(
        time=t,
        weather=WeatherView(raining=raining),
        ego=EgoView(position, lane, speed, 0.0, "lane_follow"),
        segment=SegmentView(kind, limit, lanes),
        signals=tuple(signals),
        obstacles=tuple(obstacles),
        next_intersection=next_intersection,
    )


def test_cruise_convergence(baseline):
    params = baseline.snapshot()
    man = ManoeuvreState()
    decision = plan_step(scene(speed=10.0), params, man, DT)
    assert decision.view.target_speed == 30.0
    assert decision.view.commanded_accel > 0


def test_red_light_decel_matches_closed_form(baseline):
    params = baseline.snapshot()
    man = ManoeuvreState()
    s = scene(speed=60.0, signals=[SignalView(0, "red_light", 40.0)])
    decision = plan_step(s, params, man, DT)
    v = 60.0 / 3.6
    d = 40.0 - 1.0  # stop point sits dist.stop before the line
    assert decision.view.stop_point == 39.0
    assert math.isclose(decision.view.commanded_accel, -(v * v) / (2 * d), rel_tol=1e-9)


def test_unstoppable_red_light_ignored(baseline):
    params = baseline.snapshot()
    man = ManoeuvreState()
    s = scene(speed=60.0, signals=[SignalView(0, "red_light", 5.0)])
    decision = plan_step(s, params, man, DT)
    assert decision.view.stop_point is None


def test_expect_speed_near_intersection(baseline):
    baseline.set_override("speed.expect", 15.0)
    baseline.set_override("speed.cruise", 60.0)
    params = baseline.snapshot()
    man = ManoeuvreState()
    near = scene(speed=60.0, next_intersection=IntersectionView(80.0, 30.0, False, True))
    decision = plan_step(near, params, man, DT)
    assert decision.view.target_speed <= 15.0
    far = scene(speed=60.0, next_intersection=IntersectionView(150.0, 30.0, False, True))
    assert plan_step(far, params, man, DT).view.target_speed == 60.0


def test_comply_signs_cap(baseline):
    params = baseline.snapshot()
    params["speed.cruise"] = 90.0
    man = ManoeuvreState()
    assert plan_step(scene(limit=50.0), params, man, DT).view.target_speed == 50.0
    params["pref.comply_signs"] = False
    assert plan_step(scene(limit=50.0), params, man, DT).view.target_speed == 90.0


def test_lead_vehicle_matching(baseline):
    params = baseline.snapshot()
    man = ManoeuvreState()
    lead = ObstacleView("vehicle", 10.0, 0, 20.0)
    decision = plan_step(scene(speed=30.0, obstacles=[lead]), params, man, DT)
    # inside follow distance: match below lead speed to reopen the gap
    assert decision.view.target_speed < 20.0


def test_static_obstacle_stop_point(baseline):
    params = baseline.snapshot()
    man = ManoeuvreState()
    block = ObstacleView("static", 50.0, 0, 0.0)
    decision = plan_step(scene(speed=30.0, position=100.0, obstacles=[block]), params, man, DT)
    assert decision.view.stop_point == 100.0 + 50.0 - 5.0  # long buffer


def test_obstacle_dec_false_ignores_obstacles(baseline):
    baseline.set_override("pref.obstacle_dec", False)
    params = baseline.snapshot()
    man = ManoeuvreState()
    block = ObstacleView("static", 50.0, 0, 0.0)
    decision = plan_step(scene(speed=30.0, obstacles=[block]), params, man, DT)
    assert decision.view.stop_point is None


def test_check_traj_clamps_accel(baseline):
    baseline.set_override("pref.check_traj", True)
    baseline.set_override("check.long_acc_range", (-1.0, 0.5))
    params = baseline.snapshot()
    man = ManoeuvreState()
    decision = plan_step(scene(speed=0.0), params, man, DT)
    assert decision.view.commanded_accel <= 0.5
    braking = plan_step(scene(speed=90.0), params, man, DT)
    assert braking.view.commanded_accel >= -1.0


def test_check_ranges_inert_without_check_traj(baseline):
    baseline.set_override("check.long_acc_range", (-0.1, 0.1))
    params = baseline.snapshot()
    man = ManoeuvreState()
    decision = plan_step(scene(speed=0.0), params, man, DT)
    assert decision.view.commanded_accel > 0.1  # physical limits apply instead


def test_weather_ratios_scale_caps(baseline):
    baseline.set_override("speed.decrease_ratio", 0.5)
    params = baseline.snapshot()
    man = ManoeuvreState()
    dry = plan_step(scene(speed=30.0), params, man, DT)
    assert dry.view.target_speed == 30.0
    wet = plan_step(scene(speed=30.0, raining=True), params, man, DT)
    assert wet.view.target_speed == 15.0


def test_expansion_factor_scales_follow(baseline):
    params = baseline.snapshot()
    man = ManoeuvreState()
    lead = ObstacleView("vehicle", 30.0, 0, 20.0)
    unscaled = plan_step(scene(speed=30.0, obstacles=[lead]), params, man, DT)
    assert unscaled.view.target_speed == 30.0  # gap 30 > follow 20
    params["dist.expansion_factor"] = 2.0
    scaled = plan_step(scene(speed=30.0, obstacles=[lead]), params, man, DT)
    assert scaled.view.target_speed < 30.0  # gap 30 < follow 40


def test_min_speed_floor(baseline):
    baseline.set_override("speed.min", 45.0)
    params = baseline.snapshot()
    man = ManoeuvreState()
    decision = plan_step(scene(speed=40.0), params, man, DT)
    assert decision.view.target_speed == 45.0


def test_lane_change_respects_time_interval(baseline):
    params = baseline.snapshot()
    man = ManoeuvreState()
    man.pending_changes = ["left"]
    man.last_change_end = -math.inf
    decision = plan_step(scene(speed=30.0, t=0.0), params, man, DT)
    assert decision.view.lane_command == "begin_change_left"
    man.change_side = None
    man.pending_changes = ["left"]
    man.last_change_end = 0.0
    soon = plan_step(scene(speed=30.0, lane=0, t=1.0), params, man, DT)
    assert soon.view.lane_command == "keep"  # within pref.time_interval


def test_lane_change_out_of_lanes_dropped(baseline):
    params = baseline.snapshot()
    man = ManoeuvreState()
    man.pending_changes = ["right"]
    decision = plan_step(scene(speed=30.0, lane=0), params, man, DT)
    assert decision.view.lane_command == "keep"
    assert man.pending_changes == []


def test_lane_follow_pin_blocks_changes(baseline):
    params = baseline.snapshot()
    man = ManoeuvreState()
    man.pending_changes = ["left"]
    man.lane_follow_pin = True
    decision = plan_step(scene(speed=30.0), params, man, DT)
    assert decision.view.lane_command == "keep"


def test_planner_total_on_odd_scenes(baseline):
    params = baseline.snapshot()
    man = ManoeuvreState()
    odd = scene(
        speed=0.0,
        signals=[SignalView(0, "red_light", -10.0), SignalView(1, "stop_sign", 0.0)],
        obstacles=[ObstacleView("pedestrian", -3.0, 0, 0.0)],
    )
    decision = plan_step(odd, params, man, DT)
    assert decision.view is not None
