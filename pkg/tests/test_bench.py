import gc
import statistics
import time

from udrive.bench import linear_fit, run_bench, synthetic_program
from udrive.parser import parse_program


def test_synthetic_programs_are_valid():
    for rules, actions in ((1, 1), (5, 3), (20, 10)):
        text = synthetic_program(rules, actions)
        result = parse_program(text)
        assert result.program is not None, result.diagnostics
        assert len(result.program.rules) == rules
        assert all(len(r.actions) == actions for r in result.program.rules)


def test_parse_cost_linear_inequality():
    # time(20 rules x 3 actions) < 20 x time(1 rule x 3 actions) x 2,
    # medians over interleaved rounds to shrug off scheduler spikes
    small_text = synthetic_program(1, 3)
    large_text = synthetic_program(20, 3)
    parse_program(small_text), parse_program(large_text)  # warmup
    small_samples, large_samples = [], []
    gc.disable()
    try:
        for _ in range(30):
            begin = time.perf_counter()
            parse_program(small_text)
            small_samples.append(time.perf_counter() - begin)
            begin = time.perf_counter()
            parse_program(large_text)
            large_samples.append(time.perf_counter() - begin)
    finally:
        gc.enable()
    small = statistics.median(small_samples)
    large = statistics.median(large_samples)
    assert large < 20 * small * 2, (small, large)


def test_run_bench_reports_fits():
    # machinery smoke test; the tight R^2 bound lives in the acceptance
    # suite with interleaved timing
    report = run_bench([1, 4, 8, 16], [1, 3, 5], repetitions=40)
    assert len(report.by_rules) == 4
    assert len(report.by_actions) == 3
    assert report.rules_slope_ms > 0
    assert report.rules_r2 > 0.5


def test_linear_fit_exact_line():
    slope, r2 = linear_fit([1.0, 2.0, 3.0, 4.0], [2.0, 4.0, 6.0, 8.0])
    assert abs(slope - 2.0) < 1e-12
    assert abs(r2 - 1.0) < 1e-12
