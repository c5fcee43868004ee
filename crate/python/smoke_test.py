"""Smoke test for the sweepkit extension module.

Build and run from the repository root:

    cargo build --release -p sweepkit-python --features extension-module
    cp target/release/libsweepkit_py.so python/sweepkit.so
    python3 python/smoke_test.py
"""

import json
import math
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import sweepkit  # noqa: E402


def main():
    names = [name for name, _ in sweepkit.list_builtins()]
    assert "sweep_halfspace" in names, names

    ball = sweepkit.ProxSet.ball([0.0, 0.0], 1.0)
    assert math.isinf(ball.r)
    assert ball.project([2.0, 0.0]) == [1.0, 0.0]
    hole = sweepkit.ProxSet.ball_complement([0.0, 0.0], 0.5)
    assert hole.r == 0.5
    value, exact = sweepkit.excess(sweepkit.ProxSet.ball([1.0, 0.0], 1.0), ball)
    assert exact and abs(value - 1.0) < 1e-12, value

    s = sweepkit.Scenario.builtin("sweep_halfspace")
    traj = sweepkit.solve(s, 3)
    # Unit-speed half-space from x = 1 to x = -1: contact at t = 1, then
    # the iterate is pushed a distance of 1.
    assert abs(traj.variation(0.0, s.horizon) - 1.0) < 0.05
    assert max(traj.residuals) < 1e-9
    assert traj.to_csv().startswith("t,x_0,x_1,jump_norm,dist_to_set")

    with tempfile.TemporaryDirectory() as out:
        report = sweepkit.run(s, out_dir=out, levels=4)
        assert report.all_passed, report.verdicts
        assert os.path.exists(os.path.join(out, "report.json"))
        conv = json.load(open(os.path.join(out, "convergence.json")))
        assert conv["levels"] == [0, 1, 2]

    conv = json.loads(sweepkit.converge(sweepkit.Scenario.builtin("static_ball"), levels=3))
    assert conv["sup_diffs"] == [0.0, 0.0]

    assert abs(sweepkit.ball_bound(2.0, [0.0, 0.0], 0.5, [0.8, 0.0], 0.1) - 19.5) < 1e-9
    # r = inf: (|y0 - w|^2 - rho^2) / (2 rho)
    assert abs(sweepkit.ball_bound(math.inf, [0.0, 0.0], 0.5, [0.8, 0.0], 0.1) - 0.39) < 1e-12

    try:
        sweepkit.Scenario.builtin("no_such_scenario")
    except sweepkit.ConfigError as e:
        assert "no_such_scenario" in str(e)
    else:
        raise AssertionError("expected ConfigError")

    print("smoke test ok:", len(names), "builtins")


if __name__ == "__main__":
    main()
