import numpy as np
import pytest

import vdvio

from conftest import CONFIG_DIR


def test_default_config_matches_shipped_file():
    assert vdvio.load_config(CONFIG_DIR / "default.yaml").to_yaml() == vdvio.Config().to_yaml()


def test_config_errors_are_value_errors():
    with pytest.raises(vdvio.ConfigError, match="bogus"):
        vdvio.parse_config("estimator: {bogus: 1}\n")
    assert issubclass(vdvio.ConfigError, ValueError)


def test_simulate_is_deterministic(short_config):
    a, truth_a = vdvio.simulate(short_config, 11)
    b, truth_b = vdvio.simulate(short_config, 11)
    assert a.to_text() == b.to_text()
    assert np.array_equal(truth_a.positions, truth_b.positions)
    assert a.imu_count > 1000 and a.camera_count > 100 and a.dvl_count > 0


def test_zero_noise_run_tracks_truth(short_run):
    log, truth, result = short_run
    est = result.trajectory
    assert len(est) == result.position_covariance.shape[0]
    assert result.position_covariance.shape[1:] == (3, 3)
    assert not result.diagnostics["diverged"]
    i = np.searchsorted(truth.timestamps, est.timestamps[-1])
    i = min(i, len(truth) - 1)
    assert np.linalg.norm(est.positions[-1] - truth.positions[i]) < 0.01


def test_ablation_flags(short_config, short_run):
    log, _, _ = short_run
    result = vdvio.run(log, short_config, no_visual=True)
    assert result.diagnostics["visual_updates"] == 0
    result = vdvio.run(log, short_config, no_dvl=True)
    assert result.diagnostics["dvl_accepted"] == 0
    assert result.diagnostics["features_enhanced"] == 0


def test_evaluate_against_itself(short_run):
    _, truth, _ = short_run
    report = vdvio.evaluate(truth, truth, 60.0)
    assert report.rmse_xy < 1e-9 and report.pairs == len(truth)
    assert abs(report.scale - 1.0) < 1e-9
    assert "[ate]" in report.to_text(60.0)
    assert report.to_csv().startswith("t,ex,ey,ez,e_xy")
    assert report.errors.shape == (len(truth), 4)


def test_file_round_trips(tmp_path, short_run):
    log, truth, result = short_run
    vdvio.write_log(tmp_path / "run.jsonl", log)
    assert vdvio.read_log(tmp_path / "run.jsonl").to_text() == log.to_text()
    vdvio.write_trajectory(tmp_path / "est.txt", result.trajectory)
    back = vdvio.read_trajectory(tmp_path / "est.txt")
    assert back.to_text() == result.trajectory.to_text()
    assert np.array_equal(back.orientations, result.trajectory.orientations)


def test_trajectory_from_arrays():
    t = np.array([0.0, 1.0, 2.0])
    p = np.arange(9.0).reshape(3, 3)
    traj = vdvio.Trajectory(t, p)
    assert traj.orientations is None
    assert np.array_equal(vdvio.parse_trajectory(traj.to_text()).positions, p)
    with pytest.raises(ValueError):
        vdvio.Trajectory(t, p[:2])


def test_parse_errors_carry_line_numbers():
    with pytest.raises(vdvio.ParseError, match=":2:"):
        vdvio.parse_trajectory("0 0 0 0\nnot a number\n")
    with pytest.raises(vdvio.ParseError, match=":1:"):
        vdvio.parse_log('{"type": "imu"}\n')
