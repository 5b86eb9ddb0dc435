import csv
import io
import math

import numpy as np
import pytest

from directwf import experiments as ex
from directwf._kernels import state_moments
from directwf.analysis import accuracy_D, precision_columns
from directwf.errors import ConfigError, DegenerateInputError, InvalidArgumentError
from directwf.states import DensityMatrix, haar_random_state

PI2 = math.pi / 2


def table(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def cfg(**kw):
    base = dict(d=10, thetas=(0.2,), samples=2000, seed=5, output_path=None)
    base.update(kw)
    return ex.ExperimentConfig(**base)


@pytest.fixture(autouse=True)
def quiet_stdout(capsys):
    yield


@pytest.mark.parametrize("bad", [
    dict(samples=0), dict(d=1), dict(thetas=(0.0,)), dict(thetas=(2.0,)), dict(thetas=()),
    dict(workers=0), dict(shots=0), dict(reps=0), dict(scheme="binomial"), dict(d=2.5),
])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        cfg(**bad).validate()


def test_config_error_is_invalid_argument():
    assert issubclass(ConfigError, InvalidArgumentError)


def test_derive_seed():
    assert ex.derive_seed(1, 2, 3) == ex.derive_seed(1, 2, 3)
    assert len({ex.derive_seed(1, 0, i) for i in range(100)}) == 100
    assert ex.derive_seed(-1, 0) == ex.derive_seed(2**64 - 1, 0)


def test_metadata_line_and_header():
    text = ex.run_accuracy_sweep(cfg(workers=2, output_path=None))
    first, header = text.splitlines()[:2]
    assert first.startswith("# directwf ") and "accuracy-sweep" in first
    assert "seed=5" in first and "samples=2000" in first
    assert "workers" not in first and "output" not in first
    assert header == "theta,p_W,p_D,M,d,seed"


def test_single_sample_sweep():
    rows = table(ex.run_accuracy_sweep(cfg(samples=1)))
    assert len(rows) == 1
    assert float(rows[0]["p_W"]) in (0.0, 1.0) and float(rows[0]["p_D"]) in (0.0, 1.0)


def test_sweep_trends_with_theta():
    rows = table(ex.run_accuracy_sweep(cfg(thetas=(0.1, 0.3, 0.6, 1.0, PI2), samples=50_000)))
    p_w = [float(r["p_W"]) for r in rows]
    p_d = [float(r["p_D"]) for r in rows]
    assert all(a < b for a, b in zip(p_w, p_w[1:]))
    assert all(a < b for a, b in zip(p_d, p_d[1:]))


def test_output_file_and_unwritable_path(tmp_path):
    out = tmp_path / "a.csv"
    text = ex.run_accuracy_sweep(cfg(output_path=str(out)))
    assert out.read_text() == text
    with pytest.raises(OSError):
        ex.run_accuracy_sweep(cfg(output_path=str(tmp_path / "missing" / "a.csv")))


def test_gnuplot_hints_are_comments():
    text = ex.run_theta_means(cfg(gnuplot_hints=True, samples=100))
    hints = [ln for ln in text.splitlines() if ln.startswith("# gnuplot:")]
    assert hints and len(table(text)) == 1


def test_scatter_rows_and_majority_claim():
    text = ex.run_scatter(cfg(samples=20_000))
    rows = table(text)
    assert len(rows) == 20_000
    assert list(rows[0])[:2] == ["state_id", "d"]
    covered = [r for r in rows if float(r["psi_tilde_W"]) >= 0]
    frac = np.mean([float(r["ratio"]) < 1 for r in covered])
    assert frac > 0.9
    for r in rows[:50]:
        s = ex.as_state(haar_random_state(10, 0))  # type check of helper re-export
        assert float(r["ratio"]) == pytest.approx(float(r["delta_psi_S"]) / float(r["delta_psi_W"]), rel=1e-12)
    assert s.d == 10
    with pytest.raises(ConfigError):
        ex.run_scatter(cfg(thetas=(0.1, 0.2)))


def test_scatter_flat_states_have_zero_distortion():
    rows = ex.scatter_rows(state_moments(np.array([np.ones(10), np.eye(10)[3]], dtype=complex)), 10, 0.2, 100)
    assert [r["D"] for r in rows] == [pytest.approx(0.0, abs=1e-15)] * 2


def test_theta_means_trends():
    rows = table(ex.run_theta_means(cfg(thetas=ex.DEFAULT_THETA_GRID, samples=50_000)))
    mean_d = [float(r["mean_D"]) for r in rows]
    mean_ratio = [float(r["mean_ratio"]) for r in rows]
    assert all(a < b for a, b in zip(mean_d, mean_d[1:]))
    assert all(a < b for a, b in zip(mean_ratio, mean_ratio[1:]))
    assert float(rows[2]["theta"]) == 0.2 and mean_ratio[2] < 1


def test_strong_coupling_ratio_approaches_large_sum_limit():
    # the sqrt(3/2) sqrt(15/19) ~ 1.088 limit describes states with a large amplitude sum;
    # the unconditional Haar mean is pulled up by small-sum states
    moments, _ = ex.haar_pool(10, 100_000, 3)
    ratio = precision_columns(moments, 10, PI2)["ratio"]
    top = moments[:, 0] >= np.quantile(moments[:, 0], 0.9)
    limit = math.sqrt(1.5) * math.sqrt(15 / 19)
    assert np.mean(ratio[top]) == pytest.approx(limit, rel=0.15)
    assert np.mean(ratio) > limit


def test_haar_pool_is_worker_independent_and_blocked():
    a, audit_a = ex.haar_pool(4, ex.BLOCK_SIZE + 17, 9, workers=1)
    b, audit_b = ex.haar_pool(4, ex.BLOCK_SIZE + 17, 9, workers=2)
    np.testing.assert_array_equal(a, b)
    assert len(audit_a) == math.ceil((ex.BLOCK_SIZE + 17) / ex.AUDIT_STRIDE)
    # prefixes agree: the pool for fewer samples is the start of a larger one
    c, _ = ex.haar_pool(4, 100, 9)
    np.testing.assert_array_equal(c, a[:100])


def test_audit_detects_disagreement():
    moments, audit = ex.haar_pool(10, 500, 1)
    ex.audit_accuracy(audit, moments[::ex.AUDIT_STRIDE], 0.2)
    wrong = moments[::ex.AUDIT_STRIDE].copy()
    wrong[:, 7] *= 1.01
    with pytest.raises(ex.AuditError):
        ex.audit_accuracy(audit, wrong, 0.2)
    wrong = moments[::ex.AUDIT_STRIDE].copy()
    wrong[:, 6] += 0.1
    with pytest.raises(ex.AuditError):
        ex.audit_precision(audit, wrong, 10, 0.2)


@pytest.mark.parametrize("command", ["run_accuracy_sweep", "run_scatter", "run_theta_means"])
def test_campaigns_byte_identical_across_workers(command):
    fn = getattr(ex, command)
    thetas = (0.3,) if command == "run_scatter" else (0.1, 0.3)
    a = fn(cfg(samples=ex.BLOCK_SIZE * 2 + 5, thetas=thetas, workers=1))
    b = fn(cfg(samples=ex.BLOCK_SIZE * 2 + 5, thetas=thetas, workers=3))
    assert a == b


# -- shot noise -----------------------------------------------------------------

def test_shot_noise_uniform_qubit_strong_method():
    c = cfg(d=2, samples=1, shots=10**6, reps=200, states=[np.ones(2)], thetas=(0.2,))
    rows = table(ex.run_shot_noise_validation(c))
    dst = [r for r in rows if r["method"] == "DST"][0]
    assert float(dst["delta_pred"]) * 1000 == pytest.approx(1.9365, abs=1e-4)
    assert float(dst["delta_emp"]) / float(dst["delta_pred"]) == pytest.approx(1.0, abs=0.1)
    dwt = [r for r in rows if r["method"] == "DWT"][0]
    assert abs(float(dwt["rel_err"])) < 0.1


def test_weak_method_at_strong_coupling_matches_prediction():
    c = cfg(d=2, samples=1, shots=10**6, reps=200, states=[np.ones(2)], thetas=(PI2,))
    rows = table(ex.run_shot_noise_validation(c))
    assert all(abs(float(r["rel_err"])) < 0.1 for r in rows)


def test_shot_noise_scaling():
    s = haar_random_state(10, 2)
    rng_a = ex.rng_from_seed(1)
    rng_b = ex.rng_from_seed(2)
    a = ex.empirical_delta(ex.simulate_estimates(s, ex.Method.DWT, 0.2, 10**5, 200, "poisson", rng_a))
    b = ex.empirical_delta(ex.simulate_estimates(s, ex.Method.DWT, 0.2, 4 * 10**5, 200, "poisson", rng_b))
    assert a / b == pytest.approx(2.0, rel=0.2)


def test_shot_noise_rejections():
    with pytest.raises(ConfigError):
        ex.run_shot_noise_validation(cfg(shots=2, samples=1))
    with pytest.raises(ConfigError):
        ex.run_shot_noise_validation(cfg(reps=1, samples=1, shots=100))


def test_shot_noise_workers_and_columns():
    c1 = cfg(samples=3, shots=10**4, reps=50, thetas=(0.2, 0.5), workers=1)
    c2 = cfg(samples=3, shots=10**4, reps=50, thetas=(0.2, 0.5), workers=2)
    a = ex.run_shot_noise_validation(c1)
    assert a == ex.run_shot_noise_validation(c2)
    rows = table(a)
    assert list(rows[0]) == list(ex.SHOT_NOISE_COLUMNS)
    assert [r["method"] for r in rows[:3]] == ["DWT", "DWT", "DST"]


# -- single reconstruction -------------------------------------------------------

def test_single_reconstruction_examples():
    rep = ex.run_single_reconstruction([1, 0], "dst")
    assert rep.trace_distance < 1e-12

    with pytest.raises(DegenerateInputError, match="momentum"):
        ex.run_single_reconstruction([1 / math.sqrt(2), -1 / math.sqrt(2)], "dwt", 0.2)

    s = haar_random_state(10, 11)
    rep = ex.run_single_reconstruction(s, "dwt", 0.2)
    assert abs(rep.trace_distance - accuracy_D(s, 0.2).D) < 1e-10
    assert abs(rep.predicted_D - rep.trace_distance) < 1e-10
    assert ex.trace_distance_pure(rep.predicted, rep.estimate) < 1e-10


def test_single_reconstruction_momentum_switch():
    anti = [1 / math.sqrt(2), -1 / math.sqrt(2)]
    rep = ex.run_single_reconstruction(anti, "arbitrary", 0.7, momentum=1)
    assert rep.trace_distance < 1e-12
    assert rep.momentum == 1
    np.testing.assert_allclose(np.abs(rep.estimate.amplitudes), [1 / math.sqrt(2)] * 2, atol=1e-12)


def test_single_reconstruction_nonzero_momentum_on_generic_state():
    s = haar_random_state(6, 4)
    for p in range(6):
        assert ex.run_single_reconstruction(s, "arbitrary", 0.4, momentum=p).trace_distance < 1e-10
        rep = ex.run_single_reconstruction(s, "dwt", 0.4, momentum=p)
        assert ex.trace_distance_pure(rep.predicted, rep.estimate) < 1e-10


def test_single_reconstruction_finite_shots_and_errors():
    s = haar_random_state(4, 1)
    rep = ex.run_single_reconstruction(s, "dst", shots=3 * 10**6, seed=2)
    assert 0 < rep.trace_distance < 0.01
    again = ex.run_single_reconstruction(s, "dst", shots=3 * 10**6, seed=2)
    np.testing.assert_array_equal(rep.estimate.amplitudes, again.estimate.amplitudes)
    with pytest.raises(InvalidArgumentError):
        ex.run_single_reconstruction(s, "dwt")
    with pytest.raises(InvalidArgumentError):
        ex.run_single_reconstruction(s, "mle", 0.2)
    with pytest.raises(InvalidArgumentError):
        ex.run_single_reconstruction(s, "dst", shots=2)
    lines = rep.lines()
    assert lines[0] == "method: DST" and any(ln.startswith("trace_distance:") for ln in lines)


# -- mixed -------------------------------------------------------------------------

def test_mixed_campaign_examples():
    plus = DensityMatrix(np.full((2, 2), 0.5))
    diag = DensityMatrix(np.diag([0.3, 0.7]))
    rows = table(ex.run_mixed_campaign(cfg(d=2, states=[plus, diag], thetas=(math.pi / 3, PI2))))
    assert float(rows[0]["D_closed"]) == pytest.approx(0.5, abs=1e-12)
    assert float(rows[0]["D_pipeline"]) == pytest.approx(0.5, abs=1e-12)
    assert rows[1]["D_closed"] == "NA" and rows[1]["D_pipeline"] == "NA"
    assert float(rows[2]["D_closed"]) == 0.0
    assert all(float(r["dst_residual"]) < 1e-10 for r in rows)
    assert [r["rank"] for r in rows] == ["1", "1", "2", "2"]


def test_mixed_campaign_random_states_and_workers():
    c = cfg(d=4, rank=2, samples=6, thetas=(0.2, 1.0, PI2))
    a = ex.run_mixed_campaign(c)
    assert a == ex.run_mixed_campaign(cfg(d=4, rank=2, samples=6, thetas=(0.2, 1.0, PI2), workers=2))
    rows = table(a)
    assert len(rows) == 18
    for r in rows:
        assert float(r["dst_residual"]) < 1e-10
        if r["D_closed"] != "NA":
            assert abs(float(r["D_closed"]) - float(r["D_pipeline"])) < 1e-10
    with pytest.raises(ConfigError):
        ex.run_mixed_campaign(cfg(d=3, rank=4, samples=2))


def test_negative_indicator_probability_matches_beta_law():
    # for Haar states |<p0|psi>|^2 ~ Beta(1, d-1), so P(psi_tilde^2 < eps) = 1 - (1 - eps/d)^(d-1)
    d, m = 10, 200_000
    for theta in (0.2, 0.6):
        eps = 1 - math.cos(theta)
        exact = 1 - (1 - eps / d) ** (d - 1)
        p_w = float(table(ex.run_accuracy_sweep(cfg(samples=m, thetas=(theta,))))[0]["p_W"])
        assert abs(p_w - exact) < 4 * math.sqrt(exact * (1 - exact) / m)
