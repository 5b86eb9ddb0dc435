import math

import numpy as np
import pytest

from directwf.errors import InvalidArgumentError
from directwf.io import (
    fmt,
    parse_state_document,
    read_counts_csv,
    read_probability_csv,
    read_state_file,
    state_document,
    write_counts_csv,
    write_diagnostics_csv,
    write_probability_csv,
    write_state_file,
)
from directwf.measurement import SamplingScheme, exact_pointer_probabilities, sample_counts
from directwf.reconstruction import dwt_estimate
from directwf.states import DensityMatrix, StateVector, haar_random_state, random_density_matrix


def test_state_round_trip(tmp_path):
    s = haar_random_state(5, 3)
    write_state_file(tmp_path / "s.json", s)
    back = read_state_file(tmp_path / "s.json")
    assert isinstance(back, StateVector)
    np.testing.assert_array_equal(back.amplitudes, s.amplitudes)

    rho = random_density_matrix(3, 2, 1)
    back = parse_state_document(state_document(rho))
    assert isinstance(back, DensityMatrix)
    np.testing.assert_array_equal(back.matrix, rho.matrix)


def test_state_document_phase_fixes_input():
    s = parse_state_document('{"d": 2, "amplitudes": [[0, 2], [0, 0]]}')
    np.testing.assert_allclose(s.amplitudes, [1, 0])


@pytest.mark.parametrize("text", [
    '{"d": 2, "amplitudes": [[NaN, 0], [1, 0]]}',
    '{"d": 2, "amplitudes": [[Infinity, 0], [1, 0]]}',
    '{"d": 3, "amplitudes": [[1, 0], [1, 0]]}',
    '{"d": 2, "amplitudes": [[1], [1]]}',
    '{"d": 2}',
    '{"amplitudes": [[1, 0]]}',
    '{"d": 2, "rows": [[[1, 0], [0, 0]]]}',
    '{"d": 2, "rows": [[[1, 0], [1, 0]], [[0, 0], [0, 0]]]}',
    "[1, 2]",
    "not json",
])
def test_bad_state_documents(text):
    with pytest.raises(InvalidArgumentError):
        parse_state_document(text)


def test_fmt_is_deterministic():
    assert fmt(0.1) == "0.1"
    assert fmt(1e-20) == "1e-20"
    assert fmt(float("nan")) == "NA"
    assert fmt(math.inf) == "NA"
    assert fmt(None) == "NA"
    assert fmt(True) == "true"
    assert fmt(np.int64(4)) == "4"
    assert float(fmt(1 / 3)) == 1 / 3


def test_probability_csv_round_trip(tmp_path):
    s = haar_random_state(4, 0)
    rows = [exact_pointer_probabilities(s, x, 0.3) for x in range(1, 5)]
    path = tmp_path / "p.csv"
    write_probability_csv(path, rows)
    assert path.read_text().splitlines()[0] == "x,p,theta,P0,P1,Pplus,Pminus,PL,PR"
    back = read_probability_csv(path)
    assert back == rows
    a = dwt_estimate(back, 0.3).estimate.amplitudes
    np.testing.assert_array_equal(a, dwt_estimate(rows, 0.3).estimate.amplitudes)


def test_probability_csv_rejects_bad_rows(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("# comment\nx,p,theta,P0,P1,Pplus,Pminus,PL,PR\n1,0,0.3,NA,0,0,0,0,0\n")
    with pytest.raises(InvalidArgumentError):
        read_probability_csv(path)
    path.write_text("x,p,theta,P0,P1,Pplus,Pminus,PL,PR\n1,0,0.3,nan,0,0,0,0,0\n")
    with pytest.raises(InvalidArgumentError):
        read_probability_csv(path)


@pytest.mark.parametrize("scheme", list(SamplingScheme))
def test_counts_csv_round_trip(tmp_path, scheme):
    s = haar_random_state(3, 1)
    counts = [sample_counts(exact_pointer_probabilities(s, x, 0.5), 1000, scheme, seed=x) for x in (1, 2, 3)]
    path = tmp_path / "c.csv"
    write_counts_csv(path, counts)
    back = read_counts_csv(path, theta=0.5)
    for a, b in zip(counts, back):
        assert a.counts == b.counts and a.discarded == b.discarded and a.scheme == b.scheme
        assert a.trials_per_basis == b.trials_per_basis and a.x == b.x


def test_counts_csv_validation(tmp_path):
    path = tmp_path / "c.csv"
    path.write_text("x,basis,outcome,count,trials\n1,+-,L,3,10\n")
    with pytest.raises(InvalidArgumentError):
        read_counts_csv(path)
    path.write_text("x,basis,outcome,count,trials\n1,+-,+,3,10\n1,+-,-,3,11\n")
    with pytest.raises(InvalidArgumentError):
        read_counts_csv(path)


def test_diagnostics_csv(tmp_path):
    s = haar_random_state(3, 2)
    res = dwt_estimate([exact_pointer_probabilities(s, x, 0.2) for x in (1, 2, 3)], 0.2)
    path = tmp_path / "d.csv"
    write_diagnostics_csv(path, [res])
    header, row = path.read_text().splitlines()
    assert header == "method,theta,psi_tilde_W,sufficiency_ok,bound_value"
    assert row.startswith("DWT,0.2,") and ",true," in row
