import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathloss.errors import ValidationError
from pathloss.models import (
    SPEED_OF_LIGHT,
    CiParams,
    FiParams,
    ZmsParams,
    dumps_params,
    fspl_db,
    loads_params,
    predict_ci,
    predict_fi,
    predict_zms,
)

F28 = 28e9
# 20 log10(4 pi f / c) written out independently of fspl_db
FSPL_28_1M = 20 * math.log10(F28) + 20 * math.log10(4 * math.pi) - 20 * math.log10(299_792_458.0)


def test_fspl_28ghz_matches_reported_value():
    assert fspl_db(F28, 1.0) == pytest.approx(61.41, abs=0.05)


def test_fspl_28ghz_exact():
    assert fspl_db(F28, 1.0) == pytest.approx(61.39, abs=0.01)
    assert fspl_db(F28, 1.0) == pytest.approx(FSPL_28_1M, abs=1e-12)


def test_fspl_doubling_reference_distance():
    assert fspl_db(F28, 2.0) - fspl_db(F28, 1.0) == pytest.approx(20 * math.log10(2), abs=1e-12)
    assert 20 * math.log10(2) == pytest.approx(6.0206, abs=1e-4)


@pytest.mark.parametrize("f,d0", [(0, 1), (-1, 1), (28e9, 0), (28e9, -2)])
def test_fspl_rejects_nonpositive(f, d0):
    with pytest.raises(ValidationError):
        fspl_db(f, d0)


def test_predict_ci_examples():
    p = CiParams(n=2.0, sigma_db=0.0, frequency_hz=F28)
    assert predict_ci(p, 1.0) == fspl_db(F28)
    los_vv = CiParams(n=1.81, sigma_db=2.75, frequency_hz=F28)
    assert predict_ci(los_vv, 10.0) == pytest.approx(FSPL_28_1M + 18.1, abs=1e-9)
    nlos_vv = CiParams(n=5.29, sigma_db=7.56, frequency_hz=F28)
    assert predict_ci(nlos_vv, 45.7) == pytest.approx(FSPL_28_1M + 52.9 * math.log10(45.7), abs=1e-9)


def test_predict_ci_rejects_below_d0():
    with pytest.raises(ValidationError):
        predict_ci(CiParams(2.0, 0.0, F28, d0_m=1.0), 0.5)


def test_predict_fi_examples():
    p = FiParams(alpha_db=58.23, beta=1.62, sigma_db=1.81)
    assert predict_fi(p, 1.0) == 58.23
    assert predict_fi(p, 10.0) == pytest.approx(74.43, abs=1e-9)
    flat = FiParams(alpha_db=70.0, beta=0.0, sigma_db=0.0)
    np.testing.assert_array_equal(predict_fi(flat, [1.0, 5.0, 40.0]), [70.0, 70.0, 70.0])
    with pytest.raises(ValidationError):
        predict_fi(p, 0.0)


def test_predict_zms_examples():
    nlos_vh = ZmsParams(n=4.21, correction_db=0.37, sigma_db=9.65, frequency_hz=F28)
    expected = FSPL_28_1M + 42.1 * math.log10(20.0) + 0.37
    assert predict_zms(nlos_vh, 20.0) == pytest.approx(expected, abs=1e-9)
    # the rounded log term quoted alongside this example
    assert 42.1 * math.log10(20.0) == pytest.approx(54.78, abs=0.01)
    p = ZmsParams(n=3.0, correction_db=3.0, sigma_db=0.0, frequency_hz=F28)
    assert predict_zms(p, 1.0) == pytest.approx(FSPL_28_1M + 3.0, abs=1e-12)
    with pytest.raises(ValidationError):
        predict_zms(p, 0.9)


distances = st.floats(min_value=1.0, max_value=1e4, allow_nan=False)


@given(n=st.floats(-2, 10), d=distances)
def test_zms_without_correction_is_ci(n, d):
    z = ZmsParams(n=n, correction_db=0.0, sigma_db=1.0, frequency_hz=F28)
    assert predict_zms(z, d) == predict_ci(z.as_ci(), d)


@given(d=distances, f=st.floats(1e8, 1e11))
def test_ci_with_n2_is_free_space(d, f):
    p = CiParams(n=2.0, sigma_db=0.0, frequency_hz=f)
    wavelength = SPEED_OF_LIGHT / f
    assert predict_ci(p, d) == pytest.approx(20 * math.log10(4 * math.pi * d / wavelength), abs=1e-9)


@given(n=st.floats(0.01, 10), d=st.lists(distances, min_size=2, max_size=20, unique=True))
def test_monotone_in_distance(n, d):
    d = np.sort(np.array(d))
    ci = predict_ci(CiParams(n, 0.0, F28), d)
    fi = predict_fi(FiParams(60.0, n, 0.0), d)
    keep = np.diff(d) > 1e-9 * d[1:]
    assert np.all(np.diff(ci)[keep] > 0)
    assert np.all(np.diff(fi)[keep] > 0)


@pytest.mark.parametrize("params", [
    CiParams(1.81, 2.75, F28),
    FiParams(58.23, 1.62, 1.81),
    ZmsParams(6.73, 0.123456789, 6.89, F28, d0_m=1.0),
])
def test_params_text_roundtrip(params):
    text = dumps_params(params)
    assert text.splitlines()[0] == f"model = {params.model_id}"
    assert loads_params(text) == params


def test_params_text_keys():
    text = dumps_params(ZmsParams(5.0, 1.0, 2.0, F28))
    keys = [line.split("=")[0].strip() for line in text.splitlines()]
    assert keys == ["model", "n", "zms_correction", "sigma", "frequency_hz", "d0"]
    assert [line.split("=")[0].strip() for line in dumps_params(FiParams(1, 2, 3)).splitlines()] == [
        "model", "alpha", "beta", "sigma"]


def test_params_text_errors():
    with pytest.raises(ValidationError):
        loads_params("model = ABG\n")
    with pytest.raises(ValidationError):
        loads_params("model = CI\nsigma = 1\nfrequency_hz = 28e9\n")
    with pytest.raises(ValidationError):
        loads_params("model = FI\nalpha = x\nbeta = 1\nsigma = 1\n")


def test_params_invariants():
    with pytest.raises(ValidationError):
        CiParams(2.0, -1.0, F28)
    with pytest.raises(ValidationError):
        CiParams(float("nan"), 1.0, F28)
    with pytest.raises(ValidationError):
        FiParams(float("inf"), 1.0, 1.0)
    with pytest.raises(ValidationError):
        ZmsParams(2.0, 0.0, 1.0, F28, d0_m=0.0)
