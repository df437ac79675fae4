"""Large-scale path-loss models: free-space reference, CI, FI and ZMS.

All predictions return the *mean* path loss in dB; shadow fading is never
added here (see :mod:`pathloss.data` for the stochastic generator).
Logarithms are base 10 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact SI value


def fspl_db(frequency_hz, d0_m=1.0):
    """Free-space path loss ``20 log10(4 pi d0 / lambda)`` in dB."""
    if not frequency_hz > 0:
        raise ValidationError(f"frequency must be positive, got {frequency_hz!r}")
    if not d0_m > 0:
        raise ValidationError(f"reference distance must be positive, got {d0_m!r}")
    wavelength = SPEED_OF_LIGHT / frequency_hz
    return 20.0 * math.log10(4.0 * math.pi * d0_m / wavelength)


def _check_finite(name, value):
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")


def _check_sigma(sigma_db):
    _check_finite("sigma", sigma_db)
    if sigma_db < 0:
        raise ValidationError(f"sigma must be >= 0, got {sigma_db!r}")


@dataclass(frozen=True)
class CiParams:
    n: float
    sigma_db: float
    frequency_hz: float
    d0_m: float = 1.0

    model_id = "CI"

    def __post_init__(self):
        _check_finite("n", self.n)
        _check_sigma(self.sigma_db)
        if not self.frequency_hz > 0:
            raise ValidationError("frequency must be positive")
        if not self.d0_m > 0:
            raise ValidationError("d0 must be positive")

    @property
    def exponent(self):
        return self.n


@dataclass(frozen=True)
class FiParams:
    alpha_db: float
    beta: float
    sigma_db: float

    model_id = "FI"

    def __post_init__(self):
        _check_finite("alpha", self.alpha_db)
        _check_finite("beta", self.beta)
        _check_sigma(self.sigma_db)

    @property
    def exponent(self):
        return self.beta


@dataclass(frozen=True)
class ZmsParams:
    """CI-style fit plus a scenario-level correction (dB).

    ``correction_db`` is a single scalar per (frequency, polarization,
    scenario); for co-polarized LOS it is identically zero.
    """

    n: float
    correction_db: float
    sigma_db: float
    frequency_hz: float
    d0_m: float = 1.0

    model_id = "ZMS"

    def __post_init__(self):
        _check_finite("n", self.n)
        _check_finite("zms_correction", self.correction_db)
        _check_sigma(self.sigma_db)
        if not self.frequency_hz > 0:
            raise ValidationError("frequency must be positive")
        if not self.d0_m > 0:
            raise ValidationError("d0 must be positive")

    @property
    def exponent(self):
        return self.n

    def as_ci(self):
        return CiParams(self.n, self.sigma_db, self.frequency_hz, self.d0_m)


def _distances(d):
    arr = np.asarray(d, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("distances must be finite")
    return arr


def _scalar_or_array(arr, scalar_input):
    return float(arr) if scalar_input else arr


def predict_ci(params: CiParams, d):
    """Mean CI path loss at distance(s) ``d`` (m)."""
    arr = _distances(d)
    if np.any(arr < params.d0_m):
        raise ValidationError(f"distance below reference distance d0={params.d0_m} m")
    out = fspl_db(params.frequency_hz, params.d0_m) + 10.0 * params.n * np.log10(arr / params.d0_m)
    return _scalar_or_array(out, np.ndim(d) == 0)


def predict_fi(params: FiParams, d):
    arr = _distances(d)
    if np.any(arr <= 0):
        raise ValidationError("FI prediction needs positive distances")
    out = params.alpha_db + 10.0 * params.beta * np.log10(arr)
    return _scalar_or_array(out, np.ndim(d) == 0)


def predict_zms(params: ZmsParams, d):
    arr = _distances(d)
    if np.any(arr < params.d0_m):
        raise ValidationError(f"distance below reference distance d0={params.d0_m} m")
    out = (
        fspl_db(params.frequency_hz, params.d0_m)
        + 10.0 * params.n * np.log10(arr / params.d0_m)
        + params.correction_db
    )
    return _scalar_or_array(out, np.ndim(d) == 0)


def predict(params, d):
    """Dispatch on the parameter type."""
    if isinstance(params, ZmsParams):
        return predict_zms(params, d)
    if isinstance(params, CiParams):
        return predict_ci(params, d)
    if isinstance(params, FiParams):
        return predict_fi(params, d)
    raise ValidationError(f"unknown parameter set {type(params).__name__}")


# -- key/value text serialization ---------------------------------------------
#
#   # comment
#   model = CI
#   n = 1.81
#   sigma = 2.75
#   frequency_hz = 28000000000.0
#   d0 = 1.0
#
# FI files carry alpha/beta/sigma; ZMS files add zms_correction.

_KEYS = {
    "CI": (("n", "n"), ("sigma", "sigma_db"), ("frequency_hz", "frequency_hz"), ("d0", "d0_m")),
    "FI": (("alpha", "alpha_db"), ("beta", "beta"), ("sigma", "sigma_db")),
    "ZMS": (
        ("n", "n"),
        ("zms_correction", "correction_db"),
        ("sigma", "sigma_db"),
        ("frequency_hz", "frequency_hz"),
        ("d0", "d0_m"),
    ),
}
_CLASSES = {"CI": CiParams, "FI": FiParams, "ZMS": ZmsParams}


def params_to_dict(params):
    keys = _KEYS[params.model_id]
    out = {"model": params.model_id}
    for key, attr in keys:
        out[key] = float(getattr(params, attr))
    return out


def params_from_dict(mapping):
    model = str(mapping.get("model", "")).upper()
    if model not in _CLASSES:
        raise ValidationError(f"unknown model {mapping.get('model')!r}")
    kwargs = {}
    for key, attr in _KEYS[model]:
        if key not in mapping:
            if key == "d0":
                continue
            raise ValidationError(f"parameter file lacks {key!r} for model {model}")
        try:
            kwargs[attr] = float(mapping[key])
        except (TypeError, ValueError):
            raise ValidationError(f"parameter {key!r} is not a number: {mapping[key]!r}") from None
    return _CLASSES[model](**kwargs)


def dumps_params(params):
    lines = [f"{key} = {value!r}" if key != "model" else f"model = {value}"
             for key, value in params_to_dict(params).items()]
    return "\n".join(lines) + "\n"


def loads_params(text):
    mapping = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        mapping[key.lower()] = value
    return params_from_dict(mapping)

