"""Closed-form estimators that minimise the shadow-fading deviation.

Notation used below, per sample::

    L = 10 log10(d / d0)           (anchored models, CI and ZMS)
    L = 10 log10(d)                (floating intercept)
    P = PL - FSPL(f, d0)           (path loss above the free-space anchor)
    C = PL

sigma is always the population form, ``sqrt(sum(residual**2) / N)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np

from .data import Polarization, Scenario, SurveyDataset
from .errors import DegenerateFitError, ValidationError
from .models import CiParams, FiParams, ZmsParams, fspl_db

GRID_RANGE = (0.0, 12.0)
GRID_STEP = 1e-4


def anchored_terms(dataset: SurveyDataset):
    """Return ``(L, P)`` for the CI/ZMS normal equations."""
    L = 10.0 * np.log10(dataset.distance_m / dataset.d0_m)
    P = dataset.path_loss_db - fspl_db(dataset.frequency_hz, dataset.d0_m)
    return L, P


def _fit_anchored(dataset, correction_db):
    L, P = anchored_terms(dataset)
    sum_ll = float(np.sum(L * L))
    if sum_ll == 0.0:
        raise DegenerateFitError("all samples at the reference distance; path-loss exponent undefined")
    numerator = float(np.sum(P * L)) - correction_db * float(np.sum(L))
    n = numerator / sum_ll
    resid = P - n * L - correction_db
    sigma = math.sqrt(float(np.sum(resid * resid)) / L.size)
    return n, sigma


def fit_ci(dataset: SurveyDataset) -> CiParams:
    """Close-in model: ``n = sum(P L) / sum(L^2)``."""
    n, sigma = _fit_anchored(dataset, 0.0)
    return CiParams(n=n, sigma_db=sigma, frequency_hz=dataset.frequency_hz, d0_m=dataset.d0_m)


def fit_zms(dataset: SurveyDataset, correction_db: float) -> ZmsParams:
    """CI fit with a fixed scalar correction removed from every sample.

    ``n = (sum(P L) - ZMS sum(L)) / sum(L^2)``; with ``correction_db == 0``
    the arithmetic is the same as :func:`fit_ci`, bit for bit.
    """
    correction_db = float(correction_db)
    if not math.isfinite(correction_db):
        raise ValidationError("ZMS correction must be finite")
    n, sigma = _fit_anchored(dataset, correction_db)
    return ZmsParams(n=n, correction_db=correction_db, sigma_db=sigma,
                     frequency_hz=dataset.frequency_hz, d0_m=dataset.d0_m)


def fit_fi(dataset: SurveyDataset) -> FiParams:
    L = 10.0 * np.log10(dataset.distance_m)
    C = dataset.path_loss_db
    N = L.size
    if N < 2 or np.all(L == L[0]):
        raise DegenerateFitError("all samples at one distance")
    sum_l = float(np.sum(L))
    sum_c = float(np.sum(C))
    sum_ll = float(np.sum(L * L))
    sum_lc = float(np.sum(L * C))
    denom = sum_l * sum_l - N * sum_ll
    if denom == 0.0:
        raise DegenerateFitError("all samples at one distance")
    alpha = (sum_l * sum_lc - sum_ll * sum_c) / denom
    beta = (sum_l * sum_c - N * sum_lc) / denom
    resid = C - beta * L - alpha
    sigma = math.sqrt(float(np.sum(resid * resid)) / N)
    return FiParams(alpha_db=alpha, beta=beta, sigma_db=sigma)


def brute_force_fit(dataset, model="CI", correction_db=0.0, n_range=GRID_RANGE, step=GRID_STEP,
                    chunk=None):
    """Exhaustive grid search for the exponent minimising the shadow-fading std.

    Independent of the closed forms: it evaluates the residual sum of squares
    at every grid point and keeps the first minimiser.  ``chunk`` bounds the
    number of grid points evaluated at once; the answer does not depend on it.
    Returns ``(n, sigma_db)``.
    """
    model = str(model).upper()
    if model == "CI":
        correction_db = 0.0
    elif model != "ZMS":
        raise ValidationError(f"oracle supports CI and ZMS, not {model!r}")
    lo, hi = (float(v) for v in n_range)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValidationError("grid range must be finite")
    if not step > 0:
        raise ValidationError("grid step must be positive")
    if hi < lo:
        raise ValidationError("empty grid range")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    grid = lo + step * np.arange(count)

    d = dataset.distance_m
    L = 10.0 * np.log10(d / dataset.d0_m)
    P = dataset.path_loss_db - fspl_db(dataset.frequency_hz, dataset.d0_m) - correction_db
    if chunk is None:
        chunk = max(1, 4_000_000 // L.size)

    best_sse = math.inf
    best_n = grid[0]
    for start in range(0, count, chunk):
        g = grid[start:start + chunk]
        resid = P[None, :] - g[:, None] * L[None, :]
        sse = np.einsum("ij,ij->i", resid, resid)
        i = int(np.argmin(sse))
        if sse[i] < best_sse:
            best_sse = float(sse[i])
            best_n = float(g[i])
    return best_n, math.sqrt(best_sse / L.size)


# -- ZMS correction ------------------------------------------------------------

# (polarization, scenario) -> polarizations whose power surveys feed the
# correction, in (first-term, reference-term) order.  For V-Omni NLOS the
# first term is the cross-polarized V-H survey and the reference is the
# R_NL adjust factor built from V-H and V-V.
CORRECTION_SOURCES = {
    (Polarization.VV, Scenario.LOS): (),
    (Polarization.VV, Scenario.NLOS): (Polarization.VV, Polarization.VOMNI),
    (Polarization.VH, Scenario.LOS): (Polarization.VH, Polarization.VOMNI),
    (Polarization.VH, Scenario.NLOS): (Polarization.VH, Polarization.VV),
    (Polarization.VOMNI, Scenario.LOS): (Polarization.VOMNI, Polarization.VV),
    (Polarization.VOMNI, Scenario.NLOS): (Polarization.VH, Polarization.VV),
}


def required_references(polarization, scenario):
    """Polarizations, other than the fitted one, whose surveys must be supplied."""
    pol = Polarization.parse(polarization)
    sources = CORRECTION_SOURCES[(pol, Scenario.parse(scenario))]
    return tuple(p for p in dict.fromkeys(sources) if p is not pol)


@dataclass(frozen=True)
class ZmsCorrectionInput:
    """Paired linear path gains for one correction.

    ``primary_powers`` and ``reference_powers`` are ``(distance_m, gain)``
    pairs aligned by index.  Entries ``[0, los_count)`` are LOS-labelled and
    the remainder NLOS; the LOS branch sums the former, NLOS the latter.
    """

    primary_powers: Tuple[Tuple[float, float], ...]
    reference_powers: Tuple[Tuple[float, float], ...]
    d_r_m: float
    dl_m: float
    scenario: Scenario
    polarization: Polarization
    los_count: int

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario.parse(self.scenario))
        object.__setattr__(self, "polarization", Polarization.parse(self.polarization))
        object.__setattr__(self, "primary_powers", tuple((float(d), float(p)) for d, p in self.primary_powers))
        object.__setattr__(self, "reference_powers", tuple((float(d), float(p)) for d, p in self.reference_powers))
        if not self.dl_m > 0:
            raise ValidationError("D_L must be positive")
        if not self.d_r_m > 0:
            raise ValidationError("average reference distance must be positive")
        if not 0 <= self.los_count <= len(self.primary_powers):
            raise ValidationError("los_count outside the primary index range")
        for d, p in self.primary_powers + self.reference_powers:
            if not (d > 0 and p > 0):
                raise ValidationError("distances and powers must be positive")


def compute_rnl(p_vh, d_t, p_vv, d_r):
    """Adjust factor ``|sqrt(P_vh d_t) - sqrt(P_vv d_r)| / 2``."""
    for name, value in (("p_vh", p_vh), ("d_t", d_t), ("p_vv", p_vv), ("d_r", d_r)):
        if not value > 0:
            raise ValidationError(f"{name} must be positive, got {value!r}")
    return abs((math.sqrt(p_vh * d_t) - math.sqrt(p_vv * d_r)) / 2.0)


def compute_zms_correction(inp: ZmsCorrectionInput) -> float:
    """Scenario-level correction in dB (non-negative).

    Each branch is evaluated as written; in particular the co-polarized NLOS
    reference term uses ``d_t`` while the others use the averaged ``d_r``.
    """
    key = (inp.polarization, inp.scenario)
    if key == (Polarization.VV, Scenario.LOS):
        return 0.0
    if inp.scenario is Scenario.LOS:
        idx = range(0, inp.los_count)
    else:
        idx = range(inp.los_count, len(inp.primary_powers))
    if len(idx) == 0:
        raise ValidationError(f"no {inp.scenario.value} entries for the correction sum")
    if not inp.reference_powers:
        needed = CORRECTION_SOURCES[key][1]
        raise ValidationError(f"missing {needed.value} reference powers", reason="missing-reference")
    if len(inp.reference_powers) != len(inp.primary_powers):
        raise ValidationError(
            f"reference has {len(inp.reference_powers)} entries, primary has {len(inp.primary_powers)}",
            reason="mismatched-reference")

    d_r = inp.d_r_m
    terms = []
    for i in idx:
        d_t, p = inp.primary_powers[i]
        _, q = inp.reference_powers[i]
        first = math.sqrt(p * d_t)
        if key == (Polarization.VV, Scenario.NLOS):
            second = math.sqrt(q * d_t)
        elif key == (Polarization.VOMNI, Scenario.NLOS):
            second = compute_rnl(p, d_t, q, d_r)
        else:
            second = math.sqrt(q * d_r)
        terms.append((first - second) ** 2)
    # fsum is exactly rounded, hence independent of summation order
    return math.fsum(terms) / inp.dl_m


def correction_input(dataset: SurveyDataset,
                     references: Optional[Mapping[Polarization, SurveyDataset]] = None
                     ) -> ZmsCorrectionInput:
    """Assemble the correction input for ``dataset`` from paired power surveys.

    ``references`` maps polarization to a survey of the same frequency and
    scenario; which ones are needed is given by :func:`required_references`.
    Surveys are aligned by index after sorting by distance.
    """
    references = {Polarization.parse(k): v for k, v in (references or {}).items()}
    pol, scen = dataset.polarization, dataset.scenario
    sources = CORRECTION_SOURCES[(pol, scen)]
    if not sources:
        return ZmsCorrectionInput((), (), 1.0, dataset.dl_m, scen, pol, 0)

    def survey(p):
        if p is pol:
            return dataset
        if p not in references:
            raise ValidationError(f"ZMS correction for {pol.label} {scen.value} needs a {p.label} "
                                  f"reference survey", reason="missing-reference")
        ref = references[p]
        if ref.scenario is not scen or ref.frequency_hz != dataset.frequency_hz:
            raise ValidationError(f"{p.label} reference must share scenario and frequency with the fitted survey",
                                  reason="incompatible-reference")
        return ref

    first, second = (survey(p) for p in sources)
    if len(first) != len(second):
        raise ValidationError(f"{sources[0].label} survey has {len(first)} rows but {sources[1].label} "
                              f"has {len(second)}", reason="mismatched-reference")
    primary = tuple(zip(first.distance_m.tolist(), first.powers.tolist()))
    reference = tuple(zip(second.distance_m.tolist(), second.powers.tolist()))
    d_r = float(np.mean(second.distance_m))
    los_count = len(first) if scen is Scenario.LOS else 0
    return ZmsCorrectionInput(primary, reference, d_r, dataset.dl_m, scen, pol, los_count)


def zms_correction_for(dataset, references=None):
    return compute_zms_correction(correction_input(dataset, references))


def normal_equation_residuals(dataset, params) -> Sequence[float]:
    """Left-hand sides of the first-order conditions at ``params`` (all ~0 at the optimum)."""
    if isinstance(params, FiParams):
        L = 10.0 * np.log10(dataset.distance_m)
        r = params.beta * L - dataset.path_loss_db + params.alpha_db
        return [float(np.sum(r)), float(np.sum(L * r))]
    L, P = anchored_terms(dataset)
    c = params.correction_db if isinstance(params, ZmsParams) else 0.0
    return [float(np.sum(L * (params.n * L - P + c)))]
