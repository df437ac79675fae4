"""Residuals, RMSE, fit reports and model comparison tables.

Two serializations are provided and both are stable:

* JSON documents (``report_to_json`` / ``comparison_to_json``), keys sorted,
  floats written with ``repr`` precision;
* fixed-width text tables laid out as polarization rows (V-V, V-H, V-Omni)
  against LOS/NLOS column groups.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import estimation
from .data import POLARIZATION_ORDER, SCENARIO_ORDER, Polarization, Scenario, SurveyDataset, split_dataset
from .errors import ValidationError
from .models import CiParams, FiParams, ZmsParams, params_from_dict, params_to_dict, predict

MODEL_IDS = ("CI", "FI", "ZMS")
TIE_TOL = 1e-9
REPORT_FORMAT = "pathloss-fit-report/1"
COMPARISON_FORMAT = "pathloss-comparison/1"


def _check_context(dataset, params):
    if isinstance(params, (CiParams, ZmsParams)):
        if params.frequency_hz != dataset.frequency_hz:
            raise ValidationError(
                f"parameters are for {params.frequency_hz:g} Hz but the dataset is at {dataset.frequency_hz:g} Hz",
                reason="model-mismatch")
        if params.d0_m != dataset.d0_m:
            raise ValidationError("parameters and dataset use different reference distances",
                                  reason="model-mismatch")
    elif not isinstance(params, FiParams):
        raise ValidationError(f"not a parameter set: {params!r}", reason="model-mismatch")


def residuals(dataset: SurveyDataset, params) -> np.ndarray:
    """Measured minus predicted path loss (dB), in dataset order."""
    _check_context(dataset, params)
    return dataset.path_loss_db - predict(params, dataset.distance_m)


def rmse(dataset: SurveyDataset, params) -> float:
    r = residuals(dataset, params)
    if r.size == 0:
        raise ValidationError("empty dataset")
    return math.sqrt(float(np.mean(r * r)))


@dataclass
class FitReport:
    model_id: str
    params: object
    residuals_db: Tuple[float, ...]
    sigma_db: float
    rmse_db: float
    n_samples: int
    polarization: Polarization
    scenario: Scenario
    frequency_hz: float
    d0_m: float = 1.0
    dl_m: Optional[float] = None
    annotation: Optional[str] = None
    oracle: Optional[dict] = None
    holdout: bool = False

    def __post_init__(self):
        if self.model_id not in MODEL_IDS:
            raise ValidationError(f"unknown model {self.model_id!r}")
        if len(self.residuals_db) != self.n_samples:
            raise ValidationError("residual count does not match n_samples")
        if not self.rmse_db >= 0:
            raise ValidationError("rmse must be >= 0")

    @property
    def exponent(self):
        return self.params.exponent

    @property
    def cell(self):
        return (self.polarization, self.scenario)

    def to_dict(self):
        return {
            "format": REPORT_FORMAT,
            "model": self.model_id,
            "params": params_to_dict(self.params),
            "polarization": self.polarization.value,
            "scenario": self.scenario.value,
            "frequency_hz": self.frequency_hz,
            "d0_m": self.d0_m,
            "dl_m": self.dl_m,
            "n_samples": self.n_samples,
            "sigma_db": self.sigma_db,
            "rmse_db": self.rmse_db,
            "holdout": self.holdout,
            "annotation": self.annotation,
            "oracle": self.oracle,
            "residuals_db": list(self.residuals_db),
        }

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict) or doc.get("format") != REPORT_FORMAT:
            raise ValidationError("not a fit report document", reason="bad-report")
        try:
            return cls(
                model_id=doc["model"],
                params=params_from_dict(doc["params"]),
                residuals_db=tuple(float(r) for r in doc["residuals_db"]),
                sigma_db=float(doc["sigma_db"]),
                rmse_db=float(doc["rmse_db"]),
                n_samples=int(doc["n_samples"]),
                polarization=Polarization.parse(doc["polarization"]),
                scenario=Scenario.parse(doc["scenario"]),
                frequency_hz=float(doc["frequency_hz"]),
                d0_m=float(doc["d0_m"]),
                dl_m=doc.get("dl_m"),
                annotation=doc.get("annotation"),
                oracle=doc.get("oracle"),
                holdout=bool(doc.get("holdout", False)),
            )
        except KeyError as exc:
            raise ValidationError(f"fit report lacks field {exc.args[0]!r}", reason="bad-report") from None
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"malformed fit report: {exc}", reason="bad-report") from None


def flag_sub_freespace_ple(report: FitReport) -> Optional[str]:
    """Annotate exponents below the free-space value of 2 (strictly)."""
    value = report.exponent
    if value < 2.0:
        name = "beta" if report.model_id == "FI" else "n"
        return (f"{name}={value:.2f} below free-space exponent 2: "
                "waveguide / constructive-interference regime")
    return None


def fit_model(dataset, model, correction_db=None, references=None):
    """Fit one of CI, FI, ZMS.  For ZMS without an explicit correction the
    correction is computed from ``references`` (see
    :func:`pathloss.estimation.correction_input`)."""
    model = str(model).upper()
    if model == "CI":
        return estimation.fit_ci(dataset)
    if model == "FI":
        return estimation.fit_fi(dataset)
    if model == "ZMS":
        if correction_db is None:
            correction_db = estimation.zms_correction_for(dataset, references)
        return estimation.fit_zms(dataset, correction_db)
    raise ValidationError(f"unknown model {model!r}; choose CI, FI or ZMS")


def fit_report(dataset, model, correction_db=None, references=None, holdout_fraction=0.0,
               seed=0, oracle=False):
    """Fit ``model`` and assemble a :class:`FitReport`.

    ``holdout_fraction`` > 0 fits on a random subset and reports residuals
    and RMSE on the rest; by default residuals are taken about the fitted
    line on the full dataset, where RMSE equals sigma.
    """
    if str(model).upper() == "ZMS" and correction_db is None:
        # paired surveys align index-by-index with the full survey, not a split
        correction_db = estimation.zms_correction_for(dataset, references)
    train, held = split_dataset(dataset, holdout_fraction, seed)
    params = fit_model(train, model, correction_db, references)
    evaluate_on = held if held is not None else train
    r = residuals(evaluate_on, params)
    report = FitReport(
        model_id=params.model_id,
        params=params,
        residuals_db=tuple(float(x) for x in r),
        sigma_db=params.sigma_db,
        rmse_db=math.sqrt(float(np.mean(r * r))),
        n_samples=int(r.size),
        polarization=dataset.polarization,
        scenario=dataset.scenario,
        frequency_hz=dataset.frequency_hz,
        d0_m=dataset.d0_m,
        dl_m=dataset.dl_m,
        holdout=held is not None,
    )
    report.annotation = flag_sub_freespace_ple(report)
    if oracle:
        if params.model_id == "FI":
            raise ValidationError("the grid oracle covers CI and ZMS only", reason="oracle-unsupported")
        corr = params.correction_db if isinstance(params, ZmsParams) else 0.0
        n_grid, sigma_grid = estimation.brute_force_fit(train, params.model_id, corr)
        report.oracle = {
            "n": n_grid,
            "sigma_db": sigma_grid,
            "step": estimation.GRID_STEP,
            "delta_n": abs(params.n - n_grid),
        }
    return report


def report_to_json(report: FitReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def report_from_json(text: str) -> FitReport:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"fit report is not valid JSON: {exc}", reason="bad-report") from None
    return FitReport.from_dict(doc)


# -- comparison ----------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonRow:
    model_id: str
    polarization: Polarization
    scenario: Scenario
    params: dict
    sigma_db: float
    rmse_db: float


@dataclass(frozen=True)
class Verdict:
    """Outcome for one pair of reports in one (polarization, scenario) cell.

    ``outcome`` is -1 when ``first`` has the lower sigma (RMSE breaks sigma
    ties), +1 when ``second`` does, 0 for a tie.
    """

    polarization: Polarization
    scenario: Scenario
    first: str
    second: str
    outcome: int
    metric: str

    @property
    def lower(self):
        return {-1: self.first, 1: self.second}.get(self.outcome)

    def describe(self):
        where = f"{self.polarization.label} {self.scenario.value}"
        if self.outcome == 0:
            return f"{where}: {self.first} vs {self.second}: tie"
        return f"{where}: {self.first} vs {self.second}: {self.lower} has lower {self.metric}"


@dataclass
class ComparisonTable:
    rows: List[ComparisonRow]
    verdicts: List[Verdict] = field(default_factory=list)
    frequency_hz: float = 0.0

    def to_dict(self):
        return {
            "format": COMPARISON_FORMAT,
            "frequency_hz": self.frequency_hz,
            "rows": [
                {
                    "model": r.model_id,
                    "polarization": r.polarization.value,
                    "scenario": r.scenario.value,
                    "params": r.params,
                    "sigma_db": r.sigma_db,
                    "rmse_db": r.rmse_db,
                }
                for r in self.rows
            ],
            "verdicts": [
                {
                    "polarization": v.polarization.value,
                    "scenario": v.scenario.value,
                    "first": v.first,
                    "second": v.second,
                    "outcome": v.outcome,
                    "lower": v.lower,
                    "metric": v.metric,
                }
                for v in self.verdicts
            ],
        }


def _sign(a, b):
    if abs(a - b) <= TIE_TOL:
        return 0
    return -1 if a < b else 1


def _verdict(a: FitReport, b: FitReport) -> Verdict:
    outcome, metric = _sign(a.sigma_db, b.sigma_db), "sigma"
    if outcome == 0:
        outcome, metric = _sign(a.rmse_db, b.rmse_db), "rmse"
    return Verdict(a.polarization, a.scenario, a.model_id, b.model_id, outcome, metric)


def compare_models(reports) -> ComparisonTable:
    """Tabulate reports and give a lower-sigma verdict for each pair within a cell.

    No global winner is declared; verdicts are per polarization/scenario.
    """
    reports = list(reports)
    if len(reports) < 2:
        raise ValidationError("need >= 2 models to compare", reason="need-two-models")
    freqs = {r.frequency_hz for r in reports}
    if len(freqs) != 1:
        raise ValidationError("reports come from different frequencies", reason="incompatible-reports")
    anchored = {r.d0_m for r in reports if r.model_id != "FI"}
    if len(anchored) > 1:
        raise ValidationError("reports use different reference distances", reason="incompatible-reports")
    if not any(a.cell == b.cell for a, b in itertools.combinations(reports, 2)):
        raise ValidationError("no two reports share a polarization/scenario cell",
                              reason="incompatible-reports")

    model_order = list(dict.fromkeys(r.model_id for r in reports))
    indexed = list(enumerate(reports))
    indexed.sort(key=lambda ir: (model_order.index(ir[1].model_id),
                                 POLARIZATION_ORDER.index(ir[1].polarization),
                                 SCENARIO_ORDER.index(ir[1].scenario), ir[0]))
    rows = [ComparisonRow(r.model_id, r.polarization, r.scenario,
                          {k: v for k, v in params_to_dict(r.params).items() if k != "model"},
                          r.sigma_db, r.rmse_db) for _, r in indexed]

    verdicts = []
    for pol in POLARIZATION_ORDER:
        for scen in SCENARIO_ORDER:
            cell = [r for r in reports if r.cell == (pol, scen)]
            for a, b in itertools.combinations(cell, 2):
                verdicts.append(_verdict(a, b))
    return ComparisonTable(rows, verdicts, frequency_hz=freqs.pop())


def comparison_to_json(table: ComparisonTable) -> str:
    return json.dumps(table.to_dict(), indent=2, sort_keys=True) + "\n"


# -- fixed-width rendering -----------------------------------------------------

def _param_columns(model_id):
    if model_id == "FI":
        return ("alpha", "beta", "sigma")
    if model_id == "ZMS":
        return ("n", "zms", "sigma")
    return ("n", "sigma")


def _cell_values(model_id, params, sigma):
    if model_id == "FI":
        return (params["alpha"], params["beta"], sigma)
    if model_id == "ZMS":
        return (params["n"], params["zms_correction"], sigma)
    return (params["n"], sigma)


def render_table(rows, title=None):
    """Render rows in the polarization x {LOS, NLOS} layout, one block per model.

    Missing cells are shown as ``-``.
    """
    width = 8
    lines = []
    if title:
        lines.append(title)
    models = list(dict.fromkeys(r.model_id for r in rows))
    for model in models:
        cols = _param_columns(model)
        group = width * len(cols)
        lines.append(f"{'Model':<6}{'Polarization':<14}" + "".join(f"{s.value:^{group}}" for s in SCENARIO_ORDER))
        lines.append(" " * 20 + "".join(f"{c:>{width}}" for c in cols) * 2)
        lines.append("-" * (20 + 2 * group))
        cells = {(r.polarization, r.scenario): r for r in rows if r.model_id == model}
        first = True
        for pol in POLARIZATION_ORDER:
            if not any((pol, s) in cells for s in SCENARIO_ORDER):
                continue
            text = f"{model if first else '':<6}{pol.label:<14}"
            first = False
            for scen in SCENARIO_ORDER:
                r = cells.get((pol, scen))
                if r is None:
                    text += "".join(f"{'-':>{width}}" for _ in cols)
                else:
                    text += "".join(f"{v:>{width}.2f}" for v in _cell_values(model, r.params, r.sigma_db))
            lines.append(text)
        lines.append("")
    return "\n".join(lines)


def render_comparison(table: ComparisonTable) -> str:
    out = [render_table(table.rows, title=f"Path-loss model comparison at {table.frequency_hz / 1e9:g} GHz"), "Verdicts:"]
    out.extend(f"  {v.describe()}" for v in table.verdicts)
    return "\n".join(out) + "\n"


def render_report(report: FitReport) -> str:
    row = ComparisonRow(report.model_id, report.polarization, report.scenario,
                        {k: v for k, v in params_to_dict(report.params).items() if k != "model"},
                        report.sigma_db, report.rmse_db)
    lines = [render_table([row], title=f"{report.model_id} fit, {report.n_samples} samples, "
                                       f"{report.frequency_hz / 1e9:g} GHz").rstrip("\n"),
             f"RMSE: {report.rmse_db:.4f} dB" + (" (holdout)" if report.holdout else "")]
    if report.annotation:
        lines.append(f"note: {report.annotation}")
    if report.oracle:
        lines.append(f"oracle: n={report.oracle['n']:.4f} (grid step {report.oracle['step']:g}), "
                     f"|delta n|={report.oracle['delta_n']:.2e}")
    return "\n".join(lines) + "\n"
