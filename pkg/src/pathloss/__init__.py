"""Fit, evaluate and compare CI, FI and ZMS large-scale path-loss models."""

from .data import (
    GeneratorSpec,
    PathLossSample,
    Polarization,
    Scenario,
    SurveyDataset,
    generate_synthetic,
    load_csv,
    write_csv,
)
from .errors import DataIOError, DegenerateFitError, PathLossError, ValidationError
from .estimation import (
    ZmsCorrectionInput,
    brute_force_fit,
    compute_rnl,
    compute_zms_correction,
    correction_input,
    fit_ci,
    fit_fi,
    fit_zms,
    zms_correction_for,
)
from .evaluation import (
    ComparisonTable,
    FitReport,
    compare_models,
    fit_report,
    flag_sub_freespace_ple,
    residuals,
    rmse,
)
from .models import CiParams, FiParams, ZmsParams, fspl_db, predict_ci, predict_fi, predict_zms

__version__ = "0.1.0"
