"""Survey samples, dataset validation, CSV ingestion and a synthetic generator.

CSV layout (UTF-8, header required)::

    distance_m,path_loss_db,frequency_ghz,polarization,scenario[,rx_power_lin]

``polarization`` is one of VV, VH, VOMNI (case-insensitive) and ``scenario``
is LOS or NLOS.  Frequencies are stored in GHz on disk and in Hz in memory.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DataIOError, ValidationError
from .models import fspl_db

DEFAULT_D_MIN_M = 1.9
DEFAULT_D_MAX_M = 45.7
DEFAULT_FREQUENCY_HZ = 28e9

CSV_COLUMNS = ("distance_m", "path_loss_db", "frequency_ghz", "polarization", "scenario")
CSV_OPTIONAL = ("rx_power_lin",)

# Material constants of the simulated floor at 24-39 GHz (relative
# permittivity, conductivity in S/m). Informational only; nothing here
# solves fields.
MATERIALS = {
    "concrete": (5.31, 0.48),
    "glass": (6.27, 0.23),
    "wood": (1.99, 0.17),
    "drywall": (2.94, 0.12),
}


class Polarization(enum.Enum):
    VV = "VV"
    VH = "VH"
    VOMNI = "VOMNI"

    @classmethod
    def parse(cls, label):
        if isinstance(label, cls):
            return label
        key = str(label).strip().upper().replace("-", "").replace("_", "")
        try:
            return cls(key)
        except ValueError:
            raise ValidationError(f"unknown polarization {label!r} (expected VV, VH or VOMNI)") from None

    @property
    def label(self):
        return {"VV": "V-V", "VH": "V-H", "VOMNI": "V-Omni"}[self.value]


class Scenario(enum.Enum):
    LOS = "LOS"
    NLOS = "NLOS"

    @classmethod
    def parse(cls, label):
        if isinstance(label, cls):
            return label
        try:
            return cls(str(label).strip().upper())
        except ValueError:
            raise ValidationError(f"unknown scenario {label!r} (expected LOS or NLOS)") from None


POLARIZATION_ORDER = (Polarization.VV, Polarization.VH, Polarization.VOMNI)
SCENARIO_ORDER = (Scenario.LOS, Scenario.NLOS)


@dataclass(frozen=True)
class PathLossSample:
    distance_m: float
    path_loss_db: float
    frequency_hz: float
    polarization: Polarization
    scenario: Scenario
    rx_power_lin: Optional[float] = None

    def __post_init__(self):
        if not (math.isfinite(self.distance_m) and self.distance_m > 0):
            raise ValidationError(f"distance must be positive and finite, got {self.distance_m!r}")
        if not (math.isfinite(self.path_loss_db) and self.path_loss_db > 0):
            raise ValidationError(f"path loss must be positive, got {self.path_loss_db!r}")
        if not (math.isfinite(self.frequency_hz) and self.frequency_hz > 0):
            raise ValidationError(f"frequency must be positive, got {self.frequency_hz!r}")
        if self.rx_power_lin is not None and not (0 < self.rx_power_lin <= 1):
            raise ValidationError(f"rx_power_lin must lie in (0, 1], got {self.rx_power_lin!r}")


class SurveyDataset:
    """Validated survey: one frequency, polarization and scenario, sorted by distance.

    Values live in read-only numpy arrays; :attr:`samples` rebuilds the
    per-row view.  The constructor takes parallel arrays; see also
    :meth:`from_samples`.
    """

    def __init__(self, distance_m, path_loss_db, frequency_hz, polarization, scenario,
                 rx_power_lin=None, d0_m=1.0, dl_m=None, truth=None):
        d = np.array(distance_m, dtype=float)
        pl = np.array(path_loss_db, dtype=float)
        if d.ndim != 1 or pl.shape != d.shape:
            raise ValidationError("distance and path-loss arrays must be 1-D and equal length")
        if d.size == 0:
            raise ValidationError("dataset is empty")
        if not (math.isfinite(d0_m) and d0_m > 0):
            raise ValidationError(f"d0 must be positive, got {d0_m!r}")
        if not (math.isfinite(frequency_hz) and frequency_hz > 0):
            raise ValidationError(f"frequency must be positive, got {frequency_hz!r}")
        if not np.all(np.isfinite(d)):
            raise ValidationError("distances must be finite")
        if not np.all(np.isfinite(pl) & (pl > 0)):
            bad = int(np.flatnonzero(~(np.isfinite(pl) & (pl > 0)))[0])
            raise ValidationError(f"sample {bad}: path loss must be positive, got {pl[bad]!r}")
        below = np.flatnonzero(d < d0_m)
        if below.size:
            i = int(below[0])
            raise ValidationError(f"sample {i}: distance {d[i]} m is below d0={d0_m} m", reason="below-d0")
        p = None
        if rx_power_lin is not None:
            p = np.array(rx_power_lin, dtype=float)
            if p.shape != d.shape:
                raise ValidationError("rx_power_lin length does not match distances")
            if not np.all((p > 0) & (p <= 1)):
                raise ValidationError("rx_power_lin must lie in (0, 1]")
        order = np.argsort(d, kind="stable")
        d, pl = d[order], pl[order]
        if p is not None:
            p = p[order]
            p.flags.writeable = False
        d.flags.writeable = False
        pl.flags.writeable = False
        dl = float(d[-1]) if dl_m is None else float(dl_m)
        if not dl > 0:
            raise ValidationError(f"D_L must be positive, got {dl!r}")
        self.distance_m = d
        self.path_loss_db = pl
        self.rx_power_lin = p
        self.frequency_hz = float(frequency_hz)
        self.polarization = Polarization.parse(polarization)
        self.scenario = Scenario.parse(scenario)
        self.d0_m = float(d0_m)
        self.dl_m = dl
        self.truth = truth

    @classmethod
    def from_samples(cls, samples, d0_m=1.0, dl_m=None, truth=None):
        samples = list(samples)
        if not samples:
            raise ValidationError("dataset is empty")
        first = samples[0]
        for attr, name in (("frequency_hz", "frequency"), ("polarization", "polarization"),
                           ("scenario", "scenario")):
            if any(getattr(s, attr) != getattr(first, attr) for s in samples):
                raise ValidationError(f"mixed {name} in dataset", reason=f"mixed-{name}")
        powers = [s.rx_power_lin for s in samples]
        if any(p is None for p in powers):
            powers = None
        return cls([s.distance_m for s in samples], [s.path_loss_db for s in samples],
                   first.frequency_hz, first.polarization, first.scenario, powers,
                   d0_m=d0_m, dl_m=dl_m, truth=truth)

    def __len__(self):
        return int(self.distance_m.size)

    def __repr__(self):
        return (f"SurveyDataset(n={len(self)}, f={self.frequency_hz:g} Hz, "
                f"{self.polarization.value}/{self.scenario.value}, d0={self.d0_m}, D_L={self.dl_m})")

    def __eq__(self, other):
        if not isinstance(other, SurveyDataset):
            return NotImplemented
        same_power = (self.rx_power_lin is None and other.rx_power_lin is None) or (
            self.rx_power_lin is not None and other.rx_power_lin is not None
            and np.array_equal(self.rx_power_lin, other.rx_power_lin))
        return (np.array_equal(self.distance_m, other.distance_m)
                and np.array_equal(self.path_loss_db, other.path_loss_db)
                and same_power
                and (self.frequency_hz, self.polarization, self.scenario, self.d0_m, self.dl_m)
                == (other.frequency_hz, other.polarization, other.scenario, other.d0_m, other.dl_m))

    __hash__ = None

    @property
    def samples(self):
        powers = self.rx_power_lin if self.rx_power_lin is not None else [None] * len(self)
        return [
            PathLossSample(float(d), float(pl), self.frequency_hz, self.polarization, self.scenario,
                           None if p is None else float(p))
            for d, pl, p in zip(self.distance_m, self.path_loss_db, powers)
        ]

    @property
    def has_power(self):
        return self.rx_power_lin is not None

    @property
    def powers(self):
        if self.rx_power_lin is None:
            raise ValidationError("dataset lacks rx_power_lin values", reason="missing-power")
        return self.rx_power_lin

    def with_path_loss(self, path_loss):
        """Same distances and labels with replaced path-loss values."""
        return SurveyDataset(self.distance_m, path_loss, self.frequency_hz, self.polarization,
                             self.scenario, self.rx_power_lin, d0_m=self.d0_m, dl_m=self.dl_m)

    def subset(self, indices):
        idx = np.asarray(indices, dtype=int)
        p = None if self.rx_power_lin is None else self.rx_power_lin[idx]
        return SurveyDataset(self.distance_m[idx], self.path_loss_db[idx], self.frequency_hz,
                             self.polarization, self.scenario, p, d0_m=self.d0_m)


def split_dataset(dataset, holdout_fraction, seed=0):
    """Random train/evaluate split; returns ``(train, holdout)``.

    With ``holdout_fraction == 0`` the holdout is ``None`` and ``train`` is
    the original dataset.
    """
    if not 0 <= holdout_fraction < 1:
        raise ValidationError("holdout fraction must lie in [0, 1)")
    if holdout_fraction == 0:
        return dataset, None
    n = len(dataset)
    n_hold = int(round(n * holdout_fraction))
    if n_hold < 1 or n - n_hold < 2:
        raise ValidationError("holdout split leaves too few samples")
    order = np.random.default_rng(seed).permutation(n)
    hold = sorted(order[:n_hold].tolist())
    train = sorted(order[n_hold:].tolist())
    return dataset.subset(train), dataset.subset(hold)


# -- CSV -----------------------------------------------------------------------

def _parse_rows(reader, d0_m, source):
    header = next(reader, None)
    if header is None:
        raise ValidationError(f"{source}: file is empty")
    header = [h.strip().lower() for h in header]
    if tuple(header[:5]) != CSV_COLUMNS or len(header) > 6 or (len(header) == 6 and header[5] != CSV_OPTIONAL[0]):
        raise ValidationError(f"{source}: header must be {','.join(CSV_COLUMNS)}[,rx_power_lin]",
                              reason="bad-header")
    has_power = len(header) == 6
    samples = []
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise ValidationError(f"{source}: line {line}: expected {len(header)} fields, got {len(row)}",
                                  reason="malformed-row")
        try:
            distance = float(row[0])
            path_loss = float(row[1])
            freq_hz = float(row[2]) * 1e9
            power = float(row[5]) if has_power and row[5].strip() else None
        except ValueError as exc:
            raise ValidationError(f"{source}: line {line}: {exc}", reason="malformed-row") from None
        try:
            sample = PathLossSample(distance, path_loss, freq_hz, Polarization.parse(row[3]),
                                    Scenario.parse(row[4]), power)
        except ValidationError as exc:
            raise ValidationError(f"{source}: line {line}: {exc}", reason="malformed-row") from None
        if distance < d0_m:
            raise ValidationError(f"{source}: line {line}: distance {distance} m is below d0={d0_m} m",
                                  reason="below-d0")
        samples.append(sample)
    if not samples:
        raise ValidationError(f"{source}: no data rows")
    return SurveyDataset.from_samples(samples, d0_m=d0_m)


def load_csv(path, d0_m=1.0):
    """Read and validate a survey CSV.  ``dl_m`` is set to the largest distance."""
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            return _parse_rows(csv.reader(fh), d0_m, path.name)
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc.strerror or exc}") from None


def loads_csv(text, d0_m=1.0, source="<string>"):
    return _parse_rows(csv.reader(io.StringIO(text)), d0_m, source)


def dumps_csv(dataset):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    has_power = dataset.has_power
    writer.writerow(CSV_COLUMNS + (CSV_OPTIONAL if has_power else ()))
    for s in dataset.samples:
        row = [repr(s.distance_m), repr(s.path_loss_db), repr(s.frequency_hz / 1e9),
               s.polarization.value, s.scenario.value]
        if has_power:
            row.append(repr(s.rx_power_lin))
        writer.writerow(row)
    return buf.getvalue()


def write_csv(dataset, path):
    try:
        Path(path).write_text(dumps_csv(dataset), encoding="utf-8")
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc.strerror or exc}") from None


# -- synthetic surveys ---------------------------------------------------------

@dataclass(frozen=True)
class GeneratorSpec:
    """Ground-truth description of a synthetic survey.

    ``model`` is ``"CI"`` (uses ``n``) or ``"FI"`` (uses ``alpha_db`` and
    ``beta``).  Distances are drawn uniformly in ``[d_min_m, d_max_m]``.
    """

    model: str = "CI"
    n: Optional[float] = None
    alpha_db: Optional[float] = None
    beta: Optional[float] = None
    sigma_db: float = 0.0
    n_samples: int = 100
    d_min_m: float = DEFAULT_D_MIN_M
    d_max_m: float = DEFAULT_D_MAX_M
    frequency_hz: float = DEFAULT_FREQUENCY_HZ
    seed: int = 0
    d0_m: float = 1.0
    polarization: Polarization = Polarization.VV
    scenario: Scenario = Scenario.LOS
    with_power: bool = True

    def __post_init__(self):
        model = str(self.model).upper()
        object.__setattr__(self, "model", model)
        object.__setattr__(self, "polarization", Polarization.parse(self.polarization))
        object.__setattr__(self, "scenario", Scenario.parse(self.scenario))
        if model == "CI":
            if self.n is None or not math.isfinite(self.n):
                raise ValidationError("CI truth needs a finite n")
        elif model == "FI":
            if self.alpha_db is None or self.beta is None:
                raise ValidationError("FI truth needs alpha and beta")
            if not (math.isfinite(self.alpha_db) and math.isfinite(self.beta)):
                raise ValidationError("FI truth parameters must be finite")
        else:
            raise ValidationError(f"generator model must be CI or FI, got {self.model!r}")
        if not (math.isfinite(self.sigma_db) and self.sigma_db >= 0):
            raise ValidationError("sigma must be >= 0")
        if int(self.n_samples) != self.n_samples or self.n_samples < 2:
            raise ValidationError("need at least 2 samples")
        if not self.d0_m > 0:
            raise ValidationError("d0 must be positive")
        if not (self.d0_m <= self.d_min_m < self.d_max_m):
            raise ValidationError("distances must satisfy d0 <= d_min < d_max")
        if not self.frequency_hz > 0:
            raise ValidationError("frequency must be positive")

    def truth(self):
        if self.model == "CI":
            return {"model": "CI", "n": self.n, "sigma": self.sigma_db}
        return {"model": "FI", "alpha": self.alpha_db, "beta": self.beta, "sigma": self.sigma_db}

    def mean_path_loss(self, d):
        d = np.asarray(d, dtype=float)
        if self.model == "CI":
            return fspl_db(self.frequency_hz, self.d0_m) + 10.0 * self.n * np.log10(d / self.d0_m)
        return self.alpha_db + 10.0 * self.beta * np.log10(d)


def generate_synthetic(spec: GeneratorSpec) -> SurveyDataset:
    """Draw a survey from ``spec``; identical seeds give identical datasets.

    Path loss is the model mean plus N(0, sigma^2) shadow fading.  When
    ``spec.with_power`` is set, ``rx_power_lin`` is the linear gain
    ``10**(-PL/10)`` implied by each sample.
    """
    rng = np.random.default_rng(spec.seed)
    d = rng.uniform(spec.d_min_m, spec.d_max_m, size=int(spec.n_samples))
    noise = rng.standard_normal(int(spec.n_samples)) * spec.sigma_db
    pl = spec.mean_path_loss(d) + noise
    if np.any(pl <= 0):
        raise ValidationError("generated non-positive path loss; check truth parameters")
    power = 10.0 ** (-pl / 10.0) if spec.with_power else None
    return SurveyDataset(d, pl, spec.frequency_hz, spec.polarization, spec.scenario, power,
                         d0_m=spec.d0_m, truth=spec.truth())
