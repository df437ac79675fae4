"""Command-line interface.

Examples::

    pathloss generate --model ci --n 2 --sigma 0 --count 10 --seed 7 -o survey.csv
    pathloss fit --model ci --input survey.csv -o ci.json --params-out ci.txt
    pathloss fit --model zms --input nlos_vh.csv --reference nlos_vv.csv --oracle -o zms.json
    pathloss predict --params ci.txt --d-min 1.9 --d-max 45.7 --step 1 -o curve.txt
    pathloss compare ci.json zms.json -o cmp.json --table cmp.txt
    pathloss report survey_*.csv --out-dir out/

Exit status: 0 success, 2 input/validation error, 3 degenerate fit,
4 I/O error.  Failures print one ``<reason>: <message>`` line on stderr.
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import evaluation, export
from .data import GeneratorSpec, Polarization, dumps_csv, generate_synthetic, load_csv, write_csv
from .errors import DataIOError, PathLossError, ValidationError
from .estimation import required_references
from .models import dumps_params, loads_params, params_to_dict

LOG = logging.getLogger("pathloss")
SEED_ENV = "PATHLOSS_SEED"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"usage: {' '.join(message.split())}\n")


def _write(path, text):
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc.strerror or exc}") from None


def _read(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc.strerror or exc}") from None


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ValidationError(f"{SEED_ENV}={env!r} is not an integer") from None


def _load_references(paths, d0):
    refs = {}
    for path in paths or ():
        ds = load_csv(path, d0_m=d0)
        if ds.polarization in refs:
            raise ValidationError(f"two reference surveys for {ds.polarization.label}", reason="duplicate-reference")
        refs[ds.polarization] = ds
    return refs


# -- subcommands ---------------------------------------------------------------

def cmd_fit(args):
    dataset = load_csv(args.input, d0_m=args.d0)
    model = args.model.upper()
    refs = _load_references(args.reference, args.d0)
    if model == "ZMS" and args.correction is None:
        missing = [p for p in required_references(dataset.polarization, dataset.scenario) if p not in refs]
        if missing:
            names = ", ".join(p.label for p in missing)
            raise ValidationError(
                f"ZMS fit of {dataset.polarization.label} {dataset.scenario.value} needs --reference "
                f"survey(s) for {names}", reason="missing-reference")
    elif refs and model != "ZMS":
        LOG.warning("--reference is ignored for model %s", model)
    report = evaluation.fit_report(dataset, model, correction_db=args.correction, references=refs,
                                   holdout_fraction=args.holdout, seed=_seed(args), oracle=args.oracle)
    _write(args.output, evaluation.report_to_json(report))
    if args.params_out:
        _write(args.params_out, dumps_params(report.params))
    if args.output not in (None, "-"):
        sys.stdout.write(evaluation.render_report(report))
    return 0


def cmd_predict(args):
    params = loads_params(_read(args.params))
    d, pl = export.curve_points(params, args.d_min, args.d_max, args.step)
    comments = [f"{k}={v}" for k, v in params_to_dict(params).items()]
    _write(args.output, export.format_columns(("distance_m", "path_loss_db"), (d, pl), comments))
    return 0


def cmd_generate(args):
    model = args.model.upper()
    spec = GeneratorSpec(
        model=model,
        n=args.n,
        alpha_db=args.alpha,
        beta=args.beta,
        sigma_db=args.sigma,
        n_samples=args.count,
        d_min_m=args.d_min,
        d_max_m=args.d_max,
        frequency_hz=args.freq_ghz * 1e9,
        seed=_seed(args),
        d0_m=args.d0,
        polarization=args.polarization,
        scenario=args.scenario,
        with_power=not args.no_power,
    )
    dataset = generate_synthetic(spec)
    if args.output in (None, "-"):
        sys.stdout.write(dumps_csv(dataset))
    else:
        write_csv(dataset, args.output)
    return 0


def cmd_compare(args):
    reports = [evaluation.report_from_json(_read(p)) for p in args.reports]
    table = evaluation.compare_models(reports)
    _write(args.output, evaluation.comparison_to_json(table))
    text = evaluation.render_comparison(table)
    if args.table:
        _write(args.table, text)
    elif args.output not in (None, "-"):
        sys.stdout.write(text)
    return 0


def cmd_report(args):
    """Fit every requested model to every input survey and write tables, data files and figures."""
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataIOError(f"cannot create {out}: {exc.strerror or exc}") from None

    datasets = {}
    for path in args.inputs:
        ds = load_csv(path, d0_m=args.d0)
        key = (ds.polarization, ds.scenario)
        if key in datasets:
            raise ValidationError(f"two surveys for {ds.polarization.label} {ds.scenario.value}",
                                  reason="duplicate-survey")
        datasets[key] = ds
    if len({ds.frequency_hz for ds in datasets.values()}) != 1:
        raise ValidationError("surveys come from different frequencies", reason="incompatible-reports")

    models = [m.strip().upper() for m in args.models.split(",") if m.strip()]
    reports = {m: {} for m in models}
    for (pol, scen), ds in sorted(datasets.items(), key=lambda kv: (kv[0][0].value, kv[0][1].value)):
        for model in models:
            refs = {}
            if model == "ZMS":
                needed = required_references(pol, scen)
                if any((p, scen) not in datasets for p in needed):
                    names = ", ".join(p.label for p in needed)
                    LOG.warning("skipping ZMS for %s %s: needs %s survey(s) of the same scenario",
                                pol.label, scen.value, names)
                    continue
                refs = {p: datasets[(p, scen)] for p in needed}
            reports[model][(pol, scen)] = evaluation.fit_report(ds, model, references=refs)

    all_reports = [r for m in models for r in reports[m].values()]
    text = evaluation.render_table(
        [evaluation.ComparisonRow(r.model_id, r.polarization, r.scenario,
                                  {k: v for k, v in r.to_dict()["params"].items() if k != "model"},
                                  r.sigma_db, r.rmse_db) for r in all_reports],
        title=f"Fitted path-loss parameters at {next(iter(datasets.values())).frequency_hz / 1e9:g} GHz")
    doc = {"format": "pathloss-report/1", "reports": [r.to_dict() for r in all_reports]}
    if len(all_reports) >= 2:
        try:
            table = evaluation.compare_models(all_reports)
        except ValidationError:
            table = None
        if table is not None:
            doc["comparison"] = table.to_dict()
            text = evaluation.render_comparison(table)
    _write(out / "report.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    _write(out / "table.txt", text)

    for (pol, scen), ds in datasets.items():
        stem = f"{pol.value.lower()}_{scen.value.lower()}"
        _write(out / f"scatter_{stem}.txt",
               export.format_columns(("distance_m", "path_loss_db"), (ds.distance_m, ds.path_loss_db),
                                     [f"polarization={pol.value} scenario={scen.value}"]))
        for model in models:
            rep = reports[model].get((pol, scen))
            if rep is None:
                continue
            d_lo, d_hi = float(ds.distance_m[0]), float(ds.distance_m[-1])
            d, pl = export.curve_points(rep.params, d_lo, d_hi, max((d_hi - d_lo) / 200, 1e-3))
            _write(out / f"curve_{model.lower()}_{stem}.txt",
                   export.format_columns(("distance_m", "path_loss_db"), (d, pl),
                                         [f"{k}={v}" for k, v in params_to_dict(rep.params).items()]))
    if not args.no_figures:
        from .plotting import fit_figure
        freq = next(iter(datasets.values())).frequency_hz / 1e9
        for model in models:
            fit_figure(model, datasets, reports[model], out / f"fig_{model.lower()}.png",
                       title=f"{model} path loss model at {freq:g} GHz")
    sys.stdout.write(text)
    return 0


# -- parser --------------------------------------------------------------------

def build_parser():
    parser = _Parser(prog="pathloss", description="Fit and compare CI, FI and ZMS path-loss models.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--d0", type=float, default=1.0, help="reference distance in m (default 1)")
        p.add_argument("--seed", type=int, default=None,
                       help=f"RNG seed (default: ${SEED_ENV}, else 0)")

    p = sub.add_parser("fit", help="fit one model to a survey CSV")
    p.add_argument("--model", required=True, type=str.lower, choices=["ci", "fi", "zms"])
    p.add_argument("--input", required=True)
    p.add_argument("--reference", action="append", default=[],
                   help="paired power survey for the ZMS correction (repeatable)")
    p.add_argument("--correction", type=float, default=None,
                   help="use this ZMS correction in dB instead of computing it")
    p.add_argument("--oracle", action="store_true", help="also run the exhaustive grid search and report the delta")
    p.add_argument("--holdout", type=float, default=0.0, help="fraction held out for RMSE (default 0)")
    p.add_argument("-o", "--output", default=None, help="fit report JSON (default stdout)")
    p.add_argument("--params-out", default=None, help="write the fitted parameters as key = value text")
    common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="evaluate a fitted model over a distance sweep")
    p.add_argument("--params", required=True)
    p.add_argument("--d-min", type=float, required=True)
    p.add_argument("--d-max", type=float, required=True)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("generate", help="write a synthetic survey CSV with known truth")
    p.add_argument("--model", type=str.lower, choices=["ci", "fi"], default="ci")
    p.add_argument("--n", type=float, default=None, help="CI path-loss exponent")
    p.add_argument("--alpha", type=float, default=None, help="FI intercept in dB")
    p.add_argument("--beta", type=float, default=None, help="FI slope")
    p.add_argument("--sigma", type=float, default=0.0, help="shadow-fading std in dB")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--d-min", type=float, default=1.9)
    p.add_argument("--d-max", type=float, default=45.7)
    p.add_argument("--freq-ghz", type=float, default=28.0)
    p.add_argument("--polarization", default="VV", type=Polarization.parse)
    p.add_argument("--scenario", default="LOS")
    p.add_argument("--no-power", action="store_true", help="omit the rx_power_lin column")
    p.add_argument("-o", "--output", default=None)
    common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("compare", help="compare two or more fit reports")
    p.add_argument("reports", nargs="+")
    p.add_argument("-o", "--output", default=None, help="comparison JSON (default stdout)")
    p.add_argument("--table", default=None, help="fixed-width text table")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", help="fit all models to several surveys; write tables, data files and figures")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--models", default="ci,fi,zms")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--d0", type=float, default=1.0)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except PathLossError as exc:
        sys.stderr.write(exc.oneline() + "\n")
        return exc.exit_status


if __name__ == "__main__":
    sys.exit(main())
