"""Command-line entry point.

Subcommands: ``dea``, ``gm11``, ``backtest``, ``plotdata``, ``deflate``,
``convert``. Settings resolve as command-line flag, then ``--config`` JSON
file, then built-in default. Exit codes: 0 success, 2 validation error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from deagrey import dataset, dea, grey
from deagrey.errors import DeaGreyError, ValidationError
from deagrey.report import (EFFICIENCY_DECIMALS, ERROR_DECIMALS, Report,
                            paper_round)

DEFAULTS = {
    "common": {"input": None, "format": "json", "round": "full", "output": None},
    "dea": {"fixture": None, "outputs": None, "inputs": None, "dmu_axis": "region",
            "regions": None, "year": None, "dmu_years": None,
            "orientation": "input", "rts": "vrs", "slack_stage": "two-stage",
            "deflate": False, "zero_policy": "reject"},
    "gm11": {"region": None, "indicators": None, "energy_class": None,
             "mapping": "paper", "start": None, "end": None, "method": "gm11",
             "years": None, "horizon": 0, "slope": None, "intercept": None},
    "backtest": {"region": None, "indicators": None, "energy_class": None,
                 "mapping": "paper", "start": None, "end": None,
                 "train_len": None, "method": "gm11"},
    "plotdata": {"regions": None, "grouping": "class", "mapping": "paper",
                 "start": None, "end": None},
    "deflate": {"value": None, "year": None},
    "convert": {"indicator": None, "unit": "", "year_column": "year", "year_offset": 0},
}


def _csv_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _year_list(text):
    out = []
    for part in _csv_list(text):
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def build_parser():
    p = argparse.ArgumentParser(prog="deagrey", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--input", help="input data file")
        sp.add_argument("--format", choices=["json", "csv"])
        sp.add_argument("--round", choices=["full", "paper"],
                        help="'paper' rounds efficiencies to 3 and errors to 4 decimals")
        sp.add_argument("--output", help="write the report here instead of stdout")
        sp.add_argument("--config", help="JSON file with default settings")
        sp.add_argument("--print-config", action="store_true",
                        help="print the resolved configuration and exit")

    def series_args(sp):
        sp.add_argument("--region")
        sp.add_argument("--indicators", type=_csv_list,
                        help="comma-separated indicator codes summed into one series")
        sp.add_argument("--class", dest="energy_class",
                        choices=[c.value for c in dataset.EnergyClass],
                        help="sum every indicator in this energy class")
        sp.add_argument("--mapping", choices=["paper", "corrected"])
        sp.add_argument("--start", type=int, help="first training year")
        sp.add_argument("--end", type=int, help="last training year")

    sp = sub.add_parser("dea", help="DEA efficiency table")
    common(sp)
    sp.add_argument("--fixture", choices=["states2009"], help="use a shipped dataset")
    sp.add_argument("--outputs", type=_csv_list)
    sp.add_argument("--inputs", type=_csv_list)
    sp.add_argument("--dmu-axis", choices=["region", "year"])
    sp.add_argument("--regions", type=_csv_list)
    sp.add_argument("--year", type=int, help="year scored when regions are the DMUs")
    sp.add_argument("--dmu-years", type=_year_list,
                    help="years scored when years are the DMUs, e.g. 1960-2009")
    sp.add_argument("--orientation", choices=["input", "output"])
    sp.add_argument("--rts", choices=["crs", "vrs"])
    sp.add_argument("--slack-stage", choices=["radial", "two-stage"])
    sp.add_argument("--deflate", action="store_true", default=None)
    sp.add_argument("--zero-policy", choices=["reject", "replace"])

    sp = sub.add_parser("gm11", help="GM(1,1) or linear forecast")
    common(sp)
    series_args(sp)
    sp.add_argument("--method", choices=["gm11", "linear"])
    sp.add_argument("--years", type=_year_list, help="forecast target years")
    sp.add_argument("--horizon", type=int, help="extra steps past the training data")
    sp.add_argument("--slope", type=float, help="use this linear model instead of fitting")
    sp.add_argument("--intercept", type=float)

    sp = sub.add_parser("backtest", help="holdout backtest")
    common(sp)
    series_args(sp)
    sp.add_argument("--train-len", type=int)
    sp.add_argument("--method", choices=["gm11", "linear"])

    sp = sub.add_parser("plotdata", help="tidy series and shares for charts")
    common(sp)
    sp.add_argument("--regions", type=_csv_list)
    sp.add_argument("--grouping", choices=["class", "sector"])
    sp.add_argument("--mapping", choices=["paper", "corrected"])
    sp.add_argument("--start", type=int)
    sp.add_argument("--end", type=int)

    sp = sub.add_parser("deflate", help="convert nominal dollars to 2009 dollars")
    common(sp)
    sp.add_argument("--value", type=float)
    sp.add_argument("--year", type=int)

    sp = sub.add_parser("convert", help="wide year-by-region table to long format")
    common(sp)
    sp.add_argument("--indicator")
    sp.add_argument("--unit")
    sp.add_argument("--year-column")
    sp.add_argument("--year-offset", type=int)
    return p


def resolve_config(args) -> dict:
    """Merge flags over the ``--config`` file over defaults."""
    cmd = args.command
    file_cfg = {}
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise ValidationError("config file must hold a JSON object")
    cfg = {"command": cmd}
    for key, default in {**DEFAULTS["common"], **DEFAULTS[cmd]}.items():
        flag = getattr(args, key, None)
        cfg[key] = flag if flag is not None else file_cfg.get(key, default)
    unknown = set(file_cfg) - set(cfg)
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    if cfg["input"] is not None and not Path(cfg["input"]).exists():
        raise ValidationError(f"input path does not exist: {cfg['input']}")
    return cfg


def _panel(cfg):
    if cfg.get("fixture") == "states2009":
        return dataset.load_states_2009()
    if not cfg["input"]:
        raise ValidationError("--input is required")
    return dataset.load_panel(cfg["input"])


def _rounder(cfg, decimals):
    if cfg["round"] == "paper":
        return lambda x: paper_round(x, decimals)
    return lambda x: x


# ---------------------------------------------------------------- subcommands

def cmd_dea(cfg) -> Report:
    panel = _panel(cfg)
    if cfg.get("fixture") == "states2009":
        base = dataset.states_2009_spec()
        outputs = cfg["outputs"] or list(base.outputs)
        inputs = cfg["inputs"] or list(base.inputs)
    else:
        outputs, inputs = cfg["outputs"], cfg["inputs"]
    if not outputs or not inputs:
        raise ValidationError("--outputs and --inputs are required")
    if cfg["dmu_axis"] == "region":
        year = cfg["year"]
        if year is None:
            year = 2009 if cfg.get("fixture") == "states2009" else None
        if year is None:
            raise ValidationError("--year is required when regions are the DMUs")
        spec = dataset.DeaSpec(outputs, inputs, "region",
                               cfg["regions"] if cfg["regions"] is not None else None,
                               [year], cfg["deflate"], cfg["zero_policy"])
    else:
        regions = cfg["regions"] or []
        spec = dataset.DeaSpec(outputs, inputs, "year", regions,
                               cfg["dmu_years"], cfg["deflate"], cfg["zero_policy"])
    instance = dataset.build_dea_instance(panel, spec)

    orient = dea.Orientation(cfg["orientation"])
    stage = dea.SlackStage(cfg["slack_stage"])
    chosen = dea.Rts(cfg["rts"])
    eff = _rounder(cfg, EFFICIENCY_DECIMALS)
    columns = ["dmu", "score", "efficient", "crste", "vrste", "scale", "rts",
               "sum_lambda_crs", "boundary"]
    columns += [f"slack_in:{c}" for c in instance.input_names]
    columns += [f"slack_out:{c}" for c in instance.output_names]
    columns += [f"target_in:{c}" for c in instance.input_names]
    columns += [f"target_out:{c}" for c in instance.output_names]
    rows = []
    for k, name in enumerate(instance.dmu_names):
        crs = dea.evaluate_dmu(instance, k, dea.DeaOptions(orient, dea.Rts.CRS, stage))
        vrs = dea.evaluate_dmu(instance, k, dea.DeaOptions(orient, dea.Rts.VRS, stage))
        dec = dea.decompose(instance, k, orient, stage, crs_score=crs, vrs_score=vrs)
        score = crs if chosen is dea.Rts.CRS else vrs
        target = dea.project(instance, score)
        rows.append([name, eff(score.score), score.efficient, eff(dec.te), eff(dec.pte),
                     eff(dec.se), dec.rts_class.value, crs.sum_lambda, dec.boundary,
                     *score.input_slacks.tolist(), *score.output_slacks.tolist(),
                     *target.target_inputs.tolist(), *target.target_outputs.tolist()])
    return Report("dea", cfg, columns, rows)


def _series(cfg, panel):
    region = cfg["region"]
    if not region:
        regions = panel.regions
        if len(regions) != 1:
            raise ValidationError("--region is required for multi-region panels")
        region = regions[0]
    if cfg["indicators"]:
        codes = cfg["indicators"]
    elif cfg["energy_class"]:
        present = [c for c in panel.indicators if c.upper() in dataset.ENERGY_CODES]
        codes = dataset.group_indicators(present, "class", cfg["mapping"])[cfg["energy_class"]]
        if not codes:
            raise ValidationError(f"no indicators of class {cfg['energy_class']} in panel")
    else:
        codes = panel.indicators
        if len(codes) != 1:
            raise ValidationError("--indicators or --class is required")
    years = [y for (r, c, y) in (ob.key for ob in panel) if r == region and c in codes]
    if not years:
        raise ValidationError(f"no data for region {region!r}")
    start = cfg["start"] if cfg["start"] is not None else min(years)
    end = cfg["end"] if cfg["end"] is not None else max(years)
    if end < start:
        raise ValidationError("--end precedes --start")
    return region, codes, dataset.aggregate(panel, region, codes, range(start, end + 1))


def cmd_gm11(cfg) -> Report:
    method = grey.Method(cfg["method"])
    target_years = list(cfg["years"] or [])
    columns = ["year", "kind", "value"]
    rows = []
    if cfg["slope"] is not None or cfg["intercept"] is not None:
        if cfg["slope"] is None or cfg["intercept"] is None:
            raise ValidationError("--slope and --intercept go together")
        if method is not grey.Method.LINEAR:
            raise ValidationError("--slope/--intercept need --method linear")
        if not target_years:
            raise ValidationError("--years is required with a given linear model")
        model = grey.LinearModel(cfg["slope"], cfg["intercept"])
        for y, v in zip(target_years, model.predict(target_years)):
            rows.append([int(y), "forecast", float(v)])
        summary = {"method": method.value, "slope": model.slope, "intercept": model.intercept}
        return Report("gm11", cfg, columns, rows, summary)

    panel = _panel(cfg)
    region, codes, series = _series(cfg, panel)
    last = int(series.years[-1])
    bad = [y for y in target_years if y <= last]
    if bad:
        raise ValidationError(f"forecast years must follow the last training year {last}: {bad}")
    horizon = max([cfg["horizon"] or 0] + [y - last for y in target_years])
    for y, v in zip(series.years, series.values):
        rows.append([int(y), "actual", float(v)])
    summary = {"method": method.value, "region": region, "indicators": list(codes),
               "unit": series.unit}
    if method is grey.Method.GM11:
        model = grey.fit_gm11(series)
        path = grey.fitted_and_forecast(model, horizon)
        summary.update(a=model.a, b=model.b, first_value=model.first_value,
                       n=model.n, degenerate=model.degenerate,
                       class_ratio_ok=grey.class_ratio_ok(series))
    else:
        model = grey.fit_linear(series)
        path = model.predict(np.arange(series.start_year, last + horizon + 1))
        summary.update(slope=model.slope, intercept=model.intercept)
    all_years = np.arange(series.start_year, last + horizon + 1)
    for y, v in zip(all_years, path):
        kind = "fitted" if y <= last else "forecast"
        if kind == "fitted" or not target_years or int(y) in target_years:
            rows.append([int(y), kind, float(v)])
    return Report("gm11", cfg, columns, rows, summary)


def cmd_backtest(cfg) -> Report:
    panel = _panel(cfg)
    region, codes, series = _series(cfg, panel)
    if cfg["train_len"] is None:
        raise ValidationError("--train-len is required")
    rep = grey.backtest(series, cfg["train_len"], cfg["method"])
    err = _rounder(cfg, ERROR_DECIMALS)
    rows = [[r.year, r.actual, r.predicted, err(r.relative_error)] for r in rep.rows]
    summary = {"method": rep.method.value, "region": region, "indicators": list(codes),
               "train_len": rep.train_len,
               "mean_relative_error": err(rep.mean_relative_error)}
    return Report("backtest", cfg, ["year", "actual", "predicted", "relative_error"],
                  rows, summary)


def cmd_plotdata(cfg) -> Report:
    panel = _panel(cfg)
    grouping = cfg["grouping"]
    if grouping == "class":
        codes = [c for c in panel.indicators if c.upper() in dataset.ENERGY_CODES]
    else:
        codes = [c for c in panel.indicators
                 if c.upper().split(".", 1)[0] in {s.value for s in dataset.Sector}]
    if not codes:
        raise ValidationError(f"panel has no indicators usable for {grouping} grouping")
    groups = dataset.group_indicators(codes, grouping, cfg["mapping"])
    regions = cfg["regions"] or panel.regions
    years = [y for y in panel.years
             if (cfg["start"] is None or y >= cfg["start"])
             and (cfg["end"] is None or y <= cfg["end"])]
    if not years:
        raise ValidationError("no years selected")
    rows = []
    for region in regions:
        per_group = {g: dataset.aggregate(panel, region, members, years)
                     for g, members in groups.items()}
        for g, s in per_group.items():
            for y, v in zip(s.years, s.values):
                rows.append(["series", region, g, int(y), float(v)])
        for g, share in dataset.shares(per_group).items():
            for y, v in zip(years, share):
                rows.append(["share", region, g, int(y), float(v)])
    return Report("plotdata", cfg, ["kind", "region", "group", "year", "value"], rows,
                  {"grouping": grouping, "mapping": cfg["mapping"]})


def cmd_deflate(cfg) -> Report:
    table = dataset.load_deflators()
    columns = ["region", "year", "indicator", "nominal", "multiplier", "real", "unit"]
    rows = []
    if cfg["value"] is not None:
        if cfg["year"] is None:
            raise ValidationError("--year is required with --value")
        m = table.multiplier(cfg["year"])
        rows.append(["", cfg["year"], "", cfg["value"], m,
                     dataset.deflate(cfg["value"], cfg["year"], table), "dollars"])
    else:
        panel = _panel(cfg)
        for ob in panel:
            if dataset.is_dollar_unit(ob.unit):
                m = table.multiplier(ob.year)
                rows.append([ob.region, ob.year, ob.indicator, ob.value, m,
                             dataset.deflate(ob.value, ob.year, table), ob.unit])
    return Report("deflate", cfg, columns, rows, {"base_year": table.base_year})


def cmd_convert(cfg) -> str:
    if not cfg["input"]:
        raise ValidationError("--input is required")
    if not cfg["indicator"]:
        raise ValidationError("--indicator is required")
    panel = dataset.wide_to_long(cfg["input"], cfg["indicator"], cfg["unit"],
                                 cfg["year_column"], cfg["year_offset"])
    return dataset.emit_panel(panel)


COMMANDS = {"dea": cmd_dea, "gm11": cmd_gm11, "backtest": cmd_backtest,
            "plotdata": cmd_plotdata, "deflate": cmd_deflate, "convert": cmd_convert}


def _write(text, dest):
    if dest:
        Path(dest).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.print_config:
            sys.stdout.write(json.dumps(cfg, indent=2, sort_keys=True) + "\n")
            return 0
        result = COMMANDS[args.command](cfg)
        text = result if isinstance(result, str) else result.render(cfg["format"])
        _write(text, cfg["output"])
    except DeaGreyError as exc:
        sys.stderr.write(json.dumps({"error": exc.to_dict()}, sort_keys=True) + "\n")
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
