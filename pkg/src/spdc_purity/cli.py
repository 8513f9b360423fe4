"""Command-line front end.

    spdc-purity jsa    --preset paper_fig2c --out results
    spdc-purity jsa    --preset paper_fig2b --sweep pump.filter_nm=0.2,1,2,4,5
    spdc-purity synth  --preset paper_fig2b --seed 1 --out results
    spdc-purity ingest results/paper_fig2b/jsi.csv
    spdc-purity hom    --preset fig3d --out results
    spdc-purity rates  --preset fig3b --against fig3c
    spdc-purity schema

Every command validates its inputs before computing anything and writes
its files only after all results exist. Exit status: 0 success, 1 I/O
failure, 2 invalid input (config, CSV or parameters), 3 degenerate data.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
import warnings
from pathlib import Path

from . import config as cfgmod
from . import jsi_ingest
from .errors import DegenerateInputError
from .presets import PRESET_NAMES
from .rate_model import relative_threefold_rate
from .schmidt_analysis import schmidt_decompose

log = logging.getLogger("spdc_purity")

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_DEGENERATE = 0, 1, 2, 3


def _r(x, digits=12):
    return None if x is None else float(f"{float(x):.{digits}g}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ------------------------------------------------------------------ helpers

def _resolve_config(args, preset_attr="preset", config_attr="config"):
    path = getattr(args, config_attr)
    name = getattr(args, preset_attr)
    if path and name:
        raise cfgmod.ConfigError("give either --preset or --config, not both")
    if path:
        return cfgmod.load(path)
    return cfgmod.resolve({"preset": name or "fig3b"})


def _parse_sweep(spec):
    if "=" not in spec:
        raise cfgmod.ConfigError(f"--sweep expects param=v1,v2,..., got {spec!r}")
    param, _, raw = spec.partition("=")
    values = []
    for item in raw.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            values.append(json.loads(item))
        except json.JSONDecodeError:
            values.append(item)
    if not values:
        raise cfgmod.ConfigError(f"--sweep {param}: no values given")
    return param.strip(), values


def _sweep_configs(cfg, sweep):
    """Validated (value, config) pairs; raises before any computation."""
    param, values = _parse_sweep(sweep)
    out = []
    for v in values:
        c = cfgmod.set_path(cfg, param, v)
        cfgmod.to_scenario(c)  # range checks only, cheap
        out.append((v, c))
    return param, out


def _table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if x is None else (f"{x:.12g}" if isinstance(x, float) else x) for x in row])
    return buf.getvalue()


def _flat_csv(report: dict) -> str:
    rows = []

    def walk(prefix, node):
        if isinstance(node, dict):
            for k in sorted(node):
                walk(f"{prefix}.{k}" if prefix else k, node[k])
        elif isinstance(node, list):
            for j, v in enumerate(node):
                walk(f"{prefix}[{j}]", v)
        else:
            rows.append((prefix, node))

    walk("", report)
    return _table(["key", "value"], rows)


def _write_outputs(out_dir, name, files: dict):
    """Write ``files`` into ``out_dir/name`` atomically, one file at a time."""
    target = Path(out_dir) / name
    target.mkdir(parents=True, exist_ok=True)
    for fname, text in files.items():
        fd, tmp = tempfile.mkstemp(dir=target, prefix=f".{fname}.")
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target / fname)
        log.info("wrote %s", target / fname)


def _emit(args, report, csv_text=None):
    if args.format == "csv":
        sys.stdout.write(csv_text if csv_text is not None else _flat_csv(report))
    else:
        sys.stdout.write(dumps(report))


# ------------------------------------------------------------------ commands

def _jsa_report(sc):
    jsa = sc.jsa()
    res = schmidt_decompose(jsa)
    rep = res.to_dict(max_lambdas=10)
    rep["config"] = sc.name
    rep["pump_fwhm_GHz"] = _r(sc.pump.fwhm_ghz)
    return jsa, res, rep


def cmd_jsa(args):
    cfg = _resolve_config(args)
    if args.sweep:
        param, points = _sweep_configs(cfg, args.sweep)
        rows = []
        for v, c in points:
            _, res, _ = _jsa_report(cfgmod.to_scenario(c))
            rows.append((v, _r(res.purity), _r(res.schmidt_number)))
        table = _table([param, "purity", "schmidt_number"], rows)
        report = {"config": cfg["name"], "sweep": param,
                  "points": [{"value": v, "purity": p, "schmidt_number": k} for v, p, k in rows]}
        files = {f"sweep_{param}.csv": table, f"sweep_{param}.json": dumps(report)}
        if args.out:
            _write_outputs(args.out, cfg["name"], files)
        _emit(args, report, table)
        return EXIT_OK
    sc = cfgmod.to_scenario(cfg)
    jsa, res, report = _jsa_report(sc)
    if args.out:
        _write_outputs(args.out, sc.name, {"jsa.csv": jsa.to_csv(), "schmidt.json": dumps(report),
                                           "modes.csv": res.modes_to_csv(n_modes=4)})
    _emit(args, report)
    return EXIT_OK


def cmd_synth(args):
    cfg = _resolve_config(args)
    if args.points is not None:
        cfg = cfgmod.set_path(cfg, "grid.points", args.points)
    if not args.counts > 0:
        raise cfgmod.ConfigError("--counts must be positive")
    if args.background < 0:
        raise cfgmod.ConfigError("--background must be non-negative")
    sc = cfgmod.to_scenario(cfg)
    g = jsi_ingest.synthesize_jsi(sc.jsa(), args.counts, rng=args.seed, background=args.background)
    text = g.to_csv()
    if args.out:
        _write_outputs(args.out, sc.name, {"jsi.csv": text})
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _background(value):
    if value in ("none", "off"):
        return None
    if value == "border_median":
        return value
    try:
        b = float(value)
    except ValueError:
        raise cfgmod.ConfigError(f"--background must be border_median, none or a number, got {value!r}") from None
    if b < 0:
        raise cfgmod.ConfigError("--background must be non-negative")
    return b


def cmd_ingest(args):
    background = _background(args.background)
    g = jsi_ingest.parse_jsi(Path(args.file), args.signal_center, args.idler_center)
    cleaned = jsi_ingest.subtract_background(g, background) if background is not None else g
    res = schmidt_decompose(jsi_ingest.jsi_to_amplitude(cleaned))
    report = jsi_ingest.analysis_report(res, cleaned)
    report["source"] = Path(args.file).name
    if args.out:
        _write_outputs(args.out, Path(args.file).stem, {"schmidt.json": dumps(report)})
    _emit(args, report)
    return EXIT_OK


def _hom_report(sc):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        curve = sc.hom()
    for w in caught:
        print(f"warning: {sc.name}: {w.message}", file=sys.stderr)
    rep = curve.summary()
    rep["config"] = sc.name
    rep["noise"] = sc.noise is not None
    if not curve.reliable:
        rep["warning"] = "delay scan does not reach the baseline; visibility is unreliable"
    return curve, rep


def cmd_hom(args):
    cfg = _resolve_config(args)
    if args.no_noise:
        cfg = cfgmod.set_path(cfg, "noise.enabled", False)
    if args.sweep:
        param, points = _sweep_configs(cfg, args.sweep)
        rows = []
        for v, c in points:
            curve, _ = _hom_report(cfgmod.to_scenario(c))
            rows.append((v, _r(curve.visibility), _r(curve.dip_fwhm), curve.reliable))
        table = _table([param, "visibility", "fwhm_ps", "reliable"], rows)
        report = {"config": cfg["name"], "sweep": param,
                  "points": [{"value": v, "visibility": vis, "fwhm_ps": f, "reliable": ok}
                             for v, vis, f, ok in rows]}
        if args.out:
            _write_outputs(args.out, cfg["name"], {f"hom_sweep_{param}.csv": table,
                                                   f"hom_sweep_{param}.json": dumps(report)})
        _emit(args, report, table)
        return EXIT_OK
    sc = cfgmod.to_scenario(cfg)
    curve, report = _hom_report(sc)
    if args.out:
        _write_outputs(args.out, sc.name, {"hom.csv": curve.to_csv(), "hom.json": dumps(report)})
    _emit(args, report, curve.to_csv())
    return EXIT_OK


def cmd_rates(args):
    cfg_a = _resolve_config(args)
    cfg_b = _resolve_config(args, "against", "against_config")
    if args.sweep:
        param, points = _sweep_configs(cfg_a, args.sweep)
        sc_b = cfgmod.to_scenario(cfg_b)
        rows = []
        for v, c in points:
            cmp = relative_threefold_rate(cfgmod.to_scenario(c), sc_b)
            rows.append((v, _r(cmp.ratio)))
        table = _table([param, f"ratio_vs_{cfg_b['name']}"], rows)
        report = {"config_a": cfg_a["name"], "config_b": cfg_b["name"], "sweep": param,
                  "points": [{"value": v, "ratio": r} for v, r in rows]}
        if args.out:
            _write_outputs(args.out, cfg_a["name"], {f"rates_sweep_{param}.csv": table,
                                                     f"rates_sweep_{param}.json": dumps(report)})
        _emit(args, report, table)
        return EXIT_OK
    cmp = relative_threefold_rate(cfgmod.to_scenario(cfg_a), cfgmod.to_scenario(cfg_b))
    report = cmp.to_dict()
    if args.out:
        _write_outputs(args.out, cfg_a["name"], {"rates.json": dumps(report)})
    _emit(args, report)
    return EXIT_OK


def cmd_schema(args):
    text = cfgmod.schema_json() + "\n"
    if args.out:
        _write_outputs(args.out, ".", {"config_schema.json": text})
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spdc-purity",
                                description="SPDC spectral purity, HOM visibility and rate reports.")
    p.add_argument("-v", "--verbose", action="store_true", help="log written files to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def scenario_args(sp, sweep=True):
        sp.add_argument("--preset", choices=PRESET_NAMES, help="built-in configuration")
        sp.add_argument("--config", help="JSON scenario config (see `spdc-purity schema`)")
        sp.add_argument("--out", help="output directory; files go to <out>/<name>/")
        sp.add_argument("--format", choices=("json", "csv"), default="json", help="stdout report format")
        if sweep:
            sp.add_argument("--sweep", metavar="PARAM=LIST",
                            help="sweep a dotted config field, e.g. pump.filter_nm=0.2,1,2,4,5")

    sp = sub.add_parser("jsa", help="model JSA, Schmidt spectrum and purity")
    scenario_args(sp)
    sp.set_defaults(func=cmd_jsa)

    sp = sub.add_parser("synth", help="synthetic Poisson JSI counts from a model scenario")
    scenario_args(sp, sweep=False)
    sp.add_argument("--seed", type=int, default=0, help="Poisson RNG seed")
    sp.add_argument("--counts", type=float, default=1e6, help="expected total counts (default 1e6)")
    sp.add_argument("--points", type=int, default=61, help="grid points per axis (default 61)")
    sp.add_argument("--background", type=float, default=0.0, help="flat background, counts per bin")
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("ingest", help="purity of a measured JSI table")
    sp.add_argument("file", help="CSV with header nu_s_GHz,nu_i_GHz,counts")
    sp.add_argument("--background", default="border_median",
                    help="border_median (default), none, or a fixed count per bin")
    sp.add_argument("--signal-center", type=float, default=1555.1, help="signal centre wavelength, nm")
    sp.add_argument("--idler-center", type=float, default=1547.1, help="idler centre wavelength, nm")
    sp.add_argument("--out", help="output directory")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("hom", help="HOM dip between the heralded photon and the WCP")
    scenario_args(sp)
    sp.add_argument("--no-noise", action="store_true", help="drop all accidental channels")
    sp.set_defaults(func=cmd_hom)

    sp = sub.add_parser("rates", help="relative three-fold rate of two configurations")
    scenario_args(sp)
    sp.add_argument("--against", choices=PRESET_NAMES, help="reference preset")
    sp.add_argument("--against-config", help="reference JSON config")
    sp.set_defaults(func=cmd_rates)

    sp = sub.add_parser("schema", help="print the JSON schema of scenario configs")
    sp.add_argument("--out", help="write config_schema.json into this directory")
    sp.set_defaults(func=cmd_schema)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except DegenerateInputError as exc:
        print(f"error: degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
