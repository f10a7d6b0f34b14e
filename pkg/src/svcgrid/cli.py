"""Command-line front end: ``svcgrid <command> ...``.

Commands: fit, label, eval, bench, export, query, plot.  Exit status is 0 on
success, 1 on a runtime failure and 2 on a usage or configuration error
(including missing input files).  Errors are reported on one line as
``svcgrid: error: <message>``.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .data import FormatError, ParseError, load_matrix, load_terms
from .datasets import BUILTIN_DATASETS, load_builtin
from .optimize import save_model
from .evaluation import METHODS, bench_csv, bench_labeling, bench_summary, class_distribution, format_table, precision
from .pipeline import PRESETS, SvcParams, SvcResult, find_svc_model
from .plot import save_svg

PRESET_DATA = {"svcr-example": "iris", "iris-fig2": "iris", "terms-fig7": "sporulation-terms"}
_RUN_KEYS = ("data", "terms", "features", "language_model", "kernel_matrix", "out", "name", "preset")
_PARAM_FIELDS = {f.name: f for f in dataclasses.fields(SvcParams)}


class UsageError(Exception):
    """Bad arguments or configuration: exit status 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- configuration ------------------------------------------------------------


def read_config(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment; dashes in keys become underscores."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"file not found: {path}")
    out = {}
    for no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _PARAM_FIELDS and key not in _RUN_KEYS:
            raise UsageError(f"{path}:{no}: unknown key {key!r}")
        out[key] = value
    return out


def _convert(key, value):
    if key not in _PARAM_FIELDS or value is None:
        return value
    default = _PARAM_FIELDS[key].default
    try:
        if key == "field_q":
            return None if str(value).lower() in ("", "none") else float(value)
        if isinstance(default, bool):
            return str(value).lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
    except ValueError:
        raise UsageError(f"invalid value for {key}: {value!r}") from None
    return value


def resolve_config(args) -> dict:
    """Defaults < preset < config file < flags."""
    file_cfg = read_config(args.config) if getattr(args, "config", None) else {}
    flags = {k: v for k, v in vars(args).items() if v is not None and (k in _PARAM_FIELDS or k in _RUN_KEYS)}
    preset = flags.get("preset") or file_cfg.get("preset")
    cfg = {}
    if preset:
        if preset not in PRESETS:
            raise UsageError(f"unknown preset {preset!r}; expected one of {', '.join(PRESETS)}")
        cfg.update(PRESETS[preset])
        cfg["data"] = PRESET_DATA[preset]
        cfg["preset"] = preset
    cfg.update(file_cfg)
    cfg.update(flags)
    return {k: _convert(k, v) for k, v in cfg.items()}


def _params(cfg) -> SvcParams:
    try:
        return SvcParams(**{k: v for k, v in cfg.items() if k in _PARAM_FIELDS})
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _need_file(path):
    if not Path(path).is_file():
        raise FileNotFoundError(f"file not found: {path}")
    return path


def _load_data(cfg):
    if cfg.get("terms"):
        feats = cfg.get("features")
        return load_terms(_need_file(cfg["terms"]), _need_file(feats) if feats else None,
                          cfg.get("language_model") or "TM-RD")
    data = cfg.get("data")
    if not data:
        raise UsageError("no input: give --data, --terms or --preset")
    if data in BUILTIN_DATASETS and not Path(data).exists():
        return load_builtin(data)
    return load_matrix(_need_file(data))


def _load_result(path) -> SvcResult:
    return SvcResult.load(_need_file(path))


# -- commands -----------------------------------------------------------------


def cmd_fit(args):
    cfg = resolve_config(args)
    params = _params(cfg)
    data = _load_data(cfg)
    kmat = None
    if cfg.get("kernel_matrix"):
        kmat = load_matrix(_need_file(cfg["kernel_matrix"])).values
    out = Path(cfg.get("out") or ".")
    out.mkdir(parents=True, exist_ok=True)
    name = cfg.get("name") or cfg.get("preset") or Path(str(cfg.get("data") or cfg.get("terms"))).stem
    result = find_svc_model(data, params, kernel_matrix=kmat)
    result.save(out / f"{name}.json")
    save_model(result.model, out / f"{name}.model")
    result.assignment.save_csv(out / f"{name}_assignment.csv", result.names)
    summary = result.summary()
    (out / f"{name}_summary.txt").write_text(summary, encoding="utf-8")
    sys.stdout.write(summary)
    return 0


def cmd_label(args):
    result = _load_result(args.result)
    try:
        result = result.relabel(args.labeler, args.k, args.g)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    target = Path(args.output or args.result)
    result.save(target)
    result.assignment.save_csv(target.with_name(target.stem + "_assignment.csv"), result.names)
    sys.stdout.write(result.summary())
    return 0


def _read_assignment(path, names):
    with Path(_need_file(path)).open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if rows and rows[0][-1].strip().lower() == "cluster":
        rows = rows[1:]
    lookup = {r[0]: int(r[-1]) for r in rows}
    missing = [n for n in names if n not in lookup]
    if missing:
        raise ValueError(f"assignment lacks {len(missing)} rows, e.g. {missing[0]!r}")
    return np.array([lookup[n] for n in names])


def cmd_eval(args):
    if args.result:
        result = _load_result(args.result)
        labels, tags, names = result.assignment.class_points, result.data.class_tags, result.names
    elif args.assignment and args.data:
        data = _load_data({"data": args.data})
        tags, names = data.class_tags, data.row_names
        labels = _read_assignment(args.assignment, names)
    else:
        raise UsageError("give --result, or --assignment with --data")
    if tags is None:
        raise ValueError("data carries no class tags")
    table = class_distribution(labels, tags)
    if args.format == "csv":
        text = table.to_csv()
    else:
        text = table.to_text()
        if np.all(np.asarray(tags) > 0):
            text = precision(labels, tags).to_text() + "\n" + text
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


def _ints(text, what):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise UsageError(f"{what} must be comma-separated integers") from None


def cmd_bench(args):
    cfg = resolve_config(args)
    data = _load_data({**cfg, "data": cfg.get("data") or "iris"})
    if not hasattr(data, "values"):
        raise UsageError("bench needs numeric data")
    params = _params({**PRESETS["iris-fig2"], **{k: v for k, v in cfg.items() if k in _PARAM_FIELDS}})
    methods = tuple(m.strip() for m in args.methods.split(","))
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise UsageError(f"unknown method {bad[0]!r}; expected one of {', '.join(METHODS)}")
    n_ladder = _ints(args.n_ladder, "--n-ladder") if args.n_ladder else (data.rows,)
    g_ladder = _ints(args.g_ladder, "--g-ladder") if args.g_ladder else (params.g,)
    if args.repeats < 3:
        raise UsageError("--repeats must be >= 3")
    results = bench_labeling(data, nu=params.nu, q=params.q, kernel=params.kernel, k=params.k,
                             adj_k=args.adj_k, m=params.samples, methods=methods, n_ladder=n_ladder,
                             g_ladder=g_ladder, repeats=args.repeats, seed=params.seed,
                             cx=params.cx, cy=params.cy)
    text = bench_csv(results, timings=not args.no_timings, seed=params.seed)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    if args.no_timings:
        sys.stdout.write(text)
    else:
        rows = [[s["method"], s["n"], s["g"], s["op_count"], s["n_clusters"], f"{s['wall_time'] * 1e3:.3f}",
                 f"{s['relative_time']:.2f}"] for s in bench_summary(results)]
        sys.stdout.write(format_table(["method", "n", "g", "ops", "clusters", "median_ms", "vs_grid"], rows) + "\n")
    return 0


def cmd_export(args):
    result = _load_result(args.result)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    path = result.export_clusters(args.name, out)
    sys.stdout.write(f"{path}\n")
    return 0


def _print_clusters(clusters):
    for cid, members in clusters.items():
        head = f"cluster {cid}" + (" (unclustered)" if cid == 0 else "") + f": {len(members)}"
        sys.stdout.write(head + "\n")
        for m in members:
            sys.stdout.write(f"  {m}\n")


def cmd_query(args):
    result = _load_result(args.result)
    if args.id is not None:
        members = result.cluster_by_id(args.id)
        if not members:
            sys.stdout.write(f"no cluster with id {args.id}\n")
            return 0
        _print_clusters({args.id: members})
    elif args.substring is not None:
        found = result.clusters_with_term(args.substring)
        if not found:
            sys.stdout.write(f"no cluster has a member matching {args.substring!r}\n")
        _print_clusters(found)
    else:
        _print_clusters(result.show_clusters())
    return 0


def cmd_plot(args):
    result = _load_result(args.result)
    path = Path(args.output)
    if not path.parent.exists():
        raise UsageError(f"cannot write {path}: directory does not exist")
    save_svg(result, path, grid=not args.no_grid)
    sys.stdout.write(f"{path}\n")
    return 0


# -- parser -------------------------------------------------------------------


def _add_params(p):
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--kernel")
    p.add_argument("--method", choices=("quadratic", "stochastic"))
    p.add_argument("--labeler", choices=("grid", "knn_adj", "mst_adj"))
    p.add_argument("--nu", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--g", type=int)
    p.add_argument("--cx", type=int)
    p.add_argument("--cy", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--field-q", dest="field_q", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--samples", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="svcgrid", description="Support vector clustering with grid labeling.")
    parser.add_argument("--version", action="version", version=f"svcgrid {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit a model and label the data")
    p.add_argument("--data", help=f"CSV/TSV file or one of: {', '.join(BUILTIN_DATASETS)}")
    p.add_argument("--terms", help="term list, one [TAG ]term per line")
    p.add_argument("--features", help="feature dictionary, one token per line")
    p.add_argument("--language-model", dest="language_model", choices=("TM-TM", "TM-RD", "TM-BG", "TM-TG"))
    p.add_argument("--kernel-matrix", dest="kernel_matrix", help="CSV matrix for --kernel precomputed")
    p.add_argument("--out", help="output directory (default .)")
    p.add_argument("--name", help="output file stem")
    _add_params(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("label", help="relabel a fitted result")
    p.add_argument("--result", required=True)
    p.add_argument("--labeler", choices=("grid", "knn_adj", "mst_adj"))
    p.add_argument("--k", type=int)
    p.add_argument("--g", type=int)
    p.add_argument("--output", help="new result file (default: overwrite --result)")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("eval", help="precision and class distribution")
    p.add_argument("--result")
    p.add_argument("--assignment", help="external name,cluster CSV (with --data)")
    p.add_argument("--data")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--output")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="time grid vs adjacency labeling")
    p.add_argument("--data")
    p.add_argument("--methods", default=",".join(METHODS))
    p.add_argument("--n-ladder", dest="n_ladder")
    p.add_argument("--g-ladder", dest="g_ladder")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--adj-k", dest="adj_k", type=int, default=3)
    p.add_argument("--no-timings", dest="no_timings", action="store_true",
                   help="leave wall times out (reproducible output)")
    p.add_argument("--output")
    _add_params(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("export", help="write clusters as text sections")
    p.add_argument("--result", required=True)
    p.add_argument("--name", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("query", help="navigate clusters")
    p.add_argument("--result", required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--all", action="store_true")
    g.add_argument("--substring")
    g.add_argument("--id", type=int)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("plot", help="SVG scatter of the clusters")
    p.add_argument("--result", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--no-grid", dest="no_grid", action="store_true")
    p.set_defaults(func=cmd_plot)
    return parser


def _fail(code, message):
    sys.stderr.write("svcgrid: error: " + " ".join(str(message).split()) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        return _fail(2, exc)
    except FileNotFoundError as exc:
        msg = str(exc) if str(exc).startswith("file not found") else f"file not found: {exc.filename}"
        return _fail(2, msg)
    except (FormatError, ParseError) as exc:
        return _fail(1, exc)
    except (ValueError, RuntimeError, OSError, TypeError) as exc:
        return _fail(1, exc)


if __name__ == "__main__":
    sys.exit(main())
