"""Command-line interface.

Three subcommands: `generate` synthesizes benchmark datasets, `discover`
runs the sparse ABC sampler from a JSON config (or shipped preset name), and
`evaluate` recomputes error metrics for a finished report against a truth
spec. Exit codes: 0 success, 2 configuration or input fault, 3 sampler
failure. Set SABC_LOG=debug for per-population progress.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .config import load_config, resolve_config, validate_config
from .dictionary import Dictionary, TermSpec, preset_dictionary
from .errors import ConfigError, SabcError, SamplerError
from .presets import PRESETS, preset_config
from .sampler import delta1, delta2_msre, run
from .simulator import BENCHMARKS, generate_benchmark, save_dataset, simulate_trajectory

logger = logging.getLogger("sabc")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def dumps_canonical(obj) -> str:
    """Stable JSON encoding: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def best_model_text(labels, theta) -> str:
    """Render a sparse coefficient vector as `xdd = c0 + c1*term + ...`."""
    parts = []
    for lab, c in zip(labels, theta):
        if c == 0:
            continue
        mag = _trim(abs(c))
        body = mag if lab == "1" else f"{mag}*{lab}"
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(f"{'+' if c > 0 else '-'} {body}")
    return "xdd = " + (" ".join(parts) if parts else "0")


def _trim(x: float) -> str:
    return f"{x:.6g}"


def _write_outputs(report, resolved) -> Path:
    outdir = resolved.output
    outdir.mkdir(parents=True, exist_ok=True)

    (outdir / "report.json").write_text(dumps_canonical(report.to_dict()))

    rows = ["term,IP"]
    rows += [f"{lab},{_fmt(ip)}" for lab, ip in zip(report.term_labels, report.inclusion)]
    (outdir / "inclusion.csv").write_text("\n".join(rows) + "\n")

    rows = ["round,population,epsilon,min_loss,median_loss,N_A,Kprime"]
    for p in report.populations:
        rows.append(
            f"{p['round']},{p['population']},{_fmt(p['epsilon'])},{_fmt(p['min_loss'])},"
            f"{_fmt(p['median_loss'])},{p['N_A']},{p['Kprime']}"
        )
    (outdir / "trace.csv").write_text("\n".join(rows) + "\n")

    (outdir / "best_model.txt").write_text(best_model_text(report.term_labels, report.best.theta) + "\n")

    ds = resolved.dataset
    traj = simulate_trajectory(
        resolved.dictionary, report.best.theta, ds.x0, ds.v0, ds.t, resolved.cfg.sim_options()
    )
    if traj is not None:
        acc = traj[0]
        rows = ["t,acc_measured,acc_discovered"]
        rows += [f"{_fmt(t)},{_fmt(a)},{_fmt(s)}" for t, a, s in zip(ds.t, ds.acc, acc)]
        (outdir / "prediction.csv").write_text("\n".join(rows) + "\n")
    else:  # pragma: no cover - an accepted particle simulates by construction
        logger.warning("best particle diverged on the data grid; prediction.csv skipped")
    return outdir


def cmd_generate(args) -> int:
    ds = generate_benchmark(args.name, noise_pct=args.noise, seed=args.seed)
    spec = BENCHMARKS[args.name]
    csv_path, meta_path = save_dataset(
        ds, args.out, seed=args.seed, truth_name=spec.name, truth_coefficients=dict(spec.truth)
    )
    print(f"wrote {csv_path} ({ds.m} samples) and {meta_path}")
    return 0


def _load_config_arg(value: str) -> dict:
    if value in PRESETS:
        return preset_config(value)
    return load_config(value)


def cmd_discover(args) -> int:
    doc = _load_config_arg(args.config)
    if args.dry_run:
        validate_config(doc)
        dic_spec = doc["dictionary"]
        if isinstance(dic_spec, str):
            dictionary = preset_dictionary(dic_spec)
        else:
            dictionary = Dictionary([TermSpec.from_dict(d) for d in dic_spec], name="custom")
        print(f"config ok: dictionary {dictionary.name!r} with {len(dictionary)} terms")
        for lab in dictionary.labels:
            print(f"  {lab}")
        return 0
    resolved = resolve_config(doc)
    threads = args.threads if args.threads else (os.cpu_count() or 1)
    report = run(
        resolved.dataset, resolved.dictionary, resolved.cfg,
        truth=resolved.truth, threads=threads,
    )
    outdir = _write_outputs(report, resolved)
    print(best_model_text(report.term_labels, report.best.theta))
    print(f"best loss {report.best.loss.total:.6g} "
          f"(nmse {report.best.loss.nmse:.6g}, l0 {report.best.loss.l0})")
    if report.delta2 is not None:
        print(f"delta1 {report.delta1:.6g}  delta2 {report.delta2:.6g}")
    print(f"outputs in {outdir}")
    return 0


def cmd_evaluate(args) -> int:
    report_path = Path(args.report)
    truth_path = Path(args.truth)
    for p in (report_path, truth_path):
        if not p.exists():
            raise ConfigError(f"file not found: {p}")
    try:
        report = json.loads(report_path.read_text())
        truth_doc = json.loads(truth_path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed JSON input: {e}") from None
    if not isinstance(truth_doc, dict) or not truth_doc:
        raise ConfigError("truth spec must be a non-empty JSON object of term: coefficient")
    try:
        labels = list(report["dictionary"]["terms"])
        theta = np.asarray(report["best"]["theta"], dtype=float)
    except (KeyError, TypeError) as e:
        raise ConfigError(f"report is missing required fields: {e}") from None

    truth = {}
    for lab, coeff in truth_doc.items():
        if lab not in labels:
            raise ConfigError(f"truth term {lab!r} is not in the report dictionary")
        if coeff == 0:
            raise ConfigError(f"truth coefficient for {lab!r} is zero; delta_2 is undefined")
        truth[labels.index(lab)] = float(coeff)

    support = [labels[i] for i in np.flatnonzero(theta)]
    missing = [lab for lab in truth_doc if lab not in support]
    extra = [lab for lab in support if lab not in truth_doc]
    metrics = {
        "delta1": delta1(theta, truth.keys()),
        "delta2": delta2_msre(theta, truth),
        "l0": int(np.count_nonzero(theta)),
        "best_support": support,
        "missing_terms": missing,
        "extra_terms": extra,
        "support_match": not missing and not extra,
    }
    print(dumps_canonical(metrics), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sabc",
        description="Discover sparse governing equations from noisy acceleration data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="synthesize a benchmark dataset")
    g.add_argument("name", choices=sorted(BENCHMARKS), help="benchmark system")
    g.add_argument("--noise", type=float, default=0.02, help="noise std as a fraction of signal std")
    g.add_argument("--seed", type=int, default=0, help="noise RNG seed")
    g.add_argument("--out", required=True, help="output directory")
    g.set_defaults(func=cmd_generate)

    d = sub.add_parser("discover", help="run the sampler from a config file or preset")
    d.add_argument(
        "--config", required=True,
        help=f"path to a run config JSON, or one of the presets: {', '.join(PRESETS)}",
    )
    d.add_argument("--threads", type=int, default=0,
                   help="simulation threads (default: machine parallelism)")
    d.add_argument("--dry-run", action="store_true",
                   help="validate the config and print the resolved dictionary, then exit")
    d.set_defaults(func=cmd_discover)

    e = sub.add_parser("evaluate", help="recompute metrics for a report against a truth spec")
    e.add_argument("--report", required=True, help="path to report.json")
    e.add_argument("--truth", required=True, help="path to a JSON object of term: coefficient")
    e.set_defaults(func=cmd_evaluate)
    return parser


def _setup_logging():
    level_name = os.environ.get("SABC_LOG", "info").strip().upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SamplerError as e:
        print(f"sampler error: {e}", file=sys.stderr)
        return 3
    except SabcError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
