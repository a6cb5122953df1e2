"""Command-line entry point.

    mbm-extremes covariance --config C --s S --t T
    mbm-extremes constants  --config C [--out DIR] [--seed N]
    mbm-extremes tail       --config C [--u U] [--out DIR]
    mbm-extremes verify     --config C [--u U] [--out DIR] [--seed N]
    mbm-extremes refine     --config C [--u U] [--out DIR] [--seed N]
    mbm-extremes sample     --config C --reps N [--out DIR] [--seed N]

Exit status: 0 success, 2 config error, 3 domain or precondition error,
4 numerical failure.
"""
import argparse
import dataclasses
import sys
import warnings
from pathlib import Path

import numpy as np

from . import artifacts
from .asymptotics import CURVE_COLUMNS, asymptotic_curve, evaluate, required_constant
from .config import MANIFEST_TAG, load_config
from .constants_mc import ConstantEstimate, estimate
from .covariance import d_kernel
from .errors import AsymptoticWarning, ConfigError, DomainError, NumericalError
from .harness import CSV_COLUMNS, REFINE_COLUMNS, default_bias_rate, ratio_study, refinement_study
from .harness import scenario_grid
from .sampler import PRNG_ID, sample_mbm

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_NUMERICAL = 0, 2, 3, 4


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def _out_dir(args, cfg, default="out"):
    return Path(args.out or cfg.out_dir or default)


def _manifest(command, cfg, outputs, result):
    return {"manifest": MANIFEST_TAG, "command": command, "config": cfg.to_dict(),
            "prng": PRNG_ID, "outputs": sorted(outputs), "result": result}


def _apply_u(cfg, args):
    if args.u is not None:
        cfg.u_list = [float(args.u)]
    if not cfg.u_list:
        raise ConfigError(f"{cfg.source}: no levels given; set study.u_list or pass --u")
    return cfg


def _warn_rough(cfg):
    alpha = 2 * default_bias_rate(cfg.scenario)
    if alpha < 0.5:
        warnings.warn(f"alpha = {alpha:.3g} < 0.5 at the critical point: grid-max bias is large, "
                      "run the refine study before trusting verify", AsymptoticWarning)


def cmd_covariance(args, cfg):
    model = cfg.scenario.model
    s, t = float(args.s), float(args.t)
    hs, ht = float(model.hurst.value(s)), float(model.hurst.value(t))
    sig_s, sig_t = float(model.sigma(s)), float(model.sigma(t))
    out = {
        "s": s, "t": t, "H_s": hs, "H_t": ht,
        "D": float(d_kernel(hs, ht)),
        "cov": float(model.autocov(s, t)),
        "sigma_s": sig_s, "sigma_t": sig_t,
        "corr": float(model.correlation(s, t)) if s > 0 and t > 0 else None,
    }
    text = artifacts.dumps(out)
    sys.stdout.write(text)
    if args.out:
        artifacts.write_json(Path(args.out) / "covariance.json", out)
    return EXIT_OK


def _constant_targets(cfg):
    if cfg.estimate:
        return [(e["kind"], e["alpha"], e.get("a")) for e in cfg.estimate]
    if not cfg.u_list:
        raise ConfigError(f"{cfg.source}: constants.estimate is empty and study.u_list is unset, "
                          "so there is nothing to estimate")
    need = required_constant(cfg.scenario, cfg.u_list[0])
    return [] if need is None else [need]


def _constant_filename(kind, alpha, a):
    name = f"constant_{kind}_alpha{alpha!r}"
    if a is not None:
        name += f"_a{a!r}"
    return name + ".json"


def cmd_constants(args, cfg):
    out = _out_dir(args, cfg)
    overrides = {(o["kind"], o["alpha"], o.get("a")): o["value"] for o in cfg.overrides}
    written, summary = [], []
    for kind, alpha, a in _constant_targets(cfg):
        if kind != "pickands" and a is None:
            raise ConfigError(f"{cfg.source}: {kind} needs a penalty value a")
        if not 0 < alpha <= 2:
            raise DomainError(f"alpha must lie in (0, 2], got {alpha}")
        key = (kind, alpha, a)
        if key in overrides:
            est = ConstantEstimate(kind=kind, alpha=alpha, a=a, value=overrides[key], stderr=0.0,
                                   method="override", seed=cfg.seed,
                                   notes=["fixed override, no simulation"])
        else:
            if cfg.protocol is None:
                raise ConfigError(f"{cfg.source}: no constants.protocol and no override for "
                                  f"{kind}(alpha={alpha!r})")
            proto = dataclasses.replace(cfg.protocol, seed=cfg.seed)
            est = estimate(kind, alpha, a, proto, workers=args.workers)
        name = _constant_filename(kind, alpha, a)
        artifacts.write_json(out / name, est.to_dict())
        written.append(name)
        summary.append({"kind": kind, "alpha": alpha, "a": a, "value": est.value,
                        "stderr": est.stderr, "file": name})
    artifacts.write_json(out / "constants_manifest.json",
                         _manifest("constants", cfg, written, summary))
    sys.stdout.write(artifacts.dumps(summary))
    return EXIT_OK


def cmd_tail(args, cfg):
    provider = cfg.provider()
    if args.u is not None:
        res = evaluate(cfg.scenario, float(args.u), provider)
        sys.stdout.write(artifacts.dumps(res.to_dict()))
        if args.out:
            cfg.u_list = [float(args.u)]
            out = Path(args.out)
            artifacts.write_json(out / "tail.json", res.to_dict())
            artifacts.write_json(out / "tail_manifest.json",
                                 _manifest("tail", cfg, ["tail.json"], res.to_dict()))
        return EXIT_OK
    _apply_u(cfg, args)
    results = asymptotic_curve(cfg.scenario, cfg.u_list, provider)
    rows = [r.to_dict() for r in results]
    out = _out_dir(args, cfg)
    artifacts.write_csv(out / "tail_curve.csv", rows, CURVE_COLUMNS)
    artifacts.write_json(out / "tail_manifest.json",
                         _manifest("tail", cfg, ["tail_curve.csv"], rows))
    sys.stdout.write(artifacts.csv_text(rows, CURVE_COLUMNS))
    return EXIT_OK


def cmd_verify(args, cfg):
    _apply_u(cfg, args)
    _warn_rough(cfg)
    study = ratio_study(cfg.scenario, cfg.u_list, cfg.grid_n, cfg.reps, cfg.seed,
                        cfg.provider(), workers=args.workers)
    out = _out_dir(args, cfg)
    artifacts.write_csv(out / "verify.csv", study.rows, CSV_COLUMNS)
    artifacts.write_json(out / "verify_manifest.json",
                         _manifest("verify", cfg, ["verify.csv"], study.to_dict()))
    sys.stdout.write(artifacts.csv_text(study.rows, CSV_COLUMNS))
    return EXIT_OK


def cmd_refine(args, cfg):
    _apply_u(cfg, args)
    if not cfg.grid_n_list:
        raise ConfigError(f"{cfg.source}: refine needs study.grid_n_list")
    study = refinement_study(cfg.scenario, cfg.u_list, cfg.grid_n_list, cfg.reps, cfg.seed,
                             rate=cfg.rate, workers=args.workers)
    out = _out_dir(args, cfg)
    artifacts.write_csv(out / "refine.csv", study.rows, REFINE_COLUMNS)
    cols = ("u", "p_extrapolated", "stderr", "monotone_ok")
    artifacts.write_csv(out / "refine_extrapolated.csv", study.extrapolated, cols)
    artifacts.write_json(out / "refine_manifest.json",
                         _manifest("refine", cfg, ["refine.csv", "refine_extrapolated.csv"],
                                   study.to_dict()))
    sys.stdout.write(artifacts.csv_text(study.extrapolated, cols))
    return EXIT_OK


def cmd_sample(args, cfg):
    grid = scenario_grid(cfg.scenario, cfg.grid_n)
    ens = sample_mbm(cfg.scenario.model, grid, args.reps, cfg.seed, workers=args.workers)
    out = _out_dir(args, cfg)
    cols = [f"t{i}" for i in range(grid.n)]
    rows = [dict(zip(cols, p)) for p in ens.paths.tolist()]
    # header row carries the grid times
    text = artifacts.csv_text([dict(zip(cols, grid.points.tolist()))] + rows, cols)
    path = out / "paths.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    artifacts.write_json(out / "sample_manifest.json",
                         _manifest("sample", cfg, ["paths.csv"],
                                   {"reps": int(args.reps), "grid_n": grid.n,
                                    "factorization_meta": ens.factorization_meta}))
    return EXIT_OK


COMMANDS = {"covariance": cmd_covariance, "constants": cmd_constants, "tail": cmd_tail,
            "verify": cmd_verify, "refine": cmd_refine, "sample": cmd_sample}


def build_parser():
    p = argparse.ArgumentParser(prog="mbm-extremes", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, metavar="PATH")
        sp.add_argument("--out", metavar="DIR")
        sp.add_argument("--seed", type=int, metavar="INT", help="overrides study.seed")
        sp.add_argument("--workers", type=int, default=1, help="threads; never changes results")
        if name in ("tail", "verify", "refine"):
            sp.add_argument("--u", type=float, metavar="FLOAT")
        if name == "covariance":
            sp.add_argument("--s", type=float, required=True)
            sp.add_argument("--t", type=float, required=True)
        if name == "sample":
            sp.add_argument("--reps", type=int, required=True)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if not hasattr(args, "u"):
        args.u = None
    with warnings.catch_warnings():
        warnings.simplefilter("always", AsymptoticWarning)
        warnings.showwarning = _show_warning
        try:
            cfg = load_config(args.config, seed_override=args.seed)
            return COMMANDS[args.command](args, cfg)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except DomainError as exc:
            print(f"domain error: {exc}", file=sys.stderr)
            return EXIT_DOMAIN
        except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
            print(f"numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
