"""Batch command line: declarative experiment configs, CSV outputs.

Subcommands
-----------
sample        draw node designs and write them to CSV, one file per replicate
study         run a replicated error study, write the record CSV and print a
              log-log slope fitted on the upper half of the N grid
verify        run one named identity suite at a Monte-Carlo budget
config-schema print a documented configuration template

Exit codes: 0 success, 1 configuration error, 2 numerical failure budget
exceeded, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

import numpy as np

from . import verify as verify_mod
from .metrics import (DesignSpec, SchemeSpec, StudyBudgetExceeded, fit_loglog_slope,
                      mc_error_study, model_id, summarize, write_records)
from .spectral import SpectralModel, TargetFunction, eigen_target, make_model, random_gaussian_target
from .designs import Design


class ConfigError(ValueError):
    pass


CONFIG_SCHEMA = """\
# Experiment configuration (TOML). Defaults shown where one exists.

[kernel]                      # spectral model
family = "periodic_sobolev"   # periodic_sobolev | sphere_sobolev | sinc_pswf | legendre
s = 1                         # periodic_sobolev: integer smoothness >= 1
M_spec = 2000                 # periodic_sobolev/legendre: truncation order
# d = 3                       # sphere_sobolev: ambient dimension (3 only)
# L_max = 60                  # sphere_sobolev: maximum harmonic degree
# T_len = 2.0                 # sinc_pswf/legendre: interval length
# F = 7.0                     # sinc_pswf: bandwidth
# legendre_order = 128        # sinc_pswf: diagonalization basis size

[design]                      # node distribution
family = "dpp"                # dpp | cvs | christoffel
basis = "model"               # dpp only: "model" eigenbasis or "legendre"
# M = 0                       # christoffel only: density order (0 -> track N)
q_mode = "optimal"            # christoffel/els weight: "optimal" | "uniform"
conditioned = true            # christoffel only: enforce the Gram event

[target]
kind = "eigen"                # eigen | random_gaussian
m = 1                         # eigen: index (target sqrt(sigma_m) e_m)
# order = 10                  # random_gaussian: expansion order
# seed = 7                    # random_gaussian: coefficient seed

[study]
scheme = "ls"                 # oka | ls | okq | qi | els | tels
N_grid = [8, 12, 16, 24, 32, 48, 64]
replicates = 50
master_seed = 42
# M = 0                       # okq/els/tels order (0 -> track N)
out = "study.csv"
"""


def load_config(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return f'"{v}"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt_value(x) for x in v) + "]"
    return repr(v)


def dump_config(cfg: dict) -> str:
    """Serialize a parsed configuration back to TOML (round-trip safe for
    the schema above: tables or lists of tables with scalar/list leaves)."""
    out = []
    for section, block in cfg.items():
        blocks = block if isinstance(block, list) else [block]
        for b in blocks:
            if not isinstance(b, dict):
                raise ConfigError(f"top-level entry {section!r} must be a table")
            out.append(f"[[{section}]]" if isinstance(block, list) else f"[{section}]")
            for k, v in b.items():
                out.append(f"{k} = {_fmt_value(v)}")
            out.append("")
    return "\n".join(out)


def _require(block: dict, key: str, where: str):
    if key not in block:
        raise ConfigError(f"missing key {key!r} in [{where}]")
    return block[key]


def parse_kernel(cfg: dict) -> SpectralModel:
    block = _require(cfg, "kernel", "config")
    try:
        return make_model(dict(block))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"[kernel] {exc}") from exc


def _parse_one_design(block: dict) -> DesignSpec:
    fam = _require(block, "family", "design")
    if fam not in ("dpp", "cvs", "christoffel"):
        raise ConfigError(f"[design] unknown family {fam!r}")
    M = int(block.get("M", 0)) or None  # 0 means: track the study's N
    return DesignSpec(
        family=fam,
        basis=block.get("basis", "model"),
        M=M,
        q_mode=block.get("q_mode", "optimal"),
        conditioned=bool(block.get("conditioned", True)),
    )


def parse_design(cfg: dict) -> DesignSpec:
    return parse_designs(cfg)[0]


def parse_designs(cfg: dict) -> list[DesignSpec]:
    """One [design] table or a comparison list of [[design]] tables."""
    block = cfg.get("design", {"family": "dpp"})
    blocks = block if isinstance(block, list) else [block]
    if not blocks:
        raise ConfigError("[design] list must not be empty")
    return [_parse_one_design(b) for b in blocks]


def parse_target(cfg: dict, model: SpectralModel) -> TargetFunction:
    block = _require(cfg, "target", "config")
    kind = block.get("kind", "eigen")
    if kind == "eigen":
        m = int(_require(block, "m", "target"))
        if not 1 <= m <= model.truncation_order:
            raise ConfigError(f"[target] index m={m} beyond the truncation order")
        return eigen_target(model, m)
    if kind == "random_gaussian":
        order = int(_require(block, "order", "target"))
        if order > model.truncation_order:
            raise ConfigError("[target] order beyond the truncation order")
        return random_gaussian_target(model, order, int(block.get("seed", 0)))
    raise ConfigError(f"[target] unknown kind {kind!r}")


def parse_study(cfg: dict) -> dict:
    block = _require(cfg, "study", "config")
    grid = [int(n) for n in _require(block, "N_grid", "study")]
    if not grid or sorted(set(grid)) != grid:
        raise ConfigError("[study] N_grid must be non-empty and strictly increasing")
    reps = int(block.get("replicates", 50))
    if reps < 1:
        raise ConfigError("[study] replicates must be >= 1")
    scheme = block.get("scheme", "ls")
    if scheme not in ("oka", "ls", "okq", "qi", "els", "tels"):
        raise ConfigError(f"[study] unknown scheme {scheme!r}")
    M = int(block.get("M", 0)) or None
    return {
        "scheme": SchemeSpec(scheme, M, block.get("q_mode", "optimal")),
        "N_grid": grid,
        "replicates": reps,
        "master_seed": int(block.get("master_seed", 0)),
        "out": block.get("out", "study.csv"),
    }


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _write_design_csv(path: Path, design: Design, ndim: int) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node_index"] + [f"coordinate_{i}" for i in range(ndim)])
        nodes = np.atleast_2d(design.nodes.reshape(len(design), -1))
        for i, row in enumerate(nodes):
            writer.writerow([i] + [repr(float(v)) for v in row])


def cmd_sample(cfg: dict, out_dir: Path, seed_override, jobs: int) -> int:
    from .metrics import build_design

    model = parse_kernel(cfg)
    specs = parse_designs(cfg)
    study = parse_study(cfg)
    master_seed = seed_override if seed_override is not None else study["master_seed"]
    out_dir.mkdir(parents=True, exist_ok=True)
    log_rows = []
    for di, spec in enumerate(specs):
        prefix = "design" if len(specs) == 1 else f"design{di}"
        for N in study["N_grid"]:
            for rep in range(study["replicates"]):
                rng = np.random.default_rng([master_seed, N, rep])
                design = build_design(model, spec, N, rng)
                fname = out_dir / f"{prefix}_N{N}_rep{rep}.csv"
                _write_design_csv(fname, design, model.domain.ndim)
                log_rows.append({
                    "file": fname.name, "N": N, "replicate": rep,
                    "distribution": design.distribution, "seed": master_seed,
                    "indices": "" if design.indices is None else " ".join(map(str, design.indices)),
                    **{f"attempt_{k}": v for k, v in design.attempts.items()},
                })
    log_path = out_dir / "designs_log.csv"
    fields = sorted({k for row in log_rows for k in row})
    with open(log_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(log_rows)
    print(f"wrote {len(log_rows)} designs under {out_dir} (log: {log_path.name})")
    return 0


def cmd_study(cfg: dict, out_dir: Path, seed_override, jobs: int) -> int:
    model = parse_kernel(cfg)
    specs = parse_designs(cfg)
    target = parse_target(cfg, model)
    study = parse_study(cfg)
    master_seed = seed_override if seed_override is not None else study["master_seed"]
    out_dir.mkdir(parents=True, exist_ok=True)
    code = 0
    for di, design_spec in enumerate(specs):
        stem = Path(study["out"])
        name = stem.name if len(specs) == 1 else f"{stem.stem}_{di}{stem.suffix}"
        out_csv = out_dir / name
        lines = [f"{model_id(model)}  design={design_spec.tag(study['N_grid'][-1])}  "
                 f"scheme={study['scheme'].name}  target={target.name}"]
        try:
            records = mc_error_study(
                model, design_spec, study["scheme"], target,
                study["N_grid"], study["replicates"], master_seed, n_jobs=jobs,
            )
        except StudyBudgetExceeded as exc:
            write_records(out_csv, exc.records)
            print(lines[0])
            print(f"numerical failure budget exceeded: {exc}", file=sys.stderr)
            code = 2
            continue
        write_records(out_csv, records)
        for N, (mean, se) in summarize(records).items():
            lines.append(f"  N={N:4d}  mean l2_sq = {mean:.6e}  (3se = {3 * se:.2e})")
        grid = study["N_grid"]
        upper = grid[len(grid) // 2:]
        if len(upper) >= 3:
            slope = fit_loglog_slope(records, upper)
            lines.append(f"  log-log slope over N in {upper}: {slope:+.3f}")
        lines.append(f"records: {out_csv}")
        print("\n".join(lines))
        out_csv.with_suffix(".summary.txt").write_text("\n".join(lines) + "\n")
    return code


def cmd_verify(name: str, budget, seed_override) -> int:
    seed = 2024 if seed_override is None else seed_override
    try:
        report = verify_mod.run_suite(name, budget, seed)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    print(report)
    return 0 if report.passed else 3


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dppfit",
        description="Reconstruct kernel-space functions from randomized node designs.",
    )
    parser.add_argument("--config", type=Path, help="TOML experiment configuration")
    parser.add_argument("--seed", type=int, default=None, help="override the master seed")
    parser.add_argument("--jobs", type=int, default=1, help="parallel replicate workers")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sample", help="draw designs and write them to CSV")
    sub.add_parser("study", help="run a replicated error study")
    p_verify = sub.add_parser("verify", help="run one named identity suite")
    p_verify.add_argument("suite", help=f"one of: {', '.join(sorted(verify_mod.SUITES))}")
    p_verify.add_argument("--budget", type=int, default=None, help="Monte-Carlo replicates")
    sub.add_parser("config-schema", help="print a documented config template")

    args = parser.parse_args(argv)
    if args.command == "config-schema":
        print(CONFIG_SCHEMA, end="")
        return 0
    if args.command == "verify":
        return cmd_verify(args.suite, args.budget, args.seed)
    if args.config is None:
        print("--config is required for this command", file=sys.stderr)
        return 1
    try:
        cfg = load_config(args.config)
        if args.command == "sample":
            return cmd_sample(cfg, args.out, args.seed, args.jobs)
        return cmd_study(cfg, args.out, args.seed, args.jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
