"""Headless command-line front end.

Three subcommands: `simulate` runs replicated prelimit experiments and
writes normalized-path CSV plus a metadata sidecar, `limit-sample` draws
limit shot-noise paths, `verify` executes a registered statistical check
and writes its report.  Outputs are byte-stable for a fixed seed: CSV is
UTF-8 with LF endings and shortest-roundtrip floats, JSON is pretty-printed
with sorted keys.

Exit codes: 0 success, 2 usage/config error, 3 I/O error, 4 verification
failure.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, limit, streams
from .checks import CHECK_NAMES, run_check
from .gwi import GwiRun, normalized_observable, run_coupled
from .immigration import ImmigrationLaw
from .offspring import OffspringFamily
from .gw import FluidConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_VERIFY = 4


class ConfigError(Exception):
    pass


def _load_config(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON config: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def _resolve_seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return int(args.seed) & ((1 << 64) - 1)
    if args.ci:
        raise ConfigError("--ci requires an explicit --seed")
    return secrets.randbits(63)


def _format_float(x: float) -> str:
    return repr(float(x))


def _write_csv(path: Path, rows, header: tuple[str, ...]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ----------------------------------------------------------------------
# simulate
# ----------------------------------------------------------------------


def _parse_simulate_config(cfg: dict) -> dict:
    try:
        parsed = {
            "n": int(cfg["n"]),
            "horizon": float(cfg["horizon"]),
            "family": OffspringFamily.from_config(cfg["offspring"]),
            "law": ImmigrationLaw.from_config(cfg["immigration"]),
            "fluid": FluidConfig.from_config(cfg.get("fluid", {})),
            "norm_spec": cfg.get("norm", "n"),
            "correction": cfg.get("supercritical_correction", False),
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid simulate config: {exc}") from exc
    return parsed


def _simulate_norm(parsed: dict) -> float:
    spec = parsed["norm_spec"]
    if spec == "n":
        return float(parsed["n"])
    if spec == "bn":
        return float(parsed["law"].norming_bn(parsed["n"]))
    try:
        value = float(spec)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid norm {spec!r}: expected 'n', 'bn', or a number") from exc
    if value <= 0:
        raise ConfigError("norm must be positive")
    return value


def _simulate_correction(parsed: dict) -> float | None:
    corr = parsed["correction"]
    if corr is False or corr is None:
        return None
    if corr is True:
        return float(parsed["family"].mean)
    return float(corr)


def _simulate_replicate(parsed: dict, master_seed: int, replicate: int) -> np.ndarray:
    run = GwiRun(
        n=parsed["n"],
        horizon=parsed["horizon"],
        family=parsed["family"],
        law=parsed["law"],
        config=parsed["fluid"],
        seed=streams.replicate_seed(master_seed, replicate),
    )
    bundle = run_coupled(run)
    path = normalized_observable(
        bundle.y_log, _simulate_norm(parsed), parsed["n"], _simulate_correction(parsed)
    )
    return np.asarray(path.values, dtype=np.float64)


def _simulate_worker(payload: tuple[dict, int, int]) -> tuple[int, np.ndarray]:
    cfg, master_seed, replicate = payload
    parsed = _parse_simulate_config(cfg)
    return replicate, _simulate_replicate(parsed, master_seed, replicate)


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    parsed = _parse_simulate_config(cfg)
    _simulate_norm(parsed)  # validate early, before any work
    seed = _resolve_seed(args)
    replicates = int(args.replicates)
    if replicates < 1:
        raise ConfigError("--replicates must be >= 1")

    if args.jobs > 1:
        payloads = [(cfg, seed, r) for r in range(replicates)]
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = dict(pool.map(_simulate_worker, payloads))
        values = [results[r] for r in range(replicates)]
    else:
        values = [_simulate_replicate(parsed, seed, r) for r in range(replicates)]

    n = parsed["n"]
    rows = []
    for r, obs in enumerate(values):
        for k, v in enumerate(obs):
            rows.append((str(r), _format_float(k / n), _format_float(v)))

    _write_csv(Path(f"{args.out}.csv"), rows, ("replicate", "t", "value"))
    _write_json(
        Path(f"{args.out}.json"),
        {
            "command": "simulate",
            "params": cfg,
            "replicate_count": replicates,
            "seed": seed,
            "version": __version__,
        },
    )
    return EXIT_OK


# ----------------------------------------------------------------------
# limit-sample
# ----------------------------------------------------------------------


def _parse_limit_config(cfg: dict) -> tuple[limit.PrmParams, float]:
    try:
        params = limit.PrmParams(
            a=float(cfg["a"]),
            b=float(cfg["b"]),
            horizon=float(cfg["horizon"]),
            delta=float(cfg.get("delta", 1e-3)),
        )
        slope = float(cfg["slope"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid limit-sample config: {exc}") from exc
    return params, slope


def cmd_limit_sample(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    params, slope = _parse_limit_config(cfg)
    seed = _resolve_seed(args)
    replicates = int(args.replicates)
    if replicates < 1:
        raise ConfigError("--replicates must be >= 1")

    rows = []
    atom_lists = []
    for r in range(replicates):
        rng = streams.substream(streams.replicate_seed(seed, r), streams.ATOMS)
        atoms = limit.sample_atoms(params, rng)
        path = limit.shot_noise_path(limit.ShotNoiseSpec(slope=slope, atoms=atoms))
        if slope == 0.0:
            jumps = np.diff(np.append(path.values, path.value(path.end_time)))
            if np.any(jumps < -1e-12) or np.any(path.slopes != 0.0):
                raise RuntimeError("slope-0 limit path failed the nondecreasing validation")
        for t, v in zip(path.breakpoints, path.values):
            rows.append((str(r), _format_float(t), _format_float(v)))
        rows.append((str(r), _format_float(path.end_time), _format_float(path.value(path.end_time))))
        atom_lists.append([[float(t), float(j)] for t, j in zip(atoms.times, atoms.marks)])

    _write_csv(Path(f"{args.out}.csv"), rows, ("replicate", "t", "value"))
    _write_json(
        Path(f"{args.out}.json"),
        {
            "command": "limit-sample",
            "params": cfg,
            "replicate_count": replicates,
            "seed": seed,
            "atom_counts": [len(a) for a in atom_lists],
            "atoms": atom_lists,
            "version": __version__,
        },
    )
    return EXIT_OK


# ----------------------------------------------------------------------
# verify
# ----------------------------------------------------------------------


def cmd_verify(args: argparse.Namespace) -> int:
    name = args.check
    overrides: dict = {}
    if args.config:
        cfg = _load_config(args.config)
        name = cfg.get("check", name)
        overrides = cfg.get("overrides", {})
        if not isinstance(overrides, dict):
            raise ConfigError("verify config 'overrides' must be an object")
    if name is None:
        raise ConfigError("verify needs a check name (argument or config 'check')")
    seed = _resolve_seed(args)
    try:
        overrides = {str(k): _coerce_override(v) for k, v in overrides.items()}
        report = run_check(name, seed=seed, **overrides)
    except KeyError:
        raise ConfigError(
            f"unknown check {name!r}; registered checks: {', '.join(CHECK_NAMES)}"
        ) from None
    except TypeError as exc:
        raise ConfigError(f"invalid overrides for check {name!r}: {exc}") from exc

    payload = report.to_json()
    payload.update({"seed": seed, "version": __version__})
    if args.out:
        _write_json(Path(f"{args.out}.json"), payload)
    print(json.dumps(payload, indent=2, sort_keys=True))
    status = "pass" if report.passed else "FAIL"
    print(
        f"{status} {report.check}: statistic={report.statistic:.6g} "
        f"threshold={report.threshold:.6g}",
        file=sys.stderr,
    )
    return EXIT_OK if report.passed else EXIT_VERIFY


def _coerce_override(value):
    if isinstance(value, list):
        return tuple(value)
    return value


# ----------------------------------------------------------------------
# parser / entry point
# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gwshot",
        description=(
            "Simulation and verification toolkit for branching processes with "
            "very active immigration and their extremal shot noise limits."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, out_required: bool) -> None:
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="64-bit master seed")
        p.add_argument("--replicates", type=int, default=1, help="number of replicates")
        p.add_argument("--jobs", type=int, default=1, help="parallel workers across replicates")
        p.add_argument("--out", required=out_required, help="output file path prefix")
        p.add_argument("--ci", action="store_true", help="strict mode: explicit seed required")

    p_sim = sub.add_parser("simulate", help="replicated prelimit runs, normalized-path CSV")
    common(p_sim, out_required=True)

    p_lim = sub.add_parser("limit-sample", help="limit shot-noise paths and atom lists")
    common(p_lim, out_required=True)

    p_ver = sub.add_parser("verify", help="run a registered statistical check")
    p_ver.add_argument(
        "check",
        nargs="?",
        default=None,
        help=f"one of: {', '.join(CHECK_NAMES)} (or via config)",
    )
    common(p_ver, out_required=False)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("simulate", "limit-sample") and not args.config:
        print("error: --config is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "limit-sample":
            return cmd_limit_sample(args)
        return cmd_verify(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


def entrypoint() -> None:  # console script
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
