"""Command-line front end: ``sdq <command> [--config FILE] [flags]``.

Exit codes: 0 success, 1 verification or run failure, 2 usage error,
3 malformed config, 4 filesystem failure. Every nonzero exit prints a JSON
error report on stderr.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import os
import sys
import typing
from dataclasses import dataclass, field

from . import checks, configs
from .cs_pipeline import CsSweepConfig, cs_csv, cs_error_sweep
from .frame_pipeline import FrameSweepConfig, fmt, frame_csv, frame_error_sweep
from .quantization import Alphabet, QuantizationError, design_coarse_filter

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CONFIG, EXIT_FS = 0, 1, 2, 3, 4

COMMANDS = ("frame-sweep", "cs-sweep", "singvals", "stability", "filter-design")


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str, **extra):
        self.code, self.kind, self.message, self.extra = code, kind, message, extra
        super().__init__(message)

    def report(self) -> str:
        return json.dumps({"error": self.kind, "message": self.message, "exit_code": self.code,
                           **self.extra}, sort_keys=True)


@dataclass
class SingvalsConfig:
    m: int = 64
    r: int = 1

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m: must be positive")
        if self.r < 1:
            raise ValueError("r: must be positive")


@dataclass
class StabilityConfig:
    """Greedy runs draw C and step per input; coarse runs use a fixed alphabet."""

    scheme: str = "greedy"
    orders: list = field(default_factory=lambda: [1, 2, 3])
    trials: int = 1000
    m: int = 256
    gammas: list = field(default_factory=lambda: [3.0, 5.0])
    levels: int = 3
    step: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.scheme not in ("greedy", "coarse"):
            raise ValueError(f"scheme: unknown scheme {self.scheme!r}")
        if not self.orders or any(not float(r).is_integer() or r < 1 for r in self.orders):
            raise ValueError("orders: need positive integers")
        self.orders = [int(r) for r in self.orders]
        if self.trials < 1 or self.m < 1:
            raise ValueError("trials: trials and m must be positive")
        if any(g <= 1 for g in self.gammas):
            raise ValueError("gammas: every gamma must exceed 1")


@dataclass
class FilterDesignConfig:
    r: int = 1
    gamma: float = 3.0
    levels: int | None = None
    step: float = 1.0
    max_d: int | None = None

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("r: must be positive")
        if self.max_d is not None and self.max_d < self.r:
            raise ValueError("max_d: must be at least r")


@dataclass
class ExperimentConfig:
    """A command plus its parameter map; the on-disk form of any run."""

    command: str
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"command: unknown command {self.command!r}")

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return configs.from_mapping(cls, json.loads(text))

    def build(self):
        return configs.from_mapping(CONFIG_TYPES[self.command], self.parameters)


CONFIG_TYPES = {
    "frame-sweep": FrameSweepConfig,
    "cs-sweep": CsSweepConfig,
    "singvals": SingvalsConfig,
    "stability": StabilityConfig,
    "filter-design": FilterDesignConfig,
}


def parse_value(text: str):
    """Inline flag value: JSON if it parses, comma lists as lists, else a string."""
    for candidate in (text, f"[{text}]" if "," in text else None):
        if candidate is None:
            continue
        try:
            return json.loads(candidate)
        except json.JSONDecodeError:
            pass
    return text


def _read_config(path: str, command: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(EXIT_FS, "filesystem", f"cannot read config {path}: {exc.strerror}", path=path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_CONFIG, "config", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}",
                       key=None, path=path)
    if not isinstance(doc, dict):
        raise CliError(EXIT_CONFIG, "config", "config must be a JSON object", key=None, path=path)
    if "command" in doc:
        if doc["command"] != command:
            raise CliError(EXIT_CONFIG, "config", f"config is for {doc['command']!r}, not {command!r}",
                           key="command", path=path)
        params = doc.get("parameters", {})
        extra = sorted(set(doc) - {"command", "parameters"})
        if extra:
            raise CliError(EXIT_CONFIG, "config", "unknown key", key=extra[0], path=path)
        if not isinstance(params, dict):
            raise CliError(EXIT_CONFIG, "config", "expected a JSON object", key="parameters", path=path)
        return dict(params)
    return doc


def build_config(command: str, args: argparse.Namespace):
    params = _read_config(args.config, command) if args.config else {}
    for f in dataclasses.fields(CONFIG_TYPES[command]):
        value = getattr(args, f"p_{f.name}", None)
        if value is not None:
            params[f.name] = value
    try:
        return configs.from_mapping(CONFIG_TYPES[command], params)
    except configs.ConfigError as exc:
        raise CliError(EXIT_CONFIG, "config", exc.message, key=exc.key, path=args.config)


def _open_out(path: str | None):
    if path is None:
        return None
    try:
        parent = os.path.dirname(os.path.abspath(path))
        os.makedirs(parent, exist_ok=True)
        return open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise CliError(EXIT_FS, "filesystem", f"cannot write {path}: {exc.strerror}", path=path)


def emit(text: str, path: str | None, stdout) -> None:
    fh = _open_out(path)
    if fh is None:
        stdout.write(text)
        return
    try:
        with fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(EXIT_FS, "filesystem", f"cannot write {path}: {exc.strerror}", path=path)


def rows_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(rows[0]))
        for row in rows:
            w.writerow([fmt(v) for v in row.values()])
    return buf.getvalue()


def resolve_jobs(args) -> int:
    if args.jobs is not None:
        return args.jobs
    env = os.environ.get("SDQ_JOBS")
    if env is None:
        return 1
    try:
        jobs = int(env)
    except ValueError:
        raise CliError(EXIT_USAGE, "usage", f"SDQ_JOBS must be an integer, got {env!r}")
    if jobs < 1:
        raise CliError(EXIT_USAGE, "usage", "SDQ_JOBS must be at least 1")
    return jobs


def _finish_sweep(records, failures, violations, args, stdout, stderr, csv_text) -> int:
    emit(csv_text, args.out, stdout)
    if failures:
        print(json.dumps({"warning": "failed runs", "count": len(failures), "runs": failures},
                         sort_keys=True), file=stderr)
    if args.verify:
        bad = violations + [{"failure": f} for f in failures]
        if bad:
            raise CliError(EXIT_FAIL, "verification", f"{len(bad)} invariant violations",
                           violations=bad[:20])
    return EXIT_OK


def cmd_frame_sweep(cfg: FrameSweepConfig, args, stdout, stderr) -> int:
    failures: list = []
    records = frame_error_sweep(cfg, jobs=resolve_jobs(args), failures=failures)
    violations = []
    for rec in records:
        art = rec.artifacts
        if art.get("identity_gap", 0.0) > 1e-9:
            violations.append({"lambda": rec.lam, "r": rec.r, "trial": rec.trial,
                               "check": "error identity", "gap": art["identity_gap"]})
        if rec.state_sup > art.get("state_limit", float("inf")) * (1 + 1e-9):
            violations.append({"lambda": rec.lam, "r": rec.r, "trial": rec.trial,
                               "check": "state bound", "state_sup": rec.state_sup,
                               "limit": art["state_limit"]})
    return _finish_sweep(records, failures, violations, args, stdout, stderr, frame_csv(records))


def cmd_cs_sweep(cfg: CsSweepConfig, args, stdout, stderr) -> int:
    failures: list = []
    records = cs_error_sweep(cfg, jobs=resolve_jobs(args), failures=failures)
    violations = []
    for rec in records:
        art = rec.artifacts
        if art.get("noise_sup", 0.0) > art.get("noise_limit", float("inf")) * (1 + 1e-9):
            violations.append({"lambda": rec.lam, "trial": rec.trial, "check": "noise bound",
                               "noise_sup": art["noise_sup"], "limit": art["noise_limit"]})
    return _finish_sweep(records, failures, violations, args, stdout, stderr, cs_csv(records))


def cmd_singvals(cfg: SingvalsConfig, args, stdout, stderr) -> int:
    rows = checks.singular_value_rows(cfg.m, cfg.r)
    emit(rows_csv(rows), args.out, stdout)
    bad = [row["j"] for row in rows if not row["pass"]]
    if bad and args.verify:
        raise CliError(EXIT_FAIL, "verification", f"{len(bad)} singular values outside the bounds",
                       indices=bad[:50])
    return EXIT_OK


def cmd_stability(cfg: StabilityConfig, args, stdout, stderr) -> int:
    if cfg.scheme == "greedy":
        res = checks.greedy_stability(cfg.orders, cfg.trials, cfg.m, cfg.seed)
    else:
        try:
            res = checks.coarse_stability(cfg.orders, cfg.gammas, cfg.trials, cfg.m,
                                          cfg.levels, cfg.step, cfg.seed)
        except QuantizationError as exc:
            raise CliError(EXIT_FAIL, "run", str(exc))
    emit(rows_csv(res.rows), args.out, stdout)
    print(res.line(), file=stderr)
    if args.verify and not res.passed:
        raise CliError(EXIT_FAIL, "verification", res.summary)
    return EXIT_OK


def cmd_filter_design(cfg: FilterDesignConfig, args, stdout, stderr) -> int:
    a = Alphabet(cfg.levels, cfg.step) if cfg.levels is not None else None
    try:
        f = design_coarse_filter(cfg.r, cfg.gamma, a, max_d=cfg.max_d)
    except QuantizationError as exc:
        raise CliError(EXIT_FAIL, "run", str(exc))
    emit(f.to_json() + "\n", args.out, stdout)
    if args.verify and f.h_l1 > cfg.gamma:
        raise CliError(EXIT_FAIL, "verification", f"||h||_1 = {f.h_l1} exceeds gamma = {cfg.gamma}")
    return EXIT_OK


def cmd_verify(args, stdout, stderr) -> int:
    names = args.suite or list(checks.QUICK_SUITE)
    unknown = [n for n in names if n not in checks.QUICK_SUITE]
    if unknown:
        raise CliError(EXIT_USAGE, "usage", f"unknown suite {unknown[0]!r}",
                       choices=list(checks.QUICK_SUITE))
    results = [checks.QUICK_SUITE[n]() for n in names]
    for res in results:
        print(res.line(), file=stdout)
    if args.out:
        report = [{"name": r.name, "passed": r.passed, "summary": r.summary} for r in results]
        emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out, stdout)
    failed = [r.name for r in results if not r.passed]
    if failed:
        raise CliError(EXIT_FAIL, "verification", f"{len(failed)} suites failed", suites=failed)
    return EXIT_OK


HANDLERS = {
    "frame-sweep": cmd_frame_sweep,
    "cs-sweep": cmd_cs_sweep,
    "singvals": cmd_singvals,
    "stability": cmd_stability,
    "filter-design": cmd_filter_design,
}


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage errors as JSON before exiting with 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(CliError(EXIT_USAGE, "usage", message).report(), file=sys.stderr)
        self.exit(EXIT_USAGE)


def parse_list(text: str):
    value = parse_value(text)
    return value if isinstance(value, list) else [value]


def _flag_type(tp):
    if tp is int:
        return int
    if tp is list or typing.get_origin(tp) is list:
        return parse_list
    return parse_value


COMMAND_HELP = {
    "frame-sweep": "quantize random frame expansions and record reconstruction error",
    "cs-sweep": "two-stage compressed sensing decode of quantized measurements",
    "singvals": "singular values of the inverse difference power with their bounds",
    "stability": "check the state bound of the greedy or coarse scheme on random inputs",
    "filter-design": "design a feedback filter for the coarse scheme",
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sdq", description="Sigma-Delta quantization experiments.")
    p.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, cls in CONFIG_TYPES.items():
        sp = sub.add_parser(name, help=COMMAND_HELP[name])
        sp.add_argument("--config", help="JSON config file (flags override its entries)")
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--verify", action="store_true", help="check invariants, exit 1 on violation")
        if name in ("frame-sweep", "cs-sweep"):
            sp.add_argument("--jobs", type=int, default=None, help="worker processes (env SDQ_JOBS)")
        hints = typing.get_type_hints(cls)
        for f in dataclasses.fields(cls):
            sp.add_argument(f"--{f.name.replace('_', '-')}", dest=f"p_{f.name}",
                            type=_flag_type(hints[f.name]), default=None, metavar="VALUE")
    vp = sub.add_parser("verify", help="run the built-in invariant suites")
    vp.add_argument("--suite", action="append", help=f"one of {', '.join(checks.QUICK_SUITE)}")
    vp.add_argument("--out", help="write a JSON report here")
    return p


def run_cli(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, stream=stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "verify":
            return cmd_verify(args, stdout, stderr)
        if getattr(args, "jobs", None) is not None and args.jobs < 1:
            raise CliError(EXIT_USAGE, "usage", "--jobs must be at least 1")
        cfg = build_config(args.command, args)
        return HANDLERS[args.command](cfg, args, stdout, stderr)
    except CliError as exc:
        print(exc.report(), file=stderr)
        return exc.code


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
