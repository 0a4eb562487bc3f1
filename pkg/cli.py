"""
Command-line driver: compute R, run verification suites, dump coefficient
tables and evaluate star products.

    python cli.py compute-r --order 2 --format latex
    python cli.py verify udf --order 3
    python cli.py verify appendix --grid grid.json --jobs 4
    python cli.py dump u_alpha_inv 3 0
    python cli.py star-eval f:a g:b --order 2
    python cli.py --paper-check

Status lines go to stderr; stdout carries only the requested output.
Exit codes: 0 success, 1 failed verification or engine error, 2 usage error.
"""

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

from __init__ import DEFAULT_CONFIG as PACKAGE_DEFAULTS, OUTPUT_FORMATS, __version__ as ENGINE_VERSION
from eholzer_comb import IDENTITIES
from exporter import Exporter, VerificationReport
from jet_model import CrossedElement, JetPoly, make_word, word_text
from suites import ENGINE_ERRORS, SUITES, acceptance_check, run_suite
from udf_engine import RTensor, UDFEngine
from weyl_fedosov import SECTION_KINDS, SectionContext, build_section

load_dotenv()

DUMP_TABLES = SECTION_KINDS + ["r-table"]
DEFAULT_CONFIG = {**PACKAGE_DEFAULTS, "jobs": os.cpu_count() or 1}


class OrderLimitError(ValueError):
    """Requested order exceeds the configured hard limit."""


def _env_int(name: str, default: int, minimum: Optional[int] = None) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError as e:
        raise ValueError(f"{name} must be an integer, got '{raw}'") from e
    if minimum is not None and value < minimum:
        raise ValueError(f"{name} must be at least {minimum}, got {value}")
    return value


def load_environment() -> Dict[str, Any]:
    """DEFAULT_CONFIG overridden by UDF_* environment variables."""
    config = dict(DEFAULT_CONFIG)
    config["max_order"] = _env_int("UDF_MAX_ORDER", config["max_order"], 0)
    config["default_order"] = _env_int("UDF_DEFAULT_ORDER", config["default_order"], 0)
    config["degree"] = _env_int("UDF_DEGREE", config["degree"], 0)
    config["jobs"] = _env_int("UDF_JOBS", config["jobs"], 1)
    config["cache"] = os.getenv("UDF_CACHE", config["cache"])
    sign = _env_int("UDF_MOYAL_SIGN", config["moyal_sign"])
    if sign not in (1, -1):
        raise ValueError(f"UDF_MOYAL_SIGN must be +1 or -1, got {sign}")
    config["moyal_sign"] = sign
    fmt = os.getenv("UDF_OUTPUT_FORMAT", config["output_format"])
    if fmt not in OUTPUT_FORMATS:
        raise ValueError(f"UDF_OUTPUT_FORMAT must be one of {', '.join(OUTPUT_FORMATS)}, got '{fmt}'")
    config["output_format"] = fmt
    return config


@dataclass
class RunConfig:
    """Everything one invocation needs"""
    command: str
    order: int = 2
    degree: int = 6
    n_max: Optional[int] = None
    identities: Optional[List[str]] = None
    grid: Optional[Dict[str, Any]] = None
    output_format: str = "text"
    jobs: int = 1
    cache: Optional[str] = ".udf_cache"
    sign: int = 1
    max_order: int = 4
    quiet: bool = False
    suite: Optional[str] = None
    table: Optional[str] = None
    m_max: int = 3
    n_max_table: int = 1
    printed: bool = False
    operands: List[str] = field(default_factory=list)
    output_dir: Optional[str] = None

    def __post_init__(self):
        if self.order < 0:
            raise ValueError(f"order must be non-negative, got {self.order}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be at least 1, got {self.jobs}")
        if self.sign not in (1, -1):
            raise ValueError(f"Moyal sign must be +1 or -1, got {self.sign}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ValueError(f"Unknown output format '{self.output_format}'")

    def config_hash(self) -> str:
        """Hash of the fields that determine the computed R."""
        key = {"version": ENGINE_VERSION, "order": self.order, "sign": self.sign}
        return hashlib.sha256(json.dumps(key, sort_keys=True).encode("utf-8")).hexdigest()


class Console:
    """Emoji status lines on stderr"""

    def __init__(self, quiet: bool = False):
        self.quiet = quiet

    def __call__(self, message: str) -> None:
        if not self.quiet:
            print(message, file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="udf", description="Universal deformation formula of H1")
    parser.add_argument("--format", dest="output_format", choices=OUTPUT_FORMATS, default=None)
    parser.add_argument("--jobs", type=int, default=None)
    parser.add_argument("--cache", default=None, help="R cache directory ('' disables caching)")
    parser.add_argument("--paper-check", "--acceptance-check", dest="acceptance_check", action="store_true",
                        help="run the acceptance checklist")
    parser.add_argument("--quiet", action="store_true")
    parser.add_argument("--output-dir", default=None, help="also write JSON/Markdown/HTML reports here")

    commands = parser.add_subparsers(dest="command")

    def with_order(sub):
        sub.add_argument("--order", type=int, default=None)
        return sub

    with_order(commands.add_parser("compute-r", help="compute R to a given ħ-order"))

    verify = with_order(commands.add_parser("verify", help="run a verification suite"))
    verify.add_argument("suite", choices=SUITES)
    verify.add_argument("--degree", type=int, default=None)
    verify.add_argument("--n-max", type=int, default=None, help="lower every appendix run to this n")
    verify.add_argument("--identity", dest="identities", action="append", choices=IDENTITIES,
                        help="restrict the appendix suite to one identity (repeatable)")
    verify.add_argument("--grid", default=None, help="JSON grid spec {identity, n_max, grid}")

    dump = with_order(commands.add_parser("dump", help="coefficient table of a section family"))
    dump.add_argument("table", choices=DUMP_TABLES)
    dump.add_argument("m_max", nargs="?", type=int, default=3)
    dump.add_argument("n_max", nargs="?", type=int, default=1)
    dump.add_argument("--printed", action="store_true", help="use the displayed closed forms")

    star = with_order(commands.add_parser("star-eval", help="evaluate fα ⋆ gβ"))
    star.add_argument("operands", nargs=2, metavar="LETTER:WORD",
                      help="e.g. f:a or 'g[1,0]:a b^-1'")
    return parser


def make_config(args: argparse.Namespace, env: Dict[str, Any]) -> RunConfig:
    command = "acceptance-check" if args.acceptance_check else args.command
    if command is None:
        raise ValueError("No command given; use compute-r, verify, dump, star-eval or --paper-check")
    grid = None
    if getattr(args, "grid", None):
        with open(args.grid, "r", encoding="utf-8") as f:
            try:
                grid = json.load(f)
            except json.JSONDecodeError as e:
                raise ValueError(f"Grid file {args.grid} is not valid JSON") from e
    order = getattr(args, "order", None)
    degree = getattr(args, "degree", None)
    return RunConfig(
        command=command,
        order=env["default_order"] if order is None else order,
        degree=env["degree"] if degree is None else degree,
        n_max=getattr(args, "n_max", None) if command != "dump" else None,
        identities=getattr(args, "identities", None),
        grid=grid,
        output_format=args.output_format or env["output_format"],
        jobs=args.jobs if args.jobs is not None else env["jobs"],
        cache=env["cache"] if args.cache is None else (args.cache or None),
        sign=env["moyal_sign"],
        max_order=env["max_order"],
        quiet=args.quiet,
        suite=getattr(args, "suite", None),
        table=getattr(args, "table", None),
        m_max=getattr(args, "m_max", 3),
        n_max_table=getattr(args, "n_max", 1) if command == "dump" else 1,
        printed=getattr(args, "printed", False),
        operands=list(getattr(args, "operands", None) or []),
        output_dir=args.output_dir,
    )


# Cache

def _cache_path(config: RunConfig) -> str:
    return os.path.join(config.cache, f"r_{config.config_hash()[:16]}.json")


def load_cached_r(config: RunConfig, console: Console) -> Optional[RTensor]:
    if not config.cache:
        return None
    path = _cache_path(config)
    if not os.path.exists(path):
        return None
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        if data.get("config_hash") != config.config_hash():
            raise ValueError("config hash mismatch")
        r_tensor = RTensor.from_json(data["r"])
    except (OSError, ValueError, KeyError, TypeError) as e:
        console(f"⚠️ Ignoring unreadable cache {path}: {e}")
        return None
    console(f"📄 Loaded R from cache {path}")
    return r_tensor


def store_r(config: RunConfig, r_tensor: RTensor, console: Console) -> None:
    if not config.cache:
        return
    os.makedirs(config.cache, exist_ok=True)
    path = _cache_path(config)
    payload = {"config_hash": config.config_hash(), "r": r_tensor.to_json()}
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(payload, sort_keys=True, ensure_ascii=False))
    console(f"📄 Cached R at {path}")


# Commands

def _check_order(config: RunConfig) -> None:
    if config.order > config.max_order:
        raise OrderLimitError(f"order {config.order} exceeds the limit {config.max_order} (set UDF_MAX_ORDER)")


def cmd_compute_r(config: RunConfig, console: Console) -> str:
    _check_order(config)
    r_tensor = load_cached_r(config, console)
    if r_tensor is None:
        console(f"🚀 Computing R to ħ^{config.order}")
        r_tensor = UDFEngine(config.sign, console).extract_R(config.order)
        store_r(config, r_tensor, console)
    fmt = config.output_format
    if fmt == "html":
        raise ValueError("R can be emitted as text, json, latex or markdown")
    exporter = Exporter(ENGINE_VERSION, config.config_hash())
    return exporter.render_r(r_tensor, fmt, {"order": config.order, "sign": config.sign})


def cmd_verify(config: RunConfig, console: Console) -> VerificationReport:
    console(f"🚀 Running suite '{config.suite}'")
    if config.suite in ("udf", "twist", "all"):
        _check_order(config)
    return run_suite(config.suite, order=config.order, degree=config.degree, n_max=config.n_max,
                     sign=config.sign, jobs=config.jobs, grid=config.grid, identities=config.identities,
                     log=console)


def cmd_dump(config: RunConfig, console: Console) -> str:
    if config.m_max < 0 or config.n_max_table < 0:
        raise ValueError("table bounds must be non-negative")
    exporter = Exporter(ENGINE_VERSION)
    fmt = config.output_format if config.output_format != "html" else "markdown"
    if config.table == "r-table":
        _check_order(config)
        rows = UDFEngine(config.sign, console).contributing_tuples(config.order)
        frame = exporter.table_frame([
            {"order": row["order"], "m": " ".join(map(str, row["m"])), "n": " ".join(map(str, row["n"])),
             "value": row["value"].latex() if fmt == "latex" else row["value"].text()}
            for row in rows
        ], ["order", "m", "n", "value"])
        return exporter.render_table(frame, fmt, f"R contributions to ħ^{config.order}")
    variant = "printed" if config.printed else "resolved"
    section = build_section(config.table, SectionContext(), config.m_max, config.n_max_table,
                            config.sign, variant)
    frame = exporter.section_frame(section, fmt == "latex", config.m_max, config.n_max_table)
    return exporter.render_table(frame, fmt, f"{config.table} ({variant})")


def parse_operand(text: str):
    """'f:a', 'g[1,0]:a b^-1' or '1:' -> (JetPoly, GroupWord)."""
    letter, sep, word = text.partition(":")
    if not sep:
        raise ValueError(f"Operand '{text}' must look like LETTER:WORD")
    letter = letter.strip()
    if letter == "1":
        poly = JetPoly.one()
    elif "[" in letter:
        name, _, rest = letter.partition("[")
        try:
            a, b = (int(part) for part in rest.rstrip("]").split(","))
        except ValueError as e:
            raise ValueError(f"Derivative indices in '{letter}' must be two integers") from e
        poly = JetPoly.function(name, a, b)
    elif letter.isidentifier():
        poly = JetPoly.function(letter)
    else:
        raise ValueError(f"Unknown letter '{letter}'")
    return poly, make_word(word.strip() or "id")


def cmd_star_eval(config: RunConfig, console: Console) -> str:
    _check_order(config)
    left, right = (parse_operand(op) for op in config.operands)
    console(f"🚀 Evaluating star product to ħ^{config.order}")
    value: CrossedElement = UDFEngine(config.sign, console).star(left, right, config.order).value
    fmt = config.output_format
    if fmt == "json":
        terms = [{"word": word_text(w), "poly": poly.text()} for w, poly in value.items()]
        payload = {"generation_metadata": Exporter(ENGINE_VERSION).generation_metadata(),
                   "order": config.order, "terms": terms}
        return json.dumps(payload, indent=2, ensure_ascii=False)
    if fmt == "latex":
        return " + ".join(f"\\left({poly.latex()}\\right){word_text(w)}" for w, poly in value.items()) or "0"
    return value.text()


def emit_report(report: VerificationReport, config: RunConfig, console: Console) -> int:
    exporter = Exporter(ENGINE_VERSION, config.config_hash())
    fmt = config.output_format if config.output_format != "latex" else "markdown"
    print(exporter.render_report(report, fmt))
    if config.output_dir:
        for label, path in exporter.export_all_formats(report, config.output_dir).items():
            console(f"📄 {label} report written to {path}")
    summary = report.summary()
    if report.passed:
        console(f"✅ {report.suite}: {summary['pass']} passed, {summary['discrepancy']} discrepancies logged")
        return 0
    console(f"❌ {report.suite}: {summary['fail']} failed")
    return 1


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    console = Console(args.quiet)
    try:
        config = make_config(args, load_environment())
        console = Console(config.quiet)
        if config.command == "acceptance-check":
            _check_order(RunConfig("acceptance-check", order=3, max_order=config.max_order))
            console("🚀 Running the acceptance checklist")
            return emit_report(acceptance_check(3, config.jobs, console), config, console)
        if config.command == "verify":
            return emit_report(cmd_verify(config, console), config, console)
        if config.command == "compute-r":
            print(cmd_compute_r(config, console))
        elif config.command == "dump":
            print(cmd_dump(config, console))
        elif config.command == "star-eval":
            print(cmd_star_eval(config, console))
        console("✅ Done")
        return 0
    except ENGINE_ERRORS as e:
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
