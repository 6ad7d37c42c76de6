"""Command line front end.

Exit codes: 0 ok, 1 validation failure, 2 parse error, 3 soundness failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

from . import domain_io
from .actions import Plan, validate_action
from .cma import eu_interval, to_dot, validate_cma
from .domain_io import Domain, dumps
from .errors import CmaError, InvalidModelError, MappingError, ParseError
from .intervals import TOL
from .oracle import check_soundness
from .projection import project_plan
from .validation import Report

EXIT_OK, EXIT_INVALID, EXIT_PARSE, EXIT_UNSOUND = 0, 1, 2, 3


@dataclass
class RunConfig:
    seed: int | None
    samples: int
    tol: float
    out: str | None
    fmt: str


class _Failure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _emit(cfg: RunConfig, payload: dict | str) -> None:
    if isinstance(payload, dict):
        text = dumps({"schemaVersion": domain_io.SCHEMA_VERSION, **payload})
    else:
        text = payload if payload.endswith("\n") else payload + "\n"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _need(value, flag: str):
    if value is None:
        raise _Failure(EXIT_PARSE, f"{flag} is required for this command")
    return value


def _plan(dom: Domain, args) -> tuple[Plan, object, str]:
    """The plan named by --plan, or the single hierarchy node --node."""
    if args.plan:
        plan, h = dom.plan(args.plan)
        return plan, h, args.plan
    if args.hierarchy and args.node:
        h = dom.hierarchy(args.hierarchy)
        if args.node not in h.nodes:
            raise ParseError(f"unknown node {args.node!r} in hierarchy {args.hierarchy!r}")
        return Plan((h.action(args.node),)), h, args.node
    raise _Failure(EXIT_PARSE, "give --plan, or --hierarchy with --node")


def cmd_validate(dom: Domain, args, cfg: RunConfig) -> int:
    report = domain_io.lint(dom)
    for name, a in sorted(dom.actions.items()):
        report.extend(validate_action(a, cfg.tol))
    for name, M in sorted(dom.worlds.items()):
        report.extend(validate_cma(M, cfg.tol), prefix=f"world {name}: ")
    for name, h in sorted(dom.hierarchies.items()):
        report.extend(h.validate(), prefix=f"hierarchy {name}: ")
    if cfg.fmt == "text":
        _emit(cfg, str(report) if not report.ok or report.warnings else "ok")
    else:
        _emit(cfg, {"validation": report.to_dict()})
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_project(dom: Domain, args, cfg: RunConfig) -> int:
    M = dom.world(_need(args.world, "--world"))
    plan, _, _ = _plan(dom, args)
    out, stats = project_plan(plan, M)
    if cfg.fmt == "dot":
        _emit(cfg, to_dot(out))
    elif cfg.fmt == "text":
        lines = [f"{s['action']}: nodeCount={s['nodeCount']} totalNodeCount={s['totalNodeCount']}"
                 f" pruned={s['pruned']}" for s in stats.to_dict()["steps"]]
        _emit(cfg, "\n".join(lines))
    else:
        _emit(cfg, {"plan": list(plan.names), "stats": stats.to_dict(),
                    "tree": domain_io.cma_to_dict(out)})
    return EXIT_OK


def cmd_abstract(dom: Domain, args, cfg: RunConfig) -> int:
    h = dom.hierarchy(_need(args.hierarchy, "--hierarchy"))
    names = [args.node] if args.node else sorted(n for n, v in h.nodes.items()
                                                 if v.kind != "concrete")
    report = Report()
    actions = {}
    for name in names:
        h.node(name)
        a = h.action(name)
        actions[name] = domain_io.action_to_dict(a)
        report.extend(validate_action(a, cfg.tol))
    if cfg.fmt == "text":
        _emit(cfg, "\n".join(f"{n}: {len(h.action(n).branches)} branches" for n in names))
    else:
        _emit(cfg, {"actions": actions, "validation": report.to_dict()})
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_instantiate(dom: Domain, args, cfg: RunConfig) -> int:
    h = dom.hierarchy(_need(args.hierarchy, "--hierarchy"))
    plans = h.instantiations(_need(args.node, "--node"))
    rows = [list(p.names) for p in plans]
    if cfg.fmt == "text":
        _emit(cfg, "\n".join(" ".join(r) for r in rows))
    else:
        _emit(cfg, {"node": args.node, "count": len(rows), "plans": rows})
    return EXIT_OK


def cmd_check(dom: Domain, args, cfg: RunConfig) -> int:
    M = dom.world(_need(args.world, "--world"))
    seed = _need(cfg.seed, "--seed")
    plan, h, label = _plan(dom, args)
    report = check_soundness(plan, M, cfg.samples, seed, hierarchy=h, tol=cfg.tol)
    if cfg.fmt == "text":
        _emit(cfg, f"{label}: {report.passes}/{report.samples} passed"
                   f" over {report.instantiations} instantiation(s)")
    else:
        _emit(cfg, {"plan": label, "seed": seed, "report": report.to_dict()})
    return EXIT_OK if report.ok else EXIT_UNSOUND


def cmd_eu(dom: Domain, args, cfg: RunConfig) -> int:
    M = dom.world(_need(args.world, "--world"))
    u = dom.utility(_need(args.utility, "--utility"))
    if args.plan or args.node:
        plan, _, _ = _plan(dom, args)
        M, _ = project_plan(plan, M)
    lo, hi = eu_interval(M, u)
    if cfg.fmt == "text":
        _emit(cfg, f"[{lo!r}, {hi!r}]")
    else:
        _emit(cfg, {"utility": args.utility, "euLo": lo, "euHi": hi})
    return EXIT_OK


def cmd_export_dot(dom: Domain, args, cfg: RunConfig) -> int:
    name = _need(args.world, "--world")
    M = dom.world(name)
    if args.plan or args.node:
        plan, _, _ = _plan(dom, args)
        M, _ = project_plan(plan, M)
    _emit(cfg, to_dot(M, name))
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "project": cmd_project,
    "abstract": cmd_abstract,
    "instantiate": cmd_instantiate,
    "check": cmd_check,
    "eu": cmd_eu,
    "export-dot": cmd_export_dot,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cmaplan",
                                     description="Projection and abstraction of "
                                                 "interval-probability actions.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--domain", required=True, help="domain JSON file")
        p.add_argument("--world")
        p.add_argument("--plan")
        p.add_argument("--hierarchy")
        p.add_argument("--node")
        p.add_argument("--utility")
        p.add_argument("--samples", type=int, default=1000)
        p.add_argument("--seed", type=int)
        p.add_argument("--tol", type=float, default=TOL)
        p.add_argument("--out")
        p.add_argument("--format", choices=("json", "dot", "text"), default="json")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(args.seed, args.samples, args.tol, args.out, args.format)
    try:
        dom = domain_io.load(args.domain)
        return COMMANDS[args.command](dom, args, cfg)
    except _Failure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvalidModelError as exc:
        print(f"invalid model: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except MappingError as exc:
        print(f"soundness check failed: {exc}", file=sys.stderr)
        return EXIT_UNSOUND
    except CmaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
