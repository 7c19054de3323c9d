"""Command-line front: route, execute, train, manage macros, evaluate, serve.

Exit codes: 0 success, 1 domain error (unknown id, no match where one was
required, bad file, ...), 2 usage error (argparse). The config file is taken
from --config, falling back to the MACRO_ROUTER_CONFIG environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import eval_harness
from .errors import MacroRouterError
from .executor import HttpTransport, SimulatedTransport
from .pipeline import PipelineConfig, Router, execute_with_feedback
from .registry import MacroRegistry, parse_record
from .service import ApiService, serve

PACKAGED_FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MacroRouterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config JSON path (default: $MACRO_ROUTER_CONFIG)")
    common.add_argument("--registry", help="registry JSON path (overrides config)")

    parser = argparse.ArgumentParser(
        prog="macro-router",
        description="Match natural-language requests to task macros and run their API calls.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("route", parents=[common], help="rank macros for an utterance")
    p.add_argument("utterance")
    p.add_argument("--json", action="store_true", help="print the decision as JSON")
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("exec", parents=[common], help="route and run the matched macro")
    p.add_argument("utterance")
    p.add_argument("--dry-run", action="store_true", help="print the plan, send nothing")
    p.add_argument("--simulator", help="simulated transport fixture (JSON)")
    p.set_defaults(func=cmd_exec)

    p = sub.add_parser("train", parents=[common], help="interactive training session")
    p.add_argument("-k", type=int, default=3, help="proposals to show")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("macros", help="registry CRUD")
    action = p.add_subparsers(dest="action", required=True)
    action.add_parser("list", parents=[common]).set_defaults(func=cmd_macros_list)
    pa = action.add_parser("add", parents=[common])
    pa.add_argument("file", help="JSON file with one macro record")
    pa.set_defaults(func=cmd_macros_add)
    pr = action.add_parser("rm", parents=[common])
    pr.add_argument("id", type=int)
    pr.set_defaults(func=cmd_macros_rm)

    p = sub.add_parser("feedback", parents=[common], help="record a user outcome")
    p.add_argument("id", type=int)
    p.add_argument("outcome", choices=["success", "failure"])
    p.set_defaults(func=cmd_feedback)

    p = sub.add_parser("eval", parents=[common], help="run the classification experiment")
    p.add_argument("--fixtures", default=PACKAGED_FIXTURES, help="fixture directory")
    p.add_argument("--theta", type=float, help="evaluate at this theta instead of calibrating")
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    p.add_argument("--save-theta", metavar="CONFIG", help="persist calibrated theta into this config file")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", parents=[common], help="start the HTTP service")
    p.add_argument("--port", type=int, help="override the configured port")
    p.set_defaults(func=cmd_serve)

    return parser


def load_config(args) -> PipelineConfig:
    path = args.config or os.environ.get("MACRO_ROUTER_CONFIG")
    config = PipelineConfig.from_file(path) if path else PipelineConfig()
    if getattr(args, "registry", None):
        config.registry_path = args.registry
    if not config.registry_path:
        config.registry_path = "registry.json"
    return config


def load_router(args, need_registry=True) -> tuple[Router, PipelineConfig]:
    config = load_config(args)
    if os.path.exists(config.registry_path):
        registry = MacroRegistry.load(config.registry_path)
    elif need_registry:
        raise MacroRouterError(
            f"registry not found: {config.registry_path} (set registry_path in config "
            f"or pass --registry)"
        )
    else:
        registry = MacroRegistry()
    return Router(registry, config), config


def render_decision(decision, theta: float) -> str:
    lines = []
    for r in decision.ranked:
        marker = " <-- theta" if r.blended >= theta else ""
        lines.append(
            f"{r.id:>4}  {r.macro_name:<32} cosine={r.cosine:.4f} blended={r.blended:.4f}{marker}"
        )
    if decision.kind == "matched":
        lines.append(f"decision: Matched {decision.macro_name} (score {decision.score:.4f})")
        if decision.bindings:
            lines.append(f"bindings: {decision.bindings}")
        if decision.missing_params:
            lines.append(f"missing slots: {', '.join(decision.missing_params)}")
    elif decision.kind == "needs_training":
        lines.append("decision: NeedsTraining")
    else:
        lines.append(
            f"decision: NoMatch (best id {decision.best_id}, score {decision.best_score:.4f})"
        )
    return "\n".join(lines)


def cmd_route(args) -> int:
    router, config = load_router(args)
    decision = router.route(args.utterance)
    if args.json:
        print(json.dumps(decision.to_dict(), indent=2, sort_keys=True))
    else:
        print(render_decision(decision, config.theta))
    return 0


def cmd_exec(args) -> int:
    router, config = load_router(args)
    decision = router.route(args.utterance)
    print(render_decision(decision, config.theta))
    if decision.kind != "matched":
        print("nothing to execute; train the router for this task first")
        return 1
    if decision.missing_params:
        print(f"cannot execute, missing slots: {', '.join(decision.missing_params)}")
        return 1
    plan = router.plan_for(decision)
    print("plan:")
    for i, call in enumerate(plan.calls):
        print(f"  {i}: {call.method} {call.url}")
        if call.body is not None:
            print(f"     body: {json.dumps(call.body, sort_keys=True)}")
    if args.dry_run:
        print("dry run, nothing sent")
        return 0
    transport = (
        SimulatedTransport.from_fixture_file(args.simulator)
        if args.simulator
        else HttpTransport()
    )
    result = execute_with_feedback(router, decision.macro_id, plan, transport)
    for i, call_result in enumerate(result.per_call):
        note = call_result.error or "ok"
        print(f"  call {i}: status={call_result.status_code} {note}")
        for name, value in call_result.extracted.items():
            print(f"          bound {name} = {value!r}")
    print("result:", "succeeded" if result.succeeded else f"halted at call {result.halted_at}")
    router.registry.save(config.registry_path)
    return 0 if result.succeeded else 1


def cmd_train(args) -> int:
    router, config = load_router(args)
    description = _ask("describe the new task: ")
    session = router.training_propose(description, args.k)
    print("closest existing macros:")
    for p in session.proposals:
        name = router.registry.get(p.id).macro_name
        print(f"  [{p.id}] {name} (score {p.score:.4f})")
    choice = _ask("[u]se existing / [n]ew macro / [q]uit: ").strip().lower()
    if choice.startswith("u"):
        macro_id = int(_ask("macro id: "))
        session.accept_existing(macro_id)
        print(f"using existing macro {macro_id}; nothing added")
        return 0
    if not choice.startswith("n"):
        print("cancelled")
        return 0

    draft = {
        "use_case": _ask("title (use case): "),
        "scenario_description": _ask("one-line description: "),
        "macro_name": _ask("macro name (UPPER_SNAKE): "),
        "params": [],
        "call_templates": [],
        "slot_specs": [],
    }
    raw_params = _ask("params as name:kind, comma separated (kind text|number), blank for none: ")
    for chunk in filter(None, (c.strip() for c in raw_params.split(","))):
        name, _, kind = chunk.partition(":")
        draft["params"].append({"name": name.strip(), "kind": (kind or "text").strip(), "description": ""})
        template = _ask(f"slot template for {name.strip()!r} (blank = whole utterance): ").strip()
        if template:
            draft["slot_specs"].append({"param": name.strip(), "template": template, "fallback": None})
        else:
            draft["slot_specs"].append(
                {"param": name.strip(), "template": "{" + name.strip() + "}", "fallback": "remainder"}
            )
    while True:
        line = _ask("call as METHOD URL (blank to finish): ").strip()
        if not line:
            break
        method, _, url = line.partition(" ")
        body_raw = _ask("  JSON body (blank for none): ").strip()
        bindings_raw = _ask("  output bindings as name=path, comma separated (blank none): ").strip()
        call = {
            "method": method.strip().upper(),
            "url_template": url.strip(),
            "header_templates": {},
            "body_template": json.loads(body_raw) if body_raw else None,
            "output_bindings": [],
        }
        for chunk in filter(None, (c.strip() for c in bindings_raw.split(","))):
            name, _, path = chunk.partition("=")
            call["output_bindings"].append({"bind_name": name.strip(), "path": path.strip()})
        draft["call_templates"].append(call)

    record = parse_record(draft, "draft", require_id=False)
    print(f"draft macro {record.macro_name} with {len(record.call_templates)} call(s)")
    if not _ask("commit? [y/N]: ").strip().lower().startswith("y"):
        print("cancelled, registry unchanged")
        return 0
    session.start_draft(record)
    macro_id = router.training_commit(session)
    router.registry.save(config.registry_path)
    print(f"committed macro {macro_id} ({record.macro_name})")
    return 0


def _ask(prompt: str) -> str:
    print(prompt, end="", flush=True)
    line = sys.stdin.readline()
    if not line:
        raise MacroRouterError("input ended mid-session")
    return line.rstrip("\n")


def cmd_macros_list(args) -> int:
    router, _ = load_router(args)
    for record in router.registry.list_records():
        stats = record.stats
        print(
            f"{record.id:>4}  {record.macro_name:<36} {record.use_case:<36} "
            f"{stats.successes}/{stats.attempts}"
        )
    return 0


def cmd_macros_add(args) -> int:
    router, config = load_router(args, need_registry=False)
    with open(args.file, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    record = parse_record(raw, args.file, require_id=False)
    macro_id = router.registry.add_macro(record)
    router.registry.save(config.registry_path)
    print(f"added macro {macro_id} ({record.macro_name})")
    return 0


def cmd_macros_rm(args) -> int:
    router, config = load_router(args)
    removed = router.registry.remove_macro(args.id)
    router.registry.save(config.registry_path)
    print(f"removed macro {args.id} ({removed.macro_name})")
    return 0


def cmd_feedback(args) -> int:
    router, config = load_router(args)
    stats = router.record_feedback(args.id, args.outcome, source="user")
    router.registry.save(config.registry_path)
    print(f"macro {args.id}: {stats.successes}/{stats.attempts}")
    return 0


def cmd_eval(args) -> int:
    registry, utterances = eval_harness.load_fixtures(args.fixtures)
    if args.theta is not None:
        theta = args.theta
    else:
        calibration = eval_harness.calibrate_theta(registry, utterances)
        theta = calibration.theta
        feasibility = "" if calibration.feasible else " (infeasible, best unconstrained)"
        print(f"calibrated theta = {theta:.2f}{feasibility}")
        if args.save_theta:
            _merge_config_value(args.save_theta, "theta", theta)
    report = eval_harness.run_eval(
        registry, utterances, PipelineConfig(theta=theta, alpha=1.0)
    )
    if args.json:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        print(report.table())
    return 0


def _merge_config_value(path: str, key: str, value) -> None:
    current = {}
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as fh:
            current = json.load(fh)
    current[key] = value
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(current, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_serve(args) -> int:
    router, config = load_router(args)
    service = ApiService(router)
    serve(service, port=args.port if args.port is not None else config.port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
