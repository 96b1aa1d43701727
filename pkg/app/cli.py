"""gmatch command line: instance generation, families, distinguishing, recovery, boosting and benchmarks."""
import argparse
import logging
import sys
from typing import Dict, List, Optional

from pydantic import BaseModel, ValidationError

from app.config import settings
from app.controllers.bench.BenchController import BenchController, ConfigError
from app.controllers.distinguish.DistinguishController import DistinguishController
from app.controllers.family.FamilyController import FamilyController
from app.controllers.graph.GraphController import GraphController
from app.controllers.instance.InstanceController import InstanceController
from app.controllers.recovery.RecoveryController import RecoveryController
from app.models.distinguish.DistinguishModel import DistinguishRequest
from app.models.family.FamilyModel import FamilyBuildRequest, FamilyDocument, FamilySpec
from app.models.instance.InstanceModel import InstanceRequest, ModelParams
from app.models.recovery.RecoveryModel import BoostRequest, RecoverRequest
from app.models.subiso.SubIsoModel import SearchBudget
from app.services.graph_core import GraphError, Permutation
from app.services.serialization import (
    load_graph,
    load_permutation,
    loads_partial_map,
    pretty_json,
    read_text,
    save_permutation,
    write_text,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_PARTIAL = 3


def _emit(data) -> None:
    if isinstance(data, BaseModel):
        data = data.model_dump(mode="json", by_alias=True)
    sys.stdout.write(pretty_json(data))


def _exit_code(result: Dict) -> int:
    if result["status"] == "error":
        return EXIT_ERROR if result.get("kind") == "internal" else EXIT_CONFIG
    return EXIT_PARTIAL if result["status"] == "partial" else EXIT_OK


def _fail(result: Dict) -> int:
    sys.stderr.write(f"error: {result['message']}\n")
    return _exit_code(result)


def _payload(path: str):
    return GraphController.to_payload(load_graph(path))


def _family_document(path: str) -> FamilyDocument:
    return FamilyDocument.model_validate_json(read_text(path))


def _budget(args) -> Optional[SearchBudget]:
    if args.nodes is None and args.max_occurrences is None and args.seconds is None:
        return None
    defaults = settings.get_budget_defaults()
    return SearchBudget(
        nodes=args.nodes if args.nodes is not None else defaults["nodes"],
        max_occurrences=args.max_occurrences if args.max_occurrences is not None else defaults["max_occurrences"],
        seconds=args.seconds if args.seconds is not None else defaults["seconds"],
    )


def _truth(path: Optional[str]) -> Optional[List[int]]:
    return list(load_permutation(path).image) if path else None


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_gen(args) -> int:
    request = InstanceRequest(params=ModelParams(n=args.n, p=args.p, gamma=args.gamma), seed=args.seed, null=args.null)
    result = InstanceController.write_instance(request, args.out)
    if result["status"] == "error":
        return _fail(result)
    _emit({"files": result["files"], "seed": args.seed, "null": args.null})
    return EXIT_OK


def cmd_family(args) -> int:
    if args.choose:
        result = FamilyController.choose(args.n, args.p, args.gamma)
        if result["status"] == "error":
            return _fail(result)
        _emit(result["data"])
        return EXIT_OK if result["data"].feasible else EXIT_CONFIG
    spec_fields = {"v": args.v, "kind": args.kind, "target_size": args.target}
    for key, value in (("d", args.d), ("lambda", args.lam), ("alpha", args.alpha), ("max_candidates", args.max_candidates),
                       ("pair_a", args.pair_a), ("pair_b", args.pair_b)):
        if value is not None:
            spec_fields[key] = value
    spec_fields["strict_regime"] = args.strict
    request = FamilyBuildRequest(spec=FamilySpec.model_validate(spec_fields), seed=args.seed)
    result = FamilyController.build(request, out=args.out, workers=args.workers)
    if result["status"] == "error":
        return _fail(result)
    doc = result["data"]
    _emit({
        "members": len(doc.members),
        "complete": doc.complete,
        "candidates_tried": doc.candidates_tried,
        "rejections": doc.rejections,
        "out": args.out,
    })
    return _exit_code(result)


def cmd_distinguish(args) -> int:
    request = DistinguishRequest(
        g0=_payload(args.g0),
        g1=_payload(args.g1),
        family=_family_document(args.family),
        n=args.n,
        p=args.p,
        gamma=args.gamma,
        policy=args.policy,
        calibration_trials=args.calibration_trials,
        seed=args.seed,
        budget=_budget(args),
    )
    result = DistinguishController.distinguish(request)
    if result["status"] == "error":
        return _fail(result)
    stat = result["data"]
    _emit({"per_member": stat.per_member, "P": stat.P, "threshold": stat.threshold, "decision": stat.decision,
           "partial": stat.partial})
    return _exit_code(result)


def cmd_recover(args) -> int:
    request = RecoverRequest(
        g0=_payload(args.g0),
        g1=_payload(args.g1),
        family=_family_document(args.family),
        n=args.n,
        p=args.p,
        gamma=args.gamma,
        threshold=args.threshold,
        seed=args.seed,
        scan_order=args.scan_order,
        budget=_budget(args),
        truth=_truth(args.truth),
    )
    result = RecoveryController.recover(request)
    if result["status"] == "error":
        return _fail(result)
    data = result["data"]
    if data["permutation"] is not None:
        save_permutation(args.out, Permutation(data["permutation"]))
    if args.metrics:
        write_text(args.metrics, pretty_json(data["report"].model_dump(mode="json")))
    _emit(data["report"])
    return _exit_code(result)


def cmd_boost(args) -> int:
    seeds = loads_partial_map(read_text(args.seedmap))
    request = BoostRequest(
        g0=_payload(args.g0),
        g1=_payload(args.g1),
        seeds=sorted(seeds.items()),
        n=args.n,
        p=args.p,
        gamma=args.gamma,
        delta=args.delta,
        delta_prime=args.delta_prime,
        scan_order=args.scan_order,
        truth=_truth(args.truth),
    )
    result = RecoveryController.boost(request)
    if result["status"] == "error":
        return _fail(result)
    save_permutation(args.out, Permutation(result["data"]["permutation"]))
    summary = {"report": result["data"]["report"].model_dump(mode="json")}
    if "metrics" in result["data"]:
        summary["metrics"] = result["data"]["metrics"].model_dump(mode="json")
    _emit(summary)
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        cfg = BenchController.load_config(args.config)
    except ConfigError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_CONFIG
    result = BenchController.run(cfg, out=args.out, manifest_path=args.manifest, workers=args.workers)
    if result["status"] == "error":
        return _fail(result)
    _emit(result["data"].manifest.aggregate)
    return _exit_code(result)


def cmd_serve(args) -> int:
    import uvicorn

    config = settings.get_server_config()
    uvicorn.run("main:app", host=args.host or config["host"], port=args.port or config["port"], reload=config["reload"])
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _model_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--n", type=int, required=required, help="vertex count")
    p.add_argument("--p", type=float, required=required, help="base edge probability")
    p.add_argument("--gamma", type=float, required=required, help="subsample probability")


def _budget_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--nodes", type=int, default=None, help="search-node budget per count")
    p.add_argument("--max-occurrences", type=int, default=None)
    p.add_argument("--seconds", type=float, default=None, help="wall-clock budget per search")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gmatch", description=__doc__)
    parser.add_argument("--log-level", default=settings.LOG_LEVEL)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="sample a structured or null instance")
    _model_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--null", action="store_true", help="two independent G(n, p*gamma) graphs")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("family", help="build a certified test family, or choose its parameters")
    p.add_argument("--choose", action="store_true", help="only pick v and d' for --n/--p/--gamma")
    _model_args(p, required=False)
    p.add_argument("--v", type=int)
    p.add_argument("--kind", choices=["regular", "regular_plus_matching", "subdivided"], default="regular")
    p.add_argument("--d", type=int)
    p.add_argument("--lambda", dest="lam", type=str, help="rational, e.g. 1/8")
    p.add_argument("--alpha", type=str)
    p.add_argument("--target", type=int, default=1)
    p.add_argument("--max-candidates", type=int)
    p.add_argument("--pair-a", type=str)
    p.add_argument("--pair-b", type=str)
    p.add_argument("--strict", action="store_true", help="reject parameters outside the proven regime")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", help="family JSON file")
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("distinguish", help="decide structured versus null for a graph pair")
    p.add_argument("--g0", required=True)
    p.add_argument("--g1", required=True)
    p.add_argument("--family", required=True)
    _model_args(p)
    p.add_argument("--policy", choices=["closed_form_third", "calibrated"], default="closed_form_third")
    p.add_argument("--calibration-trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    _budget_args(p)
    p.set_defaults(func=cmd_distinguish)

    p = sub.add_parser("recover", help="recover the hidden permutation")
    p.add_argument("--g0", required=True)
    p.add_argument("--g1", required=True)
    p.add_argument("--family", required=True)
    _model_args(p)
    p.add_argument("--threshold", type=int, default=None, help="required number of incident members")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scan-order", choices=["lexicographic", "max_count"], default="lexicographic")
    p.add_argument("--truth", help="ground-truth permutation file, for metrics")
    p.add_argument("--out", required=True, help="permutation file")
    p.add_argument("--metrics", help="report JSON file")
    _budget_args(p)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("boost", help="complete and fix a partial map")
    p.add_argument("--g0", required=True)
    p.add_argument("--g1", required=True)
    p.add_argument("--seedmap", required=True, help="partial map file, lines 'u w'")
    _model_args(p)
    p.add_argument("--delta", type=int, default=None)
    p.add_argument("--delta-prime", type=int, default=None)
    p.add_argument("--scan-order", choices=["lexicographic", "max_count"], default="lexicographic")
    p.add_argument("--truth", help="ground-truth permutation file, for metrics")
    p.add_argument("--out", required=True, help="permutation file")
    p.set_defaults(func=cmd_boost)

    p = sub.add_parser("bench", help="run a configured experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="results CSV (defaults to the config's out)")
    p.add_argument("--manifest", help="run manifest JSON")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, stream=sys.stderr)
    try:
        return args.func(args)
    except (ValidationError, GraphError, FileNotFoundError, ConfigError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
