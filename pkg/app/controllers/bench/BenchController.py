import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError
from scipy.stats import binomtest

from app.config import settings
from app.models.harness.HarnessModel import (
    SCHEMA_VERSION,
    Aggregate,
    BenchResponse,
    ExperimentConfig,
    RunManifest,
    TrialResult,
)
from app.models.instance.InstanceModel import ModelParams, RngSeed
from app.models.subiso.SubIsoModel import SearchBudget
from app.services.diagnostics import diagnostics_bu_nu, plant_partial_solution
from app.services.distinguisher import DistinguishParams, decide
from app.services.gen_model import sample_null, sample_structured
from app.services.recovery import RecoveryParams, boost, evaluate, recover
from app.services.serialization import canonical_json, pretty_json, read_text, sha256_hex, write_text
from app.services.sub_iso import BudgetExhausted
from app.services.test_family import TestFamily, build_family

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Experiment configuration that cannot run: missing files, empty family, bad values"""


def trial_seed(cfg: ExperimentConfig, t: int) -> RngSeed:
    return RngSeed(master=cfg.seed, labels=(f"trial-{t}",))


def _budget(cfg: ExperimentConfig) -> SearchBudget:
    return cfg.budgets if cfg.budgets is not None else SearchBudget.default()


def _model(cfg: ExperimentConfig) -> ModelParams:
    return ModelParams(n=cfg.n, p=cfg.p, gamma=cfg.gamma)


def load_family(cfg: ExperimentConfig) -> TestFamily:
    if cfg.family_file is not None:
        if not Path(cfg.family_file).is_file():
            raise ConfigError(f"family file not found: {cfg.family_file}")
        family = TestFamily.load(cfg.family_file)
    else:
        family = build_family(cfg.family_spec, RngSeed(master=cfg.seed, labels=("family",)))
    if len(family) == 0:
        raise ConfigError("family is empty; nothing to run")
    return family


def _run_trial(body: Callable[[TrialResult], None], cfg: ExperimentConfig, t: int) -> TrialResult:
    seed = trial_seed(cfg, t)
    row = TrialResult(trial=t, seed=seed.describe())
    start = time.perf_counter()
    try:
        body(row)
    except BudgetExhausted as e:
        row.status = "timeout" if e.reason == "seconds" else "partial"
        row.message = str(e)
    except Exception as e:
        logger.error(f"❌ Trial {t} failed: {str(e)}")
        row.status = "error"
        row.message = f"{type(e).__name__}: {e}"
    if settings.RECORD_WALL_CLOCK:
        row.wall_seconds = time.perf_counter() - start
    return row


def _add_diagnostics(row: TrialResult, inst, family: TestFamily, budget: SearchBudget) -> None:
    summary = diagnostics_bu_nu(inst, family, budget)
    row.n_u_mean = summary.n_u_mean
    row.n_u_max = summary.n_u_max
    row.b_u_max = summary.b_u_max
    row.max_joint_neighbors = summary.max_joint_neighbors


def distinguish_trial(args: Tuple[ExperimentConfig, TestFamily, float, int]) -> TrialResult:
    cfg, family, threshold, t = args
    budget = _budget(cfg)

    def body(row: TrialResult) -> None:
        seed = trial_seed(cfg, t)
        structured = bool(seed.child("coin").generator().integers(2))
        row.structured = structured
        params = DistinguishParams(
            family=family, n=cfg.n, p=cfg.p, gamma=cfg.gamma, threshold_policy=cfg.threshold_policy, budget=budget,
            fixed_threshold=threshold,
        )
        if structured:
            inst = sample_structured(_model(cfg), seed.child("instance"))
            g0, g1 = inst.g0, inst.g1
            if cfg.diagnostics:
                _add_diagnostics(row, inst, family, budget)
        else:
            g0, g1 = sample_null(_model(cfg), seed.child("instance"))
        stat = decide(g0, g1, params)
        row.decision = stat.decision
        row.P = stat.P
        row.threshold = stat.threshold
        row.correct = (stat.decision == "structured") == structured
        if stat.partial:
            row.status = "partial"

    return _run_trial(body, cfg, t)


def boost_trial(args: Tuple[ExperimentConfig, int]) -> TrialResult:
    cfg, t = args

    def body(row: TrialResult) -> None:
        seed = trial_seed(cfg, t)
        inst = sample_structured(_model(cfg), seed.child("instance"))
        partial = plant_partial_solution(inst, cfg.theta, cfg.epsilon, seed.child("plant"))
        row.structured = True
        row.seeded = partial.defined_count
        row.seeded_correct_fraction = partial.correct_fraction(list(inst.truth.image))
        pi, _ = boost(
            inst.g0, inst.g1, partial, cfg.n, cfg.p, cfg.gamma, truth=inst.truth,
            delta=cfg.delta, delta_prime=cfg.delta_prime, scan_order=cfg.scan_order,
        )
        metrics = evaluate(pi, inst.truth, inst.g0, inst.g1)
        row.fraction = metrics.fraction
        row.exact = metrics.exact
        row.mismatched_edges = metrics.mismatched_edges

    return _run_trial(body, cfg, t)


def recovery_trial(args: Tuple[ExperimentConfig, TestFamily, int]) -> TrialResult:
    cfg, family, t = args
    budget = _budget(cfg)

    def body(row: TrialResult) -> None:
        seed = trial_seed(cfg, t)
        inst = sample_structured(_model(cfg), seed.child("instance"))
        row.structured = True
        params = RecoveryParams(
            family=family, match_threshold=cfg.match_threshold, seed=seed.child("recover"), budget=budget,
            delta=cfg.delta, delta_prime=cfg.delta_prime, scan_order=cfg.scan_order,
        )
        pi, report = recover(inst.g0, inst.g1, params, cfg.n, cfg.p, cfg.gamma, truth=inst.truth)
        row.seeded = report.match.defined
        row.seeded_correct_fraction = report.match.correct_fraction
        if cfg.diagnostics:
            _add_diagnostics(row, inst, family, budget)
        if pi is None:
            row.exact = False
            row.message = "no seeds; boosting skipped"
        else:
            row.fraction = report.metrics.fraction
            row.exact = report.metrics.exact
            row.mismatched_edges = report.metrics.mismatched_edges
        if report.match.exhausted_members:
            row.status = "partial"

    return _run_trial(body, cfg, t)


def family_trial(args: Tuple[ExperimentConfig, int]) -> TrialResult:
    cfg, t = args

    def body(row: TrialResult) -> None:
        family = build_family(cfg.family_spec, trial_seed(cfg, t), workers=1)
        row.members = len(family)
        row.candidates_tried = family.candidates_tried
        row.exact = family.complete

    return _run_trial(body, cfg, t)


def _map_trials(fn, jobs: Sequence, workers: int) -> List[TrialResult]:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def aggregate(metric: str, rows: Sequence[TrialResult], success: Callable[[TrialResult], bool]) -> Aggregate:
    completed = [r for r in rows if r.status in ("ok", "partial")]
    wins = sum(1 for r in completed if success(r))
    fractions = [r.fraction for r in completed if r.fraction is not None]
    agg = Aggregate(
        metric=metric,
        trials=len(rows),
        completed=len(completed),
        successes=wins,
        errors=sum(1 for r in rows if r.status == "error"),
        mean_fraction=math.fsum(fractions) / len(fractions) if fractions else None,
    )
    if completed:
        ci = binomtest(wins, len(completed)).proportion_ci(confidence_level=0.95, method="exact")
        agg.rate = wins / len(completed)
        agg.ci_low = float(ci.low)
        agg.ci_high = float(ci.high)
    return agg


class BenchController:
    """Reproducible Monte Carlo experiments with CSV and manifest output"""

    @staticmethod
    def run_distinguish_experiment(cfg: ExperimentConfig, workers: int = 1) -> Tuple[List[TrialResult], Aggregate]:
        family = load_family(cfg)
        params = DistinguishParams(
            family=family, n=cfg.n, p=cfg.p, gamma=cfg.gamma, threshold_policy=cfg.threshold_policy,
            budget=_budget(cfg),
            calibration_trials=cfg.calibration_trials or settings.CALIBRATION_TRIALS,
            calibration_k=cfg.calibration_k if cfg.calibration_k is not None else settings.CALIBRATION_K,
            calibration_seed=RngSeed(master=cfg.seed, labels=("calibration",)),
        )
        threshold = params.threshold()
        logger.info(f"Distinguish experiment: {cfg.trials} trials, threshold {threshold:.6g}")
        rows = _map_trials(distinguish_trial, [(cfg, family, threshold, t) for t in range(cfg.trials)], workers)
        return rows, aggregate("accuracy", rows, lambda r: bool(r.correct))

    @staticmethod
    def run_boost_experiment(cfg: ExperimentConfig, workers: int = 1) -> Tuple[List[TrialResult], Aggregate]:
        logger.info(f"Boost experiment: {cfg.trials} trials, theta={cfg.theta} epsilon={cfg.epsilon}")
        rows = _map_trials(boost_trial, [(cfg, t) for t in range(cfg.trials)], workers)
        return rows, aggregate("exact_recovery", rows, lambda r: bool(r.exact))

    @staticmethod
    def run_recovery_experiment(cfg: ExperimentConfig, workers: int = 1) -> Tuple[List[TrialResult], Aggregate]:
        family = load_family(cfg)
        logger.info(f"Recovery experiment: {cfg.trials} trials with {len(family)} members")
        rows = _map_trials(recovery_trial, [(cfg, family, t) for t in range(cfg.trials)], workers)
        return rows, aggregate("exact_recovery", rows, lambda r: bool(r.exact))

    @staticmethod
    def run_family_experiment(cfg: ExperimentConfig, workers: int = 1) -> Tuple[List[TrialResult], Aggregate]:
        logger.info(f"Family experiment: {cfg.trials} builds of {cfg.family_spec.kind} v={cfg.family_spec.v}")
        rows = _map_trials(family_trial, [(cfg, t) for t in range(cfg.trials)], workers)
        return rows, aggregate("complete", rows, lambda r: bool(r.exact))

    @staticmethod
    def load_config(path: str) -> ExperimentConfig:
        if not Path(path).is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            return ExperimentConfig.model_validate_json(read_text(path))
        except ValidationError as e:
            raise ConfigError(str(e)) from e

    @staticmethod
    def dumps_csv(rows: Sequence[TrialResult]) -> str:
        columns = list(TrialResult.model_fields)
        buffer = io.StringIO(newline="")
        buffer.write(f"# {SCHEMA_VERSION}\n")
        writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            data = row.model_dump(mode="json")
            writer.writerow({k: "" if data[k] is None else data[k] for k in columns})
        return buffer.getvalue()

    @staticmethod
    def execute(
        cfg: ExperimentConfig,
        out: Optional[str] = None,
        manifest_path: Optional[str] = None,
        workers: Optional[int] = None,
    ) -> BenchResponse:
        """Run the configured experiment and write its outputs; raises ConfigError before any trial runs."""
        workers = settings.WORKERS if workers is None else workers
        started = datetime.now(timezone.utc).isoformat() if settings.RECORD_WALL_CLOCK else None
        runners = {
            "distinguish": BenchController.run_distinguish_experiment,
            "boost": BenchController.run_boost_experiment,
            "recover": BenchController.run_recovery_experiment,
            "family": BenchController.run_family_experiment,
        }
        rows, agg = runners[cfg.kind](cfg, workers)
        config_json = cfg.model_dump(mode="json", by_alias=True)
        manifest = RunManifest(
            config_hash=sha256_hex(canonical_json(config_json)),
            code_version=settings.VERSION,
            config=config_json,
            started=started,
            finished=datetime.now(timezone.utc).isoformat() if settings.RECORD_WALL_CLOCK else None,
            aggregate=agg,
            rows=len(rows),
        )
        out = out or cfg.out
        if out:
            write_text(out, BenchController.dumps_csv(rows))
            logger.info(f"✅ {len(rows)} rows written to {out}")
        if manifest_path:
            write_text(manifest_path, pretty_json(manifest.model_dump(mode="json")))
        logger.info(f"{agg.metric}: {agg.successes}/{agg.completed} (errors {agg.errors})")
        return BenchResponse(manifest=manifest, results=list(rows))

    @staticmethod
    def run(
        cfg: ExperimentConfig,
        out: Optional[str] = None,
        manifest_path: Optional[str] = None,
        workers: Optional[int] = None,
    ) -> Dict:
        try:
            response = BenchController.execute(cfg, out, manifest_path, workers)
            partial = any(r.status in ("partial", "timeout") for r in response.results)
            return {"status": "partial" if partial else "success", "data": response}
        except ConfigError as e:
            logger.error(f"Config error: {str(e)}")
            return {"status": "error", "kind": "config", "message": str(e)}
        except Exception as e:
            logger.error(f"Error running bench: {str(e)}")
            return {"status": "error", "kind": "internal", "message": f"Bench run failed: {str(e)}"}
