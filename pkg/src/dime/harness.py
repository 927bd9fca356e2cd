"""Multi-run campaign driver: oracle, budgeted runs, metrics, reports.

A campaign runs the uninstrumented and fully instrumented oracles once, then
K budgeted runs that share a persisted redundancy log.  Per run it reports:

1. coverage - unique records extracted in runs 1..k over the oracle's unique
   record set;
2. false-positive ratio - permitted candidates that overlapped already
   analyzed addresses, over all permitted candidates this run;
3. false-negative ratio - rejected candidates containing never-analyzed
   addresses, over all rejected candidates this run;
4. slow-down - run virtual time over native virtual time;
5. overshoot histogram - magnitude -> count of budget overshoots.

Ground truth for 2-3 is the referee's view: every address covered by a
committed log entry in any run so far, updated live while the run executes.
"""

from __future__ import annotations

import json
import os
from collections import Counter
from dataclasses import dataclass, replace

from . import redundancy
from .budget import BudgetState
from .executor import ConfigError, ExecutionOutcome, RunConfig, native_run, run
from .redundancy import LogEntry, LogStore, STRATEGIES
from .tools import make_tool

FP = "FP"
FN = "FN"
TRUE_PERMIT = "true-permit"
TRUE_REJECT = "true-reject"


class GroundTruth:
    """Addresses ever analyzed in the campaign (union of committed intervals)."""

    def __init__(self):
        self.analyzed: set[tuple[str, int]] = set()

    def add_entry(self, entry: LogEntry) -> None:
        self.analyzed.update((entry.image, a)
                             for a in range(entry.rel_addr, entry.rel_addr + entry.length))

    def overlap(self, entry: LogEntry) -> bool:
        return any((entry.image, a) in self.analyzed
                   for a in range(entry.rel_addr, entry.rel_addr + entry.length))

    def contains_all(self, entry: LogEntry) -> bool:
        return all((entry.image, a) in self.analyzed
                   for a in range(entry.rel_addr, entry.rel_addr + entry.length))


def classify(permitted: bool, candidate: LogEntry, ground_truth: GroundTruth) -> str:
    """Score one permit decision against what has really been analyzed."""
    if permitted:
        return FP if ground_truth.overlap(candidate) else TRUE_PERMIT
    return FN if not ground_truth.contains_all(candidate) else TRUE_REJECT


class MetricsObserver:
    """Classifies permit decisions live and grows the ground truth on commits."""

    def __init__(self, ground_truth: GroundTruth):
        self.ground_truth = ground_truth
        self.counts = Counter()
        self.decisions: list[tuple[LogEntry, bool, str]] = []

    def on_permit(self, candidate: LogEntry, permitted: bool) -> None:
        verdict = classify(permitted, candidate, self.ground_truth)
        self.counts[verdict] += 1
        self.decisions.append((candidate, permitted, verdict))

    def on_commit(self, entry: LogEntry) -> None:
        self.ground_truth.add_entry(entry)

    @property
    def permitted(self) -> int:
        return self.counts[FP] + self.counts[TRUE_PERMIT]

    @property
    def rejected(self) -> int:
        return self.counts[FN] + self.counts[TRUE_REJECT]

    def fp_ratio(self) -> float:
        return self.counts[FP] / self.permitted if self.permitted else 0.0

    def fn_ratio(self) -> float:
        return self.counts[FN] / self.rejected if self.rejected else 0.0


@dataclass(frozen=True)
class OracleResult:
    record_stream: tuple
    unique_records: frozenset
    native_time: float
    full_instrumentation_time: float


def run_oracle(config: RunConfig, seed: int | None = None) -> OracleResult:
    """Native and fully instrumented reference executions.

    Uses the campaign's run-1 seed so the guest path matches run 1 exactly.
    """
    seed = config.seed + 1 if seed is None else seed
    native = native_run(config.program, seed, config.max_steps)
    full = replace(config, period=float("inf"), budget=float("inf"),
                   log_strategy="none", capture_path=False)
    tool = make_tool(config.tool)
    outcome = run(full, LogStore("none"), BudgetState.unlimited(), tool, rng_seed=seed)
    return OracleResult(
        record_stream=outcome.tool_output,
        unique_records=frozenset(outcome.tool_output),
        native_time=native.virtual_time,
        full_instrumentation_time=outcome.virtual_time,
    )


@dataclass(frozen=True)
class RunReport:
    run_index: int
    coverage: float
    coverage_vacuous: bool
    fp_ratio: float
    fn_ratio: float
    slowdown: float
    overshoot_histogram: dict
    unique_records: int  # cumulative unique records through this run
    virtual_time: float
    permitted: int
    rejected: int
    fp_count: int
    fn_count: int

    def as_dict(self) -> dict:
        return {
            "run_index": self.run_index,
            "coverage": self.coverage,
            "coverage_vacuous": self.coverage_vacuous,
            "fp_ratio": self.fp_ratio,
            "fn_ratio": self.fn_ratio,
            "slowdown": self.slowdown,
            "overshoot_histogram": {str(k): v for k, v in self.overshoot_histogram.items()},
            "unique_records": self.unique_records,
            "virtual_time": _num(self.virtual_time),
            "permitted": self.permitted,
            "rejected": self.rejected,
            "fp_count": self.fp_count,
            "fn_count": self.fn_count,
        }


@dataclass(frozen=True)
class CampaignResult:
    reports: tuple
    oracle: OracleResult
    outcomes: tuple  # per-run ExecutionOutcome
    config_echo: dict


def _num(v):
    if v == float("inf"):
        return "inf"
    return v


def _config_echo(config: RunConfig, runs: int) -> dict:
    return {
        "program": config.program_path,
        "granularity": config.granularity,
        "period": _num(config.period),
        "budget": _num(config.budget),
        "analysis_cost": config.analysis_cost,
        "check_cost": config.check_cost,
        "compile_cost": config.compile_cost,
        "max_trace_len": config.max_trace_len,
        "max_steps": config.max_steps,
        "seed": config.seed,
        "log_strategy": config.log_strategy,
        "log_file": str(config.log_path) if config.log_path is not None else None,
        "tool": config.tool,
        "runs": runs,
    }


def single_run(config: RunConfig, resume: bool = False,
               ground_truth: GroundTruth | None = None,
               run_index: int = 1) -> tuple[RunReport, ExecutionOutcome, LogStore]:
    """One budgeted run against the persisted log; used by `dime run`.

    Without a shared GroundTruth, FP/FN are scored against this run's own
    commits only; the campaign driver supplies the cross-run referee state.
    """
    strategy = config.log_strategy
    if strategy not in STRATEGIES:
        raise ConfigError(f"unknown log strategy {strategy!r}")
    if strategy != "none":
        if config.log_path is None:
            raise ConfigError("log strategy requires a log file path")
        if os.path.exists(config.log_path):
            log = redundancy.load(config.log_path)
            if log.strategy != strategy:
                raise ConfigError(
                    f"log file {config.log_path} holds strategy {log.strategy!r}, "
                    f"expected {strategy!r}")
        elif resume:
            raise ConfigError(f"--resume given but log file {config.log_path} is missing")
        else:
            log = LogStore(strategy)
    else:
        log = LogStore("none")

    oracle = run_oracle(config)
    gt = ground_truth if ground_truth is not None else GroundTruth()
    observer = MetricsObserver(gt)
    budget = config.make_budget()
    tool = make_tool(config.tool)
    outcome = run(config, log, budget, tool,
                  rng_seed=config.seed + run_index, observer=observer)
    if strategy != "none":
        log.finalize_and_save(config.log_path)
    report = _make_report(run_index, frozenset(outcome.tool_output), oracle,
                          outcome, observer)
    return report, outcome, log


def _make_report(run_index: int, cumulative: frozenset, oracle: OracleResult,
                 outcome: ExecutionOutcome, observer: MetricsObserver) -> RunReport:
    vacuous = not oracle.unique_records
    coverage = 1.0 if vacuous else len(cumulative) / len(oracle.unique_records)
    histogram = dict(sorted(Counter(outcome.overshoots).items()))
    return RunReport(
        run_index=run_index,
        coverage=coverage,
        coverage_vacuous=vacuous,
        fp_ratio=observer.fp_ratio(),
        fn_ratio=observer.fn_ratio(),
        slowdown=outcome.virtual_time / oracle.native_time,
        overshoot_histogram=histogram,
        unique_records=len(cumulative),
        virtual_time=outcome.virtual_time,
        permitted=observer.permitted,
        rejected=observer.rejected,
        fp_count=observer.counts[FP],
        fn_count=observer.counts[FN],
    )


def run_campaign(config: RunConfig, runs: int) -> CampaignResult:
    """Oracle once, then `runs` budgeted runs sharing the persisted log.

    Run 1 starts with an empty log (any existing file is overwritten); run k
    uses seed = campaign seed + k, so nondeterministic branches vary across
    runs while the campaign as a whole replays exactly.
    """
    if runs < 1:
        raise ConfigError("a campaign needs at least one run")
    strategy = config.log_strategy
    if strategy not in STRATEGIES:
        raise ConfigError(f"unknown log strategy {strategy!r}")
    if strategy != "none" and config.log_path is None:
        raise ConfigError("log strategy requires a log file path")

    oracle = run_oracle(config)
    ground_truth = GroundTruth()
    cumulative: set = set()
    reports = []
    outcomes = []
    for k in range(1, runs + 1):
        if strategy == "none" or k == 1:
            log = LogStore(strategy)
        else:
            log = redundancy.load(config.log_path)
            if log.strategy != strategy:
                raise ConfigError(
                    f"log file {config.log_path} holds strategy {log.strategy!r}, "
                    f"expected {strategy!r}")
        observer = MetricsObserver(ground_truth)
        budget = config.make_budget()
        tool = make_tool(config.tool)
        outcome = run(config, log, budget, tool, rng_seed=config.seed + k,
                      observer=observer)
        if strategy != "none":
            log.finalize_and_save(config.log_path)
        cumulative |= set(outcome.tool_output)
        reports.append(_make_report(k, frozenset(cumulative), oracle, outcome, observer))
        outcomes.append(outcome)
    return CampaignResult(tuple(reports), oracle, tuple(outcomes),
                          _config_echo(config, runs))


def report_document(result: CampaignResult) -> dict:
    return {
        "format": "dime-report v1",
        "campaign": result.config_echo,
        "oracle": {
            "unique_records": len(result.oracle.unique_records),
            "native_time": _num(result.oracle.native_time),
            "full_instrumentation_time": _num(result.oracle.full_instrumentation_time),
        },
        "runs": [r.as_dict() for r in result.reports],
    }


def emit_report(result: CampaignResult, path) -> None:
    """Write the campaign report as byte-deterministic JSON."""
    text = json.dumps(report_document(result), indent=2, sort_keys=True) + "\n"
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)
