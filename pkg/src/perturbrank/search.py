"""Randomized verification of the rank law and search for counterexamples.

Campaigns sweep a grid of (n, K) cells, sample admissible systems from the
generator families, and classify each instance exactly:

  match       rank M equals min(n-1, K)
  degenerate  some Psi_i h1 vanishes identically (the rank law is not
              asserted there; such instances are tallied, not judged)
  violation   a rank mismatch on a non-degenerate instance

Alongside the rank verdict, two monitored invariants are measured on
every instance and recorded as breaches when they fail — they never
affect the match/degenerate/violation partition or the campaign verdict:

  dissipativity    no numeric eigenvalue of M above tolerance.  This is
                   a theorem for the markov_generator family (the form
                   z -> (z, Sym(S G) z) with S = diag(h1*_m / h1_m)
                   pulls back to a Markov Dirichlet form, which is
                   nonpositive), but it is NOT similarity-invariant:
                   transformed instances can have mixed-sign h1 * h1*
                   weights and genuinely indefinite M.  Breaches from
                   that family are expected findings, captured in full.
  rank_agreement   the count of numerically nonzero eigenvalues equals
                   the exact rank; a breach here means the float
                   eigensolver disagrees with exact arithmetic.

Per-instance seeds are derived by hashing (campaign seed, n, K, index),
so the result set is a pure function of the configuration no matter how
work is scheduled across processes.  Violations and breaches are the
valuable output: each is serialized as a standalone instance file that
the analyze command can replay.  A clean sweep is evidence for the
expected structure, never proof.
"""

from __future__ import annotations

import hashlib
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .asymptotics import (
    DISSIPATIVITY_TOLERANCE,
    RANK_AGREEMENT_TOLERANCE,
    StructureReport,
    analyze_structure,
    build_M,
)
from .formats import FORMAT_VERSION, build_report, dumps, instance_to_dict
from .model import (
    FAMILIES,
    GeneratorConfig,
    SystemSpec,
    GenerationFailed,
    generate_instance,
    validate_system,
)

__all__ = [
    "BREACH_KINDS",
    "Breach",
    "CampaignConfig",
    "CellResult",
    "Classification",
    "RANGE_LIMITS",
    "SearchReport",
    "Violation",
    "classify_instance",
    "derive_instance_seed",
    "report_to_dict",
    "run_campaign",
]

RANGE_LIMITS = (2, 8)

MATCH = "match"
DEGENERATE = "degenerate"
VIOLATION = "violation"

BREACH_KINDS = ("dissipativity", "rank_agreement")


@dataclass(frozen=True)
class CampaignConfig:
    """Sweep description; the report is a pure function of this value."""

    n_range: tuple[int, int]
    K_range: tuple[int, int]
    samples_per_cell: int
    seed: int
    families: tuple[str, ...] = FAMILIES
    worker_count: int = 1

    def __post_init__(self):
        lo, hi = RANGE_LIMITS
        for name, (first, last) in (("n_range", self.n_range), ("K_range", self.K_range)):
            if not (lo <= first <= last <= hi):
                raise ValueError(
                    f"{name} must satisfy {lo} <= first <= last <= {hi}, "
                    f"got {(first, last)}"
                )
        if self.samples_per_cell < 1:
            raise ValueError("samples_per_cell must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if not self.families:
            raise ValueError("at least one generator family is required")
        unknown = set(self.families) - set(FAMILIES)
        if unknown:
            raise ValueError(f"unknown generator families: {sorted(unknown)}")
        if self.worker_count < 1:
            raise ValueError("worker_count must be at least 1")


@dataclass(frozen=True)
class Classification:
    """Rank-law outcome plus any monitored-invariant breaches.

    ``outcome`` depends only on exact degeneracy and the rank law; each
    entry of ``breaches`` is a JSON-ready detail dict with a ``kind``
    from BREACH_KINDS and the offending numbers.
    """

    outcome: str
    report: StructureReport
    breaches: tuple[dict, ...]


@dataclass(frozen=True)
class Violation:
    """One rank-law failure, carried in full so it can be replayed."""

    index: int
    instance_seed: int
    family: str
    instance: dict
    report: dict
    artifact: str | None


@dataclass(frozen=True)
class Breach:
    """One monitored-invariant failure, replayable like a violation."""

    kind: str
    index: int
    instance_seed: int
    family: str
    detail: dict
    instance: dict
    artifact: str | None


@dataclass(frozen=True)
class CellResult:
    n: int
    K: int
    samples: int
    matches: int
    degenerate: int
    violations: tuple[Violation, ...]
    breaches: tuple[Breach, ...]


@dataclass(frozen=True)
class SearchReport:
    config: CampaignConfig
    cells: tuple[CellResult, ...]
    runtime_seconds: float
    verdict: str


def derive_instance_seed(seed: int, n: int, k: int, index: int) -> int:
    """Stable 64-bit per-instance seed from the campaign coordinates."""
    digest = hashlib.blake2b(
        f"{seed}:{n}:{k}:{index}".encode("ascii"), digest_size=8
    ).digest()
    return int.from_bytes(digest, "big")


def classify_instance(s: SystemSpec) -> Classification:
    """Exact verdict for one admissible instance.

    Degeneracy means some Psi_i h1 = 0 identically (possible only when a
    transport diagonal is a multiple of the identity, given entrywise
    nonzero kernels); the rank law is not asserted there.  Otherwise the
    instance matches iff rank M = min(n - 1, K) exactly.

    Independently of that partition, two invariants are measured on every
    instance and returned as breach records when they fail: no numeric
    eigenvalue of M above the dissipativity tolerance, and agreement
    between the numerically nonzero eigenvalue count and the exact rank.
    Breaches never change the outcome.
    """
    sd = validate_system(s)
    ts = build_M(s, sd)
    report = analyze_structure(ts, s, sd)
    zero = (Fraction(0),) * s.n
    psi_degenerate = any(psi.matvec(sd.h1) == zero for psi in ts.Psi)

    scale = float(ts.M.max_abs())
    breaches: list[dict] = []
    if report.eigenvalues and report.eigenvalues[-1] > DISSIPATIVITY_TOLERANCE * scale:
        breaches.append(
            {
                "kind": "dissipativity",
                "max_eigenvalue": report.eigenvalues[-1],
                "scale": scale,
                "tolerance": DISSIPATIVITY_TOLERANCE,
            }
        )
    numeric_rank = sum(
        1 for ev in report.eigenvalues if abs(ev) > RANK_AGREEMENT_TOLERANCE * scale
    )
    if numeric_rank != report.rank_exact:
        breaches.append(
            {
                "kind": "rank_agreement",
                "numeric_rank": numeric_rank,
                "rank_exact": report.rank_exact,
                "scale": scale,
                "tolerance": RANK_AGREEMENT_TOLERANCE,
            }
        )

    if psi_degenerate:
        outcome = DEGENERATE
    elif report.rank_exact == report.predicted_rank:
        outcome = MATCH
    else:
        outcome = VIOLATION
    return Classification(outcome, report, tuple(breaches))


def _violation_name(n: int, k: int, index: int) -> str:
    return f"violation-n{n}-K{k}-index{index}.json"


def _breach_name(kind: str, n: int, k: int, index: int) -> str:
    return f"breach-{kind.replace('_', '-')}-n{n}-K{k}-index{index}.json"


def _write_artifact(artifact_dir: str | None, name: str, spec: SystemSpec) -> str | None:
    if artifact_dir is None:
        return None
    with open(os.path.join(artifact_dir, name), "w", encoding="utf-8") as fh:
        fh.write(dumps(instance_to_dict(spec)))
    return name


def _run_cell(
    cfg: CampaignConfig, n: int, k: int, artifact_dir: str | None
) -> CellResult:
    matches = 0
    degenerate = 0
    violations: list[Violation] = []
    breaches: list[Breach] = []
    for index in range(cfg.samples_per_cell):
        family = cfg.families[index % len(cfg.families)]
        instance_seed = derive_instance_seed(cfg.seed, n, k, index)
        gen = GeneratorConfig(n=n, K=k, seed=instance_seed, family=family)
        try:
            spec = generate_instance(gen)
        except GenerationFailed as exc:
            raise GenerationFailed(f"cell n={n}, K={k}, index={index}: {exc}") from exc
        verdict = classify_instance(spec)
        if verdict.outcome == MATCH:
            matches += 1
        elif verdict.outcome == DEGENERATE:
            degenerate += 1
        else:
            sd = validate_system(spec)
            ts = build_M(spec, sd)
            violations.append(
                Violation(
                    index=index,
                    instance_seed=instance_seed,
                    family=family,
                    instance=instance_to_dict(spec),
                    report=build_report(spec, sd, ts, verdict.report),
                    artifact=_write_artifact(
                        artifact_dir, _violation_name(n, k, index), spec
                    ),
                )
            )
        for detail in verdict.breaches:
            kind = detail["kind"]
            breaches.append(
                Breach(
                    kind=kind,
                    index=index,
                    instance_seed=instance_seed,
                    family=family,
                    detail={key: val for key, val in detail.items() if key != "kind"},
                    instance=instance_to_dict(spec),
                    artifact=_write_artifact(
                        artifact_dir, _breach_name(kind, n, k, index), spec
                    ),
                )
            )
    result = CellResult(
        n=n,
        K=k,
        samples=cfg.samples_per_cell,
        matches=matches,
        degenerate=degenerate,
        violations=tuple(violations),
        breaches=tuple(breaches),
    )
    assert result.matches + result.degenerate + len(result.violations) == result.samples
    return result


def _cell_task(args: tuple[CampaignConfig, int, int, str | None]) -> CellResult:
    return _run_cell(*args)


def run_campaign(cfg: CampaignConfig, artifact_dir: str | None = None) -> SearchReport:
    """Run the sweep; deterministic up to the runtime field.

    With worker_count > 1 cells are distributed across processes; the
    per-instance seed derivation makes the outcome identical to a serial
    run.  When artifact_dir is given, each violation is written there as
    a standalone instance file named violation-n{n}-K{k}-index{i}.json,
    and each invariant breach as breach-{kind}-n{n}-K{k}-index{i}.json.
    The verdict reflects the rank law alone.
    """
    if artifact_dir is not None:
        os.makedirs(artifact_dir, exist_ok=True)
    started = time.monotonic()
    coords = [
        (n, k)
        for n in range(cfg.n_range[0], cfg.n_range[1] + 1)
        for k in range(cfg.K_range[0], cfg.K_range[1] + 1)
    ]
    if cfg.worker_count > 1:
        tasks = [(cfg, n, k, artifact_dir) for n, k in coords]
        with ProcessPoolExecutor(max_workers=cfg.worker_count) as pool:
            cells = list(pool.map(_cell_task, tasks))
    else:
        cells = [_run_cell(cfg, n, k, artifact_dir) for n, k in coords]
    cells.sort(key=lambda c: (c.n, c.K))
    total_violations = sum(len(c.violations) for c in cells)
    verdict = "all_match" if total_violations == 0 else "violations_found"
    return SearchReport(
        config=cfg,
        cells=tuple(cells),
        runtime_seconds=time.monotonic() - started,
        verdict=verdict,
    )


def report_to_dict(report: SearchReport) -> dict:
    """JSON-ready campaign report; runtime_seconds is the only field not
    determined by the configuration."""
    cfg = report.config
    cells = []
    totals = {"samples": 0, "matches": 0, "degenerate": 0, "violations": 0}
    breach_totals = {kind: 0 for kind in BREACH_KINDS}
    for cell in report.cells:
        totals["samples"] += cell.samples
        totals["matches"] += cell.matches
        totals["degenerate"] += cell.degenerate
        totals["violations"] += len(cell.violations)
        for breach in cell.breaches:
            breach_totals[breach.kind] += 1
        cells.append(
            {
                "n": cell.n,
                "K": cell.K,
                "samples": cell.samples,
                "matches": cell.matches,
                "degenerate": cell.degenerate,
                "violations": [
                    {
                        "index": v.index,
                        "instance_seed": v.instance_seed,
                        "family": v.family,
                        "instance": v.instance,
                        "report": v.report,
                        "artifact": v.artifact,
                    }
                    for v in cell.violations
                ],
                "breaches": [
                    {
                        "kind": b.kind,
                        "index": b.index,
                        "instance_seed": b.instance_seed,
                        "family": b.family,
                        "detail": b.detail,
                        "instance": b.instance,
                        "artifact": b.artifact,
                    }
                    for b in cell.breaches
                ],
            }
        )
    return {
        "format_version": FORMAT_VERSION,
        "config": {
            "n_range": list(cfg.n_range),
            "K_range": list(cfg.K_range),
            "samples_per_cell": cfg.samples_per_cell,
            "seed": cfg.seed,
            "families": list(cfg.families),
            "worker_count": cfg.worker_count,
        },
        "cells": cells,
        "totals": totals,
        "breach_totals": breach_totals,
        "verdict": report.verdict,
        "evidence_note": (
            "a clean sweep is randomized evidence for the predicted rank "
            "structure, not a proof"
        ),
        "runtime_seconds": report.runtime_seconds,
    }
