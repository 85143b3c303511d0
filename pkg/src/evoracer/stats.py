"""Statistical machinery and run reporting.

Friedman rank test (with tie correction) drives race elimination; the
win-rate report uses an exact two-sided sign test by default (Wilcoxon
signed-rank available via a flag).  Error-rate and token-cost reports are
computed from run transcripts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import stats as sps


class DegenerateMatrix(Exception):
    pass


@dataclass
class FriedmanResult:
    statistic: float
    p_value: float
    mean_ranks: list[float]


def _rank_row(row: np.ndarray) -> np.ndarray:
    return sps.rankdata(row, method="average")


def friedman(matrix: Sequence[Sequence[float]]) -> FriedmanResult:
    """Friedman test over a blocks x treatments cost matrix.

    statistic = 12 / (n k (k+1)) * sum(R_j^2) - 3 n (k+1), divided by the
    standard tie-correction factor; p from chi-square with k-1 df.
    An all-constant matrix yields statistic 0, p 1 (no elimination signal).
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2:
        raise ValueError("matrix must be 2-dimensional")
    n, k = m.shape
    if k < 2:
        raise ValueError("need at least 2 treatments")
    if n < 2:
        raise ValueError("need at least 2 blocks")
    if not np.isfinite(m).all():
        raise ValueError("matrix entries must be finite")

    ranks = np.vstack([_rank_row(row) for row in m])
    rank_sums = ranks.sum(axis=0)
    mean_ranks = (rank_sums / n).tolist()

    stat = 12.0 / (n * k * (k + 1)) * float((rank_sums ** 2).sum()) - 3.0 * n * (k + 1)

    # tie correction: 1 - sum_i sum_groups (t^3 - t) / (n k (k^2 - 1))
    tie_sum = 0.0
    for row in m:
        _, counts = np.unique(row, return_counts=True)
        tie_sum += float(((counts ** 3) - counts).sum())
    correction = 1.0 - tie_sum / (n * k * (k * k - 1))
    if correction <= 0.0:
        # every block fully tied: no signal at all
        return FriedmanResult(0.0, 1.0, mean_ranks)
    stat /= correction
    stat = max(stat, 0.0)
    p = float(sps.chi2.sf(stat, k - 1))
    return FriedmanResult(stat, p, mean_ranks)


def frace_critical_difference(ranks: np.ndarray, statistic: float, alpha: float) -> float:
    """F-Race post-hoc threshold on rank-sum differences vs the best.

    Returns the minimum rank-sum difference deemed significant; 0.0 means
    complete separation (any positive difference is significant)."""
    n, k = ranks.shape
    if (n - 1) * (k - 1) <= 0:
        return math.inf
    rank_sq = float((ranks ** 2).sum())
    spread = rank_sq - n * k * (k + 1) ** 2 / 4.0
    denom_scale = 2.0 * n * (1.0 - statistic / (n * (k - 1)))
    if spread <= 0:
        return math.inf
    if denom_scale <= 1e-12:
        return 0.0
    t_crit = float(sps.t.ppf(1.0 - alpha / 2.0, (n - 1) * (k - 1)))
    return t_crit * math.sqrt(denom_scale * spread / ((n - 1) * (k - 1)))


@dataclass
class WinRateResult:
    rate_percent: float
    p_value: float
    stars: str
    wins: int
    losses: int
    ties: int


def _stars(p: float) -> str:
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


def sign_test_two_sided(wins: int, losses: int) -> float:
    n = wins + losses
    if n == 0:
        return 1.0
    x = min(wins, losses)
    tail = float(sps.binom.cdf(x, n, 0.5))
    return min(1.0, 2.0 * tail)


def win_rate(variant_costs: Sequence[float], baseline_costs: Sequence[float],
             test: str = "sign") -> WinRateResult:
    """Paired per-instance comparison: rate of strict wins for the variant,
    with a two-sided significance test on the paired differences."""
    v = np.asarray(variant_costs, dtype=float)
    b = np.asarray(baseline_costs, dtype=float)
    if v.shape != b.shape or v.ndim != 1:
        raise ValueError("paired cost vectors must have identical length")
    wins = int((v < b).sum())
    losses = int((v > b).sum())
    ties = int((v == b).sum())
    rate = 100.0 * wins / len(v) if len(v) else 0.0

    if test == "sign":
        p = sign_test_two_sided(wins, losses)
    elif test == "wilcoxon":
        diffs = v - b
        nonzero = diffs[diffs != 0]
        p = 1.0 if len(nonzero) == 0 else float(sps.wilcoxon(nonzero).pvalue)
    else:
        raise ValueError(f"unknown test {test!r}")
    return WinRateResult(rate, p, _stars(p), wins, losses, ties)


# ---------------------------------------------------------------------------
# Transcript-based reports
# ---------------------------------------------------------------------------

def _truncate2(x: float) -> float:
    return math.floor(x * 100.0) / 100.0


@dataclass
class ErrorRateRow:
    run: str
    compile_errors: int
    iterations: int
    variants: int

    @property
    def error_rate_percent(self) -> float:
        if self.variants == 0:
            return 0.0
        return _truncate2(100.0 * self.compile_errors / self.variants)


@dataclass
class ErrorRateReport:
    rows: list[ErrorRateRow] = field(default_factory=list)

    @property
    def total_errors(self) -> int:
        return sum(r.compile_errors for r in self.rows)

    @property
    def total_iterations(self) -> int:
        return sum(r.iterations for r in self.rows)

    @property
    def total_variants(self) -> int:
        return sum(r.variants for r in self.rows)

    @property
    def total_error_rate_percent(self) -> float:
        # The totals row is displayed rounded (per-run rows truncate); this
        # matches the conventional presentation of such tables.
        if self.total_variants == 0:
            return 0.0
        return round(100.0 * self.total_errors / self.total_variants, 2)

    def as_table(self) -> str:
        lines = ["run  errors  iterations  variants  error_rate_%"]
        for r in self.rows:
            lines.append(f"{r.run:<4} {r.compile_errors:>6} {r.iterations:>11} "
                         f"{r.variants:>9} {r.error_rate_percent:>13.2f}")
        lines.append(f"{'all':<4} {self.total_errors:>6} {self.total_iterations:>11} "
                     f"{self.total_variants:>9} {self.total_error_rate_percent:>13.2f}")
        return "\n".join(lines)

    def as_json(self) -> dict:
        return {
            "rows": [
                {"run": r.run, "compile_errors": r.compile_errors,
                 "iterations": r.iterations, "variants": r.variants,
                 "error_rate_percent": r.error_rate_percent}
                for r in self.rows
            ],
            "totals": {
                "compile_errors": self.total_errors,
                "iterations": self.total_iterations,
                "variants": self.total_variants,
                "error_rate_percent": self.total_error_rate_percent,
            },
        }


def error_rate_report(run_logs: dict[str, Iterable[dict]]) -> ErrorRateReport:
    """Build the per-run compile-error table from transcript events.

    A variant counts as a compile error when at least one of its compile
    attempts failed.  ``run_logs`` maps run label -> iterable of events.
    """
    report = ErrorRateReport()
    for run, events in run_logs.items():
        iterations: set[int] = set()
        variants: set[str] = set()
        errored: set[str] = set()
        for ev in events:
            kind = ev.get("event")
            if kind == "variant":
                variants.add(ev["variant_id"])
                if "iteration" in ev:
                    iterations.add(ev["iteration"])
            elif kind == "compile_attempt":
                if not ev.get("ok", False):
                    errored.add(ev["variant_id"])
            elif kind == "iteration_end":
                iterations.add(ev["iteration"])
        report.rows.append(ErrorRateRow(
            run=run,
            compile_errors=len(errored & variants) if variants else len(errored),
            iterations=len(iterations),
            variants=len(variants),
        ))
    return report


@dataclass
class CostReport:
    total_prompt_tokens: int = 0
    total_completion_tokens: int = 0
    total_price: float = 0.0
    per_model: dict[str, dict] = field(default_factory=dict)

    @property
    def total_tokens(self) -> int:
        return self.total_prompt_tokens + self.total_completion_tokens

    def as_json(self) -> dict:
        return {
            "total_prompt_tokens": self.total_prompt_tokens,
            "total_completion_tokens": self.total_completion_tokens,
            "total_tokens": self.total_tokens,
            "total_price": self.total_price,
            "per_model": self.per_model,
        }


def cost_report(transcripts: Iterable[dict],
                price_table: Optional[dict[str, tuple[float, float]]] = None) -> CostReport:
    """Aggregate token counts and monetary cost from prompt events.

    ``price_table`` maps model name -> (prompt, completion) price per 1M
    tokens.  Models absent from the table (e.g. the mock provider) cost 0.
    """
    price_table = price_table or {}
    report = CostReport()
    for ev in transcripts:
        if ev.get("event") != "prompt":
            continue
        model = ev.get("model", "mock")
        pt = int(ev.get("prompt_tokens", 0))
        ct = int(ev.get("completion_tokens", 0))
        p_price, c_price = price_table.get(model, (0.0, 0.0))
        price = pt * p_price / 1e6 + ct * c_price / 1e6
        report.total_prompt_tokens += pt
        report.total_completion_tokens += ct
        report.total_price += price
        entry = report.per_model.setdefault(
            model, {"prompt_tokens": 0, "completion_tokens": 0, "price": 0.0})
        entry["prompt_tokens"] += pt
        entry["completion_tokens"] += ct
        entry["price"] += price
    return report
