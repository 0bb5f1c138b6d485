"""Relevance judgments and effectiveness metrics: AP, P@k, NDCG@k, ERR@k.

Per-topic values are averaged over topics that have at least one relevant
document in the judgments; judged topics where the run scores zero still
count toward the mean, topics with no relevant document do not.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import GradeExceedsGmax, MalformedLine, MalformedRun

logger = logging.getLogger(__name__)


class Qrels:
    """Graded relevance judgments keyed by (topic, collection docid)."""

    def __init__(self):
        self._by_topic: dict[str, dict[str, int]] = {}

    def set(self, qid: str, docid: str, grade: int) -> None:
        self._by_topic.setdefault(qid, {})[docid] = grade

    def grade(self, qid: str, docid: str) -> int:
        return self._by_topic.get(qid, {}).get(docid, 0)

    def for_topic(self, qid: str) -> dict[str, int]:
        return dict(self._by_topic.get(qid, {}))

    def topics(self) -> list[str]:
        return sorted(self._by_topic)

    def max_grade(self) -> int:
        grades = [g for topic in self._by_topic.values() for g in topic.values()]
        return max(grades, default=0)

    def __contains__(self, qid: str) -> bool:
        return qid in self._by_topic

    def __len__(self) -> int:
        return sum(len(t) for t in self._by_topic.values())


def parse_qrels(source) -> Qrels:
    """Parse the 4-column judgment format: ``qid iteration docid grade``.

    Duplicate (qid, docid) pairs keep the last grade; negative grades
    (spam labels in some judgment files) are clamped to 0.  Both cases log
    a warning.
    """
    qrels = Qrels()
    for lineno, line in enumerate(source, start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 4:
            raise MalformedLine(f"expected 4 whitespace-separated columns, got {len(parts)}", lineno)
        qid, _iteration, docid, grade_text = parts
        try:
            grade = int(grade_text)
        except ValueError:
            raise MalformedLine(f"grade {grade_text!r} is not an integer", lineno) from None
        if grade < 0:
            logger.warning("line %d: clamping negative grade %d to 0", lineno, grade)
            grade = 0
        if docid in qrels._by_topic.get(qid, {}):
            logger.warning("line %d: duplicate judgment for (%s, %s); last wins", lineno, qid, docid)
        qrels.set(qid, docid, grade)
    return qrels


def average_precision(ranking: Sequence[str], qrels: Mapping[str, int], cutoff: int = 1000) -> float:
    """AP at ``cutoff``: mean precision at each relevant rank, over all relevant docs."""
    relevant = {d for d, g in qrels.items() if g >= 1}
    if not relevant:
        return 0.0
    hits = 0
    total = 0.0
    for rank, docid in enumerate(ranking[:cutoff], start=1):
        if docid in relevant:
            hits += 1
            total += hits / rank
    return total / len(relevant)


def precision_at_k(ranking: Sequence[str], qrels: Mapping[str, int], k: int) -> float:
    """Fraction of the first k slots holding a relevant doc (denominator always k)."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    hits = sum(1 for docid in ranking[:k] if qrels.get(docid, 0) >= 1)
    return hits / k


def _dcg(grades: Iterable[int]) -> float:
    return sum((2.0 ** g - 1.0) / math.log2(r + 1.0) for r, g in enumerate(grades, start=1))


def ndcg_at_k(ranking: Sequence[str], qrels: Mapping[str, int], k: int = 10) -> float:
    """Normalized discounted cumulative gain with the 2^g - 1 gain function."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    dcg = _dcg(qrels.get(docid, 0) for docid in ranking[:k])
    ideal = _dcg(sorted(qrels.values(), reverse=True)[:k])
    if ideal == 0.0:
        return 0.0
    return dcg / ideal


def err_at_k(ranking: Sequence[str], qrels: Mapping[str, int], k: int = 10,
             gmax: int | None = None) -> float:
    """Expected reciprocal rank with stopping probability (2^g - 1) / 2^gmax.

    ``gmax`` defaults to the largest grade in this topic's judgments; pass
    the judgment-file maximum for cross-topic comparability.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if gmax is None:
        gmax = max(qrels.values(), default=0)
    scale = 2.0 ** gmax
    err = 0.0
    continue_p = 1.0
    for rank, docid in enumerate(ranking[:k], start=1):
        grade = qrels.get(docid, 0)
        if grade > gmax:
            raise GradeExceedsGmax(f"grade {grade} for {docid!r} exceeds gmax {gmax}")
        stop = (2.0 ** grade - 1.0) / scale
        err += continue_p * stop / rank
        continue_p *= 1.0 - stop
    return err


@dataclass(frozen=True)
class MetricSpec:
    kind: str  # ap | p | ndcg | err
    cutoff: int

    @property
    def label(self) -> str:
        return f"{self.kind.upper()}@{self.cutoff}"


def parse_metric(text: str) -> MetricSpec:
    """Parse specs like ``ap``, ``ap@1000``, ``p@30``, ``ndcg@10``, ``err@10``."""
    name, _, cutoff_text = text.strip().lower().partition("@")
    defaults = {"ap": 1000, "p": 30, "ndcg": 10, "err": 10}
    if name not in defaults:
        raise ValueError(f"unknown metric {name!r} (expected ap, p, ndcg, or err)")
    cutoff = int(cutoff_text) if cutoff_text else defaults[name]
    if cutoff < 1:
        raise ValueError(f"metric cutoff must be >= 1, got {cutoff}")
    return MetricSpec(name, cutoff)


DEFAULT_METRICS = (
    MetricSpec("ap", 1000),
    MetricSpec("p", 30),
    MetricSpec("ndcg", 10),
    MetricSpec("err", 10),
)


def parse_run(source) -> dict[str, list[str]]:
    """Parse a 6-column run file into per-topic docid rankings.

    Lines must be grouped per topic with ranks counting 1, 2, ... within
    each topic.
    """
    run: dict[str, list[str]] = {}
    for lineno, line in enumerate(source, start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 6:
            raise MalformedLine(f"expected 6 columns, got {len(parts)}", lineno)
        qid, _q0, docid, rank_text, score_text, _tag = parts
        try:
            rank = int(rank_text)
            float(score_text)
        except ValueError:
            raise MalformedLine("rank or score is not numeric", lineno) from None
        ranking = run.setdefault(qid, [])
        if rank != len(ranking) + 1:
            raise MalformedRun(
                f"line {lineno}: rank {rank} for topic {qid}, expected {len(ranking) + 1}"
            )
        ranking.append(docid)
    return run


@dataclass
class MetricReport:
    """Per-topic metric values plus the mean over evaluated topics."""

    metrics: list[MetricSpec]
    per_topic: dict[str, dict[str, float]] = field(default_factory=dict)  # label -> qid -> value
    means: dict[str, float] = field(default_factory=dict)
    evaluated_topics: list[str] = field(default_factory=list)
    skipped_topics: list[str] = field(default_factory=list)

    def render_tsv(self) -> str:
        lines = []
        for spec in self.metrics:
            label = spec.label
            for qid in self.evaluated_topics:
                lines.append(f"{label}\t{qid}\t{self.per_topic[label][qid]:.6f}")
            lines.append(f"{label}\tall\t{self.means[label]:.6f}")
        return "\n".join(lines)

    def render_table(self) -> str:
        labels = [spec.label for spec in self.metrics]
        topic_width = max([len("topic")] + [len(q) for q in self.evaluated_topics])
        header = "  ".join(["topic".ljust(topic_width)] + [lbl.rjust(10) for lbl in labels])
        lines = [header]
        for qid in self.evaluated_topics:
            cells = [f"{self.per_topic[lbl][qid]:10.4f}" for lbl in labels]
            lines.append("  ".join([qid.ljust(topic_width)] + cells))
        cells = [f"{self.means[lbl]:10.4f}" for lbl in labels]
        lines.append("  ".join(["all".ljust(topic_width)] + cells))
        return "\n".join(lines)


def evaluate_run(run: Mapping[str, Sequence[str]], qrels: Qrels,
                 metrics: Sequence[MetricSpec] = DEFAULT_METRICS,
                 gmax: int | None = None) -> MetricReport:
    """Score a parsed run against judgments.

    Topics judged but absent from the run score 0 on every metric; run
    topics without judgments are skipped with a warning.  The mean covers
    topics that have at least one relevant document.
    """
    if gmax is None:
        gmax = qrels.max_grade()
    report = MetricReport(metrics=list(metrics))
    for qid in run:
        if qid not in qrels:
            logger.warning("topic %s present in run but not judged; skipped", qid)
            report.skipped_topics.append(qid)
    evaluated = [
        qid for qid in qrels.topics()
        if any(g >= 1 for g in qrels.for_topic(qid).values())
    ]
    report.evaluated_topics = evaluated
    for spec in report.metrics:
        values = {}
        for qid in evaluated:
            ranking = list(run.get(qid, ()))
            topic_qrels = qrels.for_topic(qid)
            if spec.kind == "ap":
                value = average_precision(ranking, topic_qrels, spec.cutoff)
            elif spec.kind == "p":
                value = precision_at_k(ranking, topic_qrels, spec.cutoff)
            elif spec.kind == "ndcg":
                value = ndcg_at_k(ranking, topic_qrels, spec.cutoff)
            else:
                value = err_at_k(ranking, topic_qrels, spec.cutoff, gmax)
            values[qid] = value
        report.per_topic[spec.label] = values
        report.means[spec.label] = sum(values.values()) / len(values) if values else 0.0
    return report
