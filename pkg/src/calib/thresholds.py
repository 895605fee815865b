"""Candidate threshold extraction and per-positive difficulty.

Only finitely many thresholds per classifier can matter: the loss changes
only when a threshold crosses a negative's score, and the constraints only
when it crosses a positive's score.  It is enough to consider one threshold
in each gap directly below a positive whose next-lower distinct score
belongs to a negative, plus a floor below the bottom-most positive, plus a
sentinel above everything when the top score belongs to a negative.  Each
candidate is placed at the midpoint of the two adjacent distinct values
(offset 1.0 beyond the extremes), which keeps comparisons exact and the
whole set at most P + 1 per classifier.

Samples with exactly equal scores are inseparable: a positive tied with a
negative forces that negative's coverage, because a threshold must lie
strictly below the positive's score.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problem import Problem


@dataclass(frozen=True)
class ClassifierCandidates:
    """Descending candidate thresholds for one classifier.

    ``newly_covered_negatives[a]`` holds the negative indices with score in
    the half-open interval (thresholds[a], thresholds[a-1]] (everything
    above thresholds[0] for a = 0, which is always empty).  ``cumulative_fp``
    is the running total: the false positives this classifier alone produces
    at each candidate.
    """

    thresholds: tuple[float, ...]
    newly_covered_negatives: tuple[frozenset[int], ...]
    cumulative_fp: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.thresholds)

    @property
    def tightest(self) -> float:
        return self.thresholds[0]

    @property
    def lowest(self) -> float:
        return self.thresholds[-1]


@dataclass(frozen=True)
class CandidateThresholdSet:
    """Candidate thresholds for every classifier of a problem."""

    per_classifier: tuple[ClassifierCandidates, ...]

    def __getitem__(self, j: int) -> ClassifierCandidates:
        return self.per_classifier[j]

    def __len__(self) -> int:
        return len(self.per_classifier)

    def root_config(self) -> tuple[float, ...]:
        """The all-tightest configuration (zero false positives)."""
        return tuple(c.tightest for c in self.per_classifier)

    def lowest_config(self) -> tuple[float, ...]:
        """The all-lowest configuration, feasible by construction."""
        return tuple(c.lowest for c in self.per_classifier)


def _extract_one(pos: np.ndarray, neg: np.ndarray) -> ClassifierCandidates:
    # Distinct score values ascending, flagged by which side contributes.
    distinct, inverse = np.unique(np.concatenate([pos, neg]), return_inverse=True)
    has_pos = np.zeros(len(distinct), dtype=bool)
    has_neg = np.zeros(len(distinct), dtype=bool)
    has_pos[inverse[: pos.shape[0]]] = True
    has_neg[inverse[pos.shape[0]:]] = True

    thresholds: list[float] = []
    top = len(distinct) - 1
    if has_neg[top]:
        # Top group contains a negative: a sentinel disabling the classifier
        # is the only zero-cost candidate.
        thresholds.append(float(distinct[top]) + 1.0)
    for g in range(top, -1, -1):
        if not has_pos[g]:
            continue
        if g == 0:
            thresholds.append(float(distinct[0]) - 1.0)
        elif has_neg[g - 1]:
            thresholds.append(float(distinct[g] + distinct[g - 1]) / 2.0)

    # Negatives newly conceded in each half-open interval between candidates:
    # in descending score order they form consecutive slices.
    desc = np.argsort(-neg, kind="stable")
    neg_sorted = np.sort(neg)
    above = len(neg) - np.searchsorted(neg_sorted, np.array(thresholds), side="right")
    newly: list[frozenset[int]] = []
    prev = 0
    for count in above:
        newly.append(frozenset(int(n) for n in desc[prev:count]))
        prev = int(count)
    return ClassifierCandidates(
        thresholds=tuple(thresholds),
        newly_covered_negatives=tuple(newly),
        cumulative_fp=tuple(int(c) for c in above),
    )


def extract_candidates(problem: Problem) -> CandidateThresholdSet:
    """Per-classifier candidate thresholds sufficient for global optimality."""
    per = tuple(
        _extract_one(problem.positive_scores[j], problem.negative_scores[j])
        for j in range(problem.num_classifiers)
    )
    return CandidateThresholdSet(per_classifier=per)


def delta(problem: Problem, classifier: int, positive: int) -> int:
    """False positives classifier ``classifier`` must concede to cover ``positive``.

    Counts negatives scoring >= the positive's score: a tied negative is
    necessarily covered whenever the positive is, because the threshold has
    to sit strictly below the positive's score.
    """
    if not 0 <= classifier < problem.num_classifiers:
        raise IndexError(f"classifier {classifier} out of range")
    if not 0 <= positive < problem.num_positives:
        raise IndexError(f"positive {positive} out of range")
    s = problem.positive_scores[classifier, positive]
    return int(np.count_nonzero(problem.negative_scores[classifier] >= s))


@dataclass(frozen=True)
class DifficultyOrder:
    """Positives sorted by decreasing difficulty (ties: ascending index).

    ``difficulty[i]`` is min over classifiers of the false positives needed
    to cover positive i; placing hard positives at the top of the tree lets
    pruning by bound discard larger subtrees.
    """

    order: tuple[int, ...]
    difficulty: tuple[int, ...]


def difficulty_order(problem: Problem) -> DifficultyOrder:
    pos = problem.positive_scores  # (E, P)
    neg = problem.negative_scores  # (E, N)
    n = problem.num_negatives
    # delta for every (classifier, positive) pair: negatives scoring >= the
    # positive, counted against each classifier's sorted negative scores.
    counts = np.empty(pos.shape, dtype=np.int64)
    for j in range(problem.num_classifiers):
        neg_sorted = np.sort(neg[j])
        counts[j] = n - np.searchsorted(neg_sorted, pos[j], side="left")
    diff = counts.min(axis=0)
    order = sorted(range(problem.num_positives), key=lambda i: (-diff[i], i))
    return DifficultyOrder(order=tuple(order), difficulty=tuple(int(d) for d in diff))


def tighten_to_cover(
    candidates: ClassifierCandidates, current: float, positive_score: float
) -> float:
    """Lowest adjustment of one threshold so the given positive is covered.

    Returns the largest candidate strictly below ``positive_score`` if it is
    lower than ``current``, else ``current`` unchanged (the constraint is
    already satisfied).  Such a candidate always exists because the lowest
    candidate sits below every positive's score.
    """
    if current < positive_score:
        return current
    for t in candidates.thresholds:
        if t < positive_score:
            return t
    raise AssertionError(
        "no candidate below a positive score; candidate extraction is broken"
    )
