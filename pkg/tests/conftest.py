"""Shared fixtures: hand-checked toy problems and the seeded small-instance recipe."""

import itertools
import random

import numpy as np
import pytest

from calib import GenerateSpec, Problem, ThresholdConfig, check_feasible, compute_loss, generate


def toy_two_by_two() -> Problem:
    """Two classifiers, two positives, three negatives; optimum loss 2.

    Worked by hand: classifier 0 has candidates (7.0, 3.5, 1.25) conceding
    (0, 1, 2) negatives, classifier 1 has (4.2, 2.75, -0.25) conceding
    (0, 1, 2). No single-negative pair covers both positives.
    """
    return Problem(
        positive_scores=np.array([[5.0, 1.5], [0.5, 3.0]]),
        negative_scores=np.array([[6.0, 2.0, 1.0], [2.5, -1.0, 3.2]]),
    )


def toy_free_cover() -> Problem:
    """Both positives sit above every negative; loss 0 at the root config."""
    return Problem(
        positive_scores=np.array([[5.0, 4.5], [3.0, 2.8]]),
        negative_scores=np.array([[4.0, 2.0, 1.0], [2.5, 1.0, -1.0]]),
    )


def small_spec(seed: int) -> GenerateSpec:
    """Seeded small-instance recipe used by the fuzz and oracle suites.

    E in [2,5], P in [2,7], N in [5,40]; sizes small enough that the oracle
    grid stays under a few thousand cells per instance.
    """
    rng = random.Random(seed)
    return GenerateSpec(
        seed=seed,
        num_classifiers=rng.randint(2, 5),
        num_positives=rng.randint(2, 7),
        num_negatives=rng.randint(5, 40),
        dimensions=rng.randint(3, 8),
        spread=rng.uniform(0.1, 0.4),
        noise=rng.uniform(0.05, 0.35),
        hardness_fraction=rng.choice([0.0, 0.25, 0.5]),
        hardness_scale=rng.uniform(0.55, 0.8),
    )


def small_problem(seed: int) -> Problem:
    train, _ = generate(small_spec(seed))
    return train


def dense_sweep_optimum(problem: Problem) -> int:
    """Brute-force optimum over thresholds at every distinct score +- epsilon.

    Independent reference for candidate-grid sufficiency: epsilon is a
    quarter of the smallest gap between distinct scores, so t - eps / t + eps
    probe both sides of every value without crossing a neighbor.
    """
    grids = []
    for j in range(problem.num_classifiers):
        vals = np.unique(
            np.concatenate([problem.positive_scores[j], problem.negative_scores[j]])
        )
        eps = 0.25 * np.diff(vals).min() if len(vals) > 1 else 0.5
        grids.append(sorted(set(np.concatenate([vals - eps, vals + eps]).tolist())))
    best = None
    for combo in itertools.product(*grids):
        cfg = ThresholdConfig(combo)
        if check_feasible(problem, cfg):
            loss = compute_loss(problem, cfg)
            if best is None or loss < best:
                best = loss
    assert best is not None, "lowest corner of the sweep must be feasible"
    return best


@pytest.fixture
def toy():
    return toy_two_by_two()


@pytest.fixture
def toy_free():
    return toy_free_cover()
