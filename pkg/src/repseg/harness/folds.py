"""Cross-validation fold assignment, stratified by exercise.

The default split shuffles within each exercise stratum and deals
samples round-robin, so per-stratum fold sizes differ by at most one.
Subject-disjoint splitting is available as a flag; it keeps all samples
of a subject in one fold at the cost of exact stratification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TooFewSamples


@dataclass(frozen=True)
class FoldSplit:
    k: int
    assignments: dict[str, int]  # sample_id -> fold index

    def test_ids(self, fold: int) -> list[str]:
        return [sid for sid, f in self.assignments.items() if f == fold]

    def train_ids(self, fold: int) -> list[str]:
        return [sid for sid, f in self.assignments.items() if f != fold]


def make_folds(samples, k: int, seed: int = 0, subject_disjoint: bool = False) -> FoldSplit:
    """Assign each sample to one of k folds.

    samples: sequence of records with sample_id, exercise_id and (for the
    subject-disjoint mode) subject_id attributes.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if len(samples) < k:
        raise TooFewSamples(f"{len(samples)} samples cannot fill {k} folds")
    rng = np.random.default_rng(seed)
    assignments: dict[str, int] = {}
    if subject_disjoint:
        by_subject: dict[str, list[str]] = {}
        for s in samples:
            by_subject.setdefault(s.subject_id, []).append(s.sample_id)
        if len(by_subject) < k:
            raise TooFewSamples(f"{len(by_subject)} subjects cannot fill {k} disjoint folds")
        subjects = sorted(by_subject)
        rng.shuffle(subjects)
        # largest subjects first onto the currently smallest fold
        subjects.sort(key=lambda s: -len(by_subject[s]))
        fold_sizes = [0] * k
        for subj in subjects:
            fold = int(np.argmin(fold_sizes))
            for sid in by_subject[subj]:
                assignments[sid] = fold
            fold_sizes[fold] += len(by_subject[subj])
        return FoldSplit(k=k, assignments=assignments)
    by_exercise: dict[str, list[str]] = {}
    for s in samples:
        by_exercise.setdefault(s.exercise_id, []).append(s.sample_id)
    counter = 0
    for exercise in sorted(by_exercise):
        ids = sorted(by_exercise[exercise])
        rng.shuffle(ids)
        for sid in ids:
            assignments[sid] = counter % k
            counter += 1
    return FoldSplit(k=k, assignments=assignments)
