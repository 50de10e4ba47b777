"""Embedding ingestion and cosine scoring of verification trials.

Pretrained recognizers never link into this package: embeddings arrive
as CSV files or through the embed adapter, and everything downstream is
plain vector arithmetic.  Scores are cosine similarities (higher means
more alike) and acceptance everywhere is score >= threshold.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import AdapterError, FormatError
from .protocols import GENUINE, MORPH_ATTACK, ZERO_EFFORT

EMBEDDING_AGGREGATIONS = ("max", "mean")


@dataclass(frozen=True)
class EmbeddingRecord:
    """One sample's feature vector and the id of whoever it belongs to."""

    sample_id: str
    owner_id: str
    vector: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.vector, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError(f"embedding must be a non-empty 1-D vector, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"embedding for {self.sample_id!r} has non-finite values")
        if not arr.any():
            raise ValueError(f"embedding for {self.sample_id!r} is the zero vector")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "vector", arr)


def parse_embeddings(path) -> dict[str, EmbeddingRecord]:
    """Read an embedding CSV: header sample_id,owner_id,v0,...,v{d-1}."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise FormatError(f"empty embedding file: {path}") from None
            if (
                len(header) < 3
                or header[:2] != ["sample_id", "owner_id"]
                or header[2:] != [f"v{i}" for i in range(len(header) - 2)]
            ):
                raise FormatError(
                    f"bad embedding header in {path}: expected sample_id,owner_id,v0,..."
                )
            dim = len(header) - 2
            records: dict[str, EmbeddingRecord] = {}
            for i, rec in enumerate(reader):
                if not rec:
                    continue
                if len(rec) != dim + 2:
                    raise FormatError(
                        f"embedding row {i}: expected {dim + 2} fields, got {len(rec)}"
                    )
                sample_id, owner_id = rec[0].strip(), rec[1].strip()
                if not sample_id:
                    raise FormatError(f"embedding row {i}: empty sample_id")
                if sample_id in records:
                    raise FormatError(f"embedding row {i}: duplicate sample {sample_id!r}")
                try:
                    values = np.array([float(tok) for tok in rec[2:]], dtype=np.float64)
                except ValueError as exc:
                    raise FormatError(f"embedding row {i}: non-numeric value") from exc
                try:
                    records[sample_id] = EmbeddingRecord(sample_id, owner_id, values)
                except ValueError as exc:
                    raise FormatError(f"embedding row {i}: {exc}") from exc
    except OSError as exc:
        raise FormatError(f"cannot read embedding file {path}: {exc}") from exc
    if not records:
        raise FormatError(f"no embedding rows in {path}")
    return records


def reference_model(records) -> np.ndarray:
    """Componentwise mean of the enrollment samples' vectors."""
    vectors = [
        np.asarray(r.vector if isinstance(r, EmbeddingRecord) else r, dtype=np.float64)
        for r in records
    ]
    if not vectors:
        raise ValueError("reference model needs at least one enrollment sample")
    dims = {v.shape for v in vectors}
    if len(dims) != 1:
        raise ValueError(f"enrollment vectors disagree on dimension: {sorted(dims)}")
    out = vectors[0].copy()
    for v in vectors[1:]:
        out += v
    return out / len(vectors)


def cosine_score(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity dot(u,v) / (|u| |v|), clipped into [-1, 1]."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError(f"vector shapes differ: {u.shape} vs {v.shape}")
    norm_u = math.sqrt(float(np.dot(u, u)))
    norm_v = math.sqrt(float(np.dot(v, v)))
    if norm_u == 0.0 or norm_v == 0.0:
        raise ValueError("cosine of a zero vector is undefined")
    score = float(np.dot(u, v)) / (norm_u * norm_v)
    return min(1.0, max(-1.0, score))


def extract_embeddings_external(adapter, image_paths, owner_ids=None) -> list[EmbeddingRecord]:
    """Ask the embed adapter for one vector per image path, in order."""
    paths = [str(p) for p in image_paths]
    owners = list(owner_ids) if owner_ids is not None else [""] * len(paths)
    if len(owners) != len(paths):
        raise ValueError("one owner id per image path required")
    records = []
    dim = None
    for path, owner in zip(paths, owners):
        response = adapter.request({"op": "embed", "image": path})
        vector = response.get("vector")
        if not isinstance(vector, list):
            raise AdapterError(f"embed adapter returned no vector for {path}")
        try:
            record = EmbeddingRecord(path, owner, np.asarray(vector, dtype=np.float64))
        except ValueError as exc:
            raise AdapterError(f"invalid embedding for {path}: {exc}") from exc
        if dim is None:
            dim = record.vector.size
        elif record.vector.size != dim:
            raise AdapterError(
                f"embedding for {path} has dimension {record.vector.size}, expected {dim}"
            )
        records.append(record)
    return records


@dataclass(frozen=True)
class MorphGroup:
    """Aggregated scores of one morph against its two contributors."""

    morph_id: str
    subject_scores: tuple[tuple[str, float], tuple[str, float]]

    def __post_init__(self):
        if len(self.subject_scores) != 2:
            raise ValueError(f"morph {self.morph_id!r} needs exactly 2 subject scores")
        (sa, _), (sb, _) = self.subject_scores
        if sa == sb:
            raise ValueError(f"morph {self.morph_id!r} has duplicate subject {sa!r}")

    @property
    def min_score(self) -> float:
        return min(s for _, s in self.subject_scores)


@dataclass(frozen=True)
class ScoreSet:
    """All scores of one scenario direction, ready for metric evaluation."""

    genuine: tuple[float, ...]
    zero_effort: tuple[float, ...]
    morph_groups: tuple[MorphGroup, ...]
    # Per-trial rows (kind, model_id, probe_id, score) for score dumps.
    trial_scores: tuple[tuple[str, str, str, float], ...] = ()

    def __post_init__(self):
        for name, scores in (("genuine", self.genuine), ("zero_effort", self.zero_effort)):
            for s in scores:
                if not math.isfinite(s) or not -1.0 <= s <= 1.0:
                    raise ValueError(f"{name} score {s!r} outside [-1, 1]")
        for g in self.morph_groups:
            for _, s in g.subject_scores:
                if not math.isfinite(s) or not -1.0 <= s <= 1.0:
                    raise ValueError(f"morph score {s!r} outside [-1, 1]")


def score_trials(trials, embeddings: dict[str, EmbeddingRecord],
                 aggregation: str = "max") -> ScoreSet:
    """Score every trial and fold morph-attack trials into per-subject groups.

    A morph's score against one contributing subject aggregates that
    subject's sample scores with MAX by default (the subject's most
    favorable sample); "mean" is available for sensitivity checks.
    """
    if aggregation not in EMBEDDING_AGGREGATIONS:
        raise ValueError(f"aggregation must be one of {EMBEDDING_AGGREGATIONS}")

    def vector_of(sample_id: str) -> np.ndarray:
        record = embeddings.get(sample_id)
        if record is None:
            raise FormatError(f"no embedding for sample {sample_id!r}")
        return record.vector

    genuine: list[float] = []
    zero_effort: list[float] = []
    attack_scores: dict[tuple[str, str], list[float]] = {}
    attack_order: list[tuple[str, str]] = []
    rows: list[tuple[str, str, str, float]] = []

    for trial in trials:
        model_vec = reference_model([vector_of(p) for p in trial.model_paths])
        score = cosine_score(model_vec, vector_of(trial.probe_path))
        rows.append((trial.kind, trial.model_id, trial.probe_id, score))
        if trial.kind == GENUINE:
            genuine.append(score)
        elif trial.kind == ZERO_EFFORT:
            zero_effort.append(score)
        elif trial.kind == MORPH_ATTACK:
            key = (trial.morph_id, trial.target_subject)
            if key not in attack_scores:
                attack_scores[key] = []
                attack_order.append(key)
            attack_scores[key].append(score)
        else:
            raise ValueError(f"unknown trial kind {trial.kind!r}")

    grouped: dict[str, list[tuple[str, float]]] = {}
    for morph_id, subject in attack_order:
        scores = attack_scores[(morph_id, subject)]
        if aggregation == "max":
            agg = max(scores)
        else:
            agg = sum(scores) / len(scores)
        grouped.setdefault(morph_id, []).append((subject, agg))
    groups = []
    for morph_id, pairs in grouped.items():
        if len(pairs) != 2:
            raise FormatError(
                f"morph {morph_id!r} has {len(pairs)} contributing subjects, expected 2"
            )
        groups.append(MorphGroup(morph_id, (pairs[0], pairs[1])))

    return ScoreSet(
        genuine=tuple(genuine),
        zero_effort=tuple(zero_effort),
        morph_groups=tuple(groups),
        trial_scores=tuple(rows),
    )


def write_score_dump(scoreset: ScoreSet, path) -> None:
    """CSV dump of per-trial scores: kind,model_id,probe_id,score."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "model_id", "probe_id", "score"])
        for kind, model_id, probe_id, score in scoreset.trial_scores:
            writer.writerow([kind, model_id, probe_id, repr(score)])
