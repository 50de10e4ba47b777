"""Pair protocols for morph generation and scenario manifests for evaluation.

A pair protocol says which two samples get morphed.  A scenario manifest
says who is enrolled (references), who shows up at the sensor (probes),
and which side of the comparison the morphs sit on.  Trials are the
exhaustive cross product the scoring stage consumes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .errors import FormatError

MORPHS_AS_REFERENCES = "MORPHS_AS_REFERENCES"
MORPHS_AS_PROBES = "MORPHS_AS_PROBES"

GENUINE = "GENUINE"
ZERO_EFFORT = "ZERO_EFFORT"
MORPH_ATTACK = "MORPH_ATTACK"

_PAIR_HEADER = ["subject_a", "sample_a", "subject_b", "sample_b"]
_MANIFEST_HEADER = ["role", "kind", "id", "subject", "contributor_a", "contributor_b", "path"]


@dataclass(frozen=True)
class PairRow:
    subject_a: str
    sample_a: str
    subject_b: str
    sample_b: str


@dataclass(frozen=True)
class PairProtocol:
    rows: tuple[PairRow, ...]

    def __post_init__(self):
        seen = set()
        for i, row in enumerate(self.rows):
            if row.subject_a == row.subject_b:
                raise FormatError(f"pair row {i}: subject {row.subject_a!r} paired with itself")
            key = (row.subject_a, row.sample_a, row.subject_b, row.sample_b)
            if key in seen:
                raise FormatError(f"pair row {i}: duplicate of an earlier row")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.rows)


def load_pair_protocol(path) -> PairProtocol:
    """Read a morph pair protocol CSV with header subject_a,sample_a,subject_b,sample_b."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise FormatError(f"empty protocol file: {path}") from None
            if header != _PAIR_HEADER:
                raise FormatError(
                    f"bad protocol header in {path}: expected {','.join(_PAIR_HEADER)}"
                )
            rows = []
            for i, rec in enumerate(reader):
                if not rec:
                    continue
                if len(rec) != 4 or not all(tok.strip() for tok in rec):
                    raise FormatError(f"protocol row {i}: expected 4 non-empty fields, got {rec!r}")
                rows.append(PairRow(*(tok.strip() for tok in rec)))
    except OSError as exc:
        raise FormatError(f"cannot read protocol file {path}: {exc}") from exc
    return PairProtocol(tuple(rows))


@dataclass(frozen=True)
class ReferenceModel:
    """One enrolled template: possibly several samples averaged together."""

    model_id: str
    kind: str  # bonafide | morph
    subject: str | None
    contributors: tuple[str, str] | None
    paths: tuple[str, ...]


@dataclass(frozen=True)
class Probe:
    probe_id: str
    kind: str
    subject: str | None
    contributors: tuple[str, str] | None
    path: str


@dataclass(frozen=True)
class ScenarioManifest:
    direction: str
    references: tuple[ReferenceModel, ...]
    probes: tuple[Probe, ...]


def _parse_manifest_row(i: int, rec: list[str]) -> tuple:
    if len(rec) != 7:
        raise FormatError(f"manifest row {i}: expected 7 fields, got {len(rec)}")
    role, kind, rid, subject, ca, cb, path = (tok.strip() for tok in rec)
    if role not in ("reference", "probe"):
        raise FormatError(f"manifest row {i}: role must be reference|probe, got {role!r}")
    if kind not in ("bonafide", "morph"):
        raise FormatError(f"manifest row {i}: kind must be bonafide|morph, got {kind!r}")
    if not rid or not path:
        raise FormatError(f"manifest row {i}: id and path must be non-empty")
    if kind == "bonafide":
        if not subject:
            raise FormatError(f"manifest row {i}: bona fide row needs a subject")
        if ca or cb:
            raise FormatError(f"manifest row {i}: bona fide row must leave contributors empty")
        return role, kind, rid, subject, None, path
    if subject:
        raise FormatError(f"manifest row {i}: morph row must leave subject empty")
    if not ca or not cb:
        raise FormatError(f"manifest row {i}: morph row needs two contributors")
    if ca == cb:
        raise FormatError(f"manifest row {i}: morph contributors must differ")
    return role, kind, rid, None, (ca, cb), path


def load_scenario_manifest(path, direction: str | None = None) -> ScenarioManifest:
    """Read a scenario manifest CSV.

    Header: role,kind,id,subject,contributor_a,contributor_b,path.  The
    scenario direction is inferred from which role carries the morph
    rows; pass direction explicitly only to assert it.
    """
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise FormatError(f"empty manifest file: {path}") from None
            if header != _MANIFEST_HEADER:
                raise FormatError(
                    f"bad manifest header in {path}: expected {','.join(_MANIFEST_HEADER)}"
                )
            rows = [
                _parse_manifest_row(i, rec)
                for i, rec in enumerate(reader)
                if rec and any(tok.strip() for tok in rec)
            ]
    except OSError as exc:
        raise FormatError(f"cannot read manifest file {path}: {exc}") from exc

    ref_rows = [r for r in rows if r[0] == "reference"]
    probe_rows = [r for r in rows if r[0] == "probe"]
    if not ref_rows or not probe_rows:
        raise FormatError(f"manifest {path} needs both reference and probe rows")

    # Group reference rows by model id: bona fide models may enroll
    # several samples, morphs are single images.
    groups: dict[str, list[tuple]] = {}
    for r in ref_rows:
        groups.setdefault(r[2], []).append(r)
    references = []
    for model_id, grp in groups.items():
        kinds = {g[1] for g in grp}
        subjects = {g[3] for g in grp}
        contribs = {g[4] for g in grp}
        if len(kinds) != 1 or len(subjects) != 1 or len(contribs) != 1:
            raise FormatError(f"reference {model_id!r}: inconsistent rows")
        if grp[0][1] == "morph" and len(grp) != 1:
            raise FormatError(f"morph reference {model_id!r} listed more than once")
        paths = tuple(g[5] for g in grp)
        if len(set(paths)) != len(paths):
            raise FormatError(f"reference {model_id!r}: duplicate sample path")
        references.append(
            ReferenceModel(model_id, grp[0][1], grp[0][3], grp[0][4], paths)
        )

    seen_probe = set()
    probes = []
    for r in probe_rows:
        if r[2] in seen_probe:
            raise FormatError(f"duplicate probe id {r[2]!r}")
        seen_probe.add(r[2])
        probes.append(Probe(r[2], r[1], r[3], r[4], r[5]))

    ref_has_morph = any(m.kind == "morph" for m in references)
    probe_has_morph = any(p.kind == "morph" for p in probes)
    if ref_has_morph and probe_has_morph:
        raise FormatError(f"manifest {path} has morphs on both sides; split into two scenarios")
    if not ref_has_morph and not probe_has_morph:
        # Morph-free manifests still support genuine/impostor trials,
        # but the direction cannot be inferred.
        if direction is None:
            raise FormatError(
                f"manifest {path} has no morph rows; pass the direction explicitly"
            )
        return ScenarioManifest(direction, tuple(references), tuple(probes))
    inferred = MORPHS_AS_REFERENCES if ref_has_morph else MORPHS_AS_PROBES
    if direction is not None and direction != inferred:
        raise FormatError(
            f"manifest {path} is {inferred}, not the requested {direction}"
        )
    return ScenarioManifest(inferred, tuple(references), tuple(probes))


@dataclass(frozen=True)
class Trial:
    """One verification comparison, with the sample paths scoring needs."""

    kind: str
    model_id: str
    probe_id: str
    model_paths: tuple[str, ...]
    probe_path: str
    morph_id: str | None = None
    target_subject: str | None = None

    def __post_init__(self):
        if self.kind not in (GENUINE, ZERO_EFFORT, MORPH_ATTACK):
            raise ValueError(f"unknown trial kind {self.kind!r}")
        if self.kind == MORPH_ATTACK and (self.morph_id is None or self.target_subject is None):
            raise ValueError("morph attack trials need morph_id and target_subject")


def enumerate_trials(manifest: ScenarioManifest) -> list[Trial]:
    """Expand a scenario into the exhaustive trial list.

    Genuine: every bona fide (model, probe) of the same subject.  Zero
    effort: every bona fide (model, probe) of different subjects.  Morph
    attack: every comparison between a morph and a bona fide sample of
    each of its two contributors, on the opposite side.  Output sorted
    by (model_id, probe_id).
    """
    bona_refs = [m for m in manifest.references if m.kind == "bonafide"]
    bona_probes = [p for p in manifest.probes if p.kind == "bonafide"]

    trials = []
    for model in bona_refs:
        for probe in bona_probes:
            kind = GENUINE if model.subject == probe.subject else ZERO_EFFORT
            trials.append(
                Trial(kind, model.model_id, probe.probe_id, model.paths, probe.path)
            )

    if manifest.direction == MORPHS_AS_REFERENCES:
        for model in manifest.references:
            if model.kind != "morph":
                continue
            for subject in model.contributors:
                victims = [p for p in bona_probes if p.subject == subject]
                if not victims:
                    raise FormatError(
                        f"morph {model.model_id!r}: contributor {subject!r} has no bona fide probes"
                    )
                for probe in victims:
                    trials.append(
                        Trial(
                            MORPH_ATTACK,
                            model.model_id,
                            probe.probe_id,
                            model.paths,
                            probe.path,
                            morph_id=model.model_id,
                            target_subject=subject,
                        )
                    )
    else:
        for probe in manifest.probes:
            if probe.kind != "morph":
                continue
            for subject in probe.contributors:
                victims = [m for m in bona_refs if m.subject == subject]
                if not victims:
                    raise FormatError(
                        f"morph {probe.probe_id!r}: contributor {subject!r} has no bona fide references"
                    )
                for model in victims:
                    trials.append(
                        Trial(
                            MORPH_ATTACK,
                            model.model_id,
                            probe.probe_id,
                            model.paths,
                            probe.path,
                            morph_id=probe.probe_id,
                            target_subject=subject,
                        )
                    )

    trials.sort(key=lambda t: (t.model_id, t.probe_id))
    return trials
