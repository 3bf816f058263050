"""Corpus loading, duplicate removal, mask binarization, and dataset splits.

Expected on-disk layout::

    <root>/images/*.png|jpg|jpeg   photographs
    <root>/labels/*.png            binary masks with matching filename stems
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np

from .errors import ConsistencyError, CorruptImageError
from .phash import compute_phash, hamming_distance

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")

EXACT_BYTES = "exact_bytes"
PHASH_WITHIN_THRESHOLD = "phash_within_threshold"


@dataclass
class ImageSample:
    """One corpus image plus the fingerprints used for duplicate detection."""

    id: str
    image_path: Path
    width: int
    height: int
    raw_byte_digest: str  # sha256 hex of the file bytes
    phash: int | None = None


@dataclass
class AnnotatedPair:
    """An image sample together with its binarized wound mask."""

    sample: ImageSample
    mask: np.ndarray  # 2-D uint8 array with values in {0, 1}

    def __post_init__(self):
        if self.mask.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {self.mask.shape}")
        if self.mask.shape != (self.sample.height, self.sample.width):
            raise ValueError(
                f"mask shape {self.mask.shape} does not match image "
                f"{(self.sample.height, self.sample.width)} for id={self.sample.id}"
            )


@dataclass
class DuplicateGroup:
    """A maximal set of mutually duplicated samples (>= 2 members)."""

    members: list[str]
    reason: str  # EXACT_BYTES or PHASH_WITHIN_THRESHOLD


@dataclass
class RemovedSample:
    removed_id: str
    kept_id: str
    reason: str
    distance: int


@dataclass
class DedupReport:
    removed: list[RemovedSample] = field(default_factory=list)

    @property
    def pair_count(self) -> int:
        return len(self.removed)

    def to_text(self) -> str:
        lines = [
            f"{r.removed_id} <- {r.kept_id} {r.reason} {r.distance}"
            for r in self.removed
        ]
        return "\n".join(lines) + ("\n" if lines else "")


@dataclass
class SplitManifest:
    seed: int
    assignments: dict[str, str]  # sample id -> "train" | "val" | "test"
    counts: tuple[int, int, int]

    def ids_for(self, split: str) -> list[str]:
        return sorted(i for i, s in self.assignments.items() if s == split)


def binarize_mask(raw_mask: np.ndarray, threshold: int = 127) -> np.ndarray:
    """Map a grayscale annotation to {0, 1}: value > threshold becomes 1."""
    return (np.asarray(raw_mask) > threshold).astype(np.uint8)


def _read_image(path: Path) -> np.ndarray:
    data = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if data is None:
        raise CorruptImageError(path)
    return cv2.cvtColor(data, cv2.COLOR_BGR2RGB)


def load_sample(path: Path) -> ImageSample:
    """Load one image, computing its byte digest and perceptual hash."""
    raw = path.read_bytes()
    image = _read_image(path)
    h, w = image.shape[:2]
    return ImageSample(
        id=path.stem,
        image_path=path,
        width=w,
        height=h,
        raw_byte_digest=hashlib.sha256(raw).hexdigest(),
        phash=compute_phash(image),
    )


def load_corpus(root: Path | str, workers: int = 4) -> list[ImageSample]:
    """Load every image under <root>/images, hashing in parallel.

    Returns samples sorted by id. Duplicate stems across suffixes are
    rejected since the id must be unique within a corpus.
    """
    root = Path(root)
    image_dir = root / "images"
    paths = sorted(
        p for p in image_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES
    )
    if not paths:
        return []
    stems = [p.stem for p in paths]
    if len(set(stems)) != len(stems):
        dupes = sorted({s for s in stems if stems.count(s) > 1})
        raise ConsistencyError(f"duplicate sample ids in corpus: {dupes}")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        samples = list(pool.map(load_sample, paths))
    return sorted(samples, key=lambda s: s.id)


def load_annotated_pair(root: Path | str, sample: ImageSample) -> AnnotatedPair:
    """Read and binarize the label matching `sample`."""
    label_path = Path(root) / "labels" / f"{sample.id}.png"
    raw = cv2.imread(str(label_path), cv2.IMREAD_GRAYSCALE)
    if raw is None:
        raise CorruptImageError(label_path, "missing or unreadable label")
    return AnnotatedPair(sample=sample, mask=binarize_mask(raw))


def load_pair_arrays(root: Path | str, sample_id: str) -> tuple[np.ndarray, np.ndarray]:
    """Load (image, mask) training arrays for one id.

    Image comes back as float32 RGB in [0, 1], mask as uint8 {0, 1}.
    """
    root = Path(root)
    image_path = None
    for suffix in IMAGE_SUFFIXES:
        candidate = root / "images" / f"{sample_id}{suffix}"
        if candidate.exists():
            image_path = candidate
            break
    if image_path is None:
        raise CorruptImageError(root / "images" / sample_id, "image not found")
    image = _read_image(image_path).astype(np.float32) / 255.0
    label_path = root / "labels" / f"{sample_id}.png"
    raw = cv2.imread(str(label_path), cv2.IMREAD_GRAYSCALE)
    if raw is None:
        raise CorruptImageError(label_path, "missing or unreadable label")
    return image, binarize_mask(raw)


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def find_duplicates(
    corpus: list[ImageSample], max_distance: int = 11
) -> list[DuplicateGroup]:
    """Group duplicated samples by byte identity or perceptual-hash proximity.

    Pairs with identical raw bytes or hash Hamming distance <= max_distance
    are duplicates; pairs are closed transitively into disjoint groups. A
    group is tagged EXACT_BYTES only when every member shares one digest,
    otherwise PHASH_WITHIN_THRESHOLD. Groups are ordered by smallest member
    id, members sorted within each group.
    """
    missing = [s.id for s in corpus if s.phash is None]
    if missing:
        raise ConsistencyError(f"samples without phash: {missing}")

    ids = [s.id for s in corpus]
    uf = _UnionFind(ids)
    by_digest: dict[str, list[ImageSample]] = {}
    for s in corpus:
        by_digest.setdefault(s.raw_byte_digest, []).append(s)
    for members in by_digest.values():
        for other in members[1:]:
            uf.union(members[0].id, other.id)

    ordered = sorted(corpus, key=lambda s: s.id)
    for i, a in enumerate(ordered):
        for b in ordered[i + 1 :]:
            if hamming_distance(a.phash, b.phash) <= max_distance:
                uf.union(a.id, b.id)

    clusters: dict[str, list[ImageSample]] = {}
    for s in corpus:
        clusters.setdefault(uf.find(s.id), []).append(s)

    groups = []
    for members in clusters.values():
        if len(members) < 2:
            continue
        digests = {m.raw_byte_digest for m in members}
        reason = EXACT_BYTES if len(digests) == 1 else PHASH_WITHIN_THRESHOLD
        groups.append(
            DuplicateGroup(members=sorted(m.id for m in members), reason=reason)
        )
    return sorted(groups, key=lambda g: g.members[0])


def deduplicate(
    corpus: list[ImageSample], groups: list[DuplicateGroup]
) -> tuple[list[ImageSample], DedupReport]:
    """Drop all but the lexicographically smallest member of each group."""
    by_id = {s.id: s for s in corpus}
    seen: set[str] = set()
    report = DedupReport()
    removed_ids: set[str] = set()
    for group in sorted(groups, key=lambda g: min(g.members)):
        unknown = [m for m in group.members if m not in by_id]
        if unknown:
            raise ConsistencyError(f"group references unknown ids: {unknown}")
        overlap = seen.intersection(group.members)
        if overlap:
            raise ConsistencyError(f"groups are not disjoint: {sorted(overlap)}")
        seen.update(group.members)
        kept = min(group.members)
        for member in sorted(group.members):
            if member == kept:
                continue
            removed_ids.add(member)
            report.removed.append(
                RemovedSample(
                    removed_id=member,
                    kept_id=kept,
                    reason=group.reason,
                    distance=hamming_distance(
                        by_id[member].phash, by_id[kept].phash
                    ),
                )
            )
    retained = [s for s in corpus if s.id not in removed_ids]
    return retained, report


def make_splits(
    corpus: list[ImageSample],
    ratios: tuple[float, float, float] = (0.6, 0.2, 0.2),
    seed: int = 0,
) -> SplitManifest:
    """Randomly partition the corpus into train/val/test by the given ratios.

    Counts follow floor(r_train*N), floor(r_val*N), remainder-to-test.
    The shuffle is drawn from a generator seeded with `seed`, so equal
    seeds produce identical manifests.
    """
    n = len(corpus)
    if n < 3:
        raise ValueError(f"need at least 3 samples to populate all splits, got {n}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {ratios}")
    n_train = math.floor(ratios[0] * n + 1e-9)
    n_val = math.floor(ratios[1] * n + 1e-9)
    n_test = n - n_train - n_val

    ids = sorted(s.id for s in corpus)
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    shuffled = [ids[i] for i in order]

    assignments = {}
    for i, sample_id in enumerate(shuffled):
        if i < n_train:
            assignments[sample_id] = "train"
        elif i < n_train + n_val:
            assignments[sample_id] = "val"
        else:
            assignments[sample_id] = "test"
    return SplitManifest(seed=seed, assignments=assignments, counts=(n_train, n_val, n_test))


def write_split_manifest(manifest: SplitManifest, path: Path | str) -> None:
    """Write `id,split` CSV rows under a comment header carrying the seed."""
    lines = [f"# seed={manifest.seed}", "id,split"]
    lines += [f"{i},{manifest.assignments[i]}" for i in sorted(manifest.assignments)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_split_manifest(path: Path | str) -> SplitManifest:
    seed = 0
    assignments: dict[str, str] = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line.lstrip("# ").partition("=")
            if key == "seed":
                seed = int(value)
            continue
        if line == "id,split":
            continue
        sample_id, _, split = line.partition(",")
        if split not in ("train", "val", "test"):
            raise ValueError(f"bad split value in manifest: {line!r}")
        assignments[sample_id] = split
    counts = (
        sum(1 for s in assignments.values() if s == "train"),
        sum(1 for s in assignments.values() if s == "val"),
        sum(1 for s in assignments.values() if s == "test"),
    )
    return SplitManifest(seed=seed, assignments=assignments, counts=counts)
