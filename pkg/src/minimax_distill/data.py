"""Dataset and repository ingestion.

Datasets are line-delimited JSON records with ``text`` and ``label``
fields and an optional ``id``. Label values may be integer class indices
or string names; names resolve against a sidecar ``<file>.labels`` (one
name per line) or, failing that, the sorted set of names seen in the file.

Embeddings travel in a small binary format: magic ``EMB1``, u32 row
count, u32 dim, then row-major float32 little-endian. Files without the
magic are parsed as text, one space-separated row per line. Embedding row
i always belongs to sentence line i.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError
from .index import SentenceRepository

EMBEDDING_MAGIC = b"EMB1"


@dataclass(frozen=True)
class LabeledExample:
    """One classification example: stable id, raw text, class index."""

    id: int
    text: str
    label: int


@dataclass
class Dataset:
    """Train/dev/test splits plus the label vocabulary."""

    name: str
    train: list[LabeledExample] = field(default_factory=list)
    dev: list[LabeledExample] = field(default_factory=list)
    test: list[LabeledExample] = field(default_factory=list)
    label_names: list[str] = field(default_factory=list)

    @property
    def num_classes(self) -> int:
        return len(self.label_names)

    def validate(self) -> None:
        for split_name, split in (("train", self.train), ("dev", self.dev), ("test", self.test)):
            seen: set[int] = set()
            for ex in split:
                if ex.id in seen:
                    raise DataError(f"duplicate id {ex.id} in {split_name} split")
                seen.add(ex.id)
                if not ex.text:
                    raise DataError(f"empty text for id {ex.id} in {split_name} split")
                if not 0 <= ex.label < self.num_classes:
                    raise DataError(
                        f"label {ex.label} out of range for {self.num_classes} classes"
                        f" (id {ex.id}, {split_name})"
                    )


def _read_sidecar_labels(path: Path) -> list[str] | None:
    sidecar = path.with_name(path.name + ".labels")
    if not sidecar.exists():
        return None
    names = [line.strip() for line in sidecar.read_text(encoding="utf-8").splitlines()]
    return [n for n in names if n]


def _parse_split(path: Path, label_names: list[str] | None) -> tuple[list[dict], list[str] | None]:
    rows = []
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:{line_no}: malformed record: {exc}") from exc
        if not isinstance(record, dict) or "text" not in record or "label" not in record:
            raise DataError(f"{path}:{line_no}: record needs 'text' and 'label' fields")
        record["_line"] = line_no
        rows.append(record)
    return rows, label_names


def _resolve_labels(rows: list[dict], path: Path, label_names: list[str] | None) -> list[str]:
    if label_names is not None:
        return label_names
    raw = [r["label"] for r in rows]
    if all(isinstance(v, int) and not isinstance(v, bool) for v in raw):
        return [str(i) for i in range(max(raw, default=-1) + 1)]
    if all(isinstance(v, str) for v in raw):
        return sorted(set(raw))
    raise DataError(f"{path}: labels mix integers and strings")


def _build_examples(rows: list[dict], path: Path, label_names: list[str]) -> list[LabeledExample]:
    name_to_index = {n: i for i, n in enumerate(label_names)}
    examples = []
    next_id = 0
    explicit_ids = {r["id"] for r in rows if "id" in r}
    for record in rows:
        line_no = record["_line"]
        label = record["label"]
        if isinstance(label, str):
            if label not in name_to_index:
                raise DataError(f"{path}:{line_no}: unknown label {label!r}")
            label_idx = name_to_index[label]
        elif isinstance(label, int) and not isinstance(label, bool):
            if not 0 <= label < len(label_names):
                raise DataError(f"{path}:{line_no}: label index {label} out of range")
            label_idx = label
        else:
            raise DataError(f"{path}:{line_no}: label must be an int index or string name")
        if "id" in record:
            if not isinstance(record["id"], int) or record["id"] < 0:
                raise DataError(f"{path}:{line_no}: id must be a non-negative integer")
            example_id = record["id"]
        else:
            while next_id in explicit_ids:
                next_id += 1
            example_id = next_id
            next_id += 1
        text = record["text"]
        if not isinstance(text, str) or not text:
            raise DataError(f"{path}:{line_no}: text must be a non-empty string")
        examples.append(LabeledExample(id=example_id, text=text, label=label_idx))
    return examples


def load_split(path: str | Path, label_names: list[str] | None = None) -> tuple[list[LabeledExample], list[str]]:
    """Read one JSONL split; returns examples and the resolved label vocabulary."""
    p = Path(path)
    if not p.exists():
        raise DataError(f"dataset file not found: {p}")
    rows, label_names = _parse_split(p, label_names)
    names = _resolve_labels(rows, p, label_names or _read_sidecar_labels(p))
    return _build_examples(rows, p, names), names


def load_dataset(path: str | Path, name: str | None = None) -> Dataset:
    """Load a dataset from a split directory or a single train-only file.

    A directory must contain ``train.jsonl`` and may contain ``dev.jsonl``
    and ``test.jsonl``; a lone file becomes the train split.
    """
    p = Path(path)
    if not p.exists():
        raise DataError(f"dataset path not found: {p}")
    if p.is_dir():
        train_path = p / "train.jsonl"
        if not train_path.exists():
            raise DataError(f"no train.jsonl under {p}")
        label_names = _read_sidecar_labels(train_path)
        train, label_names = load_split(train_path, label_names)
        dev: list[LabeledExample] = []
        test: list[LabeledExample] = []
        if (p / "dev.jsonl").exists():
            dev, label_names = load_split(p / "dev.jsonl", label_names)
        if (p / "test.jsonl").exists():
            test, label_names = load_split(p / "test.jsonl", label_names)
        dataset = Dataset(
            name=name or p.name, train=train, dev=dev, test=test, label_names=label_names
        )
    else:
        train, label_names = load_split(p)
        dataset = Dataset(name=name or p.stem, train=train, label_names=label_names)
    dataset.validate()
    return dataset


def save_split(examples: list[LabeledExample], path: str | Path) -> None:
    """Write one split as JSONL with explicit ids."""
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(json.dumps({"id": ex.id, "text": ex.text, "label": ex.label}) + "\n")


def save_dataset(dataset: Dataset, directory: str | Path) -> None:
    """Write train/dev/test JSONL files plus the label sidecar."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    save_split(dataset.train, d / "train.jsonl")
    if dataset.dev:
        save_split(dataset.dev, d / "dev.jsonl")
    if dataset.test:
        save_split(dataset.test, d / "test.jsonl")
    (d / "train.jsonl.labels").write_text(
        "".join(f"{n}\n" for n in dataset.label_names), encoding="utf-8"
    )


def write_embeddings(matrix: np.ndarray, path: str | Path, binary: bool = True) -> None:
    """Write an embedding matrix in the binary format, or as text rows."""
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim != 2:
        raise DataError(f"embedding matrix must be 2-D, got shape {arr.shape}")
    if binary:
        with open(path, "wb") as fh:
            fh.write(EMBEDDING_MAGIC)
            fh.write(struct.pack("<II", arr.shape[0], arr.shape[1]))
            fh.write(arr.astype("<f4").tobytes())
    else:
        with open(path, "w", encoding="utf-8") as fh:
            for row in arr:
                fh.write(" ".join(repr(float(x)) for x in row) + "\n")


def read_embeddings(path: str | Path) -> np.ndarray:
    """Read an embedding matrix; binary when the magic matches, else text rows."""
    p = Path(path)
    if not p.exists():
        raise DataError(f"embedding file not found: {p}")
    raw = p.read_bytes()
    if raw[:4] == EMBEDDING_MAGIC:
        if len(raw) < 12:
            raise DataError(f"{p}: truncated embedding header")
        rows, dim = struct.unpack_from("<II", raw, 4)
        expected = 12 + 4 * rows * dim
        if len(raw) != expected:
            raise DataError(f"{p}: expected {expected} bytes for {rows}x{dim}, got {len(raw)}")
        data = np.frombuffer(raw, dtype="<f4", count=rows * dim, offset=12)
        return data.reshape(rows, dim).astype(np.float64)
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DataError(f"{p}: not a binary embedding file and not valid text") from exc
    rows_out = []
    width = None
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            values = [float(tok) for tok in line.split()]
        except ValueError as exc:
            raise DataError(f"{p}:{line_no}: unparsable embedding row") from exc
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise DataError(f"{p}:{line_no}: row width {len(values)} != {width}")
        rows_out.append(values)
    if not rows_out:
        raise DataError(f"{p}: no embedding rows found")
    return np.asarray(rows_out, dtype=np.float64)


def load_sentences(path: str | Path) -> list[str]:
    """Read one sentence per line, dropping blank lines."""
    p = Path(path)
    if not p.exists():
        raise DataError(f"sentence file not found: {p}")
    return [line for line in p.read_text(encoding="utf-8").splitlines() if line.strip()]


def load_repository(sentences_path: str | Path, embeddings_path: str | Path) -> SentenceRepository:
    """Load aligned sentences and embeddings; rows normalize on ingestion."""
    sentences = load_sentences(sentences_path)
    embeddings = read_embeddings(embeddings_path)
    if len(sentences) != embeddings.shape[0]:
        raise DataError(
            f"{len(sentences)} sentences but {embeddings.shape[0]} embedding rows"
        )
    return SentenceRepository(sentences=sentences, embeddings=embeddings)
