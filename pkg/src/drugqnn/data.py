"""Dataset ingestion, target normalization, and deterministic splits.

CSV schemas (UTF-8, comma-separated, ``\\n`` line endings, no quoting):

* ``cell_lines.csv`` — header ``cell_line_id,b0,...,b734``; one row per cell
  line, bits 0/1.
* ``drugs.csv`` — header ``drug_id,smiles``.
* ``responses.csv`` — header ``drug_id,cell_line_id,ic50``; ic50 strictly
  positive (or already in (0,1) when loading with ``normalized=True``).

Shuffling uses a self-contained splitmix64 stream plus Fisher-Yates so splits
and epoch orders are reproducible bit-for-bit across platforms and runs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import DataError
from .smiles import MolGraph, parse_smiles

CELL_VECTOR_LENGTH = 735

# splitmix64 constants (Steele, Lea & Flood's standard mixing parameters)
_SM64_GAMMA = 0x9E3779B97F4A7C15
_SM64_MIX1 = 0xBF58476D1CE4E5B9
_SM64_MIX2 = 0x94D049BB133111EB
_MASK64 = (1 << 64) - 1


class SplitMix64:
    """64-bit splitmix PRNG; tiny, portable, and stable across platforms."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_uint64(self) -> int:
        self.state = (self.state + _SM64_GAMMA) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _SM64_MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _SM64_MIX2) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform-enough integer in [0, bound); modulo bias is negligible at
        dataset scales and keeps the sequence trivially portable."""
        return self.next_uint64() % bound

    def unit(self) -> float:
        """Float in [0, 1) with 53 random bits."""
        return (self.next_uint64() >> 11) / float(1 << 53)


def fisher_yates(n: int, stream: SplitMix64) -> np.ndarray:
    """Seeded Fisher-Yates permutation of range(n)."""
    order = np.arange(n, dtype=np.int64)
    for i in range(n - 1, 0, -1):
        j = stream.below(i + 1)
        order[i], order[j] = order[j], order[i]
    return order


def epoch_permutation(n: int, epoch: int, seed: int) -> np.ndarray:
    """Deterministic permutation of range(n) keyed by (seed, epoch)."""
    stream = SplitMix64((seed ^ ((epoch + 1) * _SM64_GAMMA)) & _MASK64)
    return fisher_yates(n, stream)


def normalize_ic50(y: float) -> float:
    """Squash a positive IC50 value into (0, 1) via 1 / (1 + y^0.1).

    Strictly decreasing in y: small IC50 (a potent drug) maps near 1.
    """
    if not y > 0:
        raise DataError(f"IC50 must be positive, got {y}")
    return 1.0 / (1.0 + y ** 0.1)


@dataclass
class CellLineVector:
    cell_line_id: str
    bits: np.ndarray  # (CELL_VECTOR_LENGTH,) of 0/1


@dataclass
class DrugRecord:
    drug_id: str
    smiles: str
    graph: MolGraph


@dataclass
class ResponseRecord:
    drug_id: str
    cell_line_id: str
    raw_ic50: float
    target: float


@dataclass
class Dataset:
    cell_lines: dict[str, CellLineVector]
    drugs: dict[str, DrugRecord]
    responses: list[ResponseRecord]

    @property
    def n_pairs(self) -> int:
        return len(self.responses)

    def pair(self, index: int) -> tuple[MolGraph, np.ndarray, float]:
        record = self.responses[index]
        return (
            self.drugs[record.drug_id].graph,
            self.cell_lines[record.cell_line_id].bits,
            record.target,
        )


@dataclass
class Split:
    train: np.ndarray
    test: np.ndarray
    seed: int


def _read_rows(path):
    with open(path, newline="", encoding="utf-8") as handle:
        yield from enumerate(csv.reader(handle), start=1)


def load_dataset(cell_lines_path, drugs_path, responses_path,
                 normalized: bool = False) -> Dataset:
    """Load and cross-validate the three CSV files.

    Every response's drug and cell-line id must resolve; SMILES are parsed
    eagerly so a bad drug fails at load time with its file and line.
    """
    expected_header = ["cell_line_id"] + [f"b{i}" for i in range(CELL_VECTOR_LENGTH)]
    cell_lines: dict[str, CellLineVector] = {}
    for line_no, row in _read_rows(cell_lines_path):
        if line_no == 1:
            if row != expected_header:
                raise DataError(
                    f"bad cell-line header: expected cell_line_id,b0,...,b{CELL_VECTOR_LENGTH - 1}",
                    cell_lines_path, line_no)
            continue
        if len(row) != CELL_VECTOR_LENGTH + 1:
            raise DataError(
                f"cell line row has {len(row) - 1} bits, expected {CELL_VECTOR_LENGTH}",
                cell_lines_path, line_no)
        cell_id = row[0]
        if cell_id in cell_lines:
            raise DataError(f"duplicate cell_line_id {cell_id!r}", cell_lines_path, line_no)
        try:
            bits = np.array([int(v) for v in row[1:]], dtype=np.float64)
        except ValueError:
            raise DataError(f"non-integer bit in cell line {cell_id!r}",
                            cell_lines_path, line_no) from None
        if not np.isin(bits, (0.0, 1.0)).all():
            raise DataError(f"cell line {cell_id!r} has bits outside {{0,1}}",
                            cell_lines_path, line_no)
        cell_lines[cell_id] = CellLineVector(cell_id, bits)

    drugs: dict[str, DrugRecord] = {}
    for line_no, row in _read_rows(drugs_path):
        if line_no == 1:
            if row != ["drug_id", "smiles"]:
                raise DataError("bad drug header: expected drug_id,smiles",
                                drugs_path, line_no)
            continue
        if len(row) != 2:
            raise DataError(f"drug row has {len(row)} fields, expected 2",
                            drugs_path, line_no)
        drug_id, smiles_string = row
        if drug_id in drugs:
            raise DataError(f"duplicate drug_id {drug_id!r}", drugs_path, line_no)
        try:
            graph = parse_smiles(smiles_string)
        except Exception as exc:
            raise DataError(f"drug {drug_id!r} has unparseable SMILES: {exc}",
                            drugs_path, line_no) from exc
        drugs[drug_id] = DrugRecord(drug_id, smiles_string, graph)

    responses: list[ResponseRecord] = []
    for line_no, row in _read_rows(responses_path):
        if line_no == 1:
            if row != ["drug_id", "cell_line_id", "ic50"]:
                raise DataError("bad response header: expected drug_id,cell_line_id,ic50",
                                responses_path, line_no)
            continue
        if len(row) != 3:
            raise DataError(f"response row has {len(row)} fields, expected 3",
                            responses_path, line_no)
        drug_id, cell_id, raw = row
        if drug_id not in drugs:
            raise DataError(f"response references unknown drug_id {drug_id!r}",
                            responses_path, line_no)
        if cell_id not in cell_lines:
            raise DataError(f"response references unknown cell_line_id {cell_id!r}",
                            responses_path, line_no)
        try:
            value = float(raw)
        except ValueError:
            raise DataError(f"non-numeric ic50 {raw!r}", responses_path, line_no) from None
        if not math.isfinite(value):
            raise DataError(f"non-finite ic50 {raw!r}", responses_path, line_no)
        if normalized:
            if not 0.0 < value < 1.0:
                raise DataError(
                    f"normalized target must lie in (0,1), got {value}",
                    responses_path, line_no)
            record = ResponseRecord(drug_id, cell_id, value, value)
        else:
            if value <= 0:
                raise DataError(
                    f"ic50 must be positive for drug {drug_id!r} / cell {cell_id!r}, got {value}",
                    responses_path, line_no)
            record = ResponseRecord(drug_id, cell_id, value, normalize_ic50(value))
        responses.append(record)

    return Dataset(cell_lines=cell_lines, drugs=drugs, responses=responses)


def make_split(n_records: int, train_size: int, test_size: int, seed: int) -> Split:
    """Shuffle record indices once (Fisher-Yates) and take prefix partitions."""
    if train_size < 1 or test_size < 1:
        raise ValueError("train and test sizes must be positive")
    if train_size + test_size > n_records:
        raise ValueError(
            f"requested {train_size}+{test_size} records but dataset has {n_records}")
    order = fisher_yates(n_records, SplitMix64(seed))
    return Split(
        train=order[:train_size].copy(),
        test=order[train_size:train_size + test_size].copy(),
        seed=seed,
    )


def epoch_order(split: Split, epoch: int, seed: int) -> np.ndarray:
    """Training-record order for one epoch; the test order never changes."""
    return split.train[epoch_permutation(len(split.train), epoch, seed)]


def save_split(split: Split, path):
    """Plain-text, platform-independent split serialization."""
    lines = [
        "# drugqnn split v1",
        f"seed: {split.seed}",
        "train: " + " ".join(str(i) for i in split.train),
        "test: " + " ".join(str(i) for i in split.test),
        "",
    ]
    Path(path).write_bytes("\n".join(lines).encode("ascii"))


def load_split(path) -> Split:
    text = Path(path).read_text(encoding="ascii").splitlines()
    if not text or text[0] != "# drugqnn split v1":
        raise DataError("not a drugqnn split file", path, 1)
    fields = {}
    for line in text[1:]:
        if not line:
            continue
        key, _, value = line.partition(":")
        fields[key.strip()] = value.strip()
    try:
        return Split(
            train=np.array([int(v) for v in fields["train"].split()], dtype=np.int64),
            test=np.array([int(v) for v in fields["test"].split()], dtype=np.int64),
            seed=int(fields["seed"]),
        )
    except (KeyError, ValueError) as exc:
        raise DataError(f"malformed split file: {exc}", path) from exc


# --- synthetic data -------------------------------------------------------

# Small pool of valid subset SMILES used by the synthetic generator.
SMILES_POOL = (
    "CCO",
    "CC(=O)O",
    "c1ccccc1",
    "CC(=O)OC1=CC=CC=C1C(=O)O",
    "CN1C=NC2=C1C(=O)N(C(=O)N2C)C",
    "CC(C)Cc1ccc(cc1)C(C)C(=O)O",
    "CC(=O)Nc1ccc(O)cc1",
    "CN1CCCC1c1ccncc1",
    "C1CCCCC1",
    "c1ccc2ccccc2c1",
    "CCN(CC)CC",
    "OCC1OC(O)C(O)C(O)C1O",
    "Clc1ccccc1",
    "CC(C)NCC(O)c1ccc(O)c(O)c1",
    "O=C(O)c1ccccc1O",
    "N#Cc1ccccc1",
    "CCOC(=O)c1ccccc1",
    "Brc1ccc(Br)cc1",
    "CSc1ccccc1",
    "OC(=O)C1CCCCC1",
)


def _planted_target(bits: np.ndarray, graph: MolGraph) -> float:
    """Smooth function of the pair, kept well inside (0, 1)."""
    density = float(bits.mean())
    size_term = math.cos(graph.n_atoms / 7.0)
    wave = math.sin(2.0 * math.pi * density)
    return 0.5 + 0.18 * wave + 0.17 * size_term


def synthetic_tables(n_drugs: int, n_cell_lines: int, seed: int,
                     n_pairs: int | None = None):
    """Deterministic synthetic rows for the three CSV schemas.

    Returns (cell_rows, drug_rows, response_rows) where each list starts with
    its header row.  Raw IC50 values invert the normalization of the planted
    smooth target, so loading + normalizing recovers the target.
    """
    if n_drugs < 1 or n_drugs > len(SMILES_POOL):
        raise ValueError(f"n_drugs must be in [1, {len(SMILES_POOL)}]")
    if n_cell_lines < 1:
        raise ValueError("n_cell_lines must be positive")
    stream = SplitMix64(seed)

    drug_rows = [["drug_id", "smiles"]]
    graphs = []
    for d in range(n_drugs):
        smiles_string = SMILES_POOL[d]
        drug_rows.append([f"D{d:03d}", smiles_string])
        graphs.append(parse_smiles(smiles_string))

    cell_rows = [["cell_line_id"] + [f"b{i}" for i in range(CELL_VECTOR_LENGTH)]]
    bit_vectors = []
    for c in range(n_cell_lines):
        bits = np.array([stream.below(2) for _ in range(CELL_VECTOR_LENGTH)],
                        dtype=np.float64)
        bit_vectors.append(bits)
        cell_rows.append([f"CL{c:03d}"] + [str(int(b)) for b in bits])

    all_pairs = [(d, c) for d in range(n_drugs) for c in range(n_cell_lines)]
    if n_pairs is not None:
        if n_pairs > len(all_pairs):
            raise ValueError(
                f"n_pairs {n_pairs} exceeds {len(all_pairs)} available combinations")
        order = fisher_yates(len(all_pairs), stream)
        all_pairs = [all_pairs[i] for i in order[:n_pairs]]

    response_rows = [["drug_id", "cell_line_id", "ic50"]]
    for d, c in all_pairs:
        target = _planted_target(bit_vectors[c], graphs[d])
        raw = (1.0 / target - 1.0) ** 10.0
        response_rows.append([f"D{d:03d}", f"CL{c:03d}", repr(raw)])
    return cell_rows, drug_rows, response_rows


def write_synthetic_csvs(out_dir, n_drugs: int, n_cell_lines: int, seed: int,
                         n_pairs: int | None = None) -> dict[str, Path]:
    """Write the synthetic tables to out_dir; returns the three paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cell_rows, drug_rows, response_rows = synthetic_tables(
        n_drugs, n_cell_lines, seed, n_pairs)
    paths = {}
    for name, rows in (("cell_lines", cell_rows), ("drugs", drug_rows),
                       ("responses", response_rows)):
        path = out_dir / f"{name}.csv"
        path.write_bytes(
            ("\n".join(",".join(row) for row in rows) + "\n").encode("utf-8"))
        paths[name] = path
    return paths


def bundled_overfit_dataset() -> Dataset:
    """The fixed 32-pair synthetic dataset (8 drugs x 4 cell lines, seed 7)
    used by the convergence checks.  Goes through the real CSV ingest path."""
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        paths = write_synthetic_csvs(tmp, n_drugs=8, n_cell_lines=4, seed=7)
        return load_dataset(paths["cell_lines"], paths["drugs"], paths["responses"])
