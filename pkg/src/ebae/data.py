"""Loading, validation, and min-max normalization of effort datasets.

A dataset is a CSV file (comma separator, ``.`` decimal, header row) plus a
schema sidecar that declares every header column on its own line::

    <column>=<role>,<kind>,<size_flag>

with role in {feature, effort, identifier, ignored}, kind in
{continuous, categorical}, and size_flag in {none, primary_size,
size_related}. Rows with a missing feature or effort value are dropped (and
counted); malformed values are errors. Raw feature values are kept untouched;
normalization produces a separate view used only for analogy retrieval.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

ROLES = ("feature", "effort", "identifier", "ignored")
KINDS = ("continuous", "categorical")
SIZE_FLAGS = ("none", "primary_size", "size_related")

# Cell contents (lower-cased, stripped) treated as a missing value.
MISSING = {"", "?", "na", "nan", "null"}


class DatasetError(ValueError):
    """A dataset or schema file violates the loading contract."""


@dataclass(frozen=True)
class ColumnSpec:
    """One schema line: how a CSV column is interpreted."""

    name: str
    role: str
    kind: str = "continuous"
    size_flag: str = "none"

    def __post_init__(self):
        if self.role not in ROLES:
            raise DatasetError(f"column {self.name!r}: unknown role {self.role!r}")
        if self.kind not in KINDS:
            raise DatasetError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.size_flag not in SIZE_FLAGS:
            raise DatasetError(f"column {self.name!r}: unknown size flag {self.size_flag!r}")
        if self.size_flag != "none" and (self.role != "feature" or self.kind != "continuous"):
            raise DatasetError(
                f"column {self.name!r}: size flags require a continuous feature column"
            )


@dataclass(frozen=True)
class Project:
    """One historical project: feature values (schema order) and its effort."""

    id: str
    features: tuple
    effort: float


class Dataset:
    """Immutable project collection with derived numeric views.

    ``feature_schema`` lists the role=feature columns in file order.
    Continuous feature values live in ``cont`` (float64, one column per
    continuous feature), categorical values in ``cat`` (strings). ``bounds``
    holds the per-continuous-feature (min, max) over all rows.
    """

    def __init__(self, name, columns, projects, dropped_rows=0, validate=True):
        self.name = name
        self.columns = tuple(columns)
        self.projects = tuple(projects)
        self.dropped_rows = dropped_rows
        self.feature_schema = tuple(c for c in self.columns if c.role == "feature")
        if not self.feature_schema:
            raise DatasetError("schema declares no feature columns")
        self.cont_index = tuple(i for i, c in enumerate(self.feature_schema) if c.kind == "continuous")
        self.cat_index = tuple(i for i, c in enumerate(self.feature_schema) if c.kind == "categorical")
        self.primary_size_index = None   # position within feature_schema
        self.size_feature_index = []     # primary_size + size_related positions
        for i, col in enumerate(self.feature_schema):
            if col.size_flag == "primary_size":
                self.primary_size_index = i
            if col.size_flag in ("primary_size", "size_related"):
                self.size_feature_index.append(i)
        self.size_feature_index = tuple(self.size_feature_index)

        n = len(self.projects)
        m = len(self.feature_schema)
        if validate:
            if n < 3:
                raise DatasetError(f"dataset needs at least 3 projects, got {n}")
            for p in self.projects:
                if len(p.features) != m:
                    raise DatasetError(f"project {p.id!r}: expected {m} features, got {len(p.features)}")
                if not (np.isfinite(p.effort) and p.effort > 0):
                    raise DatasetError(f"project {p.id!r}: non-positive effort {p.effort!r}")
            seen = set()
            for p in self.projects:
                if p.id in seen:
                    raise DatasetError(f"duplicate project id {p.id!r}")
                seen.add(p.id)

        cont = np.empty((n, len(self.cont_index)))
        for r, p in enumerate(self.projects):
            for c, fi in enumerate(self.cont_index):
                cont[r, c] = p.features[fi]
        if validate and not np.all(np.isfinite(cont)):
            raise DatasetError("non-finite continuous feature value")
        cat = np.empty((n, len(self.cat_index)), dtype=object)
        for r, p in enumerate(self.projects):
            for c, fi in enumerate(self.cat_index):
                cat[r, c] = p.features[fi]
        self.cont = cont
        self.cat = cat
        self.efforts = np.array([p.effort for p in self.projects])
        mins = cont.min(axis=0) if n else np.zeros(0)
        maxs = cont.max(axis=0) if n else np.zeros(0)
        self.bounds = (mins, maxs)
        for arr in (self.cont, self.cat, self.efforts, mins, maxs):
            arr.flags.writeable = False
        self._norm = None

    @property
    def n(self):
        return len(self.projects)

    @property
    def m(self):
        return len(self.feature_schema)

    def normalized(self):
        """Continuous features scaled to [0, 1] with this dataset's bounds (cached)."""
        if self._norm is None:
            norm = normalize_minmax(self.cont, self.bounds)
            norm.flags.writeable = False
            self._norm = norm
        return self._norm

    def without(self, index):
        """The dataset minus one row; the training fold of a LOOCV step."""
        projects = self.projects[:index] + self.projects[index + 1:]
        return Dataset(self.name, self.columns, projects, validate=False)

    def effort_unit(self):
        return next(c.name for c in self.columns if c.role == "effort")


def normalize_minmax(values, bounds, clamp=False):
    """Scale columns of ``values`` to [0, 1] given (mins, maxs) bounds.

    Constant columns (min == max) map to 0 everywhere: they carry no
    distance information and this avoids a zero division. With ``clamp``
    set, out-of-bounds values (a query outside the training range) are
    clipped into [0, 1].
    """
    mins, maxs = bounds
    span = maxs - mins
    safe = np.where(span > 0, span, 1.0)
    scaled = (np.asarray(values, dtype=float) - mins) / safe
    scaled = np.where(span > 0, scaled, 0.0)
    if clamp:
        scaled = np.clip(scaled, 0.0, 1.0)
    return scaled


def load_schema(path):
    """Parse a schema sidecar into ColumnSpecs (file order)."""
    specs = []
    seen = set()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DatasetError(f"{path}:{lineno}: expected <column>=<role>,<kind>,<size_flag>")
        name, _, rest = line.partition("=")
        name = name.strip()
        parts = [p.strip() for p in rest.split(",")]
        if len(parts) != 3:
            raise DatasetError(f"{path}:{lineno}: expected three comma-separated fields, got {rest!r}")
        if name in seen:
            raise DatasetError(f"{path}:{lineno}: duplicate column {name!r}")
        seen.add(name)
        specs.append(ColumnSpec(name, parts[0], parts[1], parts[2]))
    if not specs:
        raise DatasetError(f"{path}: empty schema")
    efforts = [c for c in specs if c.role == "effort"]
    if len(efforts) != 1:
        raise DatasetError(f"{path}: exactly one effort column required, found {len(efforts)}")
    if efforts[0].kind != "continuous":
        raise DatasetError(f"{path}: effort column must be continuous")
    if sum(c.size_flag == "primary_size" for c in specs) > 1:
        raise DatasetError(f"{path}: at most one primary_size column allowed")
    if sum(c.role == "identifier" for c in specs) > 1:
        raise DatasetError(f"{path}: at most one identifier column allowed")
    return specs


def _parse_cell(raw, column, row_id):
    text = raw.strip()
    if text.lower() in MISSING:
        return None
    if column.kind == "categorical":
        return text
    try:
        value = float(text)
    except ValueError:
        raise DatasetError(
            f"row {row_id}: non-numeric value {raw!r} in continuous column {column.name!r}"
        ) from None
    if not np.isfinite(value):
        raise DatasetError(f"row {row_id}: non-finite value in column {column.name!r}")
    return value


def load_dataset(data_path, schema_path, name=None):
    """Load a CSV + schema pair into a validated Dataset.

    Rows with any missing feature or effort value are dropped with a logged
    warning; all other irregularities (unknown columns, non-numeric
    continuous values, non-positive efforts, duplicate ids) are errors.
    """
    data_path = Path(data_path)
    specs = load_schema(schema_path)
    by_name = {c.name: c for c in specs}

    with data_path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{data_path}: empty file") from None
        header = [h.strip() for h in header]
        missing_in_schema = [h for h in header if h not in by_name]
        if missing_in_schema:
            raise DatasetError(f"{data_path}: columns not declared in schema: {missing_in_schema}")
        missing_in_header = [c.name for c in specs if c.name not in header]
        if missing_in_header:
            raise DatasetError(f"{data_path}: schema columns absent from header: {missing_in_header}")

        columns = [by_name[h] for h in header]
        id_pos = next((i for i, c in enumerate(columns) if c.role == "identifier"), None)
        effort_pos = next(i for i, c in enumerate(columns) if c.role == "effort")
        feature_pos = [i for i, c in enumerate(columns) if c.role == "feature"]

        projects = []
        dropped = 0
        for rownum, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(columns):
                raise DatasetError(f"{data_path}: row {rownum} has {len(row)} cells, expected {len(columns)}")
            pid = row[id_pos].strip() if id_pos is not None else str(rownum)
            cells = [_parse_cell(row[i], columns[i], pid) for i in feature_pos + [effort_pos]]
            if any(v is None for v in cells):
                dropped += 1
                continue
            effort = cells[-1]
            if effort <= 0:
                raise DatasetError(f"{data_path}: row {rownum}: non-positive effort {effort!r}")
            projects.append(Project(pid, tuple(cells[:-1]), effort))

    if dropped:
        log.warning("%s: dropped %d row(s) with missing values", data_path, dropped)
    retained = [c for c in columns if c.role != "ignored"]
    return Dataset(name or data_path.stem, retained, projects, dropped_rows=dropped)


def write_dataset(dataset, data_path, schema_path):
    """Serialize a Dataset back to a CSV + schema pair (full float precision)."""
    with Path(schema_path).open("w", encoding="utf-8") as fh:
        for col in dataset.columns:
            fh.write(f"{col.name}={col.role},{col.kind},{col.size_flag}\n")
    id_col = next((c for c in dataset.columns if c.role == "identifier"), None)
    with Path(data_path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([c.name for c in dataset.columns])
        for project in dataset.projects:
            row = []
            fi = 0
            for col in dataset.columns:
                if col.role == "identifier":
                    row.append(project.id)
                elif col.role == "effort":
                    row.append(repr(project.effort))
                else:
                    value = project.features[fi]
                    row.append(value if col.kind == "categorical" else repr(float(value)))
                    fi += 1
            writer.writerow(row)
    del id_col


@dataclass(frozen=True)
class EffortStats:
    n: int
    m: int
    minimum: float
    maximum: float
    mean: float
    median: float
    skewness: float


def skewness(values):
    """Adjusted Fisher-Pearson skewness; 0.0 for zero-variance input."""
    x = np.asarray(values, dtype=float)
    n = x.size
    if n < 3:
        return 0.0
    centered = x - x.mean()
    m2 = np.mean(centered**2)
    if m2 == 0:
        return 0.0
    g1 = np.mean(centered**3) / m2**1.5
    return float(g1 * np.sqrt(n * (n - 1)) / (n - 2))


def describe(dataset):
    """Descriptive statistics of the effort column."""
    e = dataset.efforts
    return EffortStats(
        n=dataset.n,
        m=dataset.m,
        minimum=float(e.min()),
        maximum=float(e.max()),
        mean=float(e.mean()),
        median=float(np.median(e)),
        skewness=skewness(e),
    )
