"""File formats: clustering TSVs, ideal classes, run configs, reports.

All TSV formats share the same framing: UTF-8, one record per line, fields
separated by single tabs, blank lines and lines starting with ``#``
ignored. Writers emit rows in canonical element-key order and round-trip
floats through ``repr``, so a write/read cycle reproduces inputs exactly.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import ConfigError, InputError, ParseError
from .model import (
    KIND_CURRENT,
    KIND_HISTORICAL,
    ElementRef,
    LabeledClustering,
    WeightMap,
    element_key,
    parse_element_key,
    sorted_elements,
)
from .transform import (
    AUTO_CLASS_PREFIX,
    DEFAULT_K,
    MODE_SEPARATE,
    EvalInputs,
    HistoricalEpoch,
    IdCensus,
    TransformConfig,
    align_current_items,
    attach_ideal,
    build_eval_inputs,
    merge_historical_epochs,
)


def _rows(path) -> Iterable[tuple[int, list[str]]]:
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line or line.startswith("#"):
                continue
            yield line_no, line.split("\t")


def _parse_weight(path, line_no: int, text: str) -> float:
    try:
        w = float(text)
    except ValueError:
        raise ParseError(path, line_no, f"bad weight {text!r}") from None
    if not (math.isfinite(w) and w > 0):
        raise ParseError(path, line_no, f"weight must be positive, got {text!r}")
    return w


def read_clustering_tsv(
    path, kind: str = KIND_CURRENT, epoch: str = ""
) -> tuple[LabeledClustering, WeightMap]:
    """Read ``item<TAB>cluster_id[<TAB>weight]`` rows (weight defaults to 1).

    ``kind``/``epoch`` say what the items are: current run items or
    historical items of one epoch.
    """
    clusters: dict[str, set[ElementRef]] = {}
    weights: dict[ElementRef, float] = {}
    # The row framing of _rows is inlined here (and only the last field is
    # stripped, duplicates are caught by dict-size bookkeeping, and elements
    # are built with the C-level _make): this reader handles runs of
    # millions of rows, and every per-row hop is measurable there.
    if kind == KIND_CURRENT:
        epoch = ""
    else:
        kind = KIND_HISTORICAL
    make = ElementRef._make
    seen = 0
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if line[0] == "#":
                continue
            fields = line.split("\t")
            fields[-1] = fields[-1].rstrip("\r\n")
            if len(fields) < 2:
                if not fields[0]:
                    continue
                raise ParseError(
                    path, line_no, "expected item<TAB>cluster_id[<TAB>weight]"
                )
            if len(fields) > 3 or not fields[0] or not fields[1]:
                raise ParseError(
                    path, line_no, "expected item<TAB>cluster_id[<TAB>weight]"
                )
            item, cluster_id = fields[0], fields[1]
            w = (
                _parse_weight(path, line_no, fields[2])
                if len(fields) == 3
                else 1.0
            )
            element = make((kind, epoch, item))
            weights[element] = w
            if len(weights) == seen:
                raise ParseError(path, line_no, f"duplicate item {item!r}")
            seen += 1
            group = clusters.get(cluster_id)
            if group is None:
                clusters[cluster_id] = group = set()
            group.add(element)
    clustering = LabeledClustering(
        {cid: frozenset(m) for cid, m in clusters.items()}, epoch
    )
    return clustering, WeightMap(weights, validate=False)


def write_assignment_tsv(path, labels: LabeledClustering, weights: WeightMap) -> None:
    """Inverse of read_clustering_tsv for current items."""
    rows = []
    for cid, members in labels.clusters.items():
        for element in members:
            rows.append((element.external_id, cid, weights[element]))
    rows.sort()
    with open(path, "w", encoding="utf-8") as fh:
        for item, cid, w in rows:
            fh.write(f"{item}\t{cid}\t{w!r}\n")


def read_ideal_tsv(path) -> dict[ElementRef, str]:
    """Read ``element_key<TAB>class_id`` rows."""
    classes: dict[ElementRef, str] = {}
    seen = 0
    # Inlined row framing; ideal files cover whole universes, see
    # read_clustering_tsv.
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if line[0] == "#":
                continue
            fields = line.split("\t")
            fields[-1] = fields[-1].rstrip("\r\n")
            if len(fields) != 2 or not fields[0] or not fields[1]:
                if len(fields) == 1 and not fields[0]:
                    continue
                raise ParseError(path, line_no, "expected element<TAB>class_id")
            try:
                element = parse_element_key(fields[0])
            except ValueError as exc:
                raise ParseError(path, line_no, str(exc)) from None
            classes[element] = fields[1]
            if len(classes) == seen:
                raise ParseError(
                    path, line_no, f"duplicate element {fields[0]!r}"
                )
            seen += 1
    return classes


def write_ideal_tsv(path, ideal: LabeledClustering) -> None:
    rows = []
    for cid, members in ideal.clusters.items():
        for element in members:
            rows.append((element_key(element), cid))
    rows.sort()
    with open(path, "w", encoding="utf-8") as fh:
        for key, cid in rows:
            fh.write(f"{key}\t{cid}\n")


def read_element_clustering_tsv(path) -> LabeledClustering:
    """Read ``element_key<TAB>cluster_id`` rows over arbitrary elements."""
    clusters: dict[str, set[ElementRef]] = {}
    seen: set[ElementRef] = set()
    for line_no, fields in _rows(path):
        if len(fields) != 2 or not fields[0] or not fields[1]:
            raise ParseError(path, line_no, "expected element<TAB>cluster_id")
        try:
            element = parse_element_key(fields[0])
        except ValueError as exc:
            raise ParseError(path, line_no, str(exc)) from None
        if element in seen:
            raise ParseError(path, line_no, f"duplicate element {fields[0]!r}")
        seen.add(element)
        clusters.setdefault(fields[1], set()).add(element)
    return LabeledClustering({cid: frozenset(m) for cid, m in clusters.items()})


def write_element_clustering_tsv(path, clustering: LabeledClustering) -> None:
    rows = []
    for cid, members in clustering.clusters.items():
        for element in members:
            rows.append((element_key(element), cid))
    rows.sort()
    with open(path, "w", encoding="utf-8") as fh:
        for key, cid in rows:
            fh.write(f"{key}\t{cid}\n")


def read_weights_tsv(path) -> WeightMap:
    weights: dict[ElementRef, float] = {}
    for line_no, fields in _rows(path):
        if len(fields) != 2 or not fields[0]:
            raise ParseError(path, line_no, "expected element<TAB>weight")
        try:
            element = parse_element_key(fields[0])
        except ValueError as exc:
            raise ParseError(path, line_no, str(exc)) from None
        if element in weights:
            raise ParseError(path, line_no, f"duplicate element {fields[0]!r}")
        weights[element] = _parse_weight(path, line_no, fields[1])
    return WeightMap(weights, validate=False)


def write_weights_tsv(path, weights: WeightMap) -> None:
    rows = sorted((element_key(e), w) for e, w in weights.items())
    with open(path, "w", encoding="utf-8") as fh:
        for key, w in rows:
            fh.write(f"{key}\t{w!r}\n")


# --- run configuration -----------------------------------------------------

@dataclass(frozen=True)
class HistSource:
    path: Path
    epoch_label: str
    epoch_weight: float = 1.0


@dataclass(frozen=True)
class MaterializedPaths:
    base: Path
    exp: Path
    weights: Path
    ideal: Path | None = None


@dataclass(frozen=True)
class RunConfig:
    """A parsed and path-resolved run configuration."""

    base: Path | None = None
    exp: Path | None = None
    hist: tuple[HistSource, ...] = ()
    mode: str = MODE_SEPARATE
    align_items: bool = False
    k: float = DEFAULT_K
    hist_scale_factor: float = 1.0
    ideal: Path | None = None
    output: Path | None = None
    materialized: MaterializedPaths | None = None

    def transform_config(self) -> TransformConfig:
        return TransformConfig(
            k=self.k,
            hist_scale_factor=self.hist_scale_factor,
            mode=self.mode,
            align_items=self.align_items,
        )


_CONFIG_KEYS = {
    "base", "exp", "hist", "mode", "align_items", "k",
    "hist_scale_factor", "ideal", "output", "materialized",
}


def _resolve(base_dir: Path, value, key: str) -> Path:
    if not isinstance(value, str) or not value:
        raise ConfigError(f"config key {key!r} must be a non-empty path string")
    path = Path(value)
    if not path.is_absolute():
        path = base_dir / path
    if not path.is_file() or not os.access(path, os.R_OK):
        raise ConfigError(f"config key {key!r}: {path} is not a readable file")
    return path


def load_run_config(path) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    base_dir = path.parent
    k = raw.get("k", DEFAULT_K)
    hsf = raw.get("hist_scale_factor", 1.0)
    mode = raw.get("mode", MODE_SEPARATE)
    align = raw.get("align_items", False)
    if not isinstance(align, bool):
        raise ConfigError("align_items must be a boolean")
    for name, value in (("k", k), ("hist_scale_factor", hsf)):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"{name} must be a number")

    output = raw.get("output")
    output_path = None
    if output is not None:
        if not isinstance(output, str) or not output:
            raise ConfigError("output must be a non-empty path string")
        output_path = Path(output)
        if not output_path.is_absolute():
            output_path = base_dir / output_path

    if "materialized" in raw:
        extra = {"base", "exp", "hist", "ideal", "align_items", "mode"} & set(raw)
        if extra:
            raise ConfigError(
                "materialized config cannot also set: " + ", ".join(sorted(extra))
            )
        m = raw["materialized"]
        if not isinstance(m, dict):
            raise ConfigError("materialized must be an object")
        munknown = set(m) - {"base", "exp", "weights", "ideal"}
        if munknown:
            raise ConfigError(
                f"unknown materialized keys: {', '.join(sorted(munknown))}"
            )
        for req in ("base", "exp", "weights"):
            if req not in m:
                raise ConfigError(f"materialized config requires {req!r}")
        ideal = (
            _resolve(base_dir, m["ideal"], "materialized.ideal")
            if "ideal" in m
            else None
        )
        return RunConfig(
            k=float(k),
            hist_scale_factor=float(hsf),
            output=output_path,
            materialized=MaterializedPaths(
                base=_resolve(base_dir, m["base"], "materialized.base"),
                exp=_resolve(base_dir, m["exp"], "materialized.exp"),
                weights=_resolve(base_dir, m["weights"], "materialized.weights"),
                ideal=ideal,
            ),
        )

    for req in ("base", "exp"):
        if req not in raw:
            raise ConfigError(f"config requires {req!r}")
    hist_raw = raw.get("hist", [])
    if not isinstance(hist_raw, list):
        raise ConfigError("hist must be a list of epoch objects")
    hist: list[HistSource] = []
    for idx, entry in enumerate(hist_raw):
        if not isinstance(entry, dict):
            raise ConfigError(f"hist[{idx}] must be an object")
        hunknown = set(entry) - {"path", "epoch_label", "epoch_weight"}
        if hunknown:
            raise ConfigError(
                f"unknown hist[{idx}] keys: {', '.join(sorted(hunknown))}"
            )
        if "path" not in entry or "epoch_label" not in entry:
            raise ConfigError(f"hist[{idx}] requires 'path' and 'epoch_label'")
        label = entry["epoch_label"]
        if not isinstance(label, str) or not label or ":" in label:
            raise ConfigError(
                f"hist[{idx}].epoch_label must be a non-empty string without ':'"
            )
        ew = entry.get("epoch_weight", 1.0)
        if not isinstance(ew, (int, float)) or isinstance(ew, bool):
            raise ConfigError(f"hist[{idx}].epoch_weight must be a number")
        hist.append(
            HistSource(
                path=_resolve(base_dir, entry["path"], f"hist[{idx}].path"),
                epoch_label=label,
                epoch_weight=float(ew),
            )
        )

    ideal = _resolve(base_dir, raw["ideal"], "ideal") if "ideal" in raw else None
    return RunConfig(
        base=_resolve(base_dir, raw["base"], "base"),
        exp=_resolve(base_dir, raw["exp"], "exp"),
        hist=tuple(hist),
        mode=mode,
        align_items=align,
        k=float(k),
        hist_scale_factor=float(hsf),
        ideal=ideal,
        output=output_path,
    )


# --- assembling EvalInputs from a config ------------------------------------

def _max_merge(base_weights: WeightMap, exp_weights: WeightMap) -> WeightMap:
    if base_weights == exp_weights:  # typical: both files omit the column
        return base_weights
    merged = dict(base_weights.items())
    for element, w in exp_weights.items():
        prior = merged.get(element)
        merged[element] = w if prior is None else max(prior, w)
    return WeightMap(merged, validate=False)


def load_inputs(config: RunConfig) -> EvalInputs:
    """Read every input file in the config and build the evaluation problem."""
    if config.materialized is not None:
        return _load_materialized(config)

    epochs = [
        HistoricalEpoch(
            label=src.epoch_label,
            clustering=clustering,
            weights=weights,
            epoch_weight=src.epoch_weight,
        )
        for src in config.hist
        for clustering, weights in (
            read_clustering_tsv(
                src.path, kind=KIND_HISTORICAL, epoch=src.epoch_label
            ),
        )
    ]
    if epochs:
        hist, hist_weights = merge_historical_epochs(epochs)
    else:
        hist, hist_weights = LabeledClustering({}), WeightMap({}, validate=False)

    base_labels, base_weights = read_clustering_tsv(config.base)
    exp_labels, exp_weights = read_clustering_tsv(config.exp)
    if config.align_items:
        base_labels, exp_labels, item_weights = align_current_items(
            base_labels, base_weights, exp_labels, exp_weights
        )
    else:
        item_weights = _max_merge(base_weights, exp_weights)

    inputs = build_eval_inputs(
        hist, hist_weights, base_labels, exp_labels, item_weights,
        config.transform_config(),
    )
    if config.ideal is not None:
        inputs = attach_ideal(inputs, read_ideal_tsv(config.ideal))
    return inputs


def _load_materialized(config: RunConfig) -> EvalInputs:
    m = config.materialized
    base = read_element_clustering_tsv(m.base)
    exp = read_element_clustering_tsv(m.exp)
    weights = read_weights_tsv(m.weights)

    if base.clusters.keys() != exp.clusters.keys():
        raise InputError(
            "materialized base and experiment use different cluster id sets"
        )
    base_universe = frozenset(base.iter_elements())
    if base_universe != frozenset(exp.iter_elements()):
        raise InputError(
            "materialized base and experiment cover different universes"
        )
    missing = [e for e in base_universe if e not in weights]
    if missing:
        sample = ", ".join(
            element_key(e) for e in sorted_elements(missing)[:5]
        )
        raise InputError(
            f"weights file misses {len(missing)} universe elements "
            f"(e.g. {sample})"
        )

    all_ids = frozenset(base.clusters)
    non_hist_ids = frozenset(
        cid
        for cid in all_ids
        if ElementRef.synthetic(cid) in base.clusters[cid]
    )
    ids_base = frozenset(
        cid
        for cid, members in base.clusters.items()
        if any(e.kind == KIND_CURRENT for e in members)
    )
    ids_exp = frozenset(
        cid
        for cid, members in exp.clusters.items()
        if any(e.kind == KIND_CURRENT for e in members)
    )
    census = IdCensus(
        ids_base=ids_base,
        ids_exp=ids_exp,
        ids_hist=all_ids - non_hist_ids,
        all_ids=all_ids,
        non_hist_ids=non_hist_ids,
    )
    inputs = EvalInputs(
        base=base, exp=exp, weights=weights, census=census, k=config.k
    )
    if m.ideal is not None:
        inputs = attach_ideal(inputs, read_ideal_tsv(m.ideal))
    return inputs


def write_materialized(inputs: EvalInputs, outdir) -> Path:
    """Write the expanded problem as plain files; returns a ready config path."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_element_clustering_tsv(outdir / "base.tsv", inputs.base)
    write_element_clustering_tsv(outdir / "exp.tsv", inputs.exp)
    write_weights_tsv(outdir / "weights.tsv", inputs.weights)
    materialized = {
        "base": "base.tsv",
        "exp": "exp.tsv",
        "weights": "weights.tsv",
    }
    if inputs.ideal is not None:
        # Auto-minted singleton classes are regenerated on load, so only
        # explicitly assigned classes are worth persisting.
        explicit = LabeledClustering(
            {
                cid: members
                for cid, members in inputs.ideal.clusters.items()
                if not cid.startswith(AUTO_CLASS_PREFIX)
            }
        )
        write_ideal_tsv(outdir / "ideal.tsv", explicit)
        materialized["ideal"] = "ideal.tsv"
    config_path = outdir / "materialized.json"
    with open(config_path, "w", encoding="utf-8") as fh:
        json.dump(
            {"materialized": materialized, "k": inputs.k},
            fh, indent=2, sort_keys=True,
        )
        fh.write("\n")
    return config_path
