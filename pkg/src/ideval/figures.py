"""Bundled example scenarios with known-good metric tables.

Each fixture directory ships the input files of one worked example plus
the expected two-decimal percent renderings. Recomputing them is both a
self-test of an installation and living documentation of the metrics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib.resources import files as resource_files
from pathlib import Path

from .errors import InputError
from .io import load_inputs, load_run_config
from .metrics import MetricsReport, evaluate, rendered_rows
from .transform import EvalInputs

FIGURE_IDS = tuple(f"fig{n:02d}" for n in range(1, 11))


@dataclass(frozen=True)
class FigureFixture:
    figure_id: str
    inputs: EvalInputs
    expected: dict[str, str]


@dataclass(frozen=True)
class FigureResult:
    figure_id: str
    report: MetricsReport
    rendered: dict[str, str]
    expected: dict[str, str]

    @property
    def mismatches(self) -> list[tuple[str, str, str]]:
        """(row, got, want) for every expected row that disagrees."""
        out = []
        for row, want in self.expected.items():
            got = self.rendered.get(row)
            if got != want:
                out.append((row, "missing" if got is None else got, want))
        return out

    @property
    def ok(self) -> bool:
        return not self.mismatches


def _fixture_dir(figure_id: str) -> Path:
    if figure_id not in FIGURE_IDS:
        raise InputError(
            f"unknown figure {figure_id!r}; known: {', '.join(FIGURE_IDS)}"
        )
    # Package data is installed as plain files, so the traversable is a path.
    return Path(str(resource_files("ideval") / "fixtures" / figure_id))


def load_fixture(figure_id: str) -> FigureFixture:
    fixture_dir = _fixture_dir(figure_id)
    inputs = load_inputs(load_run_config(fixture_dir / "config.json"))
    with open(fixture_dir / "expected.json", "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    expected = dict(raw["impact"])
    expected.update(raw.get("quality") or {})
    return FigureFixture(figure_id=figure_id, inputs=inputs, expected=expected)


def run_figure(figure_id: str) -> FigureResult:
    fixture = load_fixture(figure_id)
    report = evaluate(fixture.inputs)
    return FigureResult(
        figure_id=figure_id,
        report=report,
        rendered=rendered_rows(report),
        expected=fixture.expected,
    )


def run_figures(figure_ids=None) -> list[FigureResult]:
    return [run_figure(fid) for fid in (figure_ids or FIGURE_IDS)]
