"""Plot specification files: flat key-value text, '#' comments.

Keys::

    schema = 1
    title  = <figure title>
    output = <image path; extension picks the format (.png, .pdf, .svg)>
    metric = ser | ber                 # sweep series column, default ser
    xmin / xmax = <dB>                 # optional axis limits
    ymin / ymax = <error rate>         # optional, log axis
    series = <csv> | <label> | <role>  # role: simulation | bound | limit
    limit  = <dB value> | <label>      # inline vertical marker

Relative CSV and output paths resolve against the spec file's directory.
At least one series or inline limit is required, and the error-rate axis
is always logarithmic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

ROLES = ("simulation", "bound", "limit")


class PlotSpecError(ValueError):
    """Invalid plot specification."""


@dataclass(frozen=True)
class SeriesSpec:
    path: Path | None
    label: str
    role: str
    value: float | None = None  # inline limits carry the dB value directly


@dataclass
class PlotSpec:
    output: Path
    series: list[SeriesSpec] = field(default_factory=list)
    title: str = ""
    metric: str = "ser"
    xlim: tuple[float | None, float | None] = (None, None)
    ylim: tuple[float | None, float | None] = (None, None)

    def __post_init__(self):
        if not self.series:
            raise PlotSpecError("plot spec needs at least one series")
        if self.metric not in ("ser", "ber"):
            raise PlotSpecError(f"metric must be ser or ber, got {self.metric!r}")
        for s in self.series:
            if s.role not in ROLES:
                raise PlotSpecError(f"unknown style role {s.role!r}")


def parse_plot_spec(text: str, base_dir: Path | None = None) -> PlotSpec:
    base = Path(base_dir) if base_dir is not None else Path(".")
    values: dict = {"series": []}
    axes = {"xmin": None, "xmax": None, "ymin": None, "ymax": None}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise PlotSpecError(f"line {lineno}: expected 'key = value'")
        key, val = (p.strip() for p in body.split("=", 1))
        key = key.lower()
        if key == "schema":
            if val != "1":
                raise PlotSpecError(f"line {lineno}: unsupported schema {val!r}")
        elif key == "series":
            parts = [p.strip() for p in val.split("|")]
            if len(parts) != 3:
                raise PlotSpecError(
                    f"line {lineno}: series needs 'path | label | role'"
                )
            path, label, role = parts
            values["series"].append(
                SeriesSpec(path=base / path, label=label, role=role.lower())
            )
        elif key == "limit":
            parts = [p.strip() for p in val.split("|")]
            if len(parts) != 2:
                raise PlotSpecError(f"line {lineno}: limit needs 'value | label'")
            try:
                db = float(parts[0])
            except ValueError:
                raise PlotSpecError(f"line {lineno}: bad limit value") from None
            values["series"].append(
                SeriesSpec(path=None, label=parts[1], role="limit", value=db)
            )
        elif key in ("title", "metric"):
            values[key] = val
        elif key == "output":
            values["output"] = base / val
        elif key in axes:
            try:
                axes[key] = float(val)
            except ValueError:
                raise PlotSpecError(f"line {lineno}: bad {key} value") from None
        else:
            raise PlotSpecError(f"line {lineno}: unknown key {key!r}")
    if "output" not in values:
        raise PlotSpecError("plot spec needs an output path")
    return PlotSpec(
        output=values["output"],
        series=values["series"],
        title=values.get("title", ""),
        metric=values.get("metric", "ser"),
        xlim=(axes["xmin"], axes["xmax"]),
        ylim=(axes["ymin"], axes["ymax"]),
    )


def load_plot_spec(path) -> PlotSpec:
    path = Path(path)
    return parse_plot_spec(path.read_text(), base_dir=path.parent)
