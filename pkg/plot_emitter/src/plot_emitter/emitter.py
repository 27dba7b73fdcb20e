"""Render simulation CSVs into figures and markdown.

Three chart kinds: BARS groups MSE bars per estimator within each variable,
PARABOLA scatters (p, mse) points and overlays the a*p*(1-p) curves using
the coefficients already present in the CSV, COVERAGE_TABLE lays the
coverage rows out as an aligned markdown table with a median footer.

This module is a pure presentation layer. It never recomputes statistics:
curves come from the stored a column, tables from the stored cells, and a
sha256 checksum of the numeric input cells is echoed into every output so
a reader can tie a figure back to the exact CSV that produced it.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import statistics
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  backend must be set first

matplotlib.rcParams["svg.fonttype"] = "none"  # keep checksum greppable


class EmitterError(ValueError):
    pass


class ChartKind(enum.Enum):
    BARS = "bars"
    PARABOLA = "parabola"
    COVERAGE_TABLE = "coverage_table"


# Column contracts for the three consumed files. Numeric columns feed the
# echoed checksum; extra columns are tolerated and ignored.
REPORT_COLUMNS = ("variable", "estimator", "truth", "mean_estimate", "bias",
                  "variance", "mse", "bias_sq_share", "expected_se",
                  "mean_ci_width", "coverage", "re_vs_new")
REPORT_NUMERIC = REPORT_COLUMNS[2:]
PARABOLA_COLUMNS = ("estimator", "variable", "p", "mse", "a")
PARABOLA_NUMERIC = ("p", "mse", "a")
COVERAGE_COLUMNS = ("name", "actual", "E.se", "width", "coverage")
COVERAGE_NUMERIC = ("actual", "E.se", "width", "coverage")


@dataclass(frozen=True)
class PlotRequest:
    """One render job: a CSV in, image and markdown paths out.

    BARS and PARABOLA need at least one image path; COVERAGE_TABLE writes
    markdown only.
    """

    kind: ChartKind
    csv: str
    png: str | None = None
    svg: str | None = None
    markdown: str | None = None


def read_table(path, columns, numeric):
    """Parse a harness CSV; returns (rows, checksum).

    rows are dicts keyed by schema column, cells kept as the literal CSV
    strings. The checksum is sha256 over the numeric cells exactly as they
    appear in the file, row-major, so any edit to a number changes it.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmitterError(f"{path}: empty input") from None
        missing = [c for c in columns if c not in header]
        if missing:
            raise EmitterError(f"{path}: missing column {missing[0]!r}")
        pos = {c: header.index(c) for c in columns}
        rows = []
        for line in reader:
            if not line:
                continue
            rows.append({c: line[pos[c]] for c in columns})
    if not rows:
        raise EmitterError(f"{path}: empty input")
    digest = hashlib.sha256()
    for row in rows:
        digest.update(",".join(row[c] for c in numeric).encode("utf-8"))
        digest.update(b"\n")
    return rows, digest.hexdigest()


def _float(path, row, col):
    text = row[col]
    if text == "":
        return None
    try:
        return float(text)
    except ValueError:
        raise EmitterError(
            f"{path}: bad number {text!r} in column {col!r}") from None


def _ordered(values):
    seen = []
    for v in values:
        if v not in seen:
            seen.append(v)
    return seen


def _finish_figure(fig, digest, req) -> dict:
    fig.text(0.01, 0.005, f"input sha256 {digest}", fontsize=4,
             color="#888888")
    written = {}
    if req.png:
        fig.savefig(req.png, dpi=150)
        written["png"] = req.png
    if req.svg:
        fig.savefig(req.svg)
        written["svg"] = req.svg
    plt.close(fig)
    return written


def _md_header(title, source, digest):
    return [f"# {title}", "", f"source: `{source}`", "",
            f"input sha256 `{digest}`", ""]


def render(req: PlotRequest) -> dict:
    """Run one job; returns {artifact: path} for everything written."""
    if req.kind is ChartKind.BARS:
        return _render_bars(req)
    if req.kind is ChartKind.PARABOLA:
        return _render_parabola(req)
    if req.kind is ChartKind.COVERAGE_TABLE:
        return _render_coverage(req)
    raise EmitterError(f"unknown chart kind {req.kind!r}")


def _require_image(req):
    if not (req.png or req.svg):
        raise EmitterError(f"{req.kind.value} needs a png or svg output path")


def _render_bars(req: PlotRequest) -> dict:
    _require_image(req)
    rows, digest = read_table(req.csv, REPORT_COLUMNS, REPORT_NUMERIC)
    variables = _ordered(r["variable"] for r in rows)
    estimators = _ordered(r["estimator"] for r in rows)
    mse = {}
    for r in rows:
        mse[(r["variable"], r["estimator"])] = _float(req.csv, r, "mse")

    fig, ax = plt.subplots(figsize=(1.8 + 1.4 * len(variables), 4.0))
    width = 0.8 / len(estimators)
    heights = []
    for k, est in enumerate(estimators):
        xs = [i + (k - (len(estimators) - 1) / 2.0) * width
              for i in range(len(variables))]
        ys = [mse.get((v, est), 0.0) or 0.0 for v in variables]
        heights.extend(y for y in ys if y > 0)
        ax.bar(xs, ys, width=width * 0.92, label=est)
    # Log axis once the spread would flatten the small groups to nothing.
    if heights and max(heights) / min(heights) > 25.0:
        ax.set_yscale("log")
    ax.set_xticks(range(len(variables)))
    ax.set_xticklabels(variables, rotation=15, ha="right")
    ax.set_ylabel("MSE")
    ax.set_title("MSE by estimator")
    ax.legend(title="estimator")
    fig.tight_layout(rect=(0, 0.03, 1, 1))
    written = _finish_figure(fig, digest, req)

    if req.markdown:
        lines = _md_header("MSE by estimator", req.csv, digest)
        lines += ["| variable | estimator | mse |", "| --- | --- | --- |"]
        for v in variables:
            for est in estimators:
                if (v, est) in mse:
                    lines.append(f"| {v} | {est} | {mse[(v, est)]!r} |")
        with open(req.markdown, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        written["markdown"] = req.markdown
    return written


def _render_parabola(req: PlotRequest) -> dict:
    _require_image(req)
    rows, digest = read_table(req.csv, PARABOLA_COLUMNS, PARABOLA_NUMERIC)
    estimators = _ordered(r["estimator"] for r in rows)
    pts = []
    for r in rows:
        p = _float(req.csv, r, "p")
        m = _float(req.csv, r, "mse")
        a = _float(req.csv, r, "a")
        pts.append((r["estimator"], r["variable"], p, m, a))

    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    grid = [i / 200.0 for i in range(201)]
    for est in estimators:
        own = [(p, m) for e, _, p, m, _ in pts if e == est]
        color = ax.scatter([p for p, _ in own], [m for _, m in own],
                           s=18, label=est).get_facecolor()[0]
        a = next(a for e, _, _, _, a in pts if e == est)
        ax.plot(grid, [a * x * (1.0 - x) for x in grid],
                color=color, linewidth=1.0)
    ax.set_xlabel("p")
    ax.set_ylabel("MSE")
    ax.set_title("MSE against prevalence, stored parabola overlays")
    ax.legend(title="estimator")
    fig.tight_layout(rect=(0, 0.03, 1, 1))
    written = _finish_figure(fig, digest, req)

    if req.markdown:
        lines = _md_header("MSE parabolas", req.csv, digest)
        for est in estimators:
            a = next(a for e, _, _, _, a in pts if e == est)
            lines.append(f"a[{est}] = {a!r}")
        lines += ["", "| estimator | variable | p | mse | residual |",
                  "| --- | --- | --- | --- | --- |"]
        for est, var, p, m, a in pts:
            res = m - a * p * (1.0 - p)
            lines.append(f"| {est} | {var} | {p!r} | {m!r} | {res!r} |")
        with open(req.markdown, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        written["markdown"] = req.markdown
    return written


def _bare_decimal(x: float) -> str:
    # Table footers print coverages like .94, no leading zero.
    text = f"{x:.2f}"
    return text[1:] if text.startswith("0.") else text


def _render_coverage(req: PlotRequest) -> dict:
    if not req.markdown:
        raise EmitterError("coverage_table needs a markdown output path")
    rows, digest = read_table(req.csv, COVERAGE_COLUMNS, COVERAGE_NUMERIC)
    coverages = [_float(req.csv, r, "coverage") for r in rows]

    widths = {c: max(len(c), *(len(r[c]) for r in rows))
              for c in COVERAGE_COLUMNS}
    lines = _md_header("Coverage", req.csv, digest)
    lines.append("| " + " | ".join(c.ljust(widths[c])
                                   for c in COVERAGE_COLUMNS) + " |")
    lines.append("| " + " | ".join("-" * widths[c]
                                   for c in COVERAGE_COLUMNS) + " |")
    for r in rows:
        lines.append("| " + " | ".join(r[c].ljust(widths[c])
                                       for c in COVERAGE_COLUMNS) + " |")
    med = statistics.median(coverages)
    lines += ["", f"median coverage {_bare_decimal(med)}"]
    with open(req.markdown, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return {"markdown": req.markdown}
