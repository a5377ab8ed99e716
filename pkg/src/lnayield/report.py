"""Report assembly: comparisons against fixed designs, table rendering in
text/CSV/JSON, and run manifests.

All artifacts are written atomically (temp file + rename).  Numeric output
uses 4 significant digits in text tables and 6 in CSV; the JSON mirror keeps
full precision and carries a schema version.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .budget import ReceiverTargets, StageTwoLimits, receiver_compliance
from .montecarlo import CLAUSES, DiePopulation
from .selection import SelectionReport
from .statmodel import PARAMS

__all__ = [
    "atomic_writer",
    "write_json",
    "BaselineSummary",
    "summarize_baseline",
    "ComparisonRow",
    "compare",
    "power_anchor_diagnostic",
    "ReportBundle",
    "render_tables",
    "RunManifest",
    "config_digest",
]

REPORT_SCHEMA_VERSION = 1


@contextmanager
def atomic_writer(path, mode: str = "w"):
    """Write a file atomically: contents appear complete or not at all."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, encoding="utf-8", newline="") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_json(path, obj) -> None:
    """Canonical JSON dump: sorted keys, stable formatting."""
    with atomic_writer(path) as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def config_digest(config: Mapping) -> str:
    """Stable content digest of a config document."""
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class BaselineSummary:
    """Receiver compliance and power of one fixed (traditional) design."""

    name: str
    n: int
    targets: ReceiverTargets
    compliance_fraction: float
    nf_fail_fraction: float
    iip3_fail_fraction: float
    power_mw: float


def summarize_baseline(design, pop: DiePopulation, limits: StageTwoLimits,
                       targets: ReceiverTargets) -> BaselineSummary:
    """Classify every die of a single-mode population against the targets."""
    if len(pop.modes) != 1:
        raise ValueError("baseline populations carry exactly one mode")
    gain = pop.values[:, 0, 0]
    nf = pop.values[:, 0, 1]
    iip3 = pop.values[:, 0, 2]
    nf_pass, iip3_pass = receiver_compliance(gain, nf, iip3, limits, targets)
    return BaselineSummary(
        name=design.name,
        n=pop.n,
        targets=targets,
        compliance_fraction=float((nf_pass & iip3_pass).mean()),
        nf_fail_fraction=float((~nf_pass).mean()),
        iip3_fail_fraction=float((~iip3_pass).mean()),
        power_mw=design.power_mw(),
    )


@dataclass(frozen=True)
class ComparisonRow:
    """PLNA-minus-baseline compliance delta and relative power delta."""

    baseline_name: str
    delta_compliance: float
    delta_power: float

    def __post_init__(self):
        if not -1.0 <= self.delta_compliance <= 1.0:
            raise ValueError("delta_compliance must lie in [-1, 1]")


def compare(report: SelectionReport,
            baselines: Sequence[BaselineSummary]) -> list:
    """Compliance and power deltas of a selection outcome vs fixed designs.

    Comparisons must be like-for-like: population size and receiver targets
    have to match, otherwise this raises.
    """
    rows = []
    for base in baselines:
        if base.n != report.n:
            raise ValueError(
                f"population size mismatch: baseline {base.name} has n={base.n}, "
                f"selection has n={report.n}"
            )
        if base.targets != report.targets:
            raise ValueError(
                f"receiver target mismatch against baseline {base.name}"
            )
        rows.append(ComparisonRow(
            baseline_name=base.name,
            delta_compliance=report.compliance_fraction - base.compliance_fraction,
            delta_power=(report.average_power_mw - base.power_mw) / base.power_mw,
        ))
    return rows


def power_anchor_diagnostic(report: SelectionReport, baseline: BaselineSummary,
                            anchor_delta_power: float, mode_powers_mw) -> str:
    """Explain which free parameter binds when a power delta misses its anchor.

    The average PLNA power is a convex combination of the mode powers, so the
    achievable delta range against a baseline is set by the extreme mode
    occupancies; an anchor outside that range can only be reached by changing
    the bias-overhead assumption in the baseline power.
    """
    p = np.asarray(mode_powers_mw, dtype=float)
    lo = (p.min() - baseline.power_mw) / baseline.power_mw
    hi = (p.max() - baseline.power_mw) / baseline.power_mw
    actual = (report.average_power_mw - baseline.power_mw) / baseline.power_mw
    if lo <= anchor_delta_power <= hi:
        return (f"power delta vs {baseline.name}: got {actual:+.3f}, anchor "
                f"{anchor_delta_power:+.3f}; the anchor is reachable for some mode "
                f"occupancy, so mode occupancy binds")
    return (f"power delta vs {baseline.name}: got {actual:+.3f}, anchor "
            f"{anchor_delta_power:+.3f}; no mode occupancy can reach it "
            f"(range [{lo:+.3f}, {hi:+.3f}]), so the bias-overhead assumption binds")


@dataclass
class ReportBundle:
    """Everything the report renderer can emit; sections may be empty."""

    summaries: dict = field(default_factory=dict)      # design -> SummaryStats
    violations: dict = field(default_factory=dict)     # design -> mode -> clause -> frac
    receiver: dict = field(default_factory=dict)       # design -> BaselineSummary
    selections: dict = field(default_factory=dict)     # strategy -> SelectionReport
    comparisons: dict = field(default_factory=dict)    # strategy -> [ComparisonRow]


def _csv6(x) -> str:
    return f"{float(x):.6g}"


def _txt4(x) -> str:
    return f"{float(x):.4g}"


def _write_csv(path, header, rows) -> None:
    with atomic_writer(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _text_table(title, header, rows) -> str:
    widths = [len(h) for h in header]
    srows = [[str(c) for c in row] for row in rows]
    for row in srows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    out = io.StringIO()
    out.write(f"# {title}\n")
    out.write("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip() + "\n")
    out.write("  ".join("-" * w for w in widths) + "\n")
    for row in srows:
        out.write("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() + "\n")
    out.write("\n")
    return out.getvalue()


def _summary_rows(bundle: ReportBundle, fmt):
    rows = []
    for name, summary in bundle.summaries.items():
        for mode, params in summary.stats.items():
            for param in PARAMS:
                st = params[param]
                rows.append([name, mode, param, fmt(st.min), fmt(st.mean), fmt(st.max)])
    return rows


def _violation_rows(bundle: ReportBundle, fmt, designs):
    rows = []
    for clause in CLAUSES:
        row = [clause]
        for name in designs:
            modes = bundle.violations[name]
            for mode in modes:
                row.append(fmt(modes[mode][clause]))
        rows.append(row)
    return rows


def _receiver_rows(bundle: ReportBundle, fmt):
    return [
        [name, b.n, fmt(b.compliance_fraction), fmt(b.nf_fail_fraction),
         fmt(b.iip3_fail_fraction), fmt(b.power_mw)]
        for name, b in bundle.receiver.items()
    ]


def _selection_rows(bundle: ReportBundle, fmt):
    rows = []
    for label, rep in bundle.selections.items():
        occ = rep.occupancy
        rows.append([
            label, rep.n, fmt(rep.compliance_fraction), fmt(rep.nf_fail_fraction),
            fmt(rep.iip3_fail_fraction), fmt(rep.average_power_mw),
            *(fmt(occ[m]) for m in rep.mode_order),
        ])
    return rows


def _post_stats_rows(bundle: ReportBundle, fmt):
    rows = []
    for label, rep in bundle.selections.items():
        for param, st in rep.post_selection_stats.items():
            rows.append([label, param, fmt(st.min), fmt(st.mean), fmt(st.max)])
    return rows


def _comparison_rows(bundle: ReportBundle, fmt):
    rows = []
    for label, comps in bundle.comparisons.items():
        for row in comps:
            rows.append([label, row.baseline_name, fmt(row.delta_compliance),
                         fmt(row.delta_power)])
    return rows


def _bundle_json(bundle: ReportBundle) -> dict:
    doc: dict = {"schema_version": REPORT_SCHEMA_VERSION}
    doc["summaries"] = {
        name: {
            "n": s.n,
            "stats": {mode: {param: {"min": st.min, "mean": st.mean, "max": st.max}
                             for param, st in params.items()}
                      for mode, params in s.stats.items()},
        }
        for name, s in bundle.summaries.items()
    }
    doc["violations"] = bundle.violations
    doc["receiver"] = {
        name: {"n": b.n, "compliance": b.compliance_fraction,
               "nf_fail": b.nf_fail_fraction, "iip3_fail": b.iip3_fail_fraction,
               "power_mw": b.power_mw}
        for name, b in bundle.receiver.items()
    }
    doc["selections"] = {
        label: {
            "design": rep.design_name, "n": rep.n,
            "compliance": rep.compliance_fraction,
            "nf_fail": rep.nf_fail_fraction,
            "iip3_fail": rep.iip3_fail_fraction,
            "average_power_mw": rep.average_power_mw,
            "occupancy": dict(rep.occupancy),
            "post_selection": {param: {"min": st.min, "mean": st.mean, "max": st.max}
                               for param, st in rep.post_selection_stats.items()},
        }
        for label, rep in bundle.selections.items()
    }
    doc["comparisons"] = {
        label: [{"baseline": r.baseline_name,
                 "delta_compliance": r.delta_compliance,
                 "delta_power": r.delta_power} for r in rows]
        for label, rows in bundle.comparisons.items()
    }
    return doc


_SUMMARY_HEADER = ["design", "mode", "parameter", "min", "mean", "max"]
_RECEIVER_HEADER = ["design", "n", "compliance", "nf_fail", "iip3_fail", "power_mw"]
_POST_HEADER = ["strategy", "parameter", "min", "mean", "max"]
_COMPARISON_HEADER = ["strategy", "baseline", "delta_compliance", "delta_power"]


def render_tables(bundle: ReportBundle, out_dir) -> dict:
    """Emit the bundle as CSV + JSON + text artifacts; returns path mapping."""
    out = Path(out_dir)
    paths = {}

    paths["summary_csv"] = out / "summary.csv"
    _write_csv(paths["summary_csv"], _SUMMARY_HEADER, _summary_rows(bundle, _csv6))

    designs = list(bundle.violations)
    viol_header = ["clause"]
    for name in designs:
        for mode in bundle.violations[name]:
            viol_header.append(name if mode == "NOM" else f"{name}:{mode}")
    paths["violations_csv"] = out / "violations.csv"
    _write_csv(paths["violations_csv"], viol_header,
               _violation_rows(bundle, _csv6, designs))

    paths["receiver_csv"] = out / "receiver.csv"
    _write_csv(paths["receiver_csv"], _RECEIVER_HEADER, _receiver_rows(bundle, _csv6))

    sel_header = ["strategy", "n", "compliance", "nf_fail", "iip3_fail",
                  "average_power_mw"]
    mode_cols = []
    for rep in bundle.selections.values():
        mode_cols = [f"occupancy_{m}" for m in rep.mode_order]
        break
    paths["selection_csv"] = out / "selection.csv"
    _write_csv(paths["selection_csv"], sel_header + mode_cols,
               _selection_rows(bundle, _csv6))

    paths["post_selection_csv"] = out / "post_selection.csv"
    _write_csv(paths["post_selection_csv"], _POST_HEADER,
               _post_stats_rows(bundle, _csv6))

    paths["comparison_csv"] = out / "comparison.csv"
    _write_csv(paths["comparison_csv"], _COMPARISON_HEADER,
               _comparison_rows(bundle, _csv6))

    paths["report_json"] = out / "report.json"
    write_json(paths["report_json"], _bundle_json(bundle))

    text = render_text(bundle)
    paths["report_txt"] = out / "report.txt"
    with atomic_writer(paths["report_txt"]) as fh:
        fh.write(text)
    return paths


def render_text(bundle: ReportBundle) -> str:
    """Human-readable tables at 4 significant digits."""
    parts = []
    if bundle.summaries:
        parts.append(_text_table("Parameter summaries", _SUMMARY_HEADER,
                                 _summary_rows(bundle, _txt4)))
    if bundle.violations:
        designs = list(bundle.violations)
        header = ["clause"] + [
            (name if mode == "NOM" else f"{name}:{mode}")
            for name in designs for mode in bundle.violations[name]
        ]
        parts.append(_text_table("Spec-violation fractions", header,
                                 _violation_rows(bundle, _txt4, designs)))
    if bundle.receiver:
        parts.append(_text_table("Receiver compliance (fixed designs)",
                                 _RECEIVER_HEADER, _receiver_rows(bundle, _txt4)))
    if bundle.selections:
        rep = next(iter(bundle.selections.values()))
        header = ["strategy", "n", "compliance", "nf_fail", "iip3_fail",
                  "average_power_mw"] + [f"occupancy_{m}" for m in rep.mode_order]
        parts.append(_text_table("Mode selection", header,
                                 _selection_rows(bundle, _txt4)))
        parts.append(_text_table("Post-selection parameters", _POST_HEADER,
                                 _post_stats_rows(bundle, _txt4)))
    if bundle.comparisons:
        parts.append(_text_table("PLNA vs fixed designs", _COMPARISON_HEADER,
                                 _comparison_rows(bundle, _txt4)))
    return "".join(parts) if parts else "(empty report)\n"


@dataclass
class RunManifest:
    """Provenance of one CLI run; timings are excluded from determinism checks."""

    command: str
    seed: int
    n: int
    config_digest: str
    tool_version: str
    timings_s: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "command": self.command,
            "seed": self.seed,
            "n": self.n,
            "config_digest": self.config_digest,
            "tool_version": self.tool_version,
            "timings_s": {k: round(v, 6) for k, v in self.timings_s.items()},
        }

    def write(self, path) -> None:
        write_json(path, self.to_json())
