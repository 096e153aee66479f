"""Rate-vs-distance figures and text summaries from sweep CSVs.

Numbers are never re-derived here: everything printed or plotted is read
straight from the files.  Zero rates cannot sit on a log axis, so they
become gaps, which terminates a curve at its reach limit the way the
underlying sweeps do.
"""

import math
import os
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .schema import read_curve


@dataclass(frozen=True)
class CurveSpec:
    """One figure: n input curves, one output image."""

    inputs: tuple
    labels: tuple
    out: str
    log_y: bool = True
    x_label: str = "total distance L (km)"
    y_label: str = "secret-key rate per slot"
    title: str = ""

    def __post_init__(self):
        if not self.inputs:
            raise ValueError("CurveSpec needs at least one input file")
        if len(self.labels) != len(self.inputs):
            raise ValueError("one label per input file")


def curve_xy(data):
    """Distance/rate pairs with zero rates replaced by nan.

    nan breaks the plotted line, so a curve ends where the rate dies
    instead of producing log(0).
    """
    xs = data["L_km"]
    ys = [r if r > 0.0 else math.nan for r in data["rate"]]
    return xs, ys


def build_figure(spec, curves):
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for label, data in zip(spec.labels, curves):
        xs, ys = curve_xy(data)
        ax.plot(xs, ys, label=label, linewidth=1.4)
    if spec.log_y:
        ax.set_yscale("log")
    ax.set_xlabel(spec.x_label)
    ax.set_ylabel(spec.y_label)
    if spec.title:
        ax.set_title(spec.title)
    if any(spec.labels):
        ax.legend()
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    return fig


def render(spec):
    """Write the figure for ``spec`` and return the output path."""
    curves = []
    for path in spec.inputs:
        data = read_curve(path)
        if not data["rate"]:
            print(f"warning: {path} has no data rows", file=sys.stderr)
        curves.append(data)
    fig = build_figure(spec, curves)
    fig.savefig(spec.out, dpi=150)
    plt.close(fig)
    return spec.out


def _pair_stem(path, suffix):
    base = os.path.basename(path)
    return base[:-len(suffix)] if base.endswith(suffix) else None


def detect_pairs(inputs):
    """Index pairs (name, i_free, i_equal) from the compare-file naming.

    The producer writes compare sweeps as <stem>_asymmetric.csv plus
    <stem>_baseline.csv; anything else forms no pair.
    """
    stems = {}
    for i, path in enumerate(inputs):
        stem = _pair_stem(path, "_asymmetric.csv")
        if stem is not None:
            stems.setdefault(stem, [None, None])[0] = i
        stem = _pair_stem(path, "_baseline.csv")
        if stem is not None:
            stems.setdefault(stem, [None, None])[1] = i
    return [(stem, a, b) for stem, (a, b) in sorted(stems.items())
            if a is not None and b is not None]


def summarize(spec):
    """Per-curve reach and rate at 100 km, plus pair ratios, as text.

    Values are printed with repr so they match the CSV digits exactly.
    """
    curves = [read_curve(path) for path in spec.inputs]
    width = max([len(label) for label in spec.labels] + [5])
    lines = [f"{'curve':<{width}}  {'L_max (km)':>10}  rate at L=100 km"]
    for label, data in zip(spec.labels, curves):
        positive = [(L, r) for L, r in zip(data["L_km"], data["rate"])
                    if r > 0.0]
        if not positive:
            lines.append(f"{label:<{width}}  no positive rate")
            continue
        l_max = max(L for L, _ in positive)
        at_100 = next((r for L, r in zip(data["L_km"], data["rate"])
                       if L == 100.0), None)
        cell = repr(at_100) if at_100 is not None else "-"
        lines.append(f"{label:<{width}}  {l_max:>10g}  {cell}")

    for name, i, j in detect_pairs(spec.inputs):
        num, den = curves[i], curves[j]
        shared = [(L, a / b) for L, a, b
                  in zip(num["L_km"], num["rate"], den["rate"])
                  if a > 0.0 and b > 0.0]
        if not shared:
            lines.append(f"max ratio {name}: no shared positive points")
            continue
        at_l, best = max(shared, key=lambda t: t[1])
        lines.append(f"max ratio {name}: {best!r} at L={at_l:g} km")
    return "\n".join(lines)
