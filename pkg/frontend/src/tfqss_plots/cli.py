"""Command line front end.

Two ways to select inputs: ``--preset`` globs the fixed file names the
rate tool's preset mode writes into a directory, ``--files`` takes
explicit paths.  Either way one image comes out; ``--summarize`` prints
the text table as well.
"""

import argparse
import glob
import os
import re
import sys

from .plotting import CurveSpec, render, summarize
from .schema import SchemaError

PRESETS = ("fig3", "fig4", "fig5")

_GLOBS = {
    "fig3": "fig3_N*.csv",
    "fig4": "fig4_delta*.csv",
    "fig5": "fig5_delta*_*.csv",
}


def _preset_label(preset, path):
    stem = os.path.splitext(os.path.basename(path))[0]
    if preset == "fig3":
        m = re.fullmatch(r"fig3_N(.+)", stem)
        return f"N = {m.group(1)}" if m else stem
    if preset == "fig4":
        m = re.fullmatch(r"fig4_delta(\d+)", stem)
        return f"delta = {int(m.group(1))} km" if m else stem
    m = re.fullmatch(r"fig5_delta(\d+)_(asymmetric|baseline)", stem)
    if not m:
        return stem
    kind = "free" if m.group(2) == "asymmetric" else "equal"
    return f"delta = {int(m.group(1))} km, {kind}"


def _preset_spec(preset, in_dir, out, log_y):
    paths = sorted(glob.glob(os.path.join(in_dir, _GLOBS[preset])))
    if not paths:
        raise FileNotFoundError(
            f"no {_GLOBS[preset]} files in {in_dir}")
    labels = tuple(_preset_label(preset, p) for p in paths)
    return CurveSpec(inputs=tuple(paths), labels=labels, out=out,
                     log_y=log_y, title=preset)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="plot",
        description="Render rate-vs-distance figures from sweep CSVs.")
    parser.add_argument("--preset", choices=PRESETS,
                        help="plot a preset file set from --in")
    parser.add_argument("--in", dest="in_dir", metavar="DIR",
                        help="directory holding the preset CSVs")
    parser.add_argument("--files", nargs="+", metavar="CSV",
                        help="explicit input files")
    parser.add_argument("--labels", nargs="+", metavar="TEXT",
                        help="one legend label per --files entry")
    parser.add_argument("--out", metavar="IMAGE", required=True,
                        help="output image path (png, pdf, svg)")
    parser.add_argument("--linear-y", action="store_true",
                        help="linear instead of log y axis")
    parser.add_argument("--summarize", action="store_true",
                        help="print the per-curve summary table")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if bool(args.preset) == bool(args.files):
        parser.error("exactly one of --preset and --files is required")
    if args.preset and not args.in_dir:
        parser.error("--preset requires --in")
    try:
        if args.preset:
            spec = _preset_spec(args.preset, args.in_dir, args.out,
                                not args.linear_y)
        else:
            labels = (tuple(args.labels) if args.labels else
                      tuple(os.path.basename(f) for f in args.files))
            spec = CurveSpec(inputs=tuple(args.files), labels=labels,
                             out=args.out, log_y=not args.linear_y)
        render(spec)
        if args.summarize:
            print(summarize(spec))
    except (SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
