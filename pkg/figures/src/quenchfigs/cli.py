"""quenchfigs: render figure panels from simulation CSV outputs."""

from __future__ import annotations

import argparse
import sys

from .panels import PANEL_KINDS, PanelSpec, render
from .schema import SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quenchfigs",
        description="Render panels (PNG) from quench CSV files; one panel per invocation",
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in PANEL_KINDS:
        cmd = sub.add_parser(kind)
        cmd.add_argument("inputs", nargs="+", help="input CSV file(s)")
        cmd.add_argument("--out", required=True, help="output image path")
        cmd.add_argument("--labels", help="comma list, one legend label per input")
        cmd.add_argument("--title", default="")
        if kind == "mel-overlay":
            cmd.add_argument("--axis", choices=("x", "z"), default="z")
            cmd.add_argument(
                "--offset", type=float, default=0.0,
                help="vertical offset between successive curves, for clarity",
            )
        if kind == "longtime-vs-h":
            cmd.add_argument("--metric", default="MI_half")
    return parser


def spec_from_args(args) -> PanelSpec:
    labels = tuple(tok.strip() for tok in args.labels.split(",")) if args.labels else ()
    return PanelSpec(
        kind=args.kind,
        inputs=tuple(args.inputs),
        out_path=args.out,
        labels=labels,
        offset=getattr(args, "offset", 0.0),
        axis=getattr(args, "axis", "z"),
        metric=getattr(args, "metric", "MI_half"),
        title=args.title,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        written = render(spec_from_args(args))
    except (SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(written)
    return 0


if __name__ == "__main__":
    sys.exit(main())
