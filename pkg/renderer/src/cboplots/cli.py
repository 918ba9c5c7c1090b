"""Command line: cborelax-render --spec <plotspec.json>."""

from __future__ import annotations

import argparse
import sys

from .formulas import SchemaError
from .render import PlotSpec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="cborelax-render")
    parser.add_argument("--spec", required=True, help="plot spec JSON file")
    args = parser.parse_args(argv)
    try:
        spec = PlotSpec.from_file(args.spec)
        out = render(spec)
    except (SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
