"""Command line: ``bmstrun-plot --spec <file>``.

Exit codes: 0 success, 2 bad spec/schema, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import sys

from .csvio import CsvSchemaError
from .render import render
from .spec import PlotSpecError, load_plot_spec


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bmstrun-plot",
        description="Render simulator CSV outputs as log-scale error-rate figures.",
    )
    parser.add_argument("--spec", required=True, help="plot spec file")
    args = parser.parse_args(argv)
    try:
        out = render(load_plot_spec(args.spec))
    except (PlotSpecError, CsvSchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
