"""render_figures <csv> <figure_kind> <out.png>"""

from __future__ import annotations

import argparse
import sys

from .renderer import FIGURE_KINDS, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="render_figures", description=__doc__)
    parser.add_argument("csv", help="experiment CSV (long format)")
    parser.add_argument("figure_kind", choices=sorted(FIGURE_KINDS))
    parser.add_argument("out_image", help="output image path (png)")
    args = parser.parse_args(argv)
    print(render(args.csv, args.figure_kind, args.out_image))
    return 0


if __name__ == "__main__":
    sys.exit(main())
