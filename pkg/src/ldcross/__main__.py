from __future__ import annotations

import sys

from ldcross.cli import cli


def main() -> int:
    cli(prog_name='pyldcross')
    return 0


if __name__ == '__main__':
    sys.exit(main())
