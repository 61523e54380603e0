#!/usr/bin/env python3
"""memsplit command line: see ``python memsplit.py --help``."""

import sys

from src.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
