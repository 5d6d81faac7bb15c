"""Entry point for the catbreak command line."""

from __future__ import annotations

import sys

from catbreak.cli import main

if __name__ == "__main__":
    sys.exit(main())
