"""Allow ``python3 -m sdparse`` as an alias for the installed script."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
