"""Allow ``python -m engagement``."""

import sys

from engagement.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
