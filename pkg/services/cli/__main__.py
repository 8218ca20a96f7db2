# File Path: services/cli/__main__.py

import sys

from .cli_service import main

if __name__ == "__main__":
    sys.exit(main())
