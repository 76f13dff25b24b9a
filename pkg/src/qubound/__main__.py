import sys

from qubound.cli import main

sys.exit(main())
