import sys

from qiadv.cli import main

sys.exit(main())
