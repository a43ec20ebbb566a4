import sys

from pelram.cli import main

sys.exit(main())
