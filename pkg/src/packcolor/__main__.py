import sys

from packcolor.cli import main

sys.exit(main())
