import sys

from lexidiag.cli import main

sys.exit(main())
