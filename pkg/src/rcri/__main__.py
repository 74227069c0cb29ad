import sys

from rcri.cli import main

sys.exit(main())
