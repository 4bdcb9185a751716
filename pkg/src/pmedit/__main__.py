import sys

from pmedit.cli import main

sys.exit(main())
