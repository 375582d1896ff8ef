import sys

from abelreg.cli import main

sys.exit(main())
