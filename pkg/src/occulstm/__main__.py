import sys

from occulstm.cli import main

sys.exit(main())
