import sys

from qoscompose.cli import main

sys.exit(main())
