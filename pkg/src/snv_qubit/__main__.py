import sys

from snv_qubit.cli import main

sys.exit(main())
