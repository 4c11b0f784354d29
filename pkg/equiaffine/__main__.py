import sys

from equiaffine.cli import main

sys.exit(main())
