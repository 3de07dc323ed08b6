import sys

from flatgrowth.cli import main

sys.exit(main())
