import sys

from cavity_w.cli import main

sys.exit(main())
