# locscale/__main__.py

import sys

from locscale.cli.main import main

sys.exit(main())
