import sys

from andersonlab.harness.cli import main

sys.exit(main())
