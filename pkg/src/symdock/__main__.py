import sys

from symdock.cli import main


sys.exit(main())
