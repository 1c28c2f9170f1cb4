from deagrey.cli import main
import sys

sys.exit(main())
