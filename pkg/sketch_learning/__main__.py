import sys

from sketch_learning.cli.main import main

sys.exit(main())
