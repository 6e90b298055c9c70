"""Run the tourplanner command line."""
import sys

from .cli import main

sys.exit(main())
