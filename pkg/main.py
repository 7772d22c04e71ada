#!/usr/bin/env uv run
# /// script
# dependencies = [
#   "numpy>=1.24",
#   "scipy>=1.10",
#   "soundfile>=0.12",
#   "pyyaml",
#   "colorama",
#   "tqdm"
# ]
# ///
import sys

from sepdiff.cli import main

if __name__ == "__main__":
    sys.exit(main())
