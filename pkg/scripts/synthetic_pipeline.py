#!/usr/bin/env python3
"""Thin wrapper around the package's end-to-end synthetic pipeline.

Usage: python3 scripts/synthetic_pipeline.py --out-dir runs/demo [--seed 7 ...]
Same seed and parameters -> byte-identical artifacts.
"""

import sys

from intertext.pipeline import main

if __name__ == "__main__":
    sys.exit(main())
