#!/usr/bin/env python3
"""Entry point: render a simulation CSV as a figure panel.

Usage::

    render.py --panel heatmap --in sweep.csv --out fig2a.png
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "src"))

from plotkit.render import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
