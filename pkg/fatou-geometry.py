#!/usr/bin/env python3
"""Dev launcher: run without pip install. Use: PYTHONPATH=. python fatou-geometry.py analyze"""
import sys

from fatou_geometry.tools.main import main

if __name__ == "__main__":
    sys.exit(main())
