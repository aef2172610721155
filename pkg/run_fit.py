#!/usr/bin/env python3
"""
Concentric Fit Entry Point
Command-line fitting, Monte Carlo benchmarks and bias scans
"""

import sys

from concentric_fit.cli import main

if __name__ == '__main__':
    sys.exit(main())
